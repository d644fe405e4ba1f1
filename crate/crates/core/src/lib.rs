//! Computational toolkit for compact toric selfdual Einstein 4-orbifolds.
//!
//! * [`lattice`], [`topology`], [`admissibility`]: exact invariants of the
//!   isotropy data and the admissibility decision, with conversion to and from
//!   multipole weights.
//! * [`hyperbolic`], [`eigenfunction`]: the half-space model, the k-pole
//!   eigenfunction of the hyperbolic Laplacian, its boundary value, Poisson
//!   transform and the determinant `det Φ`.
//! * [`metric`], [`curvature`]: the explicit 4-metric and finite-difference
//!   verification that it is Einstein with selfdual Weyl curvature.

pub mod admissibility;
pub mod curvature;
pub mod eigenfunction;
pub mod error;
pub mod hyperbolic;
pub mod intmat;
pub mod lattice;
pub mod metric;
pub mod quadrature;
pub mod topology;

pub use admissibility::{
    decide_admissible, from_multipole, subtorus_kernel, to_multipole, AdmissibilityVerdict, HalfInt,
    KernelLattice, MultipoleData,
};
pub use curvature::{curvature_at, verify_field, CurvatureReport, FieldReport, Grid};
pub use eigenfunction::{BoundaryValue, EigenJet};
pub use error::{Error, Result};
pub use hyperbolic::{HalfSpacePoint, IsometryMap, SpdPoint};
pub use lattice::{IsotropyData, LatticeVector, UnimodularMap, ValidityReport};
pub use metric::{metric_at, MetricAtPoint};
pub use topology::{IntersectionForm, TopologyReport};
