//! The selfdual Einstein metric `g_F` in coordinates `(ρ, η, ψ₁, ψ₂)`:
//!
//! ```text
//! g = (dρ² + dη²)/(κ²f²) + (κ²/f²) dψᵀ PᵀP dψ,   κ² = ρ / (f f_ρ - ρ(f_ρ² + f_η²))
//! P = [[ρf_η - ηf_ρ, f_ρ], [f - ρf_ρ - ηf_η, f_η]]
//! ```

use nalgebra::{Matrix2, Matrix4};
use serde::Serialize;

use crate::admissibility::MultipoleData;
use crate::eigenfunction::{det_phi_pairs, eval_jet_terms, EigenJet};
use crate::error::{Error, Result};
use crate::hyperbolic::HalfSpacePoint;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAtPoint {
    pub g: [[f64; 4]; 4],
    pub kappa: f64,
    pub p: [[f64; 2]; 2],
    pub det_phi: f64,
    pub f: f64,
}

impl MetricAtPoint {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.g[i][j])
    }

    pub fn p_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.p[0][0], self.p[0][1], self.p[1][0], self.p[1][1])
    }
}

fn p_of(j: &EigenJet, rho: f64, eta: f64) -> Matrix2<f64> {
    Matrix2::new(
        rho * j.f_eta - eta * j.f_rho,
        j.f_rho,
        j.f - rho * j.f_rho - eta * j.f_eta,
        j.f_eta,
    )
}

fn checked(j: &EigenJet, rho: f64) -> Result<f64> {
    if !(j.f > 0.0) {
        return Err(Error::SingularMetric(j.f));
    }
    let d = j.det_phi_f_form(rho);
    // cancellation leaves O(ε·f f_ρ) noise where det Φ vanishes identically
    if !(d > 1e-12 * (j.f * j.f_rho).abs()) {
        return Err(Error::OutsideAdmissible(d));
    }
    Ok(d)
}

/// Block form with `κ` and `P`, taking `det Φ` from the jet.
pub fn metric_from_jet(j: &EigenJet, p: HalfSpacePoint) -> Result<MetricAtPoint> {
    let d = checked(j, p.rho())?;
    assemble(j, p, d)
}

fn assemble(j: &EigenJet, p: HalfSpacePoint, d: f64) -> Result<MetricAtPoint> {
    let (rho, eta) = (p.rho(), p.eta());
    let kappa2 = rho / d;
    let pm = p_of(j, rho, eta);
    let torus = pm.transpose() * pm * (kappa2 / (j.f * j.f));
    let base = 1.0 / (kappa2 * j.f * j.f);
    let mut g = [[0.0; 4]; 4];
    g[0][0] = base;
    g[1][1] = base;
    for a in 0..2 {
        for b in 0..2 {
            g[2 + a][2 + b] = torus[(a, b)];
        }
    }
    Ok(MetricAtPoint {
        g,
        kappa: kappa2.sqrt(),
        p: [[pm[(0, 0)], pm[(0, 1)]], [pm[(1, 0)], pm[(1, 1)]]],
        det_phi: d,
        f: j.f,
    })
}

/// `ω(x, y) = x₁y₂ - x₂y₁`.
fn symplectic(x: (f64, f64), y: (f64, f64)) -> f64 {
    x.0 * y.1 - x.1 * y.0
}

/// The same metric assembled from the frame vectors
/// `v₁ = (f_ρ, ηf_ρ - ρf_η)`, `v₂ = (f_η, ρf_ρ + ηf_η - f)`:
///
/// ```text
/// g = ρ|ω(v₁,v₂)|/f² ((dρ² + dη²)/ρ² + (ω(v₁,dz)² + ω(v₂,dz)²)/ω(v₁,v₂)²)
/// ```
pub fn metric_from_frame(j: &EigenJet, p: HalfSpacePoint) -> Result<[[f64; 4]; 4]> {
    let (rho, eta) = (p.rho(), p.eta());
    checked(j, rho)?;
    let v1 = (j.f_rho, eta * j.f_rho - rho * j.f_eta);
    let v2 = (j.f_eta, rho * j.f_rho + eta * j.f_eta - j.f);
    let pair = symplectic(v1, v2);
    let scale = rho * pair.abs() / (j.f * j.f);
    // ω(v, dz) = v₁ dz₂ - v₂ dz₁ as a covector in (dz₁, dz₂)
    let rows = [(-v1.1, v1.0), (-v2.1, v2.0)];
    let mut g = [[0.0; 4]; 4];
    g[0][0] = scale / (rho * rho);
    g[1][1] = scale / (rho * rho);
    for (x, y) in rows {
        let c = [x, y];
        for a in 0..2 {
            for b in 0..2 {
                g[2 + a][2 + b] += scale * c[a] * c[b] / (pair * pair);
            }
        }
    }
    Ok(g)
}

/// Block form with `det Φ` summed over pairs of poles.
pub fn metric_at_terms(terms: &[(f64, f64)], p: HalfSpacePoint) -> Result<MetricAtPoint> {
    let j = eval_jet_terms(terms, p);
    if !(j.f > 0.0) {
        return Err(Error::SingularMetric(j.f));
    }
    let d = det_phi_pairs(terms, p);
    if !(d > 0.0) {
        return Err(Error::OutsideAdmissible(d));
    }
    assemble(&j, p, d)
}

pub fn metric_at(w: &MultipoleData, p: HalfSpacePoint) -> Result<MetricAtPoint> {
    metric_at_terms(&w.as_f64(), p)
}

/// Largest entrywise difference between the two assemblies, relative to the
/// largest entry.
pub fn dual_formula_residual(terms: &[(f64, f64)], p: HalfSpacePoint) -> Result<f64> {
    let j = eval_jet_terms(terms, p);
    let a = metric_from_jet(&j, p)?.g;
    let b = metric_from_frame(&j, p)?;
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(diff / scale)
}
