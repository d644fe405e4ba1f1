//! The hyperbolic plane as the half-space `{(ρ, η) : ρ > 0}` and as the
//! sheet `{A ∈ S²ℝ² : det A = 1, A > 0}`, with the `SL₂(ℝ)` action.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    rho: f64,
    eta: f64,
}

impl HalfSpacePoint {
    pub fn new(rho: f64, eta: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite() && eta.is_finite()) {
            return Err(Error::Domain(format!("half-space point needs finite rho > 0, got ({rho}, {eta})")));
        }
        Ok(HalfSpacePoint { rho, eta })
    }

    pub fn rho(self) -> f64 {
        self.rho
    }

    pub fn eta(self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdPoint(Matrix2<f64>);

impl SpdPoint {
    /// Symmetrizes, checks positivity and `|det - 1| <= 1e-12`.
    pub fn new(a: Matrix2<f64>) -> Result<Self> {
        let s = (a + a.transpose()) * 0.5;
        let det = s.determinant();
        if !(s[(0, 0)] > 0.0 && det > 0.0) {
            return Err(Error::Domain("matrix is not positive definite".into()));
        }
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::Domain(format!("det = {det} is not 1")));
        }
        Ok(SpdPoint(s))
    }


    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsometryMap(Matrix2<f64>);

impl IsometryMap {
    pub fn new(b: Matrix2<f64>) -> Result<Self> {
        let det = b.determinant();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::Domain(format!("isometry needs det 1, got {det}")));
        }
        Ok(IsometryMap(b))
    }

    pub fn from_entries(e: [[f64; 2]; 2]) -> Result<Self> {
        IsometryMap::new(Matrix2::new(e[0][0], e[0][1], e[1][0], e[1][1]))
    }

    pub fn identity() -> Self {
        IsometryMap(Matrix2::identity())
    }

    /// `[[0,1],[-1,0]]`, acting as `(ρ, η) ↦ (ρ, -η) / (ρ² + η²)`.
    pub fn inversion() -> Self {
        IsometryMap(Matrix2::new(0.0, 1.0, -1.0, 0.0))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn compose(&self, other: &IsometryMap) -> IsometryMap {
        IsometryMap(self.0 * other.0)
    }
}

/// `A(ρ, η) = (1/ρ) [[1, η], [η, ρ² + η²]]`.
pub fn chart(p: HalfSpacePoint) -> SpdPoint {
    let (r, e) = (p.rho, p.eta);
    SpdPoint(Matrix2::new(1.0, e, e, r * r + e * e) / r)
}

pub fn unchart(a: &SpdPoint) -> Result<HalfSpacePoint> {
    let m = a.0;
    if m[(0, 0)] <= 0.0 {
        return Err(Error::Domain("A_11 must be positive".into()));
    }
    HalfSpacePoint::new(1.0 / m[(0, 0)], m[(0, 1)] / m[(0, 0)])
}

/// `B · A · Bᵀ / det B`. Dividing by `det B` (rather than by the computed
/// determinant of the product, which cancels badly) absorbs the drift of
/// `det B` from 1.
pub fn act(b: &IsometryMap, a: &SpdPoint) -> SpdPoint {
    let m = b.0 * a.0 * b.0.transpose() / b.0.determinant();
    SpdPoint((m + m.transpose()) * 0.5)
}

pub fn act_point(b: &IsometryMap, p: HalfSpacePoint) -> Result<HalfSpacePoint> {
    unchart(&act(b, &chart(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

/// Limit of [`act`] as `ρ → 0`: `η ↦ (B₂₁ + B₂₂η) / (B₁₁ + B₁₂η)`.
pub fn boundary_action(b: &IsometryMap, eta: BoundaryPoint) -> BoundaryPoint {
    let m = b.0;
    let (num, den) = match eta {
        BoundaryPoint::Finite(e) => (m[(1, 0)] + m[(1, 1)] * e, m[(0, 0)] + m[(0, 1)] * e),
        BoundaryPoint::Infinity => (m[(1, 1)], m[(0, 1)]),
    };
    if den == 0.0 {
        BoundaryPoint::Infinity
    } else {
        BoundaryPoint::Finite(num / den)
    }
}

/// Fourth-order central-difference estimate of `ρ²(F_ρρ + F_ηη)`.
pub fn fd_laplacian<F: Fn(f64, f64) -> f64>(field: &F, p: HalfSpacePoint, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < p.rho / 4.0) {
        return Err(Error::Domain(format!("step {h} must lie in (0, rho/4)")));
    }
    let (r, e) = (p.rho, p.eta);
    let c = field(r, e);
    let second = |g: &dyn Fn(f64) -> f64| {
        (-g(2.0 * h) + 16.0 * g(h) - 30.0 * c + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h)
    };
    let frr = second(&|d| field(r + d, e));
    let fee = second(&|d| field(r, e + d));
    Ok(r * r * (frr + fee))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, e: f64) -> HalfSpacePoint {
        HalfSpacePoint::new(r, e).unwrap()
    }

    #[test]
    fn chart_examples() {
        assert_eq!(*chart(pt(1.0, 0.0)).matrix(), Matrix2::identity());
        let a = chart(pt(2.0, 1.0));
        assert_eq!(*a.matrix(), Matrix2::new(0.5, 0.5, 0.5, 2.5));
        let back = unchart(&a).unwrap();
        assert_eq!((back.rho(), back.eta()), (2.0, 1.0));
        assert!(HalfSpacePoint::new(0.0, 1.0).is_err());
        assert!(SpdPoint::new(Matrix2::new(2.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn inversion_formula() {
        let (r, e) = (0.7, 1.3);
        let s = r * r + e * e;
        let q = act_point(&IsometryMap::inversion(), pt(r, e)).unwrap();
        assert!((q.rho() - r / s).abs() < 1e-14);
        assert!((q.eta() + e / s).abs() < 1e-14);
    }

    #[test]
    fn boundary_examples() {
        let inv = IsometryMap::inversion();
        assert_eq!(boundary_action(&inv, BoundaryPoint::Finite(1.0)), BoundaryPoint::Finite(-1.0));
        assert_eq!(boundary_action(&inv, BoundaryPoint::Finite(0.0)), BoundaryPoint::Infinity);
        assert_eq!(boundary_action(&inv, BoundaryPoint::Infinity), BoundaryPoint::Finite(0.0));
        let id = IsometryMap::identity();
        assert_eq!(boundary_action(&id, BoundaryPoint::Finite(2.5)), BoundaryPoint::Finite(2.5));
    }

    #[test]
    fn boundary_is_limit_of_interior() {
        let b = IsometryMap::from_entries([[2.0, 1.0], [3.0, 2.0]]).unwrap();
        for eta in [-1.7, 0.2, 3.0] {
            let q = act_point(&b, pt(1e-6, eta)).unwrap();
            let BoundaryPoint::Finite(x) = boundary_action(&b, BoundaryPoint::Finite(eta)) else { panic!() };
            assert!((q.eta() - x).abs() < 1e-9 && q.rho() < 1e-4);
        }
    }

    #[test]
    fn laplacian_examples() {
        let v = fd_laplacian(&|r: f64, _| r.powf(1.5), pt(1.0, 0.0), 1e-2).unwrap();
        assert!((v - 0.75).abs() < 1e-8);
        assert_eq!(fd_laplacian(&|_, _| 3.0, pt(1.0, 0.0), 0.1).unwrap(), 0.0);
        let pole = |r: f64, e: f64| (r * r + e * e).sqrt() / r.sqrt();
        let p = pt(0.8, 0.4);
        let v = fd_laplacian(&pole, p, 1e-2).unwrap();
        assert!((v - 0.75 * pole(0.8, 0.4)).abs() < 1e-7);
        assert!(fd_laplacian(&pole, p, 0.3).is_err());
    }

    #[test]
    fn laplacian_fourth_order() {
        let field = |r: f64, e: f64| r.powf(1.5) * (1.0 + 0.3 * e.sin()) + (r * e).cos();
        let p = pt(1.1, 0.2);
        // converged reference from a much smaller step
        let exact = fd_laplacian(&field, p, 2e-3).unwrap();
        let e1 = (fd_laplacian(&field, p, 0.08).unwrap() - exact).abs();
        let e2 = (fd_laplacian(&field, p, 0.04).unwrap() - exact).abs();
        let order = (e1 / e2).log2();
        assert!(order > 3.7, "order {order}");
    }
}
