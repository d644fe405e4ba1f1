//! The k-pole eigenfunction
//! `F(ρ, η) = Σ √(a_i²ρ² + (a_iη - b_i)²) / √ρ`
//! of `ρ²(∂²_ρ + ∂²_η) F = ¾ F`, its boundary value
//! `f_0(η) = Σ |a_iη - b_i|`, the Poisson transform and `det Φ`.
//!
//! `f = √ρ·F` is carried alongside `F`; in terms of it
//! `det Φ = ¼F² - ρ²|∇F|² = f f_ρ - ρ(f_ρ² + f_η²)`.

use serde::Serialize;

use crate::admissibility::{from_multipole, to_multipole, MultipoleData};
use crate::error::{Error, Result};
use crate::hyperbolic::{boundary_action, BoundaryPoint, HalfSpacePoint, IsometryMap, SpdPoint};
use crate::lattice::{IsotropyData, LatticeVector, UnimodularMap};
use crate::quadrature::{integrate_split, Tolerance};

/// Global sign relating the boundary moment integral for `det Φ` to
/// `¼F² - |dF|²`. Calibrated once on the round `S⁴` weights, where both are
/// `½` at `(1, 0)`; see the `quadrature_sign_calibration` test.
pub const DET_PHI_QUADRATURE_SIGN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EigenJet {
    pub f_big: f64,
    pub f_big_rho: f64,
    pub f_big_eta: f64,
    pub f_big_rhorho: f64,
    pub f_big_etaeta: f64,
    pub f_big_rhoeta: f64,
    pub f: f64,
    pub f_rho: f64,
    pub f_eta: f64,
}

impl EigenJet {
    /// `ρ²(F_ρρ + F_ηη) - ¾F`.
    pub fn eigen_residual(&self, rho: f64) -> f64 {
        rho * rho * (self.f_big_rhorho + self.f_big_etaeta) - 0.75 * self.f_big
    }

    pub fn det_phi(&self, rho: f64) -> f64 {
        0.25 * self.f_big * self.f_big - rho * rho * (self.f_big_rho.powi(2) + self.f_big_eta.powi(2))
    }

    pub fn det_phi_f_form(&self, rho: f64) -> f64 {
        self.f * self.f_rho - rho * (self.f_rho.powi(2) + self.f_eta.powi(2))
    }
}

/// Jet of the superposition of basic solutions `√(a²ρ² + (aη - b)²)/√ρ`,
/// differentiated termwise in closed form. Terms with `a = 0` are the
/// eigenfunction `|b|/√ρ`.
pub fn eval_jet_terms(terms: &[(f64, f64)], p: HalfSpacePoint) -> EigenJet {
    let (r, e) = (p.rho(), p.eta());
    let sr = r.sqrt();
    let (r12, r32, r52) = (1.0 / sr, 1.0 / (r * sr), 1.0 / (r * r * sr));
    let mut j = EigenJet::default();
    for &(a, b) in terms {
        let u = a * e - b;
        let s = (a * a * r * r + u * u).sqrt();
        let s3 = s * s * s;
        let s_r = a * a * r / s;
        let s_e = a * u / s;
        let s_rr = a * a * u * u / s3;
        let s_ee = a.powi(4) * r * r / s3;
        let s_re = -a.powi(3) * r * u / s3;

        j.f += s;
        j.f_rho += s_r;
        j.f_eta += s_e;
        j.f_big += s * r12;
        j.f_big_rho += s_r * r12 - 0.5 * s * r32;
        j.f_big_eta += s_e * r12;
        j.f_big_rhorho += s_rr * r12 - s_r * r32 + 0.75 * s * r52;
        j.f_big_etaeta += s_ee * r12;
        j.f_big_rhoeta += s_re * r12 - 0.5 * s_e * r32;
    }
    j
}

pub fn eval_jet(w: &MultipoleData, p: HalfSpacePoint) -> EigenJet {
    eval_jet_terms(&w.as_f64(), p)
}

/// `det Φ` of a superposition as a sum over pairs of poles,
///
/// ```text
/// det Φ = ρ Σ_{i<j} (a_i b_j - a_j b_i)² / (s_i s_j),   s_i = √(a_i²ρ² + (a_iη - b_i)²)
/// ```
///
/// A single pole contributes nothing, so this avoids the cancellation in the
/// jet forms near the boundary.
pub fn det_phi_pairs(terms: &[(f64, f64)], p: HalfSpacePoint) -> f64 {
    let (r, e) = (p.rho(), p.eta());
    let s: Vec<f64> = terms.iter().map(|&(a, b)| (a * a * r * r + (a * e - b).powi(2)).sqrt()).collect();
    let mut sum = 0.0;
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let c = terms[i].0 * terms[j].1 - terms[j].0 * terms[i].1;
            sum += c * c / (s[i] * s[j]);
        }
    }
    r * sum
}

/// `F(A) = Σ √(wᵀ A w)` with `w = (-b, a)`; equals the chart formula at
/// `A = chart(ρ, η)`.
pub fn eval_invariant(terms: &[(f64, f64)], a: &SpdPoint) -> f64 {
    let m = a.matrix();
    terms
        .iter()
        .map(|&(wa, wb)| {
            let (x, y) = (-wb, wa);
            (m[(0, 0)] * x * x + 2.0 * m[(0, 1)] * x * y + m[(1, 1)] * y * y).sqrt()
        })
        .sum()
}

/// `f_0(η) = Σ |a_iη - b_i|`, convex piecewise linear, with
/// `f_0'' = Σ 2a_i δ_{y_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryValue {
    /// `y_i = b_i / a_i` for the terms with `a_i > 0`, increasing.
    pub kinks: Vec<f64>,
    /// `2a_i`, the jump of `f_0'` at `y_i`.
    pub masses: Vec<f64>,
    terms: Vec<(f64, f64)>,
}

impl BoundaryValue {
    /// Terms `|aη - b|` with `a >= 0`; `a = 0` contributes the constant `|b|`.
    pub fn from_terms(terms: Vec<(f64, f64)>) -> Result<Self> {
        if terms.iter().any(|&(a, b)| !(a >= 0.0 && a.is_finite() && b.is_finite())) {
            return Err(Error::InvalidWeights("boundary terms need finite a >= 0".into()));
        }
        let mut kinked: Vec<(f64, f64)> =
            terms.iter().filter(|t| t.0 > 0.0).map(|&(a, b)| (b / a, 2.0 * a)).collect();
        kinked.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(BoundaryValue {
            kinks: kinked.iter().map(|k| k.0).collect(),
            masses: kinked.iter().map(|k| k.1).collect(),
            terms,
        })
    }

    pub fn zero() -> Self {
        BoundaryValue { kinks: Vec::new(), masses: Vec::new(), terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn eval(&self, eta: f64) -> f64 {
        self.terms.iter().map(|&(a, b)| (a * eta - b).abs()).sum()
    }

    /// `(slope, intercept)` of the affine piece containing `eta`, taking the
    /// right-hand piece at a kink.
    pub fn affine_at(&self, eta: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(s, c), &(a, b)| {
            if a == 0.0 {
                (s, c + b.abs())
            } else if a * eta - b >= 0.0 {
                (s + a, c - b)
            } else {
                (s - a, c + b)
            }
        })
    }

    /// `f_0'`, `μ` in the moment formula for `det Φ`.
    pub fn slope(&self, eta: f64) -> f64 {
        self.affine_at(eta).0
    }

    /// `η f_0'(η) - f_0(η)`, `ν` in the moment formula for `det Φ`.
    pub fn nu(&self, eta: f64) -> f64 {
        -self.affine_at(eta).1
    }

    fn span(&self, p: HalfSpacePoint) -> (f64, f64) {
        let lo = self.kinks.first().copied().unwrap_or(p.eta()).min(p.eta()) - p.rho();
        let hi = self.kinks.last().copied().unwrap_or(p.eta()).max(p.eta()) + p.rho();
        (lo, hi)
    }
}

pub fn boundary_value(w: &MultipoleData) -> BoundaryValue {
    BoundaryValue::from_terms(w.as_f64()).expect("multipole weights have a > 0")
}

/// `f̂_0(x, y) = Σ |a_i y - b_i x|`, so `f̂_0(1, η) = f_0(η)`.
pub fn homogeneous_extension(b: &BoundaryValue, x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::Domain("homogeneous extension is undefined at the origin".into()));
    }
    Ok(b.terms.iter().map(|&(a, bb)| (a * y - bb * x).abs()).sum())
}

/// Boundary value after the change of basis `w_i ↦ U w_i`:
/// `f̃_0(η') = f̂_0(U⁻¹(1, η'))`.
pub fn transport_boundary(b: &BoundaryValue, u: &UnimodularMap) -> BoundaryValue {
    let m = u.entries().map(|r| r.map(|x| x as f64));
    let terms = b
        .terms
        .iter()
        .map(|&(a, bb)| {
            let (na, nb) = (m[0][0] * a + m[0][1] * bb, m[1][0] * a + m[1][1] * bb);
            if na < 0.0 {
                (-na, -nb)
            } else {
                (na, nb)
            }
        })
        .collect();
    BoundaryValue::from_terms(terms).expect("normalized to a >= 0")
}

// ∫_U^∞ ρ^{3/2}(α u + c) / (ρ² + u²)^{3/2} du
fn kernel_tail(rho: f64, alpha: f64, c: f64, u0: f64) -> f64 {
    let q = (rho * rho + u0 * u0).sqrt();
    rho.powf(1.5) * (alpha / q + c * (1.0 - u0 / q) / (rho * rho))
}

// ∫_U^∞ ρ^{3/2} / (ρ² + u²)^{3/2} du and ∫_U^∞ ρ^{3/2} u / (ρ² + u²)^{3/2} du
fn kernel_moments_tail(rho: f64, u0: f64) -> (f64, f64) {
    (kernel_tail(rho, 0.0, 1.0, u0), kernel_tail(rho, 1.0, 0.0, u0))
}

fn kernel(p: HalfSpacePoint, y: f64) -> f64 {
    let (r, u) = (p.rho(), y - p.eta());
    r.powf(1.5) / (r * r + u * u).powf(1.5)
}

fn breakpoints(b: &BoundaryValue, p: HalfSpacePoint, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi, p.eta()];
    pts.extend(b.kinks.iter().copied());
    pts
}

/// `F = ½ ∫ f_0(y) ρ^{3/2} / (ρ² + (η - y)²)^{3/2} dy`: adaptive quadrature
/// between the outermost kinks, closed-form integrals on the affine tails.
pub fn poisson_transform(b: &BoundaryValue, p: HalfSpacePoint) -> Result<f64> {
    if b.terms.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = b.span(p);
    let eta = p.eta();
    let tol = Tolerance { abs: 1e-14, rel: 1e-12, max_depth: 40 };
    let centre = integrate_split(&|y| b.eval(y) * kernel(p, y), &breakpoints(b, p, lo, hi), tol)?;
    // in u = y - η the tails are α u + (α η + β)
    let (ar, br) = b.affine_at(hi);
    let right = kernel_tail(p.rho(), ar, ar * eta + br, hi - eta);
    let (al, bl) = b.affine_at(lo);
    let left = kernel_tail(p.rho(), -al, al * eta + bl, eta - lo);
    Ok(0.5 * (centre + left + right))
}

/// `det Φ` from the boundary data alone. With `μ = f_0'`, `ν = ηf_0' - f_0`
/// and moments `M_p = ∫ y^p μ(y) K(y) dy`, `N_p = ∫ y^p ν(y) K(y) dy`
/// against the Poisson kernel `K = ρ^{3/2}/(ρ² + (η - y)²)^{3/2}`,
/// the double integral collapses to `¼(M_0 N_1 - M_1 N_0)`.
pub fn det_phi_quadrature(b: &BoundaryValue, p: HalfSpacePoint) -> Result<f64> {
    if b.terms.is_empty() {
        return Ok(0.0);
    }
    let (lo, hi) = b.span(p);
    let eta = p.eta();
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_depth: 40 };
    let pts = breakpoints(b, p, lo, hi);
    let moment = |g: &dyn Fn(f64) -> f64, power: i32| -> Result<f64> {
        let centre = integrate_split(&|y| g(y) * y.powi(power) * kernel(p, y), &pts, tol)?;
        // μ and ν are constant on both tails; y = u + η
        let (r0, r1) = kernel_moments_tail(p.rho(), hi - eta);
        let (l0, l1) = kernel_moments_tail(p.rho(), eta - lo);
        let (right, left) = if power == 0 { (r0, l0) } else { (r1 + eta * r0, -l1 + eta * l0) };
        Ok(centre + g(hi + 1.0) * right + g(lo - 1.0) * left)
    };
    let mu = |y: f64| b.slope(y);
    let nu = |y: f64| b.nu(y);
    let (m0, m1) = (moment(&mu, 0)?, moment(&mu, 1)?);
    let (n0, n1) = (moment(&nu, 0)?, moment(&nu, 1)?);
    let value = DET_PHI_QUADRATURE_SIGN * 0.25 * (m0 * n1 - m1 * n0);
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("det Φ moments diverged at ({}, {})", p.rho(), eta)));
    }
    Ok(value)
}

pub fn det_phi_closed(w: &MultipoleData, p: HalfSpacePoint) -> f64 {
    eval_jet(w, p).det_phi(p.rho())
}

/// `√ρ F(ρ, η) - f_0(η)`, which is `O(ρ²)` away from the kinks.
pub fn boundary_defect(w: &MultipoleData, rho: f64, eta: f64) -> Result<f64> {
    let p = HalfSpacePoint::new(rho, eta)?;
    Ok(eval_jet(w, p).f - boundary_value(w).eval(eta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeConstancy {
    /// Index `j` of the boundary interval `(y_j, y_{j+1})`, `0 ..= k`.
    pub interval: usize,
    pub edge: (i64, i64),
    pub order: u64,
    pub adapting_map: [[i64; 2]; 2],
    pub max_deviation: f64,
}

/// On the interval `(y_j, y_{j+1})` the boundary value is `m_jη - n_j`. After a
/// unimodular change sending `v_j/ℓ_j` to `(0, 1)`, the transported boundary
/// value is the constant `ℓ_j` on the image interval; returns the largest
/// deviation over sample points. `j` refers to the normalized labelling of
/// [`to_multipole`].
pub fn edge_constancy_check(d: &IsotropyData, j: usize) -> Result<EdgeConstancy> {
    let conv = to_multipole(d)?;
    let k = conv.normalized.k();
    if j > k {
        return Err(Error::InvalidInput(format!("interval index {j} exceeds k = {k}")));
    }
    let (check, _) = from_multipole(&conv.weights)?;
    let v = check.v(j as isize);
    let bv = boundary_value(&conv.weights);

    let ell = num_integer::gcd(v.m, v.n);
    let primitive = LatticeVector::new(v.m / ell, v.n / ell)?;
    let u = UnimodularMap::adapting(primitive)?;
    let image = u.apply(v)?;
    if image.m != 0 || image.n != ell {
        return Err(Error::Inconsistent(format!("adapting map sends v_{j} to {image:?}")));
    }
    let moved = transport_boundary(&bv, &u);
    let m = u.entries().map(|r| r.map(|x| x as f64));
    let b = IsometryMap::from_entries(m)?;

    let y = &bv.kinks;
    let (lo, hi) = match (j, k) {
        (0, _) => (y[0] - 10.0, y[0]),
        (j, k) if j == k => (y[k - 1], y[k - 1] + 10.0),
        (j, _) => (y[j - 1], y[j]),
    };
    let mut worst: f64 = 0.0;
    for s in 1..40 {
        let eta = lo + (hi - lo) * s as f64 / 40.0;
        let direct = bv.eval(eta);
        let affine = v.m as f64 * eta - v.n as f64;
        worst = worst.max((direct - affine).abs());
        match boundary_action(&b, BoundaryPoint::Finite(eta)) {
            BoundaryPoint::Finite(t) => {
                worst = worst.max((moved.eval(t) - ell as f64).abs());
                // transformation law through the homogeneous extension
                let factor = (m[0][0] + m[0][1] * eta).abs();
                worst = worst.max((moved.eval(t) * factor - direct).abs());
            }
            BoundaryPoint::Infinity => {}
        }
    }
    Ok(EdgeConstancy {
        interval: j,
        edge: (v.m, v.n),
        order: ell.unsigned_abs(),
        adapting_map: u.entries(),
        max_deviation: worst,
    })
}
