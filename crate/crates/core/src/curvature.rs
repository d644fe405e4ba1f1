//! Finite-difference curvature of a 4-metric given pointwise.
//!
//! Conventions: `R_abcd = ½(g_ad,bc + g_bc,ad - g_ac,bd - g_bd,ac)
//! + g_ef(Γ^e_bc Γ^f_ad - Γ^e_bd Γ^f_ac)`, `Ric_bd = g^{ac} R_abcd`,
//! so the round sphere has `R_abcd = K(g_ac g_bd - g_ad g_bc)` and positive
//! scalar curvature. Derivatives use fourth-order central differences.
//!
//! Bivectors are taken in the orthonormal basis
//! `e12, e13, e14, e34, e42, e23`, on which the Hodge star of the
//! orientation `e1234` swaps the first three with the last three.

use nalgebra::{Matrix4, Matrix6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::admissibility::MultipoleData;
use crate::error::{Error, Result};
use crate::hyperbolic::HalfSpacePoint;
use crate::metric::metric_at_terms;

type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
const D2: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

#[derive(Debug, Clone)]
pub struct CurvatureTensors {
    pub metric: Matrix4<f64>,
    pub riemann: Tensor4,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
}

fn shifted(x: [f64; 4], steps: &[(usize, f64)]) -> [f64; 4] {
    let mut y = x;
    for &(c, d) in steps {
        y[c] += d;
    }
    y
}

/// Curvature at `x` of the metric `g`; only coordinates with `active[c]`
/// are differentiated (the metric is assumed independent of the rest).
pub fn curvature_tensors<G>(g: &G, x: [f64; 4], h: f64, active: [bool; 4]) -> Result<CurvatureTensors>
where
    G: Fn([f64; 4]) -> Result<Matrix4<f64>>,
{
    let g0 = g(x)?;
    let inv = g0
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric(g0.determinant()))?;
    let zero = Matrix4::zeros();
    let mut dg = [zero; 4];
    let mut ddg = [[zero; 4]; 4];
    for c in (0..4).filter(|&c| active[c]) {
        for &(s, w) in &D1 {
            dg[c] += g(shifted(x, &[(c, s * h)]))? * (w / (12.0 * h));
        }
        for &(s, w) in &D2 {
            ddg[c][c] += if s == 0.0 { g0 } else { g(shifted(x, &[(c, s * h)]))? } * (w / (12.0 * h * h));
        }
        for d in (0..c).filter(|&d| active[d]) {
            let mut acc = zero;
            for &(s, w) in &D1 {
                for &(t, v) in &D1 {
                    acc += g(shifted(x, &[(c, s * h), (d, t * h)]))? * (w * v);
                }
            }
            acc /= 144.0 * h * h;
            ddg[c][d] = acc;
            ddg[d][c] = acc;
        }
    }

    // Γ^e_bc = ½ g^{ed}(g_db,c + g_dc,b - g_bc,d)
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for e in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                gamma[e][b][c] = 0.5
                    * (0..4)
                        .map(|d| inv[(e, d)] * (dg[c][(d, b)] + dg[b][(d, c)] - dg[d][(b, c)]))
                        .sum::<f64>();
            }
        }
    }
    // lowered Γ_f,ad = g_fe Γ^e_ad
    let mut low = [[[0.0; 4]; 4]; 4];
    for f in 0..4 {
        for a in 0..4 {
            for d in 0..4 {
                low[f][a][d] = (0..4).map(|e| g0[(f, e)] * gamma[e][a][d]).sum();
            }
        }
    }
    let mut riemann = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let second = 0.5
                        * (ddg[b][c][(a, d)] + ddg[a][d][(b, c)] - ddg[b][d][(a, c)] - ddg[a][c][(b, d)]);
                    let quad: f64 = (0..4)
                        .map(|e| gamma[e][b][c] * low[e][a][d] - gamma[e][b][d] * low[e][a][c])
                        .sum();
                    riemann[a][b][c][d] = second + quad;
                }
            }
        }
    }
    let ricci = Matrix4::from_fn(|b, d| {
        let mut s = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                s += inv[(a, c)] * riemann[a][b][c][d];
            }
        }
        s
    });
    let scalar = (0..4).flat_map(|b| (0..4).map(move |d| (b, d))).map(|(b, d)| inv[(b, d)] * ricci[(b, d)]).sum();
    Ok(CurvatureTensors { metric: g0, riemann, ricci, scalar })
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

/// Curvature operators on `Λ²` in an orthonormal frame.
#[derive(Debug, Clone)]
pub struct FrameCurvature {
    pub riemann: Matrix6<f64>,
    pub weyl: Matrix6<f64>,
    pub ricci: Matrix4<f64>,
    pub scalar: f64,
}

fn frame_curvature(t: &CurvatureTensors) -> Result<FrameCurvature> {
    let chol = t
        .metric
        .cholesky()
        .ok_or_else(|| Error::SingularMetric(t.metric.determinant()))?;
    // columns of L⁻ᵀ are an oriented orthonormal frame
    let e = chol
        .l()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric(t.metric.determinant()))?
        .transpose();
    let g = &t.metric;
    let s = t.scalar;
    let weyl_coord = |a: usize, b: usize, c: usize, d: usize| {
        let r = &t.ricci;
        t.riemann[a][b][c][d]
            - 0.5 * (r[(a, c)] * g[(b, d)] - r[(a, d)] * g[(b, c)] - r[(b, c)] * g[(a, d)] + r[(b, d)] * g[(a, c)])
            + s / 6.0 * (g[(a, c)] * g[(b, d)] - g[(a, d)] * g[(b, c)])
    };
    let to_frame = |f: &dyn Fn(usize, usize, usize, usize) -> f64, i: usize, j: usize, k: usize, l: usize| {
        let mut acc = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let ab = e[(a, i)] * e[(b, j)];
                if ab == 0.0 {
                    continue;
                }
                for c in 0..4 {
                    for d in 0..4 {
                        acc += ab * e[(c, k)] * e[(d, l)] * f(a, b, c, d);
                    }
                }
            }
        }
        acc
    };
    let riem_coord = |a: usize, b: usize, c: usize, d: usize| t.riemann[a][b][c][d];
    let riemann = Matrix6::from_fn(|p, q| {
        let ((i, j), (k, l)) = (PAIRS[p], PAIRS[q]);
        to_frame(&riem_coord, i, j, k, l)
    });
    let weyl = Matrix6::from_fn(|p, q| {
        let ((i, j), (k, l)) = (PAIRS[p], PAIRS[q]);
        to_frame(&weyl_coord, i, j, k, l)
    });
    let ricci = e.transpose() * t.ricci * e;
    Ok(FrameCurvature { riemann, weyl, ricci, scalar: s })
}

fn hodge_projectors() -> (Matrix6<f64>, Matrix6<f64>) {
    let mut star = Matrix6::zeros();
    for i in 0..3 {
        star[(i, i + 3)] = 1.0;
        star[(i + 3, i)] = 1.0;
    }
    let id = Matrix6::identity();
    ((id + star) * 0.5, (id - star) * 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    /// `‖Ric - (s/4)g‖ / ‖(s/4)g‖` in an orthonormal frame.
    pub einstein_residual: f64,
    pub scalar: f64,
    /// Zero for a single point; see [`FieldReport`].
    pub lambda_drift: f64,
    /// `‖W₊‖` for the reported orientation.
    pub weyl_sd_norm: f64,
    /// `‖W₋‖` for the reported orientation.
    pub weyl_asd_norm: f64,
    pub riemann_norm: f64,
    /// `+1` for `dρ∧dη∧dψ₁∧dψ₂`, `-1` when flipped so that `‖W₋‖ <= ‖W₊‖`.
    pub orientation: i8,
}

impl CurvatureReport {
    pub fn from_tensors(t: &CurvatureTensors) -> Result<Self> {
        let fc = frame_curvature(t)?;
        let (plus, minus) = hodge_projectors();
        let sd = (plus * fc.weyl * plus).norm();
        let asd = (minus * fc.weyl * minus).norm();
        let quarter = fc.scalar / 4.0;
        let einstein = (fc.ricci - Matrix4::identity() * quarter).norm() / (2.0 * quarter.abs());
        let (weyl_sd_norm, weyl_asd_norm, orientation) = if asd > sd { (asd, sd, -1) } else { (sd, asd, 1) };
        Ok(CurvatureReport {
            einstein_residual: einstein,
            scalar: fc.scalar,
            lambda_drift: 0.0,
            weyl_sd_norm,
            weyl_asd_norm,
            riemann_norm: fc.riemann.norm(),
            orientation,
        })
    }
}

pub fn curvature_at_terms(terms: &[(f64, f64)], p: HalfSpacePoint, h: f64) -> Result<CurvatureReport> {
    if !(h > 0.0 && 2.0 * h < p.rho()) {
        return Err(Error::Domain(format!("step {h} leaves the half-space around rho = {}", p.rho())));
    }
    let g = |x: [f64; 4]| {
        let q = HalfSpacePoint::new(x[0], x[1])?;
        Ok(metric_at_terms(terms, q)?.matrix())
    };
    let t = curvature_tensors(&g, [p.rho(), p.eta(), 0.0, 0.0], h, [true, true, false, false])?;
    CurvatureReport::from_tensors(&t)
}

pub fn curvature_at(w: &MultipoleData, p: HalfSpacePoint, h: f64) -> Result<CurvatureReport> {
    curvature_at_terms(&w.as_f64(), p, h)
}

/// Rectangular sample of the half-space; the finite-difference step at each
/// point is `step_rel · ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rho: (f64, f64),
    pub eta: (f64, f64),
    pub n_rho: usize,
    pub n_eta: usize,
    pub step_rel: f64,
}

impl Grid {
    pub fn new(rho: (f64, f64), eta: (f64, f64), n_rho: usize, n_eta: usize) -> Self {
        Grid { rho, eta, n_rho, n_eta, step_rel: 1e-2 }
    }

    pub fn points(&self) -> Result<Vec<HalfSpacePoint>> {
        if self.n_rho == 0 || self.n_eta == 0 {
            return Err(Error::InvalidSpec("empty grid".into()));
        }
        if !(self.rho.0 > 0.0 && self.rho.1 >= self.rho.0 && self.eta.1 >= self.eta.0) {
            return Err(Error::InvalidSpec(format!("bad ranges rho {:?}, eta {:?}", self.rho, self.eta)));
        }
        if !(self.step_rel > 0.0 && self.step_rel < 0.25) {
            return Err(Error::InvalidSpec(format!("relative step {} outside (0, 1/4)", self.step_rel)));
        }
        let lerp = |(a, b): (f64, f64), i: usize, n: usize| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n_rho * self.n_eta);
        for i in 0..self.n_rho {
            for j in 0..self.n_eta {
                out.push(HalfSpacePoint::new(lerp(self.rho, i, self.n_rho), lerp(self.eta, j, self.n_eta))?);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub points: usize,
    pub max_einstein_residual: f64,
    pub mean_einstein_residual: f64,
    /// `max ‖W₋‖/‖Riem‖`.
    pub max_weyl_asd_rel: f64,
    /// `min ‖W₊‖/‖Riem‖`.
    pub min_weyl_sd_rel: f64,
    /// `max ‖W₊‖/‖Riem‖`.
    pub max_weyl_sd_rel: f64,
    /// `max |s(p) - s(q)| / |s|`.
    pub lambda_drift: f64,
    pub scalar_min: f64,
    pub scalar_max: f64,
    /// Orientation shared by every point, or 0 if the points disagree.
    pub orientation: i8,
}

/// Curvature over a grid, computed in parallel and reduced in grid order.
pub fn verify_field(w: &MultipoleData, grid: &Grid) -> Result<FieldReport> {
    verify_field_terms(&w.as_f64(), grid)
}

pub fn verify_field_terms(terms: &[(f64, f64)], grid: &Grid) -> Result<FieldReport> {
    let pts = grid.points()?;
    let reports = pts
        .par_iter()
        .map(|&p| curvature_at_terms(terms, p, grid.step_rel * p.rho()))
        .collect::<Result<Vec<_>>>()?;
    let n = reports.len() as f64;
    let fold = |f: &dyn Fn(&CurvatureReport) -> f64, init: f64, op: fn(f64, f64) -> f64| {
        reports.iter().map(f).fold(init, op)
    };
    let scalar_min = fold(&|r| r.scalar, f64::INFINITY, f64::min);
    let scalar_max = fold(&|r| r.scalar, f64::NEG_INFINITY, f64::max);
    let scale = scalar_min.abs().min(scalar_max.abs());
    let first = reports[0].orientation;
    Ok(FieldReport {
        points: reports.len(),
        max_einstein_residual: fold(&|r| r.einstein_residual, 0.0, f64::max),
        mean_einstein_residual: fold(&|r| r.einstein_residual, 0.0, |a, b| a + b) / n,
        max_weyl_asd_rel: fold(&|r| r.weyl_asd_norm / r.riemann_norm, 0.0, f64::max),
        min_weyl_sd_rel: fold(&|r| r.weyl_sd_norm / r.riemann_norm, f64::INFINITY, f64::min),
        max_weyl_sd_rel: fold(&|r| r.weyl_sd_norm / r.riemann_norm, 0.0, f64::max),
        lambda_drift: (scalar_max - scalar_min) / scale,
        scalar_min,
        scalar_max,
        orientation: if reports.iter().all(|r| r.orientation == first) { first } else { 0 },
    })
}

/// Scalar curvature on a grid paired with the jet value of `det Φ` at the same
/// point, for weights that need not come from admissible data. The scalar is
/// `None` where the metric is singular.
pub fn scalar_sign_scan(terms: &[(f64, f64)], points: &[HalfSpacePoint], step_rel: f64) -> Vec<(f64, Option<f64>)> {
    points
        .par_iter()
        .map(|&p| {
            let d = crate::eigenfunction::eval_jet_terms(terms, p).det_phi(p.rho());
            let g = |x: [f64; 4]| {
                let q = HalfSpacePoint::new(x[0], x[1])?;
                Ok(metric_at_terms(terms, q)?.matrix())
            };
            let s = curvature_tensors(&g, [p.rho(), p.eta(), 0.0, 0.0], step_rel * p.rho(), [true, true, false, false])
                .ok()
                .map(|t| t.scalar);
            (d, s)
        })
        .collect()
}
