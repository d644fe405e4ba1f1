use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use toric_sde::curvature::{scalar_sign_scan, verify_field_terms};
use toric_sde::eigenfunction::{boundary_value, det_phi_quadrature, eval_jet, poisson_transform};
use toric_sde::lattice::validate;
use toric_sde::{decide_admissible, to_multipole, FieldReport, Grid, HalfSpacePoint, IsotropyData, MultipoleData};

use crate::classify::strip_leading_v0;
use crate::{CliError, CliResult, Document, Outcome, Status};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// `|ρ²ΔF - ¾F| / |F|`.
    pub eigen: f64,
    /// Poisson quadrature against the closed form, relative.
    pub poisson: f64,
    /// The two algebraic forms of `det Φ`, relative to `¼F² + |dF|²`.
    pub det_algebraic: f64,
    /// Boundary-moment quadrature of `det Φ` against the closed form, relative.
    pub det_quadrature: f64,
    /// Einstein residual, `‖W₋‖/‖Riem‖` and scalar drift.
    pub curvature: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eigen: 1e-10, poisson: 1e-6, det_algebraic: 1e-10, det_quadrature: 1e-4, curvature: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub tolerances: Tolerances,
    /// Defaults to [`default_grid`].
    pub grid: Option<Grid>,
    /// Seeds the extra random points of the eigenfunction check.
    pub seed: u64,
    pub random_points: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tolerances: Tolerances::default(), grid: None, seed: 0, random_points: 200 }
    }
}

/// `ρ ∈ [0.25, 2]`, `η` one unit beyond the outermost kinks, 5 × 5.
pub fn default_grid(w: &MultipoleData) -> Grid {
    let kinks = w.kinks();
    let lo = kinks.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = kinks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Grid::new((0.25, 2.0), (lo - 1.0, hi + 1.0), 5, 5)
}

/// `RHO0:RHO1:N,ETA0:ETA1:N`.
pub fn parse_grid(spec: &str) -> CliResult<Grid> {
    let bad = || CliError::Parse(format!("grid {spec:?} is not RHO0:RHO1:N,ETA0:ETA1:N"));
    let (r, e) = spec.split_once(',').ok_or_else(bad)?;
    let axis = |s: &str| -> CliResult<(f64, f64, usize)> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else { return Err(bad()) };
        Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
    };
    let (r0, r1, nr) = axis(r)?;
    let (e0, e1, ne) = axis(e)?;
    let grid = Grid::new((r0, r1), (e0, e1), nr, ne);
    grid.points().map_err(|e| CliError::Parse(e.to_string()))?;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value, tolerance, pass: value <= tolerance }
    }

    fn positive(name: &'static str, value: f64) -> Self {
        Check { name, value, tolerance: 0.0, pass: value > 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub weights: MultipoleData,
    pub grid: Grid,
    pub checks: Vec<Check>,
    pub curvature: FieldReport,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignSample {
    pub rho: f64,
    pub eta: f64,
    pub det_phi: f64,
    pub scalar: Option<f64>,
}

/// Emitted for inadmissible isotropy data: the naive weights
/// `(v_j - v_{j-1})/2` in the listed order, and the sign of `det Φ` with the
/// scalar curvature of the `|det Φ|` metric where it is defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignMap {
    pub failures: Vec<String>,
    pub terms: Vec<[f64; 2]>,
    pub grid: Grid,
    pub samples: Vec<SignSample>,
}

fn max_over<T: Sync>(items: &[T], f: impl Fn(&T) -> CliResult<f64> + Sync + Send) -> CliResult<f64> {
    let values = items.par_iter().map(f).collect::<CliResult<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

pub fn verify_weights(w: &MultipoleData, opts: &VerifyOptions) -> CliResult<VerifyReport> {
    let tol = opts.tolerances;
    let grid = opts.grid.unwrap_or_else(|| default_grid(w));
    let points = grid.points()?;
    let b = boundary_value(w);

    let kinks = w.kinks();
    let (lo, hi) = (kinks[0] - 2.0, kinks[kinks.len() - 1] + 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut eigen_points = points.clone();
    for _ in 0..opts.random_points {
        let rho = 10f64.powf(rng.gen_range(-2.0..0.7));
        eigen_points.push(HalfSpacePoint::new(rho, rng.gen_range(lo..hi))?);
    }
    let eigen = max_over(&eigen_points, |&p| {
        let j = eval_jet(w, p);
        Ok(j.eigen_residual(p.rho()).abs() / j.f_big.abs())
    })?;
    let poisson = max_over(&points, |&p| {
        let exact = eval_jet(w, p).f_big;
        Ok((poisson_transform(&b, p)? - exact).abs() / exact.abs())
    })?;
    let det_algebraic = max_over(&eigen_points, |&p| {
        let j = eval_jet(w, p);
        let r = p.rho();
        let scale = 0.25 * j.f_big * j.f_big + r * r * (j.f_big_rho.powi(2) + j.f_big_eta.powi(2));
        Ok((j.det_phi(r) - j.det_phi_f_form(r)).abs() / scale)
    })?;
    let det_quadrature = max_over(&points, |&p| {
        let exact = eval_jet(w, p).det_phi(p.rho());
        Ok((det_phi_quadrature(&b, p)? - exact).abs() / exact.abs())
    })?;
    let det_min = eigen_points.iter().map(|&p| eval_jet(w, p).det_phi(p.rho())).fold(f64::INFINITY, f64::min);
    let curvature = verify_field_terms(&w.as_f64(), &grid)?;

    let checks = vec![
        Check::at_most("eigen-residual", eigen, tol.eigen),
        Check::at_most("poisson", poisson, tol.poisson),
        Check::at_most("det-phi-algebraic", det_algebraic, tol.det_algebraic),
        Check::at_most("det-phi-quadrature", det_quadrature, tol.det_quadrature),
        Check::positive("det-phi-min", det_min),
        Check::at_most("einstein-residual", curvature.max_einstein_residual, tol.curvature),
        Check::at_most("weyl-asd", curvature.max_weyl_asd_rel, tol.curvature),
        Check::at_most("lambda-drift", curvature.lambda_drift, tol.curvature),
        Check::positive("scalar-min", curvature.scalar_min),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { weights: w.clone(), grid, checks, curvature, pass })
}

pub fn sign_map(d: &IsotropyData, failures: Vec<String>, grid: Option<Grid>) -> CliResult<SignMap> {
    let k = d.k() as isize;
    let terms: Vec<(f64, f64)> = (1..=k)
        .map(|j| {
            let (p, q) = (d.v(j), d.v(j - 1));
            (0.5 * (p.m - q.m) as f64, 0.5 * (p.n - q.n) as f64)
        })
        .collect();
    let kinks: Vec<f64> = terms.iter().filter(|t| t.0 != 0.0).map(|t| t.1 / t.0).collect();
    let lo = kinks.iter().copied().fold(0.0f64, f64::min);
    let hi = kinks.iter().copied().fold(0.0f64, f64::max);
    let grid = grid.unwrap_or_else(|| Grid::new((0.25, 2.0), (lo - 1.0, hi + 1.0), 5, 5));
    let points = grid.points()?;
    let samples = scalar_sign_scan(&terms, &points, grid.step_rel)
        .into_iter()
        .zip(&points)
        .map(|((det_phi, scalar), p)| SignSample { rho: p.rho(), eta: p.eta(), det_phi, scalar })
        .collect();
    Ok(SignMap { failures, terms: terms.iter().map(|&(a, b)| [a, b]).collect(), grid, samples })
}

/// Runs every numerical check on weights, or on the weights of admissible
/// isotropy data. Inadmissible data exits with status 4 and a [`SignMap`].
pub fn verify(doc: &Document, opts: &VerifyOptions) -> CliResult<Outcome> {
    let w = match doc {
        Document::Multipole { weights } => Document::multipole(weights)?,
        Document::Isotropy { vectors } => {
            let d = Document::isotropy(strip_leading_v0(vectors).unwrap_or(vectors))?;
            let validity = validate(&d);
            if !validity.is_valid() {
                return Err(CliError::Invalid(format!("{validity:?}")));
            }
            let verdict = decide_admissible(&d);
            if !verdict.admissible {
                let failures = verdict.failures.iter().map(|f| format!("{f:?}")).collect();
                return Outcome::json(Status::Inadmissible, &sign_map(&d, failures, opts.grid)?);
            }
            to_multipole(&d)?.weights
        }
    };
    let report = verify_weights(&w, opts)?;
    let status = if report.pass { Status::Pass } else { Status::ToleranceFailure };
    Outcome::json(status, &report)
}
