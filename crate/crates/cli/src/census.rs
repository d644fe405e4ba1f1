//! Exhaustive census of isotropy data with bounded entries.
//!
//! Sequences of lines `±v` with `|m|, |n| <= N` are enumerated once per
//! dihedral relabelling. Every valid sequence is checked for agreement of the
//! three admissibility conditions, for the signature formula against the Gram
//! inertia and for the two null relations of the Gram matrix. Admissible ones
//! are converted to weights and back, and grouped into classes up to
//! `GL₂(ℤ)`, relabelling and signs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use toric_sde::admissibility::criteria_check;
use toric_sde::intmat::{from_i64, hermite_rows};
use toric_sde::lattice::{orient_cyclic, validate};
use toric_sde::topology::{default_probe, gram_signature, null_relations_hold, signature_formula, weighted_projective_weights};
use toric_sde::{from_multipole, to_multipole, IsotropyData, LatticeVector, MultipoleData};

use crate::{CliError, CliResult, Outcome, Status};

/// Refuse enumerations estimated above this many sequences.
pub const MAX_SEQUENCES: f64 = 1.0e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusBounds {
    pub max_entry: i64,
    pub max_k: usize,
}

impl CensusBounds {
    /// Roughly `Σ_k r^k / 2k` with `r = 2N(N+1)` lines.
    pub fn estimate(&self) -> f64 {
        let r = (2 * self.max_entry * (self.max_entry + 1)) as f64;
        (2..=self.max_k).map(|k| r.powi(k as i32) / (2 * k) as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountRow {
    pub k: usize,
    pub b2: usize,
    pub sequences: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEntry {
    pub k: usize,
    pub vectors: Vec<[i64; 2]>,
    pub weights: MultipoleData,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusFailure {
    pub vectors: Vec<[i64; 2]>,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub bounds: CensusBounds,
    pub sequences: usize,
    pub valid: usize,
    pub admissible: usize,
    pub classes: usize,
    pub counts: Vec<CountRow>,
    /// Admissible `k = 3` sequences, and how many of them are weighted
    /// projective planes.
    pub k3_admissible: usize,
    pub k3_weighted_projective: usize,
    pub failures: Vec<CensusFailure>,
    pub consistent: bool,
    pub entries: Vec<ClassEntry>,
}

/// One representative of each line through the origin.
fn lines(n: i64) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    for m in 0..=n {
        for q in -n..=n {
            if m > 0 || q > 0 {
                out.push(LatticeVector::new(m, q).expect("nonzero"));
            }
        }
    }
    out
}

/// Whether `idx` is lexicographically minimal among its rotations and
/// reflections.
fn is_canonical(idx: &[usize]) -> bool {
    let k = idx.len();
    (0..k).all(|s| {
        let rot = (0..k).map(|i| idx[(i + s) % k]);
        let refl = (0..k).map(|i| idx[(s + k - i) % k]);
        idx.iter().copied().le(rot) && idx.iter().copied().le(refl)
    })
}

fn canonical_sequences(lines: &[LatticeVector], k: usize) -> Vec<IsotropyData> {
    let r = lines.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; k];
    'outer: loop {
        if is_canonical(&idx) {
            out.push(IsotropyData::new(idx.iter().map(|&i| lines[i]).collect()).expect("k >= 2, nonzero"));
        }
        for p in (0..k).rev() {
            idx[p] += 1;
            if idx[p] < r {
                continue 'outer;
            }
            idx[p] = 0;
        }
        break;
    }
    out
}

/// Hermite normal form of the `2 × k` matrix, minimized over framings and
/// orientations: a complete invariant under `GL₂(ℤ)`, relabelling and signs.
fn class_key(d: &IsotropyData) -> Vec<String> {
    let k = d.k();
    let mut best: Option<Vec<String>> = None;
    for index in 0..2 * k {
        let framed = d.framing(index);
        let Some(signs) = orient_cyclic(&framed) else { continue };
        for global in [1i8, -1] {
            let signs: Vec<i8> = signs.iter().map(|s| s * global).collect();
            let o = framed.with_signs(&signs);
            let h = hermite_rows(&from_i64(&[o.m_values(), o.n_values()]));
            let key: Vec<String> = h.iter().flatten().map(ToString::to_string).collect();
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.unwrap_or_default()
}

struct DatumResult {
    problems: Vec<String>,
    admissible: Option<(Vec<String>, MultipoleData)>,
    weighted_projective: bool,
}

fn check_datum(d: &IsotropyData) -> toric_sde::Result<DatumResult> {
    let mut problems = Vec::new();
    let c = criteria_check(d)?;
    if !c.agree() {
        problems.push(format!("criteria disagree: {c:?}"));
    }
    let formula = signature_formula(d, default_probe(d))?;
    let oracle = gram_signature(d)?;
    if formula != oracle {
        problems.push(format!("signature formula {formula}, Gram inertia {oracle}"));
    }
    if !null_relations_hold(d)? {
        problems.push("Gram matrix does not annihilate (m_j) and (n_j)".into());
    }
    let mut admissible = None;
    let mut weighted_projective = false;
    if c.lattice_condition {
        let conv = to_multipole(d)?;
        let (back, scale) = from_multipole(&conv.weights)?;
        if scale != 1 || back != conv.normalized {
            problems.push("from_multipole does not invert to_multipole".into());
        }
        weighted_projective = d.k() == 3 && weighted_projective_weights(d).is_some();
        admissible = Some((class_key(d), conv.weights));
    }
    Ok(DatumResult { problems, admissible, weighted_projective })
}

fn pairs(d: &IsotropyData) -> Vec<[i64; 2]> {
    d.vectors().iter().map(|v| [v.m, v.n]).collect()
}

pub fn run_census(bounds: CensusBounds) -> CliResult<CensusReport> {
    if bounds.max_entry < 1 || bounds.max_k < 2 {
        return Err(CliError::Invalid("census needs N >= 1 and K >= 2".into()));
    }
    let estimate = bounds.estimate();
    if estimate > MAX_SEQUENCES {
        return Err(CliError::Invalid(format!(
            "N = {}, K = {} would enumerate about {estimate:.2e} sequences (limit {MAX_SEQUENCES:.0e})",
            bounds.max_entry, bounds.max_k
        )));
    }
    let lines = lines(bounds.max_entry);
    let (mut sequences, mut valid, mut admissible) = (0, 0, 0);
    let (mut k3_admissible, mut k3_weighted_projective) = (0, 0);
    let mut failures = Vec::new();
    // (k, key) -> (first representative, weights, sequence count)
    let mut classes: BTreeMap<(usize, Vec<String>), (Vec<[i64; 2]>, MultipoleData)> = BTreeMap::new();
    let mut per_k: BTreeMap<usize, usize> = BTreeMap::new();
    for k in 2..=bounds.max_k {
        let all = canonical_sequences(&lines, k);
        sequences += all.len();
        let data: Vec<IsotropyData> = all.into_iter().filter(|d| validate(d).is_valid()).collect();
        valid += data.len();
        let results: Vec<_> = data.par_iter().map(check_datum).collect();
        for (d, r) in data.iter().zip(results) {
            let r = r.map_err(CliError::Core)?;
            for problem in r.problems {
                failures.push(CensusFailure { vectors: pairs(d), problem });
            }
            if let Some((key, weights)) = r.admissible {
                admissible += 1;
                *per_k.entry(k).or_default() += 1;
                if k == 3 {
                    k3_admissible += 1;
                    k3_weighted_projective += usize::from(r.weighted_projective);
                }
                classes.entry((k, key)).or_insert_with(|| (pairs(d), weights));
            }
        }
    }
    let counts = per_k
        .iter()
        .map(|(&k, &n)| CountRow { k, b2: k - 2, sequences: n, classes: classes.keys().filter(|c| c.0 == k).count() })
        .collect();
    let consistent = failures.is_empty() && k3_admissible == k3_weighted_projective;
    Ok(CensusReport {
        bounds,
        sequences,
        valid,
        admissible,
        classes: classes.len(),
        counts,
        k3_admissible,
        k3_weighted_projective,
        failures,
        consistent,
        entries: classes.into_iter().map(|((k, _), (vectors, weights))| ClassEntry { k, vectors, weights }).collect(),
    })
}

pub fn census(bounds: CensusBounds) -> CliResult<Outcome> {
    let report = run_census(bounds)?;
    let status = if report.consistent { Status::Pass } else { Status::Inconsistent };
    Outcome::json(status, &report)
}
