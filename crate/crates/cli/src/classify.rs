use num_rational::Ratio;
use serde::Serialize;
use toric_sde::admissibility::{criteria_check, CriteriaCheck, Framing};
use toric_sde::lattice::validate;
use toric_sde::topology::{topology_report, weighted_projective_weights};
use toric_sde::{
    decide_admissible, from_multipole, subtorus_kernel, to_multipole, AdmissibilityVerdict, IsotropyData,
    KernelLattice, MultipoleData, TopologyReport, ValidityReport,
};

use crate::{CliError, CliResult, Document, Outcome, Status};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conversion {
    pub weights: MultipoleData,
    /// Relabelled data with `m_0 < .. < m_k` and convex chords.
    pub normalized: Vec<[i64; 2]>,
    pub framing: Framing,
    pub shear_fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightedProjective {
    pub weights: [u64; 3],
    pub signs: [i8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub vectors: Vec<[i64; 2]>,
    pub validity: ValidityReport,
    /// Absent when consecutive vectors are dependent.
    pub topology: Option<TopologyReport>,
    pub verdict: AdmissibilityVerdict,
    /// The three admissibility conditions evaluated independently.
    pub criteria: Option<CriteriaCheck>,
    pub conversion: Option<Conversion>,
    pub kernel: Option<KernelLattice>,
    pub weighted_projective: Option<WeightedProjective>,
    pub notes: Vec<String>,
}

/// Slope strings of `v_j - v_{j-1}` in the listed order, and whether the list
/// is already normalized (`m` strictly increasing, slopes strictly increasing).
fn listed_order(d: &IsotropyData) -> (Vec<String>, bool) {
    let k = d.k() as isize;
    let mut slopes = Vec::new();
    let mut normalized = true;
    let mut prev: Option<Ratio<i128>> = None;
    for j in 1..=k {
        let (p, q) = (d.v(j), d.v(j - 1));
        let (dm, dn) = (p.m as i128 - q.m as i128, p.n as i128 - q.n as i128);
        if dm <= 0 {
            normalized = false;
            slopes.push(if dm == 0 { "inf".to_string() } else { Ratio::new(dn, dm).to_string() });
            prev = None;
            continue;
        }
        let s = Ratio::new(dn, dm);
        if prev.is_some_and(|t| t >= s) {
            normalized = false;
        }
        slopes.push(s.to_string());
        prev = Some(s);
    }
    (slopes, normalized)
}

pub fn classify_data(d: &IsotropyData) -> CliResult<(ClassifyReport, Status)> {
    let validity = validate(d);
    let mut status = if validity.is_valid() { Status::Pass } else { Status::InvalidData };
    let mut notes = Vec::new();
    let topology = if validity.consecutive_failures.is_empty() { Some(topology_report(d)?) } else { None };
    let verdict = decide_admissible(d);
    let criteria = if validity.is_valid() { Some(criteria_check(d)?) } else { None };
    if let Some(c) = &criteria {
        if !c.agree() {
            status = Status::Inconsistent;
            notes.push(format!(
                "admissibility conditions disagree: lattice {}, intersection {}, multipole {}",
                c.lattice_condition, c.intersection_condition, c.multipole_construction
            ));
        }
    }
    if verdict.interior_edges_only != verdict.admissible {
        notes.push(
            "the strict inequality fails only at the closing edge of every framing; \
             an interior-edges-only check would accept this data"
                .into(),
        );
    }
    if validity.is_valid() {
        let (slopes, normalized) = listed_order(d);
        if !normalized {
            let outcome = if verdict.admissible { "another framing is admissible" } else { "no framing is admissible" };
            notes.push(format!(
                "the listed order is not a normalized framing (slopes of v_j - v_(j-1): {}); {outcome}",
                slopes.join(", ")
            ));
        }
    }
    let (mut conversion, mut kernel, mut weighted_projective) = (None, None, None);
    if verdict.admissible && validity.is_valid() {
        let c = to_multipole(d)?;
        kernel = Some(subtorus_kernel(&c.weights)?);
        if c.shear_fallback {
            notes.push("no framing in the given basis has increasing m; a shear was applied".into());
        }
        if d.k() == 3 {
            weighted_projective =
                weighted_projective_weights(d).map(|(weights, signs)| WeightedProjective { weights, signs });
        }
        conversion = Some(Conversion {
            weights: c.weights,
            normalized: c.normalized.vectors().iter().map(|v| [v.m, v.n]).collect(),
            framing: c.framing,
            shear_fallback: c.shear_fallback,
        });
    }
    let report = ClassifyReport {
        vectors: d.vectors().iter().map(|v| [v.m, v.n]).collect(),
        validity,
        topology,
        verdict,
        criteria,
        conversion,
        kernel,
        weighted_projective,
        notes,
    };
    Ok((report, status))
}

/// A list whose first vector is minus its last repeats the wrapped edge
/// (`v_0 = -v_k`); it is read as `v_0, v_1, .., v_k`.
pub(crate) fn strip_leading_v0(vectors: &[[i64; 2]]) -> Option<&[[i64; 2]]> {
    match vectors {
        [first, rest @ ..] if rest.len() >= 3 && rest[rest.len() - 1] == [-first[0], -first[1]] => Some(rest),
        _ => None,
    }
}

/// Classifies isotropy data, or the data obtained from multipole weights.
pub fn classify(doc: &Document) -> CliResult<Outcome> {
    let mut notes = Vec::new();
    let data = match doc {
        Document::Isotropy { vectors } => match strip_leading_v0(vectors) {
            Some(rest) => {
                notes.push("the first vector is minus the last and was read as v_0".into());
                Document::isotropy(rest)?
            }
            None => Document::isotropy(vectors)?,
        },
        Document::Multipole { weights } => {
            let (d, scale) = from_multipole(&Document::multipole(weights)?)?;
            if scale != 1 {
                notes.push(format!("weights give half-integral vectors; classifying {scale} times the data"));
            }
            d
        }
    };
    let (mut report, status) = classify_data(&data)?;
    notes.append(&mut report.notes);
    report.notes = notes;
    Outcome::json(status, &report)
}

/// Isotropy data to normalized weights and back. The output is itself an
/// input document.
pub fn convert(doc: &Document) -> CliResult<Outcome> {
    match doc {
        Document::Isotropy { vectors } => {
            let d = Document::isotropy(strip_leading_v0(vectors).unwrap_or(vectors))?;
            let validity = validate(&d);
            if !validity.is_valid() {
                return Err(CliError::Invalid(format!("{validity:?}")));
            }
            let verdict = decide_admissible(&d);
            if !verdict.admissible {
                return Err(CliError::Inadmissible(format!("failures {:?}", verdict.failures)));
            }
            let c = to_multipole(&d)?;
            let mut out = Outcome { status: Status::Pass, body: Document::from_multipole(&c.weights).to_json(), notes: vec![] };
            if c.shear_fallback {
                out.notes.push("a shear was needed to normalize the data".into());
            }
            Ok(out)
        }
        Document::Multipole { weights } => {
            let (d, scale) = from_multipole(&Document::multipole(weights)?)?;
            let mut out = Outcome { status: Status::Pass, body: Document::from_isotropy(&d).to_json(), notes: vec![] };
            if scale != 1 {
                out.notes.push(format!("weights give half-integral vectors; output is scaled by {scale}"));
            }
            Ok(out)
        }
    }
}
