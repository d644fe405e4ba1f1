//! Input and output documents:
//!
//! ```text
//! {"isotropy": {"vectors": [[m, n], ...]}}
//! {"multipole": {"weights": [["a", "b"], ...]}}
//! ```
//!
//! Weights are strings `"p"` or `"p/2"` so that they round-trip exactly.

use serde::{Deserialize, Serialize};
use toric_sde::{HalfInt, IsotropyData, MultipoleData};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Document {
    Isotropy { vectors: Vec<[i64; 2]> },
    Multipole { weights: Vec<[HalfInt; 2]> },
}

impl Document {
    /// Syntax errors, unknown fields and malformed rationals are parse errors;
    /// structural problems (zero vectors, `a <= 0`) surface when converting.
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn from_isotropy(d: &IsotropyData) -> Self {
        Document::Isotropy { vectors: d.vectors().iter().map(|v| [v.m, v.n]).collect() }
    }

    pub fn from_multipole(w: &MultipoleData) -> Self {
        Document::Multipole { weights: w.weights().iter().map(|&(a, b)| [a, b]).collect() }
    }

    pub fn isotropy(vectors: &[[i64; 2]]) -> CliResult<IsotropyData> {
        let pairs: Vec<(i64, i64)> = vectors.iter().map(|v| (v[0], v[1])).collect();
        IsotropyData::from_pairs(&pairs).map_err(|e| CliError::Invalid(e.to_string()))
    }

    /// Weights violating `a > 0` or increasing `b/a` are rejected here, as a
    /// parse error: such a document does not describe multipole data at all.
    pub fn multipole(weights: &[[HalfInt; 2]]) -> CliResult<MultipoleData> {
        MultipoleData::new(weights.iter().map(|w| (w[0], w[1])).collect()).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("documents serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_round_trip() {
        let text = r#"{"multipole":{"weights":[["1/2","0"],["1","1/2"],["1/2","1/2"]]}}"#;
        let doc = Document::parse(text).unwrap();
        let Document::Multipole { weights } = &doc else { panic!() };
        let w = Document::multipole(weights).unwrap();
        assert_eq!(w.kinks(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Document::parse(&doc.to_json()).unwrap(), doc);

        let doc = Document::parse(r#"{"isotropy":{"vectors":[[-1,-1],[1,0],[2,1]]}}"#).unwrap();
        assert_eq!(Document::from_isotropy(&match &doc {
            Document::Isotropy { vectors } => Document::isotropy(vectors).unwrap(),
            _ => panic!(),
        }), doc);
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        for bad in [
            "{",
            r#"{"isotropy":{"vectors":[[1,0]],"extra":1}}"#,
            r#"{"multipole":{"weights":[["1/3","0"]]}}"#,
            r#"{"other":{}}"#,
        ] {
            assert!(matches!(Document::parse(bad), Err(CliError::Parse(_))), "{bad}");
        }
        let zero = [[HalfInt::from_int(0), HalfInt::from_int(1)]];
        assert!(matches!(Document::multipole(&zero), Err(CliError::Parse(_))));
        assert!(matches!(Document::isotropy(&[[0, 0], [1, 0]]), Err(CliError::Invalid(_))));
    }
}
