use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("matrix {0:?} is not unimodular (det = {1})")]
    InvalidMap([[i64; 2]; 2], i128),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("probe ({0}, {1}) is parallel to an isotropy vector")]
    DegenerateProbe(i64, i64),
    #[error("isotropy data is not cyclically oriented at edge {0}")]
    NotOriented(usize),
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
    #[error("invalid multipole weights: {0}")]
    InvalidWeights(String),
    #[error("no normalizing framing found for {0}")]
    NormalizationNotFound(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("point lies outside the admissible region (det Phi = {0:e})")]
    OutsideAdmissible(f64),
    #[error("metric is singular (f = {0:e})")]
    SingularMetric(f64),
    #[error("invalid sampling spec: {0}")]
    InvalidSpec(String),
}
