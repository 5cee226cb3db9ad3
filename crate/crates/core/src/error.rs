use thiserror::Error;

pub type Result<T, E = DixonError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DixonError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("gamma function pole at {0}")]
    Pole(f64),

    #[error("out of range: {0}")]
    Range(String),

    /// The coupling violates `|λ| < B(a, a+1) / B(a+σ, a+1-σ)` at the given abscissa.
    #[error(
        "admissibility violated at sigma = {sigma}: |lambda| = {lambda_abs} is not below the bound {bound}"
    )]
    Inadmissible {
        sigma: f64,
        bound: f64,
        lambda_abs: f64,
    },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("size error: {0}")]
    Size(String),

    #[error("length error: expected at least {expected} values, got {got}")]
    Length { expected: usize, got: usize },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error(
        "{what}: values {first} and {second} differ by {diff:e}, above the allowed {allowed:e}"
    )]
    Disagreement {
        what: &'static str,
        first: String,
        second: String,
        diff: f64,
        allowed: f64,
    },

    #[error("table too shallow: need {need}, table holds {have}")]
    TableDepth { need: String, have: String },
}

impl DixonError {
    pub fn domain(msg: impl Into<String>) -> Self {
        DixonError::Domain(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        DixonError::Range(msg.into())
    }

    pub fn non_convergence(what: &'static str, detail: impl Into<String>) -> Self {
        DixonError::NonConvergence {
            what,
            detail: detail.into(),
        }
    }
}
