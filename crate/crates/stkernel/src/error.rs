use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("{op}: pole at {x}")]
    Pole { op: &'static str, x: f64 },
    #[error("{op}: overflow ({detail})")]
    Overflow { op: &'static str, detail: String },
    #[error("series did not converge within {terms} terms (partial sum {partial})")]
    Truncation { partial: f64, terms: usize },
    #[error("{op}: degenerate parameters: {detail}")]
    Degenerate { op: &'static str, detail: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("{op}: numerical failure: {detail}")]
    Numerical { op: &'static str, detail: String },
    #[error("matrix of order {n} exceeds the memory budget of {budget} entries")]
    Size { n: usize, budget: usize },
    #[error("cholesky failed after jitter ladder (pivot {pivot:?}, last jitter {jitter})")]
    Factorization { pivot: Option<usize>, jitter: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { op, detail: detail.into() }
    }

    pub(crate) fn numerical(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical { op, detail: detail.into() }
    }

    /// Invalid input as opposed to a numerical breakdown; drives the CLI exit code.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain { .. }
                | Error::Pole { .. }
                | Error::Degenerate { .. }
                | Error::Validation(_)
                | Error::Unsupported(_)
                | Error::Size { .. }
        )
    }
}
