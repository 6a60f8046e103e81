use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("pole in {op} at {at}")]
    Pole { op: &'static str, at: f64 },

    #[error("{op} did not converge after {terms} terms (partial sum {partial}, last term {last_term})")]
    Convergence {
        op: &'static str,
        terms: usize,
        partial: f64,
        last_term: f64,
    },

    #[error("singular value in {op}: {detail}")]
    Singularity { op: &'static str, detail: String },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("quadrature in {op} reached estimate {value} with error {achieved:e} (target {target:e})")]
    Quadrature {
        op: &'static str,
        value: f64,
        achieved: f64,
        target: f64,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("numerical instability: {0}")]
    Unstable(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors that come from a numerical method failing rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Convergence { .. } | Error::Quadrature { .. } | Error::Unstable(_) => true,
            Error::Context { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
