use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("degenerate binomial: {0}")]
    Degenerate(String),

    #[error("expected exactly 2 distinct monomials, found {found}")]
    TermCount { found: usize },

    #[error("coefficient is zero modulo {p}")]
    ZeroCoefficient { p: u64 },

    #[error("constant term: the polynomial must lie in the maximal ideal")]
    ConstantTerm,

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("formula domain error: {0}")]
    FormulaDomain(String),

    #[error("resource limit: {what} needs {required}, cap is {cap}")]
    Resource {
        what: String,
        required: String,
        cap: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable tag, used for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Syntax { .. } => "syntax",
            Error::Degenerate(_) => "degenerate",
            Error::TermCount { .. } => "term_count",
            Error::ZeroCoefficient { .. } => "zero_coefficient",
            Error::ConstantTerm => "constant_term",
            Error::NotPrime(_) => "not_prime",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::NotApplicable(_) => "not_applicable",
            Error::FormulaDomain(_) => "formula_domain",
            Error::Resource { .. } => "resource",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn resource(what: &str, required: impl ToString, cap: impl ToString) -> Self {
        Error::Resource {
            what: what.to_string(),
            required: required.to_string(),
            cap: cap.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
