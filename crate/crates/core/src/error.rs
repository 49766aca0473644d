use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("predicate `{pred}` used with arity {found}, expected {expected}")]
    Arity { pred: String, expected: usize, found: usize },

    #[error("undeclared predicate `{0}`")]
    Undeclared(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("program is not stratifiable: negative cycle through {0}")]
    NotStratifiable(String),

    #[error(
        "conjunct limit of {limit} exceeded: exponential blow-up when an insertion meets a \
         constraint with several negative occurrences of the updated relation (or a deletion \
         with several positive ones)"
    )]
    BlowUp { limit: usize },

    #[error("rewrite step bound {bound} exceeded")]
    StepBound { bound: u64 },

    #[error("enumeration of {needed} instances exceeds the cap of {cap}")]
    EnumerationCap { needed: u128, cap: u128 },
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Unsupported(_) | Error::Hypothesis(_) | Error::BlowUp { .. } | Error::EnumerationCap { .. } => 3,
            Error::StepBound { .. } => 2,
            _ => 1,
        }
    }
}
