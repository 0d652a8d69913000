use thiserror::Error;

/// Errors raised across the library. Each variant has a stable code
/// (see [`Error::code`]) that the CLI prints in diagnostics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("entry {index} is not finite")]
    NonFiniteEntry { index: usize },

    #[error("table sums to {sum}, outside 1 +/- {tol:e}")]
    SumOutOfTolerance { sum: f64, tol: f64 },

    #[error("table has {got} entries but cardinalities imply {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),

    #[error("variable groups overlap on `{0}`")]
    OverlappingGroups(String),

    #[error("variable group must not be empty")]
    EmptyGroup,

    #[error("symbol {symbol} of `{variable}` has positive probability but no label")]
    LabelMissing { variable: String, symbol: usize },

    #[error("variable `{0}` has no positive-probability symbol")]
    EmptySupport(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("enumeration needs {needed} joint sequences, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("malformed protocol table: {0}")]
    MalformedTable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NegativeEntry { .. } => "NEGATIVE_ENTRY",
            Error::NonFiniteEntry { .. } => "NON_FINITE_ENTRY",
            Error::SumOutOfTolerance { .. } => "SUM_OUT_OF_TOLERANCE",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::UnknownVariable(_) => "UNKNOWN_VARIABLE",
            Error::DuplicateVariable(_) => "DUPLICATE_VARIABLE",
            Error::OverlappingGroups(_) => "OVERLAPPING_GROUPS",
            Error::EmptyGroup => "EMPTY_GROUP",
            Error::LabelMissing { .. } => "LABEL_MISSING",
            Error::EmptySupport(_) => "EMPTY_SUPPORT",
            Error::DegenerateInput(_) => "DEGENERATE_INPUT",
            Error::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            Error::MalformedTable(_) => "MALFORMED_TABLE",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
