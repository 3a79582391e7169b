use thiserror::Error;

/// Every failure the engines can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("InvalidRank: type C needs n >= 2, got {0}")]
    InvalidRank(usize),
    #[error("NodeOutOfRange: node {node} not in 1..={rank}")]
    NodeOutOfRange { node: usize, rank: usize },
    #[error("Undefined: {0}")]
    Undefined(String),
    #[error("NotDominant: {0}")]
    NotDominant(String),
    #[error("NonSpecialDetected: {0}")]
    NonSpecialDetected(String),
    #[error("BudgetExceeded: more than {0} monomials expanded")]
    BudgetExceeded(usize),
    #[error("IncompleteCharacter: {0}")]
    IncompleteCharacter(String),
    #[error("InvalidLabel: {0}")]
    InvalidLabel(String),
    #[error("ConstraintViolated: {0}")]
    ConstraintViolated(String),
    #[error("Unsupported: {0}")]
    Unsupported(String),
    #[error("BoundaryVertex: {0}")]
    BoundaryVertex(String),
    #[error("NonExactDivision: {0}")]
    NonExactDivision(String),
    #[error("WindowTooSmall: depth {given} given, at least {required} required")]
    WindowTooSmall { given: usize, required: usize },
    #[error("AmbiguousMatch: {0}")]
    AmbiguousMatch(String),
    #[error("Parse: {0}")]
    Parse(String),
    #[error("Io: {0}")]
    Io(String),
}

impl Error {
    /// Stable short name, used in structured CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRank(_) => "InvalidRank",
            Error::NodeOutOfRange { .. } => "NodeOutOfRange",
            Error::Undefined(_) => "Undefined",
            Error::NotDominant(_) => "NotDominant",
            Error::NonSpecialDetected(_) => "NonSpecialDetected",
            Error::BudgetExceeded(_) => "BudgetExceeded",
            Error::IncompleteCharacter(_) => "IncompleteCharacter",
            Error::InvalidLabel(_) => "InvalidLabel",
            Error::ConstraintViolated(_) => "ConstraintViolated",
            Error::Unsupported(_) => "Unsupported",
            Error::BoundaryVertex(_) => "BoundaryVertex",
            Error::NonExactDivision(_) => "NonExactDivision",
            Error::WindowTooSmall { .. } => "WindowTooSmall",
            Error::AmbiguousMatch(_) => "AmbiguousMatch",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
