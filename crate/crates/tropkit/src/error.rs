use crate::semiring::SemiringTag;
use crate::tropmat::TropVector;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, TropError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TropError {
    #[error("semiring tags differ: {0} vs {1}")]
    TagMismatch(SemiringTag, SemiringTag),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("residuation by the semiring zero")]
    DivisionByBottom,

    #[error("star diverges: {0}")]
    Divergent(String),

    #[error("the digraph of finite entries has no cycle")]
    NoCycle,

    #[error("column {0} has no finite entry")]
    ZeroColumn(usize),

    #[error("row {0} has no finite entry; Collatz-Wielandt value is unbounded")]
    Unbounded(usize),

    #[error("residual taken over an empty support")]
    EmptySupport,

    #[error("operation not supported over the {0} semiring")]
    UnsupportedTag(SemiringTag),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("input exceeds the supported size: {0}")]
    TooLarge(String),

    #[error("the system has only the zero solution")]
    Infeasible,

    #[error("the semimodules share a nonzero point")]
    NotSeparable { witness: TropVector },

    #[error("matrix is not strongly regular: {reason}")]
    NotStronglyRegular {
        reason: String,
        /// A second optimal bijection when uniqueness fails.
        second: Option<Vec<usize>>,
    },

    #[error("certificate rejected: {0}")]
    CertificateInvalid(String),

    #[error("bijection is not optimal: improving cycle {0:?}")]
    ImprovingCycle(Vec<usize>),

    #[error("no normal flow from subset {subset:#b}")]
    NoFlow { subset: u32 },

    #[error("interval data do not extend to a TP-function: {0}")]
    Inconsistent(String),

    #[error("trajectory diverged: {0}")]
    Diverged(String),

    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl TropError {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            TropError::TagMismatch(..) => "TagMismatch",
            TropError::DimensionMismatch(_) => "DimensionMismatch",
            TropError::DivisionByBottom => "DivisionByBottom",
            TropError::Divergent(_) => "Divergent",
            TropError::NoCycle => "NoCycle",
            TropError::ZeroColumn(_) => "ZeroColumn",
            TropError::Unbounded(_) => "Unbounded",
            TropError::EmptySupport => "EmptySupport",
            TropError::UnsupportedTag(_) => "UnsupportedTag",
            TropError::InvalidValue(_) => "InvalidValue",
            TropError::TooLarge(_) => "TooLarge",
            TropError::Infeasible => "Infeasible",
            TropError::NotSeparable { .. } => "NotSeparable",
            TropError::NotStronglyRegular { .. } => "NotStronglyRegular",
            TropError::CertificateInvalid(_) => "CertificateInvalid",
            TropError::ImprovingCycle(_) => "ImprovingCycle",
            TropError::NoFlow { .. } => "NoFlow",
            TropError::Inconsistent(_) => "Inconsistent",
            TropError::Diverged(_) => "Diverged",
            TropError::BadConfig(_) => "BadConfig",
            TropError::Parse(_) => "Parse",
        }
    }
}
