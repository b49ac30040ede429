use thiserror::Error;

pub type Result<T> = std::result::Result<T, WitnessError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("truncation failure at dim {dim}: residual {residual:e}")]
    TruncationFailure { dim: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The state's P distribution is not a probability measure.
    #[error("unsupported family for classical sampling: {0}")]
    UnsupportedFamily(String),

    #[error("qubit coherence w(0) is zero; w(t)/w(0) is undefined")]
    DivisionUndefined,

    #[error("oracle rejected result: unitarity defect {unitarity:e}, trace defect {trace:e}")]
    OracleRejection { unitarity: f64, trace: f64 },
}
