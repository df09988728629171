use thiserror::Error;

/// Errors raised by the evidence model, the criterion and the optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("focal elements or evidences belong to different frames")]
    FrameMismatch,

    #[error("invalid evidence `{id}`: {reason}")]
    InvalidEvidence { id: String, reason: String },

    #[error("invalid domain distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("{0}")]
    Domain(String),

    #[error("precombined evidences {ids:?} are totally contradictory (conflict 1)")]
    ImpossibleEvidence { ids: Vec<String> },

    #[error("cannot split {evidences} evidences into {subsets} nonempty subsets")]
    Infeasible { subsets: usize, evidences: usize },

    #[error("instance too large for exhaustive search: {0}")]
    OracleTooLarge(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
