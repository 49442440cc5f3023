use thiserror::Error;

/// Errors produced by the simulation and theory layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BfwError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("node id {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: u32, node_count: usize },

    #[error("nodes {0} and {1} are already in the same component")]
    SameComponent(u32, u32),

    #[error("need at least two components, found {0}")]
    TooFewComponents(usize),

    #[error("run already finished: accepted-edge budget {0} reached")]
    RunFinished(u64),

    #[error("no sign change for the giant-fraction equation at alpha = {0}")]
    NoBracket(f64),

    #[error("size system infeasible at level m = {level}: discriminant {discriminant}")]
    Infeasible { level: usize, discriminant: f64 },

    #[error("alpha sets do not match: {0}")]
    MismatchedAlphas(String),
}

pub type Result<T> = std::result::Result<T, BfwError>;
