use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph parse error on line {line}: {msg}")]
    GraphParse { line: usize, msg: String },

    #[error("invalid vertex {vertex}: vertices are 1-based and must not exceed {n}")]
    VertexOutOfRange { vertex: u32, n: usize },

    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(u32),

    #[error("invalid simplex {0}: vertices must be strictly increasing")]
    InvalidSimplex(String),

    #[error("signal error: {0}")]
    Signal(String),

    #[error("invalid filter spec: {0}")]
    FilterSpec(String),

    #[error("invalid polynomial: {0}")]
    Polynomial(String),

    #[error("phase solve failed: {0}")]
    PhaseSolve(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("state space of dimension {dim} exceeds the simulator cap of {cap} rows")]
    StateSpaceTooLarge { dim: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("the filter annihilates the signal: output norm {norm:.3e} is below 1e-12")]
    AnnihilatedSignal { norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
