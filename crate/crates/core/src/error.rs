use thiserror::Error;

/// Errors raised by mesh construction, the state solver and the optimizer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {element}: {detail}")]
    DegenerateElement { element: usize, detail: String },

    #[error(
        "membrane assumptions cannot hold: out-of-plane shear coupling gamma = {gamma} must vanish"
    )]
    MembraneIncompatible { gamma: f64 },

    #[error("invalid load: {0}")]
    InvalidLoad(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error(
        "stiffness matrix is singular after constraints: {null_modes} zero-energy mode(s) remain"
    )]
    SingularSystem { null_modes: usize },

    #[error("volume multiplier bracket [{lo:e}, {hi:e}] does not straddle the budget: {detail}")]
    LambdaBracket { lo: f64, hi: f64, detail: String },

    #[error(
        "compliance increased inside the sizing loop at OC update {update}: {previous:e} -> {current:e}"
    )]
    MonotonicityViolation {
        update: usize,
        previous: f64,
        current: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
