use thiserror::Error;

/// Errors surfaced by the solver, norm toolkit and file formats.
#[derive(Debug, Error)]
pub enum BqsError {
    #[error("grid dimensions must be powers of two >= 8, got {n1}x{n2}")]
    GridDimension { n1: usize, n2: usize },

    #[error("data length {got} does not match grid ({expected} points)")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fields live on different grids: {a1}x{a2} vs {b1}x{b2}")]
    GridMismatch {
        a1: usize,
        a2: usize,
        b1: usize,
        b2: usize,
    },

    #[error("L^p norm requires p >= 1, got {0}")]
    InvalidNormExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config rejected: constraint \"{constraint}\" violated (margin {margin:.6})")]
    NotAdmissible { constraint: String, margin: f64 },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error("time history: {0}")]
    History(String),

    #[error("blow-up detected at t = {t}: {detail}")]
    BlowUp { t: f64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
