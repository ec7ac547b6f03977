use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("CFL violated in {stage}: number {number:.6} exceeds {limit}")]
    Cfl {
        stage: &'static str,
        number: f64,
        limit: f64,
    },

    #[error("vacuum in {stage}: density {value:e} at cell {cell}")]
    Vacuum {
        stage: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("positivity lost in {stage}: value {value:e} at cell {cell}")]
    Positivity {
        stage: &'static str,
        cell: usize,
        value: f64,
    },

    #[error("singular tridiagonal system at row {row}")]
    Singular { row: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver failed at step {step}: {source} (state dump: {dump:?})")]
    Solver {
        step: usize,
        dump: Option<PathBuf>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors raised by a numerical solver rather than by the inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::Cfl { .. }
                | Error::Vacuum { .. }
                | Error::Positivity { .. }
                | Error::Singular { .. }
                | Error::Solver { .. }
        )
    }
}
