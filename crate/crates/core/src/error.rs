use thiserror::Error;

/// Errors raised while building or solving an extension problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate rule: {0}")]
    DegenerateRule(String),

    #[error("no extension: {0}")]
    NoExtension(String),

    #[error("no convergence in {stage} after {iterations} iterations (last residual {residual:.3e})")]
    Convergence {
        stage: String,
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
