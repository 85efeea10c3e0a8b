use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid initial state: {0}")]
    InvalidState(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("finite mirror delay required: {0}")]
    ContinuumLimit(&'static str),

    #[error("perturbative expansion is degenerate: |u^2 - x1| = {0:e}")]
    DegenerateExpansion(f64),

    #[error("evaluation point {0} lies on a pole")]
    PoleProximity(String),

    #[error("step size too coarse: Richardson estimate {estimate:e} exceeds {limit:e}")]
    StepTooCoarse { estimate: f64, limit: f64 },

    #[error("corrector failed to converge at t = {t} after {iterations} iterations")]
    ConvergenceFailure { t: f64, iterations: usize },

    #[error("amplitude {value} exceeds unity at x = {x}")]
    NonContractive { x: f64, value: f64 },

    #[error("horizon too short: {0}")]
    HorizonTooShort(String),

    #[error("grid too coarse: concurrence jumps by {jump} between samples at x = {x}")]
    GridTooCoarse { x: f64, jump: f64 },

    #[error("rank-deficient fit: need at least 3 distinct abscissae, got {0}")]
    RankDeficient(usize),
}

impl Error {
    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParams(_)
                | Error::InvalidState(_)
                | Error::InvalidGrid(_)
                | Error::ContinuumLimit(_)
                | Error::RankDeficient(_)
        )
    }
}
