use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("x = {x} lies outside [-1, 1]")]
    Domain { x: f64 },

    #[error("unknown preset `{0}` (expected one of U, C1, C2, UC, OC)")]
    UnknownPreset(String),

    #[error("node set is invalid: {0}")]
    InvalidNodes(String),

    #[error("CDF inversion failed for target {target}: {reason}")]
    Inversion { target: f64, reason: String },

    #[error("reference set on subinterval {interval} is ill-conditioned (Lebesgue constant {lebesgue:.3e})")]
    Conditioning { interval: usize, lebesgue: f64 },

    #[error("exchange did not converge on subinterval {interval} after {iterations} iterations: {reason}")]
    NonConvergence {
        interval: usize,
        iterations: usize,
        reason: String,
    },

    #[error("no witness polynomial: K = 1 on the {side} side")]
    NoWitness { side: &'static str },

    #[error("enumeration of {count} reference sets exceeds the limit {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("least-squares design matrix is rank deficient (|r_kk| = {pivot:.3e})")]
    RankDeficient { pivot: f64 },

    #[error("search for M exceeded the cap {cap}")]
    SearchCapExceeded { cap: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Inversion { .. }
                | Error::Conditioning { .. }
                | Error::NonConvergence { .. }
                | Error::RankDeficient { .. }
                | Error::SearchCapExceeded { .. }
                | Error::NoWitness { .. }
        )
    }
}
