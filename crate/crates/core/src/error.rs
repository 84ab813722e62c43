use thiserror::Error;

use crate::game::ArbitrageCertificate;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game specification: {0}")]
    InvalidSpec(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("stake dimension {stake} does not match move dimension {moves}")]
    DimensionMismatch { stake: usize, moves: usize },

    #[error("round {round}: move {move_index} is excluded by a degenerate price")]
    RejectedMove { round: usize, move_index: usize },

    #[error(
        "quoted price admits arbitrage at round {}, state {} (guaranteed gain {})",
        .0.round, .0.state, .0.gain_string()
    )]
    Arbitrage(Box<ArbitrageCertificate>),

    #[error("incoherent game: {0}")]
    CoherenceViolation(String),

    #[error("enumeration of {needed} paths exceeds the cap of {cap}")]
    EnumerationCap { needed: u128, cap: u64 },

    #[error("game has no unique pricing measure: {0}")]
    IncompleteGame(String),

    #[error("payoff is undefined at terminal state {state}")]
    PayoffUndefined { state: String },

    #[error("target distribution does not fit the horizon: {0}")]
    HorizonTooShort(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
