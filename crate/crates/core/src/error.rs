use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested computation exceeds a configured state or sample cap.
    #[error("capacity error: required {required} exceeds cap {cap} ({what})")]
    Capacity {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    /// Bad wiring: unknown strategy, missing functionality, interface mismatch.
    #[error("configuration error: {0}")]
    Config(String),

    /// A play exceeded the game's round cap.
    #[error("runtime fault: round cap {cap} exceeded at round {round}")]
    RoundCapExceeded { round: u32, cap: u32 },

    /// A strategy emitted an action the game rules do not accept.
    #[error("runtime fault: malformed action by player {player} at round {round}: {detail}")]
    MalformedAction {
        player: usize,
        round: u32,
        detail: String,
    },

    /// A functionality was driven through an illegal state transition.
    #[error("protocol fault: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, Error>;
