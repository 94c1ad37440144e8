use thiserror::Error;

use crate::model::ModelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("player index {index} out of range for {n} players")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("team must not be empty")]
    EmptyTeam,
    #[error("player {player} appears on both sides of a game; overlap is not allowed for this dataset")]
    Overlap { player: usize },
    #[error("game weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("strength of player {player} must be positive and finite, got {value}")]
    InvalidStrength { player: usize, value: f64 },
    #[error("expected {expected} strengths, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("a dataset needs at least one player")]
    NoPlayers,
    #[error("duplicate player label `{0}`")]
    DuplicateLabel(String),
    #[error("the {model} model requires one-against-one games; game {edge} has teams of size {winners} and {losers}")]
    NotPairwise {
        model: ModelKind,
        edge: usize,
        winners: usize,
        losers: usize,
    },
    #[error("update rule {rule} cannot be used with the {model} model")]
    IncompatibleRule { rule: &'static str, model: ModelKind },
    #[error("win matrix must be square with non-negative finite entries")]
    InvalidMatrix,
    #[error("player {player} has no wins: update numerator is zero")]
    ZeroNumerator { player: usize },
    #[error("player {player} has no losses: update denominator is zero")]
    ZeroDenominator { player: usize },
    #[error("update numerator for player {player} is not positive ({value})")]
    NonPositiveNumerator { player: usize, value: f64 },
    #[error("sweep {sweep}: {source}")]
    Sweep {
        sweep: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("degenerate dataset: {0}")]
    Degenerate(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("series must have equal length of at least 2 (got {0} and {1})")]
    SeriesLength(usize, usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("player {player} has played no games")]
    NoGames { player: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Strips the `Sweep` wrapper added by the fit loop.
    pub fn root(&self) -> &Error {
        match self {
            Error::Sweep { source, .. } => source.root(),
            other => other,
        }
    }
}
