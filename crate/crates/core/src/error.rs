use thiserror::Error;

use crate::rate::RateResult;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("unknown state \"{0}\"")]
    UnknownState(String),
    #[error("duplicate state \"{0}\"")]
    DuplicateState(String),
    #[error("duplicate edge \"{from}\" -> \"{to}\" with label {}", label.as_deref().unwrap_or("ε"))]
    DuplicateEdge { from: String, to: String, label: Option<String> },
    #[error("several entering or exit states; enable terminal normalization")]
    MultipleTerminals,
    #[error("missing entering or exit state")]
    MissingTerminal,
    #[error("state \"{0}\" appears in more than one synchronization pair")]
    RepeatedPairState(String),
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        ParseError::Malformed(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("power iteration did not converge in {} iterations (best estimate rho = {}, residual {})",
        .estimate.iterations, .estimate.rho, .estimate.residual)]
    NotConverged { estimate: RateResult },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrcError {
    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("rate is zero; any subgraph is a theta-IRC")]
    ZeroRate,
    #[error("component is not a subgraph of the system: {0}")]
    NotSubgraph(String),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IriError {
    #[error("input language automaton is nondeterministic at state \"{state}\" on \"{symbol}\"")]
    Nondeterministic { state: String, symbol: String },
    #[error("input language automaton has an ε-edge from \"{0}\"")]
    EpsilonInLanguage(String),
    #[error("constrained path automaton is empty: no path of the system consumes a word of the language")]
    EmptyProduct,
    #[error(transparent)]
    Irc(#[from] IrcError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl From<RateError> for IriError {
    fn from(e: RateError) -> Self {
        IriError::Irc(IrcError::Rate(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("phrase {phrase} refers to dictionary entry {index}, which does not precede it")]
    DanglingIndex { phrase: usize, index: usize },
    #[error("phrase {phrase} extends with symbol {symbol}, outside the alphabet of {alphabet} tokens")]
    UnknownSymbol { phrase: usize, symbol: u32, alphabet: usize },
    #[error("phrase {phrase} is empty")]
    EmptyPhrase { phrase: usize },
    #[error("trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignalError {
    #[error("fewer instructions than blocks ({len} < {blocks})")]
    FewerInstructionsThanBlocks { len: usize, blocks: usize },
    #[error("block count must be at least 1")]
    ZeroBlocks,
    #[error("window must be odd and between 1 and {len}, got {window}")]
    InvalidWindow { window: usize, len: usize },
    #[error("signal needs at least {needed} samples, got {len}")]
    TooShort { len: usize, needed: usize },
    #[error("signal lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("reference test set is empty")]
    EmptySet,
    #[error("bit rates must be finite and non-negative")]
    InvalidValue,
}

/// Any error raised by this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Irc(#[from] IrcError),
    #[error(transparent)]
    Iri(#[from] IriError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}
