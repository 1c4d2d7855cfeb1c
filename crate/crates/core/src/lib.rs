//! Information-theoretic analysis of programs.
//!
//! Two families of tools live here:
//!
//! * For programs modeled as finite state transition systems: the
//!   information rate ([`rate`]), information-rich components ([`irc`],
//!   and [`sync`] for synchronous composition) and information-rich input
//!   sets ([`iri`]).
//! * For black-box programs observed through execution traces: LZ78
//!   instantaneous bit rates ([`trace`]) turned into block bit-rate
//!   signals, spectra, distances and coverage ([`signal`]).

pub mod compose;
pub mod error;
pub mod irc;
pub mod iri;
pub mod rate;
pub mod scc;
pub mod signal;
pub mod sync;
pub mod system;
pub mod trace;

pub use compose::{compose, CompositionMode};
pub use error::{Error, IrcError, IriError, ParseError, RateError, SignalError, TraceError};
pub use irc::{find_irc, verify_irc, Decision, IrcVerdict, RichComponent};
pub use iri::{
    build_constrained_path_automaton, find_iri, find_iri_constrained, find_iri_language, IriAutomaton,
    PathAutomaton,
};
pub use rate::{count_paths, rate_estimate_from_counts, spectral_rate, PathCount, RateConfig, RateResult};
pub use scc::scc_decompose;
pub use signal::{
    block_signal, cover, cover_rel, distance, spectrum, stats, BitRateSignal, CoverageReport, SignalStats,
    Spectrum,
};
pub use sync::{
    build_sync_product, find_sync_irc, sync_rate, verify_sync_irc, SyncPairSet, SyncProduct,
    SyncRichComponents,
};
pub use system::{clean, parse_system, Edge, Label, TransitionSystem};
pub use trace::{exe_rate_estimate, lz78_decode, lz78_encode, read_trace, Lz78Encoding, Trace};
