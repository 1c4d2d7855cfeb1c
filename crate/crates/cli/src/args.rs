use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use irate_core::signal::{DEFAULT_BLOCKS, DEFAULT_WINDOW};

/// Information rates of transition systems and bit-rate analysis of
/// execution traces.
#[derive(Debug, Parser)]
#[command(name = "irate", version)]
pub struct Cli {
    /// Format of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Compact JSON, full precision.
    Json,
    /// `key: value` lines, 6 decimals.
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information rate of a transition system.
    Rate {
        #[command(flatten)]
        system: SystemInput,
        /// Also estimate the rate from exact path counts over `lo:hi`.
        #[arg(long, value_name = "LO:HI", value_parser = parse_range)]
        oracle: Option<(usize, usize)>,
    },
    /// Information-rich component of a transition system.
    Irc {
        #[command(flatten)]
        system: SystemInput,
        #[arg(long, default_value_t = 0.79, value_parser = parse_theta)]
        theta: f64,
        /// Include the delete/restore decision log.
        #[arg(long)]
        emit_log: bool,
        /// Write the component as a transition-system document.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Information-rich components of a synchronous composition.
    IrcSync {
        /// First machine (`-i1` is accepted too).
        #[arg(long = "i1", value_name = "FILE")]
        first: PathBuf,
        /// Second machine (`-i2` is accepted too).
        #[arg(long = "i2", value_name = "FILE")]
        second: PathBuf,
        /// Synchronization pairs, `{"pairs": [["s1", "s2"], ...]}`.
        #[arg(long, value_name = "FILE")]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 0.79, value_parser = parse_theta)]
        theta: f64,
        #[arg(long)]
        emit_log: bool,
        #[arg(long)]
        normalize_terminals: bool,
    },
    /// Information-rich input set of a labeled transition system.
    Iri {
        #[command(flatten)]
        system: SystemInput,
        /// Deterministic automaton of the admissible input words.
        #[arg(long, value_name = "FILE")]
        lang: Option<PathBuf>,
        #[arg(long, default_value_t = 0.79, value_parser = parse_theta)]
        theta: f64,
        /// Write the automaton here instead of stdout.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Per-instruction LZ78 bit rates of a trace.
    Encode {
        #[command(flatten)]
        trace: TraceInput,
        /// Write `index,token_bits` here instead of stdout.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Block bit-rate signal of a trace.
    Signal {
        #[command(flatten)]
        trace: TraceInput,
        #[command(flatten)]
        blocks: Blocks,
        /// Write `index,rate` here instead of stdout.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Magnitude spectrum of the bit-rate signal of a trace.
    Spectrum {
        #[command(flatten)]
        trace: TraceInput,
        #[command(flatten)]
        blocks: Blocks,
        #[command(flatten)]
        window: Window,
        /// Write `normalized_frequency,magnitude` here instead of stdout.
        #[arg(long, value_name = "FILE")]
        emit: Option<PathBuf>,
    },
    /// Squared distance between the bit-rate signals of two traces.
    Distance {
        /// Exactly two traces.
        #[arg(short = 't', long = "trace", value_name = "FILE", num_args = 1, required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        opcode: bool,
        #[command(flatten)]
        blocks: Blocks,
    },
    /// Bit-rate coverage of a set of traces.
    Coverage {
        #[arg(short = 't', long = "trace", value_name = "FILE", required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        opcode: bool,
        #[command(flatten)]
        blocks: Blocks,
        /// Include each trace's coverage relative to the others.
        #[arg(long)]
        relative: bool,
    },
    /// Trace to rates, signal, spectrum and statistics in one run.
    Pipeline {
        #[command(flatten)]
        trace: TraceInput,
        #[command(flatten)]
        blocks: Blocks,
        #[command(flatten)]
        window: Window,
        #[arg(long, value_name = "FILE")]
        emit_rates: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        emit_signal: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        emit_spectrum: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SystemInput {
    /// Transition-system JSON document.
    #[arg(short = 'i', long = "input", value_name = "FILE")]
    pub path: PathBuf,
    /// Accept several entering/exit states and join them through fresh ones.
    #[arg(long)]
    pub normalize_terminals: bool,
}

#[derive(Debug, Args)]
pub struct TraceInput {
    /// Trace file, one instruction per line.
    #[arg(short = 't', long = "trace", value_name = "FILE")]
    pub path: PathBuf,
    /// Use only the first word of each line as the token.
    #[arg(long)]
    pub opcode: bool,
}

#[derive(Debug, Args)]
pub struct Blocks {
    #[arg(long, default_value_t = DEFAULT_BLOCKS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub blocks: u64,
}

#[derive(Debug, Args)]
pub struct Window {
    /// Odd width of the moving average over magnitudes; 1 disables it.
    #[arg(long, default_value_t = DEFAULT_WINDOW, value_parser = parse_window)]
    pub window: usize,
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("theta must lie in [0, 1], got {t}"))
    }
}

fn parse_window(s: &str) -> Result<usize, String> {
    let w: usize = s.parse().map_err(|e| format!("{e}"))?;
    if w % 2 == 1 {
        Ok(w)
    } else {
        Err(format!("window must be odd and at least 1, got {w}"))
    }
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.parse().map_err(|e| format!("{e}"))?;
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("expected LO < HI, got {lo}:{hi}"))
    }
}

/// Rewrites the single-dash spellings `-i1` / `-i2` to `--i1` / `--i2`.
pub fn normalize_args<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    args.into_iter()
        .map(|a| {
            for short in ["-i1", "-i2"] {
                if a == short || a.starts_with(&format!("{short}=")) {
                    return format!("-{a}");
                }
            }
            a
        })
        .collect()
}
