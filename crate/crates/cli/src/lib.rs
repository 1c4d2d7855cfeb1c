//! The `irate` command-line tool.
//!
//! [`run`] parses an argument list, executes one subcommand and returns the
//! process exit status: 0 on success, 1 on a domain error (a one-line
//! diagnostic on stderr), 2 on a usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use irate_core::rate::rate_estimate_from_counts;
use irate_core::signal::{self, BitRateSignal};
use irate_core::system::{parse_system_with, ParseOptions};
use irate_core::trace::{read_trace_with, TokenMode};
use irate_core::{
    exe_rate_estimate, find_irc, find_iri, find_iri_constrained, find_sync_irc, lz78_encode, spectral_rate,
    Lz78Encoding, RichComponent, SyncPairSet, TransitionSystem,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub mod args;

use args::{Cli, Command, Format};

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "IRATE_THREADS";

/// Runs the tool with `args` (including the program name), writing results
/// to `out` and diagnostics to `err`.
pub fn run<I, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = String>,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args::normalize_args(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    if let Err(e) = check_usage(&cli) {
        let _ = write!(err, "{}", e.render());
        return 2;
    }
    match with_thread_pool(|| execute(&cli)) {
        Ok(output) => match output.write(cli.format, out) {
            Ok(()) => 0,
            // a closed pipe (`irate encode ... | head`) is not an error
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
            Err(e) => report(err, &e.into()),
        },
        Err(e) => report(err, &e),
    }
}

fn report<E: Write>(err: &mut E, e: &anyhow::Error) -> i32 {
    let line = format!("{e:#}").replace(['\n', '\r'], " ");
    let _ = writeln!(err, "error: {line}");
    1
}

fn check_usage(cli: &Cli) -> Result<(), clap::Error> {
    if let Command::Distance { traces, .. } = &cli.command {
        if traces.len() != 2 {
            return Err(Cli::command().error(
                ErrorKind::WrongNumberOfValues,
                format!("distance takes exactly two traces, got {}", traces.len()),
            ));
        }
    }
    Ok(())
}

fn with_thread_pool<T: Send>(f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
        builder = builder.num_threads(n);
    }
    builder.build().context("cannot start worker threads")?.install(f)
}

/// What a subcommand prints on stdout.
enum Output {
    /// A summary object, rendered per `--format`.
    Summary(Value),
    /// A document printed verbatim.
    Raw(String),
}

impl Output {
    fn write<W: Write>(&self, format: Format, out: &mut W) -> std::io::Result<()> {
        match self {
            Output::Raw(text) => out.write_all(text.as_bytes()),
            Output::Summary(value) => match format {
                Format::Json => writeln!(out, "{value}"),
                Format::Text => out.write_all(render_text(value).as_bytes()),
            },
        }
    }
}

fn render_text(value: &Value) -> String {
    let mut s = String::new();
    render_into(&mut s, "", value);
    s
}

/// Flattens nested objects into dotted keys.
fn render_into(s: &mut String, prefix: &str, value: &Value) {
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                let key = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                render_into(s, &key, v);
            }
        }
        other => {
            let shown = match other {
                Value::Number(n) if n.is_f64() => format!("{:.6}", n.as_f64().unwrap_or(f64::NAN)),
                Value::String(t) => t.clone(),
                v => v.to_string(),
            };
            if prefix.is_empty() {
                s.push_str(&format!("{shown}\n"));
            } else {
                s.push_str(&format!("{prefix}: {shown}\n"));
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Rate { system, oracle } => {
            let sys = load_system(&system.path, system.normalize_terminals)?;
            let r = spectral_rate(&sys)?;
            let mut v = json!({ "rho": r.rho, "lambda": r.lambda });
            if let Some((lo, hi)) = *oracle {
                v["oracle"] = json!(rate_estimate_from_counts(&sys, lo, hi));
            }
            Ok(Output::Summary(v))
        }
        Command::Irc { system, theta, emit_log, emit } => {
            let sys = load_system(&system.path, system.normalize_terminals)?;
            let comp = find_irc(&sys, *theta)?;
            let mut v = json!(ComponentReport::new(&sys, &comp));
            v["lambda_system"] = json!(spectral_rate(&sys)?.lambda);
            v["theta"] = json!(theta);
            v["rate_evaluations"] = json!(comp.rate_evaluations);
            if *emit_log {
                let log: Vec<Value> =
                    comp.trace_log.iter().map(|(e, d)| json!({ "edge": e, "decision": d })).collect();
                v["trace_log"] = json!(log);
            }
            if let Some(path) = emit {
                write_file(path, &(comp.to_system(&sys).to_json() + "\n"))?;
            }
            Ok(Output::Summary(v))
        }
        Command::IrcSync { first, second, pairs, theta, emit_log, normalize_terminals } => {
            let m1 = load_system(first, *normalize_terminals)?;
            let m2 = load_system(second, *normalize_terminals)?;
            let pairs = match pairs {
                Some(p) => SyncPairSet::parse(&read_text(p)?).with_context(|| format!("{}", p.display()))?,
                None => SyncPairSet::default(),
            };
            let found = find_sync_irc(&m1, &m2, &pairs, *theta)?;
            let mut v = json!({
                "first": ComponentReport::new(&m1, &found.first),
                "second": ComponentReport::new(&m2, &found.second),
                "lambda": found.lambda,
                "lambda_full": found.lambda_full,
                "theta": theta,
                "rate_evaluations": found.rate_evaluations,
            });
            if *emit_log {
                let log: Vec<Value> = found
                    .trace_log
                    .iter()
                    .map(|(s, e, d)| json!({ "side": s, "edge": e, "decision": d }))
                    .collect();
                v["trace_log"] = json!(log);
            }
            Ok(Output::Summary(v))
        }
        Command::Iri { system, lang, theta, emit } => {
            let sys = load_system(&system.path, system.normalize_terminals)?;
            let iri = match lang {
                Some(p) => find_iri_constrained(&sys, &load_system(p, false)?, *theta)?,
                None => find_iri(&sys, *theta)?,
            };
            let doc = iri.system.to_json() + "\n";
            match emit {
                None => Ok(Output::Raw(doc)),
                Some(path) => {
                    write_file(path, &doc)?;
                    Ok(Output::Summary(json!({
                        "lambda_path": iri.lambda_path,
                        "alpha_len": iri.alpha_len,
                        "beta_len": iri.beta_len,
                        "states": iri.system.num_states(),
                        "edges": iri.system.num_edges(),
                        "source_edges": iri.source_edges,
                    })))
                }
            }
        }
        Command::Encode { trace, emit } => {
            let enc = encode_file(&trace.path, trace.opcode)?;
            let csv = rates_csv(&enc);
            match emit {
                None => Ok(Output::Raw(csv)),
                Some(path) => {
                    write_file(path, &csv)?;
                    Ok(Output::Summary(encoding_summary(&enc)?))
                }
            }
        }
        Command::Signal { trace, blocks, emit } => {
            let enc = encode_file(&trace.path, trace.opcode)?;
            let sig = to_signal(&enc, blocks.blocks)?;
            let csv = signal_csv(&sig);
            match emit {
                None => Ok(Output::Raw(csv)),
                Some(path) => {
                    write_file(path, &csv)?;
                    Ok(Output::Summary(signal_summary(&sig)))
                }
            }
        }
        Command::Spectrum { trace, blocks, window, emit } => {
            let enc = encode_file(&trace.path, trace.opcode)?;
            let sig = to_signal(&enc, blocks.blocks)?;
            let spec = signal::spectrum(&sig, window.window)?;
            let csv = spectrum_csv(&spec);
            match emit {
                None => Ok(Output::Raw(csv)),
                Some(path) => {
                    write_file(path, &csv)?;
                    let peak = spec.peak_bin();
                    Ok(Output::Summary(json!({
                        "peak_bin": peak,
                        "peak_frequency": spec.normalized_frequencies[peak],
                        "peak_magnitude": spec.smoothed[peak],
                    })))
                }
            }
        }
        Command::Distance { traces, opcode, blocks } => {
            let sigs = signals(traces, *opcode, blocks.blocks)?;
            let (x, y) = (&sigs[0], &sigs[1]);
            let d = signal::distance(x, y)?;
            let dm = x.mean() - y.mean();
            let n = x.len() as f64;
            Ok(Output::Summary(json!({
                "distance": d,
                "shape": d - n * dm * dm,
                "mean_term": n * dm * dm,
            })))
        }
        Command::Coverage { traces, opcode, blocks, relative } => {
            let sigs = signals(traces, *opcode, blocks.blocks)?;
            let ids: Vec<String> = traces.iter().map(|p| p.display().to_string()).collect();
            let named: Vec<(String, BitRateSignal)> = ids.iter().cloned().zip(sigs).collect();
            let mut report = signal::cover(&named)?;
            if *relative {
                report = report.with_relative();
            }
            let mut pairwise = Vec::new();
            for (i, row) in report.pairwise.iter().enumerate() {
                for (j, d) in row.iter().enumerate() {
                    pairwise.push(json!([report.ids[i], report.ids[j], d]));
                }
            }
            let mut v = json!({ "cover": report.cover, "pairwise": pairwise });
            if let Some(rel) = &report.relative {
                let rows: Vec<Value> = report.ids.iter().zip(rel).map(|(id, r)| json!([id, r])).collect();
                v["relative"] = json!(rows);
            }
            Ok(Output::Summary(v))
        }
        Command::Pipeline { trace, blocks, window, emit_rates, emit_signal, emit_spectrum } => {
            let enc = encode_file(&trace.path, trace.opcode)?;
            let sig = to_signal(&enc, blocks.blocks)?;
            let spec = signal::spectrum(&sig, window.window)?;
            if let Some(path) = emit_rates {
                write_file(path, &rates_csv(&enc))?;
            }
            if let Some(path) = emit_signal {
                write_file(path, &signal_csv(&sig))?;
            }
            if let Some(path) = emit_spectrum {
                write_file(path, &spectrum_csv(&spec))?;
            }
            let mut v = encoding_summary(&enc)?;
            let peak = spec.peak_bin();
            for (key, value) in [
                ("signal", signal_summary(&sig)),
                ("peak_bin", json!(peak)),
                ("peak_frequency", json!(spec.normalized_frequencies[peak])),
            ] {
                v[key] = value;
            }
            Ok(Output::Summary(v))
        }
    }
}

#[derive(Serialize)]
struct ComponentReport {
    kept_states: Vec<String>,
    kept_edges: Vec<usize>,
    entry: String,
    exit: String,
    lambda: f64,
}

impl ComponentReport {
    fn new(sys: &TransitionSystem, comp: &RichComponent) -> Self {
        ComponentReport {
            kept_states: comp.kept_states.iter().map(|&s| sys.state_id(s).to_string()).collect(),
            kept_edges: comp.kept_edges.clone(),
            entry: sys.state_id(comp.entry).to_string(),
            exit: sys.state_id(comp.exit).to_string(),
            lambda: comp.lambda_component,
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_system(path: &Path, normalize_terminals: bool) -> Result<TransitionSystem> {
    let text = read_text(path)?;
    parse_system_with(&text, ParseOptions { normalize_terminals }).with_context(|| format!("{}", path.display()))
}

fn encode_file(path: &Path, opcode: bool) -> Result<Lz78Encoding> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mode = if opcode { TokenMode::Opcode } else { TokenMode::Line };
    let trace = read_trace_with(&bytes, mode).with_context(|| format!("{}", path.display()))?;
    if trace.is_empty() {
        bail!("{}: trace is empty", path.display());
    }
    Ok(lz78_encode(&trace))
}

fn to_signal(enc: &Lz78Encoding, blocks: u64) -> Result<BitRateSignal> {
    let blocks = usize::try_from(blocks).context("block count too large")?;
    Ok(signal::block_signal(&enc.per_symbol_bits, blocks)?)
}

/// Encodes and blocks each trace; traces are processed in parallel and
/// results keep input order.
fn signals(paths: &[PathBuf], opcode: bool, blocks: u64) -> Result<Vec<BitRateSignal>> {
    paths
        .par_iter()
        .map(|p| to_signal(&encode_file(p, opcode)?, blocks).with_context(|| format!("{}", p.display())))
        .collect()
}

fn encoding_summary(enc: &Lz78Encoding) -> Result<Value> {
    Ok(json!({
        "instructions": enc.len(),
        "alphabet": enc.alphabet.len(),
        "phrases": enc.phrases.len(),
        "total_bits": enc.total_bits,
        "bits_per_instruction": exe_rate_estimate(enc)?,
    }))
}

fn signal_summary(sig: &BitRateSignal) -> Value {
    let st = signal::stats(sig);
    json!({
        "blocks": sig.len(),
        "block_size": sig.block_size(),
        "mean": st.mean,
        "variance": st.variance,
    })
}

fn rates_csv(enc: &Lz78Encoding) -> String {
    let mut s = String::from("index,token_bits\n");
    for (i, b) in enc.per_symbol_bits.iter().enumerate() {
        s.push_str(&format!("{i},{b}\n"));
    }
    s
}

fn signal_csv(sig: &BitRateSignal) -> String {
    let mut s = String::from("index,rate\n");
    for (i, v) in sig.values().iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}

fn spectrum_csv(spec: &signal::Spectrum) -> String {
    let mut s = String::from("normalized_frequency,magnitude\n");
    for (f, m) in spec.normalized_frequencies.iter().zip(&spec.smoothed) {
        s.push_str(&format!("{f},{m}\n"));
    }
    s
}
