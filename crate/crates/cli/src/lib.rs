//! Config-driven experiment harness: parses JSON configs with dotted flag
//! overrides, dispatches to the flow, noncollapse, containment, linearized
//! and speed pipelines of `noncollapse-core`, and writes CSV artifacts plus
//! a `summary.json`.
//!
//! Exit statuses: 0 success, 2 parse error, 3 invalid config, 4 a verdict
//! tolerance was violated, 5 flow failure, 6 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{run_command, Outcome};
pub use config::{
    apply_override, from_value, parse_config, parse_overrides, Command, ContainmentSpec,
    ExperimentConfig, GeometrySpec, Tolerances,
};
pub use error::{CliError, CliResult};
pub use noncollapse_core as core;

pub const THREADS_ENV: &str = "NONCOLLAPSE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "noncollapse",
    override_usage = "noncollapse [COMMAND] [--config FILE] [--threads N] [--KEY VALUE]...",
    version,
    about = "Run curvature-flow experiments from a JSON config",
    after_help = "Any config key can be set with a dotted flag, e.g. `--flow.t_end 0.2` or `--speed=pmean:-1`."
)]
struct Args {
    /// run-flow, analyze-noncollapse, run-containment, verify-linearized or check-speeds
    command: Option<String>,

    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Worker threads (default: NONCOLLAPSE_THREADS, else all cores)
    #[arg(long)]
    threads: Option<usize>,
}

/// Separates dotted `--key value` overrides from the flags clap knows.
fn split_args(argv: Vec<OsString>) -> (Vec<OsString>, Vec<String>) {
    let mut known = Vec::new();
    let mut overrides = Vec::new();
    let mut it = argv.into_iter();
    known.extend(it.next());
    while let Some(arg) = it.next() {
        let text = arg.to_string_lossy().into_owned();
        let name = text.split_once('=').map_or(text.as_str(), |(k, _)| k);
        let takes_value = !text.contains('=');
        match name {
            "--config" | "--threads" => {
                known.push(arg);
                if takes_value {
                    known.extend(it.next());
                }
            }
            "-h" | "--help" | "-V" | "--version" => known.push(arg),
            _ if name.starts_with("--") && name.len() > 2 => {
                overrides.push(text.clone());
                if takes_value {
                    overrides.extend(it.next().map(|v| v.to_string_lossy().into_owned()));
                }
            }
            _ => known.push(arg),
        }
    }
    (known, overrides)
}

fn thread_count(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Parse(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn execute(args: Args, overrides: Vec<String>) -> CliResult<Outcome> {
    if let Some(n) = thread_count(args.threads)?.filter(|&n| n > 0) {
        // A second configuration in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let overrides = parse_overrides(&overrides)?;
    let cfg = parse_config(args.config.as_deref(), args.command.as_deref(), &overrides)?;
    run_command(&cfg)
}

/// Runs the binary on `argv` (program name first) and returns the exit
/// status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (known, overrides) = split_args(argv.into_iter().map(Into::into).collect());
    let args = match Args::try_parse_from(known) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(args, overrides) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            let failed: Vec<&str> = outcome.summary["verdicts"]
                .as_object()
                .map(|v| {
                    v.iter()
                        .filter(|(_, x)| x["passed"] == false)
                        .map(|(k, _)| k.as_str())
                        .collect()
                })
                .unwrap_or_default();
            if let Some(t) = outcome.summary.get("termination") {
                eprintln!("termination: {}", t.as_str().unwrap_or("?"));
            }
            if !failed.is_empty() {
                eprintln!("failed verdicts: {}", failed.join(", "));
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
