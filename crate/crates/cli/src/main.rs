//! `conekit`: command-line front end for slack matrices, measurement
//! decomposition, capacity search, protocol simulation, completely positive
//! factorization of correlation polytopes and circuit compilation.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use output::{floatify, render, Format};

#[derive(Parser, Debug)]
#[command(name = "conekit", version, about = "Cone factorizations, GPT measurements and completely positive lifts")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance for gaps and checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Exact rational arithmetic and exact "p/q" strings in the output.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Facets and slack matrix of a 0/1 polytope.
    Slack(commands::SlackArgs),
    /// Refine a measurement into extremal effects and split it into
    /// measurements with few nonzero effects.
    DecomposeMeasurement(commands::DecomposeArgs),
    /// Seeded lower bound on the single-shot capacity of a cone.
    Capacity(commands::CapacityArgs),
    /// Compile a factorization into a one-way protocol and sample it.
    Simulate(commands::SimulateArgs),
    /// Completely positive factorization of the slack matrix of COR(n).
    FactorizeCor(commands::FactorizeArgs),
    /// Completely positive lift of COR(n).
    CpExtend(commands::CpExtendArgs),
    /// Lower a netlist to NOR gates and compile it to a face of COR(n).
    CompileCircuit(commands::CompileArgs),
    /// Check a factorization or COR certificate from JSON.
    VerifyFactorization(commands::VerifyArgs),
}

/// A command result: the document and, on a failed check, the violated
/// invariant.
pub struct Outcome {
    pub doc: Value,
    pub failure: Option<(String, String)>,
}

impl Outcome {
    pub fn checked(doc: Value, failure: Option<(String, String)>) -> Self {
        Outcome { doc, failure }
    }
}

pub enum CliError {
    Usage(String),
    Core(conekit_core::Error),
}

impl From<conekit_core::Error> for CliError {
    fn from(e: conekit_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CONEKIT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second initialization only happens in tests and is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn finish(global: &Global, outcome: Outcome) -> ExitCode {
    let mut doc = outcome.doc;
    if let Value::Object(map) = &mut doc {
        let status = if outcome.failure.is_some() { "FAIL" } else { "PASS" };
        map.insert("status".into(), json!(status));
        if let Some((invariant, message)) = &outcome.failure {
            map.insert("diagnostics".into(), json!({ "invariant": invariant, "message": message }));
        }
    }
    if !global.exact {
        doc = floatify(doc);
    }
    let text = render(&doc, global.format);
    match &global.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                return error_exit(global, CliError::Core(e.into()));
            }
        }
        None => print!("{text}"),
    }
    match &outcome.failure {
        None => {
            eprintln!("PASS");
            ExitCode::SUCCESS
        }
        Some((invariant, message)) => {
            eprintln!("FAIL {invariant}: {message}");
            ExitCode::from(1)
        }
    }
}

fn error_exit(global: &Global, err: CliError) -> ExitCode {
    match err {
        CliError::Usage(msg) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        CliError::Core(e) => {
            let doc = json!({
                "status": "FAIL",
                "diagnostics": { "invariant": e.kind(), "message": e.to_string() },
            });
            print!("{}", render(&doc, global.format));
            eprintln!("FAIL {}: {e}", e.kind());
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    match commands::dispatch(&cli.global, &cli.command) {
        Ok(outcome) => finish(&cli.global, outcome),
        Err(err) => error_exit(&cli.global, err),
    }
}
