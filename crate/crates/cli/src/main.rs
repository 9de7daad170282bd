//! `colorlab` command-line front end.
//!
//! Exit codes: 0 when the run shows the expected outcome, 1 otherwise, 2 on
//! bad arguments. Reports are JSON; wall time goes to stderr so that identical
//! invocations write identical reports.

mod games;
mod graphs;
mod invariants;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use clap::error::ErrorKind;
use serde_json::{json, Value};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

#[derive(Parser)]
#[command(name = "colorlab", version, about = "Online-LOCAL coloring simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a host graph as JSON, plus a side file of coordinates.
    GenGraph(GenArgs),
    /// Play the unify algorithm against shuffled reveal orders.
    RunUpper(WithReport<games::UpperArgs>),
    /// Play a lower-bound adversary against an algorithm.
    RunAdversary(AdversaryCmd),
    /// Check the combinatorial lemmas on small instances.
    CheckInvariants(InvariantArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: graphs::Family,
    #[command(flatten)]
    graph: graphs::GraphArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coordinate file; defaults to the graph file with a `.coords.json` suffix.
    #[arg(long)]
    coords: Option<PathBuf>,
}

#[derive(Args)]
struct WithReport<A: Args> {
    #[command(flatten)]
    args: A,
    /// Report file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryCmd {
    #[command(flatten)]
    args: games::AdversaryArgs,
    /// Report file; stdout if absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct InvariantArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: invariants::Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    let io = |e: std::io::Error| Failure::Runtime(e.to_string());
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

fn envelope(command: &str, args: &[String], expected: bool, report: Value) -> Value {
    json!({
        "command": command,
        "args": args,
        "expected_outcome": expected,
        "report": report,
    })
}

fn gen_graph(a: &GenArgs) -> Result<bool, Failure> {
    let built = graphs::build(a.family, &a.graph, a.seed)?;
    let graph = serde_json::to_value(&built.graph).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_json(a.out.as_deref(), &graph)?;
    let coords_path = a.coords.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".coords.json");
            PathBuf::from(s)
        })
    });
    let side = json!({
        "family": format!("{:?}", a.family).to_lowercase(),
        "params": built.params,
        "nodes": built.coords,
    });
    match coords_path {
        Some(p) => write_json(Some(&p), &side)?,
        None => eprintln!("no --out or --coords given; coordinates not written"),
    }
    Ok(true)
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<bool, Failure> {
    match &cli.command {
        Command::GenGraph(a) => gen_graph(a),
        Command::RunUpper(a) => {
            let (report, ok) = games::run_upper(&a.args)?;
            write_json(a.out.as_deref(), &envelope("run-upper", argv, ok, report))?;
            Ok(ok)
        }
        Command::RunAdversary(a) => {
            let (report, ok) = games::run_adversary(&a.args)?;
            write_json(a.report.as_deref(), &envelope("run-adversary", argv, ok, report))?;
            Ok(ok)
        }
        Command::CheckInvariants(a) => {
            let lemmas = invariants::run(a.suite, a.seed);
            let ok = lemmas.iter().all(|l| l.violations == 0);
            let report = json!({ "suite": format!("{:?}", a.suite).to_lowercase(), "lemmas": lemmas });
            write_json(a.out.as_deref(), &envelope("check-invariants", argv, ok, report))?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    let start = Instant::now();
    let outcome = dispatch(&cli, &argv[1..]);
    eprintln!("wall time: {:.3}s", start.elapsed().as_secs_f64());
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            let help = <Cli as clap::CommandFactory>::command().render_help();
            eprintln!("error: {msg}\n\n{help}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
