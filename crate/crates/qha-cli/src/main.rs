//! `qha` — runs the verification suites and writes per-suite reports.
//!
//! Exit status: 0 when every entry of every selected suite passes, 1 when
//! some entry fails, 2 on configuration errors or a crashed suite.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use qha_cli::{emit_report, run_selected, ReportFormat, SuiteConfig, SuiteName};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qha",
    version,
    about = "Numerical verification suites for the qha-core phase-space toolkit"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run verification suites and write one report file per suite.
    Run(RunArgs),
    /// Exhaustively verify the finite cyclic model at the given moduli.
    VerifyFinite(VerifyFiniteArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Suite to run, by name; repeatable.  Default: all suites.
    #[arg(long = "suite", value_name = "NAME")]
    suite: Vec<String>,
    /// Position-space dimension of the continuum grid.
    #[arg(long, value_name = "D")]
    d: Option<usize>,
    /// Grid points per axis.
    #[arg(long, value_name = "N")]
    n: Option<usize>,
    /// Position box length.
    #[arg(long = "L", value_name = "LEN")]
    l: Option<f64>,
    /// Odd moduli for the finite suite, comma separated.
    #[arg(long = "N", value_name = "MODULI", value_delimiter = ',')]
    moduli: Vec<u64>,
    /// Worker threads (0 = all available cores).
    #[arg(long, value_name = "W")]
    workers: Option<usize>,
    /// Base RNG seed for all randomized checks.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Report directory (default: $QHA_OUT, then ./qha-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, value_name = "FMT", default_value = "json")]
    format: String,
    /// Tolerance override as NAME=VALUE; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
}

#[derive(Args)]
struct VerifyFiniteArgs {
    /// Odd moduli to verify, comma separated.
    #[arg(long = "N", value_name = "MODULI", value_delimiter = ',', required = true)]
    moduli: Vec<u64>,
    /// Report directory (default: $QHA_OUT, then ./qha-out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, value_name = "FMT", default_value = "json")]
    format: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let (cfg, format) = match cli.cmd {
        Cmd::Run(args) => build_config(args)?,
        Cmd::VerifyFinite(args) => {
            let cfg = SuiteConfig {
                finite_moduli: args.moduli,
                suites: vec![SuiteName::Finite],
                out_dir: args.out,
                ..SuiteConfig::default()
            };
            let format = parse_format(&args.format)?;
            (cfg, format)
        }
    };

    // Surface bad grid parameters as a usage error before any suite runs.
    qha_core::PhaseGrid::new(cfg.d, cfg.n, cfg.l)
        .map_err(|e| anyhow!("invalid grid configuration: {e}"))?;

    let dir = cfg.resolved_out_dir();
    let runs = run_selected(&cfg)?;
    let mut any_fail = false;
    let mut any_crash = false;
    for run in &runs {
        match &run.outcome {
            Ok(report) => {
                let path = emit_report(report, format, &dir)?;
                let verdict = if report.all_pass() { "pass" } else { "FAIL" };
                println!(
                    "suite {:<9} {:>3} entries  {}  ({:.2}s)  -> {}",
                    run.name,
                    report.entries.len(),
                    verdict,
                    report.wall_time_s,
                    path.display()
                );
                if !report.all_pass() {
                    any_fail = true;
                    for name in report.failures() {
                        println!("    failed: {name}");
                    }
                }
            }
            Err(msg) => {
                any_crash = true;
                eprintln!("suite {:<9} did not produce a report: {msg}", run.name);
            }
        }
    }

    Ok(if any_crash {
        ExitCode::from(2)
    } else if any_fail {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn build_config(args: RunArgs) -> anyhow::Result<(SuiteConfig, ReportFormat)> {
    let mut cfg = SuiteConfig::default();
    let mut suites = Vec::new();
    for name in &args.suite {
        let parsed: SuiteName = name.parse().map_err(|e: String| anyhow!(e))?;
        if !suites.contains(&parsed) {
            suites.push(parsed);
        }
    }
    cfg.suites = suites;
    if let Some(d) = args.d {
        cfg.d = d;
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(l) = args.l {
        cfg.l = l;
    }
    if !args.moduli.is_empty() {
        cfg.finite_moduli = args.moduli;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.out_dir = args.out;
    for spec in &args.tol {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--tol expects NAME=VALUE, got {spec:?}"))?;
        let v: f64 = value
            .parse()
            .with_context(|| format!("invalid tolerance value in {spec:?}"))?;
        cfg.tolerances.insert(name.to_string(), v);
    }
    let format = parse_format(&args.format)?;
    Ok((cfg, format))
}

fn parse_format(s: &str) -> anyhow::Result<ReportFormat> {
    s.parse().map_err(|e: String| anyhow!(e))
}
