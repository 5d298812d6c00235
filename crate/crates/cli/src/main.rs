//! `catsep` — run coupled cat-map complexity scenarios and self-checks.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use catsep::output::emit_outputs;
use catsep::{run_checks, run_scenario, BoundKind, CheckLevel, MapCase, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "catsep",
    version,
    about = "Quantum and classical separability entropies of two coupled perturbed cat maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its outputs.
    Run(RunArgs),
    /// Run the built-in verification suites.
    Check {
        /// `fast` checks structural invariants at small sizes; `full`
        /// adds the production-scale hh/he runs (several minutes).
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseArg {
    Hh,
    Ee,
    He,
    Eh,
}

impl CaseArg {
    fn to_case(self) -> MapCase {
        match self {
            Self::Hh => MapCase::HyperbolicHyperbolic,
            Self::Ee => MapCase::EllipticElliptic,
            Self::He => MapCase::HyperbolicElliptic,
            Self::Eh => MapCase::EllipticHyperbolic,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Args)]
struct RunArgs {
    /// Map pairing: hh, ee, he or eh.
    #[arg(long, value_enum)]
    case: CaseArg,

    /// Hilbert space dimension per degree of freedom (also the
    /// classical grid subdivision).
    #[arg(long, default_value_t = 64)]
    dim: usize,

    /// Kick strength of each map.
    #[arg(long, default_value_t = 0.25)]
    k: f64,

    /// Coupling strength between the maps.
    #[arg(long, default_value_t = 0.5)]
    kc: f64,

    /// Initial center of degree of freedom 1.
    #[arg(long, default_value_t = 0.5)]
    q1: f64,
    #[arg(long, default_value_t = 0.5)]
    p1: f64,

    /// Initial center of degree of freedom 2.
    #[arg(long, default_value_t = 0.5)]
    q2: f64,
    #[arg(long, default_value_t = 0.5)]
    p2: f64,

    /// Number of map steps.
    #[arg(long)]
    steps: usize,

    /// Evaluate the classical entropy every this many steps.
    #[arg(long, default_value_t = 1)]
    cse_stride: usize,

    /// Skip the classical entropy (and the classical evolution, unless
    /// snapshots require it).
    #[arg(long)]
    no_cse: bool,

    /// Sub-cell samples per axis in the classical backward iteration.
    #[arg(long, default_value_t = 2)]
    subsample: usize,

    /// Comma-separated times at which to write snapshot grids.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<usize>,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,

    /// Also render linear-grayscale heatmaps of each snapshot.
    #[arg(long)]
    png: bool,

    /// Single-threaded, bit-reproducible execution.
    #[arg(long)]
    serial: bool,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(err) => {
                eprintln!("error: {err:#}");
                ExitCode::FAILURE
            }
        },
        Command::Check { level } => {
            let level = match level {
                LevelArg::Fast => CheckLevel::Fast,
                LevelArg::Full => CheckLevel::Full,
            };
            match check(level) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::FAILURE,
                Err(err) => {
                    eprintln!("error: {err:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let mut config = ScenarioConfig::new(args.case.to_case(), args.steps);
    config.dim = args.dim;
    config.k = args.k;
    config.kc = args.kc;
    config.center1 = (args.q1, args.p1);
    config.center2 = (args.q2, args.p2);
    config.cse_stride = args.cse_stride;
    config.cse_enabled = !args.no_cse;
    config.subsample = args.subsample;
    config.snapshot_times = args.snapshots.clone();
    config.serial = args.serial;
    config.validate().context("invalid configuration")?;

    let started = Instant::now();
    let result = run_scenario(&config).context("scenario failed")?;
    let written = emit_outputs(&result, &config, &args.out, args.png)
        .with_context(|| format!("writing outputs to {}", args.out.display()))?;

    let last = result
        .series
        .rows
        .last()
        .expect("a run records at least t = 0");
    println!(
        "case {} dim {} steps {}: final wse_half = {:.6}{}",
        config.case.label(),
        config.dim,
        config.steps,
        last.wse_half,
        last.cse_half
            .map(|h| format!(", final cse_half = {h:.6}"))
            .unwrap_or_default(),
    );
    println!(
        "wrote {} files to {} in {:.1}s",
        written.len(),
        args.out.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn check(level: CheckLevel) -> anyhow::Result<bool> {
    let report = run_checks(level)?;
    for item in &report.items {
        let relation = match item.kind {
            BoundKind::AtMost => "<=",
            BoundKind::AtLeast => ">=",
        };
        println!(
            "[{}] {}: measured {:.6e} {} {:.6e}",
            if item.passed { "PASS" } else { "FAIL" },
            item.name,
            item.measured,
            relation,
            item.bound
        );
    }
    let passed = report.all_passed();
    println!(
        "{} of {} checks passed in {:.1}s",
        report.items.iter().filter(|i| i.passed).count(),
        report.items.len(),
        report.elapsed_seconds
    );
    Ok(passed)
}
