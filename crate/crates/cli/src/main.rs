//! Command-line entry point: verify scenarios, decompose sectors, integrate
//! gradient lines and sample ensembles.

use affine_gauge::evolution::density::{estimate_density_momentum, estimate_density_position, write_members_csv, write_summary_json, DensityKind};
use affine_gauge::evolution::integrate_gradient_line;
use affine_gauge::sectors::{decompose_strong, decompose_unified, decompose_weak_em, Sector};
use affine_gauge::{Error, Point, Result};
use affine_gauge_cli::scenario::{load_scenario, Scenario};
use affine_gauge_cli::{run_checks, RunOptions};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "affine-gauge", version, about = "Verify affine-gauge scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Representation {
    Position,
    Momentum,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario's checks and report pass/fail per check.
    Verify {
        scenario: PathBuf,
        /// Glob over check ids.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Overrides the sampling and ensemble seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallel: bool,
        /// Write the report here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print named potentials, field strengths and charges of the scenario's sector.
    Decompose {
        scenario: PathBuf,
        /// Comma-separated coordinates; defaults to the first sample point.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        point: Option<Vec<f64>>,
        /// Charge field used by the unified sector.
        #[arg(long)]
        charge: Option<String>,
    },
    /// Integrate the unit gradient line of a charge and print it as JSON.
    Evolve {
        scenario: PathBuf,
        #[arg(long)]
        charge: String,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Estimate an evolution density from an ensemble and write per-member records.
    Sample {
        scenario: PathBuf,
        #[arg(long)]
        ensemble: String,
        #[arg(long)]
        charge: String,
        #[arg(long, value_enum, default_value = "position")]
        representation: Representation,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        start: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory receiving members.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(Error),
    Runtime(Error),
}

fn load(path: &Path, seed: Option<u64>) -> std::result::Result<Scenario, Failure> {
    let mut sc = load_scenario(path).map_err(Failure::Input)?;
    if let Some(s) = seed {
        sc.sampling.seed = s;
        for e in sc.ensembles.values_mut() {
            e.seed = s;
        }
    }
    Ok(sc)
}

fn point(sc: &Scenario, p: Option<Vec<f64>>) -> std::result::Result<Vec<f64>, Failure> {
    let p = p.unwrap_or_else(|| sc.points()[0].coords.clone());
    if p.len() != sc.dim() {
        return Err(Failure::Input(Error::Dimension { expected: sc.dim(), got: p.len() }));
    }
    Ok(p)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<S: serde::Serialize>(v: &S) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::Io(e.to_string()))
}

fn run(cli: Cli) -> std::result::Result<bool, Failure> {
    match cli.command {
        Command::Verify { scenario, filter, format, seed, parallel, output } => {
            let sc = load(&scenario, seed)?;
            let filter = filter
                .map(|f| glob::Pattern::new(&f).map_err(|e| Failure::Input(Error::Config(format!("bad filter: {e}")))))
                .transpose()?;
            let opts = RunOptions { filter, parallel, tolerance: None }.with_env().map_err(Failure::Input)?;
            let report = run_checks(&sc, &opts);
            let text = match format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            emit(&text, output.as_deref()).map_err(Failure::Runtime)?;
            Ok(!report.any_failed())
        }
        Command::Decompose { scenario, point: p, charge } => {
            let sc = load(&scenario, None)?;
            let x = Point { coords: point(&sc, p)? };
            let bg = sc.background().map_err(Failure::Input)?;
            let setup = sc.sector.as_ref().ok_or_else(|| Failure::Input(Error::Config("scenario declares no sector".into())))?;
            let rho = charge.as_deref().map(|c| sc.charge(c).map(|c| &c.field)).transpose().map_err(Failure::Input)?;
            let dec = match setup.sector {
                Sector::WeakEm => decompose_weak_em(&bg.conn, &bg.metric, &x),
                Sector::Strong => decompose_strong(&bg.conn, &bg.metric, &x, &setup.rst),
                Sector::Unified => decompose_unified(&bg.conn, &bg.metric, rho, &setup.mixing, &setup.rst, &x),
            }
            .map_err(Failure::Runtime)?;
            emit(&json(&dec).map_err(Failure::Runtime)?, None).map_err(Failure::Runtime)?;
            Ok(true)
        }
        Command::Evolve { scenario, charge, start, step, steps } => {
            let sc = load(&scenario, None)?;
            let a = point(&sc, start)?;
            let bg = sc.background().map_err(Failure::Input)?;
            let c = sc.charge(&charge).map_err(Failure::Input)?;
            let line = integrate_gradient_line(c, &bg, &a, step, steps).map_err(Failure::Runtime)?;
            emit(&json(&line).map_err(Failure::Runtime)?, None).map_err(Failure::Runtime)?;
            Ok(line.truncated.is_none())
        }
        Command::Sample { scenario, ensemble, charge, representation, start, t, step, seed, out } => {
            let sc = load(&scenario, seed)?;
            let a = point(&sc, start)?;
            let bg = sc.background().map_err(Failure::Input)?;
            let c = sc.charge(&charge).map_err(Failure::Input)?;
            let spec = sc.ensemble(&ensemble).map_err(Failure::Input)?;
            let est = match representation {
                Representation::Position => estimate_density_position(c, &bg, spec, &a, t, step),
                Representation::Momentum => estimate_density_momentum(c, &bg, spec, &a, t, step),
            }
            .map_err(Failure::Runtime)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(e.into()))?;
            write_members_csv(&out.join("members.csv"), &est.members).map_err(Failure::Runtime)?;
            write_summary_json(&out.join("summary.json"), &est).map_err(Failure::Runtime)?;
            let kind = match representation {
                Representation::Position => DensityKind::Position,
                Representation::Momentum => DensityKind::Momentum,
            };
            let summary = serde_json::json!({ "representation": kind, "estimate": est.estimate, "stderr": est.stderr, "accepted": est.accepted, "sample_count": est.sample_count });
            emit(&json(&summary).map_err(Failure::Runtime)?, None).map_err(Failure::Runtime)?;
            Ok(est.estimate.is_some())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
