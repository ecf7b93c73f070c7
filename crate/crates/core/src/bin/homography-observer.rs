use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use homography_observer::consistency::{check_consistent, cross_validate, DEFAULT_EPS};
use homography_observer::sim::{run_scenario, write_csv, write_json, RunLog, Scenario};
use homography_observer::suite::{bench, run_property_suite};
use homography_observer::{Error, Integrator, ProjectivePoint};

#[derive(Parser)]
#[command(version, about = "Homography observer simulator and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and log every step as CSV (and optionally JSON).
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Test a direction set (JSON array of [x, y, z], or {"directions": [...]}).
    CheckConsistency {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
    },
    /// Run the built-in property checks.
    PropertySuite {
        #[arg(long)]
        quick: bool,
    },
    /// Time the observer step.
    Bench {
        #[arg(long, value_enum, default_value_t = IntegratorArg::ExpEuler)]
        integrator: IntegratorArg,
        #[arg(long, default_value_t = 20_000)]
        steps: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum IntegratorArg {
    ExpEuler,
    Rk4Renorm,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DirectionFile {
    Bare(Vec<[f64; 3]>),
    Wrapped { directions: Vec<[f64; 3]> },
}

fn exit_code(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn save(log: &RunLog, csv: &Path, json: Option<&Path>) -> Result<(), Error> {
    write_csv(log, BufWriter::new(File::create(csv)?))?;
    if let Some(path) = json {
        write_json(log, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

fn simulate(scenario: &Path, out: &Path, json: Option<&Path>, seed: Option<u64>) -> Result<ExitCode, Error> {
    let mut sc = Scenario::load(scenario)?;
    if let Some(seed) = seed {
        sc.seed = seed;
    }
    let report = sc.consistency();
    if !report.consistent {
        eprintln!("warning: reference features are not consistent");
    }
    match run_scenario(&sc) {
        Ok(log) => {
            save(&log, out, json)?;
            if let Some(last) = log.last() {
                println!(
                    "{} rows, t = {:.3}, L0 = {:.3e}, |E - I| = {:.3e}",
                    log.records.len(),
                    last.t,
                    last.l0,
                    last.err_e
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::Aborted { reason, log }) => {
            save(&log, out, json)?;
            eprintln!("aborted: {reason} ({} rows written)", log.records.len());
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e),
    }
}

fn check(input: &Path, eps: f64) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(input)?;
    let dirs = match serde_json::from_str::<DirectionFile>(&text).map_err(|e| Error::Config(e.to_string()))? {
        DirectionFile::Bare(d) | DirectionFile::Wrapped { directions: d } => d,
    };
    let dirs = dirs
        .iter()
        .map(|d| ProjectivePoint::from_xyz(d[0], d[1], d[2]))
        .collect::<Result<Vec<_>, _>>()?;
    let report = check_consistent(&dirs, eps);
    println!("{}", serde_json::to_string_pretty(&report)?);
    cross_validate(&dirs, eps)?;
    Ok(ExitCode::SUCCESS)
}

fn property_suite(quick: bool) -> ExitCode {
    let results = run_property_suite(quick);
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            scenario,
            out,
            json,
            seed,
        } => simulate(&scenario, &out, json.as_deref(), seed),
        Command::CheckConsistency { input, eps } => check(&input, eps),
        Command::PropertySuite { quick } => Ok(property_suite(quick)),
        Command::Bench { integrator, steps } => {
            let integrator = match integrator {
                IntegratorArg::ExpEuler => Integrator::ExpEuler,
                IntegratorArg::Rk4Renorm => Integrator::Rk4Renorm,
            };
            bench(integrator, steps).and_then(|r| {
                println!("{}", serde_json::to_string_pretty(&r)?);
                Ok(ExitCode::SUCCESS)
            })
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}
