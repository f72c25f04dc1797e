//! `landau`: run, diagnose, verify and sweep the Landau-Coulomb solver.

mod diagnose;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use landau_core::io::{parse_config, write_trajectory};
use landau_core::{exponents, run, Error};

#[derive(Parser)]
#[command(
    name = "landau",
    version,
    about = "Velocity-space Landau-Coulomb solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from a TOML config and persist the trajectory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyse a stored trajectory; prints a JSON report and writes CSVs.
    Diagnose(diagnose::Args),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long = "L", default_value_t = 8.0)]
        extent: f64,
    },
    /// Run an amplitude × n × p grid of perturbed-Maxwellian runs.
    Sweep(sweep::Args),
    /// Print the exponent set for (p, m).
    Exponents {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        json: bool,
    },
}

/// Failure classes mapped to exit codes.
pub enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// A check did not pass: exit 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { .. } | Error::NegativeDensity { .. } | Error::NonFinite { .. } => {
                Failure::Check(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("failed: {msg}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out } => {
            let cfg = parse_config(&config)?;
            let started = manifest::now();
            let traj = run(&cfg)?;
            write_trajectory(&traj, &out)?;
            let m = manifest::RunManifest::new(&cfg, started, &out, &traj);
            m.write(&out)?;
            println!(
                "{}: {} steps to t = {}, {} snapshots",
                out.display(),
                traj.scalars.len().saturating_sub(1),
                traj.end_time(),
                traj.snapshots.len()
            );
            if let Some(a) = &traj.abort {
                return Err(Failure::Check(format!(
                    "run aborted at t = {} (step {}): {}",
                    a.time, a.step, a.reason
                )));
            }
            Ok(())
        }
        Command::Diagnose(args) => diagnose::execute(&args),
        Command::Verify { n, extent } => {
            let checks = landau_core::verify::run_suite(n, extent)?;
            let mut failed = 0;
            for c in &checks {
                println!(
                    "{:4} {:<40} {:.3e} (tol {:.1e})",
                    if c.passed { "ok" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Failure::Check(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
            Ok(())
        }
        Command::Sweep(args) => sweep::execute(&args),
        Command::Exponents { p, m, json } => {
            let e = exponents(p, m)?;
            let rows = [
                ("p", e.p),
                ("m", e.m),
                ("gamma", e.gamma),
                ("beta0", e.beta0),
                ("beta1", e.beta1),
                ("beta2", e.beta2),
                ("alpha", e.alpha),
                ("q", e.q),
                ("gamma_threshold", e.gamma_threshold),
                ("m_threshold", e.m_threshold),
            ];
            if json {
                let mut obj = serde_json::Map::new();
                for (k, v) in rows {
                    obj.insert(k.into(), v.into());
                }
                obj.insert("degenerate".into(), e.degenerate.into());
                println!("{}", serde_json::Value::Object(obj));
            } else {
                for (k, v) in rows {
                    println!("{k:<16} {v:.6}");
                }
                println!("{:<16} {}", "degenerate", e.degenerate);
            }
            Ok(())
        }
    }
}
