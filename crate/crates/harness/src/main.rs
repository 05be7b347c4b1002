use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adm_core::tune_parameters;
use adm_harness::{compare_experiment, run_checks, run_experiment, tune, CheckOptions, ExperimentConfig, Fault, SweepGrid};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

/// Distributed Nash equilibrium seeking experiments.
#[derive(Parser)]
#[command(name = "adm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured algorithms and write traces and summary.csv.
    Run {
        config: PathBuf,
        /// Overrides the seed in the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides output_dir (and the ADM_OUTPUT_DIR variable).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the tuned step size and derived constants.
    Tune {
        #[arg(long)]
        mu: f64,
        #[arg(long = "L", alias = "l")]
        l: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        /// Squared spectral norm of I − W.
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        safety: f64,
    },
    /// Run the randomized invariant suite.
    Check {
        /// Tuples per inequality; accepts forms like 1e6.
        #[arg(long, default_value = "1e4")]
        samples: String,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Sweep a log-spaced step-size grid for every configured algorithm.
    Compare {
        config: PathBuf,
        #[arg(long, default_value_t = 1e-2)]
        lo: f64,
        #[arg(long, default_value_t = 2.0)]
        hi: f64,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Take lo and hi as absolute step sizes instead of multiples of 1/L.
        #[arg(long)]
        absolute: bool,
        /// Also run the theorem-tuned ADM step.
        #[arg(long)]
        include_theorem: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load(path: &Path, seed: Option<u64>, output: Option<PathBuf>) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = output.unwrap_or_else(|| cfg.resolved_output_dir());
    Ok((cfg, dir))
}

fn parse_count(s: &str) -> Result<usize> {
    let v: f64 = s.parse().with_context(|| format!("--samples: `{s}` is not a number"))?;
    if !(v >= 1.0 && v.is_finite() && v.fract() == 0.0) {
        bail!("--samples must be a positive integer, got {s}");
    }
    Ok(v as usize)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, seed, output } => {
            let (cfg, dir) = load(&config, seed, output)?;
            let out = run_experiment(&cfg, &dir)?;
            for r in &out.results {
                let it = r.row.iterations_to_tol.map_or("not reached".to_string(), |k| k.to_string());
                println!("{:<16} alpha={:.6e} iterations={it} status={}", r.row.label, r.row.alpha, r.row.status);
            }
            println!("wrote {} files to {}", out.files.len(), dir.display());
            let bound_broken = out.results.iter().any(|r| r.row.bound_holds == Some(false));
            Ok(if bound_broken { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Tune { mu, l, n, sigma, q, safety } => {
            if l < mu {
                eprintln!("warning: L < mu gives condition number below 1, which is unusual; continuing");
            }
            if q.is_nan() || q < 0.0 {
                bail!("q must be nonnegative, got {q}");
            }
            let p = tune_parameters(mu, l, n, sigma, q.sqrt(), safety)?;
            print!("{}", tune::report(&p));
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { samples, seed, inject_fault } => {
            let report = run_checks(&CheckOptions { samples: parse_count(&samples)?, seed, fault: inject_fault });
            print!("{report}");
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Compare { config, lo, hi, steps, absolute, include_theorem, seed, output } => {
            let (cfg, dir) = load(&config, seed, output)?;
            let grid = SweepGrid { lo, hi, steps, relative: !absolute, include_theorem };
            let out = compare_experiment(&cfg, &grid, &dir)?;
            for (algorithm, i) in &out.best {
                let r = &out.rows[*i];
                println!("best {algorithm}: alpha={:.6e} iterations={}", r.alpha, r.iterations_to_tol.unwrap_or(0));
            }
            println!("wrote {}", dir.join("sweep.csv").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
