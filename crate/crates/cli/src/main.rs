use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracinv_core::experiment::{
    gradient_check, run_experiment, run_forward, AlphaRule, ExperimentConfig, RunArtifacts,
};
use fracinv_core::{fcd_weights, Error};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;
const EXIT_OTHER: u8 = 1;

/// Fractional Schrödinger exterior-value solver and (q, g) reconstruction.
#[derive(Debug, Parser)]
#[command(name = "fracinv", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment configuration (defaults to the ex1 setup).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSV and SVG artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Cells across Ω on the inversion grid.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Data grid refinement factor.
    #[arg(long, global = true)]
    refine: Option<usize>,
    /// Regularization parameter: a number or `auto` (α = δ²).
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// Discrepancy factor: stop once E ≤ tau·δ².
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Iteration cap.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve both forward problems for the configured truth.
    Forward,
    /// Synthesize data and reconstruct (q, g) for every configured δ.
    Invert,
    /// Compare the adjoint gradient with central differences.
    Gradcheck {
        #[arg(long, default_value_t = 10)]
        directions: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Run one of the two reference experiments.
    Example {
        #[arg(long, value_parser = ["ex1", "ex2"])]
        name: String,
        /// Noise level; repeat for several (default: 1e-3 and 1e-2).
        #[arg(long = "delta")]
        deltas: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the fractional centered-difference weights w_0..w_k.
    Weights {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        k: usize,
    },
}

fn seed_from_env() -> Result<Option<u64>, Error> {
    match std::env::var("FRACINV_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("FRACINV_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl Common {
    fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), Error> {
        if let Some(n) = self.n {
            cfg.n_omega = n;
        }
        if let Some(r) = self.refine {
            cfg.refine_factor = r;
        }
        if let Some(a) = &self.alpha {
            cfg.alpha = AlphaRule::parse(a)?;
        }
        if let Some(t) = self.tau {
            cfg.tau = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(seed) = seed_from_env()? {
            cfg.seed = seed;
        }
        cfg.validate()
    }

    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path)?,
            None => ExperimentConfig::ex1(),
        };
        self.apply(&mut cfg)?;
        Ok(cfg)
    }
}

fn report(cfg: &ExperimentConfig, artifacts: &RunArtifacts) -> ExitCode {
    for s in &artifacts.summaries {
        println!(
            "{} delta={:e} alpha={:e} iterations={} termination={} E={:.6e} threshold={:.6e} err_q={:.6} err_g={:.6}",
            cfg.name,
            s.delta,
            s.alpha,
            s.iterations,
            s.termination,
            s.final_e,
            s.threshold,
            s.err_q,
            s.err_g
        );
    }
    for f in &artifacts.files {
        log::info!("wrote {}", f.display());
    }
    if artifacts.all_discrepancy() {
        ExitCode::SUCCESS
    } else {
        log::warn!("stopping rule not reached within max_iter = {}", cfg.max_iter);
        ExitCode::from(EXIT_NOT_CONVERGED)
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let common = &cli.common;
    match cli.command {
        Command::Forward => {
            let cfg = common.load()?;
            let artifacts = run_forward(&cfg, &common.out)?;
            for f in &artifacts.files {
                println!("{}", f.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Invert => {
            let cfg = common.load()?;
            let artifacts = run_experiment(&cfg, &common.out)?;
            Ok(report(&cfg, &artifacts))
        }
        Command::Gradcheck { directions, step } => {
            let cfg = common.load()?;
            let r = gradient_check(&cfg, directions, step)?;
            for (k, (adj, fd)) in r.pairs.iter().enumerate() {
                println!("direction {k}: adjoint={adj:.12e} fd={fd:.12e}");
            }
            println!("max relative error {:.3e}", r.max_rel_error);
            Ok(ExitCode::SUCCESS)
        }
        Command::Example { name, deltas, seed } => {
            let mut cfg = ExperimentConfig::preset(&name)?;
            if common.config.is_some() {
                log::warn!("--config is ignored by `example`");
            }
            common.apply(&mut cfg)?;
            if !deltas.is_empty() {
                cfg.deltas = deltas;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            cfg.validate()?;
            let artifacts = run_experiment(&cfg, &common.out)?;
            Ok(report(&cfg, &artifacts))
        }
        Command::Weights { s, k } => {
            let w = fcd_weights(s, k)?;
            println!("k,w_k");
            for (i, v) in w.iter().enumerate() {
                println!("{i},{v:.17e}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    if err.is_solver_failure() {
        return EXIT_SOLVER;
    }
    match err {
        Error::Config(_) | Error::InvalidArgument(_) | Error::Order(_) | Error::Grid(_) => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
