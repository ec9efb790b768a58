use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shc_core::harness::{
    records_csv, run_bound_audit, run_dichotomy, run_exitprob, run_halfspace_suite, run_perimeter, run_supfun,
    run_t_negligibility, to_json, write_outputs, ExperimentConfig,
};
use shc_core::{Outcome, Result};
use std::path::PathBuf;
use std::process::ExitCode;

/// Small-time spectral heat content experiments for symmetric Lévy processes.
#[derive(Parser)]
#[command(name = "shc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deficit over the t-grid against the branch denominator.
    Dichotomy(Common),
    /// E[sup of the first coordinate ∧ b] for every t.
    Supfun(Common),
    /// Perimeter of the domain with respect to the jump measure.
    Perimeter(Common),
    /// P(exit from B(0, r) before t) for every t.
    Exitprob {
        #[command(flatten)]
        common: Common,
        /// ball radius; defaults to the radius of a ball domain
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Fit-then-holdout audit of the exit and tail bounds.
    Audit(Common),
    /// Inner ball, half-space and outer ball layer integrals.
    Halfspace(Common),
    /// t / E[sup ∧ b] over the t-grid.
    Negligibility(Common),
}

#[derive(Args)]
struct Common {
    /// experiment config (TOML)
    #[arg(long, short)]
    config: PathBuf,
    /// override the master seed (SHC_SEED takes precedence)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_paths: Option<u64>,
    /// comma separated, strictly decreasing
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    /// report path stem; overrides `output` in the config
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(&self.config)?;
        let mut cfg = ExperimentConfig::from_toml(&text)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n_paths {
            cfg.n_paths = n;
        }
        if let Some(t) = &self.t {
            cfg.t_grid = t.clone();
        }
        if let Some(s) = &self.steps {
            cfg.steps = s.clone();
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit<T: Serialize>(cfg: &ExperimentConfig, report: &T, csv: Option<&str>) -> Result<()> {
    match &cfg.output {
        Some(stem) => {
            for p in write_outputs(stem, report, csv)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => println!("{}", to_json(report)?),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Dichotomy(c) => {
            let cfg = c.load()?;
            let rep = run_dichotomy(&cfg)?;
            emit(&cfg, &rep, Some(&rep.csv()))?;
            eprintln!(
                "ratio {:.4} ± {:.4} ({}), tolerance {:.2}: {:?}",
                rep.extrapolated.value, rep.extrapolated.band, rep.extrapolated.method, rep.tolerance, rep.outcome
            );
            Ok(rep.outcome)
        }
        Command::Supfun(c) => {
            let cfg = c.load()?;
            let recs = run_supfun(&cfg)?;
            emit(&cfg, &recs, Some(&records_csv(&recs)))?;
            Ok(Outcome::Pass)
        }
        Command::Exitprob { common, radius } => {
            let cfg = common.load()?;
            let recs = run_exitprob(&cfg, radius)?;
            emit(&cfg, &recs, Some(&records_csv(&recs)))?;
            Ok(Outcome::Pass)
        }
        Command::Perimeter(c) => {
            let cfg = c.load()?;
            let (rec, rep) = run_perimeter(&cfg)?;
            emit(&cfg, &serde_json::json!({ "record": rec, "report": rep }), Some(&records_csv(&[rec])))?;
            Ok(Outcome::Pass)
        }
        Command::Audit(c) => {
            let cfg = c.load()?;
            let rep = run_bound_audit(&cfg)?;
            emit(&cfg, &rep, None)?;
            for ch in &rep.checks {
                eprintln!("{:<24} {:?} ({}/{})", ch.name, ch.outcome, ch.satisfied, ch.holdout_cells);
            }
            Ok(rep.outcome)
        }
        Command::Halfspace(c) => {
            let cfg = c.load()?;
            let rep = run_halfspace_suite(&cfg)?;
            emit(&cfg, &rep, None)?;
            Ok(rep.outcome)
        }
        Command::Negligibility(c) => {
            let cfg = c.load()?;
            let rep = run_t_negligibility(&cfg)?;
            emit(&cfg, &rep, None)?;
            Ok(rep.outcome)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
