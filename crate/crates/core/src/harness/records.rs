use super::config::ExperimentConfig;
use crate::error::{Result, ShcError};
use crate::estimators::{exit_probability_ball, perimeter, sup_functional, Estimate, PerimeterReport};
use crate::geometry::DomainKind;
use crate::rng::derive_seed_indexed;
use serde::Serialize;

/// Flat record for a single estimator call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub estimator: String,
    pub t: Option<f64>,
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub config_hash: String,
    pub wall_ms: u64,
}

impl EstimateRecord {
    fn new(cfg: &ExperimentConfig, estimator: &str, t: Option<f64>, e: &Estimate) -> Self {
        Self {
            estimator: estimator.into(),
            t,
            value: e.value,
            stderr: e.stderr,
            n: e.n_samples,
            seed: e.seed,
            config_hash: cfg.hash(),
            wall_ms: e.wall_ms,
        }
    }
}

pub fn records_csv(records: &[EstimateRecord]) -> String {
    let mut s = String::from("estimator,t,value,stderr,n,seed\n");
    for r in records {
        let t = r.t.map_or(String::new(), |t| format!("{t:e}"));
        s.push_str(&format!("{},{t},{:e},{:e},{},{}\n", r.estimator, r.value, r.stderr, r.n, r.seed));
    }
    s
}

/// E[sup X^ν_t ∧ b] along ν = e1 for every t in the grid.
pub fn run_supfun(cfg: &ExperimentConfig) -> Result<Vec<EstimateRecord>> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let mut nu = vec![0.0; model.dim()];
    nu[0] = 1.0;
    cfg.t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = cfg.sim_settings(i, derive_seed_indexed(cfg.seed, "supfun", i as u64));
            Ok(EstimateRecord::new(cfg, "sup-functional", Some(t), &sup_functional(&model, &nu, t, cfg.b, cfg.n_paths, &s)?))
        })
        .collect()
}

/// P(τ_{B(0,r)} ≤ t) for every t; r defaults to the radius of a ball domain.
pub fn run_exitprob(cfg: &ExperimentConfig, r: Option<f64>) -> Result<Vec<EstimateRecord>> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let r = match (r, cfg.build_domain()?.kind()) {
        (Some(r), _) => r,
        (None, DomainKind::Ball { radius, .. }) => *radius,
        _ => return Err(ShcError::Config("exit probability needs a radius or a ball domain".into())),
    };
    cfg.t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = cfg.sim_settings(i, derive_seed_indexed(cfg.seed, "exitprob", i as u64));
            Ok(EstimateRecord::new(cfg, "exit-probability", Some(t), &exit_probability_ball(&model, r, t, cfg.n_paths, &s)?))
        })
        .collect()
}

pub fn run_perimeter(cfg: &ExperimentConfig) -> Result<(EstimateRecord, PerimeterReport)> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let domain = cfg.build_domain()?;
    let mut budget = cfg.perimeter.clone();
    budget.seed = derive_seed_indexed(cfg.seed, "perimeter", 0);
    let rep = perimeter(&model, &domain, cfg.perimeter_method, &budget)?;
    Ok((EstimateRecord::new(cfg, "perimeter", None, &rep.estimate), rep))
}
