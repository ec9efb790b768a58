use super::config::ExperimentConfig;
use crate::error::{Result, ShcError};
use crate::estimators::sup_functional;
use crate::rng::derive_seed_indexed;
use crate::scale_kernel::{classify_variation, Variation};
use crate::Outcome;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegligibilityRow {
    pub t: f64,
    pub sup: f64,
    pub sup_se: f64,
    /// t / E[sup ∧ b]
    pub ratio: f64,
    pub ratio_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegligibilityReport {
    pub config_hash: String,
    pub model: String,
    pub seed: u64,
    pub rows: Vec<NegligibilityRow>,
    /// each ratio below its predecessor up to 2 combined stderr
    pub decreasing: bool,
    /// last ratio below factor × first ratio
    pub decayed: bool,
    pub factor: f64,
    pub outcome: Outcome,
}

pub fn run_t_negligibility(cfg: &ExperimentConfig) -> Result<NegligibilityReport> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let class = classify_variation(&model, cfg.declared_class)?;
    if class.kind != Variation::UnboundedVariation {
        return Err(ShcError::Precondition(format!(
            "{} has bounded variation; t is not negligible against E[sup ∧ b]",
            model.label()
        )));
    }
    let mut nu = vec![0.0; model.dim()];
    nu[0] = 1.0;
    let mut rows = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let s = cfg.sim_settings(i, derive_seed_indexed(cfg.seed, "negligibility", i as u64));
        let e = sup_functional(&model, &nu, t, cfg.b, cfg.n_paths, &s)?;
        let ratio = t / e.value;
        rows.push(NegligibilityRow { t, sup: e.value, sup_se: e.stderr, ratio, ratio_se: ratio * e.stderr / e.value });
    }
    let decreasing = rows.windows(2).all(|w| w[1].ratio < w[0].ratio + 2.0 * w[0].ratio_se.hypot(w[1].ratio_se));
    let first = rows.first().map_or(f64::NAN, |r| r.ratio);
    let last = rows.last().map_or(f64::NAN, |r| r.ratio);
    let decayed = rows.len() >= 2 && last < cfg.negligibility_factor * first;
    let outcome = if decreasing && decayed { Outcome::Pass } else { Outcome::Fail };
    Ok(NegligibilityReport {
        config_hash: cfg.hash(),
        model: model.label().to_string(),
        seed: cfg.seed,
        rows,
        decreasing,
        decayed,
        factor: cfg.negligibility_factor,
        outcome,
    })
}
