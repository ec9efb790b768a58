use super::config::ExperimentConfig;
use super::dichotomy::verdict;
use crate::error::{Result, ShcError};
use crate::estimators::{layer_triplet, Estimate};
use crate::geometry::DomainKind;
use crate::rng::derive_seed_indexed;
use crate::scale_kernel::{classify_variation, Variation};
use crate::Outcome;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceRow {
    pub t: f64,
    pub sup: f64,
    pub sup_se: f64,
    /// (ratio, band) for the inner ball, the half-space and the outer complement
    pub inner: (f64, f64),
    pub half: (f64, f64),
    pub outer: (f64, f64),
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfspaceReport {
    pub config_hash: String,
    pub model: String,
    pub seed: u64,
    pub radius: f64,
    pub a: f64,
    pub rows: Vec<HalfspaceRow>,
    pub tolerance: f64,
    pub ordering_holds: bool,
    pub outcome: Outcome,
}

fn ratio(num: &Estimate, den: &Estimate) -> (f64, f64) {
    num.ratio(den)
}

pub fn run_halfspace_suite(cfg: &ExperimentConfig) -> Result<HalfspaceReport> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let domain = cfg.build_domain()?;
    let DomainKind::Ball { radius, .. } = domain.kind() else {
        return Err(ShcError::Precondition("the half-space suite needs a ball domain".into()));
    };
    let class = classify_variation(&model, cfg.declared_class)?;
    if class.kind != Variation::UnboundedVariation {
        return Err(ShcError::Precondition(format!("{} has bounded variation", model.label())));
    }
    let mut rows = Vec::new();
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let s = cfg.sim_settings(i, derive_seed_indexed(cfg.seed, "halfspace", i as u64));
        let tr = layer_triplet(&model, *radius, cfg.layer_a, t, cfg.b, cfg.n_paths, &s)?;
        let ordered = tr.inner_minus_half.value >= -2.0 * tr.inner_minus_half.stderr
            && tr.half_minus_outer.value >= -2.0 * tr.half_minus_outer.stderr;
        rows.push(HalfspaceRow {
            t,
            sup: tr.sup.value,
            sup_se: tr.sup.stderr,
            inner: ratio(&tr.inner, &tr.sup),
            half: ratio(&tr.half, &tr.sup),
            outer: ratio(&tr.outer, &tr.sup),
            ordered,
        });
    }
    let tolerance = cfg.tolerance();
    let last = rows.last().expect("t_grid is non-empty");
    let ordering_holds = rows.iter().all(|r| r.ordered);
    let outcome = [last.inner, last.half, last.outer]
        .iter()
        .map(|(v, b)| verdict(*v, *b, tolerance))
        .fold(if ordering_holds { Outcome::Pass } else { Outcome::Fail }, Outcome::and);
    Ok(HalfspaceReport {
        config_hash: cfg.hash(),
        model: model.label().to_string(),
        seed: cfg.seed,
        radius: *radius,
        a: cfg.layer_a,
        rows,
        tolerance,
        ordering_holds,
        outcome,
    })
}
