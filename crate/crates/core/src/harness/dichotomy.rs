use super::config::ExperimentConfig;
use crate::error::{Result, ShcError};
use crate::estimators::{heat_content_deficit, perimeter, sup_functional, DeficitStrategy, Estimate, PerimeterReport};
use crate::geometry::{surface_quadrature, Domain, DomainKind};
use crate::levy_models::LevyModel;
use crate::rng::derive_seed_indexed;
use crate::scale_kernel::{classify_variation, Variation, VariationClass};
use crate::stats::linear_fit;
use crate::Outcome;
use serde::Serialize;

/// Cap on the per-t budget growth from the ⌈4/deficit⌉ rule.
const MAX_BUDGET_FACTOR: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// denominator ∫_{∂D} E[sup X^{ν(y)}_t ∧ b] S(dy)
    SupFunctional,
    /// denominator t·Per_X(D)
    Perimeter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyRow {
    pub t: f64,
    pub n_paths: u64,
    pub steps: usize,
    pub deficit: f64,
    pub deficit_se: f64,
    pub interior_bias: Option<(f64, f64)>,
    pub denom: f64,
    pub denom_se: f64,
    pub ratio: f64,
    pub ratio_band: f64,
}

impl DichotomyRow {
    pub fn ratio_lo(&self) -> f64 {
        self.ratio - self.ratio_band
    }

    pub fn ratio_hi(&self) -> f64 {
        self.ratio + self.ratio_band
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub band: f64,
    /// "power-fit" or "last-point"
    pub method: String,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub config_hash: String,
    pub model: String,
    pub seed: u64,
    pub variation: VariationClass,
    pub branch: Branch,
    pub strategy: DeficitStrategy,
    /// rows ordered by t descending
    pub rows: Vec<DichotomyRow>,
    pub perimeter: Option<Estimate>,
    /// denominator integrated over the surface with one projection per node
    pub anisotropic_denominator: bool,
    pub extrapolated: Extrapolation,
    pub tolerance: f64,
    pub outcome: Outcome,
}

impl DichotomyReport {
    pub fn csv(&self) -> String {
        let mut s = String::from("t,deficit,deficit_se,denom,denom_se,ratio,ratio_lo,ratio_hi\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:.6},{:.6},{:.6}\n",
                r.t,
                r.deficit,
                r.deficit_se,
                r.denom,
                r.denom_se,
                r.ratio,
                r.ratio_lo(),
                r.ratio_hi()
            ));
        }
        s
    }
}

pub(crate) fn default_strategy(class: Variation, domain: &Domain) -> DeficitStrategy {
    let a = 0.25 * domain.r_ball();
    match class {
        Variation::UnboundedVariation => DeficitStrategy::BoundaryLayer { a },
        Variation::BoundedVariation => DeficitStrategy::Stratified { a },
    }
}

/// ∫_{∂D} E[sup X^{ν(y)}_t ∧ b] S(dy).
fn sup_denominator(
    model: &LevyModel,
    domain: &Domain,
    cfg: &ExperimentConfig,
    t: f64,
    i: usize,
    seed: u64,
) -> Result<(Estimate, bool)> {
    let d = domain.dim();
    let settings = cfg.sim_settings(i, seed);
    if model.is_isotropic() {
        let area = match domain.kind() {
            DomainKind::Ball { radius, .. } => crate::levy_models::omega(d) * radius.powi(d as i32 - 1),
            _ => surface_quadrature(domain, 1 << 14)?.total(),
        };
        let mut nu = vec![0.0; d];
        nu[0] = 1.0;
        let e = sup_functional(model, &nu, t, cfg.b, cfg.n_paths, &settings)?;
        return Ok((Estimate { value: area * e.value, stderr: area * e.stderr, ..e }, false));
    }
    let quad = surface_quadrature(domain, cfg.surface_nodes)?;
    let per_node = (cfg.n_paths / quad.len() as u64).max(100);
    let mut value = 0.0;
    let mut var = 0.0;
    let mut n = 0;
    for (k, (nu, w)) in quad.normals.iter().zip(&quad.weights).enumerate() {
        let s = settings.seed(derive_seed_indexed(seed, "node", k as u64));
        let e = sup_functional(model, nu, t, cfg.b, per_node, &s)?;
        value += w * e.value;
        var += (w * e.stderr).powi(2);
        n += e.n_samples;
    }
    Ok((Estimate { value, stderr: var.sqrt(), n_samples: n, seed, wall_ms: 0 }, true))
}

/// Fit ratio ≈ L + c t^θ over the last three points, θ scanned in [0.1, 1].
/// Falls back to the last point when the fit is not better determined.
pub fn extrapolate(rows: &[DichotomyRow], tolerance: f64) -> Extrapolation {
    let last = rows.last().expect("at least one row");
    let fallback = Extrapolation { value: last.ratio, band: last.ratio_band, method: "last-point".into(), theta: None };
    if rows.len() < 3 {
        return fallback;
    }
    let tail = &rows[rows.len() - 3..];
    let y: Vec<f64> = tail.iter().map(|r| r.ratio).collect();
    let w: Vec<f64> = tail.iter().map(|r| 1.0 / r.ratio_band.max(1e-12).powi(2)).collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for k in 0..=90 {
        let theta = 0.1 + 0.01 * k as f64;
        let x: Vec<f64> = tail.iter().map(|r| r.t.powf(theta)).collect();
        let Some(fit) = linear_fit(&x, &y, &w) else { continue };
        let band = fit
            .intercept_weights
            .iter()
            .zip(tail)
            .map(|(c, r)| (c * r.ratio_band).powi(2))
            .sum::<f64>()
            .sqrt();
        if best.is_none_or(|b| fit.rss < b.2) {
            best = Some((fit.intercept, band, fit.rss, theta));
        }
    }
    match best {
        Some((value, band, _, theta)) if value.is_finite() && band <= 0.5 * tolerance && band <= 3.0 * last.ratio_band => {
            Extrapolation { value, band, method: "power-fit".into(), theta: Some(theta) }
        }
        _ => fallback,
    }
}

pub fn verdict(value: f64, band: f64, tolerance: f64) -> Outcome {
    if (value - 1.0).abs() <= tolerance {
        Outcome::Pass
    } else if band > tolerance {
        Outcome::Inconclusive
    } else {
        Outcome::Fail
    }
}

pub fn run_dichotomy(cfg: &ExperimentConfig) -> Result<DichotomyReport> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let domain = cfg.build_domain()?;
    if !domain.is_bounded() {
        return Err(ShcError::UnboundedDomain);
    }
    let variation = classify_variation(&model, cfg.declared_class)?;
    let strategy = cfg.strategy.unwrap_or_else(|| default_strategy(variation.kind, &domain));
    let branch = match variation.kind {
        Variation::UnboundedVariation => Branch::SupFunctional,
        Variation::BoundedVariation => Branch::Perimeter,
    };
    let per: Option<PerimeterReport> = match branch {
        Branch::Perimeter => {
            let mut budget = cfg.perimeter.clone();
            budget.seed = derive_seed_indexed(cfg.seed, "perimeter", 0);
            Some(perimeter(&model, &domain, cfg.perimeter_method, &budget)?)
        }
        Branch::SupFunctional => None,
    };
    let mut rows = Vec::with_capacity(cfg.t_grid.len());
    let mut anisotropic = false;
    for (i, &t) in cfg.t_grid.iter().enumerate() {
        let seed = derive_seed_indexed(cfg.seed, "t", i as u64);
        let denom = match &per {
            Some(p) => Estimate { value: t * p.estimate.value, stderr: t * p.estimate.stderr, ..p.estimate },
            None => {
                let (e, aniso) = sup_denominator(&model, &domain, cfg, t, i, derive_seed_indexed(seed, "denominator", 0))?;
                anisotropic |= aniso;
                e
            }
        };
        // the denominator is the leading-order deficit, used as the pilot
        let pilot = (4.0 / denom.value.max(1e-300)).ceil();
        let n = (cfg.n_paths as f64).max(pilot).min((cfg.n_paths * MAX_BUDGET_FACTOR) as f64) as u64;
        let settings = cfg.sim_settings(i, derive_seed_indexed(seed, "deficit", 0));
        let started = std::time::Instant::now();
        let def = heat_content_deficit(&model, &domain, t, n, strategy, &settings)?;
        log::info!("t = {t:e}: deficit in {} ms", started.elapsed().as_millis());
        let (ratio, ratio_band) = def.estimate.ratio(&denom);
        rows.push(DichotomyRow {
            t,
            n_paths: n,
            steps: settings.steps,
            deficit: def.estimate.value,
            deficit_se: def.estimate.stderr,
            interior_bias: def.interior_bias,
            denom: denom.value,
            denom_se: denom.stderr,
            ratio,
            ratio_band,
        });
    }
    let tolerance = cfg.tolerance();
    let extrapolated = extrapolate(&rows, tolerance);
    let outcome = verdict(extrapolated.value, extrapolated.band, tolerance);
    Ok(DichotomyReport {
        config_hash: cfg.hash(),
        model: model.label().to_string(),
        seed: cfg.seed,
        variation,
        branch,
        strategy,
        rows,
        perimeter: per.map(|p| Estimate { wall_ms: 0, ..p.estimate }),
        anisotropic_denominator: anisotropic,
        extrapolated,
        tolerance,
        outcome,
    })
}
