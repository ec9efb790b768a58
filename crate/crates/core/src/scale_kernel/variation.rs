use super::profile::ScalingProfile;
use crate::error::{Result, ShcError};
use crate::levy_models::LevyModel;
use crate::quadrature::gl16;
use crate::stats::linear_fit;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variation {
    UnboundedVariation,
    BoundedVariation,
}

impl fmt::Display for Variation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variation::UnboundedVariation => f.write_str("unbounded-variation"),
            Variation::BoundedVariation => f.write_str("bounded-variation"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Numerical evidence about ∫_0^{R0} dr/ψ(r).
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceDiagnostic {
    /// (ε, I(ε)) with I(ε) = ∫_ε^{R0} dr/ψ(r), ε = R0·2^{-k}
    pub levels: Vec<(f64, f64)>,
    /// I settled to relative 1e-3 over the last 8 dyadic levels
    pub cauchy_settled: bool,
    /// per-level increment ratio from a geometric fit
    pub geometric_rate: f64,
    /// increment exponent p from a fit Δ_k ~ k^p
    pub power_exponent: f64,
    /// which fit described the increments better
    pub model: &'static str,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationClass {
    pub kind: Variation,
    pub evidence: Option<DivergenceDiagnostic>,
    pub diffusion: bool,
}

const LEVELS: usize = 60;
const FIT_FROM: usize = 20;

pub fn diagnose_divergence(profile: &ScalingProfile) -> Result<DivergenceDiagnostic> {
    let r0 = profile.r0;
    let mut levels = Vec::with_capacity(LEVELS);
    let mut inc = Vec::with_capacity(LEVELS);
    let mut total = 0.0;
    for k in 0..LEVELS {
        let hi = r0 * 0.5f64.powi(k as i32);
        let lo = 0.5 * hi;
        let d = gl16().integrate(|r| 1.0 / profile.eval_fast(r), lo, hi);
        if !(d.is_finite() && d > 0.0) {
            return Err(ShcError::Numeric { what: "divergence diagnostic".into(), diagnostics: format!("increment {d} at level {k}") });
        }
        total += d;
        inc.push(d);
        levels.push((lo, total));
    }
    let last = total;
    let back = levels[LEVELS - 9].1;
    let cauchy_settled = (last - back).abs() <= 1e-3 * last.abs();

    let ks: Vec<f64> = (FIT_FROM..LEVELS).map(|k| k as f64).collect();
    let lks: Vec<f64> = ks.iter().map(|k| (k + 1.0).ln()).collect();
    let ly: Vec<f64> = inc[FIT_FROM..].iter().map(|d| d.ln()).collect();
    let w = vec![1.0; ly.len()];
    let geo = linear_fit(&ks, &ly, &w).expect("distinct abscissae");
    let pow = linear_fit(&lks, &ly, &w).expect("distinct abscissae");
    let rate = geo.slope.exp();
    let p = pow.slope;
    let (model, verdict) = if geo.rss <= pow.rss {
        let v = if rate >= 0.999 {
            Verdict::Divergent
        } else if rate <= 0.995 {
            Verdict::Convergent
        } else {
            Verdict::Inconclusive
        };
        ("geometric", v)
    } else {
        let v = if p > -0.95 {
            Verdict::Divergent
        } else if p < -1.05 {
            Verdict::Convergent
        } else {
            Verdict::Inconclusive
        };
        ("power", v)
    };
    Ok(DivergenceDiagnostic { levels, cauchy_settled, geometric_rate: rate, power_exponent: p, model, verdict })
}

pub fn classify_variation(model: &LevyModel, declared: Option<Variation>) -> Result<VariationClass> {
    let diffusion = model.diffusion().is_some();
    let evidence = model.profile().map(diagnose_divergence).transpose()?;
    let diagnosed = if diffusion {
        Some(Variation::UnboundedVariation)
    } else {
        match evidence.as_ref().map(|e| e.verdict) {
            Some(Verdict::Divergent) => Some(Variation::UnboundedVariation),
            Some(Verdict::Convergent) => Some(Variation::BoundedVariation),
            _ => None,
        }
    };
    let kind = match (diagnosed, declared) {
        (Some(a), Some(b)) if a != b => {
            return Err(ShcError::ClassificationConflict { declared: b.to_string(), diagnosed: a.to_string() })
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            let e = evidence.as_ref();
            return Err(ShcError::IndeterminateClassification(format!(
                "increment fit {} with rate {:.5} / exponent {:.3}; declare the class explicitly",
                e.map_or("n/a", |e| e.model),
                e.map_or(f64::NAN, |e| e.geometric_rate),
                e.map_or(f64::NAN, |e| e.power_exponent)
            )));
        }
    };
    Ok(VariationClass { kind, evidence, diffusion })
}
