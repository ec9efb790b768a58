use super::kernels::{exit_unit, Monitor, MAX_SIM_DIM};
use super::{elapsed_ms, Estimate, SimSettings};
use crate::error::{arg, Result, ShcError};
use crate::geometry::{Domain, DomainKind, LayerSampler};
use crate::levy_models::{omega, BridgeCorrection, IncrementSampler, LevyModel};
use crate::rng::{derive_seed, unit_stream};
use crate::stats::{chunked, Acc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeficitStrategy {
    /// x uniform in D, one path each
    UniformDomain,
    /// x from the layer D∖D_a in coarea coordinates; the interior part is
    /// only bounded, and reported as a bias interval
    BoundaryLayer { a: f64 },
    /// layer as above plus an unbiased uniform-sampling estimate of D_a
    Stratified { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficitEstimate {
    pub estimate: Estimate,
    pub strategy: DeficitStrategy,
    /// [0, ĉ·t·|D_a|/φ(a)] for BoundaryLayer
    pub interior_bias: Option<(f64, f64)>,
    /// fitted ĉ of the bound P(τ_{B(0,a)} ≤ t) ≤ ĉ t/φ(a)
    pub survival_constant: Option<f64>,
    pub layer_part: Option<Estimate>,
    pub interior_part: Option<Estimate>,
}

fn check_sim(model: &LevyModel, domain: &Domain) -> Result<()> {
    if model.dim() != domain.dim() {
        return arg(format!("model dimension {} differs from domain dimension {}", model.dim(), domain.dim()));
    }
    if model.dim() > MAX_SIM_DIM {
        return arg(format!("path simulation supports d <= {MAX_SIM_DIM}"));
    }
    Ok(())
}

fn bridge_for(model: &LevyModel, settings: &SimSettings, t: f64) -> Option<BridgeCorrection> {
    BridgeCorrection::for_model(model, t / settings.steps as f64)
}

/// P_0(τ_{B(0,r)} ≤ t).
pub fn exit_probability_ball(model: &LevyModel, r: f64, t: f64, n_paths: u64, settings: &SimSettings) -> Result<Estimate> {
    if !(r > 0.0 && t > 0.0) {
        return arg(format!("need r > 0 and t > 0, got r = {r}, t = {t}"));
    }
    if model.dim() > MAX_SIM_DIM {
        return arg(format!("path simulation supports d <= {MAX_SIM_DIM}"));
    }
    if n_paths == 0 {
        return arg("need at least one path");
    }
    let start = std::time::Instant::now();
    let cutoff = settings.cutoff_for(model, t)?;
    let sampler = IncrementSampler::new(model, t / settings.steps as f64, cutoff)?;
    let mon = Monitor::new(model, settings);
    let bridge = bridge_for(model, settings, t);
    let task = derive_seed(settings.seed, "ball-exit");
    let units = settings.units(n_paths);
    let x0 = vec![0.0; model.dim()];
    let sd = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt() - r;
    let [acc] = chunked::<1, _>(units, |i, acc| {
        let mut rng = unit_stream(task, i);
        acc[0].push(exit_unit(&sampler, &x0, settings.steps, &mon, bridge, &sd, &mut rng));
    });
    Ok(Estimate {
        value: acc.mean,
        stderr: acc.stderr(),
        n_samples: settings.paths(units),
        seed: settings.seed,
        wall_ms: elapsed_ms(start),
    })
}

/// |D| − Q_D(t) = ∫_D P_x(τ_D ≤ t) dx.
pub fn heat_content_deficit(
    model: &LevyModel,
    domain: &Domain,
    t: f64,
    n_paths: u64,
    strategy: DeficitStrategy,
    settings: &SimSettings,
) -> Result<DeficitEstimate> {
    check_sim(model, domain)?;
    if !(t > 0.0) {
        return arg(format!("t must be positive, got {t}"));
    }
    if !domain.is_bounded() {
        return Err(ShcError::UnboundedDomain);
    }
    if n_paths < 2 {
        return arg("need at least two paths");
    }
    let start = std::time::Instant::now();
    let cutoff = settings.cutoff_for(model, t)?;
    let sampler = IncrementSampler::new(model, t / settings.steps as f64, cutoff)?;
    let mon = Monitor::new(model, settings);
    let bridge = bridge_for(model, settings, t);
    let vol = domain.volume()?;
    let steps = settings.steps;
    let d = domain.dim();
    let sd = |x: &[f64]| domain.signed_distance(x);

    let uniform = |units: u64, label: &str, skip_depth: f64| -> Acc {
        let task = derive_seed(settings.seed, label);
        let [acc] = chunked::<1, _>(units, |i, acc| {
            let mut rng = unit_stream(task, i);
            let mut x = [0.0; MAX_SIM_DIM];
            domain.sample_uniform(&mut rng, &mut x[..d]).expect("bounded domain admits uniform sampling");
            if -domain.signed_distance(&x[..d]) <= skip_depth {
                acc[0].push(0.0);
            } else {
                acc[0].push(exit_unit(&sampler, &x[..d], steps, &mon, bridge, &sd, &mut rng));
            }
        });
        acc
    };
    // graded depths only pay off when exits are driven by the Gaussian part
    let s0 = match model.diffusion() {
        Some(_) => model.scale_function().and_then(|sf| sf.inverse(t)).ok(),
        None => None,
    };
    let layer_part = |layer: &LayerSampler, units: u64| -> Acc {
        let task = derive_seed(settings.seed, "deficit-layer");
        let [acc] = chunked::<1, _>(units, |i, acc| {
            let mut rng = unit_stream(task, i);
            let ls = match s0 {
                Some(s0) => layer.sample_graded(&mut rng, s0),
                None => layer.sample(&mut rng),
            };
            let p = exit_unit(&sampler, &ls.x, steps, &mon, bridge, &sd, &mut rng);
            acc[0].push(ls.weight * ls.jacobian * p);
        });
        acc
    };
    let scaled = |acc: &Acc, c: f64, units: u64| Estimate {
        value: c * acc.mean,
        stderr: c * acc.stderr(),
        n_samples: settings.paths(units),
        seed: settings.seed,
        wall_ms: 0,
    };
    let units = settings.units(n_paths);
    let mut out = match strategy {
        DeficitStrategy::UniformDomain => {
            let acc = uniform(units, "deficit-uniform", f64::NEG_INFINITY);
            let mut e = scaled(&acc, vol.value, units);
            e.stderr = (e.stderr.powi(2) + (acc.mean * vol.stderr).powi(2)).sqrt();
            DeficitEstimate {
                estimate: e,
                strategy,
                interior_bias: None,
                survival_constant: None,
                layer_part: None,
                interior_part: None,
            }
        }
        DeficitStrategy::BoundaryLayer { a } => {
            let layer = LayerSampler::new(domain, a, 4096)?;
            let acc = layer_part(&layer, units);
            let e = scaled(&acc, 1.0, units);
            let (bias, c_hat) = interior_bias(model, domain, a, t, n_paths, settings)?;
            DeficitEstimate {
                estimate: e,
                strategy,
                interior_bias: Some(bias),
                survival_constant: c_hat,
                layer_part: Some(e),
                interior_part: None,
            }
        }
        DeficitStrategy::Stratified { a } => {
            let layer = LayerSampler::new(domain, a, 4096)?;
            let n_layer = units.div_ceil(2);
            let n_int = (units - n_layer).max(1);
            let la = layer_part(&layer, n_layer);
            let ia = uniform(n_int, "deficit-interior", a);
            let le = scaled(&la, 1.0, n_layer);
            let mut ie = scaled(&ia, vol.value, n_int);
            ie.stderr = (ie.stderr.powi(2) + (ia.mean * vol.stderr).powi(2)).sqrt();
            DeficitEstimate {
                estimate: Estimate {
                    value: le.value + ie.value,
                    stderr: le.stderr.hypot(ie.stderr),
                    n_samples: le.n_samples + ie.n_samples,
                    seed: settings.seed,
                    wall_ms: 0,
                },
                strategy,
                interior_bias: None,
                survival_constant: None,
                layer_part: Some(le),
                interior_part: Some(ie),
            }
        }
    };
    out.estimate.wall_ms = elapsed_ms(start);
    Ok(out)
}

/// Upper bound for ∫_{D_a} P_x(τ_D ≤ t) dx via P_x(τ_D ≤ t) ≤ P_0(τ_{B(0,a)} ≤ t),
/// with the latter bounded by its estimate plus three standard errors
/// (rule of three when no exit is seen).
fn interior_bias(
    model: &LevyModel,
    domain: &Domain,
    a: f64,
    t: f64,
    n_paths: u64,
    settings: &SimSettings,
) -> Result<((f64, f64), Option<f64>)> {
    let n = (n_paths / 10).clamp(1000, 20_000);
    let s = SimSettings { seed: derive_seed(settings.seed, "interior-bias"), ..*settings };
    let p = exit_probability_ball(model, a, t, n, &s)?;
    let upper = if p.value > 0.0 { p.value + 3.0 * p.stderr } else { 3.0 / p.n_samples as f64 };
    let inner_volume = match domain.kind() {
        DomainKind::Ball { radius, .. } => {
            let d = domain.dim();
            omega(d) * (radius - a).powi(d as i32) / d as f64
        }
        _ => domain.volume()?.value,
    };
    let sf = model.scale_function()?;
    let c_hat = (a <= sf.r_max()).then(|| sf.eval(a).ok()).flatten().map(|phi| upper * phi / t);
    Ok(((0.0, inner_volume * upper.min(1.0)), c_hat))
}
