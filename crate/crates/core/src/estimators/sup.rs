use super::kernels::{sup_unit, Monitor};
use super::{elapsed_ms, Estimate, SimSettings};
use crate::error::{arg, Result};
use crate::levy_models::{check_unit, IncrementSampler, LevyModel};
use crate::rng::{derive_seed, unit_stream};
use crate::stats::chunked;

/// E[sup_{s≤t} ⟨X_s − X_0, ν⟩ ∧ b].
pub fn sup_functional(model: &LevyModel, nu: &[f64], t: f64, b: f64, n_paths: u64, settings: &SimSettings) -> Result<Estimate> {
    check_unit(nu, model.dim())?;
    if !(t > 0.0) {
        return arg(format!("t must be positive, got {t}"));
    }
    if !(b > 0.0) {
        return arg(format!("cap b must be positive, got {b}"));
    }
    if n_paths == 0 {
        return arg("need at least one path");
    }
    let start = std::time::Instant::now();
    let cutoff = settings.cutoff_for(model, t)?;
    let sampler = IncrementSampler::new(model, t / settings.steps as f64, cutoff)?;
    let proj = sampler.projection(nu)?;
    let mon = Monitor::new(model, settings);
    let task = derive_seed(settings.seed, "projected-sup");
    let units = settings.units(n_paths);
    let steps = settings.steps;
    let [acc] = chunked::<1, _>(units, |i, acc| {
        let mut rng = unit_stream(task, i);
        acc[0].push(sup_unit(&sampler, &proj, steps, b, &mon, &mut rng));
    });
    Ok(Estimate {
        value: acc.mean,
        stderr: acc.stderr(),
        n_samples: settings.paths(units),
        seed: settings.seed,
        wall_ms: elapsed_ms(start),
    })
}

/// ∫_0^a P_{x−rν}(τ_{H(x,ν)} ≤ t) dr, which by translation invariance is
/// E[sup X^ν_t ∧ a] and is computed from the same paths.
pub fn halfspace_layer_integral(
    model: &LevyModel,
    nu: &[f64],
    a: f64,
    t: f64,
    n_paths: u64,
    settings: &SimSettings,
) -> Result<Estimate> {
    if !(a > 0.0) {
        return arg(format!("layer width must be positive, got {a}"));
    }
    sup_functional(model, nu, t, a, n_paths, settings)
}
