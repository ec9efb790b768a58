//! Joint estimators that read several functionals off the same paths.

use super::kernels::{walk_pair, Monitor, MAX_SIM_DIM};
use super::{elapsed_ms, Estimate, SimSettings};
use crate::error::{arg, Result};
use crate::levy_models::{IncrementSampler, LevyModel};
use crate::rng::{derive_seed, unit_stream};
use crate::stats::{chunked, Acc};
use rand::Rng;
use serde::Serialize;

fn estimate(acc: &Acc, scale: f64, n: u64, seed: u64) -> Estimate {
    Estimate { value: scale * acc.mean, stderr: scale * acc.stderr(), n_samples: n, seed, wall_ms: 0 }
}

fn check(model: &LevyModel, t: f64, n_paths: u64) -> Result<()> {
    if model.dim() > MAX_SIM_DIM {
        return arg(format!("path simulation supports d <= {MAX_SIM_DIM}"));
    }
    if !(t > 0.0) {
        return arg(format!("t must be positive, got {t}"));
    }
    if n_paths == 0 {
        return arg("need at least one path");
    }
    Ok(())
}

/// Exit functionals of B(0, r) and of its trace on the first coordinate axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitCell {
    pub r: f64,
    pub t: f64,
    /// P(τ_{B(0,r)} ≤ t)
    pub ball: Estimate,
    /// P(τ_{(−r,r)} ≤ t) for the first coordinate
    pub line: Estimate,
    /// P(sup_{s≤t} X¹_s ≥ r)
    pub sup_line: Estimate,
    /// E[τ_{B(0,r)} ∧ t]
    pub exit_time: Estimate,
}

/// Grid-monitored (no extrapolation) exit functionals from one set of paths.
pub fn exit_cell(model: &LevyModel, r: f64, t: f64, n_paths: u64, settings: &SimSettings) -> Result<ExitCell> {
    check(model, t, n_paths)?;
    if !(r > 0.0) {
        return arg(format!("radius must be positive, got {r}"));
    }
    let start = std::time::Instant::now();
    let steps = settings.steps;
    let dt = t / steps as f64;
    let sampler = IncrementSampler::new(model, dt, settings.cutoff_for(model, t)?)?;
    let task = derive_seed(settings.seed, "exit-cell");
    let units = settings.units(n_paths);
    let d = model.dim();
    let x0 = [0.0; MAX_SIM_DIM];
    let r2 = r * r;
    let sides = if settings.antithetic { 2.0 } else { 1.0 };
    let accs = chunked::<4, _>(units, |i, acc| {
        let mut rng = unit_stream(task, i);
        // [ball, line, sup] per side; time of ball exit per side
        let mut hit = [[false; 3]; 2];
        let mut tau = [t; 2];
        walk_pair(&sampler, &x0[..d], steps, &mut rng, |k, p, m, _| {
            for (side, pos) in [p, m].into_iter().enumerate().take(sides as usize) {
                let h = &mut hit[side];
                if !h[0] && pos.iter().map(|v| v * v).sum::<f64>() >= r2 {
                    h[0] = true;
                    tau[side] = k as f64 * dt;
                }
                h[1] |= pos[0].abs() >= r;
                h[2] |= pos[0] >= r;
            }
            hit[..sides as usize].iter().any(|h| !(h[0] && h[1] && h[2]))
        });
        for (j, a) in acc.iter_mut().take(3).enumerate() {
            a.push(hit[..sides as usize].iter().map(|h| h[j] as u8 as f64).sum::<f64>() / sides);
        }
        acc[3].push(tau[..sides as usize].iter().sum::<f64>() / sides);
    });
    let n = settings.paths(units);
    let seed = settings.seed;
    let mut cell = ExitCell {
        r,
        t,
        ball: estimate(&accs[0], 1.0, n, seed),
        line: estimate(&accs[1], 1.0, n, seed),
        sup_line: estimate(&accs[2], 1.0, n, seed),
        exit_time: estimate(&accs[3], 1.0, n, seed),
    };
    cell.ball.wall_ms = elapsed_ms(start);
    Ok(cell)
}

/// ∫_0^a P(τ ≤ t) dr from a boundary point, for the inner ball, the
/// tangent half-space and the complement of the outer tangent ball, together
/// with E[sup X^ν_t ∧ b], all from the same paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerTriplet {
    pub inner: Estimate,
    pub half: Estimate,
    pub outer: Estimate,
    pub sup: Estimate,
    pub inner_minus_half: Estimate,
    pub half_minus_outer: Estimate,
}

pub fn layer_triplet(
    model: &LevyModel,
    radius: f64,
    a: f64,
    t: f64,
    b: f64,
    n_paths: u64,
    settings: &SimSettings,
) -> Result<LayerTriplet> {
    check(model, t, n_paths)?;
    if !(radius > 0.0 && a > 0.0 && a < radius && b > 0.0) {
        return arg(format!("need 0 < a < R and b > 0, got a = {a}, R = {radius}, b = {b}"));
    }
    let steps = settings.steps;
    let sampler = IncrementSampler::new(model, t / steps as f64, settings.cutoff_for(model, t)?)?;
    let mon = Monitor::new(model, settings);
    let task = derive_seed(settings.seed, "layer-triplet");
    let units = settings.units(n_paths);
    let d = model.dim();
    let r2 = radius * radius;
    let sides = if settings.antithetic { 2 } else { 1 };
    let accs = chunked::<6, _>(units, |i, acc| {
        let mut rng = unit_stream(task, i);
        let depth = a * rng.random::<f64>();
        // boundary point at the origin, outward normal e1
        let mut x0 = [0.0; MAX_SIM_DIM];
        x0[0] = -depth;
        // [inner, half, outer] fine/coarse exits and sup fine/coarse per side
        let mut fine = [[false; 3]; 2];
        let mut coarse = [[false; 3]; 2];
        let mut sup = [[0.0f64; 2]; 2];
        walk_pair(&sampler, &x0[..d], steps, &mut rng, |k, p, m, _| {
            let mut open = false;
            for (side, pos) in [p, m].into_iter().enumerate().take(sides) {
                let rest: f64 = pos[1..].iter().map(|v| v * v).sum();
                let out = [
                    (pos[0] + radius).powi(2) + rest >= r2,
                    pos[0] >= 0.0,
                    (pos[0] - radius).powi(2) + rest <= r2,
                ];
                let y = pos[0] + depth;
                for j in 0..3 {
                    fine[side][j] |= out[j];
                    if k % 2 == 0 {
                        coarse[side][j] |= out[j];
                    }
                }
                sup[side][0] = sup[side][0].max(y);
                if k % 2 == 0 {
                    sup[side][1] = sup[side][1].max(y);
                }
                let settled = fine[side][2] && (coarse[side][2] || !mon.richardson);
                let capped = sup[side][0] >= b && (sup[side][1] >= b || !mon.richardson);
                open |= !(settled && capped);
            }
            open
        });
        let mut v = [0.0; 4];
        for side in 0..sides {
            for j in 0..3 {
                v[j] += a * mon.combine(fine[side][j] as u8 as f64, coarse[side][j] as u8 as f64);
            }
            v[3] += mon.combine(sup[side][0].min(b), sup[side][1].min(b));
        }
        let v = v.map(|x| x / sides as f64);
        for j in 0..4 {
            acc[j].push(v[j]);
        }
        acc[4].push(v[0] - v[1]);
        acc[5].push(v[1] - v[2]);
    });
    let n = settings.paths(units);
    let e = |k: usize| estimate(&accs[k], 1.0, n, settings.seed);
    Ok(LayerTriplet { inner: e(0), half: e(1), outer: e(2), sup: e(3), inner_minus_half: e(4), half_minus_outer: e(5) })
}
