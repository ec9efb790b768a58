//! Streaming path kernels. Paths are never stored: each kernel walks one
//! antithetic pair step by step and stops as soon as the outcome is fixed.

use super::{Correction, SimSettings};
use crate::levy_models::{BridgeCorrection, IncrementSampler, JumpLaw, LevyModel, Projection};
use rand::Rng;
use rand_distr::Open01;

pub const MAX_SIM_DIM: usize = 8;

/// Exponent θ of the discrete-monitoring bias O(Δt^θ).
pub fn monitor_exponent(model: &LevyModel) -> f64 {
    if model.diffusion().is_some() {
        return 0.5;
    }
    match model.jumps() {
        JumpLaw::ExactStable { beta, .. } => (1.0 / beta).min(1.0),
        JumpLaw::Radial(j) => (1.0 / j.profile.alpha).min(1.0),
        JumpLaw::None => 0.5,
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Monitor {
    pub richardson: bool,
    pub factor: f64,
    pub bridge: bool,
    pub antithetic: bool,
}

impl Monitor {
    pub fn new(model: &LevyModel, s: &SimSettings) -> Self {
        let theta = monitor_exponent(model);
        let richardson = s.correction == Correction::Richardson && s.steps >= 2;
        Self {
            richardson,
            factor: 1.0 / (2f64.powf(theta) - 1.0),
            bridge: s.correction == Correction::Bridge && model.diffusion().is_some(),
            antithetic: s.antithetic,
        }
    }

    #[inline]
    pub fn combine(&self, fine: f64, coarse: f64) -> f64 {
        if self.richardson {
            fine + (fine - coarse) * self.factor
        } else {
            fine
        }
    }
}

/// E[sup_{s≤t} Y_s ∧ b] contribution of one unit (an antithetic pair or a
/// single path) of the projected process.
#[inline]
pub(crate) fn sup_unit<R: Rng + ?Sized>(
    s: &IncrementSampler,
    proj: &Projection,
    steps: usize,
    b: f64,
    mon: &Monitor,
    rng: &mut R,
) -> f64 {
    let mut y = 0.0f64;
    let (mut fp, mut cp, mut fm, mut cm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let v = proj.gauss_sd * proj.gauss_sd;
    let bridge = mon.bridge && v > 0.0;
    for k in 1..=steps {
        let prev = y;
        y += s.sample_projected(rng, proj);
        if bridge {
            let u: f64 = rng.sample(Open01);
            fp = fp.max(0.5 * (prev + y + ((y - prev).powi(2) - 2.0 * v * u.ln()).sqrt()));
            if mon.antithetic {
                let u: f64 = rng.sample(Open01);
                fm = fm.max(0.5 * (-prev - y + ((y - prev).powi(2) - 2.0 * v * u.ln()).sqrt()));
            }
        } else {
            fp = fp.max(y);
            fm = fm.max(-y);
        }
        if k % 2 == 0 {
            cp = cp.max(y);
            cm = cm.max(-y);
        }
        let done_p = fp >= b && (cp >= b || !mon.richardson);
        let done_m = !mon.antithetic || (fm >= b && (cm >= b || !mon.richardson));
        if done_p && done_m {
            break;
        }
    }
    let plus = mon.combine(fp.min(b), cp.min(b));
    if mon.antithetic {
        0.5 * (plus + mon.combine(fm.min(b), cm.min(b)))
    } else {
        plus
    }
}

#[derive(Clone, Copy, Default)]
struct ExitState {
    fine: bool,
    coarse: bool,
    depth: f64,
}

/// Probability-of-exit contribution of one unit started at x0, where
/// `sd` is the signed distance of the region (negative inside).
#[inline]
#[allow(clippy::too_many_arguments)]
pub(crate) fn exit_unit<R: Rng + ?Sized, F: Fn(&[f64]) -> f64>(
    s: &IncrementSampler,
    x0: &[f64],
    steps: usize,
    mon: &Monitor,
    bridge: Option<BridgeCorrection>,
    sd: &F,
    rng: &mut R,
) -> f64 {
    let d = x0.len();
    let mut p = [0.0f64; MAX_SIM_DIM];
    let mut m = [0.0f64; MAX_SIM_DIM];
    let mut inc = [0.0f64; MAX_SIM_DIM];
    p[..d].copy_from_slice(x0);
    m[..d].copy_from_slice(x0);
    let depth0 = -sd(x0);
    let mut st = [ExitState { depth: depth0, ..Default::default() }; 2];
    let sides = if mon.antithetic { 2 } else { 1 };
    let bridge = if mon.bridge { bridge } else { None };
    for k in 1..=steps {
        s.sample_into(rng, &mut inc[..d]);
        for i in 0..d {
            p[i] += inc[i];
            m[i] -= inc[i];
        }
        let mut all_done = true;
        for (side, state) in st.iter_mut().enumerate().take(sides) {
            let done = state.fine && (state.coarse || !mon.richardson);
            if done {
                continue;
            }
            let pos = if side == 0 { &p[..d] } else { &m[..d] };
            let dist = sd(pos);
            if dist >= 0.0 {
                state.fine = true;
                if k % 2 == 0 {
                    state.coarse = true;
                }
            } else if let Some(b) = bridge {
                if !state.fine && rng.random::<f64>() < b.crossing_probability(state.depth, -dist) {
                    state.fine = true;
                }
            }
            state.depth = -dist;
            if !(state.fine && (state.coarse || !mon.richardson)) {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    let val = |e: &ExitState| mon.combine(e.fine as u8 as f64, e.coarse as u8 as f64);
    if mon.antithetic {
        0.5 * (val(&st[0]) + val(&st[1]))
    } else {
        val(&st[0])
    }
}

/// Walk one antithetic pair, handing both positions to `visit` after each
/// step until it returns false.
#[inline]
pub(crate) fn walk_pair<R: Rng + ?Sized, V: FnMut(usize, &[f64], &[f64], &mut R) -> bool>(
    s: &IncrementSampler,
    x0: &[f64],
    steps: usize,
    rng: &mut R,
    mut visit: V,
) {
    let d = x0.len();
    let mut p = [0.0f64; MAX_SIM_DIM];
    let mut m = [0.0f64; MAX_SIM_DIM];
    let mut inc = [0.0f64; MAX_SIM_DIM];
    p[..d].copy_from_slice(x0);
    m[..d].copy_from_slice(x0);
    for k in 1..=steps {
        s.sample_into(rng, &mut inc[..d]);
        for i in 0..d {
            p[i] += inc[i];
            m[i] -= inc[i];
        }
        if !visit(k, &p[..d], &m[..d], rng) {
            break;
        }
    }
}
