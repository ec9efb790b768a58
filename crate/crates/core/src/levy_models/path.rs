use super::model::LevyModel;
use super::sampler::{check_unit, IncrementSampler, PathGrid};
use crate::error::{arg, Result};
use crate::geometry::Domain;
use crate::rng::unit_stream;
use rand::Rng;

/// Positions at the grid times, row-major (steps+1) × d.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dim: usize,
    positions: Vec<f64>,
    pub seed: u64,
    pub index: u64,
    pub grid: PathGrid,
}

impl Path {
    pub fn from_positions(dim: usize, positions: Vec<Vec<f64>>, grid: PathGrid) -> Result<Self> {
        if positions.len() != grid.steps + 1 || positions.iter().any(|p| p.len() != dim) {
            return arg("path needs steps+1 positions of matching dimension");
        }
        Ok(Self { dim, positions: positions.concat(), seed: 0, index: 0, grid })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, k: usize) -> &[f64] {
        &self.positions[k * self.dim..(k + 1) * self.dim]
    }
}

/// Path started at x0; the stream is (seed, index) so the same path can be
/// regenerated alone.
pub fn sample_path(model: &LevyModel, x0: &[f64], grid: &PathGrid, seed: u64, index: u64) -> Result<Path> {
    let d = model.dim();
    if x0.len() != d {
        return arg("starting point has the wrong dimension");
    }
    let sampler = IncrementSampler::new(model, grid.dt(), grid.cutoff)?;
    let mut rng = unit_stream(seed, index);
    let mut positions = Vec::with_capacity((grid.steps + 1) * d);
    positions.extend_from_slice(x0);
    let mut inc = vec![0.0; d];
    for k in 0..grid.steps {
        sampler.sample_into(&mut rng, &mut inc);
        for i in 0..d {
            let prev = positions[k * d + i];
            positions.push(prev + inc[i]);
        }
    }
    Ok(Path { dim: d, positions, seed, index, grid: *grid })
}

/// Running maximum of ⟨X_{s_k} − X_0, ν⟩ over k = 1..n, floored at 0.
pub fn project_running_sup(path: &Path, nu: &[f64]) -> Result<Vec<f64>> {
    check_unit(nu, path.dim)?;
    let x0 = path.position(0);
    let mut m = f64::NEG_INFINITY;
    Ok((1..path.len())
        .map(|k| {
            let y: f64 = path.position(k).iter().zip(x0).zip(nu).map(|((x, o), n)| (x - o) * n).sum();
            m = m.max(y);
            m.max(0.0)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExitRecord {
    pub exited: bool,
    pub exit_step: Option<usize>,
    pub exit_time_estimate: Option<f64>,
    /// exit flagged by the bridge correction between two inside points
    pub bridged: bool,
}

/// Diffusion-bridge crossing heuristic between two inside grid points.
#[derive(Debug, Clone, Copy)]
pub struct BridgeCorrection {
    /// d / (tr(A) Δt)
    pub inv_scale: f64,
}

impl BridgeCorrection {
    pub fn for_model(model: &LevyModel, dt: f64) -> Option<Self> {
        model
            .diffusion()
            .map(|a| Self { inv_scale: model.dim() as f64 / (a.trace() * dt) })
    }

    /// Crossing probability given boundary distances at both endpoints.
    #[inline]
    pub fn crossing_probability(&self, d0: f64, d1: f64) -> f64 {
        (-2.0 * d0 * d1 * self.inv_scale).exp()
    }
}

pub fn first_exit<R: Rng + ?Sized>(
    path: &Path,
    domain: &Domain,
    bridge: Option<BridgeCorrection>,
    rng: &mut R,
) -> Result<ExitRecord> {
    if !domain.contains(path.position(0)) {
        return arg("path must start inside the domain");
    }
    let dt = path.grid.dt();
    let mut prev_depth = -domain.signed_distance(path.position(0));
    for k in 1..path.len() {
        let sd = domain.signed_distance(path.position(k));
        if sd >= 0.0 {
            return Ok(ExitRecord { exited: true, exit_step: Some(k), exit_time_estimate: Some(k as f64 * dt), bridged: false });
        }
        if let Some(b) = bridge {
            if rng.random::<f64>() < b.crossing_probability(prev_depth, -sd) {
                return Ok(ExitRecord { exited: true, exit_step: Some(k), exit_time_estimate: Some(k as f64 * dt), bridged: true });
            }
        }
        prev_depth = -sd;
    }
    Ok(ExitRecord { exited: false, exit_step: None, exit_time_estimate: None, bridged: false })
}
