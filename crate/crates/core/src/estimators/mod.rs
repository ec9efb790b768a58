//! Monte Carlo and quadrature estimators for the heat-content deficit, the
//! boundary supremum functional, exit probabilities and the nonlocal
//! perimeter.

mod deficit;
mod exits;
mod kernels;
mod perimeter;
mod sup;

pub use deficit::{exit_probability_ball, heat_content_deficit, DeficitEstimate, DeficitStrategy};
pub use exits::{exit_cell, layer_triplet, ExitCell, LayerTriplet};
pub use kernels::{monitor_exponent, MAX_SIM_DIM};
pub use perimeter::{flat_tail_kernel, perimeter, PerimeterBudget, PerimeterLevel, PerimeterMethod, PerimeterReport, TailTable};
pub use sup::{halfspace_layer_integral, sup_functional};

use crate::error::{Result, ShcError};
use crate::levy_models::{default_cutoff, LevyModel};
use serde::{Deserialize, Serialize};

/// Monte Carlo result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub wall_ms: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0, n_samples: 0, seed: 0, wall_ms: 0 }
    }

    /// value/other with first-order error propagation for independent
    /// estimates.
    pub fn ratio(&self, other: &Estimate) -> (f64, f64) {
        let r = self.value / other.value;
        let band = r.abs() * ((self.stderr / self.value).powi(2) + (other.stderr / other.value).powi(2)).sqrt();
        (r, band)
    }
}

/// How discrete monitoring is corrected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    None,
    /// per-path extrapolation from the full grid and every second point
    #[default]
    Richardson,
    /// Brownian-bridge crossing probabilities for the Gaussian part
    Bridge,
}

/// Path-simulation settings shared by the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub steps: usize,
    /// small-jump cutoff; default min(R0/100, φ^{-1}(t)/10)
    pub cutoff: Option<f64>,
    pub correction: Correction,
    pub antithetic: bool,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { steps: 256, cutoff: None, correction: Correction::Richardson, antithetic: true, seed: 1 }
    }
}

impl SimSettings {
    pub fn with_steps(steps: usize) -> Self {
        Self { steps, ..Self::default() }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn cutoff_for(&self, model: &LevyModel, t: f64) -> Result<f64> {
        match self.cutoff {
            Some(c) if c > 0.0 => Ok(c),
            Some(c) => Err(ShcError::InvalidCutoff(format!("cutoff must be positive, got {c}"))),
            None => default_cutoff(model, t),
        }
    }

    /// Number of independent Monte Carlo units for a path budget.
    pub(crate) fn units(&self, n_paths: u64) -> u64 {
        if self.antithetic {
            n_paths.div_ceil(2)
        } else {
            n_paths
        }
    }

    pub(crate) fn paths(&self, units: u64) -> u64 {
        if self.antithetic {
            2 * units
        } else {
            units
        }
    }
}

pub(crate) fn elapsed_ms(start: std::time::Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
