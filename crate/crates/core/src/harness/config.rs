use crate::error::{Result, ShcError};
use crate::estimators::{Correction, DeficitStrategy, PerimeterBudget, PerimeterMethod, SimSettings};
use crate::geometry::{Domain, SdfShape};
use crate::levy_models::{Diffusion, LevyModel, RadialDensity};
use crate::scale_kernel::{PsiShape, ScalingProfile, Variation};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const SEED_ENV: &str = "SHC_SEED";

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Brownian {
        #[serde(default = "two")]
        dim: usize,
        /// diffusion matrix, identity when absent
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
    },
    Stable {
        #[serde(default = "two")]
        dim: usize,
        beta: f64,
        /// sample through the compound-Poisson route instead of exactly
        #[serde(default)]
        by_density: bool,
    },
    JumpDiffusion {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
        beta: f64,
    },
    TruncatedStable {
        #[serde(default = "two")]
        dim: usize,
        beta: f64,
        #[serde(default = "one")]
        r0: f64,
    },
    /// ψ(r) = r^index ln(1 + 1/r)^log_power
    StableLog {
        #[serde(default = "two")]
        dim: usize,
        index: f64,
        log_power: f64,
        #[serde(default = "one")]
        r0: f64,
        #[serde(default)]
        alpha: Option<f64>,
        #[serde(default)]
        c_psi: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// ψ(r) = r^{alpha0 + slope·r}
    VariableOrder {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "vo_alpha0")]
        alpha0: f64,
        #[serde(default = "vo_slope")]
        slope: f64,
        #[serde(default = "one")]
        r0: f64,
        #[serde(default)]
        c_psi: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// j(s) = scale/(s^d ψ(s)) with ψ tabulated as (r, ψ(r)) pairs.
    RadialDensity {
        #[serde(default = "two")]
        dim: usize,
        table: Vec<[f64; 2]>,
        alpha: f64,
        c_psi: f64,
        #[serde(default)]
        tail_exponent: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        truncated: bool,
        #[serde(default)]
        a: Option<Vec<Vec<f64>>>,
    },
}

fn vo_alpha0() -> f64 {
    1.1
}

fn vo_slope() -> f64 {
    0.8
}

fn matrix(dim: usize, a: &Option<Vec<Vec<f64>>>) -> Result<DMatrix<f64>> {
    match a {
        None => Ok(DMatrix::identity(dim, dim)),
        Some(rows) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(ShcError::Config(format!("diffusion matrix must be {dim}x{dim}")));
            }
            Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
        }
    }
}

/// Attach C_ψ, measured on the profile when not given.
fn certified(p: ScalingProfile, c_psi: Option<f64>) -> Result<ScalingProfile> {
    let c = match c_psi {
        Some(c) => c,
        None => p.empirical_c_psi(64, 0.99)?,
    };
    ScalingProfile::new(p.shape.clone(), p.r0, p.alpha, c, p.tail_exponent)
}

impl ModelSpec {
    pub fn build(&self) -> Result<LevyModel> {
        match self {
            ModelSpec::Brownian { dim, a } => LevyModel::brownian_with(matrix(*dim, a)?),
            ModelSpec::Stable { dim, beta, by_density } => {
                if *by_density {
                    LevyModel::stable_by_density(*dim, *beta, 1.0)
                } else {
                    LevyModel::stable(*dim, *beta)
                }
            }
            ModelSpec::JumpDiffusion { dim, a, beta } => LevyModel::jump_diffusion(matrix(*dim, a)?, *beta),
            ModelSpec::TruncatedStable { dim, beta, r0 } => LevyModel::truncated_stable(*dim, *beta, *r0),
            ModelSpec::StableLog { dim, index, log_power, r0, alpha, c_psi, scale } => {
                let alpha = alpha.unwrap_or(if *log_power > 0.0 { 0.9 * index } else { *index });
                let shape = PsiShape::PowerLog { index: *index, log_power: *log_power };
                let profile = certified(ScalingProfile::new(shape, *r0, alpha.min(2.0), 1.0, *index)?, *c_psi)?;
                let density = RadialDensity { profile, scale: *scale, truncated: false };
                LevyModel::radial(*dim, None, density, format!("stable-log({index}, {log_power})"))
            }
            ModelSpec::VariableOrder { dim, alpha0, slope, r0, c_psi, scale } => {
                let shape = PsiShape::VariableOrder { alpha0: *alpha0, slope: *slope };
                let top = (alpha0 + slope * r0).min(2.0);
                let profile = certified(ScalingProfile::new(shape, *r0, *alpha0, 1.0, top)?, *c_psi)?;
                let density = RadialDensity { profile, scale: *scale, truncated: false };
                LevyModel::radial(*dim, None, density, format!("variable-order({alpha0}, {slope})"))
            }
            ModelSpec::RadialDensity { dim, table, alpha, c_psi, tail_exponent, scale, truncated, a } => {
                let pairs: Vec<(f64, f64)> = table.iter().map(|p| (p[0], p[1])).collect();
                let tail = match tail_exponent {
                    Some(g) => *g,
                    None => *alpha,
                };
                let profile = ScalingProfile::tabulated(&pairs, *alpha, *c_psi, tail)?;
                let diffusion = a.as_ref().map(|_| Diffusion::new(matrix(*dim, a)?)).transpose()?;
                let density = RadialDensity { profile, scale: *scale, truncated: *truncated };
                LevyModel::radial(*dim, diffusion, density, "radial-density")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        #[serde(default)]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
    },
    Halfspace { point: Vec<f64>, normal: Vec<f64> },
    /// A catalog shape with its interior/exterior ball radius.
    Implicit {
        sdf: SdfShape,
        #[serde(default)]
        r_ball: Option<f64>,
    },
}

impl DomainSpec {
    pub fn build(&self, dim: usize) -> Result<Domain> {
        match self {
            DomainSpec::Ball { center, radius } => Domain::ball(center.clone().unwrap_or_else(|| vec![0.0; dim]), *radius),
            DomainSpec::Halfspace { point, normal } => Domain::half_space(point.clone(), normal.clone()),
            DomainSpec::Implicit { sdf, r_ball } => Domain::implicit(sdf.clone(), r_ball.unwrap_or_else(|| sdf.natural_r_ball())),
        }
    }
}

/// Settings for the bound audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSpec {
    /// radii; default five log-spaced values in [R/40, R/2] with R = min(R0, 1)
    pub r_grid: Option<Vec<f64>>,
    /// t = u·φ(r); default chosen by model type
    pub u_grid: Option<Vec<f64>>,
    pub n_paths: u64,
    pub steps: usize,
    /// fraction of held-out cells that must satisfy each bound
    pub coverage: f64,
}

impl Default for AuditSpec {
    fn default() -> Self {
        Self { r_grid: None, u_grid: None, n_paths: 20_000, steps: 128, coverage: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub domain: DomainSpec,
    /// strictly decreasing
    pub t_grid: Vec<f64>,
    pub n_paths: u64,
    /// one entry, or one per t
    #[serde(default = "default_steps")]
    pub steps: Vec<usize>,
    /// default: BoundaryLayer(R/4), or Stratified(R/4) for bounded variation
    #[serde(default)]
    pub strategy: Option<DeficitStrategy>,
    #[serde(default = "one")]
    pub b: f64,
    /// report path stem; `.json` and `.csv` are appended
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// default 0.10, or 0.15 for stable indices within 0.15 of 1
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub declared_class: Option<Variation>,
    #[serde(default)]
    pub correction: Correction,
    #[serde(default = "yes")]
    pub antithetic: bool,
    #[serde(default)]
    pub cutoff: Option<f64>,
    #[serde(default = "default_perimeter_method")]
    pub perimeter_method: PerimeterMethod,
    #[serde(default)]
    pub perimeter: PerimeterBudget,
    /// required decay factor of t/E[sup∧b] across the grid
    #[serde(default = "default_decay")]
    pub negligibility_factor: f64,
    /// layer width of the half-space suite
    #[serde(default = "default_layer")]
    pub layer_a: f64,
    /// surface nodes for anisotropic denominators
    #[serde(default = "default_nodes")]
    pub surface_nodes: usize,
    #[serde(default)]
    pub audit: AuditSpec,
}

fn default_steps() -> Vec<usize> {
    vec![256]
}

fn default_seed() -> u64 {
    1
}

fn default_perimeter_method() -> PerimeterMethod {
    PerimeterMethod::Quadrature
}

fn default_decay() -> f64 {
    1.0 / 3.0
}

fn default_layer() -> f64 {
    0.3
}

fn default_nodes() -> usize {
    16
}

impl ExperimentConfig {
    /// Minimal config with defaults for everything else.
    pub fn new(model: ModelSpec, domain: DomainSpec, t_grid: Vec<f64>, n_paths: u64) -> Self {
        Self {
            model,
            domain,
            t_grid,
            n_paths,
            steps: default_steps(),
            strategy: None,
            b: 1.0,
            output: None,
            seed: default_seed(),
            tolerance: None,
            declared_class: None,
            correction: Correction::default(),
            antithetic: true,
            cutoff: None,
            perimeter_method: default_perimeter_method(),
            perimeter: PerimeterBudget::default(),
            negligibility_factor: default_decay(),
            layer_a: default_layer(),
            surface_nodes: default_nodes(),
            audit: AuditSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ShcError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and applies the `SHC_SEED` override.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.apply_env()?;
        Ok(cfg)
    }

    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v
                .trim()
                .parse()
                .map_err(|_| ShcError::Config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(ShcError::Config("t_grid is empty".into()));
        }
        if self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(ShcError::Config("t_grid entries must be positive".into()));
        }
        if self.t_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(ShcError::Config("t_grid must be strictly decreasing".into()));
        }
        if self.n_paths < 100 {
            return Err(ShcError::Config(format!("n_paths must be at least 100, got {}", self.n_paths)));
        }
        if self.steps.is_empty() || (self.steps.len() != 1 && self.steps.len() != self.t_grid.len()) {
            return Err(ShcError::Config("steps must have one entry or one per t".into()));
        }
        if self.steps.contains(&0) {
            return Err(ShcError::Config("steps must be positive".into()));
        }
        if !(self.b > 0.0) {
            return Err(ShcError::Config("b must be positive".into()));
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(ShcError::Config("tolerance must lie in (0, 1)".into()));
            }
        }
        if !(self.negligibility_factor > 0.0 && self.negligibility_factor <= 1.0) {
            return Err(ShcError::Config("negligibility_factor must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn steps_for(&self, i: usize) -> usize {
        if self.steps.len() == 1 {
            self.steps[0]
        } else {
            self.steps[i]
        }
    }

    pub fn sim_settings(&self, i: usize, seed: u64) -> SimSettings {
        SimSettings {
            steps: self.steps_for(i),
            cutoff: self.cutoff,
            correction: self.correction,
            antithetic: self.antithetic,
            seed,
        }
    }

    pub fn build_model(&self) -> Result<LevyModel> {
        self.model.build()
    }

    pub fn build_domain(&self) -> Result<Domain> {
        self.domain.build(self.model_dim())
    }

    pub fn model_dim(&self) -> usize {
        match &self.model {
            ModelSpec::Brownian { dim, .. }
            | ModelSpec::Stable { dim, .. }
            | ModelSpec::JumpDiffusion { dim, .. }
            | ModelSpec::TruncatedStable { dim, .. }
            | ModelSpec::StableLog { dim, .. }
            | ModelSpec::VariableOrder { dim, .. }
            | ModelSpec::RadialDensity { dim, .. } => *dim,
        }
    }

    /// Default tolerance: 15% when the model sits near the critical index 1.
    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(match &self.model {
            ModelSpec::Stable { beta, .. } | ModelSpec::JumpDiffusion { beta, .. } | ModelSpec::TruncatedStable { beta, .. }
                if (beta - 1.0).abs() <= 0.15 =>
            {
                0.15
            }
            ModelSpec::StableLog { index, .. } if (index - 1.0).abs() <= 0.15 => 0.15,
            _ => 0.10,
        })
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
