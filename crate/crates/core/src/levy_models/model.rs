use crate::error::{Result, ShcError};
use crate::scale_kernel::{ScaleFunction, ScalingProfile};
use crate::quadrature::GradedMesh;
use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Surface area of the unit sphere S^{d-1}.
pub fn omega(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Constant c with Lévy density c|x|^{-d-β} for the exponent |ξ|^β.
pub fn stable_constant(d: usize, beta: f64) -> f64 {
    let d = d as f64;
    beta * 2f64.powf(beta - 1.0) * gamma((d + beta) / 2.0) / (PI.powf(d / 2.0) * gamma(1.0 - beta / 2.0))
}

#[derive(Debug, Clone)]
pub struct Diffusion {
    matrix: DMatrix<f64>,
    chol: DMatrix<f64>,
    norm: f64,
    min_eig: f64,
}

impl Diffusion {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d != matrix.ncols() {
            return Err(ShcError::InvalidModel("diffusion matrix must be square".into()));
        }
        if (&matrix - matrix.transpose()).abs().max() > 1e-12 * matrix.abs().max().max(1.0) {
            return Err(ShcError::InvalidModel("diffusion matrix must be symmetric".into()));
        }
        let eig = SymmetricEigen::new(matrix.clone());
        let min_eig = eig.eigenvalues.min();
        let norm = eig.eigenvalues.max();
        if !(min_eig > 0.0) {
            return Err(ShcError::InvalidModel(format!(
                "diffusion matrix must be zero or non-degenerate (smallest eigenvalue {min_eig})"
            )));
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| ShcError::InvalidModel("Cholesky factorisation failed".into()))?
            .l();
        Ok(Self { matrix, chol, norm, min_eig })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is positive definite")
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eig
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// νᵀAν
    pub fn quadratic(&self, nu: &[f64]) -> f64 {
        let d = nu.len();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += nu[i] * self.matrix[(i, j)] * nu[j];
            }
        }
        s
    }

    fn is_scalar(&self) -> bool {
        let d = self.matrix.nrows();
        let c = self.matrix[(0, 0)];
        (0..d).all(|i| (0..d).all(|j| (self.matrix[(i, j)] - if i == j { c } else { 0.0 }).abs() <= 1e-14 * c))
    }
}

/// Radial jump density j(s) = scale / (s^d ψ(s)), optionally cut off at R0.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    pub profile: ScalingProfile,
    pub scale: f64,
    pub truncated: bool,
}

impl RadialDensity {
    /// j(s)·s^{d-1} = scale / (s ψ(s)).
    #[inline]
    pub fn shell_weight(&self, s: f64) -> f64 {
        if self.truncated && s > self.profile.r0 {
            0.0
        } else {
            self.scale / (s * self.profile.eval_fast(s))
        }
    }

    pub fn density(&self, d: usize, s: f64) -> f64 {
        self.shell_weight(s) / s.powi(d as i32 - 1)
    }
}

#[derive(Debug, Clone)]
pub enum JumpLaw {
    None,
    /// Isotropic stable with exponent |ξ|^β, sampled exactly; `density` is
    /// the equivalent radial form.
    ExactStable { beta: f64, density: RadialDensity },
    Radial(RadialDensity),
}

#[derive(Debug, Clone)]
pub struct LevyModel {
    dim: usize,
    diffusion: Option<Diffusion>,
    jumps: JumpLaw,
    isotropic: bool,
    label: String,
}

impl LevyModel {
    pub fn new(dim: usize, diffusion: Option<Diffusion>, jumps: JumpLaw, label: impl Into<String>) -> Result<Self> {
        if dim < 2 {
            return Err(ShcError::InvalidModel(format!("dimension must be at least 2, got {dim}")));
        }
        if let Some(a) = &diffusion {
            if a.matrix().nrows() != dim {
                return Err(ShcError::InvalidModel("diffusion matrix dimension mismatch".into()));
            }
        }
        if diffusion.is_none() && matches!(jumps, JumpLaw::None) {
            return Err(ShcError::InvalidModel("model has neither diffusion nor jumps".into()));
        }
        if let JumpLaw::ExactStable { beta, .. } = &jumps {
            if !(*beta > 0.0 && *beta < 2.0) {
                return Err(ShcError::InvalidModel(format!("stable index must lie in (0, 2), got {beta}")));
            }
        }
        let isotropic = diffusion.as_ref().is_none_or(|a| a.is_scalar());
        let m = Self { dim, diffusion, jumps, isotropic, label: label.into() };
        m.check_levy_integrability()?;
        Ok(m)
    }

    pub fn brownian(dim: usize) -> Result<Self> {
        Self::new(dim, Some(Diffusion::identity(dim)), JumpLaw::None, "brownian")
    }

    pub fn brownian_with(a: DMatrix<f64>) -> Result<Self> {
        let d = a.nrows();
        Self::new(d, Some(Diffusion::new(a)?), JumpLaw::None, "brownian")
    }

    pub fn stable(dim: usize, beta: f64) -> Result<Self> {
        Self::stable_with_r0(dim, beta, 1.0)
    }

    pub fn stable_with_r0(dim: usize, beta: f64, r0: f64) -> Result<Self> {
        let density = stable_density(dim, beta, r0, false)?;
        Self::new(dim, None, JumpLaw::ExactStable { beta, density }, format!("stable({beta})"))
    }

    /// Same law as `stable` but sampled through the compound-Poisson route.
    pub fn stable_by_density(dim: usize, beta: f64, r0: f64) -> Result<Self> {
        let density = stable_density(dim, beta, r0, false)?;
        Self::new(dim, None, JumpLaw::Radial(density), format!("stable-density({beta})"))
    }

    pub fn truncated_stable(dim: usize, beta: f64, r0: f64) -> Result<Self> {
        let density = stable_density(dim, beta, r0, true)?;
        Self::new(dim, None, JumpLaw::Radial(density), format!("truncated-stable({beta}, {r0})"))
    }

    pub fn jump_diffusion(a: DMatrix<f64>, beta: f64) -> Result<Self> {
        let d = a.nrows();
        let density = stable_density(d, beta, 1.0, false)?;
        Self::new(d, Some(Diffusion::new(a)?), JumpLaw::ExactStable { beta, density }, format!("jump-diffusion({beta})"))
    }

    pub fn radial(dim: usize, diffusion: Option<Diffusion>, density: RadialDensity, label: impl Into<String>) -> Result<Self> {
        Self::new(dim, diffusion, JumpLaw::Radial(density), label)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn diffusion(&self) -> Option<&Diffusion> {
        self.diffusion.as_ref()
    }

    pub fn jumps(&self) -> &JumpLaw {
        &self.jumps
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    pub fn a_norm(&self) -> f64 {
        self.diffusion.as_ref().map_or(0.0, |a| a.norm())
    }

    pub fn density(&self) -> Option<&RadialDensity> {
        match &self.jumps {
            JumpLaw::None => None,
            JumpLaw::ExactStable { density, .. } | JumpLaw::Radial(density) => Some(density),
        }
    }

    pub fn profile(&self) -> Option<&ScalingProfile> {
        self.density().map(|d| &d.profile)
    }

    pub fn exact_beta(&self) -> Option<f64> {
        match self.jumps {
            JumpLaw::ExactStable { beta, .. } => Some(beta),
            _ => None,
        }
    }

    /// R0 of the jump profile, or +∞ for pure diffusion.
    pub fn r0(&self) -> f64 {
        self.profile().map_or(f64::INFINITY, |p| p.r0)
    }

    pub fn scale_function(&self) -> Result<ScaleFunction> {
        ScaleFunction::new(self.profile().cloned(), self.a_norm())
    }

    /// ∫(1 ∧ |x|²) J(dx), checked finite.
    pub fn levy_integrability(&self) -> Result<f64> {
        let Some(j) = self.density() else { return Ok(0.0) };
        let mesh = GradedMesh::default();
        let w = omega(self.dim);
        let near = mesh
            .from_zero(|s| s * s * j.shell_weight(s), 1.0)
            .map_err(|e| ShcError::InvalidModel(format!("small-jump second moment: {e}")))?
            .value;
        let far = if j.truncated && j.profile.r0 <= 1.0 {
            0.0
        } else {
            mesh.to_infinity(|s| j.shell_weight(s), 1.0)
                .map_err(|e| ShcError::InvalidModel(format!("large-jump mass: {e}")))?
                .value
        };
        let v = w * (near + far);
        if !v.is_finite() {
            return Err(ShcError::InvalidModel("∫(1 ∧ |x|²) J(dx) is not finite".into()));
        }
        Ok(v)
    }

    fn check_levy_integrability(&self) -> Result<()> {
        if let Some(j) = self.density() {
            if !(j.scale > 0.0 && j.scale.is_finite()) {
                return Err(ShcError::InvalidModel("density scale must be positive".into()));
            }
            if !j.truncated && j.profile.tail_exponent <= 0.0 {
                return Err(ShcError::InvalidModel("non-positive tail exponent gives infinite tail mass".into()));
            }
        }
        self.levy_integrability().map(|_| ())
    }
}

fn stable_density(dim: usize, beta: f64, r0: f64, truncated: bool) -> Result<RadialDensity> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(ShcError::InvalidModel(format!("stable index must lie in (0, 2), got {beta}")));
    }
    Ok(RadialDensity { profile: ScalingProfile::power(beta, r0)?, scale: stable_constant(dim, beta), truncated })
}
