use super::model::{omega, JumpLaw, LevyModel, RadialDensity};
use crate::error::{arg, Result, ShcError};
use crate::quadrature::{gl16, GradedMesh};
use crate::scale_kernel::radial_tail_integral;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson, StandardNormal};
use std::f64::consts::PI;
use std::sync::Arc;

/// Standard symmetric β-stable variate, E e^{iξS} = e^{-|ξ|^β}
/// (Chambers–Mallows–Stuck).
#[inline]
pub fn standard_symmetric_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5);
    if beta == 1.0 {
        return v.tan();
    }
    let w: f64 = rng.sample(Exp1);
    (beta * v).sin() / v.cos().powf(1.0 / beta) * (((1.0 - beta) * v).cos() / w).powf((1.0 - beta) / beta)
}

/// Positive ρ-stable variate with Laplace transform e^{-λ^ρ}, ρ ∈ (0, 1)
/// (Kanter's representation).
#[inline]
pub fn positive_stable<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    (rho * u).sin() / u.sin().powf(1.0 / rho) * (((1.0 - rho) * u).sin() / e).powf((1.0 - rho) / rho)
}

pub fn sample_stable_increment<R: Rng + ?Sized>(beta: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(beta > 0.0 && beta < 2.0) {
        return arg(format!("stable index must lie in (0, 2), got {beta}"));
    }
    if !(dt > 0.0) {
        return arg(format!("dt must be positive, got {dt}"));
    }
    Ok(dt.powf(1.0 / beta) * standard_symmetric_stable(beta, rng))
}

/// Uniform time grid on [0, horizon] with a small-jump cutoff.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PathGrid {
    pub horizon: f64,
    pub steps: usize,
    pub cutoff: f64,
}

impl PathGrid {
    pub fn new(horizon: f64, steps: usize, cutoff: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return arg(format!("horizon must be positive, got {horizon}"));
        }
        if steps == 0 {
            return arg("grid needs at least one step");
        }
        if !(cutoff > 0.0) {
            return Err(ShcError::InvalidCutoff(format!("cutoff must be positive, got {cutoff}")));
        }
        Ok(Self { horizon, steps, cutoff })
    }

    /// Grid with the default cutoff min(R0/100, φ^{-1}(t)/10).
    pub fn for_model(model: &LevyModel, horizon: f64, steps: usize) -> Result<Self> {
        Self::new(horizon, steps, default_cutoff(model, horizon)?)
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

pub fn default_cutoff(model: &LevyModel, t: f64) -> Result<f64> {
    let r0 = model.r0();
    if !r0.is_finite() {
        return Ok(1.0);
    }
    let sf = model.scale_function()?;
    let inv = match sf.inverse(t) {
        Ok(r) => r,
        Err(ShcError::Bracket { .. }) => r0,
        Err(e) => return Err(e),
    };
    Ok((r0 / 100.0).min(inv / 10.0))
}

/// Inverse-CDF table for jump radii above the cutoff.
#[derive(Debug, Clone)]
pub struct RadiusTable {
    ln_r: Vec<f64>,
    g: Vec<f64>,
    ln_g: Vec<f64>,
    /// power-law continuation beyond the last node (None if truncated)
    tail_exponent: Option<f64>,
    /// ∫_ε^∞ j(s)s^{d-1} ds
    pub tail_integral: f64,
}

impl RadiusTable {
    pub fn new(j: &RadialDensity, eps: f64) -> Result<Self> {
        let p = &j.profile;
        let top = if j.truncated { p.r0 } else { p.r0.max(eps) };
        if j.truncated && eps >= p.r0 {
            return Ok(Self { ln_r: vec![eps.ln()], g: vec![1.0], ln_g: vec![0.0], tail_exponent: None, tail_integral: 0.0 });
        }
        let decades = (top / eps).log10().max(0.0);
        let n = ((decades * 60.0).ceil() as usize).max(2);
        let r: Vec<f64> = (0..=n).map(|k| eps * (top / eps).powf(k as f64 / n as f64)).collect();
        let mut t = vec![0.0; n + 1];
        t[n] = if j.truncated { 0.0 } else { radial_tail_integral(j, top)? };
        for k in (0..n).rev() {
            t[k] = t[k + 1] + gl16().integrate(|s| j.shell_weight(s), r[k], r[k + 1]);
        }
        let total = t[0];
        if !(total.is_finite() && total > 0.0) {
            return Err(ShcError::InvalidCutoff(format!("tail mass above cutoff {eps} is {total}")));
        }
        let g: Vec<f64> = t.iter().map(|v| v / total).collect();
        Ok(Self {
            ln_r: r.iter().map(|x| x.ln()).collect(),
            ln_g: g.iter().map(|v| v.ln()).collect(),
            g,
            tail_exponent: (!j.truncated).then_some(p.tail_exponent),
            tail_integral: total,
        })
    }

    /// Radius with P(R > r) equal to the normalised tail, from u ∈ (0, 1).
    #[inline]
    pub fn radius(&self, u: f64) -> f64 {
        let n = self.g.len() - 1;
        if u <= self.g[n] {
            // u ≤ G_top > 0 only when a power tail exists
            let gam = self.tail_exponent.unwrap_or(f64::INFINITY);
            return (self.ln_r[n] + (self.ln_g[n] - u.ln()) / gam).exp();
        }
        // first index with g < u, g is decreasing
        let k = self.g.partition_point(|&v| v >= u);
        let (a, b) = (k - 1, k);
        let x = if self.g[b] > 0.0 {
            (u.ln() - self.ln_g[a]) / (self.ln_g[b] - self.ln_g[a])
        } else {
            (self.g[a] - u) / (self.g[a] - self.g[b])
        };
        (self.ln_r[a] + x * (self.ln_r[b] - self.ln_r[a])).exp()
    }
}

#[derive(Debug, Clone)]
enum JumpKernel {
    None,
    Stable { beta: f64, scale: f64 },
    Poisson { table: Arc<RadiusTable>, poisson: Option<Poisson<f64>>, small_sd: f64 },
}

/// Prepared increment sampler for a fixed (model, dt, cutoff).
#[derive(Debug, Clone)]
pub struct IncrementSampler {
    dim: usize,
    /// √dt·L with A = LLᵀ, row-major lower triangle
    chol: Option<Vec<f64>>,
    quad_form: Option<nalgebra::DMatrix<f64>>,
    dt: f64,
    kernel: JumpKernel,
    pub diagnostics: SamplerDiagnostics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct SamplerDiagnostics {
    pub cutoff: f64,
    pub jump_rate: f64,
    pub small_jump_sd: f64,
    /// σ(ε)/ε; the Gaussian substitute is only trustworthy when this is large
    pub small_jump_ratio: f64,
}

impl IncrementSampler {
    pub fn new(model: &LevyModel, dt: f64, cutoff: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return arg(format!("dt must be positive, got {dt}"));
        }
        if !model.is_isotropic() && model.density().is_some() {
            return arg("only isotropic jump laws can be sampled");
        }
        let d = model.dim();
        let chol = model.diffusion().map(|a| {
            let l = a.cholesky();
            let mut v = vec![0.0; d * d];
            for i in 0..d {
                for k in 0..=i {
                    v[i * d + k] = l[(i, k)] * dt.sqrt();
                }
            }
            v
        });
        let mut diagnostics = SamplerDiagnostics { cutoff, ..Default::default() };
        let kernel = match model.jumps() {
            JumpLaw::None => JumpKernel::None,
            JumpLaw::ExactStable { beta, .. } => JumpKernel::Stable { beta: *beta, scale: dt.powf(1.0 / beta) },
            JumpLaw::Radial(j) => {
                if !(cutoff > 0.0) {
                    return Err(ShcError::InvalidCutoff(format!("cutoff must be positive, got {cutoff}")));
                }
                if cutoff > j.profile.r0 {
                    return Err(ShcError::InvalidCutoff(format!("cutoff {cutoff} exceeds R0 = {}", j.profile.r0)));
                }
                let table = RadiusTable::new(j, cutoff)?;
                let rate = omega(d) * table.tail_integral;
                let var = omega(d) * GradedMesh::default().from_zero(|s| s * s * j.shell_weight(s), cutoff)?.value;
                let small_sd = (var / d as f64 * dt).sqrt();
                let mean = rate * dt;
                diagnostics.jump_rate = rate;
                diagnostics.small_jump_sd = var.sqrt();
                diagnostics.small_jump_ratio = var.sqrt() / cutoff;
                if diagnostics.small_jump_ratio < 3.0 {
                    log::warn!(
                        "small-jump Gaussian substitute at cutoff {cutoff:e} has σ(ε)/ε = {:.2}",
                        diagnostics.small_jump_ratio
                    );
                }
                let poisson = if mean > 0.0 {
                    Some(Poisson::new(mean).map_err(|e| ShcError::InvalidCutoff(format!("jump count mean {mean}: {e}")))?)
                } else {
                    None
                };
                JumpKernel::Poisson { table: Arc::new(table), poisson, small_sd }
            }
        };
        Ok(Self { dim: d, chol, quad_form: model.diffusion().map(|a| a.matrix().clone()), dt, kernel, diagnostics })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Write one increment into `out` (length d).
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let d = self.dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        if let Some(l) = &self.chol {
            let mut z = [0.0f64; 8];
            let mut zv;
            let z: &mut [f64] = if d <= 8 {
                &mut z[..d]
            } else {
                zv = vec![0.0; d];
                &mut zv
            };
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            for i in 0..d {
                let mut s = 0.0;
                for k in 0..=i {
                    s += l[i * d + k] * z[k];
                }
                out[i] += s;
            }
        }
        match &self.kernel {
            JumpKernel::None => {}
            JumpKernel::Stable { beta, scale } => {
                let a = positive_stable(beta / 2.0, rng);
                let c = scale * (2.0 * a).sqrt();
                for v in out.iter_mut() {
                    *v += c * rng.sample::<f64, _>(StandardNormal);
                }
            }
            JumpKernel::Poisson { table, poisson, small_sd, .. } => {
                if let Some(p) = poisson {
                    let n = p.sample(rng) as u64;
                    let mut dir = [0.0f64; 8];
                    for _ in 0..n {
                        let r = table.radius(rng.sample(Open01));
                        if d <= 8 {
                            unit_vector(rng, &mut dir[..d]);
                            for i in 0..d {
                                out[i] += r * dir[i];
                            }
                        } else {
                            let mut dv = vec![0.0; d];
                            unit_vector(rng, &mut dv);
                            for i in 0..d {
                                out[i] += r * dv[i];
                            }
                        }
                    }
                }
                for v in out.iter_mut() {
                    *v += small_sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
    }

    /// One increment of the projection ⟨X, ν⟩, sampled directly from the
    /// one-dimensional marginal law.
    #[inline]
    pub fn sample_projected<R: Rng + ?Sized>(&self, rng: &mut R, proj: &Projection) -> f64 {
        let mut y = 0.0;
        if proj.gauss_sd > 0.0 {
            y += proj.gauss_sd * rng.sample::<f64, _>(StandardNormal);
        }
        match &self.kernel {
            JumpKernel::None => {}
            JumpKernel::Stable { beta, scale } => y += scale * standard_symmetric_stable(*beta, rng),
            JumpKernel::Poisson { table, poisson, small_sd, .. } => {
                if let Some(p) = poisson {
                    let n = p.sample(rng) as u64;
                    for _ in 0..n {
                        let r = table.radius(rng.sample(Open01));
                        y += r * sphere_coordinate(self.dim, rng);
                    }
                }
                y += small_sd * rng.sample::<f64, _>(StandardNormal);
            }
        }
        y
    }

    pub fn projection(&self, nu: &[f64]) -> Result<Projection> {
        check_unit(nu, self.dim)?;
        let var = self.quad_form.as_ref().map_or(0.0, |a| {
            let mut s = 0.0;
            for i in 0..self.dim {
                for j in 0..self.dim {
                    s += nu[i] * a[(i, j)] * nu[j];
                }
            }
            s
        });
        Ok(Projection { gauss_sd: (var * self.dt).sqrt(), variance_rate: var })
    }
}

/// Gaussian data of a projected increment.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    pub gauss_sd: f64,
    /// νᵀAν
    pub variance_rate: f64,
}

pub fn check_unit(nu: &[f64], d: usize) -> Result<()> {
    if nu.len() != d {
        return arg(format!("direction has length {}, expected {d}", nu.len()));
    }
    let n: f64 = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return arg(format!("direction must be a unit vector (norm {n})"));
    }
    Ok(())
}

#[inline]
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 2 {
        let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
        out[0] = c;
        out[1] = s;
        return;
    }
    loop {
        let mut n2 = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            n2 += *v * *v;
        }
        if n2 > 1e-300 {
            let inv = 1.0 / n2.sqrt();
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// First coordinate of a uniform point on S^{d-1}.
#[inline]
fn sphere_coordinate<R: Rng + ?Sized>(d: usize, rng: &mut R) -> f64 {
    match d {
        2 => (2.0 * PI * rng.random::<f64>()).cos(),
        3 => 2.0 * rng.random::<f64>() - 1.0,
        _ => {
            let mut v = vec![0.0; d];
            unit_vector(rng, &mut v);
            v[0]
        }
    }
}

/// Convenience form: prepares a sampler and draws one increment.
pub fn sample_increment<R: Rng + ?Sized>(model: &LevyModel, dt: f64, grid: &PathGrid, rng: &mut R) -> Result<Vec<f64>> {
    let s = IncrementSampler::new(model, dt, grid.cutoff)?;
    let mut out = vec![0.0; model.dim()];
    s.sample_into(rng, &mut out);
    Ok(out)
}
