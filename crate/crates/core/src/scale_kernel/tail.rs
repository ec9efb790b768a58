use super::profile::ScalingProfile;
use crate::error::{arg, Result, ShcError};
use crate::levy_models::{omega, LevyModel, RadialDensity};
use crate::quadrature::GradedMesh;

/// ∫_r^∞ j(s) s^{d-1} ds for a radial density, with the declared power-law
/// extension beyond R0 integrated in closed form.
pub fn radial_tail_integral(j: &RadialDensity, r: f64) -> Result<f64> {
    let p = &j.profile;
    let mut s = 0.0;
    if r < p.r0 {
        s += GradedMesh::default().finite(|x| j.shell_weight(x), r, p.r0)?;
    }
    if !j.truncated {
        let g = p.tail_exponent;
        if g <= 0.0 {
            return Err(ShcError::InvalidModel(format!("tail integral diverges for tail exponent {g}")));
        }
        let lo = r.max(p.r0);
        s += j.scale * (p.r0 / lo).powf(g) / (g * p.eval(p.r0)?);
    }
    if !s.is_finite() {
        return Err(ShcError::InvalidModel("tail integral is not finite".into()));
    }
    Ok(s)
}

/// J(B(0,r)^c).
pub fn levy_tail_mass(model: &LevyModel, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return arg(format!("tail mass needs r > 0, got {r}"));
    }
    let Some(j) = model.density() else { return Ok(0.0) };
    Ok(omega(model.dim()) * radial_tail_integral(j, r)?)
}

/// (C1, C2, C3): density bounds C1 ≤ j(s)s^dψ(s) ≤ C2 on (0, R0] and
/// C3 = ∫(1 ∧ |x|²/R0²) J(dx).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl TailConstants {
    pub fn for_model(model: &LevyModel) -> Result<Self> {
        let j = model
            .density()
            .ok_or_else(|| ShcError::InvalidModel("model has no jump part".into()))?;
        let r0 = j.profile.r0;
        let near = GradedMesh::default().from_zero(|s| s * s * j.shell_weight(s), r0)?.value / (r0 * r0);
        let far = radial_tail_integral(j, r0)?;
        Ok(Self { c1: j.scale, c2: j.scale, c3: omega(model.dim()) * (near + far) })
    }
}

/// Lower and upper tail-mass bounds c1/ψ(2r) and c2/ψ(r).
pub fn tail_bounds(profile: &ScalingProfile, dim: usize, k: TailConstants, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return arg(format!("tail bounds need r > 0, got {r}"));
    }
    if r > profile.r0 / 2.0 {
        return Err(ShcError::OutOfRange(format!("tail bounds need r <= R0/2 = {}, got {r}", profile.r0 / 2.0)));
    }
    let w = omega(dim);
    let lower = k.c1 * w / (2.0 * profile.eval(2.0 * r)?);
    let upper = (w * k.c2 / (profile.alpha * profile.c_psi) + k.c3 * profile.eval(profile.r0)?) / profile.eval(r)?;
    Ok((lower, upper))
}
