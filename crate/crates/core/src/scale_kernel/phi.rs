use super::profile::ScalingProfile;
use crate::error::{arg, Result, ShcError};
use crate::quadrature::{gl16, GradedMesh};

/// Scale function φ(r) = r² / (‖A‖ + 2∫_0^r s/ψ(s) ds) with the integral
/// cached on the geometric knots R0·q^k.
#[derive(Debug, Clone)]
pub struct ScaleFunction {
    profile: Option<ScalingProfile>,
    a_norm: f64,
    mesh: GradedMesh,
    knots: Vec<f64>,
    cum: Vec<f64>,
}

const KNOTS: usize = 80;

impl ScaleFunction {
    pub fn new(profile: Option<ScalingProfile>, a_norm: f64) -> Result<Self> {
        Self::with_mesh(profile, a_norm, GradedMesh::default())
    }

    pub fn with_mesh(profile: Option<ScalingProfile>, a_norm: f64, mesh: GradedMesh) -> Result<Self> {
        if !(a_norm >= 0.0 && a_norm.is_finite()) {
            return arg(format!("operator norm must be finite and nonnegative, got {a_norm}"));
        }
        let Some(p) = profile else {
            if a_norm == 0.0 {
                return Err(ShcError::DegenerateScale("no diffusion and no jumps".into()));
            }
            return Ok(Self { profile: None, a_norm, mesh, knots: vec![], cum: vec![] });
        };
        let q = mesh.ratio;
        let knots: Vec<f64> = (0..=KNOTS).map(|k| p.r0 * q.powi(k as i32)).collect();
        let mut cum = vec![0.0; KNOTS + 1];
        let f = |s: f64| s / p.eval_fast(s);
        cum[KNOTS] = mesh.from_zero(f, knots[KNOTS])?.value;
        for k in (0..KNOTS).rev() {
            cum[k] = cum[k + 1] + gl16().integrate(f, knots[k + 1], knots[k]);
        }
        if cum.iter().any(|v| !v.is_finite()) {
            return Err(ShcError::Numeric { what: "scale function".into(), diagnostics: "non-finite integral".into() });
        }
        Ok(Self { profile: Some(p), a_norm, mesh, knots, cum })
    }

    pub fn profile(&self) -> Option<&ScalingProfile> {
        self.profile.as_ref()
    }

    pub fn a_norm(&self) -> f64 {
        self.a_norm
    }

    /// Largest admissible radius (R0, or infinity for pure diffusion).
    pub fn r_max(&self) -> f64 {
        self.profile.as_ref().map_or(f64::INFINITY, |p| p.r0)
    }

    /// ∫_0^r s/ψ(s) ds.
    pub fn moment_integral(&self, r: f64) -> Result<f64> {
        let Some(p) = &self.profile else { return Ok(0.0) };
        let f = |s: f64| s / p.eval_fast(s);
        if r <= self.knots[KNOTS] {
            return Ok(self.mesh.from_zero(f, r)?.value);
        }
        let q = self.mesh.ratio;
        let mut k = ((p.r0 / r).ln() / (1.0 / q).ln()).floor() as usize;
        k = k.min(KNOTS - 1);
        while k > 0 && self.knots[k] < r {
            k -= 1;
        }
        while self.knots[k + 1] >= r {
            k += 1;
        }
        Ok(self.cum[k + 1] + gl16().integrate(f, self.knots[k + 1], r))
    }

    /// The constant c = 2∫_0^{R0} s/ψ(s) ds for which
    /// r²/(c + ‖A‖) ≤ φ(r) on (0, R0].
    pub fn square_constant(&self) -> f64 {
        if self.profile.is_some() {
            2.0 * self.cum[0]
        } else {
            0.0
        }
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || r > self.r_max() * (1.0 + 1e-12) {
            return Err(ShcError::OutOfRange(format!("phi needs r in (0, {}], got {r}", self.r_max())));
        }
        let r = r.min(self.r_max());
        Ok(r * r / (self.a_norm + 2.0 * self.moment_integral(r)?))
    }

    /// φ^{-1}(t) on (0, R0].
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let hi = if self.r_max().is_finite() { self.r_max() } else { (t * self.a_norm).sqrt() * 4.0 + 1.0 };
        let lo = hi * 1e-12;
        invert_monotone(|r| self.eval(r).unwrap_or(f64::NAN), t, (lo, hi))
    }
}

pub fn eval_phi(sf: &ScaleFunction, r: f64) -> Result<f64> {
    sf.eval(r)
}

#[derive(Debug, Clone, Copy)]
pub struct InvertOptions {
    pub tol: f64,
    pub grid: usize,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self { tol: 1e-12, grid: 64 }
    }
}

pub fn invert_monotone<F: Fn(f64) -> f64>(f: F, t: f64, bracket: (f64, f64)) -> Result<f64> {
    invert_monotone_with(f, t, bracket, InvertOptions::default())
}

/// Bisection for f(r) = t after checking f is non-decreasing on a grid of
/// the bracket (log-spaced when the bracket is positive).
pub fn invert_monotone_with<F: Fn(f64) -> f64>(f: F, t: f64, bracket: (f64, f64), opts: InvertOptions) -> Result<f64> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return arg(format!("empty bracket [{lo}, {hi}]"));
    }
    let n = opts.grid.max(2);
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let u = i as f64 / (n - 1) as f64;
            if lo > 0.0 {
                lo * (hi / lo).powf(u)
            } else {
                lo + (hi - lo) * u
            }
        })
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(ShcError::DegenerateScale("non-finite value on the bracket grid".into()));
    }
    if let Some(i) = ys.windows(2).position(|w| w[1] < w[0]) {
        return Err(ShcError::DegenerateScale(format!(
            "map decreases between {} and {}",
            xs[i],
            xs[i + 1]
        )));
    }
    if ys[n - 1] <= ys[0] {
        return Err(ShcError::DegenerateScale("map is constant on the bracket".into()));
    }
    if !(t >= ys[0] && t <= ys[n - 1]) {
        return Err(ShcError::Bracket { t, lo: ys[0], hi: ys[n - 1] });
    }
    let i = ys.partition_point(|&y| y < t);
    let (mut a, mut b) = if i == 0 { (xs[0], xs[0]) } else { (xs[i - 1], xs[i]) };
    for _ in 0..400 {
        if b - a <= opts.tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < t {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
