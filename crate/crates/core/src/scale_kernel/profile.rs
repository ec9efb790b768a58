use crate::error::{arg, Result, ShcError};
use std::fmt;
use std::sync::Arc;

pub type PsiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Shape of ψ on (0, R0].
#[derive(Clone)]
pub enum PsiShape {
    /// r^index
    Power { index: f64 },
    /// r^index · ln(1 + 1/r)^log_power
    PowerLog { index: f64, log_power: f64 },
    /// r^{α(r)} with α(r) = alpha0 + slope·r
    VariableOrder { alpha0: f64, slope: f64 },
    /// monotone cubic through (ln r, ln ψ) knots
    Tabulated(MonotoneCubic),
    Custom(PsiFn),
}

impl fmt::Debug for PsiShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiShape::Power { index } => write!(f, "Power({index})"),
            PsiShape::PowerLog { index, log_power } => write!(f, "PowerLog({index}, {log_power})"),
            PsiShape::VariableOrder { alpha0, slope } => write!(f, "VariableOrder({alpha0}, {slope})"),
            PsiShape::Tabulated(t) => write!(f, "Tabulated({} knots)", t.x.len()),
            PsiShape::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PsiShape {
    fn eval(&self, r: f64) -> f64 {
        match self {
            PsiShape::Power { index } => r.powf(*index),
            PsiShape::PowerLog { index, log_power } => r.powf(*index) * (1.0 / r).ln_1p().powf(*log_power),
            PsiShape::VariableOrder { alpha0, slope } => r.powf(alpha0 + slope * r),
            PsiShape::Tabulated(t) => t.eval(r.ln()).exp(),
            PsiShape::Custom(f) => f(r),
        }
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolant; linear extrapolation
/// outside the knots.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(ShcError::InvalidProfile("tabulated profile needs at least 2 matching knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || y.windows(2).any(|w| w[1] < w[0]) {
            return Err(ShcError::InvalidProfile("tabulated knots must be increasing".into()));
        }
        let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = d[0];
        m[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { 0.5 * (d[i - 1] + d[i]) };
        }
        for i in 0..n - 1 {
            if d[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / d[i];
            let b = m[i + 1] / d[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                m[i] = tau * a * d[i];
                m[i + 1] = tau * b * d[i];
            }
        }
        Ok(Self { x, y, m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.m[0] * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1] + self.m[n - 1] * (t - self.x[n - 1]);
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[i]
            + (s3 - 2.0 * s2 + s) * h * self.m[i]
            + (-2.0 * s3 + 3.0 * s2) * self.y[i + 1]
            + (s3 - s2) * h * self.m[i + 1]
    }
}

/// ψ on (0, R0] with its lower weak scaling certificate and tail extension.
#[derive(Debug, Clone)]
pub struct ScalingProfile {
    pub shape: PsiShape,
    pub r0: f64,
    pub alpha: f64,
    pub c_psi: f64,
    pub tail_exponent: f64,
}

impl ScalingProfile {
    pub fn new(shape: PsiShape, r0: f64, alpha: f64, c_psi: f64, tail_exponent: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(ShcError::InvalidProfile(format!("R0 must be positive, got {r0}")));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(ShcError::InvalidProfile(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        if !(c_psi > 0.0 && c_psi <= 1.0) {
            return Err(ShcError::InvalidProfile(format!("C_psi must lie in (0, 1], got {c_psi}")));
        }
        if !tail_exponent.is_finite() {
            return Err(ShcError::InvalidProfile("tail exponent must be finite".into()));
        }
        let p = Self { shape, r0, alpha, c_psi, tail_exponent };
        p.eval(r0)?;
        Ok(p)
    }

    /// Pure power ψ(r) = r^beta, certified with α = beta, C_ψ = 1.
    pub fn power(beta: f64, r0: f64) -> Result<Self> {
        Self::new(PsiShape::Power { index: beta }, r0, beta, 1.0, beta)
    }

    /// Tabulated (r, ψ(r)) pairs, interpolated monotone-cubically in log-log.
    pub fn tabulated(pairs: &[(f64, f64)], alpha: f64, c_psi: f64, tail_exponent: f64) -> Result<Self> {
        if pairs.iter().any(|&(r, p)| !(r > 0.0 && p > 0.0)) {
            return Err(ShcError::InvalidProfile("tabulated pairs must be positive".into()));
        }
        let x = pairs.iter().map(|p| p.0.ln()).collect();
        let y = pairs.iter().map(|p| p.1.ln()).collect();
        let r0 = pairs.last().map(|p| p.0).unwrap_or(0.0);
        Self::new(PsiShape::Tabulated(MonotoneCubic::new(x, y)?), r0, alpha, c_psi, tail_exponent)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }

    pub fn with_c_psi(&self, c_psi: f64) -> Self {
        Self { c_psi, ..self.clone() }
    }

    /// ψ(r); beyond R0 the extension ψ(R0)(r/R0)^tail_exponent.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return arg(format!("psi requires r > 0, got {r}"));
        }
        let v = if r <= self.r0 {
            self.shape.eval(r)
        } else {
            self.shape.eval(self.r0) * (r / self.r0).powf(self.tail_exponent)
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(ShcError::InvalidProfile(format!("psi({r}) = {v}")));
        }
        Ok(v)
    }

    /// Unchecked evaluation for hot loops on already validated radii.
    #[inline]
    pub(crate) fn eval_fast(&self, r: f64) -> f64 {
        if r <= self.r0 {
            self.shape.eval(r)
        } else {
            self.shape.eval(self.r0) * (r / self.r0).powf(self.tail_exponent)
        }
    }

    /// Smallest (ψ(R)/ψ(r))(r/R)^α over the log-spaced pairs of
    /// [r0·1e-6, r0), scaled by `safety`; a data-driven C_ψ.
    pub fn empirical_c_psi(&self, points: usize, safety: f64) -> Result<f64> {
        let pairs = log_pairs(self.r0 * 1e-6, self.r0 * (1.0 - 1e-9), points);
        let rep = verify_wlsc(&self.with_c_psi(1.0), &pairs)?;
        Ok((rep.min_ratio * safety).min(1.0))
    }
}

pub fn eval_psi(profile: &ScalingProfile, r: f64) -> Result<f64> {
    profile.eval(r)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct WlscReport {
    pub min_ratio: f64,
    pub argmin: (f64, f64),
    pub alpha: f64,
    pub c_psi: f64,
    pub pass: bool,
}

/// All pairs r < R drawn from `points` log-spaced radii in [lo, hi].
pub fn log_pairs(lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = (0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points.max(2) - 1) as f64))
        .collect();
    let mut out = Vec::with_capacity(points * points / 2);
    for i in 0..points {
        for j in i + 1..points {
            out.push((xs[i], xs[j]));
        }
    }
    out
}

pub fn verify_wlsc(profile: &ScalingProfile, grid: &[(f64, f64)]) -> Result<WlscReport> {
    if grid.is_empty() {
        return arg("verify_wlsc needs a non-empty grid");
    }
    let mut min_ratio = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    for &(r, big) in grid {
        if !(r > 0.0 && r <= big && big < profile.r0) {
            return arg(format!("pair ({r}, {big}) violates 0 < r <= R < R0"));
        }
        let ratio = profile.eval(big)? / profile.eval(r)? * (r / big).powf(profile.alpha);
        if ratio < min_ratio {
            min_ratio = ratio;
            argmin = (r, big);
        }
    }
    Ok(WlscReport {
        min_ratio,
        argmin,
        alpha: profile.alpha,
        c_psi: profile.c_psi,
        pass: min_ratio >= profile.c_psi * (1.0 - 1e-12),
    })
}
