use super::qmc::{halton_into, max_dim};
use super::sdf::SdfShape;
use crate::error::{arg, Result, ShcError};
use crate::levy_models::omega;
use crate::rng::unit_stream;
use rand::Rng;
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone)]
pub enum DomainKind {
    Ball { center: Vec<f64>, radius: f64 },
    /// {x : ⟨x − point, normal⟩ < 0}, `normal` outward
    HalfSpace { point: Vec<f64>, normal: Vec<f64> },
    Implicit { sdf: SdfShape, r_ball: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone)]
pub struct Domain {
    kind: DomainKind,
    dim: usize,
    volume: Arc<OnceLock<VolumeEstimate>>,
}

pub const QMC_VOLUME_POINTS: u64 = 1 << 20;
const QMC_SHIFTS: u64 = 16;

impl Domain {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() < 2 {
            return arg("domains need dimension at least 2");
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return arg(format!("ball radius must be positive, got {radius}"));
        }
        let dim = center.len();
        Ok(Self::from_kind(DomainKind::Ball { center, radius }, dim))
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(vec![0.0; dim], 1.0).expect("valid unit ball")
    }

    pub fn half_space(point: Vec<f64>, normal: Vec<f64>) -> Result<Self> {
        let dim = point.len();
        if dim < 2 || normal.len() != dim {
            return arg("half-space point and normal must share a dimension of at least 2");
        }
        let n = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return arg("half-space normal must be non-zero");
        }
        let normal = normal.iter().map(|v| v / n).collect();
        Ok(Self::from_kind(DomainKind::HalfSpace { point, normal }, dim))
    }

    /// Implicit domain with a user-declared R-ball parameter, spot-checked
    /// against the curvature of the distance field.
    pub fn implicit(sdf: SdfShape, r_ball: f64) -> Result<Self> {
        let dim = sdf.dim();
        if dim < 2 || dim > max_dim() {
            return arg(format!("implicit domains support dimensions 2..={}", max_dim()));
        }
        if !(r_ball > 0.0) {
            return arg("declared R must be positive");
        }
        let d = Self::from_kind(DomainKind::Implicit { sdf, r_ball }, dim);
        let probe = d.curvature_probe(64)?;
        if r_ball > probe * (1.0 + 1e-3) {
            return arg(format!("declared R = {r_ball} exceeds the smallest probed curvature radius {probe:.6}"));
        }
        Ok(d)
    }

    fn from_kind(kind: DomainKind, dim: usize) -> Self {
        Self { kind, dim, volume: Arc::new(OnceLock::new()) }
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, DomainKind::HalfSpace { .. })
    }

    /// Interior/exterior ball radius R (infinite for a half-space).
    pub fn r_ball(&self) -> f64 {
        match &self.kind {
            DomainKind::Ball { radius, .. } => *radius,
            DomainKind::HalfSpace { .. } => f64::INFINITY,
            DomainKind::Implicit { r_ball, .. } => *r_ball,
        }
    }

    /// The domain dilated by c about the origin.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.kind {
            DomainKind::Ball { center, radius } => Self::ball(center.iter().map(|v| v * c).collect(), radius * c),
            DomainKind::HalfSpace { point, normal } => {
                Self::half_space(point.iter().map(|v| v * c).collect(), normal.clone())
            }
            DomainKind::Implicit { sdf, r_ball } => Self::implicit(sdf.scaled(c), r_ball * c),
        }
    }

    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                let mut s = 0.0;
                for i in 0..self.dim {
                    let v = x[i] - center[i];
                    s += v * v;
                }
                s.sqrt() - radius
            }
            DomainKind::HalfSpace { point, normal } => {
                let mut s = 0.0;
                for i in 0..self.dim {
                    s += (x[i] - point[i]) * normal[i];
                }
                s
            }
            DomainKind::Implicit { sdf, .. } => sdf.eval(x),
        }
    }

    #[inline]
    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) < 0.0
    }

    /// ∇d, exact for Ball/HalfSpace and by central differences otherwise.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            DomainKind::Ball { center, .. } => {
                let v: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                if n == 0.0 {
                    let mut e = vec![0.0; self.dim];
                    e[0] = 1.0;
                    e
                } else {
                    v.iter().map(|a| a / n).collect()
                }
            }
            DomainKind::HalfSpace { normal, .. } => normal.clone(),
            DomainKind::Implicit { sdf, .. } => {
                let h = 1e-6 * self.r_ball().max(1e-3);
                let mut y = x.to_vec();
                (0..self.dim)
                    .map(|i| {
                        y[i] = x[i] + h;
                        let a = sdf.eval(&y);
                        y[i] = x[i] - h;
                        let b = sdf.eval(&y);
                        y[i] = x[i];
                        (a - b) / (2.0 * h)
                    })
                    .collect()
            }
        }
    }

    /// Δd by central differences (exact expression for a ball).
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DomainKind::Ball { center, .. } => {
                let n = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                (self.dim as f64 - 1.0) / n
            }
            DomainKind::HalfSpace { .. } => 0.0,
            DomainKind::Implicit { sdf, .. } => {
                let h = 1e-4 * self.r_ball();
                let f0 = sdf.eval(x);
                let mut y = x.to_vec();
                let mut s = 0.0;
                for i in 0..self.dim {
                    y[i] = x[i] + h;
                    let a = sdf.eval(&y);
                    y[i] = x[i] - h;
                    let b = sdf.eval(&y);
                    y[i] = x[i];
                    s += (a - 2.0 * f0 + b) / (h * h);
                }
                s
            }
        }
    }

    /// (y, ν, δ) with x = y − δν, y ∈ ∂D, ν the outward normal at y.
    pub fn boundary_projection(&self, x: &[f64]) -> Result<Projection> {
        if x.len() != self.dim {
            return arg("point has the wrong dimension");
        }
        let sd = self.signed_distance(x);
        let r = self.r_ball();
        if sd.abs() >= r {
            return Err(ShcError::NonUniqueProjection { depth: sd.abs(), r_ball: r });
        }
        let delta = -sd;
        match &self.kind {
            DomainKind::Ball { .. } | DomainKind::HalfSpace { .. } => {
                let nu = self.gradient(x);
                let y = x.iter().zip(&nu).map(|(a, n)| a + delta * n).collect();
                Ok(Projection { y, nu, delta })
            }
            DomainKind::Implicit { .. } => {
                let g = self.gradient(x);
                let g2: f64 = g.iter().map(|v| v * v).sum();
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - sd * b / g2).collect();
                let mut f = self.signed_distance(&y);
                for _ in 0..50 {
                    if f.abs() <= 1e-14 * r.max(1.0) {
                        break;
                    }
                    let g = self.gradient(&y);
                    let g2: f64 = g.iter().map(|v| v * v).sum();
                    let mut step = 1.0;
                    let mut improved = false;
                    for _ in 0..30 {
                        let cand: Vec<f64> = y.iter().zip(&g).map(|(a, b)| a - step * f * b / g2).collect();
                        let fc = self.signed_distance(&cand);
                        if fc.abs() < f.abs() {
                            y = cand;
                            f = fc;
                            improved = true;
                            break;
                        }
                        step *= 0.5;
                    }
                    if !improved {
                        break;
                    }
                }
                let g = self.gradient(&y);
                let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nu: Vec<f64> = g.iter().map(|v| v / n).collect();
                if f.abs() > 1e-8 {
                    return Err(ShcError::Numeric {
                        what: "boundary projection".into(),
                        diagnostics: format!("residual |d(y)| = {:e}", f.abs()),
                    });
                }
                Ok(Projection { y, nu, delta })
            }
        }
    }

    /// Bounding box (lo, hi) of a bounded domain.
    pub fn bbox(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            DomainKind::Ball { center, radius } => Ok((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            DomainKind::HalfSpace { .. } => Err(ShcError::UnboundedDomain),
            DomainKind::Implicit { sdf, .. } => Ok(sdf.bbox()),
        }
    }

    pub fn volume(&self) -> Result<VolumeEstimate> {
        match &self.kind {
            DomainKind::Ball { radius, .. } => {
                let d = self.dim;
                Ok(VolumeEstimate { value: omega(d) * radius.powi(d as i32) / d as f64, stderr: 0.0, n: 0 })
            }
            DomainKind::HalfSpace { .. } => Err(ShcError::UnboundedDomain),
            DomainKind::Implicit { .. } => {
                if let Some(v) = self.volume.get() {
                    return Ok(*v);
                }
                let v = self.qmc_volume(QMC_VOLUME_POINTS)?;
                Ok(*self.volume.get_or_init(|| v))
            }
        }
    }

    /// Randomised-QMC volume: 16 independently shifted Halton sets.
    pub fn qmc_volume(&self, n: u64) -> Result<VolumeEstimate> {
        self.qmc_integral(n, |x| if self.contains(x) { 1.0 } else { 0.0 })
    }

    /// ∫ over the bounding box of f by randomised QMC with stderr across
    /// the shifted replicates.
    pub fn qmc_integral<F: Fn(&[f64]) -> f64 + Sync>(&self, n: u64, f: F) -> Result<VolumeEstimate> {
        use rayon::prelude::*;
        let (lo, hi) = self.bbox()?;
        let d = self.dim;
        let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let per = (n / QMC_SHIFTS).max(1);
        let reps: Vec<f64> = (0..QMC_SHIFTS)
            .into_par_iter()
            .map(|k| {
                let mut rng = unit_stream(0x51AB_1E5E_ED00_0000, k);
                let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
                let mut u = vec![0.0; d];
                let mut x = vec![0.0; d];
                let mut s = 0.0;
                for i in 0..per {
                    halton_into(i, &shift, &mut u);
                    for j in 0..d {
                        x[j] = lo[j] + u[j] * (hi[j] - lo[j]);
                    }
                    s += f(&x);
                }
                s / per as f64 * box_vol
            })
            .collect();
        let m = reps.iter().sum::<f64>() / reps.len() as f64;
        let var = reps.iter().map(|r| (r - m).powi(2)).sum::<f64>() / (reps.len() - 1) as f64;
        Ok(VolumeEstimate { value: m, stderr: (var / reps.len() as f64).sqrt(), n: per * QMC_SHIFTS })
    }

    /// Uniform point in D (rejection from the bounding box for implicit
    /// domains).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        match &self.kind {
            DomainKind::Ball { center, radius } => {
                loop {
                    let mut n2 = 0.0;
                    for v in out.iter_mut() {
                        *v = 2.0 * rng.random::<f64>() - 1.0;
                        n2 += *v * *v;
                    }
                    if n2 < 1.0 {
                        break;
                    }
                }
                for (v, c) in out.iter_mut().zip(center) {
                    *v = c + radius * *v;
                }
                Ok(())
            }
            DomainKind::HalfSpace { .. } => Err(ShcError::UnboundedDomain),
            DomainKind::Implicit { sdf, .. } => {
                let (lo, hi) = sdf.bbox();
                for _ in 0..1_000_000 {
                    for j in 0..self.dim {
                        out[j] = lo[j] + rng.random::<f64>() * (hi[j] - lo[j]);
                    }
                    if sdf.eval(out) < 0.0 {
                        return Ok(());
                    }
                }
                Err(ShcError::Numeric { what: "uniform sampling".into(), diagnostics: "rejection failed".into() })
            }
        }
    }

    /// Smallest curvature radius found from the Hessian of d at `n`
    /// boundary points.
    pub fn curvature_probe(&self, n: usize) -> Result<f64> {
        let DomainKind::Implicit { sdf, r_ball } = &self.kind else {
            return Ok(self.r_ball());
        };
        let (lo, hi) = sdf.bbox();
        let c: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let d = self.dim;
        let mut rng = unit_stream(0xC0A7_0E55, 0);
        let mut best = f64::INFINITY;
        let h = 1e-3 * r_ball.min(1.0);
        let mut dir = vec![0.0; d];
        for _ in 0..n {
            crate::levy_models::unit_vector(&mut rng, &mut dir);
            // bisection along the ray from the centre for a boundary point
            let (mut a, mut b) = (0.0, lo.iter().zip(&hi).map(|(l, u)| u - l).fold(0.0, f64::max));
            let at = |t: f64| -> Vec<f64> { c.iter().zip(&dir).map(|(c, v)| c + t * v).collect() };
            if sdf.eval(&at(a)) >= 0.0 {
                continue;
            }
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if sdf.eval(&at(m)) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            let y = at(0.5 * (a + b));
            let mut hess = nalgebra::DMatrix::<f64>::zeros(d, d);
            let mut p = y.clone();
            for i in 0..d {
                for j in 0..d {
                    let mut f = |si: f64, sj: f64| {
                        p.copy_from_slice(&y);
                        p[i] += si * h;
                        p[j] += sj * h;
                        sdf.eval(&p)
                    };
                    hess[(i, j)] = (f(1.0, 1.0) - f(1.0, -1.0) - f(-1.0, 1.0) + f(-1.0, -1.0)) / (4.0 * h * h);
                }
            }
            let k = nalgebra::SymmetricEigen::new(hess).eigenvalues.abs().max();
            if k > 0.0 {
                best = best.min(1.0 / k);
            }
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub y: Vec<f64>,
    pub nu: Vec<f64>,
    pub delta: f64,
}

pub fn signed_distance(domain: &Domain, x: &[f64]) -> f64 {
    domain.signed_distance(x)
}

pub fn boundary_projection(domain: &Domain, x: &[f64]) -> Result<Projection> {
    domain.boundary_projection(x)
}

pub fn volume(domain: &Domain) -> Result<VolumeEstimate> {
    domain.volume()
}
