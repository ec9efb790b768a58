use super::{elapsed_ms, Estimate};
use crate::error::{arg, Result, ShcError};
use crate::geometry::{layer_jacobian, surface_quadrature, Domain, DomainKind};
use crate::levy_models::{omega, unit_vector, LevyModel, RadialDensity, RadiusTable};
use crate::quadrature::{adaptive, gl16, GradedMesh};
use crate::rng::{derive_seed_indexed, unit_stream};
use crate::scale_kernel::{classify_variation, radial_tail_integral, Variation};
use crate::stats::{chunked, linear_fit};
use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const NODES_PER_DECADE: f64 = 60.0;

/// T(r) = ∫_r^∞ j(s) s^{d−1} ds on a log grid, so that J(B(0,r)^c) = ω_d T(r).
#[derive(Debug, Clone)]
pub struct TailTable {
    ln_r: Vec<f64>,
    t: Vec<f64>,
    ln_t: Vec<f64>,
    r0: f64,
    /// T(r) = far.0 (r0/r)^far.1 beyond r0
    far: Option<(f64, f64)>,
    scale: f64,
}

impl TailTable {
    pub fn new(j: &RadialDensity, r_lo: f64) -> Result<Self> {
        let p = &j.profile;
        if !(r_lo > 0.0 && r_lo < p.r0) {
            return arg(format!("tail table needs 0 < r_lo < R0, got {r_lo}"));
        }
        let n = (((p.r0 / r_lo).log10() * NODES_PER_DECADE).ceil() as usize).max(2);
        let r: Vec<f64> = (0..=n).map(|k| r_lo * (p.r0 / r_lo).powf(k as f64 / n as f64)).collect();
        let far = if j.truncated { None } else { Some((radial_tail_integral(j, p.r0)?, p.tail_exponent)) };
        let mut t = vec![0.0; n + 1];
        t[n] = far.map_or(0.0, |f| f.0);
        for k in (0..n).rev() {
            t[k] = t[k + 1] + gl16().integrate(|s| j.shell_weight(s), r[k], r[k + 1]);
        }
        if !t.iter().all(|v| v.is_finite()) {
            return Err(ShcError::InvalidModel("tail integral is not finite".into()));
        }
        Ok(Self {
            ln_r: r.iter().map(|x| x.ln()).collect(),
            ln_t: t.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect(),
            t,
            r0: p.r0,
            far,
            scale: j.scale,
        })
    }

    pub fn for_model(model: &LevyModel) -> Result<Self> {
        let j = model.density().ok_or_else(|| ShcError::InvalidModel("model has no jump part".into()))?;
        Self::new(j, j.profile.r0 * 1e-14)
    }

    pub fn density_scale(&self) -> f64 {
        self.scale
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.r0 {
            return self.far.map_or(0.0, |(c, g)| c * (self.r0 / r).powf(g));
        }
        let lr = r.ln();
        let n = self.ln_r.len() - 1;
        let k = if lr <= self.ln_r[0] { 0 } else { (self.ln_r.partition_point(|&x| x < lr) - 1).min(n - 1) };
        let (a, b) = (k, k + 1);
        let x = (lr - self.ln_r[a]) / (self.ln_r[b] - self.ln_r[a]);
        if self.t[b] > 0.0 {
            (self.ln_t[a] + x * (self.ln_t[b] - self.ln_t[a])).exp()
        } else {
            (self.t[a] + x * (self.t[b] - self.t[a])).max(0.0)
        }
    }

    /// ∫_{⟨z,ν⟩>s} J(dz) = ω_{d−1} ∫_0^{π/2} T(s/cos ϑ) sin^{d−2}ϑ dϑ.
    pub fn flat_kernel(&self, dim: usize, s: f64, rtol: f64) -> f64 {
        let f = |th: f64| {
            let c = th.cos();
            if c <= 0.0 {
                0.0
            } else {
                self.eval(s / c) * th.sin().powi(dim as i32 - 2)
            }
        };
        let tol = rtol * self.eval(s) * PI;
        omega(dim - 1) * adaptive(f, 0.0, 0.5 * PI, tol)
    }
}

/// Jump intensity toward a half-space at depth s.
pub fn flat_tail_kernel(model: &LevyModel, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return arg(format!("depth must be positive, got {s}"));
    }
    let table = TailTable::for_model(model)?;
    Ok(table.flat_kernel(model.dim(), s, 1e-10))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerimeterMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerimeterBudget {
    /// samples per cutoff level (MonteCarlo)
    pub n_paths: u64,
    /// cutoff ladder relative to the domain radius
    pub deltas: Vec<f64>,
    pub rtol: f64,
    /// surface and interior resolution for implicit domains (Quadrature)
    pub surface_nodes: usize,
    pub interior_points: u64,
    pub seed: u64,
}

impl Default for PerimeterBudget {
    fn default() -> Self {
        Self {
            n_paths: 1_000_000,
            deltas: vec![1e-2, 1e-3, 1e-4],
            rtol: 1e-7,
            surface_nodes: 128,
            interior_points: 1 << 12,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerimeterLevel {
    pub delta: f64,
    /// ∫_0^δ dr/ψ(r)
    pub g: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerimeterReport {
    pub estimate: Estimate,
    pub method: PerimeterMethod,
    pub levels: Vec<PerimeterLevel>,
    /// fitted K in Per_δ ≈ Per − K g(δ)
    pub fitted_slope: Option<f64>,
    /// |∂D| · scale · ω_{d−1}/(d−1)
    pub boundary_slope: Option<f64>,
}

/// Per_X(D) = ∫_D ∫_{D^c} J(y − x) dy dx.
pub fn perimeter(model: &LevyModel, domain: &Domain, method: PerimeterMethod, budget: &PerimeterBudget) -> Result<PerimeterReport> {
    if model.dim() != domain.dim() {
        return arg(format!("model dimension {} differs from domain dimension {}", model.dim(), domain.dim()));
    }
    if !domain.is_bounded() {
        return Err(ShcError::UnboundedDomain);
    }
    let class = classify_variation(model, None)?;
    if class.kind == Variation::UnboundedVariation {
        return Err(ShcError::DivergentPerimeter);
    }
    let start = std::time::Instant::now();
    let mut report = match method {
        PerimeterMethod::Quadrature => quadrature(model, domain, budget)?,
        PerimeterMethod::MonteCarlo => monte_carlo(model, domain, budget)?,
    };
    report.estimate.wall_ms = elapsed_ms(start);
    Ok(report)
}

fn quadrature(model: &LevyModel, domain: &Domain, budget: &PerimeterBudget) -> Result<PerimeterReport> {
    let table = TailTable::for_model(model)?;
    let d = domain.dim();
    let (value, stderr) = match domain.kind() {
        DomainKind::Ball { radius, .. } => {
            let q = ball_quadrature(&table, d, *radius, budget.rtol)?;
            let qf = ball_quadrature(&table, d, *radius, budget.rtol / 100.0)?;
            (qf, (q - qf).abs())
        }
        DomainKind::Implicit { .. } if d == 2 => implicit_quadrature(&table, domain, budget)?,
        DomainKind::Implicit { .. } => {
            return Err(ShcError::Precondition(
                "perimeter quadrature on implicit domains is available in d = 2; use the Monte Carlo method".into(),
            ))
        }
        DomainKind::HalfSpace { .. } => return Err(ShcError::UnboundedDomain),
    };
    Ok(PerimeterReport {
        estimate: Estimate { value, stderr, n_samples: 0, seed: budget.seed, wall_ms: 0 },
        method: PerimeterMethod::Quadrature,
        levels: Vec::new(),
        fitted_slope: None,
        boundary_slope: None,
    })
}

/// Depth below which the boundary is treated as flat.
fn flat_depth(r: f64) -> f64 {
    1e-10 * r
}

/// |∂B| ∫_0^R κ(R−s)(1−s/R)^{d−1} ds with κ(p) the jump intensity out of
/// the ball from a point at distance p from the centre.
fn ball_quadrature(table: &TailTable, d: usize, r: f64, rtol: f64) -> Result<f64> {
    let sd = omega(d - 1);
    let kappa = |s: f64| -> f64 {
        if s < flat_depth(r) {
            return table.flat_kernel(d, s, rtol);
        }
        let p = r - s;
        let c2 = s * (2.0 * r - s);
        let ray = |th: f64| -> f64 {
            let (sn, cs) = th.sin_cos();
            let root = (r * r - p * p * sn * sn).max(0.0).sqrt();
            if cs > 0.0 {
                c2 / (p * cs + root)
            } else {
                root - p * cs
            }
        };
        let f = |th: f64| table.eval(ray(th)) * th.sin().powi(d as i32 - 2);
        let tol = rtol * table.eval(s) * PI;
        sd * (adaptive(f, 0.0, 0.5 * PI, 0.5 * tol) + adaptive(f, 0.5 * PI, PI, 0.5 * tol))
    };
    let area = omega(d) * r.powi(d as i32 - 1);
    let inner = GradedMesh::with_rtol(rtol).from_zero(|s| kappa(s) * (1.0 - s / r).powi(d as i32 - 1), r)?;
    Ok(area * inner.value)
}

/// Distance from x to ∂D along θ for a convex domain containing x.
fn ray_exit(domain: &Domain, x: &[f64], th: &[f64], hi: f64) -> f64 {
    let mut p = [0.0; 8];
    let d = x.len();
    let mut f = |r: f64| {
        for i in 0..d {
            p[i] = x[i] + r * th[i];
        }
        domain.signed_distance(&p[..d])
    };
    let (mut a, mut b) = ((-f(0.0)).max(0.0), hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa >= 0.0 {
        return a;
    }
    // Illinois regula falsi
    let mut side = 0;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c);
        if fc.abs() <= 1e-13 * hi || (b - a) <= 1e-14 * hi {
            return c;
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// κ(x) = ∫_{S^1} T(ρ(x, θ)) dθ in the plane, split at the direction `peak`.
fn kappa_2d(table: &TailTable, domain: &Domain, x: &[f64], peak: f64, diam: f64, tol: f64) -> f64 {
    let f = |a: f64| {
        let th = [a.cos(), a.sin()];
        table.eval(ray_exit(domain, x, &th, diam))
    };
    adaptive(f, peak, peak + PI, 0.5 * tol) + adaptive(f, peak - PI, peak, 0.5 * tol)
}

fn implicit_quadrature(table: &TailTable, domain: &Domain, budget: &PerimeterBudget) -> Result<(f64, f64)> {
    use rayon::prelude::*;
    let r = domain.r_ball();
    let a = 0.25 * r;
    let (lo, hi) = domain.bbox()?;
    let diam = 2.0 * lo.iter().zip(&hi).map(|(l, h)| (h - l).powi(2)).sum::<f64>().sqrt();
    let quad = surface_quadrature(domain, budget.surface_nodes)?;
    let rtol = budget.rtol.max(1e-6);
    let layer: Vec<f64> = (0..quad.len())
        .into_par_iter()
        .map(|k| -> Result<f64> {
            let (y, nu) = (&quad.nodes[k], &quad.normals[k]);
            let peak = nu[1].atan2(nu[0]);
            let v = GradedMesh::with_rtol(rtol).from_zero(
                |s| {
                    if s < flat_depth(r) {
                        return table.flat_kernel(2, s, rtol);
                    }
                    let x = [y[0] - s * nu[0], y[1] - s * nu[1]];
                    kappa_2d(table, domain, &x, peak, diam, rtol * table.eval(s) * PI) * layer_jacobian(domain, y, nu, s)
                },
                a,
            )?;
            Ok(quad.weights[k] * v.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let layer: f64 = layer.iter().sum();
    let interior = domain.qmc_integral(budget.interior_points, |x| {
        let depth = -domain.signed_distance(x);
        if depth <= a {
            return 0.0;
        }
        kappa_2d(table, domain, x, 0.0, diam, rtol * table.eval(depth) * PI)
    })?;
    let value = layer + interior.value;
    let se = (interior.stderr.powi(2) + (layer * quad.tolerance / 3.0).powi(2)).sqrt();
    Ok((value, se))
}

fn monte_carlo(model: &LevyModel, domain: &Domain, budget: &PerimeterBudget) -> Result<PerimeterReport> {
    let j = model.density().ok_or_else(|| ShcError::InvalidModel("model has no jump part".into()))?;
    if budget.deltas.len() < 2 || budget.deltas.iter().any(|d| !(*d > 0.0)) {
        return arg("Monte Carlo perimeter needs at least two positive cutoffs");
    }
    if budget.n_paths < 100 {
        return arg("Monte Carlo perimeter needs at least 100 samples per cutoff");
    }
    let d = domain.dim();
    if d > 8 {
        return arg("Monte Carlo perimeter supports d <= 8");
    }
    let r = domain.r_ball();
    let vol = domain.volume()?;
    let profile = &j.profile;
    let mut levels = Vec::new();
    for (i, rel) in budget.deltas.iter().enumerate() {
        let delta = rel * r;
        let table = RadiusTable::new(j, delta)?;
        let norm = vol.value * omega(d) * table.tail_integral;
        let task = derive_seed_indexed(budget.seed, "perimeter-mc", i as u64);
        let [acc] = chunked::<1, _>(budget.n_paths, |k, acc| {
            let mut rng = unit_stream(task, k);
            let mut x = [0.0; 8];
            let mut u = [0.0; 8];
            domain.sample_uniform(&mut rng, &mut x[..d]).expect("bounded domain admits uniform sampling");
            let rad = table.radius(rng.sample(Open01));
            unit_vector(&mut rng, &mut u[..d]);
            for k in 0..d {
                x[k] += rad * u[k];
            }
            acc[0].push(if domain.contains(&x[..d]) { 0.0 } else { 1.0 });
        });
        if acc.mean == 0.0 {
            return Err(ShcError::Quality(format!("no boundary crossings at cutoff {delta:e}; raise n_paths")));
        }
        let se = norm * acc.stderr();
        let se = (se * se + (norm * acc.mean * vol.stderr / vol.value).powi(2)).sqrt();
        let g = GradedMesh::default().from_zero(|s| 1.0 / profile.eval(s).unwrap_or(f64::NAN), delta.min(profile.r0))?.value
            + if delta > profile.r0 {
                GradedMesh::default().finite(|s| 1.0 / profile.eval(s).unwrap_or(f64::NAN), profile.r0, delta)?
            } else {
                0.0
            };
        levels.push(PerimeterLevel { delta, g, value: norm * acc.mean, stderr: se });
    }
    let x: Vec<f64> = levels.iter().map(|l| l.g).collect();
    let y: Vec<f64> = levels.iter().map(|l| l.value).collect();
    let w: Vec<f64> = levels.iter().map(|l| 1.0 / l.stderr.powi(2)).collect();
    let fit = linear_fit(&x, &y, &w).ok_or_else(|| ShcError::Numeric {
        what: "perimeter extrapolation".into(),
        diagnostics: "degenerate cutoff ladder".into(),
    })?;
    let stderr = fit
        .intercept_weights
        .iter()
        .zip(&levels)
        .map(|(c, l)| (c * l.stderr).powi(2))
        .sum::<f64>()
        .sqrt();
    let area = match domain.kind() {
        DomainKind::Ball { radius, .. } => omega(d) * radius.powi(d as i32 - 1),
        _ => surface_quadrature(domain, 4096)?.total(),
    };
    Ok(PerimeterReport {
        estimate: Estimate {
            value: fit.intercept,
            stderr,
            n_samples: budget.n_paths * levels.len() as u64,
            seed: budget.seed,
            wall_ms: 0,
        },
        method: PerimeterMethod::MonteCarlo,
        levels,
        fitted_slope: Some(-fit.slope),
        boundary_slope: Some(area * j.scale * omega(d - 1) / (d - 1) as f64),
    })
}
