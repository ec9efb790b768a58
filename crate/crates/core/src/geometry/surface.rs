use super::domain::{Domain, DomainKind};
use super::qmc::halton_into;
use crate::error::{arg, Result, ShcError};
use crate::levy_models::{omega, unit_vector};
use crate::quadrature::gl16;
use crate::Outcome;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SurfaceQuadrature {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub normals: Vec<Vec<f64>>,
    /// declared relative accuracy of Σw as an estimate of |∂D|
    pub tolerance: f64,
}

impl SurfaceQuadrature {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate<F: FnMut(&[f64], &[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.normals)
            .zip(&self.weights)
            .map(|((y, n), w)| w * f(y, n))
            .sum()
    }
}

pub fn surface_quadrature(domain: &Domain, n_nodes: usize) -> Result<SurfaceQuadrature> {
    if n_nodes == 0 {
        return arg("surface quadrature needs at least one node");
    }
    let d = domain.dim();
    match domain.kind() {
        DomainKind::HalfSpace { .. } => Err(ShcError::UnboundedDomain),
        DomainKind::Ball { center, radius } => {
            let dirs = sphere_points(d, n_nodes);
            let w = omega(d) * radius.powi(d as i32 - 1) / n_nodes as f64;
            let nodes = dirs.iter().map(|u| u.iter().zip(center).map(|(u, c)| c + radius * u).collect()).collect();
            Ok(SurfaceQuadrature { nodes, weights: vec![w; n_nodes], normals: dirs, tolerance: 1e-12 })
        }
        DomainKind::Implicit { .. } => shell_quadrature(domain, n_nodes),
    }
}

/// Equal-area directions: equispaced angles (d = 2), a Fibonacci lattice
/// (d = 3), normalised Gaussian Halton points otherwise.
pub fn sphere_points(d: usize, n: usize) -> Vec<Vec<f64>> {
    match d {
        2 => (0..n)
            .map(|i| {
                let t = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let ga = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = ga * i as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        _ => {
            let m = d.div_ceil(2) * 2;
            let mut u = vec![0.0; m];
            (0..n)
                .map(|i| {
                    halton_into(i as u64, &[], &mut u);
                    let mut v: Vec<f64> = (0..d)
                        .map(|k| {
                            let (a, b) = (u[2 * (k / 2)].max(1e-300), u[2 * (k / 2) + 1]);
                            let r = (-2.0 * a.ln()).sqrt();
                            if k % 2 == 0 { r * (2.0 * PI * b).cos() } else { r * (2.0 * PI * b).sin() }
                        })
                        .collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|x| *x /= n);
                    v
                })
                .collect()
        }
    }
}

/// Shell sampling of {|d| < h}: Halton points in the bounding box, counted
/// only inside coarse cells that meet the boundary, projected onto ∂D and
/// weighted by box volume / (N·2h).
fn shell_quadrature(domain: &Domain, n_nodes: usize) -> Result<SurfaceQuadrature> {
    let d = domain.dim();
    let r = domain.r_ball();
    let h = 1e-3 * r;
    let (mut lo, mut hi) = domain.bbox()?;
    for j in 0..d {
        lo[j] -= 4.0 * h;
        hi[j] += 4.0 * h;
    }
    let m: usize = match d {
        2 => 256,
        3 => 48,
        _ => 12,
    };
    let side: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / m as f64).collect();
    let half_diag = 0.5 * side.iter().map(|s| s * s).sum::<f64>().sqrt();
    let cells = m.pow(d as u32);
    let mut keep = vec![false; cells];
    let mut c = vec![0.0; d];
    for (idx, k) in keep.iter_mut().enumerate() {
        let mut rest = idx;
        for j in 0..d {
            c[j] = lo[j] + side[j] * ((rest % m) as f64 + 0.5);
            rest /= m;
        }
        *k = domain.signed_distance(&c).abs() <= half_diag + h;
    }
    let box_vol: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut x = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut hits: Vec<Vec<f64>> = Vec::with_capacity(n_nodes);
    let mut i: u64 = 0;
    let cap: u64 = 1 << 30;
    while hits.len() < n_nodes {
        if i >= cap {
            return Err(ShcError::Quality(format!("only {} shell points after {cap} samples", hits.len())));
        }
        halton_into(i, &[], &mut u);
        i += 1;
        let mut idx = 0;
        let mut stride = 1;
        for j in 0..d {
            x[j] = lo[j] + u[j] * (hi[j] - lo[j]);
            let cj = ((u[j] * m as f64) as usize).min(m - 1);
            idx += cj * stride;
            stride *= m;
        }
        if !keep[idx] {
            continue;
        }
        if domain.signed_distance(&x).abs() < h {
            hits.push(x.clone());
        }
    }
    let w = box_vol / (i as f64 * 2.0 * h);
    let mut nodes = Vec::with_capacity(hits.len());
    let mut normals = Vec::with_capacity(hits.len());
    let mut failures = 0usize;
    for p in &hits {
        match domain.boundary_projection(p) {
            Ok(pr) => {
                nodes.push(pr.y);
                normals.push(pr.nu);
            }
            Err(_) => failures += 1,
        }
    }
    if failures as f64 > 1e-3 * hits.len() as f64 {
        return Err(ShcError::Quality(format!("{failures} of {} projections failed", hits.len())));
    }
    // failed points are dropped; rescale so Σw still counts every shell hit
    let w = w * hits.len() as f64 / nodes.len() as f64;
    let tolerance = 3.0 / (nodes.len() as f64).sqrt();
    Ok(SurfaceQuadrature { weights: vec![w; nodes.len()], nodes, normals, tolerance })
}

/// A point of the boundary layer D∖D_a in coordinates (y, s).
#[derive(Debug, Clone)]
pub struct LayerSample {
    pub y: Vec<f64>,
    pub nu: Vec<f64>,
    pub s: f64,
    pub x: Vec<f64>,
    /// |∂D|·a for uniform depth, the coarea weight of the (y, s) product measure
    pub weight: f64,
    /// Jacobian of (y, s) ↦ y − sν(y), in [((R−a)/R)^{d−1}, 1]
    pub jacobian: f64,
}

/// Draws (y, s) from the normalised surface measure × uniform(0, a).
#[derive(Debug, Clone)]
pub struct LayerSampler {
    domain: Domain,
    a: f64,
    quad: Option<SurfaceQuadrature>,
    cdf: Vec<f64>,
    area: f64,
}

impl LayerSampler {
    pub fn new(domain: &Domain, a: f64, nodes: usize) -> Result<Self> {
        let r = domain.r_ball();
        if !(a > 0.0 && a < r / 2.0) {
            return arg(format!("layer width must lie in (0, R/2) = (0, {}), got {a}", r / 2.0));
        }
        let (quad, area) = match domain.kind() {
            DomainKind::Ball { radius, .. } => (None, omega(domain.dim()) * radius.powi(domain.dim() as i32 - 1)),
            // unit patch of the boundary plane
            DomainKind::HalfSpace { .. } => (None, 1.0),
            DomainKind::Implicit { .. } => {
                let q = surface_quadrature(domain, nodes)?;
                let t = q.total();
                (Some(q), t)
            }
        };
        let cdf = quad
            .as_ref()
            .map(|q| {
                let mut acc = 0.0;
                q.weights.iter().map(|w| {
                    acc += w;
                    acc / q.total()
                })
                .collect()
            })
            .unwrap_or_default();
        Ok(Self { domain: domain.clone(), a, quad, cdf, area })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn width(&self) -> f64 {
        self.a
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LayerSample {
        let s = self.a * rng.random::<f64>();
        self.sample_at(rng, s, self.area * self.a)
    }

    /// Depth drawn with density ∝ 1/(s + s0) on (0, a); the weight carries
    /// the likelihood ratio, so E[weight·f] is unchanged.
    pub fn sample_graded<R: Rng + ?Sized>(&self, rng: &mut R, s0: f64) -> LayerSample {
        let s0 = s0.clamp(1e-12 * self.a, self.a);
        let l = (self.a / s0).ln_1p();
        let s = s0 * (l * rng.random::<f64>()).exp_m1();
        self.sample_at(rng, s.min(self.a), self.area * (s + s0) * l)
    }

    fn sample_at<R: Rng + ?Sized>(&self, rng: &mut R, s: f64, weight: f64) -> LayerSample {
        let d = self.domain.dim();
        let (y, nu) = match self.domain.kind() {
            DomainKind::Ball { center, radius } => {
                let mut u = vec![0.0; d];
                unit_vector(rng, &mut u);
                (u.iter().zip(center).map(|(u, c)| c + radius * u).collect::<Vec<_>>(), u)
            }
            DomainKind::HalfSpace { point, normal } => {
                let basis = tangent_basis(normal);
                let mut y = point.clone();
                for b in &basis {
                    let c = rng.random::<f64>() - 0.5;
                    for j in 0..d {
                        y[j] += c * b[j];
                    }
                }
                (y, normal.clone())
            }
            DomainKind::Implicit { .. } => {
                let q = self.quad.as_ref().expect("implicit layer sampler has a quadrature");
                let u: f64 = rng.random();
                let k = self.cdf.partition_point(|&c| c < u).min(q.len() - 1);
                (q.nodes[k].clone(), q.normals[k].clone())
            }
        };
        let x: Vec<f64> = y.iter().zip(&nu).map(|(y, n)| y - s * n).collect();
        let jacobian = self.jacobian(&y, &nu, s);
        LayerSample { y, nu, s, x, weight, jacobian }
    }

    /// exp(−∫_0^s Δd(y − uν) du); closed form for balls.
    pub fn jacobian(&self, y: &[f64], nu: &[f64], s: f64) -> f64 {
        layer_jacobian(&self.domain, y, nu, s)
    }
}

pub fn layer_jacobian(domain: &Domain, y: &[f64], nu: &[f64], s: f64) -> f64 {
    match domain.kind() {
        DomainKind::Ball { radius, .. } => ((radius - s) / radius).powi(domain.dim() as i32 - 1),
        DomainKind::HalfSpace { .. } => 1.0,
        DomainKind::Implicit { .. } => {
            if s == 0.0 {
                return 1.0;
            }
            let mut p = vec![0.0; y.len()];
            let lap = gl16().integrate(
                |u| {
                    for j in 0..y.len() {
                        p[j] = y[j] - u * nu[j];
                    }
                    domain.laplacian(&p)
                },
                0.0,
                s,
            );
            (-lap).exp()
        }
    }
}

pub fn layer_sample<R: Rng + ?Sized>(domain: &Domain, a: f64, rng: &mut R) -> Result<LayerSample> {
    Ok(LayerSampler::new(domain, a, 4096)?.sample(rng))
}

/// Orthonormal basis of the hyperplane orthogonal to `n`.
pub fn tangent_basis(n: &[f64]) -> Vec<Vec<f64>> {
    let d = n.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for k in 0..d {
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        let proj = |v: &mut Vec<f64>, b: &[f64]| {
            let c: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(b).for_each(|(a, b)| *a -= c * b);
        };
        proj(&mut v, n);
        for b in &out {
            proj(&mut v, b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|a| *a /= norm);
            out.push(v);
        }
        if out.len() == d - 1 {
            break;
        }
    }
    out
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SandwichReport {
    pub volume_integral: f64,
    pub volume_stderr: f64,
    pub layer_integral: f64,
    pub layer_tolerance: f64,
    pub ratio: f64,
    pub ratio_band: f64,
    pub lower: f64,
    pub upper: f64,
    pub outcome: Outcome,
}

/// Compares ∫_{D∖D_a} f dx (randomised QMC) with ∫_0^a∫_{∂D} f(y − sν) dS ds
/// (surface quadrature × Gauss–Legendre) against the sandwich factors.
pub fn coarea_sandwich_check<F>(domain: &Domain, f: F, bound: f64, a: f64) -> Result<SandwichReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    coarea_sandwich_check_with(domain, f, bound, a, 1 << 20, 4096)
}

pub fn coarea_sandwich_check_with<F>(
    domain: &Domain,
    f: F,
    bound: f64,
    a: f64,
    qmc_points: u64,
    surface_nodes: usize,
) -> Result<SandwichReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let r = domain.r_ball();
    if !(a > 0.0 && a < r / 2.0) {
        return arg(format!("layer width must lie in (0, R/2), got {a}"));
    }
    let d = domain.dim() as i32;
    let vol = domain.qmc_integral(qmc_points, |x| {
        let sd = domain.signed_distance(x);
        if sd < 0.0 && sd > -a {
            let v = f(x);
            debug_assert!(v.abs() <= bound * (1.0 + 1e-12));
            v
        } else {
            0.0
        }
    })?;
    let quad = surface_quadrature(domain, surface_nodes)?;
    let rule = gl16();
    let panels = 4;
    let mut layer = 0.0;
    let mut x = vec![0.0; domain.dim()];
    for p in 0..panels {
        let (s0, s1) = (a * p as f64 / panels as f64, a * (p + 1) as f64 / panels as f64);
        layer += rule.integrate(
            |s| {
                quad.integrate(|y, n| {
                    for j in 0..x.len() {
                        x[j] = y[j] - s * n[j];
                    }
                    f(&x)
                })
            },
            s0,
            s1,
        );
    }
    let lower = ((r - a) / r).powi(d - 1);
    let upper = (r / (r - a)).powi(d - 1);
    let ratio = vol.value / layer;
    let layer_tol = quad.tolerance * layer.abs();
    let ratio_band = 3.0 * ratio.abs() * ((vol.stderr / vol.value).powi(2) + (layer_tol / layer).powi(2)).sqrt();
    let outcome = if ratio - ratio_band >= lower && ratio + ratio_band <= upper {
        Outcome::Pass
    } else if ratio + ratio_band < lower || ratio - ratio_band > upper {
        Outcome::Fail
    } else {
        Outcome::Inconclusive
    };
    Ok(SandwichReport {
        volume_integral: vol.value,
        volume_stderr: vol.stderr,
        layer_integral: layer,
        layer_tolerance: layer_tol,
        ratio,
        ratio_band,
        lower,
        upper,
        outcome,
    })
}
