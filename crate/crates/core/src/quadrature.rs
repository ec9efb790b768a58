//! Gauss–Legendre rules, graded meshes toward singular endpoints and a small
//! adaptive bisection integrator.

use crate::error::{Result, ShcError};
use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let dx = pn / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }
}

pub fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

fn gl8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Graded-mesh integrator: panels shrink geometrically by `ratio` toward a
/// singular endpoint, each panel carries an order-16 Gauss–Legendre rule.
#[derive(Debug, Clone, Copy)]
pub struct GradedMesh {
    pub ratio: f64,
    pub rtol: f64,
    pub max_panels: usize,
}

impl Default for GradedMesh {
    fn default() -> Self {
        Self { ratio: 0.7, rtol: 1e-8, max_panels: 6000 }
    }
}

impl GradedMesh {
    pub fn with_rtol(rtol: f64) -> Self {
        Self { rtol, ..Self::default() }
    }

    /// ∫_0^r f, panels [r q^{k+1}, r q^k].
    pub fn from_zero<F: FnMut(f64) -> f64>(&self, mut f: F, r: f64) -> Result<QuadResult> {
        let q = self.ratio;
        self.sweep(
            |k| {
                let hi = r * q.powi(k as i32);
                (hi * q, hi)
            },
            &mut f,
            "integral toward 0",
        )
    }

    /// ∫_r^∞ f, panels [r q^{-k}, r q^{-k-1}].
    pub fn to_infinity<F: FnMut(f64) -> f64>(&self, mut f: F, r: f64) -> Result<QuadResult> {
        let q = self.ratio;
        self.sweep(
            |k| {
                let lo = r / q.powi(k as i32);
                (lo, lo / q)
            },
            &mut f,
            "integral toward infinity",
        )
    }

    fn sweep<P, F>(&self, panel: P, f: &mut F, what: &str) -> Result<QuadResult>
    where
        P: Fn(usize) -> (f64, f64),
        F: FnMut(f64) -> f64,
    {
        let rule = gl16();
        let mut total = 0.0;
        let mut prev: Option<f64> = None;
        let mut zeros = 0;
        for k in 0..self.max_panels {
            let (a, b) = panel(k);
            if !(a.is_finite() && b.is_finite()) || a < 1e-300 || b > 1e300 {
                return Ok(QuadResult { value: total, error: prev.unwrap_or(0.0).abs(), panels: k });
            }
            let p = rule.integrate(&mut *f, a, b);
            if !p.is_finite() {
                return Err(ShcError::Numeric {
                    what: what.into(),
                    diagnostics: format!("non-finite panel value on [{a:e}, {b:e}]"),
                });
            }
            total += p;
            if p == 0.0 {
                zeros += 1;
                if zeros >= 3 {
                    return Ok(QuadResult { value: total, error: 0.0, panels: k + 1 });
                }
                prev = Some(p);
                continue;
            }
            zeros = 0;
            if let Some(pp) = prev {
                if k >= 4 && pp != 0.0 {
                    let rho = p / pp;
                    if rho > 0.0 && rho < 1.0 {
                        let rem = p * rho / (1.0 - rho);
                        if rem.abs() <= self.rtol * total.abs() {
                            return Ok(QuadResult { value: total + rem, error: rem.abs(), panels: k + 1 });
                        }
                    }
                }
            }
            prev = Some(p);
        }
        Err(ShcError::Numeric {
            what: what.into(),
            diagnostics: format!(
                "no convergence after {} panels (running total {total:e}, last panel {:e})",
                self.max_panels,
                prev.unwrap_or(f64::NAN)
            ),
        })
    }

    /// ∫_a^b f on geometric panels, suited to power-like integrands on
    /// ranges spanning decades. Requires 0 ≤ a ≤ b.
    pub fn finite<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        if a <= 0.0 {
            return self.from_zero(f, b).map(|r| r.value);
        }
        let rule = gl16();
        let n = ((b / a).ln() / (1.0 / self.ratio).ln()).ceil().max(1.0) as usize;
        let step = (b / a).powf(1.0 / n as f64);
        let mut lo = a;
        let mut s = 0.0;
        for i in 0..n {
            let hi = if i + 1 == n { b } else { lo * step };
            s += rule.integrate(&mut f, lo, hi);
            lo = hi;
        }
        Ok(s)
    }
}

/// Recursive bisection comparing order-16 against order-8 on each piece.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let hi = gl16().integrate(&mut *f, a, b);
        let lo = gl8().integrate(&mut *f, a, b);
        if (hi - lo).abs() <= tol || depth == 0 {
            return hi;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(&mut f, a, b, tol, 24)
}
