//! Accumulators, deterministic chunked reduction and small fitting helpers.

use rayon::prelude::*;

/// Welford accumulator; `merge` uses Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Acc {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Acc {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Acc) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        self.n = n;
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

pub const CHUNK: u64 = 1024;

/// Evaluate `f` on fixed chunks of `0..n` in parallel and merge the per-chunk
/// accumulators in index order, so the result is independent of thread count.
pub fn chunked<const K: usize, F>(n: u64, f: F) -> [Acc; K]
where
    F: Fn(u64, &mut [Acc; K]) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<[Acc; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [Acc::default(); K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut out = [Acc::default(); K];
    for p in &parts {
        for (o, a) in out.iter_mut().zip(p) {
            o.merge(a);
        }
    }
    out
}

/// Two-sample Kolmogorov–Smirnov statistic. Sorts its inputs.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Weighted least squares y ≈ c0 + c1 x. Returns coefficients and, for each
/// coefficient, the linear weights mapping y to it (for error propagation).
pub fn linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<LinearFit> {
    let sw: f64 = w.iter().sum();
    let sx: f64 = x.iter().zip(w).map(|(x, w)| w * x).sum();
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
    let det = sw * sxx - sx * sx;
    if x.len() < 2 || det.abs() <= 1e-300 || !det.is_finite() {
        return None;
    }
    let l0: Vec<f64> = x.iter().zip(w).map(|(x, w)| w * (sxx - sx * x) / det).collect();
    let l1: Vec<f64> = x.iter().zip(w).map(|(x, w)| w * (sw * x - sx) / det).collect();
    let c0: f64 = l0.iter().zip(y).map(|(l, y)| l * y).sum();
    let c1: f64 = l1.iter().zip(y).map(|(l, y)| l * y).sum();
    let rss = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((x, y), w)| w * (y - c0 - c1 * x).powi(2))
        .sum();
    Some(LinearFit { intercept: c0, slope: c1, intercept_weights: l0, slope_weights: l1, rss })
}

#[derive(Debug, Clone)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_weights: Vec<f64>,
    pub slope_weights: Vec<f64>,
    pub rss: f64,
}
