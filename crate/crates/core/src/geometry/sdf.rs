//! Built-in catalog of implicit domains given by exact signed distances.

/// Signed distance fields, negative inside.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum SdfShape {
    /// A ball written as a distance field (for cross-checks against Ball).
    Sphere { center: Vec<f64>, radius: f64 },
    /// Axis-aligned ellipse in the plane with semi-axes (a, b).
    Ellipse { center: [f64; 2], a: f64, b: f64 },
    /// Points within `radius` of the segment [p, q].
    Capsule { p: Vec<f64>, q: Vec<f64>, radius: f64 },
}

impl SdfShape {
    pub fn dim(&self) -> usize {
        match self {
            SdfShape::Sphere { center, .. } => center.len(),
            SdfShape::Ellipse { .. } => 2,
            SdfShape::Capsule { p, .. } => p.len(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SdfShape::Sphere { center, radius } => norm_diff(x, center) - radius,
            SdfShape::Ellipse { center, a, b } => ellipse_sd(x[0] - center[0], x[1] - center[1], *a, *b),
            SdfShape::Capsule { p, q, radius } => {
                let mut pq2 = 0.0;
                let mut t = 0.0;
                for i in 0..p.len() {
                    let e = q[i] - p[i];
                    pq2 += e * e;
                    t += (x[i] - p[i]) * e;
                }
                let t = if pq2 > 0.0 { (t / pq2).clamp(0.0, 1.0) } else { 0.0 };
                let mut s = 0.0;
                for i in 0..p.len() {
                    let c = p[i] + t * (q[i] - p[i]);
                    s += (x[i] - c) * (x[i] - c);
                }
                s.sqrt() - radius
            }
        }
    }

    /// Radius for which interior and exterior tangent balls exist everywhere.
    pub fn natural_r_ball(&self) -> f64 {
        match self {
            SdfShape::Sphere { radius, .. } => *radius,
            SdfShape::Ellipse { a, b, .. } => {
                let (big, small) = if a >= b { (a, b) } else { (b, a) };
                small * small / big
            }
            SdfShape::Capsule { radius, .. } => *radius,
        }
    }

    /// Axis-aligned bounding box (lo, hi).
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SdfShape::Sphere { center, radius } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            SdfShape::Ellipse { center, a, b } => {
                (vec![center[0] - a, center[1] - b], vec![center[0] + a, center[1] + b])
            }
            SdfShape::Capsule { p, q, radius } => (
                p.iter().zip(q).map(|(a, b)| a.min(*b) - radius).collect(),
                p.iter().zip(q).map(|(a, b)| a.max(*b) + radius).collect(),
            ),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            SdfShape::Sphere { center, radius } => {
                SdfShape::Sphere { center: center.iter().map(|v| v * c).collect(), radius: radius * c }
            }
            SdfShape::Ellipse { center, a, b } => {
                SdfShape::Ellipse { center: [center[0] * c, center[1] * c], a: a * c, b: b * c }
            }
            SdfShape::Capsule { p, q, radius } => SdfShape::Capsule {
                p: p.iter().map(|v| v * c).collect(),
                q: q.iter().map(|v| v * c).collect(),
                radius: radius * c,
            },
        }
    }
}

fn norm_diff(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Signed distance to the ellipse (x/a)² + (y/b)² = 1.
pub fn ellipse_sd(x: f64, y: f64, a: f64, b: f64) -> f64 {
    let (e0, e1, y0, y1) = if a >= b { (a, b, x.abs(), y.abs()) } else { (b, a, y.abs(), x.abs()) };
    let inside = (y0 / e0).powi(2) + (y1 / e1).powi(2) < 1.0;
    let dist = ellipse_distance(e0, e1, y0, y1);
    if inside {
        -dist
    } else {
        dist
    }
}

/// Distance from (y0, y1) ≥ 0 to the ellipse with semi-axes e0 ≥ e1 (Eberly).
fn ellipse_distance(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g != 0.0 {
                let r0 = (e0 / e1).powi(2);
                let s = ellipse_root(r0, z0, z1, g);
                let x0 = r0 * y0 / (s + r0);
                let x1 = y1 / (s + 1.0);
                ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
            } else {
                0.0
            }
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * (1.0 - xde0 * xde0).max(0.0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root(r0: f64, z0: f64, z1: f64, g: f64) -> f64 {
    let n0 = r0 * z0;
    let mut s0 = z1 - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { n0.hypot(z1) - 1.0 };
    let mut s = 0.0;
    for _ in 0..200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let ratio0 = n0 / (s + r0);
        let ratio1 = z1 / (s + 1.0);
        let g = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
        if g > 0.0 {
            s0 = s;
        } else if g < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}
