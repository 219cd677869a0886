//! Small numeric helpers: a 2-vector for profile points and deterministic
//! summation.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Point or vector in the generating half-plane; `x` is the distance from
/// the rotation axis, `z` the height along it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const fn new(x: f64, z: f64) -> Self {
        Vec2 { x, z }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.z * other.z
    }

    /// Signed area form: `self.x * other.z - self.z * other.x`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.z - self.z * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Mirror image across the rotation axis.
    pub fn mirrored(self) -> Vec2 {
        Vec2::new(-self.x, self.z)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.z + o.z)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.z - o.z)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.z * s)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.z += o.z;
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.z -= o.z;
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

/// Pairwise (cascade) sum of `f(i)` for `i in 0..n`.
///
/// Used for every quadrature reduction so totals are deterministic and the
/// rounding error grows like `O(log n)` instead of `O(n)`.
pub(crate) fn pairwise_sum<F: Fn(usize) -> f64>(n: usize, f: &F) -> f64 {
    fn go<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= 32 {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            acc
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    if n == 0 {
        0.0
    } else {
        go(0, n, f)
    }
}

/// Distance from `p` to the segment `[a, b]`.
pub(crate) fn point_segment_dist(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    p.dist(closest_on_segment(p, a, b))
}

/// Point of the segment `[a, b]` closest to `p`.
pub(crate) fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    let s = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab * s
}

/// Distance between the segments `[a0, a1]` and `[b0, b1]`, with the
/// midpoint of a closest pair as witness.  Properly crossing segments have
/// distance zero at the crossing point.
pub(crate) fn seg_seg_dist(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2) -> (f64, Vec2) {
    let da = a1 - a0;
    let db = b1 - b0;
    let denom = da.cross(db);
    if denom != 0.0 {
        let s = (b0 - a0).cross(db) / denom;
        let u = (b0 - a0).cross(da) / denom;
        if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&u) {
            return (0.0, a0 + da * s);
        }
    }
    // Disjoint (or parallel) segments realize their distance at an endpoint.
    let mut best = f64::INFINITY;
    let mut witness = a0;
    for (p, c0, c1) in [(a0, b0, b1), (a1, b0, b1), (b0, a0, a1), (b1, a0, a1)] {
        let q = closest_on_segment(p, c0, c1);
        let d = p.dist(q);
        if d < best {
            best = d;
            witness = (p + q) * 0.5;
        }
    }
    (best, witness)
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
///
/// Convergence-order estimates: `y ~ C·x^slope`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..xs.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    num / den
}
