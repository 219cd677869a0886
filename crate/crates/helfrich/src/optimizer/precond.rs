//! Smoothing preconditioner for the descent direction.
//!
//! The bending energy couples nodes through second differences, so its
//! gradient is dominated by stiff high-frequency modes; raw gradient steps
//! would be throttled to the square of the node spacing.  Directions are
//! therefore solved from `M·d = g` where `M` is a local model of the
//! energy's Gauss–Newton Hessian in the normal-speed variable `v`:
//!
//! * meridian curvature contributes rows `β_i·(second difference)` with
//!   `β_i = 2π·κ·x_i/ĉ_i³` — the area weight makes the stiffness
//!   proportional to the distance from the axis;
//! * latitude curvature `k = û_z/x` contributes rows
//!   `γ_i·(centered first difference)` with `γ_i = π·κ/(2·ĉ_i·x_i)` —
//!   tilting the profile near a pole is expensive like `1/x`, which is what
//!   forces profiles to meet the axis perpendicularly.
//!
//! Both terms assemble into a symmetric positive definite pentadiagonal
//! matrix (plus the identity, which regularizes the rigid modes).  Open
//! chains are solved by banded Cholesky.  For closed loops the wrap entries
//! are confined to the last two rows and columns, so those two unknowns are
//! treated as a dense border: factor the leading pentadiagonal block, then
//! eliminate the border through its 2×2 Schur complement.  (A rank-2
//! Woodbury update of the open-chain factorization would be cheaper to
//! derive but loses ~ε·τ² accuracy: the open core is blind to the wrap
//! modes, so the correction has to reconstruct a stiff eigenvalue by
//! cancellation.)

use crate::numeric::Vec2;
use std::f64::consts::PI;

/// Largest stencil coefficient; keeps pivots meaningful when a node sits
/// very close to the axis.
const COEFF_CAP: f64 = 1e12;

/// Cholesky factor of a pentadiagonal symmetric positive definite matrix,
/// stored by bands: `diag[j] = L[j][j]`, `sub1[j] = L[j][j−1]`,
/// `sub2[j] = L[j][j−2]`.
struct BandCholesky {
    diag: Vec<f64>,
    sub1: Vec<f64>,
    sub2: Vec<f64>,
}

impl BandCholesky {
    /// Factors the matrix given by bands `d0` (diagonal), `d1`
    /// (first off-diagonal `A[j][j+1]`), `d2` (second off-diagonal).
    fn factor(d0: &[f64], d1: &[f64], d2: &[f64]) -> Self {
        let m = d0.len();
        let mut diag = vec![0.0; m];
        let mut sub1 = vec![0.0; m];
        let mut sub2 = vec![0.0; m];
        for j in 0..m {
            let l2 = if j >= 2 { d2[j - 2] / diag[j - 2] } else { 0.0 };
            let l1 = if j >= 1 {
                let coupling = if j >= 2 { l2 * sub1[j - 1] } else { 0.0 };
                (d1[j - 1] - coupling) / diag[j - 1]
            } else {
                0.0
            };
            let pivot = d0[j] - l1 * l1 - l2 * l2;
            assert!(pivot > 0.0, "preconditioner matrix lost positive definiteness");
            sub2[j] = l2;
            sub1[j] = l1;
            diag[j] = pivot.sqrt();
        }
        BandCholesky { diag, sub1, sub2 }
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let mut y = vec![0.0; m];
        for j in 0..m {
            let mut s = b[j];
            if j >= 1 {
                s -= self.sub1[j] * y[j - 1];
            }
            if j >= 2 {
                s -= self.sub2[j] * y[j - 2];
            }
            y[j] = s / self.diag[j];
        }
        let mut x = vec![0.0; m];
        for j in (0..m).rev() {
            let mut s = y[j];
            if j + 1 < m {
                s -= self.sub1[j + 1] * x[j + 1];
            }
            if j + 2 < m {
                s -= self.sub2[j + 2] * x[j + 2];
            }
            x[j] = s / self.diag[j];
        }
        x
    }
}

/// Pentadiagonal symmetric matrix under assembly, `identity + Σ rows`.
/// For closed chains `d1[i]` holds the `(i, i+1 mod m)` entry and `d2[i]`
/// the `(i, i+2 mod m)` entry, so the wrap entries live at the tail of the
/// band vectors.
struct Bands {
    m: usize,
    closed: bool,
    d0: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Bands {
    fn identity(m: usize, closed: bool) -> Self {
        let (n1, n2) = if closed { (m, m) } else { (m - 1, m - 2) };
        Bands { m, closed, d0: vec![1.0; m], d1: vec![0.0; n1], d2: vec![0.0; n2] }
    }

    fn pair1(&mut self, i: usize) -> &mut f64 {
        &mut self.d1[i % self.m]
    }

    fn pair2(&mut self, i: usize) -> &mut f64 {
        &mut self.d2[i % self.m]
    }

    /// Adds `c·rᵀr` for the second-difference row `r = [1, −2, 1]`
    /// centered at node `i` (indices mod m when closed).
    fn add_second_difference(&mut self, i: usize, c: f64) {
        let m = self.m;
        let prev = (i + m - 1) % m;
        let next = (i + 1) % m;
        self.d0[prev] += c;
        self.d0[i] += 4.0 * c;
        self.d0[next] += c;
        *self.pair1(prev) += -2.0 * c;
        *self.pair1(i) += -2.0 * c;
        *self.pair2(prev) += c;
    }

    /// Adds `c·rᵀr` for the centered first-difference row `r = [−1, 0, 1]`
    /// at node `i`.
    fn add_first_difference(&mut self, i: usize, c: f64) {
        let m = self.m;
        let prev = (i + m - 1) % m;
        let next = (i + 1) % m;
        self.d0[prev] += c;
        self.d0[next] += c;
        *self.pair2(prev) += -c;
    }

    fn factor(self) -> Preconditioner {
        if !self.closed {
            return Preconditioner::Open(BandedSmoother {
                chol: BandCholesky::factor(&self.d0, &self.d1, &self.d2),
            });
        }

        // Border elimination over the last two nodes.  The leading block B
        // covers nodes 0..m−2 and sees no wrap entries.
        let m = self.m;
        let n = m - 2;
        let core = BandCholesky::factor(&self.d0[..n], &self.d1[..n - 1], &self.d2[..n - 2]);

        // Coupling columns to the border nodes {m−2, m−1}; the head entries
        // are the wrap-around terms.
        let mut u0 = vec![0.0; n];
        u0[n - 2] = self.d2[n - 2];
        u0[n - 1] = self.d1[n - 1];
        u0[0] = self.d2[m - 2];
        let mut u1 = vec![0.0; n];
        u1[n - 1] = self.d2[n - 1];
        u1[0] = self.d1[m - 1];
        u1[1] = self.d2[m - 1];
        let y0 = core.solve(&u0);
        let y1 = core.solve(&u1);

        // 2×2 Schur complement D − Uᵀ·B⁻¹·U; positive definite because it is
        // the border block of the full SPD operator after elimination.
        let s = [
            [self.d0[m - 2] - dot(&u0, &y0), self.d1[m - 2] - dot(&u0, &y1)],
            [self.d1[m - 2] - dot(&u1, &y0), self.d0[m - 1] - dot(&u1, &y1)],
        ];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        assert!(det > 0.0, "degenerate border block in cyclic preconditioner");
        let schur_inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        Preconditioner::Closed(CyclicSmoother { core, u: [u0, u1], y: [y0, y1], schur_inv })
    }
}

/// Solver for `M·d = g` on one component.
pub(crate) enum Preconditioner {
    Identity,
    Open(BandedSmoother),
    Closed(CyclicSmoother),
}

pub(crate) struct BandedSmoother {
    chol: BandCholesky,
}

pub(crate) struct CyclicSmoother {
    /// Factor of the leading (m−2)×(m−2) pentadiagonal block `B`.
    core: BandCholesky,
    /// Coupling columns `U = A[0..m−2, {m−2, m−1}]`.
    u: [Vec<f64>; 2],
    /// `B⁻¹·U`, cached for the border elimination.
    y: [Vec<f64>; 2],
    /// Inverse of the 2×2 Schur complement `D − Uᵀ·B⁻¹·U`.
    schur_inv: [[f64; 2]; 2],
}

impl Preconditioner {
    /// Uniform operator `I + τ·SᵀS` over `m` nodes; `tau ≤ 0` disables
    /// smoothing.  Used where no geometry is available and by the tests.
    pub fn build(m: usize, closed: bool, tau: f64) -> Self {
        if tau <= 0.0 || m < 5 {
            return Preconditioner::Identity;
        }
        let mut bands = Bands::identity(m, closed);
        let rows: Vec<usize> = if closed { (0..m).collect() } else { (1..m - 1).collect() };
        for i in rows {
            bands.add_second_difference(i, tau);
        }
        bands.factor()
    }

    /// Operator modeled on the bending Hessian of the given polyline (see
    /// the module docs); `strength` scales both stencil families.
    pub fn assemble_model(points: &[Vec2], closed: bool, kappa: f64, strength: f64) -> Self {
        let m = points.len();
        if m < 5 || !(strength > 0.0) || !(kappa > 0.0) {
            return Preconditioner::Identity;
        }
        let chord = |i: usize| points[(i + 1) % m].dist(points[i]);
        let mut bands = Bands::identity(m, closed);
        let rows: Vec<usize> = if closed { (0..m).collect() } else { (1..m - 1).collect() };
        for i in rows {
            let before = chord((i + m - 1) % m);
            let after = chord(i);
            let c = (0.5 * (before + after)).max(1e-300);
            let x = points[i].x.abs().max(c);
            let beta = (strength * 2.0 * PI * kappa * x / (c * c * c)).min(COEFF_CAP);
            let gamma = (strength * PI * kappa / (2.0 * c * x)).min(COEFF_CAP);
            bands.add_second_difference(i, beta);
            bands.add_first_difference(i, gamma);
        }
        bands.factor()
    }

    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Preconditioner::Identity => g.to_vec(),
            Preconditioner::Open(s) => s.chol.solve(g),
            Preconditioner::Closed(s) => {
                let n = g.len() - 2;
                let t = s.core.solve(&g[..n]);
                let rhs = [g[n] - dot(&s.u[0], &t), g[n + 1] - dot(&s.u[1], &t)];
                let w = [
                    s.schur_inv[0][0] * rhs[0] + s.schur_inv[0][1] * rhs[1],
                    s.schur_inv[1][0] * rhs[0] + s.schur_inv[1][1] * rhs[1],
                ];
                let mut x: Vec<f64> = t
                    .iter()
                    .enumerate()
                    .map(|(j, &tj)| tj - s.y[0][j] * w[0] - s.y[1][j] * w[1])
                    .collect();
                x.push(w[0]);
                x.push(w[1]);
                x
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
