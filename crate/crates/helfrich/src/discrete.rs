//! Discretization kernel shared by the geometry module and the optimizer.
//!
//! Everything here works on bare node arrays (distinct points, no duplicated
//! seam) so the optimizer can evaluate the same formulas on intermediate
//! states that are not yet certified constant-speed curves.  The public
//! geometry and energy operations are thin wrappers; this is what guarantees
//! that a minimization result re-evaluated from its output curves reproduces
//! the reported numbers.
//!
//! Conventions, for a profile `(x(t), z(t))` revolved about the `z`-axis:
//!
//! * per-node speed `σ_i` is the average of the adjacent chord speeds, so a
//!   constant-speed curve has `σ_i = length` up to its chord tolerance;
//! * node quadrature weight `w_i = 2π·x_i·σ_i·Δt·θ_i` with trapezoid end
//!   factors `θ`, which telescopes to the exact lateral area of the revolved
//!   polyline, `Σ_cells π·(x_j + x_{j+1})·chord_j`;
//! * enclosed volume is the exact frustum-stack volume
//!   `(π/3)·Σ_cells (x_j² + x_j·x_{j+1} + x_{j+1}²)·(z_{j+1} − z_j)`, i.e.
//!   `π ∫ x² ż dt` evaluated exactly on the polyline;
//! * meridian curvature `k1 = (z̈ẋ − ẍż)/|γ̇|³`, parallel curvature
//!   `k2 = ż/(x·|γ̇|)`, from central differences (one-sided second order at
//!   open ends, periodic wrap when closed).

use crate::energy::MaterialParams;
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, Vec2};

/// Radial coordinates below `AXIS_TOL_REL · length` count as lying on the
/// rotation axis.
pub(crate) const AXIS_TOL_REL: f64 = 1e-9;

/// Chords, speeds, weights and the exact polyline area/volume.
#[derive(Clone, Debug)]
pub(crate) struct Measure {
    pub closed: bool,
    /// Number of cells: `m - 1` for open chains, `m` for closed loops.
    pub cells: usize,
    pub dt: f64,
    pub chords: Vec<f64>,
    /// Chord-average speed per node; equals the curve length for exactly
    /// constant-speed sampling.
    pub sigma: Vec<f64>,
    /// Node quadrature weight for integrals against the area measure.
    pub weight: Vec<f64>,
    pub length: f64,
    pub area: f64,
    pub volume: f64,
}

impl Measure {
    pub fn axis_tol(&self) -> f64 {
        AXIS_TOL_REL * self.length
    }
}

/// `pts` are distinct nodes; a closed loop wraps from the last back to the
/// first.  Requires at least 2 points (3 for closed loops).
pub(crate) fn measure(pts: &[Vec2], closed: bool) -> Measure {
    let m = pts.len();
    assert!(m >= if closed { 3 } else { 2 }, "measure needs a polyline");
    let cells = if closed { m } else { m - 1 };
    let dt = 1.0 / cells as f64;

    let chords: Vec<f64> = (0..cells).map(|j| pts[(j + 1) % m].dist(pts[j])).collect();
    let length = pairwise_sum(cells, &|j| chords[j]);

    let sigma: Vec<f64> = (0..m)
        .map(|i| {
            if closed {
                (chords[(i + m - 1) % m] + chords[i]) / (2.0 * dt)
            } else if i == 0 {
                chords[0] / dt
            } else if i == m - 1 {
                chords[m - 2] / dt
            } else {
                (chords[i - 1] + chords[i]) / (2.0 * dt)
            }
        })
        .collect();

    // w_i = 2π x σ Δt θ written chord-wise: π·x·(sum of adjacent chords).
    let weight: Vec<f64> = (0..m)
        .map(|i| {
            let adjacent = if closed {
                chords[(i + m - 1) % m] + chords[i]
            } else if i == 0 {
                chords[0]
            } else if i == m - 1 {
                chords[m - 2]
            } else {
                chords[i - 1] + chords[i]
            };
            std::f64::consts::PI * pts[i].x * adjacent
        })
        .collect();

    let area = pairwise_sum(m, &|i| weight[i]);
    let volume = std::f64::consts::FRAC_PI_3
        * pairwise_sum(cells, &|j| {
            let a = pts[j];
            let b = pts[(j + 1) % m];
            (a.x * a.x + a.x * b.x + b.x * b.x) * (b.z - a.z)
        });

    Measure { closed, cells, dt, chords, sigma, weight, length, area, volume }
}

/// Finite-difference data per node: first derivative `σ·û` (central
/// direction, chord-average magnitude) and raw second difference.
#[derive(Clone, Debug)]
pub(crate) struct Stencil {
    pub first: Vec<Vec2>,
    /// Central difference vector before normalization (needed by the
    /// gradient's chain rule).
    pub central: Vec<Vec2>,
    pub second: Vec<Vec2>,
}

pub(crate) fn stencil(pts: &[Vec2], closed: bool, meas: &Measure) -> Result<Stencil> {
    let m = pts.len();
    if m < 4 {
        return Err(Error::DegenerateInput(format!(
            "{m} nodes are too few for second-order stencils"
        )));
    }
    let dt = meas.dt;
    let mut central = Vec::with_capacity(m);
    let mut second = Vec::with_capacity(m);
    for i in 0..m {
        let (d, dd) = if closed {
            let prev = pts[(i + m - 1) % m];
            let next = pts[(i + 1) % m];
            (next - prev, (next - pts[i] * 2.0 + prev) * (1.0 / (dt * dt)))
        } else if i == 0 {
            (
                pts[0] * -3.0 + pts[1] * 4.0 - pts[2],
                (pts[0] * 2.0 - pts[1] * 5.0 + pts[2] * 4.0 - pts[3]) * (1.0 / (dt * dt)),
            )
        } else if i == m - 1 {
            (
                pts[m - 1] * 3.0 - pts[m - 2] * 4.0 + pts[m - 3],
                (pts[m - 1] * 2.0 - pts[m - 2] * 5.0 + pts[m - 3] * 4.0 - pts[m - 4])
                    * (1.0 / (dt * dt)),
            )
        } else {
            (pts[i + 1] - pts[i - 1], (pts[i + 1] - pts[i] * 2.0 + pts[i - 1]) * (1.0 / (dt * dt)))
        };
        central.push(d);
        second.push(dd);
    }

    let mut first = Vec::with_capacity(m);
    for i in 0..m {
        let dn = central[i].norm();
        let scale = 2.0 * dt * meas.sigma[i];
        if dn <= 1e-12 * scale.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::DegenerateInput(format!(
                "parameter fold at node {i}: central difference vanishes"
            )));
        }
        first.push(central[i] * (meas.sigma[i] / dn));
    }
    Ok(Stencil { first, central, second })
}

/// Meridian curvature from first/second derivative vectors.
pub(crate) fn k1_of(first: Vec2, second: Vec2) -> f64 {
    let speed = first.norm();
    first.cross(second) / (speed * speed * speed)
}

/// Parallel curvature away from the axis.
pub(crate) fn k2_of(first: Vec2, x: f64) -> f64 {
    first.z / (x * first.norm())
}

#[derive(Clone, Debug)]
pub(crate) struct CurvatureData {
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
}

/// `poles` marks open endpoints lying on the axis, where `k2` is continued
/// by the umbilic value `k1`.  Errors if the profile touches the axis at any
/// other node.
pub(crate) fn curvature(
    pts: &[Vec2],
    closed: bool,
    poles: (bool, bool),
    meas: &Measure,
    st: &Stencil,
) -> Result<CurvatureData> {
    let m = pts.len();
    let tol = meas.axis_tol();
    let mut k1 = Vec::with_capacity(m);
    let mut k2 = Vec::with_capacity(m);
    for i in 0..m {
        let k1_i = k1_of(st.first[i], st.second[i]);
        let at_pole =
            !closed && ((i == 0 && poles.0) || (i == m - 1 && poles.1)) && pts[i].x.abs() <= tol;
        let k2_i = if at_pole {
            k1_i
        } else {
            if pts[i].x <= tol {
                if std::env::var_os("DEBUG_SINGULAR_TRACE").is_some() && pts[i].x < -1e-6 {
                    eprintln!(
                        "singular capture i={} x={:e}\n{}",
                        i,
                        pts[i].x,
                        std::backtrace::Backtrace::force_capture()
                    );
                }
                return Err(Error::SingularNode { index: i, x: pts[i].x });
            }
            k2_of(st.first[i], pts[i].x)
        };
        k1.push(k1_i);
        k2.push(k2_i);
    }
    Ok(CurvatureData { k1, k2 })
}

/// Quadratures of the curvature invariants against the area measure.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Integrals {
    pub helfrich: f64,
    pub willmore: f64,
    pub int_k1sq: f64,
    pub int_k2sq: f64,
    pub int_gauss: f64,
    pub int_hsq: f64,
}

pub(crate) fn integrals(meas: &Measure, curv: &CurvatureData, params: &MaterialParams) -> Integrals {
    let m = curv.k1.len();
    let w = &meas.weight;
    let k1 = &curv.k1;
    let k2 = &curv.k2;
    let helfrich = pairwise_sum(m, &|i| {
        let dev = k1[i] + k2[i] - params.h0;
        (0.5 * params.kappa_h * dev * dev + params.kappa_g * k1[i] * k2[i]) * w[i]
    });
    let int_hsq = pairwise_sum(m, &|i| {
        let h = k1[i] + k2[i];
        h * h * w[i]
    });
    Integrals {
        helfrich,
        willmore: 0.25 * int_hsq,
        int_k1sq: pairwise_sum(m, &|i| k1[i] * k1[i] * w[i]),
        int_k2sq: pairwise_sum(m, &|i| k2[i] * k2[i] * w[i]),
        int_gauss: pairwise_sum(m, &|i| k1[i] * k2[i] * w[i]),
        int_hsq,
    }
}
