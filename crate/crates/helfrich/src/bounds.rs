//! Quantitative inequality checks on admissible curves and systems: length
//! bounds, axis-tangent limits, oscillation bounds of the tangent, the
//! curvature-coercivity estimate, and the component-count cap.
//!
//! Every check reports in the uniform orientation `lhs ≤ rhs`; `holds` means
//! the inequality is satisfied within a `1e-9` relative slack tolerance, and
//! `slack = rhs − lhs` is nonnegative when it holds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::curve::{derivatives, validate, CurveClass, DerivativeStencil, GeneratingCurve};
use crate::energy::{coercivity_check, coercivity_constants, MaterialParams};
use crate::error::{Error, Result};
use crate::geometry::{area_measure, curvatures, diameter, gauss_bonnet_check};
use crate::numeric::{pairwise_sum, Vec2};
use crate::sampling::CurveSampler;
use crate::system::SurfaceSystem;

/// One verified inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs − lhs`; nonnegative when the bound holds.
    pub slack: f64,
}

impl BoundReport {
    /// Relative slack below which roundoff cannot flip an exact comparison.
    const REL_TOL: f64 = 1e-9;

    /// Comparison of exactly computed quantities: roundoff slack only.
    fn check(name: &str, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs + Self::REL_TOL * rhs.abs().max(lhs.abs());
        BoundReport { name: name.to_string(), lhs, rhs, holds, slack: rhs - lhs }
    }

    /// Comparison of two quadrature results at a given resolution.
    ///
    /// Both sides converge at second order in the cell width `h`, and on an
    /// equality case the discretization error of either side can tip the
    /// comparison by `O(h²)`; `5h²` keeps a 4× margin over the worst case
    /// observed (the sphere, where the inequality is sharp and the area
    /// quadrature is one-sidedly low by `(πh)²/8`).  `floor` is a
    /// characteristic magnitude for the check so that a pair of numerically
    /// zero sides is not ranked by their noise.
    fn check_quadrature(name: &str, lhs: f64, rhs: f64, cells: usize, floor: f64) -> Self {
        let h = 1.0 / cells as f64;
        let rel = (5.0 * h * h).max(Self::REL_TOL);
        let holds = lhs <= rhs + rel * rhs.abs().max(lhs.abs()).max(floor);
        BoundReport { name: name.to_string(), lhs, rhs, holds, slack: rhs - lhs }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} (lhs {:.6e} <= rhs {:.6e}, slack {:.3e})",
            self.name,
            if self.holds { "holds" } else { "VIOLATED" },
            self.lhs,
            self.rhs,
            self.slack
        )
    }
}

fn require_plain(curve: &GeneratingCurve) -> Result<CurveClass> {
    let report = validate(curve)?;
    report.require_admissible()?;
    if report.class == CurveClass::Generalized {
        return Err(Error::Validation(
            "bound checks need a plain profile; split generalized curves at the axis first".into(),
        ));
    }
    Ok(report.class)
}

/// Length bounds: the area over the diameter controls the length from
/// below, and the curvature integrals control it from above,
/// `area/(2π·diam) ≤ ℓ ≤ (√area/2π)(√∫k₁²dμ + √∫k₂²dμ)`.
pub fn length_bound_check(curve: &GeneratingCurve) -> Result<(BoundReport, BoundReport)> {
    require_plain(curve)?;
    let measure = area_measure(curve);
    let field = curvatures(curve, &derivatives(curve)?)?;
    let norms = crate::geometry::curvature_norms(&field, &measure);
    let ell = curve.length();
    let cells = curve.samples().len() - 1;
    let lower = BoundReport::check_quadrature(
        "length_lower",
        measure.area / (2.0 * PI * diameter(curve)),
        ell,
        cells,
        ell,
    );
    let upper = BoundReport::check_quadrature(
        "length_upper",
        ell,
        (measure.area.sqrt() / (2.0 * PI)) * (norms.int_k1sq.sqrt() + norms.int_k2sq.sqrt()),
        cells,
        ell,
    );
    Ok((lower, upper))
}

/// System version of the length bound:
/// `2π Σ ℓ(γᵢ) ≤ Σ (areaᵢ/2 + ∫(k₁²+k₂²)dμᵢ)`.
pub fn system_length_bound_check(system: &SurfaceSystem) -> Result<BoundReport> {
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut coarsest = usize::MAX;
    for comp in system.components() {
        require_plain(comp)?;
        let measure = area_measure(comp);
        let field = curvatures(comp, &derivatives(comp)?)?;
        let norms = crate::geometry::curvature_norms(&field, &measure);
        lhs += 2.0 * PI * comp.length();
        rhs += 0.5 * measure.area + norms.int_k1sq + norms.int_k2sq;
        coarsest = coarsest.min(comp.samples().len() - 1);
    }
    Ok(BoundReport::check_quadrature("system_length", lhs, rhs, coarsest, lhs))
}

/// One-sided tangent limits of an open profile at its axis endpoints.
///
/// The tangent of an admissible open profile satisfies `ż → 0` and
/// `ẋ → ±ℓ` with opposite signs at the two ends.  Endpoint stencils are
/// unreliable on the axis, so the limits are extrapolated from the three
/// nearest interior nodes (Richardson, exact for quadratics); the tolerance
/// `10·ℓ/√N` reflects the extrapolation's resolution dependence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AxisTangentReport {
    pub limit_dz_start: f64,
    pub limit_dz_end: f64,
    pub limit_dx_start: f64,
    pub limit_dx_end: f64,
    pub tolerance: f64,
    /// Curve length the `ẋ` magnitudes are compared against.
    pub length: f64,
    pub dz_vanishes: bool,
    pub dx_signs_opposite: bool,
    pub dx_magnitude_matches_length: bool,
    pub holds: bool,
}

impl AxisTangentReport {
    /// Folds the record into the uniform report shape: the worst deviation
    /// against the tolerance, with a sign failure forcing an infinite lhs.
    pub fn to_bound_report(&self) -> BoundReport {
        let mut worst = self
            .limit_dz_start
            .abs()
            .max(self.limit_dz_end.abs())
            .max((self.limit_dx_start.abs() - self.length).abs())
            .max((self.limit_dx_end.abs() - self.length).abs());
        if !self.dx_signs_opposite {
            worst = f64::INFINITY;
        }
        BoundReport::check("axis_tangent", worst, self.tolerance)
    }
}

pub fn axis_tangent_check(curve: &GeneratingCurve) -> Result<AxisTangentReport> {
    let class = require_plain(curve)?;
    if class != CurveClass::SphereLike {
        return Err(Error::Validation(
            "axis tangent limits only exist for open profiles with endpoints on the axis".into(),
        ));
    }
    let st = derivatives(curve)?;
    let (start, end) = limit_tangents(&st);
    let ell = curve.length();
    let tolerance = 10.0 * ell / (curve.n() as f64).sqrt();
    let dz_vanishes = start.z.abs() <= tolerance && end.z.abs() <= tolerance;
    let dx_signs_opposite = start.x * end.x < 0.0;
    let dx_magnitude_matches_length =
        (start.x.abs() - ell).abs() <= tolerance && (end.x.abs() - ell).abs() <= tolerance;
    Ok(AxisTangentReport {
        limit_dz_start: start.z,
        limit_dz_end: end.z,
        limit_dx_start: start.x,
        limit_dx_end: end.x,
        tolerance,
        length: ell,
        dz_vanishes,
        dx_signs_opposite,
        dx_magnitude_matches_length,
        holds: dz_vanishes && dx_signs_opposite && dx_magnitude_matches_length,
    })
}

/// Quadratic extrapolation of the first-derivative field to both endpoints
/// from the three nearest interior nodes.
fn limit_tangents(st: &DerivativeStencil) -> (Vec2, Vec2) {
    let f = &st.first;
    let n = f.len();
    let start = f[1] * 3.0 - f[2] * 3.0 + f[3];
    let end = f[n - 2] * 3.0 - f[n - 3] * 3.0 + f[n - 4];
    (start, end)
}

/// Oscillation bounds for the tangent over the sub-arc `[a, b]`:
///
/// * radial: `4π·|ẋ(b) − ẋ(a)| ≤ ℓ·∫(k₁²+k₂²)dμ` over the arc;
/// * vertical: `2√(2π)·|ż(b) − ż(a)| ≤ √ℓ·(∫k₁²dμ + ∫ ẋ²/x dt)` over the
///   arc, trivially true when the `∫ẋ²/x dt` quadrature diverges.
///
/// `a`, `b` are parameter values snapped to the nearest nodes; the arc must
/// stay off the axis except at the endpoints of an open profile, where the
/// tangents are extrapolated limits.
pub fn oscillation_bound_check(
    curve: &GeneratingCurve,
    a: f64,
    b: f64,
) -> Result<(BoundReport, BoundReport)> {
    require_plain(curve)?;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b {
        return Err(Error::Validation(format!(
            "need 0 <= a < b <= 1 for an oscillation arc, got [{a}, {b}]"
        )));
    }
    let samples = curve.samples();
    let n = samples.len();
    let cells = n - 1;
    let ia = (a * cells as f64).round() as usize;
    let ib = (b * cells as f64).round() as usize;
    if ib < ia + 1 {
        return Err(Error::Validation(format!(
            "arc [{a}, {b}] spans no cell at this resolution"
        )));
    }
    let axis_tol = curve.axis_tolerance();
    for i in ia..=ib {
        let at_pole = !curve.closed() && (i == 0 || i == n - 1);
        if !at_pole && samples[i].x <= axis_tol {
            return Err(Error::Validation(format!(
                "oscillation arc touches the rotation axis at node {i}"
            )));
        }
    }

    let st = derivatives(curve)?;
    let field = curvatures(curve, &st)?;
    let ell = curve.length();
    let dt = 1.0 / cells as f64;

    // Tangents at the arc ends; extrapolated limits on the axis itself.
    let (lim_start, lim_end) = limit_tangents(&st);
    let tangent_at = |i: usize| -> Vec2 {
        if !curve.closed() && i == 0 {
            lim_start
        } else if !curve.closed() && i == n - 1 {
            lim_end
        } else {
            st.first[i]
        }
    };
    let ta = tangent_at(ia);
    let tb = tangent_at(ib);

    // Arc quadratures: trapezoid against dμ cell by cell.
    let arc_cells = ib - ia;
    let mu_int = |f: &dyn Fn(usize) -> f64| -> f64 {
        pairwise_sum(arc_cells, &|jj| {
            let j = ia + jj;
            let (p, q) = (samples[j], samples[j + 1]);
            let chord = q.point().dist(p.point());
            PI * chord * (p.x * f(j) + q.x * f(j + 1))
        })
    };
    let k_sq = mu_int(&|i| field.meridian[i] * field.meridian[i] + field.parallel[i] * field.parallel[i]);
    let k1_sq = mu_int(&|i| field.meridian[i] * field.meridian[i]);

    // Scale floor: the full-curve curvature integral keeps near-zero arcs
    // (e.g. a straight cylinder wall, where both sides vanish) from being
    // ranked by their rounding noise.
    let full = crate::geometry::curvature_norms(&field, &area_measure(curve));
    let k_sq_full = full.int_k1sq + full.int_k2sq;

    let radial = BoundReport::check_quadrature(
        "oscillation_radial",
        4.0 * PI * (tb.x - ta.x).abs(),
        ell * k_sq,
        cells,
        ell * k_sq_full,
    );

    // Midpoint quadrature of ∫ ẋ²/x dt; the integrand has an integrable
    // singularity at axis endpoints (midpoints stay strictly positive) and
    // the sum is declared divergent beyond 1e12·ℓ.
    let mut j_int = 0.0;
    for j in ia..ib {
        let (p, q) = (samples[j], samples[j + 1]);
        let dx = q.x - p.x;
        let xm = 0.5 * (p.x + q.x);
        if xm <= 0.0 {
            j_int = f64::INFINITY;
            break;
        }
        j_int += dx * dx / (dt * xm);
        if j_int > 1e12 * ell {
            j_int = f64::INFINITY;
            break;
        }
    }
    let vertical = BoundReport::check_quadrature(
        "oscillation_vertical",
        2.0 * (2.0 * PI).sqrt() * (tb.z - ta.z).abs(),
        ell.sqrt() * (k1_sq + j_int),
        cells,
        ell.sqrt() * k_sq_full,
    );
    Ok((radial, vertical))
}

/// Cap on the number of components (and axis touches) of any system whose
/// total `∫(k₁²+k₂²)dμ` stays below `bound`: every component with axis
/// contact costs at least `8π` of that integral.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComponentCountBound {
    pub bound: f64,
    pub max_components: usize,
    pub max_axis_touches: usize,
    /// False when even a single component would exceed the bound.
    pub feasible_nonempty: bool,
}

pub fn max_components(bound: f64) -> ComponentCountBound {
    // Nudge before flooring so an exact multiple of 8π is not lost to
    // roundoff in the division.
    let ratio = (bound / (8.0 * PI)).max(0.0) * (1.0 + 1e-12);
    let max_components = ratio.floor() as usize;
    ComponentCountBound {
        bound,
        max_components,
        max_axis_touches: max_components + 1,
        feasible_nonempty: max_components >= 1,
    }
}

/// Component cap derived from an energy budget: the coercivity estimate
/// turns `area + energy ≤ area + budget` into a curvature-integral bound.
pub fn max_components_from_energy(
    params: &MaterialParams,
    epsilon: Option<f64>,
    area: f64,
    energy_budget: f64,
) -> Result<ComponentCountBound> {
    let constants = coercivity_constants(params, epsilon)?;
    Ok(max_components(constants.constant * (area + energy_budget)))
}

/// The per-component cost underlying [`max_components`]: an open profile's
/// curvature integral is at least `8π` (twice its total Gauss curvature).
pub fn component_cost_check(curve: &GeneratingCurve) -> Result<BoundReport> {
    let class = require_plain(curve)?;
    if class != CurveClass::SphereLike {
        return Err(Error::Validation(
            "the 8π component cost applies to open profiles with endpoints on the axis".into(),
        ));
    }
    let measure = area_measure(curve);
    let field = curvatures(curve, &derivatives(curve)?)?;
    let norms = crate::geometry::curvature_norms(&field, &measure);
    Ok(BoundReport::check_quadrature(
        "component_cost",
        8.0 * PI,
        norms.int_k1sq + norms.int_k2sq,
        curve.samples().len() - 1,
        0.0,
    ))
}

/// Named collections of randomized checks for the verification CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuiteKind {
    Length,
    SystemLength,
    AxisTangent,
    Oscillation,
    Coercivity,
    ComponentCost,
    GaussBonnet,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 7] = [
        SuiteKind::Length,
        SuiteKind::SystemLength,
        SuiteKind::AxisTangent,
        SuiteKind::Oscillation,
        SuiteKind::Coercivity,
        SuiteKind::ComponentCost,
        SuiteKind::GaussBonnet,
    ];
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SuiteKind::Length => "length",
            SuiteKind::SystemLength => "system-length",
            SuiteKind::AxisTangent => "axis-tangent",
            SuiteKind::Oscillation => "oscillation",
            SuiteKind::Coercivity => "coercivity",
            SuiteKind::ComponentCost => "component-cost",
            SuiteKind::GaussBonnet => "gauss-bonnet",
        };
        f.write_str(s)
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(SuiteKind::Length),
            "system-length" => Ok(SuiteKind::SystemLength),
            "axis-tangent" => Ok(SuiteKind::AxisTangent),
            "oscillation" => Ok(SuiteKind::Oscillation),
            "coercivity" => Ok(SuiteKind::Coercivity),
            "component-cost" => Ok(SuiteKind::ComponentCost),
            "gauss-bonnet" => Ok(SuiteKind::GaussBonnet),
            other => Err(Error::Parse {
                line: 0,
                field: 0,
                message: format!(
                    "unknown suite '{other}'; expected one of length, system-length, axis-tangent, oscillation, coercivity, component-cost, gauss-bonnet"
                ),
            }),
        }
    }
}

/// Runs a randomized suite: `count` draws from the curve generator at the
/// given resolution, checked concurrently with a deterministic report order.
pub fn run_suite(kind: SuiteKind, seed: u64, count: usize, samples: usize) -> Result<Vec<Vec<BoundReport>>> {
    let mut sampler = CurveSampler::new(seed, samples);
    match kind {
        SuiteKind::Length => {
            let curves: Vec<GeneratingCurve> = (0..count).map(|_| sampler.any()).collect();
            curves
                .par_iter()
                .map(|c| length_bound_check(c).map(|(lo, hi)| vec![lo, hi]))
                .collect()
        }
        SuiteKind::SystemLength => {
            let mut rng_sizes = CurveSampler::new(seed ^ 0x5eed, samples);
            let systems: Vec<SurfaceSystem> = (0..count)
                .map(|i| {
                    let size = 1 + (i % 3);
                    let mut parts = Vec::with_capacity(size);
                    let mut z_top = f64::MIN;
                    for _ in 0..size {
                        let c = rng_sizes.any();
                        let (lo, hi) = z_extent(&c);
                        let shift =
                            if z_top == f64::MIN { 0.0 } else { z_top - lo + 0.1 * c.length() };
                        let c = c.translated_z(shift);
                        z_top = hi + shift;
                        parts.push(c);
                    }
                    SurfaceSystem::new(parts)
                })
                .collect::<Result<Vec<_>>>()?;
            systems
                .par_iter()
                .map(|s| system_length_bound_check(s).map(|r| vec![r]))
                .collect()
        }
        SuiteKind::AxisTangent => {
            let curves: Vec<GeneratingCurve> = (0..count).map(|_| sampler.sphere_like()).collect();
            curves
                .par_iter()
                .map(|c| axis_tangent_check(c).map(|r| vec![r.to_bound_report()]))
                .collect()
        }
        SuiteKind::Oscillation => {
            let curves: Vec<GeneratingCurve> = (0..count).map(|_| sampler.any()).collect();
            curves
                .par_iter()
                .map(|c| {
                    let full = if c.closed() { (0.0, 0.5) } else { (0.0, 1.0) };
                    let (r1, r2) = oscillation_bound_check(c, full.0, full.1)?;
                    let (r3, r4) = oscillation_bound_check(c, 0.25, 0.75)?;
                    Ok(vec![r1, r2, r3, r4])
                })
                .collect()
        }
        SuiteKind::Coercivity => {
            let params = MaterialParams::default();
            let curves: Vec<GeneratingCurve> = (0..count).map(|_| sampler.any()).collect();
            curves
                .par_iter()
                .map(|c| {
                    let chk = coercivity_check(c, &params, None)?;
                    let cells = c.samples().len() - 1;
                    Ok(vec![BoundReport::check_quadrature(
                        "coercivity",
                        chk.lhs,
                        chk.rhs,
                        cells,
                        0.0,
                    )])
                })
                .collect()
        }
        SuiteKind::ComponentCost => {
            let curves: Vec<GeneratingCurve> = (0..count).map(|_| sampler.sphere_like()).collect();
            curves.par_iter().map(|c| component_cost_check(c).map(|r| vec![r])).collect()
        }
        SuiteKind::GaussBonnet => {
            // Deterministic fixture sweep: topology is exact, so the defect
            // must shrink quadratically with resolution.
            let mut out = Vec::new();
            for n in [129usize, 257, 513] {
                let h = 1.0 / (n - 1) as f64;
                let tol = 100.0 * h * h * 4.0 * PI;
                let g = gauss_bonnet_check(&crate::shapes::sphere(1.0, n)?)?;
                out.push(vec![BoundReport::check("gauss_bonnet_sphere", g.defect, tol)]);
                let g = gauss_bonnet_check(&crate::shapes::torus(2.0, 1.0, n - 1)?)?;
                out.push(vec![BoundReport::check("gauss_bonnet_torus", g.defect, tol)]);
            }
            Ok(out)
        }
    }
}

fn z_extent(c: &GeneratingCurve) -> (f64, f64) {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for s in c.samples() {
        lo = lo.min(s.z);
        hi = hi.max(s.z);
    }
    (lo, hi)
}
