//! Generating curves for surfaces of revolution.
//!
//! A surface is described by its profile in the `(x, z)` half-plane: `x` is
//! the distance from the rotation axis, `z` the height along it.  Profiles
//! come in three admissible classes:
//!
//! * open arcs whose endpoints lie on the axis — topological spheres;
//! * closed loops staying strictly away from the axis — tori;
//! * generalized profiles that touch the axis at interior nodes, which
//!   describe unions of spheres glued at poles and must be split with
//!   [`split_at_axis`] before curvature integrals make sense.
//!
//! All quadrature and stencil formulas assume uniform parameter speed, so
//! curves are stored with uniformly spaced parameters and validation rejects
//! samplings whose chord lengths deviate from uniform.  Use
//! [`reparametrize_constant_speed`] to repair an uneven sampling.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::discrete;
use crate::error::{Error, Result};
use crate::numeric::Vec2;

/// Fewest samples on which the second-order stencils and quadratures are
/// meaningful.
pub const MIN_SAMPLES: usize = 16;

/// Radial coordinates below this fraction of the curve length count as lying
/// on the rotation axis.
pub const AXIS_TOL_REL: f64 = discrete::AXIS_TOL_REL;

/// Default relative tolerance on chord-length uniformity.
pub const DEFAULT_SPEED_TOLERANCE: f64 = 1e-8;

/// One profile sample: parameter value and half-plane position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub x: f64,
    pub z: f64,
}

impl CurveSample {
    pub fn point(&self) -> Vec2 {
        Vec2::new(self.x, self.z)
    }
}

/// A uniformly parametrized profile curve.
///
/// Closed curves store the seam twice: the last sample repeats the first, so
/// `samples()` always covers the full parameter interval `[0, 1]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratingCurve {
    samples: Vec<CurveSample>,
    closed: bool,
    length: f64,
    speed_tolerance: f64,
}

impl GeneratingCurve {
    /// Builds a curve from node positions with uniform parameter spacing.
    ///
    /// For closed curves the seam copy is appended automatically when the
    /// first and last points do not already coincide.
    pub fn from_points(points: &[Vec2], closed: bool) -> Result<Self> {
        let mut pts: Vec<Vec2> = points.to_vec();
        if pts.len() < 2 {
            return Err(Error::DegenerateInput(format!(
                "a curve needs at least 2 points, got {}",
                pts.len()
            )));
        }
        if closed {
            let scale = polyline_length(&pts).max(f64::MIN_POSITIVE);
            if pts[0].dist(pts[pts.len() - 1]) > 1e-13 * scale {
                pts.push(pts[0]);
            } else {
                // Snap the seam exactly so closed storage is canonical.
                let last = pts.len() - 1;
                pts[last] = pts[0];
            }
            if pts.len() < 4 {
                return Err(Error::DegenerateInput(
                    "a closed curve needs at least 3 distinct points".into(),
                ));
            }
        }
        let length = polyline_length(&pts);
        let n = pts.len();
        let samples = pts
            .into_iter()
            .enumerate()
            .map(|(i, p)| CurveSample { t: i as f64 / (n - 1) as f64, x: p.x, z: p.z })
            .collect();
        Ok(Self { samples, closed, length, speed_tolerance: DEFAULT_SPEED_TOLERANCE })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    /// Number of stored samples (including the seam copy when closed).
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    /// Total chord length of the stored polyline.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn speed_tolerance(&self) -> f64 {
        self.speed_tolerance
    }

    pub fn with_speed_tolerance(mut self, tolerance: f64) -> Self {
        self.speed_tolerance = tolerance;
        self
    }

    /// Node positions without the duplicated seam.
    pub fn distinct_points(&self) -> Vec<Vec2> {
        let take = if self.closed { self.samples.len() - 1 } else { self.samples.len() };
        self.samples[..take].iter().map(CurveSample::point).collect()
    }

    /// Absolute radial tolerance for "on the axis" tests.
    pub fn axis_tolerance(&self) -> f64 {
        AXIS_TOL_REL * self.length
    }

    /// The same trace walked in the opposite direction (flips the surface
    /// orientation and the sign of the enclosed volume).
    pub fn reversed(&self) -> Self {
        let mut pts = self.distinct_points();
        pts.reverse();
        if self.closed {
            // Keep the seam at the original base point.
            pts.rotate_right(1);
        }
        Self::from_points(&pts, self.closed)
            .expect("reversal preserves validity")
            .with_speed_tolerance(self.speed_tolerance)
    }

    /// Rigid translation along the rotation axis.
    pub fn translated_z(&self, dz: f64) -> Self {
        let pts: Vec<Vec2> =
            self.distinct_points().into_iter().map(|p| Vec2::new(p.x, p.z + dz)).collect();
        Self::from_points(&pts, self.closed)
            .expect("translation preserves validity")
            .with_speed_tolerance(self.speed_tolerance)
    }

    /// Uniform dilation about the origin; `factor` must be positive.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::DegenerateInput(format!("scale factor must be positive, got {factor}")));
        }
        let pts: Vec<Vec2> = self.distinct_points().into_iter().map(|p| p * factor).collect();
        Ok(Self::from_points(&pts, self.closed)?.with_speed_tolerance(self.speed_tolerance))
    }
}

fn polyline_length(pts: &[Vec2]) -> f64 {
    crate::numeric::pairwise_sum(pts.len().saturating_sub(1), &|i| pts[i + 1].dist(pts[i]))
}

/// Admissibility class of a profile curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveClass {
    /// Open arc with both endpoints on the axis: a topological sphere.
    SphereLike,
    /// Closed loop strictly away from the axis: a topological torus.
    TorusLike,
    /// Touches the axis at interior nodes; split before integrating.
    Generalized,
    /// Fails at least one admissibility requirement.
    Invalid,
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CurveClass::SphereLike => "sphere-like",
            CurveClass::TorusLike => "torus-like",
            CurveClass::Generalized => "generalized",
            CurveClass::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

/// A specific admissibility failure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Violation {
    ZeroLength,
    /// Chord lengths deviate from uniform beyond the curve's tolerance.
    NonUniformSpeed { max_relative_deviation: f64 },
    /// Closed curve whose seam endpoints do not coincide.
    SeamGap { gap: f64 },
    /// Closed curve with a sharp corner at the seam.
    SeamKink { angle: f64, allowed: f64 },
    /// A sample lies at negative radius.
    NegativeRadius { index: usize, x: f64 },
    /// Open curve whose endpoint misses the axis.
    EndpointOffAxis { index: usize, x: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroLength => write!(f, "curve has zero length"),
            Violation::NonUniformSpeed { max_relative_deviation } => write!(
                f,
                "chord lengths deviate from uniform by {max_relative_deviation:.3e} (relative)"
            ),
            Violation::SeamGap { gap } => write!(f, "closed curve seam gap {gap:.3e}"),
            Violation::SeamKink { angle, allowed } => {
                write!(f, "seam corner angle {angle:.3e} exceeds {allowed:.3e}")
            }
            Violation::NegativeRadius { index, x } => {
                write!(f, "sample {index} has negative radius x = {x:.3e}")
            }
            Violation::EndpointOffAxis { index, x } => {
                write!(f, "endpoint {index} lies off the axis at x = {x:.3e}")
            }
        }
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub class: CurveClass,
    pub violations: Vec<Violation>,
    /// Interior sample indices lying on the axis (empty unless the class is
    /// [`CurveClass::Generalized`]).
    pub axis_touches: Vec<usize>,
}

impl ValidationReport {
    /// Errors with the collected violations unless the curve falls in one of
    /// the admissible classes.
    pub fn require_admissible(&self) -> Result<()> {
        if self.class == CurveClass::Invalid {
            let list: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::Validation(list.join("; ")))
        } else {
            Ok(())
        }
    }
}

/// Classifies a curve and collects admissibility violations.
///
/// Only curves with fewer than [`MIN_SAMPLES`] samples are rejected outright;
/// every other defect is reported, with `class == Invalid` when any is fatal.
pub fn validate(curve: &GeneratingCurve) -> Result<ValidationReport> {
    let n = curve.n();
    if n < MIN_SAMPLES {
        return Err(Error::DegenerateInput(format!(
            "validation needs at least {MIN_SAMPLES} samples, got {n}"
        )));
    }
    let pts: Vec<Vec2> = curve.samples.iter().map(CurveSample::point).collect();
    let mut violations = Vec::new();

    let chords: Vec<f64> = (0..n - 1).map(|i| pts[i + 1].dist(pts[i])).collect();
    let length = curve.length;
    if !(length > 0.0) {
        return Ok(ValidationReport {
            class: CurveClass::Invalid,
            violations: vec![Violation::ZeroLength],
            axis_touches: Vec::new(),
        });
    }
    let axis_tol = curve.axis_tolerance();

    let target = length / (n - 1) as f64;
    let max_dev = chords.iter().map(|c| (c - target).abs() / target).fold(0.0, f64::max);
    if max_dev > curve.speed_tolerance {
        violations.push(Violation::NonUniformSpeed { max_relative_deviation: max_dev });
    }

    for (i, p) in pts.iter().enumerate() {
        if p.x < -axis_tol {
            violations.push(Violation::NegativeRadius { index: i, x: p.x });
        }
    }

    let mut axis_touches: Vec<usize> = Vec::new();
    if curve.closed {
        let gap = pts[0].dist(pts[n - 1]);
        if gap > curve.speed_tolerance * length {
            violations.push(Violation::SeamGap { gap });
        }
        for (i, p) in pts.iter().enumerate().take(n - 1) {
            if p.x.abs() <= axis_tol {
                axis_touches.push(i);
            }
        }
        // A genuine corner at the seam breaks the smoothness the curvature
        // stencils assume -- unless the seam sits on the axis, where
        // generalized profiles are allowed tangent reversals.
        let seam_on_axis = pts[0].x.abs() <= axis_tol;
        if gap <= curve.speed_tolerance * length && !seam_on_axis {
            let turn = |a: Vec2, b: Vec2, c: Vec2| -> f64 {
                let u = b - a;
                let v = c - b;
                let denom = (u.norm() * v.norm()).max(f64::MIN_POSITIVE);
                (u.dot(v) / denom).clamp(-1.0, 1.0).acos()
            };
            let max_interior = (1..n - 1)
                .map(|i| turn(pts[i - 1], pts[i], pts[i + 1]))
                .fold(0.0, f64::max);
            let seam_turn = turn(pts[n - 2], pts[0], pts[1]);
            // Smooth resolutions concentrate at most a few cells' worth of
            // turning anywhere, so a seam angle far above the interior
            // maximum can only be a corner.
            let allowed = (4.0 * max_interior).max(1e-9);
            if seam_turn > allowed {
                violations.push(Violation::SeamKink { angle: seam_turn, allowed });
            }
        }
    } else {
        for &i in &[0, n - 1] {
            if pts[i].x.abs() > axis_tol {
                violations.push(Violation::EndpointOffAxis { index: i, x: pts[i].x });
            }
        }
        for (i, p) in pts.iter().enumerate().take(n - 1).skip(1) {
            if p.x.abs() <= axis_tol {
                axis_touches.push(i);
            }
        }
    }

    let class = if !violations.is_empty() {
        CurveClass::Invalid
    } else if !axis_touches.is_empty() {
        CurveClass::Generalized
    } else if curve.closed {
        CurveClass::TorusLike
    } else {
        CurveClass::SphereLike
    };
    Ok(ValidationReport { class, violations, axis_touches })
}

/// Resamples a curve at `n_out` uniformly spaced arc-length stations.
///
/// Stations are placed along the polyline trace itself (piecewise-linear,
/// periodic for closed curves) and iterated to equal-chord positions, so the
/// output passes the uniform-speed check at the default tolerance.  Staying
/// on the polyline matters more than smoothness here: an interpolating
/// spline overshoots wherever the trace bends sharply, which amplifies any
/// incipient wiggle on every resample and can even dive below the axis near
/// a pinch, while points of the polyline stay in the convex hull of their
/// segment ends.  Endpoints of open curves are preserved exactly, as is the
/// seam point of closed curves.  The operation is idempotent up to roundoff.
///
/// Interior axis touches of generalized profiles are not sampling-stable:
/// the touch point generally falls between output nodes and the class decays
/// to an ordinary one.  Split such curves first.
pub fn reparametrize_constant_speed(
    curve: &GeneratingCurve,
    n_out: usize,
) -> Result<GeneratingCurve> {
    if n_out < MIN_SAMPLES {
        return Err(Error::DegenerateInput(format!(
            "resampling needs at least {MIN_SAMPLES} output samples, got {n_out}"
        )));
    }
    let closed = curve.closed;
    let mut pts = curve.distinct_points();
    dedupe_consecutive(&mut pts, closed);
    if pts.len() < if closed { 3 } else { 2 } {
        return Err(Error::DegenerateInput("curve degenerates to a point".into()));
    }

    let trace = PolylineTrace::fit(&pts, closed);
    let total = trace.knot_total();
    if !(total > 0.0) {
        return Err(Error::DegenerateInput("curve degenerates to a point".into()));
    }

    // On a polyline the cumulative chord IS the arc length, so equal-arc
    // stations need no inversion.
    let cells = n_out - 1;
    let mut w_nodes: Vec<f64> = (0..=cells).map(|i| total * i as f64 / cells as f64).collect();

    // Fixed-point refinement: re-place nodes at equal cumulative-chord
    // levels of the current polyline until the chords are uniform.
    let mut best_dev = f64::INFINITY;
    for _ in 0..100 {
        let nodes: Vec<Vec2> = w_nodes.iter().map(|&w| trace.eval(w)).collect();
        let mut cum = vec![0.0];
        for j in 0..cells {
            let c = nodes[j + 1].dist(nodes[j]);
            cum.push(cum[j] + c);
        }
        let g_total = cum[cells];
        if !(g_total > 0.0) {
            return Err(Error::DegenerateInput("curve degenerates to a point".into()));
        }
        let target = g_total / cells as f64;
        let dev = (0..cells)
            .map(|j| ((cum[j + 1] - cum[j]) - target).abs() / target)
            .fold(0.0, f64::max);
        if dev <= 1e-13 || dev >= best_dev {
            break;
        }
        best_dev = dev;
        let mut next = Vec::with_capacity(cells + 1);
        next.push(0.0);
        for i in 1..cells {
            let s_target = g_total * i as f64 / cells as f64;
            next.push(invert_monotone(&cum, &w_nodes, s_target));
        }
        next.push(total);
        w_nodes = next;
    }

    let mut out: Vec<Vec2> = w_nodes.iter().map(|&w| trace.eval(w)).collect();
    out[0] = pts[0];
    if closed {
        out.pop(); // from_points re-appends the seam copy of the start point
    } else {
        out[cells] = pts[pts.len() - 1];
    }
    Ok(GeneratingCurve::from_points(&out, closed)?.with_speed_tolerance(curve.speed_tolerance))
}

fn dedupe_consecutive(pts: &mut Vec<Vec2>, closed: bool) {
    let scale = polyline_length(pts).max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale;
    let mut out: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter() {
        if out.last().map_or(true, |&q| p.dist(q) > tol) {
            out.push(p);
        }
    }
    if closed && out.len() > 1 && out[0].dist(out[out.len() - 1]) <= tol {
        out.pop();
    }
    *pts = out;
}

/// Arc-length parametrization of a polyline trace (periodic when closed).
struct PolylineTrace {
    knots: Vec<f64>,
    points: Vec<Vec2>,
    closed: bool,
}

impl PolylineTrace {
    fn fit(pts: &[Vec2], closed: bool) -> Self {
        let m = pts.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(0.0);
        for j in 0..m - 1 {
            knots.push(knots[j] + pts[j + 1].dist(pts[j]));
        }
        if closed {
            knots.push(knots[m - 1] + pts[0].dist(pts[m - 1]));
        }
        Self { knots, points: pts.to_vec(), closed }
    }

    fn knot_total(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn eval(&self, w: f64) -> Vec2 {
        let total = self.knot_total();
        let m = self.points.len();
        let w = if self.closed { w.rem_euclid(total) } else { w.clamp(0.0, total) };
        // Locate the knot interval by binary search.
        let seg = match self.knots.binary_search_by(|k| k.partial_cmp(&w).unwrap()) {
            Ok(j) => j.min(self.knots.len() - 2),
            Err(j) => j - 1,
        };
        let h = self.knots[seg + 1] - self.knots[seg];
        if h <= 0.0 {
            return self.points[seg % m];
        }
        let u = (w - self.knots[seg]) / h;
        let (p0, p1) = (self.points[seg % m], self.points[(seg + 1) % m]);
        p0 * (1.0 - u) + p1 * u
    }
}

fn invert_monotone(s: &[f64], w: &[f64], target: f64) -> f64 {
    // s is nondecreasing; returns w linearly interpolated at s = target.
    let n = s.len();
    if target <= s[0] {
        return w[0];
    }
    if target >= s[n - 1] {
        return w[n - 1];
    }
    let mut lo = 0;
    let mut hi = n - 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if s[mid] <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let span = s[hi] - s[lo];
    if span <= 0.0 {
        w[lo]
    } else {
        w[lo] + (w[hi] - w[lo]) * (target - s[lo]) / span
    }
}

/// Finite-difference derivative scheme used for a curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StencilScheme {
    /// Periodic central differences (closed curves).
    CentralPeriodic,
    /// Central differences with one-sided second-order ends (open curves).
    CentralOneSided,
}

/// First and second parameter derivatives at every sample.
///
/// The first derivative carries the central-difference direction scaled by
/// the chord-average speed, so its magnitude matches the curve length on a
/// uniform-speed curve; see [`DerivativeStencil::max_speed_deviation`].
#[derive(Clone, Debug)]
pub struct DerivativeStencil {
    pub first: Vec<Vec2>,
    pub second: Vec<Vec2>,
    pub scheme: StencilScheme,
}

impl DerivativeStencil {
    /// Largest relative deviation of `|first|` from the curve length.
    pub fn max_speed_deviation(&self, curve: &GeneratingCurve) -> f64 {
        let len = curve.length().max(f64::MIN_POSITIVE);
        self.first.iter().map(|d| (d.norm() - len).abs() / len).fold(0.0, f64::max)
    }
}

/// Computes derivative stencils for a curve (no admissibility check: the
/// formulas are meaningful for any polyline, e.g. profiles of bounded
/// cylinders that fail validation).
pub fn derivatives(curve: &GeneratingCurve) -> Result<DerivativeStencil> {
    let pts = curve.distinct_points();
    let meas = discrete::measure(&pts, curve.closed);
    let st = discrete::stencil(&pts, curve.closed, &meas)?;
    let (mut first, mut second) = (st.first, st.second);
    if curve.closed {
        // Duplicate the seam so the stencil aligns with `samples()`.
        first.push(first[0]);
        second.push(second[0]);
    }
    Ok(DerivativeStencil {
        first,
        second,
        scheme: if curve.closed {
            StencilScheme::CentralPeriodic
        } else {
            StencilScheme::CentralOneSided
        },
    })
}

/// Splits a generalized profile at its interior axis touches.
///
/// Nodes are conserved exactly: every output piece keeps its parent's sample
/// positions (with the radii of the new on-axis endpoints snapped to zero),
/// so lengths, areas, volumes and curvature integrals of the pieces sum to
/// the parent's values.  Ordinary sphere-like and torus-like curves come back
/// unchanged as a single piece.
pub fn split_at_axis(curve: &GeneratingCurve) -> Result<Vec<GeneratingCurve>> {
    let report = validate(curve)?;
    report.require_admissible()?;
    if report.axis_touches.is_empty() {
        return Ok(vec![curve.clone()]);
    }

    let axis_tol = curve.axis_tolerance();
    let mut pts = curve.distinct_points();
    let m = pts.len();

    // Collapse runs of consecutive on-axis nodes to their first index.
    let mut touches: Vec<usize> = Vec::new();
    for &i in &report.axis_touches {
        if touches.last().map_or(true, |&j| i > j + 1) {
            touches.push(i);
        }
    }

    let chains: Vec<Vec<Vec2>> = if curve.closed {
        // Rotate so a touch sits at index 0, then cut the loop open there.
        let shift = touches[0];
        pts.rotate_left(shift);
        let touches: Vec<usize> = touches.iter().map(|&i| i - shift).collect();
        let mut chain = pts;
        chain.push(chain[0]);
        cut_chain(chain, &touches, m)
    } else {
        cut_chain(pts, &touches, m - 1)
    };

    let mut out = Vec::with_capacity(chains.len());
    for mut chain in chains {
        if chain.len() < MIN_SAMPLES {
            return Err(Error::DegenerateInput(format!(
                "axis splitting leaves a piece with {} samples; resample the curve finer first",
                chain.len()
            )));
        }
        for idx in [0, chain.len() - 1] {
            if chain[idx].x.abs() <= axis_tol {
                chain[idx].x = 0.0;
            }
        }
        out.push(
            GeneratingCurve::from_points(&chain, false)?
                .with_speed_tolerance(curve.speed_tolerance),
        );
    }
    Ok(out)
}

fn cut_chain(chain: Vec<Vec2>, interior_cuts: &[usize], last: usize) -> Vec<Vec<Vec2>> {
    let mut bounds = vec![0usize];
    bounds.extend(interior_cuts.iter().copied().filter(|&i| i > 0 && i < last));
    bounds.push(last);
    bounds.windows(2).map(|w| chain[w[0]..=w[1]].to_vec()).collect()
}

/// Reflects a sphere-like profile across the axis into the closed polyline
/// `(x(t), z(t))` followed by `(-x(1-t), z(1-t))`; the first and last points
/// coincide.  Winding-number arguments for open profiles run through this
/// extension.
pub fn symmetric_extension(curve: &GeneratingCurve) -> Result<Vec<Vec2>> {
    let report = validate(curve)?;
    if report.class != CurveClass::SphereLike {
        return Err(Error::Validation(format!(
            "symmetric extension needs an open profile with endpoints on the axis; got a {} curve",
            report.class
        )));
    }
    let pts: Vec<Vec2> = curve.samples.iter().map(CurveSample::point).collect();
    let n = pts.len();
    let mut out = Vec::with_capacity(2 * n - 1);
    out.extend(pts.iter().copied());
    out.extend(pts[1..n - 1].iter().rev().map(|p| p.mirrored()));
    out.push(pts[0]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use std::f64::consts::PI;

    #[test]
    fn sphere_profile_is_sphere_like() {
        let c = shapes::sphere(1.0, 257).unwrap();
        let r = validate(&c).unwrap();
        assert_eq!(r.class, CurveClass::SphereLike);
        assert!(r.violations.is_empty());
        assert!(r.axis_touches.is_empty());
    }

    #[test]
    fn torus_profile_is_torus_like() {
        let c = shapes::torus(2.0, 1.0, 256).unwrap();
        let r = validate(&c).unwrap();
        assert_eq!(r.class, CurveClass::TorusLike);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn tangent_spheres_are_generalized() {
        let c = shapes::tangent_spheres(2, 1.0, 129).unwrap();
        let r = validate(&c).unwrap();
        assert_eq!(r.class, CurveClass::Generalized);
        assert_eq!(r.axis_touches.len(), 1);
    }

    #[test]
    fn vertical_segment_is_invalid() {
        let c = shapes::vertical_segment(1.0, -5.0, 5.0, 64).unwrap();
        let r = validate(&c).unwrap();
        assert_eq!(r.class, CurveClass::Invalid);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::EndpointOffAxis { .. })));
    }

    #[test]
    fn clustered_sampling_fails_uniform_speed() {
        // Same semicircle trace, cosine-clustered parameter.
        let n = 129;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                let u = 0.5 * (1.0 - (PI * t).cos());
                Vec2::new((PI * u).sin(), -(PI * u).cos())
            })
            .collect();
        let c = GeneratingCurve::from_points(&pts, false).unwrap();
        let r = validate(&c).unwrap();
        assert_eq!(r.class, CurveClass::Invalid);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonUniformSpeed { .. })));

        // Resampling repairs it and recovers the arc length up to the
        // inscribed-chord deficit of the 128-segment input (sum of arc^3/24
        // over its segments, about 1.3e-4 here); stations stay on the input
        // polyline, so no length beyond the input's can reappear.
        let fixed = reparametrize_constant_speed(&c, 512).unwrap();
        let rf = validate(&fixed).unwrap();
        assert_eq!(rf.class, CurveClass::SphereLike, "{:?}", rf.violations);
        assert!((fixed.length() - PI).abs() < 5e-4, "length {}", fixed.length());
        let target = fixed.length() / 511.0;
        let s = fixed.samples();
        for i in 0..511 {
            let chord = s[i + 1].point().dist(s[i].point());
            assert!((chord - target).abs() / target < 1e-10);
        }
    }

    #[test]
    fn reparametrization_is_idempotent() {
        let c = shapes::sphere(1.0, 257).unwrap();
        let again = reparametrize_constant_speed(&c, 257).unwrap();
        let max_shift = c
            .samples()
            .iter()
            .zip(again.samples())
            .map(|(a, b)| a.point().dist(b.point()))
            .fold(0.0, f64::max);
        assert!(max_shift < 1e-12, "nodes moved by {max_shift:.3e}");
    }

    #[test]
    fn reparametrization_preserves_closed_curves() {
        let c = shapes::torus(2.0, 0.7, 200).unwrap();
        let out = reparametrize_constant_speed(&c, 256).unwrap();
        let r = validate(&out).unwrap();
        assert_eq!(r.class, CurveClass::TorusLike, "{:?}", r.violations);
        // Inscribed-polygon lengths at different N differ at O(h²); compare
        // both to the circumference instead of to each other.
        let circumference = 2.0 * PI * 0.7;
        assert!((out.length() - circumference).abs() < 1e-4 * circumference);
        // Every output node should still lie on the minor circle up to the
        // O(h³) trace accuracy of the chord-fit spline.
        for s in out.samples() {
            let d = ((s.x - 2.0).powi(2) + s.z * s.z).sqrt();
            assert!((d - 0.7).abs() < 1e-4, "node off the circle by {:.3e}", (d - 0.7).abs());
        }
    }

    #[test]
    fn stencil_magnitude_matches_length() {
        for c in [shapes::sphere(1.0, 513).unwrap(), shapes::torus(2.0, 1.0, 512).unwrap()] {
            let st = derivatives(&c).unwrap();
            let dev = st.max_speed_deviation(&c);
            assert!(dev <= 5.0 * c.speed_tolerance(), "speed deviation {dev:.3e}");
        }
    }

    #[test]
    fn sphere_first_derivative_magnitude_near_pi() {
        let c = shapes::sphere(1.0, 513).unwrap();
        let st = derivatives(&c).unwrap();
        for d in &st.first {
            assert!((d.norm() - PI).abs() < 1e-3);
        }
    }

    #[test]
    fn torus_second_derivative_matches_analytic() {
        let c = shapes::torus(2.0, 1.0, 513).unwrap();
        let st = derivatives(&c).unwrap();
        let omega = 2.0 * PI;
        for (i, s) in c.samples().iter().enumerate() {
            let exact = Vec2::new(
                -omega * omega * (omega * s.t).cos(),
                -omega * omega * (omega * s.t).sin(),
            );
            let diff = (st.second[i] - exact).norm();
            assert!(diff < 1e-3 * exact.norm(), "node {i}: diff {diff:.3e}");
        }
    }

    #[test]
    fn straight_segment_has_zero_second_derivative() {
        let c = shapes::vertical_segment(1.0, -5.0, 5.0, 64).unwrap();
        let st = derivatives(&c).unwrap();
        for dd in &st.second {
            // Zero up to cancellation noise amplified by 1/Δt².
            assert!(dd.norm() < 1e-8, "second difference {:.3e}", dd.norm());
        }
        for d in &st.first {
            assert!((d.norm() - 10.0).abs() < 1e-12);
            assert!(d.x.abs() < 1e-12);
        }
    }

    #[test]
    fn split_leaves_plain_profiles_alone() {
        let sphere = shapes::sphere(1.0, 129).unwrap();
        assert_eq!(split_at_axis(&sphere).unwrap().len(), 1);
        let torus = shapes::torus(2.0, 1.0, 128).unwrap();
        assert_eq!(split_at_axis(&torus).unwrap().len(), 1);
    }

    #[test]
    fn split_separates_tangent_spheres() {
        for count in [2usize, 3] {
            let chain = shapes::tangent_spheres(count, 1.0, count * 64 + 1).unwrap();
            let pieces = split_at_axis(&chain).unwrap();
            assert_eq!(pieces.len(), count);
            let total: f64 = pieces.iter().map(|p| p.length()).sum();
            assert!((total - chain.length()).abs() < 1e-9 * chain.length());
            for p in &pieces {
                let r = validate(p).unwrap();
                assert_eq!(r.class, CurveClass::SphereLike, "{:?}", r.violations);
            }
        }
    }

    #[test]
    fn split_rejects_under_resolved_pieces() {
        let chain = shapes::tangent_spheres(2, 1.0, 21).unwrap();
        assert!(matches!(split_at_axis(&chain), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn symmetric_extension_closes_to_full_circle() {
        let c = shapes::sphere(1.0, 129).unwrap();
        let ext = symmetric_extension(&c).unwrap();
        assert_eq!(ext.len(), 2 * 129 - 1);
        assert_eq!(ext[0], ext[ext.len() - 1]);
        for p in &ext {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
        let torus = shapes::torus(2.0, 1.0, 128).unwrap();
        assert!(symmetric_extension(&torus).is_err());
    }

    #[test]
    fn reversal_and_translation_preserve_class() {
        let c = shapes::sphere(1.0, 129).unwrap();
        assert_eq!(validate(&c.reversed()).unwrap().class, CurveClass::SphereLike);
        assert_eq!(
            validate(&c.translated_z(3.5)).unwrap().class,
            CurveClass::SphereLike
        );
        let t = shapes::torus(2.0, 1.0, 128).unwrap();
        assert_eq!(validate(&t.reversed()).unwrap().class, CurveClass::TorusLike);
        assert_eq!(validate(&t.scaled(2.0).unwrap()).unwrap().class, CurveClass::TorusLike);
    }
}
