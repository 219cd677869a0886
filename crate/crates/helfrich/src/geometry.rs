//! Geometric quantities of the revolved surface: area measure, enclosed
//! volume, principal curvatures, Gauss–Bonnet totals, diameter, and winding
//! numbers for embeddedness checks.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::curve::{
    symmetric_extension, validate, CurveClass, DerivativeStencil, GeneratingCurve,
};
use crate::discrete;
use crate::error::{Error, Result};
use crate::numeric::{pairwise_sum, point_segment_dist, Vec2};
use crate::system::SurfaceSystem;

/// Node quadrature weights for the rotationally invariant area measure,
/// aligned with `curve.samples()`.  Integrals of nodal quantities are plain
/// weighted sums; the weights themselves sum to the exact lateral area of
/// the revolved polyline.  On-axis nodes carry weight zero.
#[derive(Clone, Debug)]
pub struct AreaMeasure {
    pub node_weights: Vec<f64>,
    pub area: f64,
    pub length: f64,
}

pub fn area_measure(curve: &GeneratingCurve) -> AreaMeasure {
    let samples = curve.samples();
    let n = samples.len();
    // Chord-wise trapezoid weights on the seam-duplicated array: both seam
    // copies of a closed curve get the half-weight of their adjacent cell,
    // so the sum over samples telescopes to the full area.
    let chords: Vec<f64> =
        (0..n - 1).map(|j| samples[j + 1].point().dist(samples[j].point())).collect();
    let node_weights: Vec<f64> = (0..n)
        .map(|i| {
            let adjacent = if i == 0 {
                chords[0]
            } else if i == n - 1 {
                chords[n - 2]
            } else {
                chords[i - 1] + chords[i]
            };
            PI * samples[i].x * adjacent
        })
        .collect();
    let area = pairwise_sum(n, &|i| node_weights[i]);
    AreaMeasure { node_weights, area, length: curve.length() }
}

/// Signed volume enclosed by the revolved surface, `π ∫ x² ż dt` evaluated
/// exactly on the polyline.  Positive for bottom-to-top (counterclockwise)
/// orientation.
pub fn enclosed_volume(curve: &GeneratingCurve) -> f64 {
    let samples = curve.samples();
    std::f64::consts::FRAC_PI_3
        * pairwise_sum(samples.len() - 1, &|j| {
            let (a, b) = (samples[j], samples[j + 1]);
            (a.x * a.x + a.x * b.x + b.x * b.x) * (b.z - a.z)
        })
}

/// Principal curvatures at every sample: `meridian` along the profile,
/// `parallel` around the axis.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub meridian: Vec<f64>,
    pub parallel: Vec<f64>,
}

impl CurvatureField {
    pub fn mean(&self, i: usize) -> f64 {
        self.meridian[i] + self.parallel[i]
    }

    pub fn gauss(&self, i: usize) -> f64 {
        self.meridian[i] * self.parallel[i]
    }
}

/// Evaluates both principal curvatures from a derivative stencil.
///
/// At the axis endpoints of an open profile the parallel curvature is
/// continued by the umbilic value `meridian`; an interior on-axis node is an
/// error (split the curve first).
pub fn curvatures(curve: &GeneratingCurve, stencil: &DerivativeStencil) -> Result<CurvatureField> {
    let samples = curve.samples();
    let n = samples.len();
    if stencil.first.len() != n || stencil.second.len() != n {
        return Err(Error::DegenerateInput(format!(
            "stencil covers {} nodes but the curve has {n}",
            stencil.first.len()
        )));
    }
    let tol = curve.axis_tolerance();
    let mut meridian = Vec::with_capacity(n);
    let mut parallel = Vec::with_capacity(n);
    for i in 0..n {
        let k1 = discrete::k1_of(stencil.first[i], stencil.second[i]);
        let at_pole = !curve.closed() && (i == 0 || i == n - 1) && samples[i].x.abs() <= tol;
        let k2 = if at_pole {
            k1
        } else {
            if samples[i].x <= tol {
                return Err(Error::SingularNode { index: i, x: samples[i].x });
            }
            discrete::k2_of(stencil.first[i], samples[i].x)
        };
        meridian.push(k1);
        parallel.push(k2);
    }
    Ok(CurvatureField { meridian, parallel })
}

/// Quadratures of the squared and mixed curvatures against the area measure.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CurvatureNorms {
    /// ∫ k₁² dμ
    pub int_k1sq: f64,
    /// ∫ k₂² dμ
    pub int_k2sq: f64,
    /// ∫ k₁k₂ dμ — the total Gauss curvature
    #[serde(rename = "int_K")]
    pub int_gauss: f64,
    /// ∫ (k₁+k₂)² dμ
    #[serde(rename = "int_Hsq")]
    pub int_hsq: f64,
}

pub fn curvature_norms(field: &CurvatureField, measure: &AreaMeasure) -> CurvatureNorms {
    let n = measure.node_weights.len();
    assert_eq!(field.meridian.len(), n, "curvature field and measure disagree");
    let w = &measure.node_weights;
    let k1 = &field.meridian;
    let k2 = &field.parallel;
    CurvatureNorms {
        int_k1sq: pairwise_sum(n, &|i| k1[i] * k1[i] * w[i]),
        int_k2sq: pairwise_sum(n, &|i| k2[i] * k2[i] * w[i]),
        int_gauss: pairwise_sum(n, &|i| k1[i] * k2[i] * w[i]),
        int_hsq: pairwise_sum(n, &|i| {
            let h = k1[i] + k2[i];
            h * h * w[i]
        }),
    }
}

/// Total Gauss curvature against its topological value: `4π` for sphere-like
/// profiles, `0` for torus-like ones.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussBonnetReport {
    pub integral: f64,
    pub expected: f64,
    pub defect: f64,
}

pub fn gauss_bonnet_check(curve: &GeneratingCurve) -> Result<GaussBonnetReport> {
    let report = validate(curve)?;
    report.require_admissible()?;
    let expected = match report.class {
        CurveClass::SphereLike => 4.0 * PI,
        CurveClass::TorusLike => 0.0,
        CurveClass::Generalized => {
            return Err(Error::Validation(
                "total Gauss curvature of a generalized profile is ambiguous; split it at the axis first"
                    .into(),
            ));
        }
        CurveClass::Invalid => unreachable!("require_admissible filtered invalid curves"),
    };
    let stencil = crate::curve::derivatives(curve)?;
    let field = curvatures(curve, &stencil)?;
    let measure = area_measure(curve);
    let integral = pairwise_sum(measure.node_weights.len(), &|i| {
        field.meridian[i] * field.parallel[i] * measure.node_weights[i]
    });
    Ok(GaussBonnetReport { integral, expected, defect: (integral - expected).abs() })
}

/// Extrinsic diameter of the revolved surface: the longest distance is
/// realized either between two profile points in the same half-plane or
/// between a point and the reflection of another, which includes the two
/// antipodes on a single parallel.
pub fn diameter(curve: &GeneratingCurve) -> f64 {
    let pts: Vec<Vec2> = curve.samples().iter().map(|s| s.point()).collect();
    let mut best: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i..pts.len() {
            let dz = pts[i].z - pts[j].z;
            let same_side = (pts[i].x - pts[j].x).powi(2) + dz * dz;
            let across = (pts[i].x + pts[j].x).powi(2) + dz * dz;
            best = best.max(same_side).max(across);
        }
    }
    best.sqrt()
}

/// Winding number of a closed polyline around `point`, by summing signed
/// turning angles of the vertex directions.  The polyline may or may not
/// repeat its first vertex; errors if the point lies on the polyline.
pub fn winding_index(loop_points: &[Vec2], point: Vec2) -> Result<i32> {
    let mut pts: Vec<Vec2> = loop_points.to_vec();
    if pts.len() < 3 {
        return Err(Error::DegenerateInput("winding number needs at least 3 vertices".into()));
    }
    if pts[0].dist(pts[pts.len() - 1]) > 0.0 {
        pts.push(pts[0]);
    }
    let scale = pairwise_sum(pts.len() - 1, &|i| pts[i + 1].dist(pts[i])).max(f64::MIN_POSITIVE);
    for w in pts.windows(2) {
        if point_segment_dist(point, w[0], w[1]) <= 1e-12 * scale {
            return Err(Error::PointOnCurve);
        }
    }
    let mut total = 0.0;
    for w in pts.windows(2) {
        let u = w[0] - point;
        let v = w[1] - point;
        total += u.cross(v).atan2(u.dot(v));
    }
    let winding = total / (2.0 * PI);
    Ok(winding.round() as i32)
}

/// Checks that the system describes an embedded surface: at every probe
/// point of a `resolution × resolution` grid over the occupied half-plane
/// region, the winding numbers of all components (open profiles symmetrized
/// across the axis) must sum to 0 or 1.
pub fn index_admissible(system: &SurfaceSystem, resolution: usize) -> Result<bool> {
    if resolution < 2 {
        return Err(Error::DegenerateInput("need a grid of at least 2 x 2 probes".into()));
    }
    let mut loops: Vec<Vec<Vec2>> = Vec::new();
    let mut scale = 0.0;
    for comp in system.components() {
        scale += comp.length();
        if comp.closed() {
            loops.push(comp.distinct_points());
        } else {
            loops.push(symmetric_extension(comp)?);
        }
    }

    let (mut xmax, mut zmin, mut zmax) = (f64::MIN, f64::MAX, f64::MIN);
    for lp in &loops {
        for p in lp {
            xmax = xmax.max(p.x);
            zmin = zmin.min(p.z);
            zmax = zmax.max(p.z);
        }
    }
    let pad = 0.02 * scale.max(1e-300);
    let (zmin, zmax, xmax) = (zmin - pad, zmax + pad, xmax + pad);

    for ix in 0..resolution {
        for iz in 0..resolution {
            let p = Vec2::new(
                xmax * (ix as f64 + 0.5) / resolution as f64,
                zmin + (zmax - zmin) * (iz as f64 + 0.5) / resolution as f64,
            );
            let mut total = 0i32;
            let mut on_curve = false;
            for lp in &loops {
                match winding_index(lp, p) {
                    Ok(w) => total += w,
                    // Probes that land on a curve are boundary cases the
                    // winding sum cannot classify; skip them.
                    Err(Error::PointOnCurve) => {
                        on_curve = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            if on_curve {
                continue;
            }
            if total != 0 && total != 1 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::derivatives;
    use crate::shapes;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_area_and_volume() {
        let c = shapes::sphere(1.0, 513).unwrap();
        let m = area_measure(&c);
        assert_relative_eq!(m.area, 4.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(enclosed_volume(&c), 4.0 * PI / 3.0, max_relative = 1e-4);
        assert_eq!(m.node_weights[0], 0.0);
        assert_eq!(*m.node_weights.last().unwrap(), 0.0);
    }

    #[test]
    fn torus_area_and_volume() {
        let c = shapes::torus(2.0, 1.0, 512).unwrap();
        let m = area_measure(&c);
        assert_relative_eq!(m.area, 8.0 * PI * PI, max_relative = 1e-4);
        assert_relative_eq!(enclosed_volume(&c), 4.0 * PI * PI, max_relative = 1e-4);
    }

    #[test]
    fn orientation_flips_volume_sign() {
        let c = shapes::sphere(1.0, 257).unwrap();
        let v = enclosed_volume(&c);
        assert!(v > 0.0);
        assert_relative_eq!(enclosed_volume(&c.reversed()), -v, max_relative = 1e-12);
        // Area is orientation-free.
        assert_relative_eq!(area_measure(&c.reversed()).area, area_measure(&c).area);
    }

    #[test]
    fn sphere_curvatures_are_unit() {
        let c = shapes::sphere(1.0, 513).unwrap();
        let f = curvatures(&c, &derivatives(&c).unwrap()).unwrap();
        for i in 0..c.n() {
            assert!((f.meridian[i] - 1.0).abs() < 1e-3);
            assert!((f.parallel[i] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn torus_parallel_curvature_matches_closed_form() {
        let c = shapes::torus(2.0, 1.0, 512).unwrap();
        let f = curvatures(&c, &derivatives(&c).unwrap()).unwrap();
        for (i, s) in c.samples().iter().enumerate() {
            let phi = 2.0 * PI * s.t;
            let exact = phi.cos() / (2.0 + phi.cos());
            assert!((f.meridian[i] - 1.0).abs() < 1e-3, "meridian {}", f.meridian[i]);
            assert!((f.parallel[i] - exact).abs() < 1e-3, "parallel {}", f.parallel[i]);
        }
    }

    #[test]
    fn cylinder_part_of_capsule_has_flat_meridian() {
        let c = shapes::capsule(1.0, 10.0, 1025).unwrap();
        let f = curvatures(&c, &derivatives(&c).unwrap()).unwrap();
        // Middle of the profile lies on the straight cylinder wall.
        let mid = c.n() / 2;
        assert!(f.meridian[mid].abs() < 1e-6);
        assert_relative_eq!(f.parallel[mid], 1.0, max_relative = 1e-6);
    }

    #[test]
    fn curvature_norms_on_fixtures() {
        let s = shapes::sphere(1.0, 513).unwrap();
        let ns = curvature_norms(&curvatures(&s, &derivatives(&s).unwrap()).unwrap(), &area_measure(&s));
        assert_relative_eq!(ns.int_k1sq, 4.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(ns.int_k2sq, 4.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(ns.int_gauss, 4.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(ns.int_hsq, 16.0 * PI, max_relative = 1e-4);

        let t = shapes::torus(2.0, 1.0, 512).unwrap();
        let nt = curvature_norms(&curvatures(&t, &derivatives(&t).unwrap()).unwrap(), &area_measure(&t));
        assert!(nt.int_gauss.abs() < 1e-5 * 4.0 * PI, "int_K = {:.3e}", nt.int_gauss);
        // Closed form 16π²/√3, cross-checked against an independent
        // composite-Simpson quadrature of H² dA in the minor angle.
        let closed_form = 16.0 * PI * PI / 3.0_f64.sqrt();
        let simpson = {
            let f = |phi: f64| {
                let c = phi.cos();
                (2.0 + 2.0 * c).powi(2) / (2.0 + c)
            };
            let m = 20_000;
            let h = 2.0 * PI / m as f64;
            let mut acc = f(0.0) + f(2.0 * PI);
            for k in 1..m {
                acc += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            2.0 * PI * acc * h / 3.0
        };
        assert_relative_eq!(simpson, closed_form, max_relative = 1e-10);
        assert_relative_eq!(nt.int_hsq, closed_form, max_relative = 1e-4);
    }

    #[test]
    fn gauss_bonnet_sphere_and_torus() {
        let s = shapes::sphere(1.0, 513).unwrap();
        let gs = gauss_bonnet_check(&s).unwrap();
        assert!(gs.defect < 1e-4 * 4.0 * PI, "sphere defect {:.3e}", gs.defect);

        let t = shapes::torus(2.0, 1.0, 512).unwrap();
        let gt = gauss_bonnet_check(&t).unwrap();
        assert!(gt.defect < 1e-4 * 4.0 * PI, "torus defect {:.3e}", gt.defect);
    }

    #[test]
    fn gauss_bonnet_scale_invariance() {
        let s = shapes::sphere(1.0, 257).unwrap();
        let a = gauss_bonnet_check(&s).unwrap().integral;
        let b = gauss_bonnet_check(&s.scaled(7.5).unwrap()).unwrap().integral;
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn diameter_of_fixtures() {
        let s = shapes::sphere(1.0, 257).unwrap();
        assert_relative_eq!(diameter(&s), 2.0, max_relative = 1e-4);
        let t = shapes::torus(2.0, 1.0, 256).unwrap();
        assert_relative_eq!(diameter(&t), 6.0, max_relative = 1e-4);
        // Bounded cylinder: diagonal of (2r, h).
        let v = shapes::vertical_segment(1.0, -5.0, 5.0, 64).unwrap();
        assert_relative_eq!(diameter(&v), 104.0_f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn winding_of_simple_loops() {
        let t = shapes::torus(2.0, 1.0, 256).unwrap();
        let lp = t.distinct_points();
        assert_eq!(winding_index(&lp, Vec2::new(2.0, 0.0)).unwrap(), 1);
        assert_eq!(winding_index(&lp, Vec2::new(5.0, 0.0)).unwrap(), 0);
        assert_eq!(winding_index(&lp, Vec2::new(0.2, 0.0)).unwrap(), 0);
        // Reversal flips the sign.
        let rev = t.reversed();
        assert_eq!(winding_index(&rev.distinct_points(), Vec2::new(2.0, 0.0)).unwrap(), -1);
        assert!(matches!(
            winding_index(&lp, Vec2::new(3.0, 0.0)),
            Err(Error::PointOnCurve)
        ));
    }

    #[test]
    fn winding_of_self_overlapping_loop() {
        // Limaçon r(θ) = 1 + 2cosθ: points of the inner loop are enclosed
        // twice.  Oracle: ray-crossing parity counted by hand below.
        let n = 2048;
        let pts: Vec<Vec2> = (0..n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                let r = 1.0 + 2.0 * th.cos();
                Vec2::new(10.0 + r * th.cos(), r * th.sin())
            })
            .collect();
        // Between the loops (inside the outer one only): winding 1.
        assert_eq!(winding_index(&pts, Vec2::new(12.0, 0.0)).unwrap(), 1);
        // The inner loop spans (10,0)–(11,0); its interior winds twice.
        let inner = Vec2::new(10.5, 0.0);
        assert_eq!(winding_index(&pts, inner).unwrap(), 2);
        // Crossing oracle: count signed crossings of the horizontal ray.
        let mut crossings = 0i32;
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            if (a.z <= inner.z) != (b.z <= inner.z) {
                let xc = a.x + (b.x - a.x) * (inner.z - a.z) / (b.z - a.z);
                if xc > inner.x {
                    crossings += if b.z > a.z { 1 } else { -1 };
                }
            }
        }
        assert_eq!(crossings, 2);
    }

    #[test]
    fn index_admissibility_of_fixture_systems() {
        use crate::system::SurfaceSystem;
        let sphere = shapes::sphere(1.0, 129).unwrap();
        let sys = SurfaceSystem::new(vec![sphere]).unwrap();
        assert!(index_admissible(&sys, 48).unwrap());

        let stacked = shapes::stacked_spheres(2, 1.0, 0.6, 129).unwrap();
        let sys = SurfaceSystem::new(stacked).unwrap();
        assert!(index_admissible(&sys, 48).unwrap());

        // A sphere nested inside a larger sphere winds twice.
        let inner = shapes::sphere(0.5, 129).unwrap();
        let outer = shapes::sphere(2.0, 129).unwrap();
        let sys = SurfaceSystem::new(vec![inner, outer]).unwrap();
        assert!(!index_admissible(&sys, 48).unwrap());
    }
}
