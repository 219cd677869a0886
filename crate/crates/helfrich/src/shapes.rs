//! Analytic profile curves: closed-form fixtures with known area, volume and
//! curvature, used as test oracles and as optimization seeds.
//!
//! All profiles are oriented bottom-to-top (counterclockwise around the
//! enclosed region), which makes the enclosed volume positive.

use std::f64::consts::PI;

use crate::curve::{reparametrize_constant_speed, GeneratingCurve, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::numeric::Vec2;

fn check_n(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        Err(Error::DegenerateInput(format!("need at least {MIN_SAMPLES} samples, got {n}")))
    } else {
        Ok(())
    }
}

fn check_positive(value: f64, what: &str) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateInput(format!("{what} must be positive, got {value}")))
    }
}

/// Semicircle profile of a sphere: area `4πr²`, volume `4πr³/3`, both
/// principal curvatures `1/r`.  The uniform angular sampling has exactly
/// equal chords.
pub fn sphere(radius: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(radius, "radius")?;
    check_n(n)?;
    let mut pts: Vec<Vec2> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            Vec2::new(radius * (PI * t).sin(), -radius * (PI * t).cos())
        })
        .collect();
    // sin(π) rounds to ~1.2e-16, not 0; the poles are exact by definition.
    pts[0] = Vec2::new(0.0, -radius);
    pts[n - 1] = Vec2::new(0.0, radius);
    GeneratingCurve::from_points(&pts, false)
}

/// Circular-torus profile: minor circle of radius `minor` around
/// `(major, 0)`.  Area `4π²·major·minor`, volume `2π²·major·minor²`,
/// meridian curvature `1/minor`.
pub fn torus(major: f64, minor: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(major, "major radius")?;
    check_positive(minor, "minor radius")?;
    check_n(n)?;
    if minor >= major {
        return Err(Error::DegenerateInput(format!(
            "torus profile needs minor < major, got {minor} >= {major}"
        )));
    }
    let pts: Vec<Vec2> = (0..n)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / n as f64;
            Vec2::new(major + minor * phi.cos(), minor * phi.sin())
        })
        .collect();
    GeneratingCurve::from_points(&pts, true)
}

/// Spheroid profile with equatorial radius `a` and polar radius `c`,
/// resampled to constant speed.
pub fn spheroid(a: f64, c: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(a, "equatorial radius")?;
    check_positive(c, "polar radius")?;
    check_n(n)?;
    let dense = (8 * n).max(1024);
    let mut pts: Vec<Vec2> = (0..=dense)
        .map(|i| {
            let t = i as f64 / dense as f64;
            Vec2::new(a * (PI * t).sin(), -c * (PI * t).cos())
        })
        .collect();
    pts[0] = Vec2::new(0.0, -c);
    pts[dense] = Vec2::new(0.0, c);
    let raw = GeneratingCurve::from_points(&pts, false)?;
    reparametrize_constant_speed(&raw, n)
}

/// Capsule profile: a cylinder of radius `r` and height `h` capped by two
/// hemispheres.  Along the cylindrical part the meridian curvature vanishes
/// while the parallel curvature is `1/r`.
pub fn capsule(radius: f64, height: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(radius, "radius")?;
    check_positive(height, "height")?;
    check_n(n)?;
    let arc = 0.5 * PI * radius;
    let total = 2.0 * arc + height;
    let trace = |s: f64| -> Vec2 {
        if s <= arc {
            // Lower cap, centered at (0, -height/2).
            let phi = s / radius; // 0 at the pole
            Vec2::new(radius * phi.sin(), -0.5 * height - radius * phi.cos())
        } else if s <= arc + height {
            Vec2::new(radius, s - arc - 0.5 * height)
        } else {
            let phi = (s - arc - height) / radius;
            Vec2::new(radius * phi.cos(), 0.5 * height + radius * phi.sin())
        }
    };
    let dense = (8 * n).max(1024);
    let mut pts: Vec<Vec2> = (0..=dense).map(|i| trace(total * i as f64 / dense as f64)).collect();
    pts[0] = Vec2::new(0.0, -0.5 * height - radius);
    pts[dense] = Vec2::new(0.0, 0.5 * height + radius);
    let raw = GeneratingCurve::from_points(&pts, false)?;
    reparametrize_constant_speed(&raw, n)
}

/// Straight vertical segment at radius `x`: the profile of a bounded
/// cylinder.  Not an admissible curve (endpoints are off the axis) but a
/// legitimate input for derivative stencils.
pub fn vertical_segment(x: f64, z0: f64, z1: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(x, "radius")?;
    check_n(n)?;
    if z1 <= z0 {
        return Err(Error::DegenerateInput(format!("need z1 > z0, got [{z0}, {z1}]")));
    }
    let pts: Vec<Vec2> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            Vec2::new(x, z0 + (z1 - z0) * t)
        })
        .collect();
    GeneratingCurve::from_points(&pts, false)
}

/// Chain of `count` unit-speed semicircles describing spheres of radius
/// `radius` tangent at poles along the axis: a generalized profile with
/// `count - 1` interior axis touches.
///
/// `n` is rounded up so every touch point is exactly a sample node.
pub fn tangent_spheres(count: usize, radius: f64, n: usize) -> Result<GeneratingCurve> {
    check_positive(radius, "radius")?;
    check_n(n)?;
    if count == 0 {
        return Err(Error::DegenerateInput("need at least one sphere".into()));
    }
    let cells_per = ((n - 1) + count - 1) / count; // ceil((n-1)/count)
    let cells = cells_per * count;
    let pts: Vec<Vec2> = (0..=cells)
        .map(|i| {
            let piece = (i / cells_per).min(count - 1);
            let u = (i - piece * cells_per) as f64 / cells_per as f64;
            let center = radius * (2.0 * piece as f64 - (count as f64 - 1.0));
            if i % cells_per == 0 || i == cells {
                // Poles and touch points lie exactly on the axis.
                let z = if u >= 1.0 { center + radius } else { center - radius };
                Vec2::new(0.0, z)
            } else {
                Vec2::new(radius * (PI * u).sin(), center - radius * (PI * u).cos())
            }
        })
        .collect();
    GeneratingCurve::from_points(&pts, false)
}

/// `count` disjoint spheres of radius `radius` stacked along the axis with
/// surface-to-surface spacing `gap`, as separate curves.
pub fn stacked_spheres(
    count: usize,
    radius: f64,
    gap: f64,
    n_each: usize,
) -> Result<Vec<GeneratingCurve>> {
    check_positive(radius, "radius")?;
    if count == 0 {
        return Err(Error::DegenerateInput("need at least one sphere".into()));
    }
    if gap <= 0.0 {
        return Err(Error::DegenerateInput(format!("gap must be positive, got {gap}")));
    }
    let pitch = 2.0 * radius + gap;
    (0..count)
        .map(|k| {
            let dz = pitch * (k as f64 - 0.5 * (count as f64 - 1.0));
            Ok(sphere(radius, n_each)?.translated_z(dz))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{validate, CurveClass};

    #[test]
    fn fixture_lengths_match_closed_forms() {
        let s = sphere(2.0, 257).unwrap();
        assert!((s.length() - 2.0 * PI).abs() < 1e-3);
        let t = torus(2.0, 1.0, 256).unwrap();
        assert!((t.length() - 2.0 * PI).abs() < 1e-3);
        let c = capsule(1.0, 10.0, 513).unwrap();
        assert!((c.length() - (PI + 10.0)).abs() < 1e-3);
    }

    #[test]
    fn spheroid_stays_on_the_ellipse() {
        let e = spheroid(1.0, 2.0, 257).unwrap();
        for s in e.samples() {
            let r = s.x * s.x + (s.z / 2.0) * (s.z / 2.0);
            assert!((r - 1.0).abs() < 1e-5, "implicit residual {:.3e}", r - 1.0);
        }
        assert_eq!(validate(&e).unwrap().class, CurveClass::SphereLike);
    }

    #[test]
    fn capsule_is_admissible() {
        let c = capsule(1.0, 3.0, 257).unwrap();
        assert_eq!(validate(&c).unwrap().class, CurveClass::SphereLike);
    }

    #[test]
    fn stacked_spheres_are_disjoint_and_admissible() {
        let parts = stacked_spheres(3, 1.0, 0.5, 65).unwrap();
        assert_eq!(parts.len(), 3);
        for p in &parts {
            assert_eq!(validate(p).unwrap().class, CurveClass::SphereLike);
        }
        // Consecutive spheres are separated by the gap.
        let top_of_first = parts[0].samples().last().unwrap().z;
        let bottom_of_second = parts[1].samples().first().unwrap().z;
        assert!((bottom_of_second - top_of_first - 0.5).abs() < 1e-12);
    }
}
