//! Starting profiles for constrained minimization.
//!
//! Every family here is controlled by a single shape parameter, and the
//! reduced volume `v = 6√π·V/A^{3/2}` is scale invariant, so seeding splits
//! into two independent steps: pick the parameter so the *discrete* reduced
//! volume at the emission resolution matches the target, then rescale once
//! for an exact area match.  Bisecting against the discrete value rather
//! than a continuum formula keeps the optimizer's initial constraint
//! residuals at the bisection tolerance instead of the discretization error.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::GeneratingCurve;
use crate::geometry::{area_measure, enclosed_volume};
use crate::shapes;
use crate::{Error, Result};

/// Families of initial profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedKind {
    /// Round sphere; requires reduced volume 1 up to a small gate.
    Sphere,
    /// Axially elongated spheroid, reduced volume below 1.
    Prolate,
    /// Axially flattened spheroid, reduced volume below 1.
    Oblate,
    /// Circular torus; reduced volume at most `3/(2√π) ≈ 0.846`.
    Torus,
    /// `k` equal disjoint spheres stacked along the axis; requires reduced
    /// volume `1/√k` up to a small gate.
    StackedSpheres(usize),
}

impl fmt::Display for SeedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedKind::Sphere => write!(f, "sphere"),
            SeedKind::Prolate => write!(f, "prolate"),
            SeedKind::Oblate => write!(f, "oblate"),
            SeedKind::Torus => write!(f, "torus"),
            SeedKind::StackedSpheres(k) => write!(f, "stacked-{k}"),
        }
    }
}

impl FromStr for SeedKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(SeedKind::Sphere),
            "prolate" => Ok(SeedKind::Prolate),
            "oblate" => Ok(SeedKind::Oblate),
            "torus" => Ok(SeedKind::Torus),
            _ => {
                if let Some(k) = s.strip_prefix("stacked-") {
                    let count: usize = k.parse().map_err(|_| {
                        Error::Seeding(format!("invalid stacked sphere count in {s:?}"))
                    })?;
                    if count == 0 {
                        return Err(Error::Seeding("stacked sphere count must be positive".into()));
                    }
                    return Ok(SeedKind::StackedSpheres(count));
                }
                Err(Error::Seeding(format!(
                    "unknown seed kind {s:?}; expected sphere, prolate, oblate, torus, or stacked-<k>"
                )))
            }
        }
    }
}

/// Reduced volume `6√π·V/A^{3/2}`: 1 for the ball, smaller for everything
/// else, scale invariant.
pub fn reduced_volume(area: f64, volume: f64) -> f64 {
    6.0 * PI.sqrt() * volume / area.powf(1.5)
}

fn discrete_reduced(curve: &GeneratingCurve) -> f64 {
    reduced_volume(area_measure(curve).area, enclosed_volume(curve))
}

/// How closely gated kinds (sphere, stacked spheres) must match their single
/// attainable reduced volume.
const GATE: f64 = 1e-6;

/// Builds a starting configuration with exactly the requested area whose
/// volume matches `volume` to the family's accuracy: bisected kinds
/// (prolate, oblate, torus) reach the target at the discrete level; gated
/// kinds carry the `O(h²)` quadrature gap of the sampled shape.
///
/// Fails with [`Error::Seeding`] when the family cannot represent the
/// requested reduced volume; the message names the attainable range.
pub fn seed_shape(
    kind: SeedKind,
    area: f64,
    volume: f64,
    nodes: usize,
) -> Result<Vec<GeneratingCurve>> {
    if !(area.is_finite() && area > 0.0) {
        return Err(Error::Seeding(format!("target area must be positive, got {area}")));
    }
    if !(volume.is_finite() && volume > 0.0) {
        return Err(Error::Seeding(format!("target volume must be positive, got {volume}")));
    }
    let v = reduced_volume(area, volume);

    let curves = match kind {
        SeedKind::Sphere => {
            if (v - 1.0).abs() > GATE {
                return Err(Error::Seeding(format!(
                    "sphere seed requires reduced volume 1, got {v:.9}; \
                     try prolate, oblate, torus, or stacked-k"
                )));
            }
            vec![shapes::sphere(1.0, nodes)?]
        }
        SeedKind::Prolate => {
            vec![bisect_shape(v, 1.0, 256.0, false, &|aspect| {
                shapes::spheroid(1.0, aspect, nodes)
            })?]
        }
        SeedKind::Oblate => {
            vec![bisect_shape(v, 1.0 / 256.0, 1.0, true, &|aspect| {
                shapes::spheroid(1.0, aspect, nodes)
            })?]
        }
        SeedKind::Torus => {
            vec![bisect_shape(v, 1e-3, 0.995, true, &|rho| shapes::torus(1.0, rho, nodes))?]
        }
        SeedKind::StackedSpheres(k) => {
            if k == 0 {
                return Err(Error::Seeding("stacked sphere count must be positive".into()));
            }
            let attainable = 1.0 / (k as f64).sqrt();
            if (v / attainable - 1.0).abs() > GATE {
                return Err(Error::Seeding(format!(
                    "{k} stacked spheres have reduced volume 1/√{k} ≈ {attainable:.9}, \
                     got {v:.9}"
                )));
            }
            shapes::stacked_spheres(k, 1.0, 0.5, nodes)?
        }
    };

    // One uniform dilation makes the total area exact; the reduced volume,
    // and with it the relative volume residual, is unchanged.
    let total: f64 = curves.iter().map(|c| area_measure(c).area).sum();
    let factor = (area / total).sqrt();
    curves.into_iter().map(|c| c.scaled(factor)).collect()
}

/// Bisects a one-parameter family against the discrete reduced volume.
/// `increasing` states how the reduced volume varies with the parameter.
fn bisect_shape(
    target: f64,
    lo: f64,
    hi: f64,
    increasing: bool,
    emit: &dyn Fn(f64) -> Result<GeneratingCurve>,
) -> Result<GeneratingCurve> {
    let v_lo = discrete_reduced(&emit(lo)?);
    let v_hi = discrete_reduced(&emit(hi)?);
    let (v_min, v_max) = if increasing { (v_lo, v_hi) } else { (v_hi, v_lo) };
    if target < v_min || target > v_max {
        return Err(Error::Seeding(format!(
            "family covers reduced volume [{v_min:.9}, {v_max:.9}] at this \
             resolution, got {target:.9}"
        )));
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut best = None;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // parameter interval exhausted at f64 granularity
        }
        let curve = emit(mid)?;
        let val = discrete_reduced(&curve);
        let err = val - target;
        best = Some(curve);
        if err.abs() <= 1e-12 * target.max(1.0) {
            break;
        }
        if (err > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    best.ok_or_else(|| Error::Seeding("degenerate bisection bracket".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn totals(curves: &[GeneratingCurve]) -> (f64, f64) {
        (
            curves.iter().map(|c| area_measure(c).area).sum(),
            curves.iter().map(enclosed_volume).sum(),
        )
    }

    #[test]
    fn sphere_seed_matches_area_exactly() {
        let target_a = 4.0 * PI;
        let target_v = 4.0 * PI / 3.0;
        let seed = seed_shape(SeedKind::Sphere, target_a, target_v, 513).unwrap();
        assert_eq!(seed.len(), 1);
        let (a, v) = totals(&seed);
        assert!((a / target_a - 1.0).abs() < 1e-12, "area residual {:e}", a / target_a - 1.0);
        // The volume keeps the O(h²) gap of the sampled semicircle.
        assert!((v / target_v - 1.0).abs() < 1e-5, "volume residual {:e}", v / target_v - 1.0);
    }

    #[test]
    fn bisected_families_hit_the_volume_target() {
        let target_a = 4.0 * PI;
        for (kind, v_red) in [
            (SeedKind::Prolate, 0.8),
            (SeedKind::Oblate, 0.8),
            (SeedKind::Torus, 0.5),
        ] {
            let target_v = v_red * target_a.powf(1.5) / (6.0 * PI.sqrt());
            let seed = seed_shape(kind, target_a, target_v, 257).unwrap();
            let (a, v) = totals(&seed);
            assert!((a / target_a - 1.0).abs() < 1e-12, "{kind}: area {:e}", a / target_a - 1.0);
            assert!((v / target_v - 1.0).abs() < 1e-8, "{kind}: volume {:e}", v / target_v - 1.0);
        }
    }

    #[test]
    fn prolate_and_oblate_differ_in_elongation() {
        let target_a = 4.0 * PI;
        let target_v = 0.8 * target_a.powf(1.5) / (6.0 * PI.sqrt());
        let height = |c: &GeneratingCurve| {
            let zs: Vec<f64> = c.samples().iter().map(|s| s.z).collect();
            zs.iter().cloned().fold(f64::MIN, f64::max) - zs.iter().cloned().fold(f64::MAX, f64::min)
        };
        let width = |c: &GeneratingCurve| c.samples().iter().map(|s| s.x).fold(0.0, f64::max);
        let p = &seed_shape(SeedKind::Prolate, target_a, target_v, 257).unwrap()[0];
        let o = &seed_shape(SeedKind::Oblate, target_a, target_v, 257).unwrap()[0];
        assert!(height(p) > 2.0 * width(p), "prolate should be elongated");
        assert!(height(o) < 2.0 * width(o), "oblate should be flattened");
    }

    #[test]
    fn torus_seed_recovers_the_continuum_radius_ratio() {
        // At reduced volume 1/2 the circular torus has minor/major = π/9.
        let target_a = 4.0 * PI;
        let target_v = 0.5 * target_a.powf(1.5) / (6.0 * PI.sqrt());
        let seed = &seed_shape(SeedKind::Torus, target_a, target_v, 513).unwrap()[0];
        let xs: Vec<f64> = seed.samples().iter().map(|s| s.x).collect();
        let (x_min, x_max) = xs.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        let ratio = (x_max - x_min) / (x_max + x_min);
        assert!((ratio - PI / 9.0).abs() < 3e-3, "minor/major {ratio} vs {}", PI / 9.0);
    }

    #[test]
    fn stacked_seed_emits_disjoint_spheres() {
        let target_a = 8.0 * PI;
        let target_v = (1.0 / 2.0f64.sqrt()) * target_a.powf(1.5) / (6.0 * PI.sqrt());
        let seed = seed_shape(SeedKind::StackedSpheres(2), target_a, target_v, 257).unwrap();
        assert_eq!(seed.len(), 2);
        let (a, v) = totals(&seed);
        assert!((a / target_a - 1.0).abs() < 1e-12);
        assert!((v / target_v - 1.0).abs() < 1e-5);
        // Disjoint along the axis: the first sphere ends below the second.
        let z_top = seed[0].samples().iter().map(|s| s.z).fold(f64::MIN, f64::max);
        let z_bot = seed[1].samples().iter().map(|s| s.z).fold(f64::MAX, f64::min);
        assert!(z_top < z_bot);
    }

    #[test]
    fn out_of_range_targets_name_the_attainable_window() {
        let a = 4.0 * PI;
        let vol = |v_red: f64| v_red * a.powf(1.5) / (6.0 * PI.sqrt());
        for (kind, v_red) in [
            (SeedKind::Torus, 0.9),   // tori stop at 3/(2√π) ≈ 0.846
            (SeedKind::Prolate, 1.0), // the round limit itself is excluded
            (SeedKind::Sphere, 0.8),
            (SeedKind::StackedSpheres(3), 1.0 / 2.0f64.sqrt()),
        ] {
            let err = seed_shape(kind, a, vol(v_red), 129).unwrap_err();
            assert!(matches!(err, Error::Seeding(_)), "{kind}: {err:?}");
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in [
            SeedKind::Sphere,
            SeedKind::Prolate,
            SeedKind::Oblate,
            SeedKind::Torus,
            SeedKind::StackedSpheres(4),
        ] {
            assert_eq!(kind.to_string().parse::<SeedKind>().unwrap(), kind);
        }
        assert!("stacked-0".parse::<SeedKind>().is_err());
        assert!("cube".parse::<SeedKind>().is_err());
    }
}
