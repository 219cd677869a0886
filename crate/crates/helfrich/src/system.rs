//! Systems of disjoint surface components.
//!
//! A [`SurfaceSystem`] is a finite union of admissible profile curves whose
//! revolved surfaces do not intersect.  Components may share isolated points
//! on the rotation axis (tangent spheres split out of a generalized profile),
//! but any other contact is rejected as an overlap.

use crate::curve::{validate, CurveClass, GeneratingCurve, ValidationReport};
use crate::error::{Error, Result};
use crate::numeric::{seg_seg_dist, Vec2};

#[derive(Clone, Debug)]
pub struct SurfaceSystem {
    components: Vec<GeneratingCurve>,
    reports: Vec<ValidationReport>,
}

impl SurfaceSystem {
    /// Validates every component and checks pairwise disjointness.
    ///
    /// Generalized profiles are rejected here: split them at the axis first
    /// and pass the pieces.
    pub fn new(components: Vec<GeneratingCurve>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DegenerateInput("a system needs at least one component".into()));
        }
        let mut reports = Vec::with_capacity(components.len());
        for (k, comp) in components.iter().enumerate() {
            let report = validate(comp)?;
            match report.class {
                CurveClass::SphereLike | CurveClass::TorusLike => {}
                CurveClass::Generalized => {
                    return Err(Error::Validation(format!(
                        "component {k} touches the axis at interior nodes; split it before building a system"
                    )));
                }
                CurveClass::Invalid => {
                    let list: Vec<String> =
                        report.violations.iter().map(|v| v.to_string()).collect();
                    return Err(Error::Validation(format!(
                        "component {k} is not admissible: {}",
                        list.join("; ")
                    )));
                }
            }
            reports.push(report);
        }

        let scale: f64 =
            components.iter().map(GeneratingCurve::length).sum::<f64>() / components.len() as f64;
        let tol = 1e-12 * scale;
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                if let Some(w) = closest_contact(&components[i], &components[j], tol) {
                    // Contact on the axis itself is a legitimate pole
                    // tangency between sphere-like components.
                    if w.x.abs() > crate::curve::AXIS_TOL_REL * scale {
                        return Err(Error::OverlappingComponents {
                            first: i,
                            second: j,
                            x: w.x,
                            z: w.z,
                        });
                    }
                }
            }
        }
        Ok(Self { components, reports })
    }

    /// Skips validation and the disjointness check.  Intended for optimizer
    /// internals that re-certify at checkpoints; prefer [`SurfaceSystem::new`].
    pub fn new_unchecked(components: Vec<GeneratingCurve>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DegenerateInput("a system needs at least one component".into()));
        }
        let reports =
            components.iter().map(validate).collect::<Result<Vec<ValidationReport>>>()?;
        Ok(Self { components, reports })
    }

    pub fn components(&self) -> &[GeneratingCurve] {
        &self.components
    }

    pub fn reports(&self) -> &[ValidationReport] {
        &self.reports
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn into_components(self) -> Vec<GeneratingCurve> {
        self.components
    }
}

/// Witness point where two profiles come within `tol` of each other, if any.
fn closest_contact(a: &GeneratingCurve, b: &GeneratingCurve, tol: f64) -> Option<Vec2> {
    // Cheap reject: bounding boxes further apart than tol cannot touch.
    let (alo, ahi) = bbox(a);
    let (blo, bhi) = bbox(b);
    if alo.x > bhi.x + tol
        || blo.x > ahi.x + tol
        || alo.z > bhi.z + tol
        || blo.z > ahi.z + tol
    {
        return None;
    }
    let pa = a.samples();
    let pb = b.samples();
    let mut best = f64::INFINITY;
    let mut witness = None;
    for i in 0..pa.len() - 1 {
        for j in 0..pb.len() - 1 {
            let (d, w) = seg_seg_dist(
                pa[i].point(),
                pa[i + 1].point(),
                pb[j].point(),
                pb[j + 1].point(),
            );
            if d < best {
                best = d;
                witness = Some(w);
            }
        }
    }
    if best <= tol {
        witness
    } else {
        None
    }
}

fn bbox(c: &GeneratingCurve) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::MAX, f64::MAX);
    let mut hi = Vec2::new(f64::MIN, f64::MIN);
    for s in c.samples() {
        lo.x = lo.x.min(s.x);
        lo.z = lo.z.min(s.z);
        hi.x = hi.x.max(s.x);
        hi.z = hi.z.max(s.z);
    }
    (lo, hi)
}
