//! Bending energy of revolved surfaces and the coercivity estimate that
//! keeps the constrained minimization problem bounded below.

use serde::{Deserialize, Serialize};

use crate::curve::{derivatives, validate, CurveClass, GeneratingCurve};
use crate::error::{Error, Result};
use crate::geometry::{area_measure, curvature_norms, curvatures, enclosed_volume, CurvatureNorms};
use crate::numeric::pairwise_sum;
use crate::system::SurfaceSystem;

/// Material constants of the bending energy
/// `∫ { κ_H/2 (k₁+k₂−H₀)² + κ_G k₁k₂ } dμ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Bending rigidity, must be positive.
    pub kappa_h: f64,
    /// Gaussian-curvature rigidity.
    pub kappa_g: f64,
    /// Spontaneous curvature.
    pub h0: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self { kappa_h: 1.0, kappa_g: -1.0, h0: 0.0 }
    }
}

impl MaterialParams {
    pub fn new(kappa_h: f64, kappa_g: f64, h0: f64) -> Result<Self> {
        let p = Self { kappa_h, kappa_g, h0 };
        p.validate()?;
        Ok(p)
    }

    /// The rigidity ratio `κ_G/κ_H` must lie in `(-2, 0)` for the energy to
    /// control the curvature norms (and hence for minimizers to exist).
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_h > 0.0) || !self.kappa_h.is_finite() {
            return Err(Error::CoercivityRange(format!(
                "bending rigidity must be positive, got {}",
                self.kappa_h
            )));
        }
        let ratio = self.kappa_g / self.kappa_h;
        if !(ratio > -2.0 && ratio < 0.0) {
            return Err(Error::CoercivityRange(format!(
                "rigidity ratio kappa_g/kappa_h must lie in (-2, 0), got {ratio}"
            )));
        }
        if !self.h0.is_finite() {
            return Err(Error::CoercivityRange("spontaneous curvature must be finite".into()));
        }
        Ok(())
    }

    pub fn ratio(&self) -> f64 {
        self.kappa_g / self.kappa_h
    }
}

/// Bending energy of a single admissible curve.
pub fn helfrich_energy(curve: &GeneratingCurve, params: &MaterialParams) -> Result<f64> {
    Ok(energy_integrals(curve, params)?.helfrich)
}

/// Willmore energy `¼ ∫ (k₁+k₂)² dμ`.
pub fn willmore_energy(curve: &GeneratingCurve) -> Result<f64> {
    Ok(0.25 * energy_integrals(curve, &MaterialParams::default())?.norms.int_hsq)
}

struct ComponentIntegrals {
    helfrich: f64,
    norms: CurvatureNorms,
    area: f64,
    volume: f64,
    length: f64,
    samples: usize,
    class: CurveClass,
}

fn energy_integrals(
    curve: &GeneratingCurve,
    params: &MaterialParams,
) -> Result<ComponentIntegrals> {
    let report = validate(curve)?;
    report.require_admissible()?;
    let stencil = derivatives(curve)?;
    let field = curvatures(curve, &stencil)?;
    let measure = area_measure(curve);
    let norms = curvature_norms(&field, &measure);
    let n = measure.node_weights.len();
    let helfrich = pairwise_sum(n, &|i| {
        let dev = field.mean(i) - params.h0;
        (0.5 * params.kappa_h * dev * dev + params.kappa_g * field.gauss(i))
            * measure.node_weights[i]
    });
    Ok(ComponentIntegrals {
        helfrich,
        norms,
        area: measure.area,
        volume: enclosed_volume(curve),
        length: measure.length,
        samples: curve.n(),
        class: report.class,
    })
}

/// Constants of the curvature-control estimate
/// `∫(k₁²+k₂²) dμ ≤ C · (area + energy)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoercivityConstants {
    pub epsilon: f64,
    /// `c₁ = κ_H / (2ε)`
    pub c1: f64,
    /// `c₂ = (κ_H − |κ_H + κ_G(1+ε)|) / (2(1+ε))`
    pub c2: f64,
    /// `C = (1 + c₁·H₀²) / c₂`
    #[serde(rename = "C")]
    pub constant: f64,
}

/// Largest ε for which `c₂ > 0`; ε must lie strictly inside `(0, this)`.
pub fn epsilon_limit(params: &MaterialParams) -> Result<f64> {
    params.validate()?;
    Ok(-2.0 / params.ratio() - 1.0)
}

/// Computes the coercivity constants, choosing ε at the midpoint of its
/// admissible range when not supplied.
pub fn coercivity_constants(
    params: &MaterialParams,
    epsilon: Option<f64>,
) -> Result<CoercivityConstants> {
    let limit = epsilon_limit(params)?;
    let epsilon = epsilon.unwrap_or(0.5 * limit);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::CoercivityRange(format!(
            "epsilon must lie in (0, {limit:.6}), got {epsilon}"
        )));
    }
    let c1 = params.kappa_h / (2.0 * epsilon);
    let c2 = (params.kappa_h - (params.kappa_h + params.kappa_g * (1.0 + epsilon)).abs())
        / (2.0 * (1.0 + epsilon));
    debug_assert!(c2 > 0.0, "epsilon range check guarantees c2 > 0");
    let constant = (1.0 + c1 * params.h0 * params.h0) / c2;
    Ok(CoercivityConstants { epsilon, c1, c2, constant })
}

/// Evaluation of the coercivity inequality on one curve.
///
/// The estimate is a theorem whenever `c₁·H₀² ≤ 1`: pointwise,
/// `κ_H/2 (k₁+k₂−H₀)² + κ_G k₁k₂ ≥ c₂(k₁²+k₂²) − c₁H₀²`, and integrating
/// gives `∫(k₁²+k₂²) ≤ (energy + c₁H₀²·area)/c₂ ≤ C(area + energy)` because
/// the energy is then at least `−c₁H₀²·area ≥ −area`.  For larger `c₁·H₀²`
/// the combined form can fail (area + energy may be negative); the check
/// simply reports what it finds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CoercivityCheck {
    /// ∫(k₁²+k₂²) dμ
    pub lhs: f64,
    /// C · (area + energy)
    pub rhs: f64,
    #[serde(rename = "C")]
    pub constant: f64,
    pub holds: bool,
    pub constants: CoercivityConstants,
}

pub fn coercivity_check(
    curve: &GeneratingCurve,
    params: &MaterialParams,
    epsilon: Option<f64>,
) -> Result<CoercivityCheck> {
    let constants = coercivity_constants(params, epsilon)?;
    let ints = energy_integrals(curve, params)?;
    let lhs = ints.norms.int_k1sq + ints.norms.int_k2sq;
    let rhs = constants.constant * (ints.area + ints.helfrich);
    // Slack tolerance so exact-equality cases are not rejected by roundoff.
    let holds = lhs <= rhs + 1e-9 * rhs.abs().max(lhs.abs());
    Ok(CoercivityCheck { lhs, rhs, constant: constants.constant, holds, constants })
}

/// Energy and geometry summary of one component.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ComponentEnergy {
    pub helfrich: f64,
    pub willmore: f64,
    pub area: f64,
    pub volume: f64,
    pub int_k1sq: f64,
    pub int_k2sq: f64,
    #[serde(rename = "int_K")]
    pub int_gauss: f64,
    pub length: f64,
    pub class: CurveClass,
    #[serde(rename = "N")]
    pub samples: usize,
}

/// Full evaluation record for a curve or a system.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnergyReport {
    pub helfrich: f64,
    pub willmore: f64,
    pub area: f64,
    pub volume: f64,
    pub int_k1sq: f64,
    pub int_k2sq: f64,
    #[serde(rename = "int_K")]
    pub int_gauss: f64,
    pub per_component: Vec<ComponentEnergy>,
    pub params: MaterialParams,
    /// Largest per-component sample count.
    #[serde(rename = "N")]
    pub samples: usize,
    /// Quadrature family used for all measure integrals.
    pub quadrature: String,
}

/// Evaluates every component and accumulates totals in component order.
pub fn system_energy(system: &SurfaceSystem, params: &MaterialParams) -> Result<EnergyReport> {
    params.validate()?;
    let mut per_component = Vec::with_capacity(system.len());
    for curve in system.components() {
        let ints = energy_integrals(curve, params)?;
        per_component.push(ComponentEnergy {
            helfrich: ints.helfrich,
            willmore: 0.25 * ints.norms.int_hsq,
            area: ints.area,
            volume: ints.volume,
            int_k1sq: ints.norms.int_k1sq,
            int_k2sq: ints.norms.int_k2sq,
            int_gauss: ints.norms.int_gauss,
            length: ints.length,
            class: ints.class,
            samples: ints.samples,
        });
    }
    // Totals are plain left-to-right sums so that `helfrich` equals the sum
    // of the per-component entries bit-for-bit.
    let mut report = EnergyReport {
        helfrich: 0.0,
        willmore: 0.0,
        area: 0.0,
        volume: 0.0,
        int_k1sq: 0.0,
        int_k2sq: 0.0,
        int_gauss: 0.0,
        samples: 0,
        per_component,
        params: *params,
        quadrature: "trapezoid".into(),
    };
    for c in &report.per_component {
        report.helfrich += c.helfrich;
        report.willmore += c.willmore;
        report.area += c.area;
        report.volume += c.volume;
        report.int_k1sq += c.int_k1sq;
        report.int_k2sq += c.int_k2sq;
        report.int_gauss += c.int_gauss;
        report.samples = report.samples.max(c.samples);
    }
    Ok(report)
}

/// Convenience wrapper: the report of a single curve.
pub fn curve_report(curve: &GeneratingCurve, params: &MaterialParams) -> Result<EnergyReport> {
    system_energy(&SurfaceSystem::new(vec![curve.clone()])?, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_energy_closed_forms() {
        let c = shapes::sphere(1.0, 513).unwrap();
        let p = MaterialParams::default();
        // κ_H/2·(2)²·4π + κ_G·4π = 8π − 4π.
        assert_relative_eq!(helfrich_energy(&c, &p).unwrap(), 4.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(willmore_energy(&c).unwrap(), 4.0 * PI, max_relative = 1e-4);
    }

    #[test]
    fn torus_energy_closed_forms() {
        let c = shapes::torus(2.0, 1.0, 512).unwrap();
        let p = MaterialParams::default();
        let willmore = 4.0 * PI * PI / 3.0_f64.sqrt();
        assert_relative_eq!(willmore_energy(&c).unwrap(), willmore, max_relative = 1e-4);
        // κ_G-term integrates to zero, so the energy is 2κ_H × Willmore.
        assert_relative_eq!(helfrich_energy(&c, &p).unwrap(), 2.0 * willmore, max_relative = 1e-4);
    }

    #[test]
    fn spontaneous_sphere_is_a_zero() {
        // A sphere of radius 2/H0 has k1+k2 = H0 everywhere.
        let h0 = 0.8;
        let c = shapes::sphere(2.0 / h0, 513).unwrap();
        let p = MaterialParams { kappa_h: 1.0, kappa_g: -1e-9, h0 };
        let e = helfrich_energy(&c, &p).unwrap();
        // The tiny κ_G keeps the ratio admissible; its contribution is ~1e-8.
        assert!(e.abs() < 1e-6, "energy {e:.3e}");
    }

    #[test]
    fn energy_invariances() {
        let c = shapes::spheroid(1.0, 1.7, 257).unwrap();
        let p = MaterialParams::default();
        let e = helfrich_energy(&c, &p).unwrap();
        // Orientation reversal and z-translation leave H0=0 energy alone.
        assert_relative_eq!(helfrich_energy(&c.reversed(), &p).unwrap(), e, max_relative = 1e-10);
        assert_relative_eq!(
            helfrich_energy(&c.translated_z(11.0), &p).unwrap(),
            e,
            max_relative = 1e-9
        );
        // Scaling: both terms are curvature²·area, hence scale-free at H0=0.
        assert_relative_eq!(
            helfrich_energy(&c.scaled(3.0).unwrap(), &p).unwrap(),
            e,
            max_relative = 1e-6
        );
        // With H0 ≠ 0 the energy must change under scaling.
        let ph = MaterialParams { h0: 1.0, ..p };
        let eh = helfrich_energy(&c, &ph).unwrap();
        let eh2 = helfrich_energy(&c.scaled(3.0).unwrap(), &ph).unwrap();
        assert!((eh - eh2).abs() > 1e-3 * eh.abs().max(1.0));
    }

    #[test]
    fn parameter_validation() {
        assert!(MaterialParams::new(1.0, -1.0, 0.0).is_ok());
        assert!(MaterialParams::new(0.0, -1.0, 0.0).is_err());
        assert!(MaterialParams::new(1.0, 0.0, 0.0).is_err());
        assert!(MaterialParams::new(1.0, -2.0, 0.0).is_err());
        assert!(MaterialParams::new(1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn coercivity_constants_worked_example() {
        // κ_H=1, κ_G=−1, ε=1/2: c1 = 1, c2 = (1 − |1 − 3/2|)/3 = 1/6, C = 6.
        let p = MaterialParams::default();
        let cc = coercivity_constants(&p, Some(0.5)).unwrap();
        assert_relative_eq!(cc.c1, 1.0);
        assert_relative_eq!(cc.c2, 1.0 / 6.0);
        assert_relative_eq!(cc.constant, 6.0);
        // ε range: limit = -2/λ - 1 = 1 for λ = -1.
        assert_relative_eq!(epsilon_limit(&p).unwrap(), 1.0);
        assert!(coercivity_constants(&p, Some(1.0)).is_err());
        assert!(coercivity_constants(&p, Some(0.0)).is_err());
        assert!(coercivity_constants(&p, None).is_ok());
    }

    #[test]
    fn coercivity_holds_on_fixtures() {
        let p = MaterialParams::default();
        for c in [
            shapes::sphere(1.0, 257).unwrap(),
            shapes::spheroid(1.0, 2.5, 257).unwrap(),
            shapes::torus(2.0, 0.8, 256).unwrap(),
            shapes::capsule(1.0, 4.0, 257).unwrap(),
        ] {
            let chk = coercivity_check(&c, &p, Some(0.5)).unwrap();
            assert!(chk.holds, "lhs {} rhs {}", chk.lhs, chk.rhs);
        }
        // Worked sphere numbers: lhs = 8π, rhs = 6·(4π + 4π) = 48π.
        let chk =
            coercivity_check(&shapes::sphere(1.0, 513).unwrap(), &p, Some(0.5)).unwrap();
        assert_relative_eq!(chk.lhs, 8.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(chk.rhs, 48.0 * PI, max_relative = 1e-4);
    }

    #[test]
    fn system_energy_is_additive() {
        let p = MaterialParams::default();
        let parts = shapes::stacked_spheres(2, 1.0, 0.5, 257).unwrap();
        let sys = SurfaceSystem::new(parts).unwrap();
        let report = system_energy(&sys, &p).unwrap();
        assert_eq!(report.per_component.len(), 2);
        assert_relative_eq!(report.helfrich, 8.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(report.area, 8.0 * PI, max_relative = 1e-4);
        assert_relative_eq!(report.volume, 8.0 * PI / 3.0, max_relative = 1e-4);
        let summed: f64 = report.per_component.iter().map(|c| c.helfrich).sum();
        assert_eq!(report.helfrich, summed);

        // Singleton system equals the plain curve energy.
        let torus = shapes::torus(2.0, 1.0, 256).unwrap();
        let single = curve_report(&torus, &p).unwrap();
        assert_eq!(single.helfrich, helfrich_energy(&torus, &p).unwrap());
    }
}
