//! Random admissible profile curves for property testing.
//!
//! The generator draws smooth closed-form traces — low-order trigonometric
//! perturbations of a semicircle or an ellipse — dense-samples them, and
//! resamples to constant speed.  Both families are built so the axis
//! conditions hold exactly: open profiles have `x(0) = x(1) = 0` and
//! `ż(0) = ż(1) = 0` by construction, closed profiles keep a positive
//! radial margin.  Curves may self-intersect; the admissibility classes do
//! not require embeddedness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::curve::{reparametrize_constant_speed, validate, CurveClass, GeneratingCurve};
use crate::numeric::Vec2;

/// Deterministic random curve source: the same seed and sample count always
/// reproduce the same sequence of curves.
pub struct CurveSampler {
    rng: ChaCha8Rng,
    n: usize,
}

impl CurveSampler {
    pub fn new(seed: u64, samples: usize) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), n: samples.max(crate::curve::MIN_SAMPLES) }
    }

    /// A random open profile with both endpoints on the axis.
    pub fn sphere_like(&mut self) -> GeneratingCurve {
        for _ in 0..64 {
            let scale = self.rng.gen_range(0.5..2.0);
            let height = scale * self.rng.gen_range(0.7..1.8);
            // Radial modes vanish at both ends; total relative amplitude
            // stays below 1 so the radius is positive inside.
            let e: [f64; 3] = [
                self.rng.gen_range(-0.20..0.20),
                self.rng.gen_range(-0.12..0.12),
                self.rng.gen_range(-0.08..0.08),
            ];
            // Height modes with ż = 0 at both ends.
            let f: [f64; 3] = [
                self.rng.gen_range(-0.20..0.20) * height,
                self.rng.gen_range(-0.10..0.10) * height,
                self.rng.gen_range(-0.06..0.06) * height,
            ];
            let trace = |t: f64| -> Vec2 {
                let mut x = 1.0;
                let mut z = -height * (PI * t).cos();
                for (k, (ek, fk)) in e.iter().zip(&f).enumerate() {
                    let k1 = (k + 1) as f64;
                    x += ek * (k1 * PI * t).sin();
                    z += fk * (1.0 - (2.0 * k1 * PI * t).cos());
                }
                Vec2::new(scale * (PI * t).sin() * x, z)
            };
            if let Some(curve) = self.realize(trace, false, CurveClass::SphereLike) {
                return curve;
            }
        }
        unreachable!("open-profile sampler exhausted its retry budget");
    }

    /// A random closed profile staying away from the axis.
    pub fn torus_like(&mut self) -> GeneratingCurve {
        for _ in 0..64 {
            let major = self.rng.gen_range(1.0..2.0);
            let p = major * self.rng.gen_range(0.30..0.65);
            let q = major * self.rng.gen_range(0.30..0.65);
            let a: [f64; 2] =
                [self.rng.gen_range(-0.08..0.08) * major, self.rng.gen_range(-0.05..0.05) * major];
            let b: [f64; 2] =
                [self.rng.gen_range(-0.08..0.08) * major, self.rng.gen_range(-0.05..0.05) * major];
            let (pa, pb): (f64, f64) = (self.rng.gen_range(0.0..2.0 * PI), self.rng.gen_range(0.0..2.0 * PI));
            let trace = |t: f64| -> Vec2 {
                let th = 2.0 * PI * t;
                let mut x = major + p * th.cos();
                let mut z = q * th.sin();
                for (k, (ak, bk)) in a.iter().zip(&b).enumerate() {
                    let k2 = (k + 2) as f64;
                    x += ak * (k2 * th + pa).cos();
                    z += bk * (k2 * th + pb).sin();
                }
                Vec2::new(x, z)
            };
            if let Some(curve) = self.realize(trace, true, CurveClass::TorusLike) {
                return curve;
            }
        }
        unreachable!("closed-profile sampler exhausted its retry budget");
    }

    /// Randomly one family or the other.
    pub fn any(&mut self) -> GeneratingCurve {
        if self.rng.gen_bool(0.5) {
            self.sphere_like()
        } else {
            self.torus_like()
        }
    }

    fn realize<F: Fn(f64) -> Vec2>(
        &mut self,
        trace: F,
        closed: bool,
        want: CurveClass,
    ) -> Option<GeneratingCurve> {
        let dense = 8 * self.n;
        let last = if closed { dense - 1 } else { dense };
        let pts: Vec<Vec2> = (0..=last).map(|i| trace(i as f64 / dense as f64)).collect();
        let raw = GeneratingCurve::from_points(&pts, closed).ok()?;
        let curve = reparametrize_constant_speed(&raw, self.n).ok()?;
        (validate(&curve).ok()?.class == want).then_some(curve)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_deterministic() {
        let mut a = CurveSampler::new(7, 128);
        let mut b = CurveSampler::new(7, 128);
        for _ in 0..5 {
            let (ca, cb) = (a.any(), b.any());
            assert_eq!(ca.closed(), cb.closed());
            for (sa, sb) in ca.samples().iter().zip(cb.samples()) {
                assert_eq!(sa.x, sb.x);
                assert_eq!(sa.z, sb.z);
            }
        }
    }

    #[test]
    fn samples_have_the_advertised_classes() {
        let mut s = CurveSampler::new(42, 128);
        for _ in 0..25 {
            let open = s.sphere_like();
            assert_eq!(validate(&open).unwrap().class, CurveClass::SphereLike);
            let closed = s.torus_like();
            assert_eq!(validate(&closed).unwrap().class, CurveClass::TorusLike);
        }
    }
}
