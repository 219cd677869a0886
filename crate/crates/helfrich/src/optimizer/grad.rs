//! Objective evaluation and gradients on raw node arrays.
//!
//! The optimizer differentiates the same discrete formulas the energy module
//! integrates — node weights, frustum volume, curvatures from the difference
//! stencils — by reverse-mode accumulation, one backward sweep per requested
//! combination of (energy, area, volume) sensitivities.  A finite-difference
//! fallback exists both as a user-selectable mode and as the mandatory
//! cross-check at the start of every minimization.

use crate::discrete;
use crate::energy::MaterialParams;
use crate::error::Result;
use crate::numeric::Vec2;

/// Scalars of one component evaluated from its distinct nodes.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompValues {
    pub energy: f64,
    pub area: f64,
    pub volume: f64,
    pub length: f64,
}

/// One optimizable component: distinct nodes plus its topology flags.
#[derive(Clone, Debug)]
pub(crate) struct CompState {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl CompState {
    /// Open profiles keep their endpoints pinned to the axis: the `x`
    /// coordinate of both ends is not a degree of freedom.
    pub fn pinned(&self) -> bool {
        !self.closed
    }
}

/// Evaluates energy, area, volume and length of one component.
pub(crate) fn evaluate(comp: &CompState, params: &MaterialParams) -> Result<CompValues> {
    let meas = discrete::measure(&comp.points, comp.closed);
    let st = discrete::stencil(&comp.points, comp.closed, &meas)?;
    let poles = pole_flags(comp, &meas);
    let curv = discrete::curvature(&comp.points, comp.closed, poles, &meas, &st)?;
    let ints = discrete::integrals(&meas, &curv, params);
    Ok(CompValues { energy: ints.helfrich, area: meas.area, volume: meas.volume, length: meas.length })
}

fn pole_flags(comp: &CompState, meas: &discrete::Measure) -> (bool, bool) {
    if comp.closed {
        return (false, false);
    }
    let tol = meas.axis_tol();
    let m = comp.points.len();
    (comp.points[0].x.abs() <= tol, comp.points[m - 1].x.abs() <= tol)
}

/// Evaluates and differentiates `we·E + wa·A + wv·V` with respect to every
/// node coordinate, in one forward and one backward sweep.
///
/// For open components the endpoint `x`-gradients are zeroed (those
/// coordinates are frozen by the axis boundary condition).
pub(crate) fn evaluate_with_gradient(
    comp: &CompState,
    params: &MaterialParams,
    we: f64,
    wa: f64,
    wv: f64,
) -> Result<(CompValues, Vec<Vec2>)> {
    let pts = &comp.points;
    let closed = comp.closed;
    let m = pts.len();
    let meas = discrete::measure(pts, closed);
    let st = discrete::stencil(pts, closed, &meas)?;
    let poles = pole_flags(comp, &meas);
    let curv = discrete::curvature(pts, closed, poles, &meas, &st)?;
    let ints = discrete::integrals(&meas, &curv, params);
    let values = CompValues {
        energy: ints.helfrich,
        area: meas.area,
        volume: meas.volume,
        length: meas.length,
    };

    let cells = meas.cells;
    let dt = meas.dt;
    let tol = meas.axis_tol();
    let mut bar = vec![Vec2::new(0.0, 0.0); m];
    let mut chord_bar = vec![0.0; cells];

    for i in 0..m {
        let k1 = curv.k1[i];
        let k2 = curv.k2[i];
        let w = meas.weight[i];
        let sigma = meas.sigma[i];
        let dev = k1 + k2 - params.h0;
        let f = 0.5 * params.kappa_h * dev * dev + params.kappa_g * k1 * k2;

        // Integrand partials, then the quadrature-weight partial (the weight
        // multiplies the energy integrand and is itself the area quadrature).
        let mut k1_bar = we * w * (params.kappa_h * dev + params.kappa_g * k2);
        let k2_bar = we * w * (params.kappa_h * dev + params.kappa_g * k1);
        let w_bar = we * f + wa;

        // Weight route: w = π·x·(adjacent chord sum).
        let adjacent = if closed {
            chord_bar[(i + m - 1) % m] += w_bar * std::f64::consts::PI * pts[i].x;
            chord_bar[i] += w_bar * std::f64::consts::PI * pts[i].x;
            meas.chords[(i + m - 1) % m] + meas.chords[i]
        } else if i == 0 {
            chord_bar[0] += w_bar * std::f64::consts::PI * pts[i].x;
            meas.chords[0]
        } else if i == m - 1 {
            chord_bar[m - 2] += w_bar * std::f64::consts::PI * pts[i].x;
            meas.chords[m - 2]
        } else {
            chord_bar[i - 1] += w_bar * std::f64::consts::PI * pts[i].x;
            chord_bar[i] += w_bar * std::f64::consts::PI * pts[i].x;
            meas.chords[i - 1] + meas.chords[i]
        };
        bar[i].x += w_bar * std::f64::consts::PI * adjacent;

        // Parallel curvature route: k2 = û_z/x away from the axis; at a pole
        // the umbilic continuation k2 := k1 folds its sensitivity into k1.
        let at_pole = !closed && (i == 0 || i == m - 1) && pts[i].x.abs() <= tol;
        let mut u_bar = Vec2::new(0.0, 0.0);
        if at_pole {
            k1_bar += k2_bar;
        } else {
            u_bar.z += k2_bar / pts[i].x;
            bar[i].x -= k2_bar * k2 / pts[i].x;
        }

        // Meridian curvature route: k1 = (û × dd)/σ².
        let u = st.central[i] * (1.0 / st.central[i].norm());
        let dd = st.second[i];
        let inv_s2 = 1.0 / (sigma * sigma);
        u_bar.x += k1_bar * dd.z * inv_s2;
        u_bar.z -= k1_bar * dd.x * inv_s2;
        let dd_bar = Vec2::new(-k1_bar * u.z * inv_s2, k1_bar * u.x * inv_s2);
        let sigma_bar = -2.0 * k1_bar * k1 / sigma;

        // Speed route: σ is a chord average.
        if closed {
            chord_bar[(i + m - 1) % m] += sigma_bar / (2.0 * dt);
            chord_bar[i] += sigma_bar / (2.0 * dt);
        } else if i == 0 {
            chord_bar[0] += sigma_bar / dt;
        } else if i == m - 1 {
            chord_bar[m - 2] += sigma_bar / dt;
        } else {
            chord_bar[i - 1] += sigma_bar / (2.0 * dt);
            chord_bar[i] += sigma_bar / (2.0 * dt);
        }

        // Normalization: û = D/|D| projects the direction sensitivity onto
        // the orthogonal complement of û.
        let d_bar = (u_bar - u * u.dot(u_bar)) * (1.0 / st.central[i].norm());

        // Difference-stencil routing, mirroring the forward coefficients.
        if closed {
            bar[(i + 1) % m] += d_bar;
            bar[(i + m - 1) % m] -= d_bar;
        } else if i == 0 {
            bar[0] += d_bar * -3.0;
            bar[1] += d_bar * 4.0;
            bar[2] -= d_bar;
        } else if i == m - 1 {
            bar[m - 1] += d_bar * 3.0;
            bar[m - 2] -= d_bar * 4.0;
            bar[m - 3] += d_bar;
        } else {
            bar[i + 1] += d_bar;
            bar[i - 1] -= d_bar;
        }

        let inv_dt2 = 1.0 / (dt * dt);
        if closed {
            bar[(i + 1) % m] += dd_bar * inv_dt2;
            bar[i] -= dd_bar * (2.0 * inv_dt2);
            bar[(i + m - 1) % m] += dd_bar * inv_dt2;
        } else if i == 0 {
            bar[0] += dd_bar * (2.0 * inv_dt2);
            bar[1] -= dd_bar * (5.0 * inv_dt2);
            bar[2] += dd_bar * (4.0 * inv_dt2);
            bar[3] -= dd_bar * inv_dt2;
        } else if i == m - 1 {
            bar[m - 1] += dd_bar * (2.0 * inv_dt2);
            bar[m - 2] -= dd_bar * (5.0 * inv_dt2);
            bar[m - 3] += dd_bar * (4.0 * inv_dt2);
            bar[m - 4] -= dd_bar * inv_dt2;
        } else {
            bar[i + 1] += dd_bar * inv_dt2;
            bar[i] -= dd_bar * (2.0 * inv_dt2);
            bar[i - 1] += dd_bar * inv_dt2;
        }
    }

    // Volume route: exact frustum stack, cell by cell.
    if wv != 0.0 {
        let c = wv * std::f64::consts::FRAC_PI_3;
        for j in 0..cells {
            let a = pts[j];
            let b = pts[(j + 1) % m];
            let q = a.x * a.x + a.x * b.x + b.x * b.x;
            let dz = b.z - a.z;
            bar[j].x += c * (2.0 * a.x + b.x) * dz;
            bar[(j + 1) % m].x += c * (a.x + 2.0 * b.x) * dz;
            bar[(j + 1) % m].z += c * q;
            bar[j].z -= c * q;
        }
    }

    // Chord route: c_j = |P_{j+1} − P_j|.
    for j in 0..cells {
        let a = pts[j];
        let b = pts[(j + 1) % m];
        let e = (b - a) * (1.0 / meas.chords[j]);
        bar[(j + 1) % m] += e * chord_bar[j];
        bar[j] -= e * chord_bar[j];
    }

    if comp.pinned() {
        bar[0].x = 0.0;
        bar[m - 1].x = 0.0;
    }
    Ok((values, bar))
}

/// Central finite differences of `we·E + wa·A + wv·V`, step `1e-6·length`
/// per coordinate.  Frozen endpoint coordinates are skipped.
pub(crate) fn finite_difference_gradient(
    comp: &CompState,
    params: &MaterialParams,
    we: f64,
    wa: f64,
    wv: f64,
) -> Result<Vec<Vec2>> {
    let m = comp.points.len();
    let meas = discrete::measure(&comp.points, comp.closed);
    let h = 1e-6 * meas.length;
    let mut probe = comp.clone();
    let combined = |c: &CompState| -> Result<f64> {
        let v = evaluate(c, params)?;
        Ok(we * v.energy + wa * v.area + wv * v.volume)
    };
    let mut grad = vec![Vec2::new(0.0, 0.0); m];
    for i in 0..m {
        for coord in 0..2 {
            if comp.pinned() && coord == 0 && (i == 0 || i == m - 1) {
                continue;
            }
            let base = if coord == 0 { comp.points[i].x } else { comp.points[i].z };
            let set = |probe: &mut CompState, v: f64| {
                if coord == 0 {
                    probe.points[i].x = v;
                } else {
                    probe.points[i].z = v;
                }
            };
            set(&mut probe, base + h);
            let plus = combined(&probe)?;
            set(&mut probe, base - h);
            let minus = combined(&probe)?;
            set(&mut probe, base);
            let g = (plus - minus) / (2.0 * h);
            if coord == 0 {
                grad[i].x = g;
            } else {
                grad[i].z = g;
            }
        }
    }
    Ok(grad)
}
