//! Bending energy of axisymmetric surfaces.
//!
//! A surface of revolution is described by its generating curve: a planar
//! profile `t ↦ (x(t), z(t))`, `x ≥ 0`, revolved about the `z`-axis.  This
//! crate evaluates the Canham–Helfrich bending energy of such surfaces,
//! verifies the curvature and length inequalities that control minimizing
//! sequences, and minimizes the energy under fixed total area and enclosed
//! volume.
//!
//! Modules, bottom-up:
//!
//! * [`curve`] — sampled generating curves: validation, constant-speed
//!   reparametrization, finite-difference stencils, axis splitting.
//! * [`geometry`] — area measure, enclosed volume, principal curvatures,
//!   Gauss–Bonnet check, diameter, winding index.
//! * [`energy`] — Helfrich/Willmore energies, coercivity constants,
//!   multi-component systems.
//! * [`bounds`] — length, axis-tangent, oscillation and component-count
//!   inequalities, plus randomized verification suites.
//! * [`optimizer`] — augmented-Lagrangian minimization under area/volume
//!   constraints, seed shapes, multistart.
//! * [`shapes`] / [`sampling`] — analytic profiles and a seeded random
//!   generator of valid curves.
//! * [`io`] — CSV curve files, geometry dumps, deterministic JSON.

pub mod bounds;
pub mod curve;
mod discrete;
pub mod energy;
mod error;
pub mod geometry;
pub mod io;
mod numeric;
pub mod optimizer;
pub mod sampling;
pub mod shapes;
pub mod system;

pub use error::{Error, Result};
pub use numeric::{log_log_slope, Vec2};
