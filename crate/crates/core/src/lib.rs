//! Relative equilibria of three point masses on the unit sphere under the
//! cotangent potential, restricted to the configurations where all bodies
//! share a rotating meridian.
//!
//! Modules, bottom up:
//! - [`geometry`]: masses, shape coordinates, configurations.
//! - [`dynamics`]: equations of motion, RK4, trajectory verification.
//! - [`conditions`]: algebraic equilibrium conditions and the spin solve.
//! - [`independent`]: shapes that are equilibria for every choice of masses.
//! - [`continuation`]: the Euler-shape function `g` and curve tracing.
//! - [`azero`]: the exceptional shapes with `A = 0`.

pub mod azero;
pub mod conditions;
pub mod continuation;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod independent;

pub use error::{Error, Result};
pub use geometry::{
    in_uphys, GeneralShape, MassTriple, MeridianShape, ReSolution, Sign, SphericalConfiguration, EPS_SING,
};
pub use conditions::{Spin, EPS_A};
pub use continuation::{ContinuationCurve, Termination};
pub use dynamics::{DynState, TrajectoryReport, Verification};
pub use independent::{IndependentMember, IndependentShapeSet};
pub use azero::AZeroSolutionSet;
