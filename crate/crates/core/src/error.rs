use thiserror::Error;

use crate::dynamics::TrajectoryReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(f64),

    #[error("masses must be positive and finite, got ({0}, {1}, {2})")]
    InvalidMass(f64, f64, f64),

    #[error("({tau1}, {tau2}) is not in the meridian shape space")]
    NotInShapeSpace { tau1: f64, tau2: f64 },

    #[error("arc {0} is outside (0, pi)")]
    InvalidArc(f64),

    #[error("bodies {i} and {j} are coincident or antipodal (sigma = {sigma})")]
    SingularConfiguration { i: usize, j: usize, sigma: f64 },

    #[error("body {body} sits on the polar axis; spherical coordinates break down")]
    CoordinateSingularity { body: usize },

    #[error("A = {a:e} is below the A = 0 threshold; use the azero module")]
    AZero { a: f64 },

    #[error("A^2 radicand {0:e} is negative beyond rounding")]
    NegativeRadicand(f64),

    #[error("integration stopped at t = {time}: {cause}")]
    Truncated {
        time: f64,
        cause: Box<Error>,
        report: Box<TrajectoryReport>,
    },

    #[error("no two-body relative equilibrium at separation {0} (pi/2 is excluded)")]
    NoTwoBodyEquilibrium(f64),

    #[error("equal masses: the saddle at the equilateral shape is degenerate")]
    DegenerateSaddle,

    #[error("corrector failed to reach g = 0 from seed ({tau1}, {tau2})")]
    SeedNotOnContour { tau1: f64, tau2: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
