//! Masses, angles and the shape/configuration vocabulary shared by every
//! other module.
//!
//! Meridian shapes are parametrized by the relative arcs
//! `tau_k = theta_i - theta_j` for the cyclic triples
//! `(i, j, k) = (1, 2, 3), (2, 3, 1), (3, 1, 2)`, so that
//! `tau1 + tau2 + tau3 = 0` and `(tau1, tau2)` determine the shape.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::Index;

use crate::error::{Error, Result};

/// Exclusion radius around the zeros of `sin` used for shape-space membership
/// and singularity detection.
pub const EPS_SING: f64 = 1e-9;

/// Cyclic index triples `(i, j, k)` with `tau_k = theta_i - theta_j`
/// (zero-based).
pub(crate) const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// Reduces an angle into `(-pi, pi]`. Values already in range are returned
/// unchanged.
pub fn reduce_angle(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    if x > -PI && x <= PI {
        return Ok(x);
    }
    let r = x.rem_euclid(TAU);
    Ok(if r > PI { r - TAU } else { r })
}

/// Signed difference `a - b` wrapped into `(-pi, pi]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// The sign `s` attached to a rotating-meridian relative equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `Plus` for non-negative input.
    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i32())
    }
}

/// Three strictly positive masses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassTriple([f64; 3]);

impl MassTriple {
    pub fn new(m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let ok = |m: f64| m.is_finite() && m > 0.0;
        if ok(m1) && ok(m2) && ok(m3) {
            Ok(MassTriple([m1, m2, m3]))
        } else {
            Err(Error::InvalidMass(m1, m2, m3))
        }
    }

    pub fn equal(m: f64) -> Result<Self> {
        Self::new(m, m, m)
    }

    pub fn masses(&self) -> [f64; 3] {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.iter().map(|m| m * m).sum()
    }

    /// `m1 m2 + m2 m3 + m3 m1`.
    pub fn pair_sum(&self) -> f64 {
        let [a, b, c] = self.0;
        a * b + b * c + c * a
    }

    /// `sum_{i<j} (m_i - m_j)^2`.
    pub fn spread(&self) -> f64 {
        let [a, b, c] = self.0;
        (a - b).powi(2) + (b - c).powi(2) + (c - a).powi(2)
    }

    /// Relabels bodies so that new body `k` is old body `perm[k]`.
    pub fn permuted(&self, perm: [usize; 3]) -> Self {
        MassTriple([self.0[perm[0]], self.0[perm[1]], self.0[perm[2]]])
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(c * self.0[0], c * self.0[1], c * self.0[2])
    }
}

impl Index<usize> for MassTriple {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Membership test for the meridian shape space
/// `tau1 in (-pi, pi)`, `tau2 in (0, pi)`, `sin(tau1) sin(tau2) sin(tau1 + tau2) != 0`.
pub fn in_uphys(tau1: f64, tau2: f64) -> bool {
    tau1.is_finite()
        && tau2.is_finite()
        && tau1 > -PI
        && tau1 < PI
        && tau2 > 0.0
        && tau2 < PI
        && tau1.sin().abs() > EPS_SING
        && tau2.sin().abs() > EPS_SING
        && (tau1 + tau2).sin().abs() > EPS_SING
}

/// A point `(tau1, tau2)` of the meridian shape space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeridianShape {
    tau1: f64,
    tau2: f64,
}

impl MeridianShape {
    /// Builds a shape, rotating the meridian by `pi` (all `tau -> -tau`) when
    /// `tau2 < 0`.
    pub fn new(tau1: f64, tau2: f64) -> Result<Self> {
        let mut t1 = reduce_angle(tau1)?;
        let mut t2 = reduce_angle(tau2)?;
        if t2 < 0.0 {
            t1 = reduce_angle(-t1)?;
            t2 = -t2;
        }
        if in_uphys(t1, t2) {
            Ok(MeridianShape { tau1: t1, tau2: t2 })
        } else {
            Err(Error::NotInShapeSpace { tau1, tau2 })
        }
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }

    /// `-(tau1 + tau2)` reduced into `(-pi, pi]`.
    pub fn tau3(&self) -> f64 {
        tau3(self)
    }

    /// `[tau1, tau2, tau3]` with the unreduced `tau3 = -(tau1 + tau2)`; every
    /// consumer only uses it through 2pi-periodic functions.
    pub fn taus(&self) -> [f64; 3] {
        [self.tau1, self.tau2, -(self.tau1 + self.tau2)]
    }

    pub fn as_pair(&self) -> [f64; 2] {
        [self.tau1, self.tau2]
    }

    /// Euclidean distance in the `(tau1, tau2)` chart.
    pub fn distance(&self, other: &MeridianShape) -> f64 {
        (self.tau1 - other.tau1).hypot(self.tau2 - other.tau2)
    }

    /// The unordered arcs `{sigma12, sigma23, sigma31}`.
    pub fn general_shape(&self) -> Result<GeneralShape> {
        let t = self.taus();
        let arc = |x: f64| angle_diff(x, 0.0).abs();
        GeneralShape::new(arc(t[2]), arc(t[0]), arc(t[1]))
    }
}

impl fmt::Display for MeridianShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.tau1, self.tau2)
    }
}

pub fn tau3(shape: &MeridianShape) -> f64 {
    angle_diff(-(shape.tau1 + shape.tau2), 0.0)
}

/// Mutual arcs `{sigma12, sigma23, sigma31}`, each in `(0, pi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneralShape {
    sigma12: f64,
    sigma23: f64,
    sigma31: f64,
}

impl GeneralShape {
    pub fn new(sigma12: f64, sigma23: f64, sigma31: f64) -> Result<Self> {
        for s in [sigma12, sigma23, sigma31] {
            if !(s.is_finite() && s > 0.0 && s < PI) {
                return Err(Error::InvalidArc(s));
            }
        }
        let shape = GeneralShape { sigma12, sigma23, sigma31 };
        debug_assert!(shape.is_realizable(1e-12), "unrealizable shape {shape:?}");
        Ok(shape)
    }

    pub fn sigma12(&self) -> f64 {
        self.sigma12
    }

    pub fn sigma23(&self) -> f64 {
        self.sigma23
    }

    pub fn sigma31(&self) -> f64 {
        self.sigma31
    }

    /// Arc between bodies `i` and `j` (zero-based, `i != j`).
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 1) => self.sigma12,
            (1, 2) => self.sigma23,
            (0, 2) => self.sigma31,
            _ => panic!("no arc between bodies {i} and {j}"),
        }
    }

    /// Spherical triangle inequalities, boundary (collinear) case included.
    pub fn is_realizable(&self, slack: f64) -> bool {
        let s = [self.sigma12, self.sigma23, self.sigma31];
        (0..3).all(|k| {
            let (a, b, c) = (s[(k + 1) % 3], s[(k + 2) % 3], s[k]);
            (a - b).abs() <= c + slack && c <= (a + b).min(TAU - a - b) + slack
        })
    }
}

/// Positions `(theta_k, phi_k)` of the three bodies. `theta` may be negative
/// for meridian work; the map to the sphere stays valid for any real `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalConfiguration {
    pub theta: [f64; 3],
    pub phi: [f64; 3],
}

impl SphericalConfiguration {
    pub fn new(theta: [f64; 3], phi: [f64; 3]) -> Result<Self> {
        for x in theta.iter().chain(phi.iter()) {
            if !x.is_finite() {
                return Err(Error::NonFinite(*x));
            }
        }
        let config = SphericalConfiguration { theta, phi };
        config.check_nonsingular()?;
        Ok(config)
    }

    /// All bodies on the `phi = 0` meridian.
    pub fn meridian(theta: [f64; 3]) -> Result<Self> {
        Self::new(theta, [0.0; 3])
    }

    pub fn unit_vector(&self, k: usize) -> [f64; 3] {
        unit_vector(self.theta[k], self.phi[k])
    }

    /// Arc between bodies `i` and `j`, without any range check.
    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        arc_between(self.unit_vector(i), self.unit_vector(j))
    }

    pub fn check_nonsingular(&self) -> Result<()> {
        for (i, j, _) in CYCLIC {
            let sigma = self.sigma(i, j);
            if !(sigma > EPS_SING && sigma < PI - EPS_SING) {
                return Err(Error::SingularConfiguration {
                    i: i.min(j),
                    j: i.max(j),
                    sigma,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn unit_vector(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Angle between two unit vectors, computed as `atan2(|a x b|, a . b)` which
/// is accurate over the whole range.
pub(crate) fn arc_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    norm.atan2(dot)
}

/// Mutual arcs `sigma_ij = arccos(cos th_i cos th_j + sin th_i sin th_j cos(phi_i - phi_j))`.
pub fn shape_from_config(config: &SphericalConfiguration) -> Result<GeneralShape> {
    config.check_nonsingular()?;
    GeneralShape::new(config.sigma(0, 1), config.sigma(1, 2), config.sigma(2, 0))
}

/// A relative equilibrium rotating about the polar axis: configuration, sign
/// `s` and squared angular speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReSolution {
    pub config: SphericalConfiguration,
    pub s: Sign,
    pub omega2: f64,
}

impl ReSolution {
    pub fn new(config: SphericalConfiguration, s: Sign, omega2: f64) -> Result<Self> {
        if !(omega2.is_finite() && omega2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("omega^2 = {omega2} must be >= 0")));
        }
        Ok(ReSolution { config, s, omega2 })
    }

    pub fn omega(&self) -> f64 {
        self.omega2.sqrt()
    }

    /// Rotation period `2 pi / omega`, infinite for a true equilibrium.
    pub fn period(&self) -> f64 {
        if self.omega2 > 0.0 {
            TAU / self.omega()
        } else {
            f64::INFINITY
        }
    }
}
