//! Algebraic conditions for relative equilibria: the Lagrange eigenvalue
//! test, the equator balance, and the rotating-meridian condition with its
//! spin solve and shape-to-configuration map.

use crate::continuation::f_signed;
use crate::error::{Error, Result};
use crate::geometry::{
    GeneralShape, MassTriple, MeridianShape, ReSolution, Sign, SphericalConfiguration, CYCLIC, EPS_SING,
};

/// Threshold below which `A` is treated as zero.
pub const EPS_A: f64 = 1e-10;

/// Relative tolerance on the determinant `d` when deciding whether the two
/// meridian equations are consistent.
pub const TOL_D: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaTriple {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl LambdaTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    /// Largest pairwise difference.
    pub fn spread(&self) -> f64 {
        let l = self.as_array();
        (l[0] - l[1]).abs().max((l[1] - l[2]).abs()).max((l[2] - l[0]).abs())
    }
}

pub fn lambda_triple(m: &MassTriple, shape: &GeneralShape) -> LambdaTriple {
    let [m1, m2, m3] = m.masses();
    let (c12, c23, c31) = (shape.sigma12().cos(), shape.sigma23().cos(), shape.sigma31().cos());
    let (s12, s23, s31) = (
        shape.sigma12().sin().powi(3),
        shape.sigma23().sin().powi(3),
        shape.sigma31().sin().powi(3),
    );
    LambdaTriple {
        lambda1: ((m2 + m3) * s23 - m2 * c12 * s31 - m3 * c31 * s12) / s23,
        lambda2: ((m3 + m1) * s31 - m3 * c23 * s12 - m1 * c12 * s23) / s31,
        lambda3: ((m1 + m2) * s12 - m1 * c31 * s23 - m2 * c23 * s31) / s12,
    }
}

/// A shape generates a Lagrange relative equilibrium iff the three lambdas agree.
pub fn is_lagrange_shape(m: &MassTriple, shape: &GeneralShape, tol: f64) -> bool {
    let l = lambda_triple(m, shape);
    let scale = l.as_array().iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    l.spread() < tol * (1.0 + scale)
}

/// The symmetric matrix `J` whose eigenvectors give Lagrange rotation axes.
pub fn inertia_matrix(m: &MassTriple, shape: &GeneralShape) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for i in 0..3 {
        j[i][i] = m.total() - m[i];
        for k in 0..3 {
            if k != i {
                j[i][k] = -(m[i] * m[k]).sqrt() * shape.sigma(i, k).cos();
            }
        }
    }
    j
}

/// Differences between the three torque expressions for bodies on the
/// equator with longitude gaps `dphi12`, `dphi23`, `dphi31 = -(dphi12 + dphi23)`.
pub fn equator_residuals(m: &MassTriple, dphi12: f64, dphi23: f64) -> Result<[f64; 2]> {
    let gaps = [dphi12, dphi23, -(dphi12 + dphi23)];
    let mut e = [0.0; 3];
    for (n, (i, j, _)) in CYCLIC.into_iter().enumerate() {
        let s = gaps[n].sin();
        if s.abs() < EPS_SING {
            return Err(Error::SingularConfiguration { i: i.min(j), j: i.max(j), sigma: gaps[n] });
        }
        e[n] = m[i] * m[j] * s / s.abs().powi(3);
    }
    Ok([e[0] - e[1], e[1] - e[2]])
}

/// The vector `(m1 + m2 cos 2tau3 + m3 cos 2tau2, m2 sin 2tau3 - m3 sin 2tau2)`,
/// i.e. `sum_l m_l (cos, sin)(2(theta_1 - theta_l))`. Its norm is `A`.
fn double_angle_sum(m: &MassTriple, taus: [f64; 3]) -> (f64, f64) {
    let (s3, c3) = (2.0 * taus[2]).sin_cos();
    let (s2, c2) = (2.0 * taus[1]).sin_cos();
    (m[0] + m[1] * c3 + m[2] * c2, m[1] * s3 - m[2] * s2)
}

/// `A = |sum_l m_l e^{2 i theta_l}|`, the norm form of
/// `sqrt(sum m_l^2 + 2 sum_{i<j} m_i m_j cos(2 tau_k))`; it stays accurate
/// down to `A = 0` where the radicand form loses half its digits.
pub fn big_a(m: &MassTriple, shape: &MeridianShape) -> f64 {
    let (x, y) = double_angle_sum(m, shape.taus());
    x.hypot(y)
}

/// The radicand `sum m_l^2 + 2 sum_{i<j} m_i m_j cos(2 tau_k)` of `A^2`.
pub fn a_squared(m: &MassTriple, shape: &MeridianShape) -> f64 {
    let t = shape.taus();
    let mut r = m.sum_sq();
    for (i, j, k) in CYCLIC {
        r += 2.0 * m[i] * m[j] * (2.0 * t[k]).cos();
    }
    r
}

/// `A` from the radicand, clamping rounding-level negatives to zero.
pub fn big_a_from_radicand(m: &MassTriple, shape: &MeridianShape) -> Result<f64> {
    let r = a_squared(m, shape);
    if r < -1e-14 * m.sum_sq().max(1.0) {
        return Err(Error::NegativeRadicand(r));
    }
    Ok(r.max(0.0).sqrt())
}

fn require_a(m: &MassTriple, shape: &MeridianShape) -> Result<f64> {
    let a = big_a(m, shape);
    if a <= EPS_A {
        Err(Error::AZero { a })
    } else {
        Ok(a)
    }
}

/// Pair quantities `F_ij = m_i m_j / f(tau_k)` and `G_ij = m_i m_j sin(2 tau_k)`
/// in the order 12, 23, 31.
pub(crate) fn f_g_terms(m: &MassTriple, shape: &MeridianShape) -> ([f64; 3], [f64; 3]) {
    let t = shape.taus();
    let mut f = [0.0; 3];
    let mut g = [0.0; 3];
    for (n, (i, j, k)) in CYCLIC.into_iter().enumerate() {
        let mm = m[i] * m[j];
        f[n] = mm / f_signed(t[k]);
        g[n] = mm * (2.0 * t[k]).sin();
    }
    (f, g)
}

/// The three bracketed pair expressions `m_i m_j (x sin 2tau_k - sin tau_k / |sin tau_k|^3)`
/// with `x = s omega^2 / (2A)`.
fn meridian_terms(m: &MassTriple, shape: &MeridianShape, s: Sign, omega2: f64) -> Result<[f64; 3]> {
    let a = require_a(m, shape)?;
    let x = s.value() * omega2 / (2.0 * a);
    let (f, g) = f_g_terms(m, shape);
    Ok(std::array::from_fn(|n| x * g[n] - f[n]))
}

/// Differences `(E12 - E23, E23 - E31)` of the meridian condition.
pub fn meridian_residuals(m: &MassTriple, shape: &MeridianShape, s: Sign, omega2: f64) -> Result<[f64; 2]> {
    let e = meridian_terms(m, shape, s, omega2)?;
    Ok([e[0] - e[1], e[1] - e[2]])
}

/// Meridian residuals divided by the magnitude of the individual terms, so
/// that points close to the singular lines (where `1/f(tau)` is huge) are
/// judged on the same footing as interior points.
pub fn meridian_residual_relative(m: &MassTriple, shape: &MeridianShape, s: Sign, omega2: f64) -> Result<f64> {
    let a = require_a(m, shape)?;
    let x = s.value() * omega2 / (2.0 * a);
    let (f, g) = f_g_terms(m, shape);
    let scale = (0..3).fold(0.0_f64, |acc, n| acc.max((x * g[n]).abs()).max(f[n].abs()));
    let r = meridian_residuals(m, shape, s, omega2)?;
    Ok(r[0].abs().max(r[1].abs()) / scale)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spin {
    pub s: Sign,
    pub omega2: f64,
}

/// Solves the meridian condition for `x = s omega^2 / (2A)`.
///
/// Returns `Ok(None)` when the two equations are inconsistent (the shape is
/// not an Euler shape for these masses). Fails with [`Error::AZero`] when
/// `A <= EPS_A`.
pub fn solve_s_omega2(m: &MassTriple, shape: &MeridianShape) -> Result<Option<Spin>> {
    let a = require_a(m, shape)?;
    let (f, g) = f_g_terms(m, shape);
    let (a1, a2) = (g[0] - g[1], g[2] - g[0]);
    let (b1, b2) = (f[0] - f[1], f[2] - f[0]);
    let norm_a = a1.hypot(a2);
    let norm_b = b1.hypot(b2);
    let f_scale = f.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let g_scale = g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));

    if norm_b <= 1e-14 * f_scale {
        // every pair term already balances with x = 0: a true equilibrium
        return Ok(Some(Spin { s: Sign::Plus, omega2: 0.0 }));
    }
    if norm_a <= 1e-14 * g_scale {
        return Ok(None);
    }
    let d = a1 * b2 - a2 * b1;
    if d.abs() > TOL_D * norm_a * norm_b {
        return Ok(None);
    }
    let x = (a1 * b1 + a2 * b2) / (norm_a * norm_a);
    let omega2 = 2.0 * a * x.abs();
    if omega2 < 1e-14 {
        return Ok(Some(Spin { s: Sign::Plus, omega2: 0.0 }));
    }
    Ok(Some(Spin { s: Sign::of(x), omega2 }))
}

/// Polar angles from a meridian shape:
/// `(cos 2th1, sin 2th1) = (s/A) (m1 + m2 cos 2(th1-th2) + m3 cos 2(th1-th3), m2 sin 2(th1-th2) + m3 sin 2(th1-th3))`,
/// then `th2 = th1 - tau3`, `th3 = th1 + tau2`. All `phi` are zero.
pub fn configuration_from_meridian_shape(
    m: &MassTriple,
    shape: &MeridianShape,
    s: Sign,
) -> Result<SphericalConfiguration> {
    let (cos2, sin2) = double_angle_unit(m, shape, s)?;
    debug_assert!((cos2 * cos2 + sin2 * sin2 - 1.0).abs() < 1e-9);
    let t = shape.taus();
    let th1 = 0.5 * sin2.atan2(cos2);
    SphericalConfiguration::meridian([th1, th1 - t[2], th1 + t[1]])
}

/// `(cos 2 theta_1, sin 2 theta_1)` as given by the shape-to-configuration
/// formulas, without normalization.
pub fn double_angle_unit(m: &MassTriple, shape: &MeridianShape, s: Sign) -> Result<(f64, f64)> {
    let a = require_a(m, shape)?;
    let (x, y) = double_angle_sum(m, shape.taus());
    Ok((s.value() * x / a, s.value() * y / a))
}

/// Solves the spin and builds the configuration in one go.
pub fn meridian_solution(m: &MassTriple, shape: &MeridianShape) -> Result<Option<ReSolution>> {
    let Some(spin) = solve_s_omega2(m, shape)? else {
        return Ok(None);
    };
    let config = configuration_from_meridian_shape(m, shape, spin.s)?;
    Ok(Some(ReSolution::new(config, spin.s, spin.omega2)?))
}
