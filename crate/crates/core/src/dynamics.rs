//! Lagrangian dynamics on the unit sphere: cotangent potential, equations of
//! motion, a fixed-step RK4 integrator and the trajectory-based check of
//! relative equilibria.
//!
//! Every algebraic claim made elsewhere in the crate (spin constants,
//! configurations, continuation points) is ultimately judged here: a state
//! with `theta_dot = 0`, `phi_dot = omega` is integrated and must keep its
//! polar angles fixed while rotating rigidly.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{unit_vector, MassTriple, ReSolution, SphericalConfiguration, CYCLIC, EPS_SING};

/// RK4 steps per rotation period used by [`verify_re`].
pub const STEPS_PER_PERIOD: usize = 20_000;

/// Largest change of energy in one step, relative to `K + |V|` at the start,
/// before the run is declared unresolved.
pub const MAX_STEP_ENERGY_JUMP: f64 = 1e-3;

/// Time span per "period" when verifying a true equilibrium (`omega = 0`).
pub const FIDUCIAL_PERIOD: f64 = TAU;

/// Angles, angular velocities. Also used for time derivatives, in which case
/// the fields hold `(theta_dot, phi_dot, theta_ddot, phi_ddot)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DynState {
    pub theta: [f64; 3],
    pub phi: [f64; 3],
    pub theta_dot: [f64; 3],
    pub phi_dot: [f64; 3],
}

impl DynState {
    /// Rigid rotation about the polar axis at angular speed `omega`.
    pub fn rotating(config: &SphericalConfiguration, omega: f64) -> Self {
        DynState {
            theta: config.theta,
            phi: config.phi,
            theta_dot: [0.0; 3],
            phi_dot: [omega; 3],
        }
    }

    fn to_array(self) -> [f64; 12] {
        let mut y = [0.0; 12];
        y[0..3].copy_from_slice(&self.theta);
        y[3..6].copy_from_slice(&self.phi);
        y[6..9].copy_from_slice(&self.theta_dot);
        y[9..12].copy_from_slice(&self.phi_dot);
        y
    }

    fn from_array(y: &[f64; 12]) -> Self {
        let pick = |o: usize| [y[o], y[o + 1], y[o + 2]];
        DynState {
            theta: pick(0),
            phi: pick(3),
            theta_dot: pick(6),
            phi_dot: pick(9),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryReport {
    /// `max_{i,t} |theta_i(t) - theta_i(0)|`
    pub max_theta_drift: f64,
    /// `max_{i,t} |phi_i(t) - phi_i(0) - phi_dot_i(0) t|`
    pub max_phi_deviation: f64,
    /// `max_t |E(t) - E(0)| / |E(0)|`
    pub energy_drift_rel: f64,
    /// `max_t |Lz(t) - Lz(0)|` relative to `sum_i m_i sin^2(theta_i) |phi_dot_i|` at `t = 0`.
    pub lz_drift_rel: f64,
    pub samples: Vec<(f64, DynState)>,
    pub final_state: DynState,
    pub final_time: f64,
}

/// Pair data shared by the potential and its gradient.
struct Pair {
    cos: f64,
    sin: f64,
}

fn pair(theta: &[f64; 3], phi: &[f64; 3], i: usize, j: usize) -> Result<Pair> {
    let a = unit_vector(theta[i], phi[i]);
    let b = unit_vector(theta[j], phi[j]);
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    let sin = (cx * cx + cy * cy + cz * cz).sqrt();
    let sigma = sin.atan2(cos);
    if !sigma.is_finite() {
        return Err(Error::NonFinite(sigma));
    }
    if !(sigma > EPS_SING && sigma < std::f64::consts::PI - EPS_SING) {
        return Err(Error::SingularConfiguration { i: i.min(j), j: i.max(j), sigma });
    }
    Ok(Pair { cos, sin })
}

/// `V = -sum_{i<j} m_i m_j cos(sigma_ij) / sqrt(1 - cos^2(sigma_ij))`.
pub fn cotangent_potential(m: &MassTriple, config: &SphericalConfiguration) -> Result<f64> {
    potential_at(m, &config.theta, &config.phi)
}

fn potential_at(m: &MassTriple, theta: &[f64; 3], phi: &[f64; 3]) -> Result<f64> {
    let mut v = 0.0;
    for (i, j, _) in CYCLIC {
        let p = pair(theta, phi, i, j)?;
        v -= m[i] * m[j] * p.cos / p.sin;
    }
    Ok(v)
}

/// `(dV/dtheta_i, dV/dphi_i)` in closed form.
pub fn potential_gradient(m: &MassTriple, theta: &[f64; 3], phi: &[f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let mut d_theta = [0.0; 3];
    let mut d_phi = [0.0; 3];
    let (s, c) = (theta.map(f64::sin), theta.map(f64::cos));
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let p = pair(theta, phi, i, j)?;
            let w = m[i] * m[j] / (p.sin * p.sin * p.sin);
            let (sd, cd) = (phi[i] - phi[j]).sin_cos();
            d_theta[i] += w * (s[i] * c[j] - c[i] * s[j] * cd);
            d_phi[i] += w * s[i] * s[j] * sd;
        }
    }
    Ok((d_theta, d_phi))
}

/// Time derivative of `state`.
///
/// `theta_ddot_i = sin cos phi_dot^2 - (1/m_i) dV/dtheta_i` and, from the
/// conservation form `d/dt(m_i sin^2 theta_i phi_dot_i) = -dV/dphi_i`,
/// `phi_ddot_i = (-dV/dphi_i - 2 m_i sin cos theta_dot phi_dot) / (m_i sin^2)`.
pub fn eom_rhs(m: &MassTriple, state: &DynState) -> Result<DynState> {
    let (d_theta, d_phi) = potential_gradient(m, &state.theta, &state.phi)?;
    let mut out = DynState {
        theta: state.theta_dot,
        phi: state.phi_dot,
        ..DynState::default()
    };
    for i in 0..3 {
        let (s, c) = state.theta[i].sin_cos();
        let (td, pd) = (state.theta_dot[i], state.phi_dot[i]);
        out.theta_dot[i] = s * c * pd * pd - d_theta[i] / m[i];
        if s.abs() < EPS_SING {
            // A body resting on the axis carries no polar momentum and its
            // longitude is arbitrary: keep it co-rotating. Crossing the
            // pole while the chart turns has no regular description.
            if (td * pd).abs() > EPS_SING {
                return Err(Error::CoordinateSingularity { body: i });
            }
            out.phi_dot[i] = 0.0;
            continue;
        }
        out.phi_dot[i] = (-d_phi[i] - 2.0 * m[i] * s * c * td * pd) / (m[i] * s * s);
    }
    Ok(out)
}

pub fn kinetic_energy(m: &MassTriple, state: &DynState) -> f64 {
    (0..3)
        .map(|k| {
            let s = state.theta[k].sin();
            0.5 * m[k] * (state.theta_dot[k].powi(2) + s * s * state.phi_dot[k].powi(2))
        })
        .sum()
}

/// Total energy `K + V`.
pub fn energy(m: &MassTriple, state: &DynState) -> Result<f64> {
    Ok(kinetic_energy(m, state) + potential_at(m, &state.theta, &state.phi)?)
}

/// Polar component of the angular momentum, `sum_i m_i sin^2(theta_i) phi_dot_i`.
pub fn polar_momentum(m: &MassTriple, state: &DynState) -> f64 {
    (0..3)
        .map(|k| m[k] * state.theta[k].sin().powi(2) * state.phi_dot[k])
        .sum()
}

fn rhs_array(m: &MassTriple, y: &[f64; 12]) -> Result<[f64; 12]> {
    Ok(eom_rhs(m, &DynState::from_array(y))?.to_array())
}

fn axpy(y: &[f64; 12], h: f64, k: &[f64; 12]) -> [f64; 12] {
    std::array::from_fn(|n| y[n] + h * k[n])
}

fn rk4_step(m: &MassTriple, y: &[f64; 12], dt: f64) -> Result<[f64; 12]> {
    let k1 = rhs_array(m, y)?;
    let k2 = rhs_array(m, &axpy(y, 0.5 * dt, &k1))?;
    let k3 = rhs_array(m, &axpy(y, 0.5 * dt, &k2))?;
    let k4 = rhs_array(m, &axpy(y, dt, &k3))?;
    Ok(std::array::from_fn(|n| {
        y[n] + dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n])
    }))
}

fn check_state(m: &MassTriple, state: &DynState) -> Result<()> {
    // rhs evaluation performs both the pair and the pole checks
    eom_rhs(m, state).map(|_| ())
}

/// Fixed-step classical RK4. A sample is recorded at `t = 0`, every
/// `sample_every` steps (0 disables intermediate samples), and at the end.
///
/// If a singular configuration is met, or a single step changes the energy
/// by more than [`MAX_STEP_ENERGY_JUMP`] (a collision jumped over), the run
/// stops with [`Error::Truncated`] carrying the report accumulated so far.
pub fn integrate(
    m: &MassTriple,
    state0: &DynState,
    dt: f64,
    steps: usize,
    sample_every: usize,
) -> Result<TrajectoryReport> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    check_state(m, state0)?;
    let e0 = energy(m, state0)?;
    let lz0 = polar_momentum(m, state0);
    let lz_scale = (0..3)
        .map(|k| m[k] * state0.theta[k].sin().powi(2) * state0.phi_dot[k].abs())
        .sum::<f64>()
        .max(1e-12 * m.total());
    let e_scale = e0.abs().max(f64::MIN_POSITIVE);
    let v0 = potential_at(m, &state0.theta, &state0.phi)?;
    // a fixed step can jump across a collision without ever seeing it;
    // such a step shows up as a jump in energy
    let jump_limit = MAX_STEP_ENERGY_JUMP * (kinetic_energy(m, state0) + v0.abs()).max(f64::MIN_POSITIVE);
    let mut e_prev = e0;

    let mut report = TrajectoryReport {
        max_theta_drift: 0.0,
        max_phi_deviation: 0.0,
        energy_drift_rel: 0.0,
        lz_drift_rel: 0.0,
        samples: vec![(0.0, *state0)],
        final_state: *state0,
        final_time: 0.0,
    };
    let mut y = state0.to_array();
    for n in 1..=steps {
        let t = n as f64 * dt;
        let next = match rk4_step(m, &y, dt) {
            Ok(next) => next,
            Err(cause) => return Err(truncate(report, t - dt, cause)),
        };
        y = next;
        let state = DynState::from_array(&y);
        let e = match energy(m, &state) {
            Ok(e) => e,
            Err(cause) => return Err(truncate(report, t, cause)),
        };
        for k in 0..3 {
            report.max_theta_drift = report.max_theta_drift.max((state.theta[k] - state0.theta[k]).abs());
            let dev = state.phi[k] - state0.phi[k] - state0.phi_dot[k] * t;
            report.max_phi_deviation = report.max_phi_deviation.max(dev.abs());
        }
        if (e - e_prev).abs() > jump_limit {
            return Err(truncate(report, t - dt, closest_pair(&state)));
        }
        e_prev = e;
        report.energy_drift_rel = report.energy_drift_rel.max((e - e0).abs() / e_scale);
        report.lz_drift_rel = report
            .lz_drift_rel
            .max((polar_momentum(m, &state) - lz0).abs() / lz_scale);
        report.final_state = state;
        report.final_time = t;
        if n == steps || (sample_every > 0 && n % sample_every == 0) {
            report.samples.push((t, state));
        }
        if let Err(cause) = check_state(m, &state) {
            return Err(truncate(report, t, cause));
        }
    }
    Ok(report)
}

/// The pair with the smallest arc to the singular set, as the cause of an unresolved step.
fn closest_pair(state: &DynState) -> Error {
    let mut best = (0, 1, f64::INFINITY, 0.0);
    for (i, j, _) in CYCLIC {
        let sigma = crate::geometry::arc_between(unit_vector(state.theta[i], state.phi[i]), unit_vector(state.theta[j], state.phi[j]));
        let gap = sigma.min(std::f64::consts::PI - sigma);
        if gap < best.2 {
            best = (i.min(j), i.max(j), gap, sigma);
        }
    }
    Error::SingularConfiguration { i: best.0, j: best.1, sigma: best.3 }
}

fn truncate(report: TrajectoryReport, time: f64, cause: Error) -> Error {
    Error::Truncated {
        time,
        cause: Box::new(cause),
        report: Box::new(report),
    }
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub report: TrajectoryReport,
    pub passed: bool,
    pub dt: f64,
    pub steps: usize,
}

impl Verification {
    /// Larger of the polar-angle drift and the deviation from rigid rotation.
    pub fn drift(&self) -> f64 {
        self.report.max_theta_drift.max(self.report.max_phi_deviation)
    }
}

/// Integrates the rigid-rotation initial state of `sol` for `periods`
/// rotation periods (or `periods * FIDUCIAL_PERIOD` when `omega = 0`) and
/// checks that the motion stays a rigid rotation within `tol`.
pub fn verify_re(m: &MassTriple, sol: &ReSolution, periods: usize, tol: f64) -> Result<Verification> {
    if !(sol.omega2.is_finite() && sol.omega2 >= 0.0) {
        return Err(Error::InvalidArgument(format!("omega^2 = {}", sol.omega2)));
    }
    let period = if sol.omega2 > 0.0 { sol.period() } else { FIDUCIAL_PERIOD };
    let dt = period / STEPS_PER_PERIOD as f64;
    let steps = periods.max(1) * STEPS_PER_PERIOD;
    let state0 = DynState::rotating(&sol.config, sol.omega());
    let report = integrate(m, &state0, dt, steps, STEPS_PER_PERIOD / 20)?;
    let passed = report.max_theta_drift < tol && report.max_phi_deviation < tol;
    Ok(Verification { report, passed, dt, steps })
}

/// A hierarchical bound state: body 0 at rest on the equator and bodies 1
/// and 2 on circular Kepler orbits of arc radius `radii[k]` about it,
/// starting at orbital phase `phases[k]`. The orbital speeds are scaled by
/// `1 + kick`, which makes the orbits mildly eccentric. Intended for light
/// satellites, where the orbits persist for many revolutions.
pub fn satellite_state(m: &MassTriple, radii: [f64; 2], phases: [f64; 2], kick: f64) -> Result<DynState> {
    let mut s = DynState {
        theta: [std::f64::consts::FRAC_PI_2; 3],
        ..DynState::default()
    };
    for k in 0..2 {
        let (r, a) = (radii[k], phases[k]);
        if !(r > 0.0 && r < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("orbit radius {r} outside (0, pi/2)")));
        }
        // circular orbit about the point (1, 0, 0): m_0 / sin^2 r = w^2 sin r cos r
        let w = (m[0] / (r.sin().powi(3) * r.cos())).sqrt() * (1.0 + kick);
        let (sa, ca) = a.sin_cos();
        let p = [r.cos(), r.sin() * ca, r.sin() * sa];
        let v = [0.0, -w * r.sin() * sa, w * r.sin() * ca];
        let b = k + 1;
        s.theta[b] = p[2].acos();
        s.phi[b] = p[1].atan2(p[0]);
        s.theta_dot[b] = -v[2] / s.theta[b].sin();
        s.phi_dot[b] = (p[0] * v[1] - p[1] * v[0]) / (p[0] * p[0] + p[1] * p[1]);
    }
    check_state(m, &s)?;
    Ok(s)
}

/// Residuals of the relative-equilibrium equations: three polar-angle
/// balances `omega^2 m_i sin cos - dV/dtheta_i` followed by the two
/// independent differences of the azimuthal torques
/// `m_i m_j sin th_i sin th_j sin(phi_i - phi_j) / sin^3 sigma_ij`.
pub fn re_residuals(m: &MassTriple, config: &SphericalConfiguration, omega2: f64) -> Result<[f64; 5]> {
    let (d_theta, _) = potential_gradient(m, &config.theta, &config.phi)?;
    let th = &config.theta;
    let ph = &config.phi;
    let mut torque = [0.0; 3];
    for (n, (i, j, _)) in CYCLIC.into_iter().enumerate() {
        let p = pair(th, ph, i, j)?;
        torque[n] = m[i] * m[j] * th[i].sin() * th[j].sin() * (ph[i] - ph[j]).sin() / p.sin.powi(3);
    }
    let polar = |i: usize| omega2 * m[i] * th[i].sin() * th[i].cos() - d_theta[i];
    Ok([
        polar(0),
        polar(1),
        polar(2),
        torque[0] - torque[1],
        torque[1] - torque[2],
    ])
}

/// Largest absolute entry of [`re_residuals`].
pub fn re_residual_norm(m: &MassTriple, config: &SphericalConfiguration, omega2: f64) -> Result<f64> {
    Ok(re_residuals(m, config, omega2)?
        .iter()
        .fold(0.0_f64, |acc, r| acc.max(r.abs())))
}
