//! The Euler-shape function `g` on the meridian shape space, its local
//! structure at the equilateral point, and predictor-corrector tracing of
//! its zero set.

use std::f64::consts::PI;
use std::fmt;

use crate::azero::azero_solutions;
use crate::conditions::{big_a, f_g_terms, EPS_A};
use crate::error::{Error, Result};
use crate::geometry::{in_uphys, MassTriple, MeridianShape};
use crate::independent::IndependentMember;

/// Corrector tolerance on `g / sum_{i<j} m_i m_j`.
pub const TOL_G: f64 = 1e-12;

/// Smallest step the tracer will take before giving up.
pub const MIN_STEP: f64 = 1e-5;

/// Traced points keep `|sin tau_k|` above this; closer to an excluded line
/// the meridian condition loses accuracy roughly as `1e-12 / distance`.
pub const TRACE_MARGIN: f64 = 1e-3;

const MAX_CORRECTOR_ITER: usize = 8;
const POLISH_ITER: usize = 4;
const SEED_ITER: usize = 50;
const EASY_STREAK: usize = 10;

/// `f(x) = sin x |sin x|`.
pub fn f_signed(x: f64) -> f64 {
    let s = x.sin();
    s * s.abs()
}

fn f_deriv(x: f64) -> f64 {
    let (s, c) = x.sin_cos();
    2.0 * s.abs() * c
}

/// `u(x) = f(x) sin 2x` and its derivative.
fn u_and_deriv(x: f64) -> (f64, f64) {
    let (s2, c2) = (2.0 * x).sin_cos();
    let f = f_signed(x);
    (f * s2, f_deriv(x) * s2 + 2.0 * f * c2)
}

/// `g = m1 f1 (u2 - u3) + m2 f2 (u3 - u1) + m3 f3 (u1 - u2)` with
/// `f_k = f(tau_k)`, `u_k = f(tau_k) sin 2tau_k`.
pub fn g_eval(m: &MassTriple, shape: &MeridianShape) -> f64 {
    g_at(m, shape.tau1(), shape.tau2())
}

fn g_at(m: &MassTriple, t1: f64, t2: f64) -> f64 {
    let t = [t1, t2, -(t1 + t2)];
    let f = t.map(f_signed);
    let u: [f64; 3] = std::array::from_fn(|k| f[k] * (2.0 * t[k]).sin());
    m[0] * f[0] * (u[1] - u[2]) + m[1] * f[1] * (u[2] - u[0]) + m[2] * f[2] * (u[0] - u[1])
}

/// Sum of the magnitudes of the six products in `g`; the natural scale for
/// judging whether `g` vanishes.
pub fn g_scale(m: &MassTriple, shape: &MeridianShape) -> f64 {
    let t = shape.taus();
    let f = t.map(f_signed);
    let u: [f64; 3] = std::array::from_fn(|k| f[k] * (2.0 * t[k]).sin());
    (0..3)
        .map(|k| m[k] * f[k].abs() * (u[(k + 1) % 3].abs() + u[(k + 2) % 3].abs()))
        .sum()
}

/// Determinant `(G12 - G23)(F31 - F12) - (G31 - G12)(F12 - F23)` with
/// `F_ij = m_i m_j / f(tau_k)` and `G_ij = m_i m_j sin 2tau_k`.
pub fn d_eval(m: &MassTriple, shape: &MeridianShape) -> f64 {
    let (f, g) = f_g_terms(m, shape);
    (g[0] - g[1]) * (f[2] - f[0]) - (g[2] - g[0]) * (f[0] - f[1])
}

/// Analytic gradient `(dg/dtau1, dg/dtau2)`.
pub fn g_grad(m: &MassTriple, shape: &MeridianShape) -> [f64; 2] {
    grad_at(m, shape.tau1(), shape.tau2())
}

fn grad_at(m: &MassTriple, t1: f64, t2: f64) -> [f64; 2] {
    let t = [t1, t2, -(t1 + t2)];
    let f = t.map(f_signed);
    let fd = t.map(f_deriv);
    let (u, ud): ([f64; 3], [f64; 3]) = {
        let p = t.map(u_and_deriv);
        (p.map(|x| x.0), p.map(|x| x.1))
    };
    let (m1, m2, m3) = (m[0], m[1], m[2]);
    let g1 = m1 * (fd[0] * (u[1] - u[2]) + f[0] * ud[2])
        + m2 * f[1] * (-ud[2] - ud[0])
        + m3 * (-fd[2] * (u[0] - u[1]) + f[2] * ud[0]);
    let g2 = m1 * f[0] * (ud[1] + ud[2])
        + m2 * (fd[1] * (u[2] - u[0]) - f[1] * ud[2])
        + m3 * (-fd[2] * (u[0] - u[1]) - f[2] * ud[1]);
    [g1, g2]
}

/// Closed form and finite-difference Hessians of `g` at the equilateral point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleHessian {
    pub closed_form: [[f64; 2]; 2],
    pub closed_form_det: f64,
    pub finite_difference: [[f64; 2]; 2],
    pub finite_difference_det: f64,
}

fn det2(h: &[[f64; 2]; 2]) -> f64 {
    h[0][0] * h[1][1] - h[0][1] * h[1][0]
}

/// `H = (9 sqrt 3 / 4) [[m3 - m1, m2 - m1], [m2 - m1, m2 - m3]]`, together with
/// a Richardson-extrapolated central-difference Jacobian of [`g_grad`].
pub fn hessian_equilateral(m: &MassTriple) -> SaddleHessian {
    let c = 9.0 * 3f64.sqrt() / 4.0;
    let closed = [[c * (m[2] - m[0]), c * (m[1] - m[0])], [c * (m[1] - m[0]), c * (m[1] - m[2])]];
    let fd = fd_hessian(m, 2.0 * PI / 3.0, 2.0 * PI / 3.0);
    SaddleHessian {
        closed_form: closed,
        closed_form_det: det2(&closed),
        finite_difference: fd,
        finite_difference_det: det2(&fd),
    }
}

/// Jacobian of the gradient by central differences, one Richardson level.
pub fn fd_hessian(m: &MassTriple, t1: f64, t2: f64) -> [[f64; 2]; 2] {
    let central = |h: f64| {
        let (a, b) = (grad_at(m, t1 + h, t2), grad_at(m, t1 - h, t2));
        let (c, d) = (grad_at(m, t1, t2 + h), grad_at(m, t1, t2 - h));
        // row r = derivative of g_r; column c = direction
        [
            [(a[0] - b[0]) / (2.0 * h), (c[0] - d[0]) / (2.0 * h)],
            [(a[1] - b[1]) / (2.0 * h), (c[1] - d[1]) / (2.0 * h)],
        ]
    };
    let h = 1e-3;
    let (coarse, fine) = (central(h), central(h / 2.0));
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = (4.0 * fine[r][c] - coarse[r][c]) / 3.0;
        }
    }
    out
}

/// The region `sin tau1 > 0`, `sin tau2 > 0`, `sin(tau1 + tau2) < 0` where
/// the equal-mass factorization is written.
pub fn in_equal_mass_region(shape: &MeridianShape) -> bool {
    let (t1, t2) = (shape.tau1(), shape.tau2());
    t1.sin() > 0.0 && t2.sin() > 0.0 && (t1 + t2).sin() < 0.0
}

/// Equal-mass `g` in factored form:
/// `(m/2)(3 - cos 2tau1 - cos 2tau2 - cos 2(tau1 + tau2)) sin(tau1 - tau2) sin(2tau1 + tau2) sin(tau1 + 2tau2)`.
pub fn equal_mass_g(m: f64, shape: &MeridianShape) -> f64 {
    let (t1, t2) = (shape.tau1(), shape.tau2());
    let pref = 3.0 - (2.0 * t1).cos() - (2.0 * t2).cos() - (2.0 * (t1 + t2)).cos();
    0.5 * m * pref * (t1 - t2).sin() * (2.0 * t1 + t2).sin() * (t1 + 2.0 * t2).sin()
}

/// Tangent directions of the two `g = 0` branches crossing at the
/// equilateral point, from the null cone of the closed-form Hessian.
pub fn branch_directions_at_saddle(m: &MassTriple) -> Result<[[f64; 2]; 2]> {
    if m.spread() <= 1e-20 * m.sum_sq() {
        return Err(Error::DegenerateSaddle);
    }
    let h = hessian_equilateral(m).closed_form;
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    // symmetric 2x2 eigen-decomposition
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (mean + rad, mean - rad);
    let angle = 0.5 * (2.0 * b).atan2(a - c);
    let e1 = [angle.cos(), angle.sin()];
    let e2 = [-angle.sin(), angle.cos()];
    if !(l1 > 0.0 && l2 < 0.0) {
        return Err(Error::DegenerateSaddle);
    }
    let (alpha, beta) = ((-l2).sqrt(), l1.sqrt());
    let norm = alpha.hypot(beta);
    let v = |sgn: f64| {
        [
            (alpha * e1[0] + sgn * beta * e2[0]) / norm,
            (alpha * e1[1] + sgn * beta * e2[1]) / norm,
        ]
    };
    Ok([v(1.0), v(-1.0)])
}

/// Euler shape test: `g` vanishes relative to its own terms and `A` is away from zero.
pub fn is_euler_meridian_shape(m: &MassTriple, shape: &MeridianShape, tol: f64) -> bool {
    let scale = g_scale(m, shape);
    g_eval(m, shape).abs() <= tol * scale && big_a(m, shape) > EPS_A
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Left the coordinate window `(-pi, pi) x (0, pi)`.
    Boundary,
    /// Ran into an excluded line inside the window, or the corrector broke down.
    Singular,
    /// The corrector broke down next to an `A = 0` shape.
    AZero,
    MaxPoints,
    ClosedLoop,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Termination::Boundary => "boundary",
            Termination::Singular => "singular",
            Termination::AZero => "a_zero",
            Termination::MaxPoints => "max_points",
            Termination::ClosedLoop => "closed_loop",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationCurve {
    /// Ordered polyline of `g = 0`.
    pub points: Vec<MeridianShape>,
    pub step: f64,
    /// How the forward end stopped (`ClosedLoop` if the curve closed).
    pub termination: Termination,
    /// How the backward end stopped; `None` for a closed loop.
    pub termination_start: Option<Termination>,
    /// Indices of points with `A < EPS_A`.
    pub a_zero_crossings: Vec<usize>,
    /// Index of the corrected seed in `points`.
    pub seed_index: usize,
}

fn normalized_g(m: &MassTriple, t1: f64, t2: f64) -> f64 {
    g_at(m, t1, t2) / m.pair_sum()
}

fn unit(v: [f64; 2]) -> Option<[f64; 2]> {
    let n = v[0].hypot(v[1]);
    if n > 0.0 && n.is_finite() {
        Some([v[0] / n, v[1] / n])
    } else {
        None
    }
}

fn in_trace_domain(q: [f64; 2]) -> bool {
    in_uphys(q[0], q[1])
        && q[0].sin().abs() > TRACE_MARGIN
        && q[1].sin().abs() > TRACE_MARGIN
        && (q[0] + q[1]).sin().abs() > TRACE_MARGIN
}

/// Newton on `g` along the fixed direction `n` starting at `p`. Once the
/// tolerance is met a few more steps are taken while they keep helping.
fn newton_along(m: &MassTriple, p: [f64; 2], n: [f64; 2], max_iter: usize) -> Option<[f64; 2]> {
    let step = |q: [f64; 2], g: f64| {
        let gr = grad_at(m, q[0], q[1]);
        let slope = (gr[0] * n[0] + gr[1] * n[1]) / m.pair_sum();
        if slope == 0.0 || !slope.is_finite() {
            return None;
        }
        let dt = -g / slope;
        Some([q[0] + dt * n[0], q[1] + dt * n[1]])
    };
    let mut q = p;
    for _ in 0..=max_iter {
        if !in_trace_domain(q) {
            return None;
        }
        let g = normalized_g(m, q[0], q[1]);
        if g.abs() < TOL_G {
            // near the corners g itself is tiny, so keep going while the
            // steps still pay off
            let mut g = g;
            for _ in 0..POLISH_ITER {
                let Some(r) = step(q, g).filter(|r| in_trace_domain(*r)) else { break };
                let gr = normalized_g(m, r[0], r[1]);
                if gr.abs() >= g.abs() {
                    break;
                }
                let done = gr.abs() > 0.5 * g.abs();
                (q, g) = (r, gr);
                if done {
                    break;
                }
            }
            return Some(q);
        }
        q = step(q, g)?;
    }
    None
}

fn tangent_at(m: &MassTriple, p: [f64; 2]) -> Option<[f64; 2]> {
    let g = grad_at(m, p[0], p[1]);
    unit([-g[1], g[0]])
}

/// Moves a point onto `g = 0` by Newton along the local gradient.
pub fn correct_seed(m: &MassTriple, seed: &MeridianShape) -> Result<MeridianShape> {
    let fail = || Error::SeedNotOnContour { tau1: seed.tau1(), tau2: seed.tau2() };
    let mut q = seed.as_pair();
    for _ in 0..SEED_ITER {
        if !in_trace_domain(q) {
            return Err(fail());
        }
        let g = normalized_g(m, q[0], q[1]);
        if g.abs() < TOL_G {
            return MeridianShape::new(q[0], q[1]).map_err(|_| fail());
        }
        let gr = grad_at(m, q[0], q[1]);
        let n2 = (gr[0] * gr[0] + gr[1] * gr[1]) / m.pair_sum();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(fail());
        }
        q = [q[0] - g * gr[0] / n2, q[1] - g * gr[1] / n2];
    }
    Err(fail())
}

fn classify_stop(m: &MassTriple, p: [f64; 2], q: [f64; 2]) -> Termination {
    if !(q[0] > -PI && q[0] < PI && q[1] > 0.0 && q[1] < PI) {
        return Termination::Boundary;
    }
    if let Ok(s) = MeridianShape::new(p[0], p[1]) {
        if big_a(m, &s) < 1e-3 {
            return Termination::AZero;
        }
    }
    Termination::Singular
}

/// Traces one direction from `start` with initial tangent `dir`. Returns the
/// points (excluding `start`) and the termination reason.
fn trace_direction(
    m: &MassTriple,
    start: [f64; 2],
    dir: [f64; 2],
    step: f64,
    budget: usize,
) -> (Vec<[f64; 2]>, Termination) {
    let mut out = Vec::new();
    let (mut p, mut t, mut h) = (start, dir, step);
    let mut streak = 0;
    loop {
        if out.len() >= budget {
            return (out, Termination::MaxPoints);
        }
        let q0 = [p[0] + h * t[0], p[1] + h * t[1]];
        let normal = [-t[1], t[0]];
        let accepted = newton_along(m, q0, normal, MAX_CORRECTOR_ITER).and_then(|q| {
            let d = (q[0] - p[0]).hypot(q[1] - p[1]);
            let nt = tangent_at(m, q)?;
            let nt = if nt[0] * t[0] + nt[1] * t[1] < 0.0 { [-nt[0], -nt[1]] } else { nt };
            // reject jumps onto a neighbouring branch
            (d < 1.5 * h && nt[0] * t[0] + nt[1] * t[1] > 0.5).then_some((q, nt))
        });
        match accepted {
            Some((q, nt)) => {
                out.push(q);
                if out.len() >= 10 && (q[0] - start[0]).hypot(q[1] - start[1]) < step / 2.0 {
                    return (out, Termination::ClosedLoop);
                }
                p = q;
                t = nt;
                streak += 1;
                if streak >= EASY_STREAK {
                    h = (2.0 * h).min(step);
                    streak = 0;
                }
            }
            None => {
                streak = 0;
                h /= 2.0;
                if h < MIN_STEP {
                    return (out, classify_stop(m, p, q0));
                }
            }
        }
    }
}

/// Traces the `g = 0` curve through `seed` in both directions.
///
/// The seed is first corrected onto the curve. Each end stops at a boundary,
/// a singular line, `max_points`, or when the curve closes on itself. Shapes
/// with `A = 0` and mass-independent shapes met by the curve are inserted as
/// vertices; the former are listed in `a_zero_crossings`.
pub fn trace_contour(m: &MassTriple, seed: &MeridianShape, step: f64, max_points: usize) -> Result<ContinuationCurve> {
    if !(1e-4..=1e-1).contains(&step) {
        return Err(Error::InvalidArgument(format!("step {step} outside [1e-4, 1e-1]")));
    }
    if max_points < 2 {
        return Err(Error::InvalidArgument(format!("max_points = {max_points} must be at least 2")));
    }
    let start = correct_seed(m, seed)?;
    let s = start.as_pair();
    let dir = tangent_at(m, s).ok_or(Error::SeedNotOnContour { tau1: seed.tau1(), tau2: seed.tau2() })?;
    trace_from(m, s, dir, step, max_points)
}

/// Like [`trace_contour`] but with a prescribed initial direction, which is
/// needed at a critical point of `g` such as the equilateral saddle.
pub fn trace_contour_from(
    m: &MassTriple,
    start: &MeridianShape,
    dir: [f64; 2],
    step: f64,
    max_points: usize,
) -> Result<ContinuationCurve> {
    let dir = unit(dir).ok_or_else(|| Error::InvalidArgument("zero direction".into()))?;
    trace_from(m, start.as_pair(), dir, step, max_points)
}

fn trace_from(m: &MassTriple, s: [f64; 2], dir: [f64; 2], step: f64, max_points: usize) -> Result<ContinuationCurve> {
    let (fwd, fwd_end) = trace_direction(m, s, dir, step, max_points - 1);
    let (bwd, bwd_end) = if fwd_end == Termination::ClosedLoop {
        (Vec::new(), None)
    } else {
        let budget = max_points - 1 - fwd.len();
        let (b, e) = trace_direction(m, s, [-dir[0], -dir[1]], step, budget);
        (b, Some(e))
    };
    let mut raw: Vec<[f64; 2]> = bwd.into_iter().rev().collect();
    let mut seed_index = raw.len();
    raw.push(s);
    raw.extend(fwd);
    if fwd_end == Termination::ClosedLoop {
        raw.push(s);
    }

    // splice in A = 0 shapes and mass-independent shapes that the curve runs through
    let landmarks = azero_solutions(m)
        .solutions
        .into_iter()
        .chain(IndependentMember::ALL.map(IndependentMember::shape));
    for z in landmarks {
        if raw.contains(&z.as_pair()) {
            continue;
        }
        if let Some((k, q, dist)) = closest_on_polyline(m, &raw, z.as_pair()) {
            if dist < 1e-6 {
                raw.insert(k + 1, q);
                if k < seed_index {
                    seed_index += 1;
                }
            }
        }
    }

    let points = raw
        .iter()
        .map(|p| MeridianShape::new(p[0], p[1]))
        .collect::<Result<Vec<_>>>()?;
    let a_zero_crossings = points
        .iter()
        .enumerate()
        .filter(|(_, p)| big_a(m, p) < EPS_A)
        .map(|(i, _)| i)
        .collect();
    Ok(ContinuationCurve {
        points,
        step,
        termination: fwd_end,
        termination_start: bwd_end,
        a_zero_crossings,
        seed_index,
    })
}

/// For each segment, the point nearest `target` projected back onto
/// `g = 0` along the segment normal. Returns the segment index, the
/// projected point and its distance to `target` for the best segment.
fn closest_on_polyline(m: &MassTriple, pts: &[[f64; 2]], target: [f64; 2]) -> Option<(usize, [f64; 2], f64)> {
    let mut cands: Vec<(f64, usize, [f64; 2], [f64; 2])> = pts
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| {
            let (a, b) = (w[0], w[1]);
            let d = [b[0] - a[0], b[1] - a[1]];
            let len2 = d[0] * d[0] + d[1] * d[1];
            if len2 == 0.0 {
                return None;
            }
            let s = (((target[0] - a[0]) * d[0] + (target[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
            let c = [a[0] + s * d[0], a[1] + s * d[1]];
            let dist = (c[0] - target[0]).hypot(c[1] - target[1]);
            let n = unit([-d[1], d[0]])?;
            Some((dist, k, c, n))
        })
        .collect();
    cands.sort_by(|x, y| x.0.total_cmp(&y.0));
    cands
        .into_iter()
        .take(3)
        .filter_map(|(_, k, c, n)| {
            let q = newton_along(m, c, n, 100)?;
            Some((k, q, (q[0] - target[0]).hypot(q[1] - target[1])))
        })
        .min_by(|x, y| x.2.total_cmp(&y.2))
}

/// Distance from `target` to the traced curve, refining the polyline by
/// projecting its nearest point back onto `g = 0`. Returns the refined point
/// and the distance; `None` if no refinement converged.
pub fn closest_approach(m: &MassTriple, curve: &ContinuationCurve, target: &MeridianShape) -> Option<(MeridianShape, f64)> {
    let pts: Vec<[f64; 2]> = curve.points.iter().map(|p| p.as_pair()).collect();
    if let Some(i) = pts.iter().position(|p| *p == target.as_pair()) {
        return Some((curve.points[i], 0.0));
    }
    let (_, q, d) = closest_on_polyline(m, &pts, target.as_pair())?;
    Some((MeridianShape::new(q[0], q[1]).ok()?, d))
}

/// `g` with masses and angles cycled together: `(m2, m3, m1)` at `(tau2, tau3)`.
pub fn g_cycled(m: &MassTriple, shape: &MeridianShape) -> f64 {
    let t = shape.taus();
    g_at(&m.permuted([1, 2, 0]), t[1], t[2])
}
