//! Shapes that form rotating-meridian relative equilibria for every choice of
//! masses, plus the two-body and restricted three-body limits.
//!
//! A meridian shape is mass independent when every pair term of the meridian
//! condition vanishes on its own, which happens exactly when
//! `F(x) = cos x |sin x|^3` takes a common value at `tau1`, `tau2`, `tau3`.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rayon::prelude::*;

use crate::conditions::{big_a, configuration_from_meridian_shape, Spin, EPS_A};
use crate::continuation::f_signed;
use crate::error::{Error, Result};
use crate::geometry::{in_uphys, MassTriple, MeridianShape, ReSolution, Sign, SphericalConfiguration, EPS_SING};

/// `F(x) = cos x |sin x|^3`.
pub fn pair_balance(x: f64) -> f64 {
    let s = x.sin();
    x.cos() * s.abs().powi(3)
}

/// `F'(x) = f(x) (1 + 2 cos 2x)`.
fn pair_balance_deriv(x: f64) -> f64 {
    f_signed(x) * (1.0 + 2.0 * (2.0 * x).cos())
}

/// `F(a) - F(b)` written as a product so it keeps full relative accuracy
/// near the equilateral point, where both factors vanish linearly.
fn balance_difference(a: f64, b: f64) -> f64 {
    let (sa, sb) = (a.sin(), b.sin());
    let (sum, diff) = (a + b, a - b);
    if sa * sb >= 0.0 {
        let sigma = if sa != 0.0 { sa.signum() } else { sb.signum() };
        sigma * diff.sin() * (sum.cos() - (2.0 * sum).cos() * diff.cos()) / 2.0
    } else {
        sa.signum() * sum.sin() * (diff.cos() - sum.cos() * (2.0 * diff).cos()) / 2.0
    }
}

/// `f1 = F(tau1) - F(tau2)`. Defined for all finite arguments.
pub fn f1(tau1: f64, tau2: f64) -> f64 {
    balance_difference(tau1, tau2)
}

/// `f2 = F(tau1) - F(tau1 + tau2)`. Defined for all finite arguments.
pub fn f2(tau1: f64, tau2: f64) -> f64 {
    balance_difference(tau1, tau1 + tau2)
}

/// Both fields at a shape.
pub fn f_fields(shape: &MeridianShape) -> [f64; 2] {
    [f1(shape.tau1(), shape.tau2()), f2(shape.tau1(), shape.tau2())]
}

fn f_jacobian(t1: f64, t2: f64) -> [[f64; 2]; 2] {
    let (d1, d2, d12) = (pair_balance_deriv(t1), pair_balance_deriv(t2), pair_balance_deriv(t1 + t2));
    [[d1, -d2], [d1 - d12, -d12]]
}

/// The isosceles arc `tau0 = arccos((sqrt 2 - 1)/2) / 2`, the root of
/// `4 c (c + 1) = 1` with `c = cos 2 tau0`.
pub fn isosceles_arc() -> f64 {
    0.5 * ((SQRT_2 - 1.0) / 2.0).acos()
}

/// Equilateral arc `2 pi / 3`, where `4 c (c + 1) = -1`.
pub const EQUILATERAL_ARC: f64 = 2.0 * PI / 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndependentMember {
    Equilateral,
    /// Body 3 in the middle of the meridian arc.
    IsoscelesCenter3,
    IsoscelesCenter1,
    IsoscelesCenter2,
}

impl IndependentMember {
    pub const ALL: [IndependentMember; 4] = [
        IndependentMember::Equilateral,
        IndependentMember::IsoscelesCenter3,
        IndependentMember::IsoscelesCenter1,
        IndependentMember::IsoscelesCenter2,
    ];

    pub fn shape(self) -> MeridianShape {
        let t0 = isosceles_arc();
        let (t1, t2) = match self {
            IndependentMember::Equilateral => (EQUILATERAL_ARC, EQUILATERAL_ARC),
            IndependentMember::IsoscelesCenter3 => (t0, t0),
            IndependentMember::IsoscelesCenter1 => (-2.0 * t0, t0),
            IndependentMember::IsoscelesCenter2 => (-t0, 2.0 * t0),
        };
        MeridianShape::new(t1, t2).expect("mass independent shapes lie in U_phys")
    }

    /// Centre body (1-based) of an isosceles member.
    pub fn center(self) -> Option<usize> {
        match self {
            IndependentMember::Equilateral => None,
            IndependentMember::IsoscelesCenter3 => Some(3),
            IndependentMember::IsoscelesCenter1 => Some(1),
            IndependentMember::IsoscelesCenter2 => Some(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IndependentMember::Equilateral => "equilateral",
            IndependentMember::IsoscelesCenter3 => "isosceles_center3",
            IndependentMember::IsoscelesCenter1 => "isosceles_center1",
            IndependentMember::IsoscelesCenter2 => "isosceles_center2",
        }
    }
}

impl fmt::Display for IndependentMember {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndependentShapeSet {
    pub equilateral: MeridianShape,
    pub isosceles_center3: MeridianShape,
    pub isosceles_center1: MeridianShape,
    pub isosceles_center2: MeridianShape,
    pub tau0: f64,
}

impl IndependentShapeSet {
    pub fn members(&self) -> [(IndependentMember, MeridianShape); 4] {
        [
            (IndependentMember::Equilateral, self.equilateral),
            (IndependentMember::IsoscelesCenter3, self.isosceles_center3),
            (IndependentMember::IsoscelesCenter1, self.isosceles_center1),
            (IndependentMember::IsoscelesCenter2, self.isosceles_center2),
        ]
    }
}

pub fn mass_independent_shapes() -> IndependentShapeSet {
    IndependentShapeSet {
        equilateral: IndependentMember::Equilateral.shape(),
        isosceles_center3: IndependentMember::IsoscelesCenter3.shape(),
        isosceles_center1: IndependentMember::IsoscelesCenter1.shape(),
        isosceles_center2: IndependentMember::IsoscelesCenter2.shape(),
        tau0: isosceles_arc(),
    }
}

/// Closed-form `A^2` at the isosceles shape whose centre body is `center`
/// (1, 2 or 3). Panics on any other value.
pub fn isosceles_a2(m: &MassTriple, center: usize) -> f64 {
    // pair (i, j) is the long side, k the centre body
    let (i, j, k) = match center {
        3 => (0, 1, 2),
        1 => (1, 2, 0),
        2 => (2, 0, 1),
        _ => panic!("isosceles centre must be 1, 2 or 3, got {center}"),
    };
    m.sum_sq() - (2.0 * SQRT_2 - 1.0) * m[i] * m[j] + (SQRT_2 - 1.0) * (m[i] + m[j]) * m[k]
}

/// Spin of a mass-independent member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemberSpin {
    pub s: Sign,
    pub omega2: f64,
    pub a: f64,
    /// Equal-mass equilateral: `A = 0`, the bodies are at rest and the
    /// position of the triangle on the meridian is arbitrary.
    pub indefinite: bool,
}

/// `16 / (3 sqrt 3)`, the equilateral ratio `omega^2 / A`.
pub fn equilateral_spin_ratio() -> f64 {
    16.0 / (3.0 * 3f64.sqrt())
}

/// `16 / sqrt(16 sqrt 2 - 13)`, the isosceles ratio `omega^2 / A`.
pub fn isosceles_spin_ratio() -> f64 {
    16.0 / (16.0 * SQRT_2 - 13.0).sqrt()
}

pub fn spin_for_shape(m: &MassTriple, member: IndependentMember) -> MemberSpin {
    match member {
        IndependentMember::Equilateral => {
            let a = big_a(m, &member.shape());
            if a <= EPS_A {
                MemberSpin { s: Sign::Minus, omega2: 0.0, a, indefinite: true }
            } else {
                MemberSpin { s: Sign::Minus, omega2: equilateral_spin_ratio() * a, a, indefinite: false }
            }
        }
        _ => {
            let a = isosceles_a2(m, member.center().unwrap()).sqrt();
            MemberSpin { s: Sign::Plus, omega2: isosceles_spin_ratio() * a, a, indefinite: false }
        }
    }
}

/// Polar angle of body 1 used for the indefinite equal-mass equilateral
/// equilibrium; it keeps every body off the poles.
pub const INDEFINITE_THETA1: f64 = PI / 6.0;

/// Configuration and spin of a member for the given masses.
pub fn member_solution(m: &MassTriple, member: IndependentMember) -> Result<(ReSolution, MemberSpin)> {
    let spin = spin_for_shape(m, member);
    let shape = member.shape();
    let config = if spin.indefinite {
        let t = shape.taus();
        let th1 = INDEFINITE_THETA1;
        SphericalConfiguration::meridian([th1, th1 - t[2], th1 + t[1]])?
    } else {
        configuration_from_meridian_shape(m, &shape, spin.s)?
    };
    Ok((ReSolution::new(config, spin.s, spin.omega2)?, spin))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster {
    /// Newton-polished centre.
    pub center: MeridianShape,
    /// Mean of the grid hits before polishing.
    pub raw_center: [f64; 2],
    pub hits: usize,
    /// `max(|f1|, |f2|)` at the polished centre.
    pub residual: f64,
}

/// Newton on `(f1, f2)` from `(t1, t2)`. The equilateral root is degenerate,
/// so convergence there is only linear; up to `max_iter` steps are taken.
pub fn polish_independent(t1: f64, t2: f64, max_iter: usize) -> (f64, f64) {
    let (mut x, mut y) = (t1, t2);
    for _ in 0..max_iter {
        let (r1, r2) = (f1(x, y), f2(x, y));
        if r1 == 0.0 && r2 == 0.0 {
            break;
        }
        let j = f_jacobian(x, y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (j[1][1] * r1 - j[0][1] * r2) / det;
        let dy = (-j[1][0] * r1 + j[0][0] * r2) / det;
        x -= dx;
        y -= dy;
        if dx.abs().max(dy.abs()) < 1e-16 {
            break;
        }
    }
    (x, y)
}

/// Cell-centred grid of `grid_n x grid_n` points over the meridian shape
/// space, keeping points where `|f1| < tol` and `|f2| < tol`. Points whose
/// common value `F(tau_k)` is itself within the band around zero are
/// dropped: `F` vanishes on the excluded lines `sin tau_k = 0`, so those hits
/// are shadows of the boundary rather than interior solutions. Hits within
/// two cells of each other form one cluster; each cluster's mean is polished
/// by Newton. Clusters are returned in grid order.
pub fn region_bruteforce(grid_n: usize, tol: f64) -> Result<Vec<Cluster>> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!("grid_n = {grid_n} must be at least 2")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} must be positive")));
    }
    let h1 = 2.0 * PI / grid_n as f64;
    let h2 = PI / grid_n as f64;
    let coord = |i: usize, j: usize| (-PI + (i as f64 + 0.5) * h1, (j as f64 + 0.5) * h2);

    let hits: Vec<(usize, usize)> = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            (0..grid_n)
                .filter(|&j| {
                    let (t1, t2) = coord(i, j);
                    if !in_uphys(t1, t2) || f1(t1, t2).abs() >= tol || f2(t1, t2).abs() >= tol {
                        return false;
                    }
                    let common = pair_balance(t1).abs().min(pair_balance(t2).abs()).min(pair_balance(t1 + t2).abs());
                    common > 10.0 * tol
                })
                .map(|j| (i, j))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let index: HashSet<(usize, usize)> = hits.iter().copied().collect();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut clusters = Vec::new();
    for &start in &hits {
        if !seen.insert(start) {
            continue;
        }
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some((i, j)) = queue.pop_front() {
            for di in -2i64..=2 {
                for dj in -2i64..=2 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 {
                        continue;
                    }
                    let n = (ni as usize, nj as usize);
                    if index.contains(&n) && seen.insert(n) {
                        members.push(n);
                        queue.push_back(n);
                    }
                }
            }
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(i, j) in &members {
            let (x, y) = coord(i, j);
            sx += x;
            sy += y;
        }
        let raw = [sx / members.len() as f64, sy / members.len() as f64];
        let (px, py) = polish_independent(raw[0], raw[1], 200);
        let center = MeridianShape::new(px, py)?;
        let residual = f1(px, py).abs().max(f2(px, py).abs());
        clusters.push(Cluster { center, raw_center: raw, hits: members.len(), residual });
    }
    Ok(clusters)
}

/// Two-body meridian equilibrium at separation `delta`:
/// `s omega^2 = A2 / (cos delta |sin delta|^3)` with `A2 = |m1 + m2 e^{2 i delta}|`.
pub fn two_body_spin(m1: f64, m2: f64, delta: f64) -> Result<Spin> {
    if !(m1 > 0.0 && m2 > 0.0 && m1.is_finite() && m2.is_finite()) {
        return Err(Error::InvalidMass(m1, m2, 0.0));
    }
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::InvalidArc(delta));
    }
    if (delta - PI / 2.0).abs() < EPS_SING {
        return Err(Error::NoTwoBodyEquilibrium(delta));
    }
    let a2 = two_body_a(m1, m2, delta);
    let value = a2 / pair_balance(delta);
    Ok(Spin { s: Sign::of(value), omega2: value.abs() })
}

fn two_body_a(m1: f64, m2: f64, delta: f64) -> f64 {
    let (s, c) = (2.0 * delta).sin_cos();
    (m1 + m2 * c).hypot(m2 * s)
}

/// Residual of the balance that fixes a massless third body on the meridian
/// of a two-body equilibrium.
pub fn restricted_residual(m1: f64, m2: f64, theta1: f64, theta2: f64, x: f64, theta3: f64) -> f64 {
    let term = |d: f64| x * (2.0 * d).sin() - 1.0 / f_signed(d);
    m2 * term(theta2 - theta3) - m1 * term(theta3 - theta1)
}

/// All positions `theta3 in (-pi, pi]` of a massless third body that keep
/// the two-body equilibrium `(theta1, theta2, s, omega2)` rigid.
///
/// The residual is sampled at 4096 points. Sign changes not straddling a
/// pole are bisected to full precision; sampled local minima of `|R|`
/// without a sign change are refined by golden-section search and kept when
/// they touch zero, which catches the double root at the equilateral
/// position.
pub fn restricted_third_positions(m1: f64, m2: f64, theta1: f64, theta2: f64, s: Sign, omega2: f64) -> Vec<f64> {
    const SAMPLES: usize = 4096;
    let a2 = two_body_a(m1, m2, theta1 - theta2);
    let x = s.value() * omega2 / (2.0 * a2);
    let r = |t: f64| restricted_residual(m1, m2, theta1, theta2, x, t);
    let pole_side = |t: f64| ((theta2 - t).sin().signum(), (t - theta1).sin().signum());
    let regular = |t: f64| (theta2 - t).sin().abs() > EPS_SING && (t - theta1).sin().abs() > EPS_SING;
    let scale = |t: f64| {
        (m1 + m2) * (1.0 + x.abs() + 1.0 / f_signed(theta2 - t).abs() + 1.0 / f_signed(t - theta1).abs())
    };

    let h = 2.0 * PI / SAMPLES as f64;
    let grid: Vec<f64> = (0..=SAMPLES).map(|k| -PI + k as f64 * h).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| if regular(t) { r(t) } else { f64::NAN }).collect();
    let same_piece = |a: usize, b: usize| {
        vals[a].is_finite() && vals[b].is_finite() && pole_side(grid[a]) == pole_side(grid[b])
    };

    let mut roots: Vec<f64> = Vec::new();
    for k in 0..SAMPLES {
        if !same_piece(k, k + 1) {
            continue;
        }
        let (rlo, rhi) = (vals[k], vals[k + 1]);
        if rhi == 0.0 {
            roots.push(grid[k + 1]);
        } else if rlo.signum() != rhi.signum() {
            roots.push(bisect(&r, grid[k], grid[k + 1]));
        }
    }

    for k in 1..SAMPLES {
        if !(same_piece(k - 1, k) && same_piece(k, k + 1)) {
            continue;
        }
        let (a, b, c) = (vals[k - 1], vals[k], vals[k + 1]);
        if a.signum() != b.signum() || b.signum() != c.signum() || b.abs() > a.abs() || b.abs() > c.abs() {
            continue;
        }
        // the sampled values dip towards zero: find the extremum and see
        // whether it reaches or crosses zero between the samples
        let sg = b.signum();
        let t = golden_min(|t| sg * r(t), grid[k - 1], grid[k + 1]);
        let rt = r(t);
        if rt.abs() < 1e-12 * scale(t) {
            roots.push(t);
        } else if rt.signum() != sg {
            roots.push(bisect(&r, grid[k - 1], t));
            roots.push(bisect(&r, t, grid[k + 1]));
        }
    }

    roots.sort_by(|a, b| a.total_cmp(b));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-7);
    roots.into_iter().filter(|t| *t > -PI && *t <= PI).collect()
}

/// Bisection on a bracket with a sign change; returns the endpoint with
/// the smaller residual once the bracket collapses to adjacent floats.
fn bisect(r: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = r(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = r(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    if r(lo).abs() <= r(hi).abs() {
        lo
    } else {
        hi
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{meridian_residuals, solve_s_omega2};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn direct_f1(a: f64, b: f64) -> f64 {
        a.cos() * a.sin().abs().powi(3) - b.cos() * b.sin().abs().powi(3)
    }

    #[test]
    fn factored_fields_match_direct_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100_000 {
            let a = rng.gen_range(-7.0..7.0);
            let b = rng.gen_range(-7.0..7.0);
            assert_abs_diff_eq!(f1(a, b), direct_f1(a, b), epsilon = 1e-14);
            assert_abs_diff_eq!(f2(a, b), direct_f1(a, a + b), epsilon = 1e-14);
        }
    }

    #[test]
    fn field_examples() {
        for x in [-2.0, -0.3, 0.0, 0.7, 2.9] {
            assert_eq!(f1(x, x), 0.0);
        }
        let t0 = isosceles_arc();
        for (a, b) in [(t0, t0), (EQUILATERAL_ARC, EQUILATERAL_ARC), (-2.0 * t0, t0), (-t0, 2.0 * t0)] {
            assert!(f1(a, b).abs() < 1e-15 && f2(a, b).abs() < 1e-15, "({a}, {b})");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = 1e-6;
        for _ in 0..1000 {
            let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0));
            if !in_uphys(a, b) || (a + b).sin().abs() < 0.05 || a.sin().abs() < 0.05 {
                continue;
            }
            let j = f_jacobian(a, b);
            let d = [
                [(f1(a + h, b) - f1(a - h, b)) / (2.0 * h), (f1(a, b + h) - f1(a, b - h)) / (2.0 * h)],
                [(f2(a + h, b) - f2(a - h, b)) / (2.0 * h), (f2(a, b + h) - f2(a, b - h)) / (2.0 * h)],
            ];
            for r in 0..2 {
                for c in 0..2 {
                    assert_abs_diff_eq!(j[r][c], d[r][c], epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn isosceles_arc_examples() {
        let t0 = isosceles_arc();
        let c = (2.0 * t0).cos();
        assert!((4.0 * c * (c + 1.0) - 1.0).abs() < 1e-14);
        assert_abs_diff_eq!(c, 0.207_106_8, epsilon = 1e-7);
        assert_abs_diff_eq!(t0, 0.6810, epsilon = 1e-4);
        assert!(t0 < PI / 4.0);
        let c = (2.0 * EQUILATERAL_ARC).cos();
        assert!((4.0 * c * (c + 1.0) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn shape_set_members() {
        let set = mass_independent_shapes();
        assert_eq!(set.equilateral.as_pair(), [EQUILATERAL_ARC, EQUILATERAL_ARC]);
        for (member, shape) in set.members() {
            assert_eq!(member.shape(), shape);
            assert!(in_uphys(shape.tau1(), shape.tau2()));
        }
    }

    #[test]
    fn isosceles_a2_examples() {
        let m = MassTriple::equal(1.0).unwrap();
        for c in 1..=3 {
            assert_abs_diff_eq!(isosceles_a2(&m, c), 2.0, epsilon = 1e-14);
        }
        let m = MassTriple::new(0.4, 0.5, 1.0).unwrap();
        let shape = IndependentMember::IsoscelesCenter3.shape();
        assert_abs_diff_eq!(isosceles_a2(&m, 3), big_a(&m, &shape).powi(2), epsilon = 1e-12);
        // relabeling: the centre-1 value for m is the centre-3 value with bodies 1 and 3 swapped
        let m = MassTriple::new(0.3, 1.7, 4.2).unwrap();
        let swapped = m.permuted([2, 1, 0]);
        assert_abs_diff_eq!(isosceles_a2(&m, 1), isosceles_a2(&swapped, 3), epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let m = MassTriple::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
            for member in &IndependentMember::ALL[1..] {
                let shape = member.shape();
                let c = member.center().unwrap();
                assert!((isosceles_a2(&m, c) - big_a(&m, &shape).powi(2)).abs() < 1e-12 * m.sum_sq());
            }
        }
    }

    #[test]
    fn spin_examples() {
        let eq = spin_for_shape(&MassTriple::equal(1.0).unwrap(), IndependentMember::Equilateral);
        assert!(eq.indefinite);
        assert_eq!(eq.omega2, 0.0);
        let m = MassTriple::new(0.1, 0.5, 1.0).unwrap();
        let eq = spin_for_shape(&m, IndependentMember::Equilateral);
        assert_eq!(eq.s, Sign::Minus);
        assert_abs_diff_eq!(eq.omega2, 16.0 * 0.61f64.sqrt() / (3.0 * 3f64.sqrt()), epsilon = 1e-12);
        assert_abs_diff_eq!(eq.omega2, 2.4049, epsilon = 1e-4);
        let iso = spin_for_shape(&MassTriple::equal(1.0).unwrap(), IndependentMember::IsoscelesCenter3);
        assert_eq!(iso.s, Sign::Plus);
        assert_abs_diff_eq!(iso.omega2, 16.0 * SQRT_2 / (16.0 * SQRT_2 - 13.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn member_spin_agrees_with_generic_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let m = MassTriple::new(rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0)).unwrap();
            for member in IndependentMember::ALL {
                let spin = spin_for_shape(&m, member);
                let solved = solve_s_omega2(&m, &member.shape()).unwrap().unwrap();
                assert_eq!(spin.s, solved.s);
                assert!((spin.omega2 - solved.omega2).abs() < 1e-10 * spin.omega2);
                let r = meridian_residuals(&m, &member.shape(), spin.s, spin.omega2).unwrap();
                assert!(r[0].abs().max(r[1].abs()) < 1e-10);
            }
        }
    }

    #[test]
    fn indefinite_member_keeps_bodies_off_poles() {
        let (sol, spin) = member_solution(&MassTriple::equal(2.0).unwrap(), IndependentMember::Equilateral).unwrap();
        assert!(spin.indefinite);
        for t in sol.config.theta {
            assert!(t.sin().abs() > 0.4);
        }
    }

    #[test]
    fn polish_reaches_known_shapes() {
        let t0 = isosceles_arc();
        let (x, y) = polish_independent(t0 + 1e-3, t0 - 2e-3, 200);
        assert_abs_diff_eq!(x, t0, epsilon = 1e-14);
        assert_abs_diff_eq!(y, t0, epsilon = 1e-14);
        let (x, y) = polish_independent(EQUILATERAL_ARC + 2e-3, EQUILATERAL_ARC - 1e-3, 200);
        assert_abs_diff_eq!(x, EQUILATERAL_ARC, epsilon = 1e-9);
        assert_abs_diff_eq!(y, EQUILATERAL_ARC, epsilon = 1e-9);
    }

    #[test]
    fn small_bruteforce_finds_four() {
        let clusters = region_bruteforce(600, 5e-3).unwrap();
        assert_eq!(clusters.len(), 4, "{clusters:?}");
        let set = mass_independent_shapes();
        for (_, s) in set.members() {
            assert!(clusters.iter().any(|c| c.center.distance(&s) < 1e-8));
        }
        let sequential = region_bruteforce(600, 5e-3).unwrap();
        assert_eq!(clusters, sequential);
    }

    #[test]
    fn two_body_examples() {
        let s = two_body_spin(1.0, 1.0, PI / 4.0).unwrap();
        assert_eq!(s.s, Sign::Plus);
        assert_abs_diff_eq!(s.omega2, 4.0 * SQRT_2, epsilon = 1e-12);
        assert!(matches!(two_body_spin(1.0, 1.0, PI / 2.0), Err(Error::NoTwoBodyEquilibrium(_))));
        assert_eq!(two_body_spin(1.0, 2.0, 3.0 * PI / 4.0).unwrap().s, Sign::Minus);
        assert!(two_body_spin(1.0, 1.0, 0.0).is_err());
        assert!(two_body_spin(1.0, 1.0, PI).is_err());
    }

    #[test]
    fn restricted_roots_include_independent_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let (m1, m2) = (rng.gen_range(0.1..10.0), rng.gen_range(0.1..10.0));
            let th1 = rng.gen_range(-1.0..1.0);
            for member in IndependentMember::ALL {
                let t = member.shape().taus();
                let (th2, th3) = (th1 - t[2], th1 + t[1]);
                let delta = (th1 - th2).rem_euclid(2.0 * PI);
                let delta = if delta > PI { 2.0 * PI - delta } else { delta };
                let spin = two_body_spin(m1, m2, delta).unwrap();
                let roots = restricted_third_positions(m1, m2, th1, th2, spin.s, spin.omega2);
                let target = (th3 + PI).rem_euclid(2.0 * PI) - PI;
                let hit = roots.iter().any(|r| {
                    let d = (r - target).rem_euclid(2.0 * PI);
                    d.min(2.0 * PI - d) < 1e-6
                });
                assert!(hit, "{member}: {target} not in {roots:?}");
                let a2 = two_body_a(m1, m2, th1 - th2);
                let x = spin.s.value() * spin.omega2 / (2.0 * a2);
                for r in &roots {
                    let res = restricted_residual(m1, m2, th1, th2, x, *r);
                    let scale = (m1 + m2) * (1.0 + x.abs() + 1.0 / f_signed(th2 - r).abs() + 1.0 / f_signed(r - th1).abs());
                    assert!(res.abs() < 1e-10 * scale, "residual {res} at {r}");
                }
            }
        }
    }
}
