//! The exceptional meridian shapes where `A = 0`, i.e. where the
//! mass-weighted double-angle vectors `m_l e^{2 i theta_l}` close into a
//! triangle and the shape no longer fixes the rotation axis.

use std::f64::consts::PI;

use crate::geometry::{in_uphys, MassTriple, MeridianShape};

/// Strict triangle inequality `m_i + m_j > m_k` for every `k`.
pub fn triangle_inequality(m: &MassTriple) -> bool {
    let [a, b, c] = m.masses();
    a + b > c && b + c > a && c + a > b
}

#[derive(Clone, Debug, PartialEq)]
pub struct AZeroSolutionSet {
    /// Either empty or exactly four shapes.
    pub solutions: Vec<MeridianShape>,
    /// `alpha_k in (0, pi/2)` with `cos^2 alpha_k = (m_k^2 - (m_i - m_j)^2) / (4 m_i m_j)`.
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// The masses satisfy the triangle inequality with equality somewhere.
    pub degenerate: bool,
}

/// `alpha = arccos sqrt((m_k^2 - (m_i - m_j)^2) / (4 m_i m_j))`, evaluated as an
/// `atan2` of the factored sine and cosine numerators.
fn alpha(mk: f64, mi: f64, mj: f64) -> f64 {
    let cos_num = ((mk - mi + mj) * (mk + mi - mj)).max(0.0);
    let sin_num = ((mi + mj - mk) * (mi + mj + mk)).max(0.0);
    sin_num.sqrt().atan2(cos_num.sqrt())
}

/// All shapes in the meridian shape space with `A = 0`.
pub fn azero_solutions(m: &MassTriple) -> AZeroSolutionSet {
    let [m1, m2, m3] = m.masses();
    let degenerate = m1 + m2 == m3 || m2 + m3 == m1 || m3 + m1 == m2;
    if !triangle_inequality(m) {
        return AZeroSolutionSet { solutions: Vec::new(), alpha1: None, alpha2: None, degenerate };
    }
    let a1 = alpha(m1, m2, m3);
    let a2 = alpha(m2, m3, m1);
    let candidates = [(-PI + a1, a2), (-a1, PI - a2), (a1, a2), (PI - a1, PI - a2)];
    // the four candidates share |sin| values, so they enter U_phys together
    let solutions: Vec<MeridianShape> = if candidates.iter().all(|&(x, y)| in_uphys(x, y)) {
        candidates.iter().map(|&(x, y)| MeridianShape::new(x, y).expect("checked")).collect()
    } else {
        Vec::new()
    };
    AZeroSolutionSet { solutions, alpha1: Some(a1), alpha2: Some(a2), degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::big_a;
    use approx::assert_abs_diff_eq;

    fn masses(a: f64, b: f64, c: f64) -> MassTriple {
        MassTriple::new(a, b, c).unwrap()
    }

    #[test]
    fn triangle_examples() {
        assert!(triangle_inequality(&masses(1.0, 1.0, 1.0)));
        assert!(!triangle_inequality(&masses(1.0, 2.0, 3.0)));
        assert!(triangle_inequality(&masses(2.0, 3.0, 4.0)));
    }

    #[test]
    fn equal_masses() {
        let set = azero_solutions(&masses(1.0, 1.0, 1.0));
        let expected = [(-2.0 * PI / 3.0, PI / 3.0), (-PI / 3.0, 2.0 * PI / 3.0), (PI / 3.0, PI / 3.0), (2.0 * PI / 3.0, 2.0 * PI / 3.0)];
        assert_eq!(set.solutions.len(), 4);
        for (s, e) in set.solutions.iter().zip(expected) {
            assert_abs_diff_eq!(s.tau1(), e.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.tau2(), e.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_and_generic() {
        let set = azero_solutions(&masses(1.0, 2.0, 3.0));
        assert!(set.solutions.is_empty());
        assert!(set.degenerate);
        let m = masses(2.0, 3.0, 4.0);
        let set = azero_solutions(&m);
        assert_abs_diff_eq!(set.alpha1.unwrap(), (3.0f64 / 48.0).sqrt().acos(), epsilon = 1e-14);
        assert_abs_diff_eq!(set.alpha2.unwrap(), (5.0f64 / 32.0).sqrt().acos(), epsilon = 1e-14);
        assert_abs_diff_eq!(set.alpha1.unwrap(), 1.31812, epsilon = 1e-5);
        assert_eq!(set.solutions.len(), 4);
        for s in &set.solutions {
            assert!(big_a(&m, s) < 1e-12);
            let t = s.taus();
            assert!((2.0 * t[0]).sin() * (2.0 * t[1]).sin() > 0.0);
            // cos 2tau_k = (m_k^2 - m_i^2 - m_j^2) / (2 m_i m_j)
            for (k, i, j) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let c = (m[k] * m[k] - m[i] * m[i] - m[j] * m[j]) / (2.0 * m[i] * m[j]);
                assert_abs_diff_eq!((2.0 * t[k]).cos(), c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn no_solutions_outside_triangle() {
        assert!(azero_solutions(&masses(1.0, 1.0, 5.0)).solutions.is_empty());
        assert!(!azero_solutions(&masses(1.0, 1.0, 5.0)).degenerate);
    }
}
