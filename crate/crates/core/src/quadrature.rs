//! Gauss–Legendre rules on `[-1, 1]`.

use alloc::vec::Vec;

use crate::math::cos;

/// Nodes and weights of the `q`-point Gauss–Legendre rule on `[-1, 1]`,
/// ordered by increasing node. Exact for polynomials of degree `2q - 1`.
pub fn gauss_legendre(q: usize) -> Vec<(f64, f64)> {
    assert!(q >= 1, "quadrature order must be positive");
    let mut rule = Vec::with_capacity(q);
    let n = q as f64;
    for k in 0..q {
        // Chebyshev-like initial guess, then Newton on P_q.
        let mut x = cos(core::f64::consts::PI * (k as f64 + 0.75) / (n + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.reverse();
    rule
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `q`-point rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(q: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gauss_legendre(q).into_iter().map(|(x, w)| (mid + half * x, half * w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_matches_closed_form() {
        let r = gauss_legendre(2);
        assert!((r[0].0 + (1.0 / libm::sqrt(3.0))).abs() < 1e-15);
        assert!((r[1].0 - (1.0 / libm::sqrt(3.0))).abs() < 1e-15);
        assert!((r[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_degree_2q_minus_1() {
        for q in 1..8 {
            let rule = gauss_legendre_on(q, 0.0, 2.0);
            let deg = 2 * q - 1;
            let approx: f64 = rule.iter().map(|&(x, w)| w * libm::pow(x, deg as f64)).sum();
            let exact = libm::pow(2.0, (deg + 1) as f64) / (deg + 1) as f64;
            assert!((approx - exact).abs() < 1e-12 * exact, "q={q}");
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for q in 1..10 {
            let s: f64 = gauss_legendre(q).iter().map(|p| p.1).sum();
            assert!((s - 2.0).abs() < 1e-14);
        }
    }
}
