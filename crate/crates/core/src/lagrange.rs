//! Lagrange interpolation weights.
//!
//! The uniform stencils used throughout have `2d + 2` nodes at integer
//! offsets `-d..=d+1` and are evaluated at a local coordinate `s ∈ [0, 1)`
//! measured from node `0`.

/// Largest supported half-degree.
pub const MAX_HALF_DEGREE: usize = 4;
/// Largest stencil width, `2 * MAX_HALF_DEGREE + 2`.
pub const MAX_STENCIL: usize = 2 * MAX_HALF_DEGREE + 2;

/// Weights `w[k + d]` of the degree-`2d+1` interpolant at `s`.
#[inline]
pub fn uniform_weights(d: usize, s: f64, w: &mut [f64]) {
    let n = 2 * d + 2;
    debug_assert!(w.len() >= n);
    let off = d as f64;
    for (a, wa) in w.iter_mut().enumerate().take(n) {
        let xa = a as f64 - off;
        let mut num = 1.0;
        let mut den = 1.0;
        for b in 0..n {
            if b != a {
                let xb = b as f64 - off;
                num *= s - xb;
                den *= xa - xb;
            }
        }
        *wa = num / den;
    }
}

/// Weights of the derivative `d/ds` of the same interpolant.
pub fn uniform_derivative_weights(d: usize, s: f64, w: &mut [f64]) {
    let n = 2 * d + 2;
    let off = d as f64;
    for (a, wa) in w.iter_mut().enumerate().take(n) {
        let xa = a as f64 - off;
        let mut den = 1.0;
        for b in 0..n {
            if b != a {
                den *= xa - (b as f64 - off);
            }
        }
        let mut sum = 0.0;
        for c in 0..n {
            if c == a {
                continue;
            }
            let mut prod = 1.0;
            for b in 0..n {
                if b != a && b != c {
                    prod *= s - (b as f64 - off);
                }
            }
            sum += prod;
        }
        *wa = sum / den;
    }
}

/// Interpolates `(xs, ys)` at `x` with the full polynomial through all nodes.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let mut acc = 0.0;
    for a in 0..xs.len() {
        if x == xs[a] {
            return ys[a];
        }
        let mut l = 1.0;
        for b in 0..xs.len() {
            if b != a {
                l *= (x - xs[b]) / (xs[a] - xs[b]);
            }
        }
        acc += l * ys[a];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_nodes() {
        for d in 0..=MAX_HALF_DEGREE {
            let mut w = [0.0; MAX_STENCIL];
            for &s in &[0.0, 0.13, 0.5, 0.999] {
                uniform_weights(d, s, &mut w);
                let sum: f64 = w[..2 * d + 2].iter().sum();
                assert!((sum - 1.0).abs() < 1e-13);
            }
            uniform_weights(d, 0.0, &mut w);
            assert!((w[d] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reproduces_polynomials() {
        let d = 2;
        let mut w = [0.0; MAX_STENCIL];
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x * x * x;
        for &s in &[0.1, 0.37, 0.8] {
            uniform_weights(d, s, &mut w);
            let v: f64 = (0..6).map(|a| w[a] * p(a as f64 - 2.0)).sum();
            assert!((v - p(s)).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_weights_match_finite_difference() {
        let d = 2;
        let mut w = [0.0; MAX_STENCIL];
        let mut wp = [0.0; MAX_STENCIL];
        let mut wm = [0.0; MAX_STENCIL];
        let vals = [0.3, -1.0, 2.0, 0.7, 0.1, 5.0];
        let h = 1e-6;
        let s = 0.41;
        uniform_derivative_weights(d, s, &mut w);
        uniform_weights(d, s + h, &mut wp);
        uniform_weights(d, s - h, &mut wm);
        let exact: f64 = (0..6).map(|a| w[a] * vals[a]).sum();
        let fd: f64 = (0..6).map(|a| (wp[a] - wm[a]) * vals[a]).sum::<f64>() / (2.0 * h);
        assert!((exact - fd).abs() < 1e-7);
    }

    #[test]
    fn nonuniform_cubic() {
        let xs = [0.0, 0.3, 1.1, 2.0];
        let ys: [f64; 4] = xs.map(|x| x * x * x - x);
        assert!((interpolate(&xs, &ys, 0.7) - (0.343 - 0.7)).abs() < 1e-14);
        assert_eq!(interpolate(&xs, &ys, 1.1), ys[2]);
    }
}
