//! Quadrature rules and smooth cutoff profiles.

use crate::series::Series;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of `order` points.
pub fn composite_gl(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// `∫_a^b f` for complex-valued `f` by composite Gauss–Legendre.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> Complex64 {
    let (x, w) = composite_gl(a, b, panels, order);
    x.iter().zip(&w).map(|(&xi, &wi)| f(xi) * wi).sum()
}

/// Adaptive Gauss–Legendre: bisect until two successive panel estimates agree.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, whole: Complex64, tol: f64, depth: usize) -> Complex64 {
        let m = 0.5 * (a + b);
        let left = integrate(f, a, m, 1, 20);
        let right = integrate(f, m, b, 1, 20);
        let split = left + right;
        if (split - whole).norm() <= tol.max(1e-15 * split.norm()) || depth > 40 {
            return split;
        }
        rec(f, a, m, left, 0.5 * tol, depth + 1) + rec(f, m, b, right, 0.5 * tol, depth + 1)
    }
    let whole = integrate(f, a, b, 1, 20);
    rec(f, a, b, whole, tol, 0)
}

/// C-infinity step: 0 for `s <= 0`, 1 for `s >= 1`.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Derivatives `σ^{(p)}(s)`, `p = 0..=order`, of [`smooth_step`].
pub fn smooth_step_derivatives(s: f64, order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    if s >= 1.0 {
        out[0] = 1.0;
        return out;
    }
    if s <= 0.0 {
        return out;
    }
    // σ = 1 / (1 + e^{g}), g = 1/s - 1/(1-s)
    let x = Series::var(order);
    let one = Series::constant(1.0, order);
    let up = Series::constant(s, order);
    let g = &(&x + &up).recip() - &(&one - &(&x + &up)).recip();
    if g.c[0] > 700.0 {
        return out;
    }
    if g.c[0] < -700.0 {
        out[0] = 1.0;
        return out;
    }
    let sigma = if g.c[0] > 0.0 {
        // 1 - 1/(1 + e^{-g}) keeps the exponential bounded
        &one - &(&one + &g.scale(-1.0).exp()).recip()
    } else {
        (&one + &g.exp()).recip()
    };
    sigma.derivatives()
}

/// Even cutoff profile: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`, smooth.
pub fn plateau_bump(x: f64) -> f64 {
    smooth_step(2.0 * (1.0 - x.abs()))
}

/// Compactly supported bump `exp(1 - 1/(1 - x^2))` on `|x| < 1`, with value 1 at 0.
pub fn exp_bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - x * x)).exp()
    }
}

/// Kress weights `R_j` for `∫_0^{2π} log(4 sin²((t-s)/2)) f(s) ds` on `2n`
/// equispaced nodes, as a function of the node offset `j`.
pub fn kress_log_weights(two_n: usize) -> Vec<f64> {
    assert!(two_n % 2 == 0 && two_n >= 4);
    let n = two_n / 2;
    (0..two_n)
        .map(|j| {
            let t = PI * j as f64 / n as f64;
            let mut s = 0.0;
            for m in 1..n {
                s += (m as f64 * t).cos() / m as f64;
            }
            -2.0 * PI / n as f64 * s - PI / (n * n) as f64 * (n as f64 * t).cos()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_jets_match_differences() {
        for &s in &[0.05, 0.3, 0.5, 0.81, 0.97] {
            let d = smooth_step_derivatives(s, 3);
            assert!((d[0] - smooth_step(s)).abs() < 1e-15);
            let h = 1e-4;
            let fd1 = (smooth_step(s + h) - smooth_step(s - h)) / (2.0 * h);
            let fd2 = (smooth_step(s + h) - 2.0 * smooth_step(s) + smooth_step(s - h)) / (h * h);
            assert!((d[1] - fd1).abs() < 1e-6 * d[1].abs().max(1.0), "{s}: {} {fd1}", d[1]);
            assert!((d[2] - fd2).abs() < 1e-4 * d[2].abs().max(1.0), "{s}: {} {fd2}", d[2]);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(a, b)| a.powi(deg as i32) * b).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn plateau_bump_shape() {
        assert_eq!(plateau_bump(0.3), 1.0);
        assert_eq!(plateau_bump(-0.5), 1.0);
        assert_eq!(plateau_bump(1.0), 0.0);
        assert!((plateau_bump(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = plateau_bump(0.5 + 0.005 * i as f64);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn kress_integrates_log_kernel() {
        // ∫ log(4 sin²(s/2)) cos(m s) ds = -2π/m for m >= 1, 0 for m = 0
        let r = kress_log_weights(32);
        for m in 0..10 {
            let got: f64 = (0..32)
                .map(|j| r[j] * (m as f64 * PI * j as f64 / 16.0).cos())
                .sum();
            let exact = if m == 0 { 0.0 } else { -2.0 * PI / m as f64 };
            assert!((got - exact).abs() < 1e-12, "m={m}: {got} vs {exact}");
        }
    }

    #[test]
    fn adaptive_matches_closed_form() {
        let f = |x: f64| Complex64::new(0.0, 30.0 * x).exp();
        let got = integrate_adaptive(&f, 0.0, 2.0, 1e-12);
        let exact = (Complex64::new(0.0, 60.0).exp() - 1.0) / Complex64::new(0.0, 30.0);
        assert!((got - exact).norm() < 1e-11);
    }
}
