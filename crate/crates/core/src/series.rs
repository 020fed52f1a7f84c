//! Truncated univariate power series with real coefficients.
//!
//! Used to carry exact Taylor jets of the boundary through changes of frame
//! and reparametrization.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// `c[n]` is the coefficient of `s^n`.
    pub c: Vec<f64>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series { c: vec![0.0; order + 1] }
    }

    pub fn constant(v: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.c[0] = v;
        s
    }

    /// The identity series `s`.
    pub fn var(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn from_coeffs(c: Vec<f64>) -> Self {
        Series { c }
    }

    /// Series from derivatives `d[n] = f^{(n)}(0)`.
    pub fn from_derivatives(d: &[f64]) -> Self {
        let mut fact = 1.0;
        let c = d
            .iter()
            .enumerate()
            .map(|(n, v)| {
                if n > 0 {
                    fact *= n as f64;
                }
                v / fact
            })
            .collect();
        Series { c }
    }

    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(n, v)| {
                if n > 0 {
                    fact *= n as f64;
                }
                v * fact
            })
            .collect()
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn scale(&self, a: f64) -> Self {
        Series { c: self.c.iter().map(|v| v * a).collect() }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, v| acc * s + v)
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for k in 1..=n {
            c[k - 1] = self.c[k] * k as f64;
        }
        Series { c }
    }

    pub fn recip(&self) -> Self {
        let n = self.order();
        assert!(self.c[0] != 0.0, "reciprocal of series with zero constant term");
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / self.c[0];
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += self.c[j] * r[k - j];
            }
            r[k] = -s / self.c[0];
        }
        Series { c: r }
    }

    pub fn sqrt(&self) -> Self {
        let n = self.order();
        assert!(self.c[0] > 0.0, "sqrt of series needs positive constant term");
        let mut r = vec![0.0; n + 1];
        r[0] = self.c[0].sqrt();
        for k in 1..=n {
            let mut s = self.c[k];
            for j in 1..k {
                s -= r[j] * r[k - j];
            }
            r[k] = s / (2.0 * r[0]);
        }
        Series { c: r }
    }

    /// `self(g(s))` for `g(0) = 0`.
    pub fn compose(&self, g: &Series) -> Self {
        assert!(g.c[0] == 0.0, "inner series must vanish at 0");
        let n = self.order().min(g.order());
        let g = g.truncate(n);
        let mut out = Series::zero(n);
        for &coef in self.c[..=n].iter().rev() {
            out = &out * &g;
            out.c[0] += coef;
        }
        out
    }

    /// Compositional inverse of `g` with `g(0) = 0`, `g'(0) != 0`.
    pub fn reversion(&self) -> Self {
        assert!(self.c[0] == 0.0 && self.c[1] != 0.0, "series not invertible at 0");
        let n = self.order();
        // Newton iteration on h: g(h(x)) = x, one order per pass suffices here.
        let mut h = Series::var(n).scale(1.0 / self.c[1]);
        for _ in 0..n {
            let gh = self.compose(&h);
            let mut resid = gh;
            resid.c[1] -= 1.0;
            if resid.c.iter().all(|v| v.abs() < 1e-300) {
                break;
            }
            let dg = self.derivative().compose(&h);
            h = &h - &(&resid * &dg.recip());
        }
        h
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = vec![0.0; n + 1];
        e[0] = self.c[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Series { c: e }
    }

    /// `atan(self)` for a series vanishing at 0.
    pub fn atan(&self) -> Self {
        let n = self.order();
        let mut at = Series::zero(n);
        for k in (1..=n).step_by(2) {
            at.c[k] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } / k as f64;
        }
        at.compose(self)
    }

    /// Re-expand a polynomial about `x0`: coefficients of `p(x0 + s)`.
    pub fn shifted(&self, x0: f64) -> Self {
        let n = self.order();
        let mut c = self.c.clone();
        for i in 0..n {
            for j in (i..n).rev() {
                c[j] += x0 * c[j + 1];
            }
        }
        Series { c }
    }

    /// `cos(a + s)` and `sin(a + s)` as series in `s`.
    pub fn cos_sin(a: f64, order: usize) -> (Self, Self) {
        let mut cs = Series::zero(order);
        let mut sn = Series::zero(order);
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            let ph = a + k as f64 * std::f64::consts::FRAC_PI_2;
            cs.c[k] = ph.cos() / fact;
            sn.c[k] = ph.sin() / fact;
        }
        (cs, sn)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.c.clone();
        c.resize(order + 1, 0.0);
        Series { c }
    }
}

impl<'a> Add for &'a Series {
    type Output = Series;
    fn add(self, b: &Series) -> Series {
        let n = self.order().min(b.order());
        Series { c: (0..=n).map(|i| self.c[i] + b.c[i]).collect() }
    }
}

impl<'a> Sub for &'a Series {
    type Output = Series;
    fn sub(self, b: &Series) -> Series {
        let n = self.order().min(b.order());
        Series { c: (0..=n).map(|i| self.c[i] - b.c[i]).collect() }
    }
}

impl<'a> Neg for &'a Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl<'a> Mul for &'a Series {
    type Output = Series;
    fn mul(self, b: &Series) -> Series {
        let n = self.order().min(b.order());
        let mut c = vec![0.0; n + 1];
        for i in 0..=n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=(n - i) {
                c[i + j] += self.c[i] * b.c[j];
            }
        }
        Series { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversion_of_sin_is_arcsin() {
        let n = 9;
        // sin s
        let mut sin = Series::zero(n);
        let mut f = 1.0;
        for k in 1..=n {
            f *= k as f64;
            if k % 2 == 1 {
                sin.c[k] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } / f;
            }
        }
        let asin = sin.reversion();
        // arcsin x = x + x^3/6 + 3x^5/40 + 5x^7/112 + 35x^9/1152
        let expect = [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, 5.0 / 112.0, 0.0, 35.0 / 1152.0];
        for k in 0..=n {
            assert!((asin.c[k] - expect[k]).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn shift_exp_atan() {
        let p = Series::from_coeffs(vec![1.0, 2.0, 3.0]);
        let q = p.shifted(0.5);
        for &x in &[-0.3, 0.2, 0.9] {
            assert!((q.eval(x) - p.eval(x + 0.5)).abs() < 1e-14);
        }
        let e = Series::var(6).exp();
        assert!((e.c[6] - 1.0 / 720.0).abs() < 1e-16);
        let t = Series::var(7).atan();
        assert!((t.c[7] + 1.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn sqrt_and_recip() {
        let s = Series::from_coeffs(vec![4.0, 1.0, 0.5, 0.0, 0.0]);
        let r = s.sqrt();
        let back = &r * &r;
        for k in 0..5 {
            assert!((back.c[k] - s.c[k]).abs() < 1e-14);
        }
        let one = &s * &s.recip();
        assert!((one.c[0] - 1.0).abs() < 1e-15);
        assert!(one.c[1..].iter().all(|v| v.abs() < 1e-15));
    }
}
