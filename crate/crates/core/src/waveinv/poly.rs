//! Truncated multivariate polynomials with complex coefficients.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::Arc;

type C64 = Complex64;

pub const MAX_VARS: usize = 8;

/// Monomial table for `nvars` variables up to total degree `max_deg`,
/// shared between polynomials of the same shape.
#[derive(Debug)]
pub struct Basis {
    pub nvars: usize,
    pub max_deg: usize,
    pub exps: Vec<[u8; MAX_VARS]>,
    pub degree: Vec<usize>,
    index: HashMap<u64, usize>,
    /// `by_degree[d]` = range of monomial indices of degree `d`.
    pub by_degree: Vec<std::ops::Range<usize>>,
}

fn key(e: &[u8; MAX_VARS]) -> u64 {
    e.iter().fold(0u64, |acc, &x| (acc << 8) | x as u64)
}

impl Basis {
    pub fn new(nvars: usize, max_deg: usize) -> Arc<Basis> {
        assert!(nvars <= MAX_VARS && max_deg < 256);
        let mut exps = Vec::new();
        let mut by_degree = Vec::new();
        for d in 0..=max_deg {
            let start = exps.len();
            let mut cur = [0u8; MAX_VARS];
            fill(nvars, 0, d, &mut cur, &mut exps);
            by_degree.push(start..exps.len());
        }
        let degree = exps.iter().map(|e| e.iter().map(|&x| x as usize).sum()).collect();
        let index = exps.iter().enumerate().map(|(i, e)| (key(e), i)).collect();
        Arc::new(Basis { nvars, max_deg, exps, degree, index, by_degree })
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn find(&self, e: &[u8; MAX_VARS]) -> Option<usize> {
        self.index.get(&key(e)).copied()
    }
}

fn fill(nvars: usize, var: usize, remaining: usize, cur: &mut [u8; MAX_VARS], out: &mut Vec<[u8; MAX_VARS]>) {
    if var + 1 == nvars || nvars == 0 {
        if nvars > 0 {
            cur[var] = remaining as u8;
        }
        if nvars > 0 || remaining == 0 {
            out.push(*cur);
        }
        if nvars > 0 {
            cur[var] = 0;
        }
        return;
    }
    for a in (0..=remaining).rev() {
        cur[var] = a as u8;
        fill(nvars, var + 1, remaining - a, cur, out);
    }
    cur[var] = 0;
}

#[derive(Debug, Clone)]
pub struct MPoly {
    pub basis: Arc<Basis>,
    pub c: Vec<C64>,
}

impl MPoly {
    pub fn zero(basis: &Arc<Basis>) -> Self {
        MPoly { basis: basis.clone(), c: vec![C64::new(0.0, 0.0); basis.len()] }
    }

    pub fn constant(basis: &Arc<Basis>, v: C64) -> Self {
        let mut p = Self::zero(basis);
        p.c[0] = v;
        p
    }

    pub fn var(basis: &Arc<Basis>, i: usize) -> Self {
        let mut p = Self::zero(basis);
        if basis.max_deg >= 1 {
            let mut e = [0u8; MAX_VARS];
            e[i] = 1;
            p.c[basis.find(&e).unwrap()] = C64::new(1.0, 0.0);
        }
        p
    }

    /// Embed a univariate series `Σ a_n x_i^n`.
    pub fn univariate(basis: &Arc<Basis>, i: usize, coeffs: &[C64]) -> Self {
        let mut p = Self::zero(basis);
        for (n, a) in coeffs.iter().enumerate().take(basis.max_deg + 1) {
            let mut e = [0u8; MAX_VARS];
            e[i] = n as u8;
            p.c[basis.find(&e).unwrap()] = *a;
        }
        p
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn coeff(&self, e: &[u8; MAX_VARS]) -> C64 {
        self.basis.find(e).map(|i| self.c[i]).unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        MPoly { basis: self.basis.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        MPoly { basis: self.basis.clone(), c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: C64) -> MPoly {
        MPoly { basis: self.basis.clone(), c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        let b = &self.basis;
        let mut out = vec![C64::new(0.0, 0.0); b.len()];
        for (i, a) in self.c.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let di = b.degree[i];
            let ei = &b.exps[i];
            for j in 0..b.by_degree[b.max_deg - di].end {
                let v = o.c[j];
                if v.re == 0.0 && v.im == 0.0 {
                    continue;
                }
                let mut e = *ei;
                for (x, y) in e.iter_mut().zip(&b.exps[j]) {
                    *x += *y;
                }
                out[b.find(&e).unwrap()] += a * v;
            }
        }
        MPoly { basis: b.clone(), c: out }
    }

    /// Keep only terms of total degree `<= d`.
    pub fn truncate(&self, d: usize) -> MPoly {
        let mut p = self.clone();
        for (i, v) in p.c.iter_mut().enumerate() {
            if self.basis.degree[i] > d {
                *v = C64::new(0.0, 0.0);
            }
        }
        p
    }

    /// Drop the terms of total degree `< d`.
    pub fn from_degree(&self, d: usize) -> MPoly {
        let mut p = self.clone();
        for (i, v) in p.c.iter_mut().enumerate() {
            if self.basis.degree[i] < d {
                *v = C64::new(0.0, 0.0);
            }
        }
        p
    }

    /// `Σ_n derivs[n] / n! (p - p(0))^n`: a function with the given
    /// derivatives at `p(0)`, composed with `p`.
    pub fn compose_derivatives(&self, derivs: &[C64]) -> MPoly {
        let mut q = self.clone();
        q.c[0] = C64::new(0.0, 0.0);
        let mut out = MPoly::constant(&self.basis, derivs[0]);
        let mut pw = MPoly::constant(&self.basis, C64::new(1.0, 0.0));
        let mut fact = 1.0;
        for (n, d) in derivs.iter().enumerate().skip(1).take(self.basis.max_deg) {
            pw = pw.mul(&q);
            fact *= n as f64;
            out = out.add(&pw.scale(d / fact));
        }
        out
    }

    /// `p^a` for real `a`, `p(0)` on the principal branch.
    pub fn powf(&self, a: f64) -> MPoly {
        let x0 = self.value();
        let n = self.basis.max_deg;
        let mut d = Vec::with_capacity(n + 1);
        let mut coef = C64::new(1.0, 0.0);
        for k in 0..=n {
            d.push(coef * x0.powf(a - k as f64));
            coef *= a - k as f64;
        }
        self.compose_derivatives(&d)
    }

    pub fn sqrt(&self) -> MPoly {
        self.powf(0.5)
    }

    pub fn recip(&self) -> MPoly {
        self.powf(-1.0)
    }

    pub fn exp(&self) -> MPoly {
        let e = self.value().exp();
        self.compose_derivatives(&vec![e; self.basis.max_deg + 1])
    }

    pub fn derivative(&self, var: usize) -> MPoly {
        let b = &self.basis;
        let mut out = vec![C64::new(0.0, 0.0); b.len()];
        for (i, v) in self.c.iter().enumerate() {
            let e = b.exps[i];
            if e[var] == 0 || (v.re == 0.0 && v.im == 0.0) {
                continue;
            }
            let mut f = e;
            f[var] -= 1;
            out[b.find(&f).unwrap()] += v * e[var] as f64;
        }
        MPoly { basis: b.clone(), c: out }
    }

    /// `Σ_{ab} m_{ab} ∂_a ∂_b p`.
    pub fn second_order(&self, m: &[Vec<f64>]) -> MPoly {
        let n = self.basis.nvars;
        let mut out = MPoly::zero(&self.basis);
        for a in 0..n {
            let da = self.derivative(a);
            for (b, row) in m[a].iter().enumerate().take(n) {
                if *row != 0.0 {
                    out = out.add(&da.derivative(b).scale(C64::new(*row, 0.0)));
                }
            }
        }
        out
    }

    /// Hessian at the origin from the degree-2 coefficients.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.basis.nvars;
        let mut h = vec![vec![0.0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let mut e = [0u8; MAX_VARS];
                e[a] += 1;
                e[b] += 1;
                let v = self.coeff(&e).re;
                h[a][b] = if a == b { 2.0 * v } else { v };
            }
        }
        h
    }

    pub fn gradient(&self) -> Vec<C64> {
        (0..self.basis.nvars)
            .map(|a| {
                let mut e = [0u8; MAX_VARS];
                e[a] = 1;
                self.coeff(&e)
            })
            .collect()
    }

    /// Evaluate at a point.
    pub fn eval(&self, x: &[f64]) -> C64 {
        self.basis
            .exps
            .iter()
            .zip(&self.c)
            .map(|(e, v)| {
                let mut m = 1.0;
                for (xi, &p) in x.iter().zip(e.iter()) {
                    m *= xi.powi(p as i32);
                }
                v * m
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn basis_counts() {
        assert_eq!(Basis::new(1, 5).len(), 6);
        assert_eq!(Basis::new(3, 4).len(), 35);
        assert_eq!(Basis::new(4, 12).len(), 1820);
    }

    #[test]
    fn product_and_powers_agree_with_evaluation() {
        let b = Basis::new(2, 10);
        let x = MPoly::var(&b, 0);
        let y = MPoly::var(&b, 1);
        let p = MPoly::constant(&b, c(2.0)).add(&x.scale(c(0.3))).add(&x.mul(&y).scale(c(-0.2)));
        let pt = [0.05, -0.04];
        let v = p.eval(&pt);
        assert!((p.mul(&p).eval(&pt) - v * v).norm() < 1e-14);
        assert!((p.sqrt().eval(&pt) - v.sqrt()).norm() < 1e-12);
        assert!((p.recip().eval(&pt) - 1.0 / v).norm() < 1e-12);
        assert!((p.powf(-0.5).eval(&pt) - v.powf(-0.5)).norm() < 1e-12);
        assert!((p.exp().eval(&pt) - v.exp()).norm() < 1e-11);
    }

    #[test]
    fn hessian_and_derivatives() {
        let b = Basis::new(2, 4);
        let x = MPoly::var(&b, 0);
        let y = MPoly::var(&b, 1);
        let p = x.mul(&x).scale(c(1.5)).add(&x.mul(&y).scale(c(0.5)));
        let h = p.hessian();
        assert_eq!(h, vec![vec![3.0, 0.5], vec![0.5, 0.0]]);
        let lap = p.second_order(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((lap.value() - 3.0).norm() < 1e-15);
    }
}
