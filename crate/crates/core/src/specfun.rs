//! Bessel and Hankel functions of complex argument, Bessel zeros, and the
//! free-space Helmholtz Green's function.
//!
//! Orders 0 and 1 are evaluated by power series (double-double accumulation)
//! for `|z| <= SWITCH_RADIUS` and by the Hankel asymptotic expansion beyond.
//! Integer orders come from recurrences: forward for H and Y, Miller's
//! backward recurrence for J.

use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::{Arc, RwLock};

type C64 = Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Radius at which evaluation switches from the series to the asymptotic
/// expansion. The smallest asymptotic term at this radius is ~e^{-34}.
pub const SWITCH_RADIUS: f64 = 17.0;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// How the imaginary part of the spectral parameter scales with `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Constant,
    Logarithmic,
}

/// Complex wavenumber `k + i tau` or `k + i tau log k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    pub k: f64,
    pub tau: f64,
    pub scaling: Scaling,
}

impl SpectralParameter {
    pub const K_MIN_LOG: f64 = 2.0;

    pub fn new(k: f64, tau: f64, scaling: Scaling) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::DomainError(format!("k must be positive, got {k}")));
        }
        if !(tau >= 0.0) {
            return Err(Error::DomainError(format!("tau must be non-negative, got {tau}")));
        }
        if scaling == Scaling::Logarithmic && k < Self::K_MIN_LOG {
            return Err(Error::DomainError(format!(
                "logarithmic scaling needs k >= {}, got {k}",
                Self::K_MIN_LOG
            )));
        }
        Ok(Self { k, tau, scaling })
    }

    pub fn constant(k: f64, tau: f64) -> Result<Self> {
        Self::new(k, tau, Scaling::Constant)
    }

    pub fn logarithmic(k: f64, tau: f64) -> Result<Self> {
        Self::new(k, tau, Scaling::Logarithmic)
    }

    /// Effective imaginary part: `tau` or `tau log k`.
    pub fn damping(&self) -> f64 {
        match self.scaling {
            Scaling::Constant => self.tau,
            Scaling::Logarithmic => self.tau * self.k.ln(),
        }
    }

    pub fn kappa(&self) -> C64 {
        C64::new(self.k, self.damping())
    }

    /// Same scaling law at a different real part.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(k, self.tau, self.scaling)
    }
}

fn check_arg(z: C64) -> Result<()> {
    if z.norm() == 0.0 {
        return Err(Error::DomainError("argument z = 0".into()));
    }
    if z.im < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::DomainError(format!("need Im z >= 0, got {z}")));
    }
    Ok(())
}

/// Coefficient `a_m(nu)` of the Hankel asymptotic expansion
/// `H_nu(z) ~ (2/(pi z))^{1/2} e^{i(z - nu pi/2 - pi/4)} sum_m i^m a_m(nu) z^{-m}`.
pub fn hankel_asymptotic_coefficient(nu: u32, m: usize) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut a = 1.0;
    for j in 1..=m {
        let odd = (2 * j - 1) as f64;
        a *= (mu - odd * odd) / (8.0 * j as f64);
    }
    a
}

/// `sum_m (±i)^m a_m(nu) z^{-m}` truncated where the terms stop decreasing.
fn asymptotic_sum(nu: u32, z: C64, sign: f64) -> C64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let step = C64::new(0.0, sign) / z;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for m in 1..200 {
        let odd = (2 * m - 1) as f64;
        term *= step * ((mu - odd * odd) / (8.0 * m as f64));
        let t = term.norm();
        if t > last {
            break;
        }
        sum += term;
        if t < 1e-17 * sum.norm() {
            break;
        }
        last = t;
    }
    sum
}

/// `H_nu(z) e^{-iz}` by the asymptotic expansion (large |z| only).
fn hankel1_scaled_asymptotic(nu: u32, z: C64) -> C64 {
    let pre = (2.0 / (PI * z)).sqrt();
    let phase = C64::from_polar(1.0, -(nu as f64) * FRAC_PI_2 - FRAC_PI_4);
    pre * phase * asymptotic_sum(nu, z, 1.0)
}

fn hankel2_scaled_asymptotic(nu: u32, z: C64) -> C64 {
    let pre = (2.0 / (PI * z)).sqrt();
    let phase = C64::from_polar(1.0, (nu as f64) * FRAC_PI_2 + FRAC_PI_4);
    pre * phase * asymptotic_sum(nu, z, -1.0)
}

/// `[J0, J1, Y0, Y1]` by power series with double-double accumulation.
fn series_jy01(z: C64) -> [C64; 4] {
    let half = Cdd::from_c64(z).div_f64(2.0);
    let w = half * half;
    let neg_w = Cdd { re: -w.re, im: -w.im };

    let mut t = Cdd::real(1.0); // (-w)^k / (k!)^2
    let mut u = Cdd::real(1.0); // (-w)^k / (k! (k+1)!)
    let mut j0 = t;
    let mut j1 = u;
    let mut h = Dd::ZERO; // H_k
    let mut y0_sum = Cdd::ZERO; // sum H_k t_k
    let mut y1_sum = u; // sum u_k (H_k + H_{k+1}); k = 0 term is u_0 * 1
    let scale = z.norm().max(1.0);
    for k in 1..400 {
        let kf = k as f64;
        t = (t * neg_w).div_f64(kf * kf);
        u = (u * neg_w).div_f64(kf * (kf + 1.0));
        h = h + Dd::new(1.0).div_f64(kf);
        let h_next = h + Dd::new(1.0).div_f64(kf + 1.0);
        j0 = j0 + t;
        j1 = j1 + u;
        y0_sum = y0_sum + Cdd { re: t.re * h, im: t.im * h };
        let hh = h + h_next;
        y1_sum = y1_sum + Cdd { re: u.re * hh, im: u.im * hh };
        let tn = t.to_c64().norm() + u.to_c64().norm();
        if tn < 1e-34 * scale && k > 2 {
            break;
        }
    }
    let j1 = j1 * half;
    let lg = (z / 2.0).ln() + EULER_GAMMA;
    let lg = Cdd::from_c64(lg);
    let two_over_pi = 2.0 / PI;
    let y0 = (lg * j0 - y0_sum).scale(two_over_pi);
    let y1 = (lg * j1).scale(two_over_pi) - (half * y1_sum).scale(1.0 / PI);
    let y1 = y1.to_c64() - two_over_pi / z;
    [j0.to_c64(), j1.to_c64(), y0.to_c64(), y1]
}

/// The series loses about `2 Im z / ln 10` digits to cancellation in
/// `J + iY`, so strongly damped arguments go to the asymptotic branch early.
#[inline]
fn use_series(z: C64) -> bool {
    let r = z.norm();
    r <= 12.0 || (r <= SWITCH_RADIUS && z.im <= 6.0)
}

/// `[J0, J1, Y0, Y1]` of complex argument.
pub fn bessel_jy01(z: C64) -> [C64; 4] {
    if use_series(z) {
        series_jy01(z)
    } else {
        let e = (I * z).exp();
        let ei = (-I * z).exp();
        let h10 = hankel1_scaled_asymptotic(0, z) * e;
        let h11 = hankel1_scaled_asymptotic(1, z) * e;
        let h20 = hankel2_scaled_asymptotic(0, z) * ei;
        let h21 = hankel2_scaled_asymptotic(1, z) * ei;
        [
            (h10 + h20) * 0.5,
            (h11 + h21) * 0.5,
            (h10 - h20) / (2.0 * I),
            (h11 - h21) / (2.0 * I),
        ]
    }
}

/// `(H_0^{(1)}(z), H_1^{(1)}(z))` without argument checks; hot-path helper.
#[inline]
pub fn hankel01(z: C64) -> (C64, C64) {
    if use_series(z) {
        let [j0, j1, y0, y1] = series_jy01(z);
        (j0 + I * y0, j1 + I * y1)
    } else {
        let e = (I * z).exp();
        (hankel1_scaled_asymptotic(0, z) * e, hankel1_scaled_asymptotic(1, z) * e)
    }
}

/// Hankel function of the first kind, order 0 or 1, principal branch.
pub fn hankel1(order: u32, z: C64) -> Result<C64> {
    if order > 1 {
        return Err(Error::RangeError(format!("hankel1 order {order} not in {{0,1}}")));
    }
    check_arg(z)?;
    let (h0, h1) = hankel01(z);
    Ok(if order == 0 { h0 } else { h1 })
}

/// WKB amplitude `a_nu(z) = H_nu^{(1)}(z) e^{-iz}`; behaves like `z^{-1/2}`.
pub fn wkb_amplitude(order: u32, z: C64) -> Result<C64> {
    if order > 1 {
        return Err(Error::RangeError(format!("wkb order {order} not in {{0,1}}")));
    }
    check_arg(z)?;
    if z.norm() < 0.1 {
        return Err(Error::DomainError(format!("|z| = {} below semiclassical regime", z.norm())));
    }
    if !use_series(z) {
        Ok(hankel1_scaled_asymptotic(order, z))
    } else {
        let (h0, h1) = hankel01(z);
        let h = if order == 0 { h0 } else { h1 };
        Ok(h * (-I * z).exp())
    }
}

/// Coefficients `c_j` with `a_nu(z) ~ sum_j c_j z^{-j-1/2}`.
pub fn wkb_coefficients(order: u32, count: usize) -> Vec<C64> {
    let pre = (2.0 / PI).sqrt() * C64::from_polar(1.0, -(order as f64) * FRAC_PI_2 - FRAC_PI_4);
    (0..count)
        .map(|m| pre * I.powu(m as u32) * hankel_asymptotic_coefficient(order, m))
        .collect()
}

/// `H_n^{(1)}(z)` for `n = 0..=nmax` by forward recurrence.
pub fn hankel1_seq(nmax: usize, z: C64) -> Result<Vec<C64>> {
    check_arg(z)?;
    let (h0, h1) = hankel01(z);
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(h0);
    let zinv = z.inv();
    if nmax >= 1 {
        out.push(h1);
    }
    for n in 1..nmax {
        let next = out[n] * zinv * (2.0 * n as f64) - out[n - 1];
        out.push(next);
    }
    Ok(out)
}

fn miller_start(nmax: usize, az: f64) -> usize {
    let m = (nmax as f64).max(az);
    let start = m + 20.0 + 3.0 * m.sqrt() + 10.0 * (1.0 + m).log10();
    (start as usize + 1) | 1
}

/// `J_n(z)` for `n = 0..=nmax`, complex argument, Miller's algorithm
/// normalized against the directly computed `J_0` (or `J_1`).
pub fn bessel_j_seq_complex(nmax: usize, z: C64) -> Vec<C64> {
    if z.norm() == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); nmax + 1];
        v[0] = C64::new(1.0, 0.0);
        return v;
    }
    let start = miller_start(nmax, z.norm());
    let mut vals = vec![C64::new(0.0, 0.0); start + 2];
    vals[start + 1] = C64::new(0.0, 0.0);
    vals[start] = C64::new(1.0, 0.0);
    let zinv = z.inv();
    for k in (1..=start).rev() {
        vals[k - 1] = vals[k] * zinv * (2.0 * k as f64) - vals[k + 1];
        if vals[k - 1].norm() > 1e100 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    let [j0, j1, _, _] = bessel_jy01(z);
    // complex division squares the divisor; normalize it first
    let ratio = |a: C64, b: C64| {
        let s = b.norm();
        (a / s) / (b / s)
    };
    let scale = if j0.norm() >= j1.norm() { ratio(j0, vals[0]) } else { ratio(j1, vals[1]) };
    vals.truncate(nmax + 1);
    for v in vals.iter_mut() {
        *v *= scale;
    }
    vals
}

/// `J_n(x)` for `n = 0..=nmax`, real argument, normalized by
/// `J_0 + 2 sum J_{2k} = 1`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return v;
    }
    let ax = x.abs();
    let mut start = miller_start(nmax, ax);
    if start % 2 == 1 {
        start += 1;
    }
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        vals[k - 1] = vals[k] * (2.0 * k as f64) / ax - vals[k + 1];
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * vals[k - 1];
        }
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
            norm *= 1e-250;
        }
    }
    norm += vals[0];
    vals.truncate(nmax + 1);
    for (n, v) in vals.iter_mut().enumerate() {
        *v /= norm;
        if x < 0.0 && n % 2 == 1 {
            *v = -*v;
        }
    }
    vals
}

pub const N_MAX: usize = 600;

fn check_order(n: usize) -> Result<()> {
    if n > N_MAX {
        return Err(Error::RangeError(format!("order {n} exceeds n_max = {N_MAX}")));
    }
    Ok(())
}

pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    check_order(n)?;
    Ok(bessel_j_seq(n, x)[n])
}

pub fn bessel_j_prime(n: usize, x: f64) -> Result<f64> {
    check_order(n)?;
    let seq = bessel_j_seq(n + 1, x);
    Ok(j_prime_from_seq(&seq, n))
}

fn j_prime_from_seq(seq: &[f64], n: usize) -> f64 {
    if n == 0 {
        -seq[1]
    } else {
        0.5 * (seq[n - 1] - seq[n + 1])
    }
}

/// `Y_n(x)` for real `x > 0`, forward recurrence.
pub fn bessel_y(n: usize, x: f64) -> Result<f64> {
    check_order(n)?;
    if !(x > 0.0) {
        return Err(Error::DomainError(format!("Y_n needs x > 0, got {x}")));
    }
    let [_, _, y0, y1] = bessel_jy01(C64::new(x, 0.0));
    let (mut a, mut b) = (y0.re, y1.re);
    if n == 0 {
        return Ok(a);
    }
    for k in 1..n {
        let c = b * (2.0 * k as f64) / x - a;
        a = b;
        b = c;
    }
    Ok(b)
}

pub fn bessel_y_prime(n: usize, x: f64) -> Result<f64> {
    if n == 0 {
        return Ok(-bessel_y(1, x)?);
    }
    Ok(0.5 * (bessel_y(n - 1, x)? - bessel_y(n + 1, x)?))
}

/// Refine a bracketed zero of `J_n` by safeguarded Newton.
fn refine_zero(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let f = |x: f64| {
        let s = bessel_j_seq(n + 1, x);
        (s[n], j_prime_from_seq(&s, n))
    };
    let (flo, _) = f(lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (flo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() < 1e-15 * x.max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// `m`-th positive zero of `J_n`.
pub fn bessel_zero(n: usize, m: usize) -> Result<f64> {
    check_order(n)?;
    if m == 0 {
        return Err(Error::RangeError("zero index m must be >= 1".into()));
    }
    let h = 0.1;
    let mut x = if n == 0 { h } else { n as f64 };
    let mut prev = bessel_j(n, x)?;
    let mut found = 0;
    loop {
        let nx = x + h;
        let cur = bessel_j(n, nx)?;
        if cur == 0.0 || (cur > 0.0) != (prev > 0.0) {
            found += 1;
            if found == m {
                return Ok(refine_zero(n, x, nx));
            }
        }
        prev = cur;
        x = nx;
    }
}

/// A Dirichlet eigenvalue `j_{n,m}` of the unit disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselZero {
    pub n: usize,
    pub m: usize,
    pub value: f64,
}

impl BesselZero {
    /// Multiplicity as a disc eigenvalue (cos and sin modes for n >= 1).
    pub fn multiplicity(&self) -> usize {
        if self.n == 0 {
            1
        } else {
            2
        }
    }
}

static ZERO_TABLE: RwLock<Option<(f64, Arc<Vec<BesselZero>>)>> = RwLock::new(None);

fn compute_zero_table(lambda_max: f64) -> Result<Vec<BesselZero>> {
    let nmax = lambda_max.ceil() as usize + 1;
    check_order(nmax.saturating_sub(1).min(N_MAX))?;
    if nmax > N_MAX {
        return Err(Error::RangeError(format!("lambda_max {lambda_max} needs order > {N_MAX}")));
    }
    let h = 0.05;
    let steps = (lambda_max / h).ceil() as usize + 1;
    let mut prev = bessel_j_seq(nmax, h);
    let mut brackets: Vec<(usize, f64, f64)> = Vec::new();
    for i in 1..steps {
        let x0 = i as f64 * h;
        let x1 = x0 + h;
        let cur = bessel_j_seq(nmax, x1);
        for n in 0..=nmax {
            if (x1 as usize) < n {
                break;
            }
            if (cur[n] > 0.0) != (prev[n] > 0.0) {
                brackets.push((n, x0, x1));
            }
        }
        prev = cur;
    }
    let mut zeros: Vec<BesselZero> = brackets
        .into_iter()
        .map(|(n, a, b)| (n, refine_zero(n, a, b)))
        .filter(|&(_, z)| z <= lambda_max)
        .map(|(n, z)| BesselZero { n, m: 0, value: z })
        .collect();
    zeros.sort_by(|a, b| (a.n, a.value).partial_cmp(&(b.n, b.value)).unwrap());
    let mut last_n = usize::MAX;
    let mut m = 0;
    for z in zeros.iter_mut() {
        if z.n != last_n {
            last_n = z.n;
            m = 0;
        }
        m += 1;
        z.m = m;
    }
    zeros.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    Ok(zeros)
}

/// All zeros `j_{n,m} <= lambda_max`, sorted by value. Cached; concurrent
/// readers share the table.
pub fn bessel_zeros_below(lambda_max: f64) -> Result<Arc<Vec<BesselZero>>> {
    if let Some((lm, table)) = ZERO_TABLE.read().unwrap().as_ref() {
        if *lm >= lambda_max {
            if *lm == lambda_max {
                return Ok(table.clone());
            }
            let filtered: Vec<_> = table.iter().copied().filter(|z| z.value <= lambda_max).collect();
            return Ok(Arc::new(filtered));
        }
    }
    let table = Arc::new(compute_zero_table(lambda_max)?);
    *ZERO_TABLE.write().unwrap() = Some((lambda_max, table.clone()));
    Ok(table)
}

/// Free Green's function `G_0 = (i/4) H_0^{(1)}(kappa |x - y|)`, so that
/// `(Delta + kappa^2) G_0 = -delta`.
pub fn free_green(sp: &SpectralParameter, x: [f64; 2], y: [f64; 2]) -> Result<C64> {
    let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
    if d == 0.0 {
        return Err(Error::DiagonalError);
    }
    let (h0, _) = hankel01(sp.kappa() * d);
    Ok(I * 0.25 * h0)
}

/// `d/d nu_q G_0(x, q)` for the unit vector `normal_at_q`.
pub fn free_green_normal_derivative(
    sp: &SpectralParameter,
    x: [f64; 2],
    q: [f64; 2],
    normal_at_q: [f64; 2],
) -> Result<C64> {
    let dx = [q[0] - x[0], q[1] - x[1]];
    let d = (dx[0] * dx[0] + dx[1] * dx[1]).sqrt();
    if d == 0.0 {
        return Err(Error::DiagonalError);
    }
    let kappa = sp.kappa();
    let (_, h1) = hankel01(kappa * d);
    let cos = (dx[0] * normal_at_q[0] + dx[1] * normal_at_q[1]) / d;
    Ok(-I * 0.25 * kappa * h1 * cos)
}

/// Fixed table of function values for regression diffing.
pub fn selftest_table() -> Vec<(String, C64)> {
    let mut rows = Vec::new();
    for &z in &[
        C64::new(1e-3, 0.0),
        C64::new(1.0, 0.0),
        C64::new(5.0, 0.5),
        C64::new(16.9, 0.1),
        C64::new(17.1, 0.1),
        C64::new(100.0, 1.0),
        C64::new(1e4, 0.0),
    ] {
        let (h0, h1) = hankel01(z);
        rows.push((format!("H0({}, {})", z.re, z.im), h0));
        rows.push((format!("H1({}, {})", z.re, z.im), h1));
    }
    for &(n, x) in &[(0usize, 1.0f64), (5, 10.0), (50, 60.0), (200, 150.0)] {
        rows.push((format!("J{n}({x})"), C64::new(bessel_j_seq(n, x)[n], 0.0)));
    }
    for &(n, m) in &[(0usize, 1usize), (1, 1), (10, 3), (100, 1)] {
        rows.push((format!("j_{{{n},{m}}}"), C64::new(bessel_zero(n, m).unwrap_or(f64::NAN), 0.0)));
    }
    rows
}
