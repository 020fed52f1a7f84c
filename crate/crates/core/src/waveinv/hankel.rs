//! Cutoff Fourier transforms of `H_0^{(1)}`.
//!
//! `∫_0^∞ χ(k^{-δ}x) cos(ax) H_0(bx) dx → 1/√(b²−a²)` and the offset form
//! `∫_0^∞ χ(k^{-δ}u) cos(au) H_0(b√(r²+u²)) du → e^{ir√(b²−a²)}/√(b²−a²)`.

use crate::quadrature::{gauss_legendre, smooth_step};
use crate::specfun::hankel01;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HankelVariant {
    Flat,
    Offset { r: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HankelTransform {
    pub numeric: C64,
    pub predicted: C64,
    pub residual: f64,
}

/// Separation constant `C` in `|a − b| ≥ C k^{δ−1}`.
pub const REGIME_CONSTANT: f64 = 0.25;

/// Half-width of the plateau of the cutoff `χ`, relative to its support.
pub const CUTOFF_PLATEAU: f64 = 0.2;

/// Even cutoff, 1 on `[-0.2, 0.2]`, 0 outside `(-1, 1)`. The wide transition
/// keeps the Fourier tail of `χ(k^{-δ}·)` small at moderate `k^δ |b - a|`.
pub fn hankel_cutoff(x: f64) -> f64 {
    smooth_step((1.0 - x.abs()) / (1.0 - CUTOFF_PLATEAU))
}

/// Principal `√(b² − a²)` (cut on the negative real axis).
fn root(a: f64, b: C64) -> C64 {
    (b * b - a * a).sqrt()
}

pub fn hankel_cutoff_transform(a: f64, b: C64, k: f64, delta: f64, variant: HankelVariant) -> Result<HankelTransform> {
    if !(a > -1.0 && a < 1.0) {
        return Err(Error::RegimeError(format!("a = {a} outside (-1, 1)")));
    }
    if b.re < 1.0 || b.im <= 0.0 {
        return Err(Error::RegimeError(format!("b = {b} needs Re b >= 1, Im b > 0")));
    }
    if !(delta > 0.5 && delta < 1.0) {
        return Err(Error::RegimeError(format!("delta = {delta} outside (1/2, 1)")));
    }
    let sep = (C64::new(a, 0.0) - b).norm();
    let need = REGIME_CONSTANT * k.powf(delta - 1.0);
    if sep < need {
        return Err(Error::RegimeError(format!("|a - b| = {sep:e} below {need:e}")));
    }
    let x_max = k.powf(delta);
    let s = root(a, b);
    let (numeric, predicted) = match variant {
        HankelVariant::Flat => {
            let f = |x: f64| hankel01(b * x).0 * (a * x).cos() * hankel_cutoff(x / x_max);
            (integrate_from_zero(&f, x_max, b, true), 1.0 / s)
        }
        HankelVariant::Offset { r } => {
            if r <= 0.0 {
                return Err(Error::RegimeError(format!("offset r = {r} must be positive")));
            }
            let f = |u: f64| hankel01(b * (r * r + u * u).sqrt()).0 * (a * u).cos() * hankel_cutoff(u / x_max);
            (integrate_from_zero(&f, x_max, b, false), (C64::i() * r * s).exp() / s)
        }
    };
    Ok(HankelTransform { numeric, predicted, residual: (numeric - predicted).norm() })
}

/// `∫_0^{x_max} f` with panels of about a quarter wavelength and geometric
/// grading towards 0 when `f` has a logarithmic singularity there.
fn integrate_from_zero<F: Fn(f64) -> C64>(f: &F, x_max: f64, b: C64, log_singular: bool) -> C64 {
    let (gx, gw) = gauss_legendre(16);
    let panel = |lo: f64, hi: f64| -> C64 {
        let h = 0.5 * (hi - lo);
        gx.iter().zip(&gw).map(|(x, w)| f(lo + h * (x + 1.0)) * (w * h)).sum()
    };
    let mut total = C64::new(0.0, 0.0);
    let mut start = 0.0;
    if log_singular {
        let mut hi = 1.0;
        let mut edges = vec![hi];
        while hi > 1e-14 {
            hi *= 0.25;
            edges.push(hi);
        }
        edges.push(0.0);
        for w in edges.windows(2).rev() {
            total += panel(w[1], w[0]);
        }
        start = 1.0;
    }
    let step = 0.5 / (b.re + 1.0);
    let n = ((x_max - start) / step).ceil() as usize;
    let h = (x_max - start) / n as f64;
    for i in 0..n {
        total += panel(start + i as f64 * h, start + (i + 1) as f64 * h);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_transform_small_residual() {
        let b = C64::new(1.0, 0.02);
        let t = hankel_cutoff_transform(0.5, b, 1e3, 0.75, HankelVariant::Flat).unwrap();
        assert!(t.residual < 1e-5, "{t:?}");
        let t0 = hankel_cutoff_transform(0.0, b, 1e3, 0.75, HankelVariant::Flat).unwrap();
        assert!((t0.predicted - 1.0 / b).norm() < 1e-15);
    }

    #[test]
    fn offset_transform_matches() {
        let b = C64::new(1.0, 0.02);
        let t = hankel_cutoff_transform(0.5, b, 1e3, 0.75, HankelVariant::Offset { r: 0.7 }).unwrap();
        assert!(t.residual < 1e-5, "{t:?}");
    }

    #[test]
    fn residual_falls_with_delta() {
        let b = C64::new(1.0, 0.02);
        let r: Vec<f64> = [0.6, 0.75, 0.9]
            .iter()
            .map(|&d| hankel_cutoff_transform(0.5, b, 1e3, d, HankelVariant::Flat).unwrap().residual)
            .collect();
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    }

    #[test]
    fn regime_violation() {
        let b = C64::new(1.0, 0.001);
        assert!(matches!(
            hankel_cutoff_transform(0.99, b, 1e3, 0.75, HankelVariant::Flat),
            Err(Error::RegimeError(_))
        ));
    }
}
