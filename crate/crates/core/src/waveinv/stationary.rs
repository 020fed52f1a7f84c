//! Stationary phase at a non-degenerate critical point.
//!
//! For `I(k) = ∫ e^{ikΦ(x)} Σ_m k^{-m} u_m(x) dx` over `R^d` with a single
//! non-degenerate critical point at the origin,
//!
//! `I(k) ~ e^{ikΦ(0)} k^{-d/2} Σ_n a_n k^{-n}`,
//!
//! where `a_n = (2π)^{d/2} |det H|^{-1/2} e^{iπ sgn H/4} Σ_{j+m=n} L_j u_m` and
//! `L_j u = Σ_{ν-μ=j, 2ν≥3μ} i^{ν+μ} / (2^ν ν! μ!) P^ν(g^μ u)(0)` with
//! `P = Σ (H^{-1})_{ab} ∂_a ∂_b` and `g` the part of `Φ` of degree ≥ 3.

use super::poly::{Basis, MPoly};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

type C64 = Complex64;

/// Taylor data of an oscillatory integral at its critical point (the origin).
#[derive(Debug, Clone)]
pub struct OscillatoryIntegralJet {
    pub dim: usize,
    /// Phase Taylor polynomial; its constant term is the critical value.
    pub phase: MPoly,
    /// `amp[m]` multiplies `k^{-m}`.
    pub amp: Vec<MPoly>,
    /// Number of integrated variables transverse to the critical set. Only
    /// isolated critical points are supported, so this equals `dim`.
    pub codim: usize,
    pub critical_value: f64,
    /// The whole amplitude carries an extra `k^{-symbol_order}`.
    pub symbol_order: f64,
}

impl OscillatoryIntegralJet {
    pub fn new(phase: MPoly, amp: Vec<MPoly>, symbol_order: f64) -> Result<Self> {
        let dim = phase.basis.nvars;
        let grad_scale = 1e-9 * (1.0 + phase.hessian().iter().flatten().fold(0.0f64, |a, b| a.max(b.abs())));
        for (i, g) in phase.gradient().iter().enumerate() {
            if g.norm() > grad_scale {
                return Err(Error::DomainError(format!("phase gradient component {i} = {} at the expansion point", g.norm())));
            }
        }
        Ok(OscillatoryIntegralJet {
            dim,
            critical_value: phase.value().re,
            phase,
            amp,
            codim: dim,
            symbol_order,
        })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.phase.basis
    }

    /// Highest `R` the stored jets support.
    pub fn max_order(&self) -> usize {
        let d = self.basis().max_deg;
        // phase to 2R+2 and products to 6R
        ((d.saturating_sub(2)) / 2).min(d / 6)
    }
}

/// Result of [`stationary_phase`].
#[derive(Debug, Clone)]
pub struct StationaryPhaseExpansion {
    /// `a_0..a_R` as defined in the module docs (k-independent).
    pub coefficients: Vec<C64>,
    pub critical_value: f64,
    pub codim: usize,
    pub symbol_order: f64,
    pub det_hessian: f64,
    pub signature: i32,
    /// The truncated sum evaluated at the requested `k`.
    pub value: C64,
}

impl StationaryPhaseExpansion {
    /// `e^{ikΦ0} k^{-q/2-r} Σ_{j≤n} a_j k^{-j}`.
    pub fn evaluate(&self, k: f64, n: usize) -> C64 {
        let s: C64 = self
            .coefficients
            .iter()
            .take(n + 1)
            .enumerate()
            .map(|(j, a)| a * k.powi(-(j as i32)))
            .sum();
        s * k.powf(-(self.codim as f64) / 2.0 - self.symbol_order) * C64::from_polar(1.0, k * self.critical_value)
    }
}

pub(crate) struct HessianInfo {
    pub inv: DMatrix<f64>,
    pub det: f64,
    pub signature: i32,
}

pub(crate) fn hessian_info(h: Vec<Vec<f64>>) -> Result<HessianInfo> {
    let d = h.len();
    let m = DMatrix::from_fn(d, d, |i, j| h[i][j]);
    let scale = m.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-300);
    let det = m.determinant();
    if det.abs() < 1e-10 * scale.powi(d as i32) {
        return Err(Error::DegenerateHessian(det.abs()));
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let inv = m.try_inverse().ok_or(Error::DegenerateHessian(det.abs()))?;
    let signature = eig.eigenvalues.iter().map(|&l| if l > 0.0 { 1 } else { -1 }).sum();
    Ok(HessianInfo { inv, det, signature })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Stationary-phase coefficients `a_0..a_R` of `jet`, and their sum at `k`.
pub fn stationary_phase(jet: &OscillatoryIntegralJet, k: f64, r_order: usize) -> Result<StationaryPhaseExpansion> {
    let avail = jet.max_order();
    if r_order > avail {
        return Err(Error::JetOrderUnavailable(format!("order {r_order} needs jets beyond degree {}", jet.basis().max_deg)));
    }
    let info = hessian_info(jet.phase.hessian())?;
    let d = jet.dim;
    let pmat: Vec<Vec<f64>> = (0..d).map(|a| (0..d).map(|b| info.inv[(a, b)]).collect()).collect();
    let g = jet.phase.from_degree(3);

    // g^μ for μ up to 2R
    let mut gpow = vec![MPoly::constant(jet.basis(), C64::new(1.0, 0.0))];
    for mu in 1..=2 * r_order {
        let next = gpow[mu - 1].mul(&g).truncate(6 * r_order);
        gpow.push(next);
    }

    let l_op = |j: usize, u: &MPoly| -> C64 {
        let mut total = C64::new(0.0, 0.0);
        for mu in 0..=2 * j {
            let nu = j + mu;
            if 2 * nu < 3 * mu {
                continue;
            }
            let mut w = gpow[mu].mul(u).truncate(2 * nu);
            for _ in 0..nu {
                w = w.second_order(&pmat);
            }
            let coef = C64::new(0.0, 1.0).powu((nu + mu) as u32) / (2f64.powi(nu as i32) * factorial(nu) * factorial(mu));
            total += coef * w.value();
        }
        total
    };

    let pre = (2.0 * PI).powf(d as f64 / 2.0) * info.det.abs().powf(-0.5) * C64::from_polar(1.0, PI * info.signature as f64 / 4.0);
    let mut coefficients = Vec::with_capacity(r_order + 1);
    for n in 0..=r_order {
        let mut a = C64::new(0.0, 0.0);
        for (m, u) in jet.amp.iter().enumerate().take(n + 1) {
            a += l_op(n - m, u);
        }
        coefficients.push(pre * a);
    }
    let mut out = StationaryPhaseExpansion {
        coefficients,
        critical_value: jet.critical_value,
        codim: jet.codim,
        symbol_order: jet.symbol_order,
        det_hessian: info.det,
        signature: info.signature,
        value: C64::new(0.0, 0.0),
    };
    out.value = out.evaluate(k, r_order);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(phase: &[f64], order: usize) -> OscillatoryIntegralJet {
        let b = Basis::new(1, 6 * order.max(1));
        let c: Vec<C64> = phase.iter().map(|&v| C64::new(v, 0.0)).collect();
        let p = MPoly::univariate(&b, 0, &c);
        OscillatoryIntegralJet::new(p, vec![MPoly::constant(&b, C64::new(1.0, 0.0))], 0.0).unwrap()
    }

    #[test]
    fn fresnel_is_exact() {
        let jet = one_d(&[0.0, 0.0, 0.5], 3);
        let e = stationary_phase(&jet, 50.0, 3).unwrap();
        let lead = (2.0 * PI).sqrt() * C64::from_polar(1.0, PI / 4.0);
        assert!((e.coefficients[0] - lead).norm() < 1e-14);
        assert!(e.coefficients[1..].iter().all(|a| a.norm() < 1e-14));
    }

    #[test]
    fn quartic_second_coefficient() {
        // ⟨ikεx⁴⟩ = 3ikε(i/k)² gives a_1/a_0 = -3iε
        let eps = 0.25;
        let jet = one_d(&[0.0, 0.0, 0.5, 0.0, eps], 1);
        let e = stationary_phase(&jet, 50.0, 1).unwrap();
        let ratio = e.coefficients[1] / e.coefficients[0];
        assert!((ratio - C64::new(0.0, -3.0 * eps)).norm() < 1e-14, "{ratio}");
    }

    #[test]
    fn cubic_second_coefficient() {
        // e^{ikcx³} = 1 + ikcx³ - k²c²x⁶/2 + ..., ⟨x⁶⟩ = 15(i/k)³ gives a_1/a_0 = 15ic²/2
        let c = 0.3;
        let jet = one_d(&[0.0, 0.0, 0.5, c], 1);
        let e = stationary_phase(&jet, 50.0, 1).unwrap();
        let ratio = e.coefficients[1] / e.coefficients[0];
        assert!((ratio - C64::new(0.0, 7.5 * c * c)).norm() < 1e-14, "{ratio}");
    }

    #[test]
    fn degenerate_hessian_rejected() {
        let b = Basis::new(2, 6);
        let x = MPoly::var(&b, 0);
        let p = x.mul(&x);
        let jet = OscillatoryIntegralJet::new(p, vec![MPoly::constant(&b, C64::new(1.0, 0.0))], 0.0).unwrap();
        assert!(matches!(stationary_phase(&jet, 10.0, 1), Err(Error::DegenerateHessian(_))));
    }
}
