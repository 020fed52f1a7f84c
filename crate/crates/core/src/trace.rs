//! Smoothed resolvent traces: the window `ρ`, the disc spectral oracle,
//! boundary-integral trace terms and fits of expansion coefficients.
//!
//! Fourier convention: `ρ(ζ) = ∫ ρ̂(t) e^{iζt} dt`, no factor `2π`.

use crate::billiards::{LengthSpectrumEntry, Stability};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Shape};
use crate::layers::{boundary_nodes, kernel_n, kernel_n_dot};
use crate::linalg::cmatmul;
use crate::quadrature::{composite_gl, plateau_bump, smooth_step_derivatives};
use crate::specfun::{bessel_zeros_below, Scaling, SpectralParameter};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Window `ρ̂(t) = χ((t - L)/ε)` with the plateau profile: 1 on
/// `[L - ε/2, L + ε/2]`, supported in `[L - ε, L + ε]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceWindow {
    pub l_center: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub scaling: Scaling,
}

impl TraceWindow {
    pub fn new(l_center: f64, epsilon: f64, tau: f64, scaling: Scaling) -> Result<Self> {
        if !(epsilon > 0.0 && l_center - epsilon > 0.0) {
            return Err(Error::DomainError(format!("window [{}, {}] must lie in t > 0", l_center - epsilon, l_center + epsilon)));
        }
        if !(tau >= 0.0) {
            return Err(Error::DomainError(format!("tau must be >= 0, got {tau}")));
        }
        Ok(TraceWindow { l_center, epsilon, tau, scaling })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.l_center - self.epsilon, self.l_center + self.epsilon)
    }

    pub fn rho_hat(&self, t: f64) -> f64 {
        plateau_bump((t - self.l_center) / self.epsilon)
    }

    /// `ρ̂^{(p)}(t)` for `p = 0..=order`.
    pub fn rho_hat_derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        let x = (t - self.l_center) / self.epsilon;
        if x.abs() >= 1.0 {
            return vec![0.0; order + 1];
        }
        let d = smooth_step_derivatives(2.0 * (1.0 - x.abs()), order);
        let ds = -2.0 * x.signum() / self.epsilon;
        d.iter().enumerate().map(|(p, v)| v * ds.powi(p as i32)).collect()
    }

    /// Imaginary shift of the spectral parameter at real `k`.
    pub fn damping(&self, k: f64) -> f64 {
        match self.scaling {
            Scaling::Constant => self.tau,
            Scaling::Logarithmic => self.tau * k.ln(),
        }
    }

    pub fn spectral_parameter(&self, k: f64) -> Result<SpectralParameter> {
        SpectralParameter::new(k, self.tau, self.scaling)
    }

    /// Error if a length other than the one nearest the center lies in the support.
    pub fn check_isolation(&self, spectrum: &[LengthSpectrumEntry]) -> Result<()> {
        let (a, b) = self.support();
        let mut inside: Vec<f64> = spectrum.iter().map(|e| e.length).filter(|l| *l > a && *l < b).collect();
        inside.sort_by(|x, y| (x - self.l_center).abs().total_cmp(&(y - self.l_center).abs()));
        match inside.iter().find(|l| (**l - inside[0]).abs() > 1e-8) {
            Some(&other) => Err(Error::WindowNotIsolated(other)),
            None => Ok(()),
        }
    }
}

/// `ρ(ζ) = ∫ ρ̂(t) e^{iζt} dt` by composite Gauss–Legendre.
pub fn rho(window: &TraceWindow, zeta: C64) -> C64 {
    let (a, b) = window.support();
    let panels = 24 + (zeta.norm() * window.epsilon).ceil() as usize;
    rho_with_panels(window, zeta, a, b, panels)
}

fn rho_with_panels(window: &TraceWindow, zeta: C64, a: f64, b: f64, panels: usize) -> C64 {
    let (x, w) = composite_gl(a, b, panels, 16);
    x.iter().zip(&w).map(|(t, wt)| (I * zeta * t).exp() * (window.rho_hat(*t) * wt)).sum()
}

/// Same integral on twice as many panels (self-convergence check).
pub fn rho_refined(window: &TraceWindow, zeta: C64) -> C64 {
    let (a, b) = window.support();
    let panels = 2 * (24 + (zeta.norm() * window.epsilon).ceil() as usize);
    rho_with_panels(window, zeta, a, b, panels)
}

/// `Σ_j ρ(k + i·damping - λ_j)` over Dirichlet eigenvalues `λ_j = j_{n,m} < lambda_max`
/// of the unit disc, with multiplicity.
pub fn spectral_trace_disc(window: &TraceWindow, k: f64, lambda_max: f64) -> Result<C64> {
    spectral_trace_disc_with(window, k, lambda_max, false)
}

/// As [`spectral_trace_disc`]; `conjugate_branch` adds `ρ(k + i·damping + λ_j)`.
pub fn spectral_trace_disc_with(window: &TraceWindow, k: f64, lambda_max: f64, conjugate_branch: bool) -> Result<C64> {
    let required = k + 10.0 / window.epsilon;
    if lambda_max < required {
        return Err(Error::TruncationError { lambda_max, required });
    }
    let zeros = bessel_zeros_below(lambda_max)?;
    let shift = C64::new(k, window.damping(k));
    // collect before summing: a parallel reduction tree depends on the pool size
    Ok(zeros
        .par_iter()
        .map(|z| {
            let mut v = rho(window, shift - z.value);
            if conjugate_branch {
                v += rho(window, shift + z.value);
            }
            v * z.multiplicity() as f64
        })
        .collect::<Vec<C64>>()
        .iter()
        .sum())
}

/// How the `μ`-integral `∫ ρ(k - μ) (…)(μ + i·damping(μ)) dμ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuRule {
    /// Moment expansion `2π e^{iks} Σ_p (-i)^p A^{(p)}(k) ρ̂^{(p)}(s) / p!` per
    /// chord pair, with `A` the non-oscillatory part of the integrand. Only `M = 2`.
    Moments { order: usize },
    /// Gauss–Legendre over `[k - half_width, k + half_width]`.
    Direct { half_width: f64 },
}

/// Smooth localization of the boundary near the orbit's vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexWindow {
    /// Arclength parameters of the vertices.
    pub vertices: Vec<f64>,
    pub radius: f64,
}

impl VertexWindow {
    pub fn weight(&self, perimeter: f64, phi: f64) -> f64 {
        self.vertices
            .iter()
            .map(|v| {
                let d = (phi - v).rem_euclid(perimeter);
                plateau_bump(d.min(perimeter - d) / self.radius)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BemTraceOptions {
    /// Boundary nodes per wavelength at the largest `μ` used.
    pub points_per_wavelength: f64,
    pub mu_rule: MuRule,
    pub localization: Option<VertexWindow>,
    pub m_cap: usize,
}

impl Default for BemTraceOptions {
    fn default() -> Self {
        BemTraceOptions { points_per_wavelength: 10.0, mu_rule: MuRule::Moments { order: 3 }, localization: None, m_cap: 8 }
    }
}

fn kappa_at(window: &TraceWindow, mu: f64) -> C64 {
    C64::new(mu, window.damping(mu))
}

fn node_count(curve: &BoundaryCurve, mu_max: f64, ppw: f64) -> usize {
    let n = (ppw * mu_max * curve.total_length() / (2.0 * PI)).ceil() as usize;
    (n.max(16) + 1) / 2 * 2
}

/// `Tr 1_Ω G_{M,ρ}(k)`, the `M`-reflection term of the smoothed interior
/// resolvent trace, through the boundary identity
/// `κ Tr 1_Ω G_M(κ) = -(-1)^{M-1}/2 · Tr(N^{M-1} ∂_κN)`
/// (free-space composition `𝒮ℓ^{tr} 𝒟ℓ = ∂_κ N / (4κ)`), divided by `iπ` so
/// that the terms sum to `Σ_j ρ(k + i·damping - λ_j)` up to `O(k^{-∞})`.
pub fn bem_trace_term(curve: &BoundaryCurve, window: &TraceWindow, k: f64, m: usize, opts: &BemTraceOptions) -> Result<C64> {
    if m > opts.m_cap {
        return Err(Error::OrderUnavailable { requested: m, available: opts.m_cap });
    }
    if window.scaling == Scaling::Logarithmic && k < 2.0 {
        return Err(Error::DomainError("logarithmic scaling needs k >= 2".into()));
    }
    let raw = match (m, opts.mu_rule) {
        // the Nyström diagonal of ∂_κN vanishes
        (1, _) => Ok(C64::new(0.0, 0.0)),
        (0, MuRule::Moments { .. }) => Ok(C64::new(0.0, 0.0)),
        (0, MuRule::Direct { half_width }) => {
            let area = curve.area();
            Ok(mu_quadrature(window, k, half_width, |mu| {
                let kappa = kappa_at(window, mu);
                let g0 = 0.25 * I - ((kappa / 2.0).ln() + 0.577_215_664_901_532_9) / (2.0 * PI);
                Ok(kappa * g0 * area)
            })?)
        }
        (2, MuRule::Moments { order }) => Ok(0.5 * two_link_moments(curve, window, k, order, opts)?),
        (_, MuRule::Moments { .. }) => {
            Err(Error::DomainError("moment rule implemented for M = 2 only; use MuRule::Direct".into()))
        }
        (_, MuRule::Direct { half_width }) => {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let n = node_count(curve, k + half_width, opts.points_per_wavelength);
            let (nodes, frames) = boundary_nodes(curve, n);
            let h = curve.total_length() / n as f64;
            let wts: Vec<f64> = match &opts.localization {
                Some(v) => nodes.iter().map(|p| v.weight(curve.total_length(), *p)).collect(),
                None => vec![1.0; n],
            };
            let t = mu_quadrature(window, k, half_width, |mu| {
                let kappa = kappa_at(window, mu);
                // window on both ends of every factor
                let sw = |i: usize, j: usize| (wts[i] * wts[j]).sqrt() * h;
                let nm = DMatrix::from_fn(n, n, |i, j| kernel_n(kappa, &frames[i], &frames[j]) * sw(i, j));
                let nd = DMatrix::from_fn(n, n, |i, j| kernel_n_dot(kappa, &frames[i], &frames[j]) * sw(i, j));
                let mut p = nd;
                for _ in 0..m - 1 {
                    p = cmatmul(&nm, &p);
                }
                Ok(p.trace())
            })?;
            Ok(0.5 * sign * t)
        }
    };
    raw.map(|v: C64| v / (I * PI))
}

fn mu_quadrature<F>(window: &TraceWindow, k: f64, half_width: f64, f: F) -> Result<C64>
where
    F: Fn(f64) -> Result<C64> + Sync,
{
    let lo = (k - half_width).max(2.0);
    let hi = k + half_width;
    let panels = ((hi - lo) * (window.l_center + window.epsilon) / PI).ceil().max(4.0) as usize;
    let (x, w) = composite_gl(lo, hi, panels, 8);
    let vals: Result<Vec<C64>> = x
        .par_iter()
        .zip(&w)
        .map(|(mu, wt)| Ok(rho(window, C64::new(k - mu, 0.0)) * f(*mu)? * *wt))
        .collect();
    Ok(vals?.into_iter().sum())
}

/// `∫ ρ(k - μ) Tr(N ∂_κN)(κ(μ)) dμ` by the moment expansion over chord pairs.
fn two_link_moments(curve: &BoundaryCurve, window: &TraceWindow, k: f64, order: usize, opts: &BemTraceOptions) -> Result<C64> {
    let (smin, smax) = window.support();
    let n = node_count(curve, k, opts.points_per_wavelength);
    let (nodes, frames) = boundary_nodes(curve, n);
    let per = curve.total_length();
    let h = per / n as f64;
    let wts: Vec<f64> = match &opts.localization {
        Some(v) => nodes.iter().map(|p| v.weight(per, *p)).collect(),
        None => vec![1.0; n],
    };
    let hmu = (k / 12.0).min(k - 2.0).max(0.5);
    let stencil: Vec<C64> = (-2i32..=2).map(|c| kappa_at(window, k + c as f64 * hmu)).collect();
    let mus: Vec<f64> = (-2i32..=2).map(|c| k + c as f64 * hmu).collect();
    let factorial: Vec<f64> = (0..=order).scan(1.0, |f, p| {
        if p > 0 {
            *f *= p as f64;
        }
        Some(*f)
    }).collect();
    let total: C64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            if wts[i] == 0.0 {
                return acc;
            }
            let a = &frames[i];
            for j in i + 1..n {
                let w = wts[i] * wts[j];
                if w == 0.0 {
                    continue;
                }
                let b = &frames[j];
                let dx = [b.point[0] - a.point[0], b.point[1] - a.point[1]];
                let d = dx[0].hypot(dx[1]);
                let s = 2.0 * d;
                if s <= smin || s >= smax {
                    continue;
                }
                let cos_b = (dx[0] * b.inward_normal[0] + dx[1] * b.inward_normal[1]) / d;
                let cos_a = -(dx[0] * a.inward_normal[0] + dx[1] * a.inward_normal[1]) / d;
                // n_ab ṅ_ba + n_ba ṅ_ab = (-(iκ/2) H1)(-(i/2) κ d H0)(2 cos_a cos_b)
                let amp: Vec<C64> = stencil
                    .iter()
                    .zip(&mus)
                    .map(|(kappa, mu)| {
                        let (h0, h1) = crate::specfun::hankel01(kappa * d);
                        let v = -0.25 * kappa * kappa * d * h1 * h0 * (2.0 * cos_a * cos_b);
                        v * (-I * mu * s).exp()
                    })
                    .collect();
                let der = stencil_derivatives(&amp, hmu);
                let rh = window.rho_hat_derivatives(s, order);
                let mut sum = C64::new(0.0, 0.0);
                let mut ip = C64::new(1.0, 0.0);
                for p in 0..=order.min(3) {
                    sum += ip * der[p] * (rh[p] / factorial[p]);
                    ip *= -I;
                }
                acc += sum * (I * k * s).exp() * w;
            }
            acc
        })
        .collect::<Vec<C64>>()
        .iter()
        .sum();
    Ok(total * (2.0 * PI * h * h))
}

/// Value and first three derivatives at the center of a 5-point stencil.
fn stencil_derivatives(f: &[C64], h: f64) -> [C64; 4] {
    let (m2, m1, z, p1, p2) = (f[0], f[1], f[2], f[3], f[4]);
    [
        z,
        (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
        (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h),
        (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
    ]
}

/// Least-squares estimates of the expansion `Σ_{j=1}^J B_j k^{1-j}` of the
/// demodulated trace `e^{-ikL} e^{L·damping(k)} · trace(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub coefficients: Vec<C64>,
    /// Standard-error proxy from the residual variance.
    pub std_errors: Vec<f64>,
    /// `‖residual‖ / ‖data‖`.
    pub relative_residual: f64,
    pub condition: f64,
}

pub fn demodulate(window: &TraceWindow, l: f64, k: f64, value: C64) -> C64 {
    value * C64::from_polar((l * window.damping(k)).exp(), -k * l)
}

pub fn fit_expansion(samples: &[(f64, C64)], l: f64, window: &TraceWindow, j_terms: usize) -> Result<ExpansionFit> {
    if j_terms == 0 || samples.len() < 2 * j_terms + 2 {
        return Err(Error::IllConditionedFit(format!("{} samples for {j_terms} terms; need {}", samples.len(), 2 * j_terms + 2)));
    }
    let kmin = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let kmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if !(kmin > 0.0 && kmax >= 2.0 * kmin) {
        return Err(Error::IllConditionedFit(format!("k range [{kmin}, {kmax}] spans less than an octave")));
    }
    let rows = samples.len();
    // columns (k/kmin)^{1-j} keep the scaling O(1)
    let a = DMatrix::from_fn(rows, j_terms, |i, j| C64::new((samples[i].0 / kmin).powi(-(j as i32)), 0.0));
    let d = DVector::from_iterator(rows, samples.iter().map(|(k, v)| demodulate(window, l, *k, *v)));
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition < 1e10) {
        return Err(Error::IllConditionedFit(format!("condition number {condition:e}")));
    }
    let x = svd.solve(&d, 1e-14 * smax).map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    let r = &a * &x - &d;
    let rss: f64 = r.iter().map(|z| z.norm_sqr()).sum();
    let dof = (rows - j_terms).max(1) as f64;
    let ata = a.adjoint() * &a;
    let inv = ata.try_inverse().ok_or_else(|| Error::IllConditionedFit("singular normal matrix".into()))?;
    let coefficients: Vec<C64> = (0..j_terms).map(|j| x[j] * kmin.powi(j as i32)).collect();
    let std_errors = (0..j_terms).map(|j| (rss / dof * inv[(j, j)].re).sqrt() * kmin.powi(j as i32)).collect();
    let dn: f64 = d.iter().map(|z| z.norm_sqr()).sum();
    Ok(ExpansionFit { coefficients, std_errors, relative_residual: (rss / dn).sqrt(), condition })
}

/// [`fit_expansion`] after refusing windows whose length belongs to a
/// degenerate orbit family (the expansion assumes a non-degenerate ray).
pub fn fit_expansion_for(
    curve: &BoundaryCurve,
    samples: &[(f64, C64)],
    l: f64,
    window: &TraceWindow,
    j_terms: usize,
) -> Result<ExpansionFit> {
    if matches!(curve.shape(), Shape::Circle { .. }) {
        return Err(Error::IllConditionedFit("circle: every periodic orbit lies in a degenerate family".into()));
    }
    let spectrum = crate::billiards::enumerate_length_spectrum(curve, l + window.epsilon, 4)?;
    let (a, b) = window.support();
    for e in &spectrum {
        if let Some(o) = &e.orbit {
            if o.length > a && o.length < b && o.stability == Stability::Degenerate {
                return Err(Error::IllConditionedFit(format!("degenerate orbit of length {}", o.length)));
            }
        }
    }
    fit_expansion(samples, l, window, j_terms)
}
