//! Boundary integral operators, layer potentials and the multiple
//! reflection expansion.
//!
//! Conventions: `G0 = (i/4) H0(κ|x-y|)`, normals point into the domain,
//! `N f(q) = 2 ∫ ∂_{ν_{q'}} G0(q, q') f(q') ds(q')`, and the interior limit of
//! the double layer is `½ f + ½ N f`.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Frame};
use crate::quadrature::{composite_gl, kress_log_weights, plateau_bump};
use crate::linalg::cmatmul;
use crate::specfun::{bessel_jy01, hankel01, Scaling, SpectralParameter};
use crate::trace::{rho, TraceWindow, VertexWindow};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;
const I: C64 = C64 { re: 0.0, im: 1.0 };
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Largest `e^{Im κ d}` growth allowed in the Kress log split.
const LOG_SPLIT_GROWTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    N,
    N0,
    N1,
    S,
    /// `∂N/∂κ`.
    NDot,
}

/// Quadrature used for the periodic boundary integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Plain periodic trapezoid.
    Trapezoid,
    /// Kress splitting of the `log(4 sin²)` part of the kernel.
    Kress,
}

/// Near/far split of the boundary operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub delta: f64,
}

impl CutoffSpec {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.5 && delta < 1.0) {
            return Err(Error::DomainError(format!("cutoff delta must lie in (1/2, 1), got {delta}")));
        }
        Ok(CutoffSpec { delta })
    }

    /// `χ(k^{1-δ} |q - q'|)`.
    pub fn chi(&self, k: f64, dist: f64) -> f64 {
        plateau_bump(k.powf(1.0 - self.delta) * dist)
    }

    /// Radius `k^{-1+δ}` beyond which the near part vanishes.
    pub fn radius(&self, k: f64) -> f64 {
        k.powf(-1.0 + self.delta)
    }
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { delta: 0.75 }
    }
}

/// Nyström discretization on equispaced arclength nodes.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub frames: Vec<Frame>,
    pub matrix: DMatrix<C64>,
    pub sp: SpectralParameter,
    pub kind: OperatorKind,
    pub rule: Rule,
}

impl BoundaryOperator {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// `(Σ |K_ij|² w_i w_j)^{1/2}`: Hilbert–Schmidt norm of the kernel.
    pub fn hs_norm(&self) -> f64 {
        // matrix entries already carry the column weight
        let mut s = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                s += self.matrix[(i, j)].norm_sqr() * self.weights[i] / self.weights[j];
            }
        }
        s.sqrt()
    }

    /// Apply to node samples of a density.
    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        let v = &self.matrix * DVector::from_column_slice(f);
        v.iter().copied().collect()
    }
}

/// Equispaced arclength nodes and their frames.
pub fn boundary_nodes(curve: &BoundaryCurve, n: usize) -> (Vec<f64>, Vec<Frame>) {
    let l = curve.total_length();
    let nodes: Vec<f64> = (0..n).map(|j| l * j as f64 / n as f64).collect();
    let frames = nodes.par_iter().map(|&p| curve.eval_frame(p)).collect();
    (nodes, frames)
}

fn geometry_pair(a: &Frame, b: &Frame) -> (f64, f64) {
    let d = [b.point[0] - a.point[0], b.point[1] - a.point[1]];
    let r = d[0].hypot(d[1]);
    let cos = (d[0] * b.inward_normal[0] + d[1] * b.inward_normal[1]) / r;
    (r, cos)
}

/// `n(q, q') = 2 ∂_{ν_{q'}} G0(q, q') = -(iκ/2) H1(κd) cos∠(q' - q, ν_{q'})`,
/// with diagonal limit `κ_c / (2π)` (boundary curvature `κ_c`).
pub fn kernel_n(kappa: C64, a: &Frame, b: &Frame) -> C64 {
    let (r, cos) = geometry_pair(a, b);
    if r == 0.0 {
        return C64::new(b.curvature / (2.0 * PI), 0.0);
    }
    let (_, h1) = hankel01(kappa * r);
    -0.5 * I * kappa * h1 * cos
}

/// `∂n/∂κ = -(i/2) κ d H0(κd) cos∠`, zero on the diagonal.
pub fn kernel_n_dot(kappa: C64, a: &Frame, b: &Frame) -> C64 {
    let (r, cos) = geometry_pair(a, b);
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let (h0, _) = hankel01(kappa * r);
    -0.5 * I * kappa * r * h0 * cos
}

/// Kernel value at two arclength parameters.
pub fn n_kernel(curve: &BoundaryCurve, sp: &SpectralParameter, phi: f64, phi2: f64) -> C64 {
    kernel_n(sp.kappa(), &curve.eval_frame(phi), &curve.eval_frame(phi2))
}

/// Coefficient of `log(4 sin²((t - t')/2))` in each kernel.
fn log_part(kind: OperatorKind, kappa: C64, a: &Frame, b: &Frame) -> C64 {
    let (r, cos) = geometry_pair(a, b);
    if r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let z = kappa * r;
    let [j0, j1, _, _] = bessel_jy01(z);
    match kind {
        OperatorKind::S => -j0 / (4.0 * PI),
        OperatorKind::NDot => kappa * r * cos * j0 / (2.0 * PI),
        _ => kappa * j1 * cos / (2.0 * PI),
    }
}

fn kernel_s(kappa: C64, a: &Frame, b: &Frame) -> C64 {
    let (r, _) = geometry_pair(a, b);
    let (h0, _) = hankel01(kappa * r);
    0.25 * I * h0
}

/// Assemble the Nyström matrix of `kind` (`N`, `S` or `NDot`; the split
/// kinds come from [`split`]).
pub fn assemble(curve: &BoundaryCurve, sp: &SpectralParameter, n: usize, kind: OperatorKind) -> Result<BoundaryOperator> {
    assemble_with(curve, sp, n, kind, Rule::Kress)
}

pub fn assemble_with(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    n: usize,
    kind: OperatorKind,
    rule: Rule,
) -> Result<BoundaryOperator> {
    let (nodes, frames) = boundary_nodes(curve, n);
    assemble_on_nodes(curve, sp, nodes, frames, kind, rule)
}

/// Assemble on precomputed nodes (lets k-scans reuse the geometry).
pub fn assemble_on_nodes(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    nodes: Vec<f64>,
    frames: Vec<Frame>,
    kind: OperatorKind,
    rule: Rule,
) -> Result<BoundaryOperator> {
    let n = nodes.len();
    let l = curve.total_length();
    let required = 8.0 * sp.k * l / (2.0 * PI);
    if (n as f64) < required {
        return Err(Error::ResolutionError(format!("{n} nodes < 8 k L / 2π = {required:.0}")));
    }
    if matches!(kind, OperatorKind::N0 | OperatorKind::N1) {
        return Err(Error::DomainError("assemble N and use split() for N0/N1".into()));
    }
    if rule == Rule::Kress && n % 2 == 1 {
        return Err(Error::ResolutionError("Kress rule needs an even node count".into()));
    }
    let kappa = sp.kappa();
    let h = l / n as f64;
    let kress = if rule == Rule::Kress { kress_log_weights(n) } else { Vec::new() };
    let log4sin2: Vec<f64> = (0..n)
        .map(|m| if m == 0 { 0.0 } else { (4.0 * (PI * m as f64 / n as f64).sin().powi(2)).ln() })
        .collect();
    let s_diag = 0.25 * I - ((kappa * l / (4.0 * PI)).ln() + EULER_GAMMA) / (2.0 * PI);
    // The log coefficients carry J_0, J_1, which grow like e^{Im κ d}; far from
    // the diagonal the split would cancel two huge terms. Keep it local.
    let log_radius = if kappa.im * 0.5 * l > LOG_SPLIT_GROWTH { Some(LOG_SPLIT_GROWTH / kappa.im) } else { None };
    let log_weight: Vec<f64> = (0..n)
        .map(|m| match log_radius {
            Some(rad) => plateau_bump(m.min(n - m) as f64 * h / rad),
            None => 1.0,
        })
        .collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (&frames[i], &frames[j]);
                    let m = (j + n - i) % n;
                    match (kind, rule) {
                        (OperatorKind::S, Rule::Trapezoid) if i == j => C64::new(0.0, 0.0),
                        (OperatorKind::S, Rule::Trapezoid) => kernel_s(kappa, a, b) * h,
                        (_, Rule::Trapezoid) => full_kernel(kind, kappa, a, b) * h,
                        (_, Rule::Kress) => {
                            let k1 = if log_weight[m] == 0.0 { C64::new(0.0, 0.0) } else { log_part(kind, kappa, a, b) * log_weight[m] };
                            let k2 = if i == j {
                                if kind == OperatorKind::S {
                                    s_diag
                                } else {
                                    full_kernel(kind, kappa, a, b)
                                }
                            } else {
                                full_kernel(kind, kappa, a, b) - k1 * log4sin2[m]
                            };
                            (k1 * kress[m] + k2 * (2.0 * PI / n as f64)) * (l / (2.0 * PI))
                        }
                    }
                })
                .collect()
        })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(BoundaryOperator { nodes, weights: vec![h; n], frames, matrix, sp: *sp, kind, rule })
}

fn full_kernel(kind: OperatorKind, kappa: C64, a: &Frame, b: &Frame) -> C64 {
    match kind {
        OperatorKind::S => kernel_s(kappa, a, b),
        OperatorKind::NDot => kernel_n_dot(kappa, a, b),
        _ => kernel_n(kappa, a, b),
    }
}

/// Split `N = N0 + N1` entrywise with `N0 = χ(k^{1-δ}|q - q'|) N`.
pub fn split(op: &BoundaryOperator, cutoff: &CutoffSpec) -> Result<(BoundaryOperator, BoundaryOperator)> {
    if op.kind != OperatorKind::N {
        return Err(Error::DomainError("split needs an operator of kind N".into()));
    }
    let n = op.n();
    let k = op.sp.k;
    let mut n0 = op.clone();
    let mut n1 = op.clone();
    n0.kind = OperatorKind::N0;
    n1.kind = OperatorKind::N1;
    for i in 0..n {
        for j in 0..n {
            let (r, _) = if i == j { (0.0, 0.0) } else { geometry_pair(&op.frames[i], &op.frames[j]) };
            let v = op.matrix[(i, j)];
            let near = v * cutoff.chi(k, r);
            n0.matrix[(i, j)] = near;
            n1.matrix[(i, j)] = v - near;
        }
    }
    Ok((n0, n1))
}

/// WKB form of a far kernel entry: `-(iκ/2) a_1(κd) e^{iκd} cos∠` with the
/// leading Hankel symbol `a_1(z) ≈ (2/(πz))^{1/2} e^{-3iπ/4}`.
pub fn n_kernel_wkb_leading(kappa: C64, a: &Frame, b: &Frame) -> C64 {
    let (r, cos) = geometry_pair(a, b);
    let z = kappa * r;
    let amp = (2.0 / (PI * z)).sqrt() * C64::from_polar(1.0, -0.75 * PI);
    -0.5 * I * kappa * amp * (I * z).exp() * cos
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Single,
    Double,
}

fn distance_to_nodes(frames: &[Frame], x: [f64; 2]) -> f64 {
    frames
        .iter()
        .map(|f| (f.point[0] - x[0]).hypot(f.point[1] - x[1]))
        .fold(f64::INFINITY, f64::min)
}

/// Trapezoid evaluation of the single or double layer potential of node
/// samples `density` at interior targets.
pub fn layer_eval(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    density: &[C64],
    targets: &[[f64; 2]],
    kind: LayerKind,
) -> Result<Vec<C64>> {
    let n = density.len();
    let (_, frames) = boundary_nodes(curve, n);
    layer_eval_on(&frames, curve.total_length(), sp, density, targets, kind)
}

fn layer_eval_on(
    frames: &[Frame],
    perimeter: f64,
    sp: &SpectralParameter,
    density: &[C64],
    targets: &[[f64; 2]],
    kind: LayerKind,
) -> Result<Vec<C64>> {
    let n = density.len();
    let h = perimeter / n as f64;
    for &x in targets {
        let d = distance_to_nodes(frames, x);
        if d <= h {
            return Err(Error::TargetTooClose { dist: d, limit: h });
        }
    }
    let kappa = sp.kappa();
    Ok(targets
        .par_iter()
        .map(|&x| {
            let mut acc = C64::new(0.0, 0.0);
            for (f, mu) in frames.iter().zip(density) {
                let d = [f.point[0] - x[0], f.point[1] - x[1]];
                let r = d[0].hypot(d[1]);
                let (h0, h1) = hankel01(kappa * r);
                let g = match kind {
                    LayerKind::Single => 0.25 * I * h0,
                    LayerKind::Double => {
                        let cos = (d[0] * f.inward_normal[0] + d[1] * f.inward_normal[1]) / r;
                        -0.25 * I * kappa * h1 * cos
                    }
                };
                acc += g * mu;
            }
            acc * h
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMethod {
    DirectSolve,
    NeumannSeries(usize),
}

/// Dirichlet Green's function
/// `G_Ω(x, y) = G0(x, y) - 𝒟ℓ[2 (I + N)^{-1} G0(·, y)|_{∂Ω}](x)`.
pub fn dirichlet_green(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    x: [f64; 2],
    y: [f64; 2],
    method: GreenMethod,
    n_nodes: usize,
) -> Result<C64> {
    Ok(dirichlet_green_many(curve, sp, &[x], y, method, n_nodes)?[0])
}

/// Several targets `x` for one source `y`.
pub fn dirichlet_green_many(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    xs: &[[f64; 2]],
    y: [f64; 2],
    method: GreenMethod,
    n_nodes: usize,
) -> Result<Vec<C64>> {
    let op = assemble(curve, sp, n_nodes, OperatorKind::N)?;
    let kappa = sp.kappa();
    let g: Vec<C64> = op
        .frames
        .iter()
        .map(|f| {
            let r = (f.point[0] - y[0]).hypot(f.point[1] - y[1]);
            0.25 * I * hankel01(kappa * r).0 * 2.0
        })
        .collect();
    let rhs = DVector::from_vec(g);
    let a = DMatrix::<C64>::identity(op.n(), op.n()) + &op.matrix;
    let mu = match method {
        GreenMethod::DirectSolve => {
            if sp.damping() == 0.0 {
                let sv = a.clone().singular_values();
                let cond = sv.max() / sv.min();
                if cond > 1e12 {
                    return Err(Error::SolveFailure(format!("near a real resonance: condition {cond:e}")));
                }
            }
            a.lu().solve(&rhs).ok_or_else(|| Error::SolveFailure("singular I + N".into()))?
        }
        GreenMethod::NeumannSeries(m0) => {
            let mut term = rhs.clone();
            let mut acc = rhs;
            for _ in 0..m0 {
                term = -(&op.matrix * &term);
                acc += &term;
            }
            acc
        }
    };
    let density: Vec<C64> = mu.iter().copied().collect();
    let dl = layer_eval_on(&op.frames, curve.total_length(), sp, &density, xs, LayerKind::Double)?;
    Ok(xs
        .iter()
        .zip(dl)
        .map(|(x, d)| {
            let r = (x[0] - y[0]).hypot(x[1] - y[1]);
            0.25 * I * hankel01(kappa * r).0 - d
        })
        .collect())
}

/// Interior cutoff for the boundary return operator: a smooth strip of
/// half-width `half_width` around the chord from `a` to `b`, restricted
/// to the middle portion `[margin, 1 - margin]` of the chord.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripCutoff {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub half_width: f64,
    pub margin: f64,
    /// Grid points per wavelength.
    pub points_per_wavelength: f64,
}

impl StripCutoff {
    /// Stationary-phase width `4 k^{-1/2}` around the chord.
    pub fn for_chord(a: [f64; 2], b: [f64; 2], k: f64) -> Self {
        StripCutoff { a, b, half_width: 2.0 / k.sqrt(), margin: 0.15, points_per_wavelength: 6.0 }
    }

    fn weight(&self, s: f64, t: f64) -> f64 {
        let along = plateau_bump((s - 0.5) / (0.5 - self.margin));
        along * plateau_bump(t / self.half_width)
    }
}

/// `𝒮ℓ^{tr} χ 𝒟ℓ` as an `n × n` matrix, by tensor Gauss–Legendre quadrature
/// over the strip: entry `(i, j)` is `∫ G0(q_i, x) χ(x) ∂_{ν_j} G0(x, q_j) dx`
/// times the column weight.
pub fn boundary_return(
    curve: &BoundaryCurve,
    sp: &SpectralParameter,
    n_nodes: usize,
    cutoff: &StripCutoff,
) -> Result<BoundaryOperator> {
    let (nodes, frames) = boundary_nodes(curve, n_nodes);
    let h = curve.total_length() / n_nodes as f64;
    let kappa = sp.kappa();
    let chord = [cutoff.b[0] - cutoff.a[0], cutoff.b[1] - cutoff.a[1]];
    let len = chord[0].hypot(chord[1]);
    if len == 0.0 || cutoff.half_width <= 0.0 {
        return Ok(zero_operator(nodes, frames, sp, h));
    }
    let e = [chord[0] / len, chord[1] / len];
    let nrm = [-e[1], e[0]];
    let wavelength = 2.0 * PI / sp.k;
    let per_panel = 8;
    let panels_s = ((len / wavelength * cutoff.points_per_wavelength) / per_panel as f64).ceil().max(1.0) as usize;
    let width = 2.0 * cutoff.half_width;
    let panels_t = ((width / wavelength * cutoff.points_per_wavelength) / per_panel as f64).ceil().max(1.0) as usize;
    let (sx, sw) = composite_gl(0.0, 1.0, panels_s, per_panel);
    let (tx, tw) = composite_gl(-cutoff.half_width, cutoff.half_width, panels_t, per_panel);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for (s, ws) in sx.iter().zip(&sw) {
        for (t, wt) in tx.iter().zip(&tw) {
            let w = cutoff.weight(*s, *t) * ws * wt * len;
            if w != 0.0 {
                pts.push([cutoff.a[0] + s * chord[0] + t * nrm[0], cutoff.a[1] + s * chord[1] + t * nrm[1]]);
                wts.push(w);
            }
        }
    }
    if pts.len() > 400_000 {
        return Err(Error::ResolutionError(format!("interior grid too large: {} points", pts.len())));
    }
    let np = pts.len();
    let n = n_nodes;
    // left[i, p] = G0(q_i, x_p) w_p ; right[p, j] = ∂_{ν_j} G0(x_p, q_j) h
    let cols: Vec<(Vec<C64>, Vec<C64>)> = pts
        .par_iter()
        .zip(&wts)
        .map(|(x, w)| {
            let mut l = Vec::with_capacity(n);
            let mut r = Vec::with_capacity(n);
            for f in &frames {
                let d = [f.point[0] - x[0], f.point[1] - x[1]];
                let dist = d[0].hypot(d[1]);
                let (h0, h1) = hankel01(kappa * dist);
                l.push(0.25 * I * h0 * *w);
                let cos = (d[0] * f.inward_normal[0] + d[1] * f.inward_normal[1]) / dist;
                r.push(-0.25 * I * kappa * h1 * cos * h);
            }
            (l, r)
        })
        .collect();
    let left = DMatrix::from_fn(n, np, |i, p| cols[p].0[i]);
    let right = DMatrix::from_fn(np, n, |p, j| cols[p].1[j]);
    let matrix = cmatmul(&left, &right);
    Ok(BoundaryOperator { nodes, weights: vec![h; n], frames, matrix, sp: *sp, kind: OperatorKind::S, rule: Rule::Trapezoid })
}

fn zero_operator(nodes: Vec<f64>, frames: Vec<Frame>, sp: &SpectralParameter, h: f64) -> BoundaryOperator {
    let n = nodes.len();
    BoundaryOperator {
        nodes,
        weights: vec![h; n],
        frames,
        matrix: DMatrix::zeros(n, n),
        sp: *sp,
        kind: OperatorKind::S,
        rule: Rule::Trapezoid,
    }
}

/// One entry of a remainder-norm table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDecayRow {
    pub k: f64,
    pub tau: f64,
    pub m0: usize,
    pub frobenius_norm: f64,
}

/// Hilbert–Schmidt norms of `∫ ρ(k - μ) N(μ + iτ log μ)^{M0} χ dμ`, where `χ`
/// is the boundary window `orbit_window` and `ρ` comes from `trace_window`
/// (its own `tau` is ignored). The `μ`-integral runs over
/// `[k - half_width, k + half_width]`.
pub fn tail_decay(
    curve: &BoundaryCurve,
    k_list: &[f64],
    m0_list: &[usize],
    tau_list: &[f64],
    orbit_window: &VertexWindow,
    trace_window: &TraceWindow,
    half_width: f64,
) -> Result<Vec<TailDecayRow>> {
    if trace_window.scaling != Scaling::Logarithmic {
        return Err(Error::DomainError("tail_decay needs logarithmic scaling".into()));
    }
    let m0_max = m0_list.iter().copied().max().unwrap_or(0);
    let mut rows = Vec::new();
    for &k in k_list {
        let lo = (k - half_width).max(2.0);
        let hi = k + half_width;
        let per = curve.total_length();
        let n = ((8.0 * hi * per / (2.0 * PI)).ceil() as usize + 1) / 2 * 2;
        let (nodes, frames) = boundary_nodes(curve, n);
        let cols: Vec<usize> = (0..n).filter(|&j| orbit_window.weight(per, nodes[j]) > 0.0).collect();
        let wcols = DMatrix::from_fn(n, cols.len(), |i, c| {
            if i == cols[c] {
                C64::new(orbit_window.weight(per, nodes[i]), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let panels = ((hi - lo) * (trace_window.l_center + trace_window.epsilon) / PI).ceil().max(4.0) as usize;
        let (mus, mw) = composite_gl(lo, hi, panels, 8);
        for &tau in tau_list {
            let window = TraceWindow { tau, ..*trace_window };
            let mut acc: Vec<DMatrix<C64>> = vec![DMatrix::zeros(n, cols.len()); m0_max + 1];
            for (mu, w) in mus.iter().zip(&mw) {
                let weight = rho(&window, C64::new(k - mu, 0.0)) * *w;
                let sp = SpectralParameter::logarithmic(*mu, tau)?;
                let op = assemble_on_nodes(curve, &sp, nodes.clone(), frames.clone(), OperatorKind::N, Rule::Kress)?;
                let mut p = wcols.clone();
                acc[0] += &p * weight;
                for a in acc.iter_mut().skip(1) {
                    p = cmatmul(&op.matrix, &p);
                    *a += &p * weight;
                }
            }
            for &m0 in m0_list {
                rows.push(TailDecayRow { k, tau, m0, frobenius_norm: acc[m0].norm() });
            }
        }
    }
    Ok(rows)
}

/// Fit `C` in `norm ∝ exp(-2 C τ log k (M0 - |σ|) L)` from the `τ`-dependence
/// of each `(k, M0)` group with `M0 > |σ|`; returns the mean over groups.
pub fn fit_damping_constant(rows: &[TailDecayRow], l_gamma: f64, sigma: usize) -> Option<f64> {
    let mut estimates = Vec::new();
    let mut keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.k, r.m0)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    for (k, m0) in keys {
        if m0 <= sigma {
            continue;
        }
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.k == k && r.m0 == m0 && r.frobenius_norm > 0.0)
            .map(|r| (r.tau, r.frobenius_norm.ln()))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            continue;
        }
        let slope = sxy / sxx;
        estimates.push(-slope / (2.0 * k.ln() * (m0 - sigma) as f64 * l_gamma));
    }
    if estimates.is_empty() {
        None
    } else {
        Some(estimates.iter().sum::<f64>() / estimates.len() as f64)
    }
}
