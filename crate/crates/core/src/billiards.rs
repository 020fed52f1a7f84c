//! Billiard map, closed-polygon length functional, periodic-orbit search and
//! Poincaré data.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, Frame};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const COLLISION_GAP_REL: f64 = 1e-6;
pub const GRAZING_GUARD: f64 = 1e-8;
pub const NEWTON_TOL: f64 = 1e-12;
pub const DEGEN_TOL_REL: f64 = 1e-10;
pub const DEDUP_TOL: f64 = 1e-8;
pub const MONODROMY_STEP: f64 = 1e-5;

/// Vertex arclength parameters of a candidate polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonConfig {
    pub vertices: Vec<f64>,
}

impl PolygonConfig {
    pub fn new(vertices: Vec<f64>) -> Self {
        PolygonConfig { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Same polygon traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        PolygonConfig { vertices: v }
    }

    /// The `r`-fold concatenation.
    pub fn iterate(&self, r: usize) -> Self {
        let mut v = Vec::with_capacity(self.len() * r);
        for _ in 0..r {
            v.extend_from_slice(&self.vertices);
        }
        PolygonConfig { vertices: v }
    }
}

/// Boundary phase-space point: arclength and tangential momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardState {
    pub phi: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Elliptic,
    Hyperbolic,
    Degenerate,
}

/// A periodic reflecting ray with its Hessian and Poincaré data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub config: PolygonConfig,
    pub length: f64,
    pub hessian: Vec<Vec<f64>>,
    pub det_h: f64,
    pub b_offdiag: Vec<f64>,
    /// `det(I - P)` from `-det H / (b_1 ... b_M)`; `None` when degenerate.
    pub det_i_minus_p: Option<f64>,
    /// `det(I - P)` from the finite-difference monodromy.
    pub det_i_minus_p_monodromy: Option<f64>,
    pub monodromy: Option<[[f64; 2]; 2]>,
    pub stability: Stability,
    pub elliptic_angle: Option<f64>,
    pub inverse_hessian: Option<Vec<Vec<f64>>>,
    /// `(winding, links)`.
    pub rotation_number: (usize, usize),
    pub gradient_norm: f64,
}

/// Poincaré data of a non-degenerate orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareData {
    pub det_i_minus_p: f64,
    pub det_i_minus_p_monodromy: f64,
    pub monodromy: [[f64; 2]; 2],
    pub stability: Stability,
    pub elliptic_angle: Option<f64>,
    pub inverse_hessian: Vec<Vec<f64>>,
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

fn cyclic_gap(a: f64, b: f64, per: f64) -> f64 {
    let d = (a - b).rem_euclid(per);
    d.min(per - d)
}

fn check_config(curve: &BoundaryCurve, config: &PolygonConfig) -> Result<()> {
    let m = config.len();
    if m < 2 {
        return Err(Error::DomainError("polygon needs at least two vertices".into()));
    }
    let per = curve.total_length();
    let limit = COLLISION_GAP_REL * per;
    for j in 0..m {
        let gap = cyclic_gap(config.vertices[j], config.vertices[(j + 1) % m], per);
        if gap < limit {
            return Err(Error::SingularConfig { gap, limit });
        }
    }
    Ok(())
}

fn frames(curve: &BoundaryCurve, config: &PolygonConfig) -> Vec<Frame> {
    config.vertices.iter().map(|&phi| curve.eval_frame(phi)).collect()
}

/// Closed-polygon length `Σ_j |q(φ_{j+1}) - q(φ_j)|` with cyclic indexing.
pub fn length(curve: &BoundaryCurve, config: &PolygonConfig) -> Result<f64> {
    check_config(curve, config)?;
    let pts: Vec<[f64; 2]> = config.vertices.iter().map(|&p| curve.point(p)).collect();
    Ok(polygon_length(&pts))
}

fn polygon_length(pts: &[[f64; 2]]) -> f64 {
    let m = pts.len();
    (0..m).map(|j| norm(sub(pts[(j + 1) % m], pts[j]))).sum()
}

fn gradient_from_frames(fr: &[Frame]) -> Vec<f64> {
    let m = fr.len();
    (0..m)
        .map(|j| {
            let prev = fr[(j + m - 1) % m].point;
            let next = fr[(j + 1) % m].point;
            let q = fr[j].point;
            let u_in = sub(q, prev);
            let u_out = sub(next, q);
            dot(fr[j].tangent, u_in) / norm(u_in) - dot(fr[j].tangent, u_out) / norm(u_out)
        })
        .collect()
}

/// `∂L/∂φ_j = sin(angle of incoming chord) - sin(angle of outgoing chord)`
/// measured against the inward normal at `q(φ_j)`; zero exactly at Snell
/// polygons.
pub fn length_gradient(curve: &BoundaryCurve, config: &PolygonConfig) -> Result<Vec<f64>> {
    check_config(curve, config)?;
    Ok(gradient_from_frames(&frames(curve, config)))
}

/// Second derivatives of one chord length `d = |q_b - q_a|`:
/// `(∂²/∂φ_a², ∂²/∂φ_b², ∂²/∂φ_a∂φ_b)`.
fn chord_second_derivatives(a: &Frame, b: &Frame) -> (f64, f64, f64) {
    let diff = sub(b.point, a.point);
    let d = norm(diff);
    let u = [diff[0] / d, diff[1] / d];
    let ta = dot(a.tangent, u);
    let tb = dot(b.tangent, u);
    let daa = -a.curvature * dot(a.inward_normal, u) + (1.0 - ta * ta) / d;
    let dbb = b.curvature * dot(b.inward_normal, u) + (1.0 - tb * tb) / d;
    let dab = (-dot(a.tangent, b.tangent) + ta * tb) / d;
    (daa, dbb, dab)
}

fn hessian_from_frames(fr: &[Frame]) -> (DMatrix<f64>, Vec<f64>) {
    let m = fr.len();
    let mut h = DMatrix::zeros(m, m);
    let mut b = vec![0.0; m];
    for j in 0..m {
        let k = (j + 1) % m;
        let (daa, dbb, dab) = chord_second_derivatives(&fr[j], &fr[k]);
        h[(j, j)] += daa;
        h[(k, k)] += dbb;
        h[(j, k)] += dab;
        h[(k, j)] += dab;
        b[j] = dab;
    }
    (h, b)
}

/// Hessian of the closed length functional and the consecutive mixed
/// partials `b_j = ∂²|q(φ_{j+1}) - q(φ_j)| / ∂φ_j ∂φ_{j+1}`.
pub fn length_hessian(curve: &BoundaryCurve, config: &PolygonConfig) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_config(curve, config)?;
    let (h, b) = hessian_from_frames(&frames(curve, config));
    Ok((to_rows(&h), b))
}

fn to_rows(h: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..h.nrows()).map(|i| (0..h.ncols()).map(|j| h[(i, j)]).collect()).collect()
}

/// Gradient of the two-chord length through an interior point `x`,
/// `(x - q_1)/|x - q_1| + (x - q_M)/|x - q_M|`. Vanishes only when `x` lies
/// on the segment between the two boundary points.
pub fn interior_length_gradient(x: [f64; 2], q1: [f64; 2], qm: [f64; 2]) -> [f64; 2] {
    let a = sub(x, q1);
    let b = sub(x, qm);
    let (na, nb) = (norm(a), norm(b));
    [a[0] / na + b[0] / nb, a[1] / na + b[1] / nb]
}

/// Direction leaving the boundary at a frame with tangential momentum `p`.
fn launch_direction(f: &Frame, p: f64) -> [f64; 2] {
    let c = (1.0 - p * p).sqrt();
    [c * f.inward_normal[0] + p * f.tangent[0], c * f.inward_normal[1] + p * f.tangent[1]]
}

/// One step of the billiard map.
pub fn billiard_map(curve: &BoundaryCurve, state: BilliardState) -> Result<BilliardState> {
    if !(state.p.abs() < 1.0) {
        return Err(Error::GrazingRay(state.p.abs()));
    }
    let per = curve.total_length();
    let f0 = curve.eval_frame(state.phi);
    let v = launch_direction(&f0, state.p);
    let q = f0.point;
    // signed distance of boundary points from the ray line
    let g = |phi: f64| {
        let d = sub(curve.point(phi), q);
        v[0] * d[1] - v[1] * d[0]
    };
    let along = |phi: f64| dot(sub(curve.point(phi), q), v);
    let n = 96;
    let h = per / n as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut prev_s = state.phi + 1e-9 * per;
    let mut prev_g = g(prev_s);
    for i in 1..n {
        let s = state.phi + i as f64 * h;
        let gs = g(s);
        if gs == 0.0 || (gs > 0.0) != (prev_g > 0.0) {
            let root = bisect_secant(&g, prev_s, s, prev_g, gs);
            let t = along(root);
            if t > 1e-12 * per && best.map_or(true, |(_, tb)| t < tb) {
                best = Some((root, t));
            }
        }
        prev_s = s;
        prev_g = gs;
    }
    let (root, _) = best.ok_or(Error::NoIntersection)?;
    let f1 = curve.eval_frame(root);
    let p1 = dot(v, f1.tangent);
    if p1.abs() >= 1.0 - GRAZING_GUARD {
        return Err(Error::GrazingRay(p1.abs()));
    }
    Ok(BilliardState { phi: root.rem_euclid(per), p: p1 })
}

fn bisect_secant<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64, mut ga: f64, mut gb: f64) -> f64 {
    if gb == 0.0 {
        return b;
    }
    for _ in 0..200 {
        let mut m = b - gb * (b - a) / (gb - ga);
        if !(m > a.min(b) && m < a.max(b)) || (b - a).abs() > 1e-3 {
            m = 0.5 * (a + b);
        }
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    if ga.abs() < gb.abs() {
        a
    } else {
        b
    }
}

/// `β^n` applied to a state.
pub fn billiard_iterate(curve: &BoundaryCurve, mut state: BilliardState, n: usize) -> Result<BilliardState> {
    for _ in 0..n {
        state = billiard_map(curve, state)?;
    }
    Ok(state)
}

/// Jacobian of `β^n` in `(φ, p)`: centered differences at steps `h` and
/// `2h` combined by one Richardson step (error `O(h^4)`). Hyperbolic orbits
/// have large third derivatives, where plain centered differences at
/// `h = 1e-5` are off in the fourth digit.
pub fn monodromy(curve: &BoundaryCurve, state: BilliardState, n: usize, step: f64) -> Result<[[f64; 2]; 2]> {
    let a = centered_jacobian(curve, state, n, step)?;
    let b = centered_jacobian(curve, state, n, 2.0 * step)?;
    let mut j = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            j[r][c] = (4.0 * a[r][c] - b[r][c]) / 3.0;
        }
    }
    Ok(j)
}

fn centered_jacobian(curve: &BoundaryCurve, state: BilliardState, n: usize, step: f64) -> Result<[[f64; 2]; 2]> {
    let per = curve.total_length();
    let wrap = |d: f64| {
        let r = d.rem_euclid(per);
        if r > 0.5 * per {
            r - per
        } else {
            r
        }
    };
    let mut jac = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut plus = state;
        let mut minus = state;
        if col == 0 {
            plus.phi += step;
            minus.phi -= step;
        } else {
            plus.p += step;
            minus.p -= step;
        }
        let a = billiard_iterate(curve, plus, n)?;
        let b = billiard_iterate(curve, minus, n)?;
        jac[0][col] = wrap(a.phi - b.phi) / (2.0 * step);
        jac[1][col] = (a.p - b.p) / (2.0 * step);
    }
    Ok(jac)
}

fn degen_tol(h: &DMatrix<f64>) -> f64 {
    let scale = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    DEGEN_TOL_REL * scale.powi(h.nrows() as i32)
}

/// Poincaré data: `det(I - P)` from the Hessian identity and from the
/// finite-difference monodromy, stability type, elliptic angle and `H^{-1}`.
pub fn poincare_data(curve: &BoundaryCurve, config: &PolygonConfig) -> Result<PoincareData> {
    check_config(curve, config)?;
    let fr = frames(curve, config);
    let (h, b) = hessian_from_frames(&fr);
    let det_h = h.determinant();
    if det_h.abs() < degen_tol(&h) {
        return Err(Error::DegenerateOrbit(det_h.abs()));
    }
    let bprod: f64 = b.iter().product();
    let kt = -det_h / bprod;
    let m = config.len();
    let out = sub(fr[1 % m].point, fr[0].point);
    let p0 = dot(fr[0].tangent, out) / norm(out);
    let start = BilliardState { phi: config.vertices[0], p: p0 };
    let jac = monodromy(curve, start, m, MONODROMY_STEP)?;
    let det_fd = (1.0 - jac[0][0]) * (1.0 - jac[1][1]) - jac[0][1] * jac[1][0];
    // classification from the monodromy eigenvalues; the angle from the
    // Hessian identity via tr P = 2 - det(I - P), which is exact
    let tr = jac[0][0] + jac[1][1];
    let (stability, alpha) = if tr.abs() < 2.0 {
        (Stability::Elliptic, Some((0.5 * (2.0 - kt)).clamp(-1.0, 1.0).acos()))
    } else {
        (Stability::Hyperbolic, None)
    };
    let inv = h.clone().try_inverse().ok_or(Error::DegenerateOrbit(det_h.abs()))?;
    Ok(PoincareData {
        det_i_minus_p: kt,
        det_i_minus_p_monodromy: det_fd,
        monodromy: jac,
        stability,
        elliptic_angle: alpha,
        inverse_hessian: to_rows(&inv),
    })
}

/// Seeds for the orbit search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSpec {
    /// Uniform torus grid with `per_axis` points on each of the first
    /// `min(M, 3)` axes (remaining vertices equally spaced), plus rotation seeds.
    Grid { per_axis: usize, rotation_offsets: usize },
    /// Equally spaced vertices with every winding `p < M/2` coprime-or-not,
    /// at `offsets` starting positions.
    Rotation { offsets: usize },
    Explicit(Vec<PolygonConfig>),
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::Grid { per_axis: 6, rotation_offsets: 16 }
    }
}

fn rotation_seeds(per: f64, m: usize, offsets: usize, windings: &[usize]) -> Vec<PolygonConfig> {
    let mut out = Vec::new();
    for &w in windings {
        for o in 0..offsets {
            let phi0 = per * o as f64 / offsets as f64;
            out.push(PolygonConfig::new((0..m).map(|j| phi0 + per * (j * w) as f64 / m as f64).collect()));
        }
    }
    out
}

fn seeds_for(curve: &BoundaryCurve, m: usize, spec: &SeedSpec) -> Vec<PolygonConfig> {
    let per = curve.total_length();
    let all_windings: Vec<usize> = (1..=m / 2).collect();
    match spec {
        SeedSpec::Explicit(v) => v.clone(),
        SeedSpec::Rotation { offsets } => rotation_seeds(per, m, *offsets, &all_windings),
        SeedSpec::Grid { per_axis, rotation_offsets } => {
            let mut out = rotation_seeds(per, m, *rotation_offsets, &all_windings);
            let axes = m.min(3);
            let total = per_axis.pow(axes as u32);
            for idx in 0..total {
                let mut rest = idx;
                let mut v = Vec::with_capacity(m);
                for _ in 0..axes {
                    v.push(per * ((rest % per_axis) as f64 + 0.37) / *per_axis as f64);
                    rest /= per_axis;
                }
                let last = *v.last().unwrap();
                for j in axes..m {
                    v.push(last + per * (j + 1 - axes) as f64 / (m + 1 - axes) as f64 * 0.999);
                }
                out.push(PolygonConfig::new(v));
            }
            out
        }
    }
}

/// Newton's method on `∇L = 0` with an SVD pseudo-inverse and backtracking
/// on `‖∇L‖²`.
pub fn newton_refine(curve: &BoundaryCurve, seed: &PolygonConfig, newton_tol: f64) -> Result<PolygonConfig> {
    let mut cfg = seed.clone();
    check_config(curve, &cfg)?;
    let mut fr = frames(curve, &cfg);
    let mut g = gradient_from_frames(&fr);
    let gn = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut gnorm = gn(&g);
    for _ in 0..100 {
        if gnorm < newton_tol {
            return Ok(cfg);
        }
        let (h, _) = hessian_from_frames(&fr);
        let svd = h.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&DVector::from_vec(g.clone()), 1e-9 * smax.max(1e-300))
            .map_err(|e| Error::SolveFailure(e.to_string()))?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = PolygonConfig::new(cfg.vertices.iter().zip(step.iter()).map(|(v, d)| v - t * d).collect());
            if check_config(curve, &trial).is_ok() {
                let tfr = frames(curve, &trial);
                let tg = gradient_from_frames(&tfr);
                let tn = gn(&tg);
                if tn < gnorm * (1.0 - 1e-4 * t) || tn < newton_tol {
                    cfg = trial;
                    fr = tfr;
                    g = tg;
                    gnorm = tn;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if gnorm < newton_tol {
        Ok(cfg)
    } else {
        Err(Error::NoConvergence)
    }
}

fn winding(curve: &BoundaryCurve, cfg: &PolygonConfig) -> usize {
    let per = curve.total_length();
    let m = cfg.len();
    let total: f64 = (0..m)
        .map(|j| (cfg.vertices[(j + 1) % m] - cfg.vertices[j]).rem_euclid(per))
        .sum();
    (total / per).round() as usize
}

/// Canonical representative under cyclic shift and reversal.
fn canonical(curve: &BoundaryCurve, cfg: &PolygonConfig) -> PolygonConfig {
    let per = curve.total_length();
    let m = cfg.len();
    let norm_v: Vec<f64> = cfg.vertices.iter().map(|v| v.rem_euclid(per)).collect();
    let mut best: Option<Vec<f64>> = None;
    for rev in [false, true] {
        let mut v = norm_v.clone();
        if rev {
            v.reverse();
        }
        for s in 0..m {
            let rot: Vec<f64> = (0..m).map(|j| v[(j + s) % m]).collect();
            let better = match &best {
                None => true,
                Some(b) => rot.iter().zip(b).find(|(x, y)| (**x - **y).abs() > 1e-9).map_or(false, |(x, y)| x < y),
            };
            if better {
                best = Some(rot);
            }
        }
    }
    PolygonConfig::new(best.unwrap())
}

/// Assemble a `PeriodicOrbit` at a Snell polygon.
pub fn build_orbit(curve: &BoundaryCurve, cfg: &PolygonConfig) -> Result<PeriodicOrbit> {
    check_config(curve, cfg)?;
    let fr = frames(curve, cfg);
    let g = gradient_from_frames(&fr);
    let (h, b) = hessian_from_frames(&fr);
    let det_h = h.determinant();
    let pts: Vec<[f64; 2]> = fr.iter().map(|f| f.point).collect();
    let mut orbit = PeriodicOrbit {
        config: cfg.clone(),
        length: polygon_length(&pts),
        hessian: to_rows(&h),
        det_h,
        b_offdiag: b,
        det_i_minus_p: None,
        det_i_minus_p_monodromy: None,
        monodromy: None,
        stability: Stability::Degenerate,
        elliptic_angle: None,
        inverse_hessian: None,
        rotation_number: (winding(curve, cfg), cfg.len()),
        gradient_norm: g.iter().map(|v| v * v).sum::<f64>().sqrt(),
    };
    match poincare_data(curve, cfg) {
        Ok(pd) => {
            orbit.det_i_minus_p = Some(pd.det_i_minus_p);
            orbit.det_i_minus_p_monodromy = Some(pd.det_i_minus_p_monodromy);
            orbit.monodromy = Some(pd.monodromy);
            orbit.stability = pd.stability;
            orbit.elliptic_angle = pd.elliptic_angle;
            orbit.inverse_hessian = Some(pd.inverse_hessian);
        }
        Err(Error::DegenerateOrbit(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(orbit)
}

/// All distinct `M`-link periodic orbits reached from the seeds, sorted by
/// length. Degenerate orbits are returned with `Stability::Degenerate`.
pub fn find_periodic_orbits(
    curve: &BoundaryCurve,
    m: usize,
    seeds: &SeedSpec,
    newton_tol: f64,
) -> Result<Vec<PeriodicOrbit>> {
    if m < 2 {
        return Err(Error::DomainError("orbit search needs M >= 2".into()));
    }
    let seeds = seeds_for(curve, m, seeds);
    let mut found: Vec<PolygonConfig> = seeds
        .par_iter()
        .filter_map(|s| newton_refine(curve, s, newton_tol).ok())
        .map(|c| canonical(curve, &c))
        .collect();
    found.sort_by(|a, b| a.vertices.partial_cmp(&b.vertices).unwrap());
    let mut unique: Vec<(f64, PolygonConfig)> = Vec::new();
    for c in found {
        let len = length(curve, &c)?;
        let dup = unique.iter().any(|(l, u)| {
            (l - len).abs() < DEDUP_TOL * len.max(1.0)
                && u.vertices.iter().zip(&c.vertices).all(|(a, b)| cyclic_gap(*a, *b, curve.total_length()) < 1e-6)
        });
        if !dup {
            unique.push((len, c));
        }
    }
    if unique.is_empty() {
        return Err(Error::NoConvergence);
    }
    unique.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    unique.iter().map(|(_, c)| build_orbit(curve, c)).collect()
}

/// Single orbit search: the longest orbit found from the seeds (the
/// Birkhoff maximizer when the seeds cover a rotation class).
pub fn find_periodic_orbit(
    curve: &BoundaryCurve,
    m: usize,
    seeds: &SeedSpec,
    newton_tol: f64,
) -> Result<PeriodicOrbit> {
    let mut all = find_periodic_orbits(curve, m, seeds, newton_tol)?;
    Ok(all.pop().unwrap())
}

/// Entry of the length spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrumEntry {
    pub length: f64,
    /// `(winding, links)`; `(m, 0)` marks the boundary length `m·perimeter`.
    pub rotation_number: (usize, usize),
    pub orbit: Option<PeriodicOrbit>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lengths of periodic orbits up to `l_max` for rotation classes `(p, q)`
/// with coprime `p ≤ q/2` and `q ≤ q_max`, plus boundary lengths
/// `m·perimeter`. Lengths accumulate at multiples of the perimeter, so
/// `q_max` bounds the enumeration.
pub fn enumerate_length_spectrum(curve: &BoundaryCurve, l_max: f64, q_max: usize) -> Result<Vec<LengthSpectrumEntry>> {
    curve.require_convex()?;
    let per = curve.total_length();
    let mut entries = Vec::new();
    for q in 2..=q_max {
        for p in 1..=q / 2 {
            if gcd(p, q) != 1 {
                continue;
            }
            let seeds = rotation_seeds(per, q, 24, &[p]);
            let mut orbits: Vec<PolygonConfig> = seeds
                .par_iter()
                .filter_map(|s| newton_refine(curve, s, NEWTON_TOL).ok())
                .filter(|c| winding(curve, c) == p)
                .map(|c| canonical(curve, &c))
                .collect();
            orbits.sort_by(|a, b| a.vertices.partial_cmp(&b.vertices).unwrap());
            let mut kept: Vec<f64> = Vec::new();
            for c in orbits {
                let len = length(curve, &c)?;
                if len > l_max || kept.iter().any(|l| (l - len).abs() < DEDUP_TOL * len) {
                    continue;
                }
                kept.push(len);
                entries.push(LengthSpectrumEntry { length: len, rotation_number: (p, q), orbit: Some(build_orbit(curve, &c)?) });
            }
        }
    }
    let mut m = 1;
    while m as f64 * per <= l_max {
        entries.push(LengthSpectrumEntry { length: m as f64 * per, rotation_number: (m, 0), orbit: None });
        m += 1;
    }
    entries.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    Ok(entries)
}
