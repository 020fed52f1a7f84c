//! Oscillatory integrals of periodic reflecting rays and their wave invariants.
//!
//! Near the vertices `V_i` of a periodic orbit the boundary is written as
//! `q_i(x) = V_i + x T_i + f_i(x) ν_i` with the local graph `f_i`. The
//! principal term of `Tr N^M` localized at the orbit is
//!
//! `C_M κ^{M/2} ∫ e^{iκΣ d_i} Π_i (Δ_i·ñ_{i+1}) d_i^{-3/2} â(κ d_i) dx`,
//!
//! where `Δ_i = q_{i+1} − q_i`, `ñ = ν − f′T` (the unnormalized inward
//! normal, whose length cancels the arclength Jacobian), `â = a_1/c_0` the
//! normalized WKB amplitude of `H_1` and `C_M = (−(i/2) c_0)^M`.

use super::poly::{Basis, MPoly};
use super::stationary::{hessian_info, stationary_phase, OscillatoryIntegralJet};
use crate::billiards::{PeriodicOrbit, PolygonConfig, Stability};
use crate::geometry::{BoundaryCurve, Frame};
use crate::series::Series;
use crate::specfun::wkb_coefficients;
use crate::trace::TraceWindow;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// Frame and local graph of the boundary at one reflection point.
#[derive(Debug, Clone)]
pub struct VertexJet {
    pub frame: Frame,
    /// `f` with `f(0) = f′(0) = 0`.
    pub graph: Series,
}

/// Vertex jets of a polygon, in traversal order.
#[derive(Debug, Clone)]
pub struct OrbitGeometry {
    pub vertices: Vec<VertexJet>,
}

impl OrbitGeometry {
    pub fn from_config(curve: &BoundaryCurve, config: &PolygonConfig, order: usize) -> Result<Self> {
        let vertices = config
            .vertices
            .iter()
            .map(|&phi| {
                let graph = curve.local_graph(phi, order).map_err(|e| match e {
                    Error::OrderUnavailable { requested, available } => {
                        Error::JetOrderUnavailable(format!("vertex jet order {requested} > {available}"))
                    }
                    other => other,
                })?;
                Ok(VertexJet { frame: curve.eval_frame(phi), graph })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OrbitGeometry { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Add `delta` to `f^{(n)}(0)` at vertex `i`.
    pub fn shift_jet(&mut self, i: usize, n: usize, delta: f64) {
        let g = &mut self.vertices[i].graph;
        if g.c.len() <= n {
            g.c.resize(n + 1, 0.0);
        }
        let fact: f64 = (1..=n).map(|v| v as f64).product();
        g.c[n] += delta / fact;
    }

    pub fn reversed(&self) -> Self {
        // reversing the traversal flips the tangent, so x → −x in each graph
        let vertices = self
            .vertices
            .iter()
            .rev()
            .map(|v| {
                let mut f = v.frame;
                f.tangent = [-f.tangent[0], -f.tangent[1]];
                let c = v.graph.c.iter().enumerate().map(|(n, a)| if n % 2 == 1 { -a } else { *a }).collect();
                VertexJet { frame: f, graph: Series::from_coeffs(c) }
            })
            .collect();
        OrbitGeometry { vertices }
    }

    /// Tangential momentum `p_i` and chord length leaving vertex `i`.
    fn outgoing(&self, i: usize) -> (f64, f64) {
        let a = &self.vertices[i].frame;
        let b = &self.vertices[(i + 1) % self.len()].frame;
        let d = [b.point[0] - a.point[0], b.point[1] - a.point[1]];
        let len = d[0].hypot(d[1]);
        ((d[0] * a.tangent[0] + d[1] * a.tangent[1]) / len, len)
    }
}

/// Phase `Σ d_i` and amplitude series `Σ_m κ^{-m} U_m` of the principal term
/// in the local graph coordinates `x_i`, truncated at total degree `max_deg`.
pub fn orbit_phase_amplitude(geom: &OrbitGeometry, max_deg: usize, amp_terms: usize) -> (MPoly, Vec<MPoly>) {
    let m = geom.len();
    let basis = Basis::new(m, max_deg);
    let c = |v: f64| C64::new(v, 0.0);
    let mut pts = Vec::with_capacity(m);
    let mut nrm = Vec::with_capacity(m);
    for (i, v) in geom.vertices.iter().enumerate() {
        let f: Vec<C64> = v.graph.truncate(max_deg).c.iter().map(|&a| c(a)).collect();
        let fp: Vec<C64> = v.graph.truncate(max_deg + 1).derivative().c.iter().map(|&a| c(a)).collect();
        let fx = MPoly::univariate(&basis, i, &f);
        let fpx = MPoly::univariate(&basis, i, &fp);
        let x = MPoly::var(&basis, i);
        let fr = &v.frame;
        let q: [MPoly; 2] = std::array::from_fn(|k| {
            MPoly::constant(&basis, c(fr.point[k]))
                .add(&x.scale(c(fr.tangent[k])))
                .add(&fx.scale(c(fr.inward_normal[k])))
        });
        let n: [MPoly; 2] = std::array::from_fn(|k| {
            MPoly::constant(&basis, c(fr.inward_normal[k])).sub(&fpx.scale(c(fr.tangent[k])))
        });
        pts.push(q);
        nrm.push(n);
    }
    let chat: Vec<C64> = {
        let w = wkb_coefficients(1, amp_terms);
        w.iter().map(|v| v / w[0]).collect()
    };
    let mut phase = MPoly::zero(&basis);
    let mut amp = vec![MPoly::constant(&basis, c(1.0))];
    amp.resize(amp_terms, MPoly::zero(&basis));
    for i in 0..m {
        let j = (i + 1) % m;
        let dx = pts[j][0].sub(&pts[i][0]);
        let dy = pts[j][1].sub(&pts[i][1]);
        let d2 = dx.mul(&dx).add(&dy.mul(&dy));
        let d = d2.sqrt();
        let inv_d = d2.powf(-0.5);
        phase = phase.add(&d);
        let dot = dx.mul(&nrm[j][0]).add(&dy.mul(&nrm[j][1]));
        let link0 = dot.mul(&d2.powf(-0.75));
        // link amplitude series Σ_s ĉ_s d^{-s} κ^{-s}
        let mut link = Vec::with_capacity(amp_terms);
        let mut pw = link0.clone();
        for ch in chat.iter().take(amp_terms) {
            link.push(pw.scale(*ch));
            pw = pw.mul(&inv_d);
        }
        let mut next = vec![MPoly::zero(&basis); amp_terms];
        for (a, ua) in amp.iter().enumerate() {
            for (b, lb) in link.iter().enumerate().take(amp_terms - a) {
                next[a + b] = next[a + b].add(&ua.mul(lb));
            }
        }
        amp = next;
    }
    (phase, amp)
}

fn basis_degree(r_order: usize) -> usize {
    (6 * r_order).max(2 * r_order + 2)
}

/// `C_M = (−(i/2) c_0)^M`, with `c_0` the leading WKB coefficient of `H_1`.
fn c_m(m: usize) -> C64 {
    let c0 = wkb_coefficients(1, 1)[0];
    (C64::new(0.0, -0.5) * c0).powu(m as u32)
}

/// φ-only jet at one critical point: its stationary-phase expansion is the
/// contribution of that point to `Tr N^M` (the `κ^{M/2}` prefactor enters as
/// symbol order `−M/2`).
pub fn orbit_jet(geom: &OrbitGeometry, r_order: usize) -> Result<OscillatoryIntegralJet> {
    let m = geom.len();
    let (phase, amp) = orbit_phase_amplitude(geom, basis_degree(r_order), r_order + 1);
    let cm = c_m(m);
    let amp = amp.iter().map(|u| u.scale(cm)).collect();
    OscillatoryIntegralJet::new(phase, amp, -(m as f64) / 2.0)
}

/// Full `(t, μ, φ_1..φ_{rM})` jet of the orbit integral.
///
/// The phase is `(1−μ)t + μℒ(φ)` expanded at `μ = 1`, `t = rL_γ`. The
/// amplitude is that of [`orbit_jet`] divided by `2π` with one more power of
/// `k`, so integrating out `(t, μ)` (which contributes `2π/k`) reproduces the
/// φ-only expansion exactly. The window must have `rL_γ` on its plateau,
/// where `ρ̂ ≡ 1`.
pub fn build_orbit_integral(
    curve: &BoundaryCurve,
    orbit: &PeriodicOrbit,
    r: usize,
    window: &TraceWindow,
    r_order: usize,
) -> Result<OscillatoryIntegralJet> {
    if orbit.stability == Stability::Degenerate {
        return Err(Error::DegenerateOrbit(orbit.det_h.abs()));
    }
    let lr = r as f64 * orbit.length;
    if (window.rho_hat(lr) - 1.0).abs() > 1e-14 {
        return Err(Error::DomainError(format!("length {lr} is not on the window plateau")));
    }
    let cfg = orbit.config.iterate(r);
    let geom = OrbitGeometry::from_config(curve, &cfg, 2 * r_order + 2)?;
    let inner = orbit_jet(&geom, r_order)?;
    let m = geom.len();
    let deg = basis_degree(r_order);
    let basis = Basis::new(m + 2, deg);
    let lift = |p: &MPoly| -> MPoly {
        let mut out = MPoly::zero(&basis);
        for (e, v) in p.basis.exps.iter().zip(&p.c) {
            let mut f = [0u8; super::poly::MAX_VARS];
            f[2..2 + m].copy_from_slice(&e[..m]);
            if let Some(i) = basis.find(&f) {
                out.c[i] = *v;
            }
        }
        out
    };
    let l_phi = lift(&inner.phase);
    let t = MPoly::var(&basis, 0);
    let mu = MPoly::var(&basis, 1);
    let l0 = MPoly::constant(&basis, C64::new(inner.critical_value, 0.0));
    let phase = l_phi.add(&mu.mul(&l_phi.sub(&l0))).sub(&mu.mul(&t)).truncate(deg);
    let scale = C64::new(1.0 / (2.0 * std::f64::consts::PI), 0.0);
    let amp = inner.amp.iter().map(|u| lift(u).scale(scale)).collect();
    OscillatoryIntegralJet::new(phase, amp, inner.symbol_order - 1.0)
}

/// Near-diagonal symbol coefficient `s` of a visit with tangential momentum
/// `p`: `N_0` acts on the orbit as multiplication by `s/κ + O(κ^{-2})`.
pub fn n0_leading_symbol(curvature: f64, p: f64) -> C64 {
    C64::new(0.0, 0.5 * curvature * (1.0 - p * p).powf(-1.5))
}

/// Wave invariants `B_j`, `j = 1..J`, of `γ^r` (and of `γ^{-r}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveInvariantTable {
    pub orbit_id: String,
    pub r: usize,
    /// `(j, B_{γ^r,j} + B_{γ^{-r},j})`.
    pub entries: Vec<(usize, C64)>,
    /// `B_{γ^r,j}` alone.
    pub forward: Vec<C64>,
    /// `B_{γ^{-r},j}` alone; equal to `forward` for a bouncing ball, whose
    /// reversal is a relabelling of the same critical points.
    pub reverse: Vec<C64>,
    pub metadata: WaveInvariantMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveInvariantMeta {
    pub tau: f64,
    pub delta: f64,
    /// Number of reflections `M = r m`.
    pub m_used: usize,
    pub length: f64,
    pub det_hessian: f64,
}

/// Principal (`σ ≡ 1`) term alone: `B_j` of the `M`-th multiple-reflection
/// term, without near-diagonal insertions.
pub fn principal_invariants(geom: &OrbitGeometry, rotations: usize, j_max: usize) -> Result<Vec<C64>> {
    if j_max == 0 {
        return Ok(Vec::new());
    }
    let m = geom.len();
    let jet = orbit_jet(geom, j_max - 1)?;
    let sp = stationary_phase(&jet, 1.0, j_max - 1)?;
    let s = jet.critical_value;
    let t: Vec<C64> = sp.coefficients.iter().map(|a| a * rotations as f64).collect();
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let pre = -sign / (2.0 * m as f64);
    let i = C64::i();
    Ok((0..j_max)
        .map(|n| {
            let prev = if n == 0 { C64::new(0.0, 0.0) } else { t[n - 1] * (n as f64 - 1.0) };
            -2.0 * i * pre * (i * s * t[n] - prev)
        })
        .collect())
}

/// `Σ_v s_v` over the reflections, see [`n0_leading_symbol`].
pub fn n0_visit_sum(geom: &OrbitGeometry) -> C64 {
    (0..geom.len())
        .map(|v| {
            let (p, _) = geom.outgoing(v);
            n0_leading_symbol(geom.vertices[v].graph.c.get(2).copied().unwrap_or(0.0) * 2.0, p)
        })
        .sum()
}

/// `B_j`, `j = 1..=j_max`, from one orientation: the principal term with the
/// first-order near-diagonal correction `D → D (1 − Σ_v s_v/κ)`.
pub fn invariants_from_geometry(geom: &OrbitGeometry, rotations: usize, j_max: usize) -> Result<Vec<C64>> {
    let mut b = principal_invariants(geom, rotations, j_max)?;
    let sv = n0_visit_sum(geom);
    for j in (1..b.len()).rev() {
        let prev = b[j - 1];
        b[j] -= sv * prev;
    }
    Ok(b)
}

/// Wave invariants of the `r`-th iterate of a non-degenerate orbit.
pub fn wave_invariants(
    curve: &BoundaryCurve,
    orbit: &PeriodicOrbit,
    r: usize,
    j_max: usize,
    tau: f64,
    delta: f64,
) -> Result<WaveInvariantTable> {
    if orbit.stability == Stability::Degenerate || r == 0 {
        return Err(Error::DegenerateOrbit(orbit.det_h.abs()));
    }
    let mcount = orbit.config.len();
    let cfg = orbit.config.iterate(r);
    let order = (2 * j_max).max(2);
    let geom = OrbitGeometry::from_config(curve, &cfg, order)?;
    let info = hessian_info(orbit_jet(&geom, 0)?.phase.hessian())?;
    let forward = invariants_from_geometry(&geom, mcount, j_max)?;
    let (reverse, entries) = if mcount == 2 {
        (forward.clone(), forward.iter().enumerate().map(|(j, v)| (j + 1, *v)).collect())
    } else {
        let rev = invariants_from_geometry(&geom.reversed(), mcount, j_max)?;
        let e = forward.iter().zip(&rev).enumerate().map(|(j, (a, b))| (j + 1, a + b)).collect();
        (rev, e)
    };
    Ok(WaveInvariantTable {
        orbit_id: format!("{:?}", orbit.rotation_number),
        r,
        entries,
        forward,
        reverse,
        metadata: WaveInvariantMeta {
            tau,
            delta,
            m_used: geom.len(),
            length: r as f64 * orbit.length,
            det_hessian: info.det,
        },
    })
}
