//! Bouncing-ball invariants: the explicit `f^{(2j)}` / `f^{(3)} f^{(2j−1)}`
//! formula and its extraction from the pipeline by finite differences.
//!
//! The pipeline invariants are normalized as
//! `β_j = N_j B_j / B_1`, `N_j = −2^{j−1} j! / i^{j+1}`, where `B_j` is the
//! coefficient of `κ^{1−j}`. With this normalization the `f^{(2j)}(0)`
//! coefficient of `β_j` is `Σ_visits (h^{ii})^j` exactly.
//!
//! Jets `f_±` are inward graphs written in the tangent coordinate of the
//! first vertex (`+`). The second vertex's own frame runs the other way, so
//! its odd local derivatives change sign. In this convention a domain
//! symmetric under the reflection exchanging the vertices has `f_+ = f_−`.

use super::orbit::{invariants_from_geometry, orbit_jet, OrbitGeometry};
use super::stationary::hessian_info;
use crate::billiards::PeriodicOrbit;
use crate::geometry::BoundaryCurve;
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C64 = Complex64;

/// The two readings of the denominator `2 − 2cos α/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleReading {
    /// `2 − (2 cos α)/2 = 2 − cos α`.
    HalvedCosine,
    /// `2 − 2 cos(α/2)`.
    CosineOfHalf,
}

impl AngleReading {
    pub fn denominator(self, alpha: f64) -> f64 {
        match self {
            AngleReading::HalvedCosine => 2.0 - alpha.cos(),
            AngleReading::CosineOfHalf => 2.0 - 2.0 * (0.5 * alpha).cos(),
        }
    }
}

/// Literal evaluation of
/// `r{2(h¹¹)^j f^{(2j)} + [2(h¹¹)^j / D(α) + (h¹¹)^{j−2} Σ_q (h^{1q})³] f‴ f^{(2j−1)}}`.
#[allow(clippy::too_many_arguments)]
pub fn wtf_eval(
    r: usize,
    j: usize,
    h11: f64,
    h1q: &[f64],
    alpha: f64,
    reading: AngleReading,
    f3: f64,
    f2j: f64,
    f2jm1: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return Err(Error::DegenerateAngle(alpha));
    }
    let d = reading.denominator(alpha);
    if d.abs() < 1e-14 {
        return Err(Error::DegenerateAngle(alpha));
    }
    let hj = h11.powi(j as i32);
    let mut out = 2.0 * hj * f2j;
    let cross = f3 * f2jm1;
    if cross != 0.0 {
        let cubes: f64 = h1q.iter().map(|h| h * h * h).sum();
        out += (2.0 * hj / d + h11.powi(j as i32 - 2) * cubes) * cross;
    }
    Ok(r as f64 * out)
}

/// `N_j = −2^{j−1} j! / i^{j+1}`.
pub fn wtf_normalization(j: usize) -> C64 {
    let fact: f64 = (1..=j).map(|v| v as f64).product();
    -2f64.powi(j as i32 - 1) * fact / C64::i().powu(j as u32 + 1)
}

/// Linear coefficients of `β_j` in the top jets at the two vertices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThmSumCoefficients {
    pub j: usize,
    pub r: usize,
    pub a_plus: C64,
    pub a_minus: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    /// Largest `|F(h) + F(−h) − 2F(0)| / |F(h) − F(−h)|` over the four stencils.
    pub nonlinearity: f64,
    pub inverse_hessian: Vec<Vec<f64>>,
}

/// Bouncing-ball data for the extraction.
pub struct BouncingBall {
    pub geom: OrbitGeometry,
    pub r: usize,
    pub b1: C64,
}

impl BouncingBall {
    pub fn new(curve: &BoundaryCurve, orbit: &PeriodicOrbit, r: usize, j_max: usize) -> Result<Self> {
        if orbit.config.len() != 2 {
            return Err(Error::DomainError(format!("{}-link orbit is not a bouncing ball", orbit.config.len())));
        }
        let geom = OrbitGeometry::from_config(curve, &orbit.config.iterate(r), (2 * j_max).max(2))?;
        let b1 = invariants_from_geometry(&geom, 2, 1)?[0];
        Ok(BouncingBall { geom, r, b1 })
    }

    pub fn inverse_hessian(&self) -> Result<Vec<Vec<f64>>> {
        let info = hessian_info(orbit_jet(&self.geom, 0)?.phase.hessian())?;
        let m = self.geom.len();
        Ok((0..m).map(|a| (0..m).map(|b| info.inv[(a, b)]).collect()).collect())
    }

    /// `β_j` after adding `t·w_±` to `f_±^{(n)}`, with `w = (w_plus, w_minus)`
    /// in the common coordinate.
    pub fn beta(&self, j: usize, n: usize, w: (f64, f64), t: f64) -> Result<C64> {
        let mut g = self.geom.clone();
        let odd = if n % 2 == 1 { -1.0 } else { 1.0 };
        for i in 0..g.len() {
            let d = if i % 2 == 0 { w.0 } else { odd * w.1 };
            if d != 0.0 {
                g.shift_jet(i, n, t * d);
            }
        }
        let b = invariants_from_geometry(&g, 2, j)?;
        Ok(wtf_normalization(j) * b[j - 1] / self.b1)
    }

    /// First derivative in `t` by the 5-point stencil, and the relative
    /// curvature of the response.
    pub fn derivative(&self, j: usize, n: usize, w: (f64, f64), h: f64) -> Result<(C64, f64)> {
        let f = |t: f64| self.beta(j, n, w, t);
        let (p1, m1, p2, m2, z) = (f(h)?, f(-h)?, f(2.0 * h)?, f(-2.0 * h)?, f(0.0)?);
        let d = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
        let nl = (p1 + m1 - 2.0 * z).norm() / (p1 - m1).norm().max(1e-300);
        Ok((d, nl))
    }

    /// Coefficient of `t²` along the direction `w` in the jets of order `n`.
    pub fn quadratic(&self, j: usize, n: usize, w: (f64, f64), h: f64) -> Result<C64> {
        let f = |t: f64| self.beta(j, n, w, t);
        let v = (-f(2.0 * h)? + 16.0 * f(h)? - 30.0 * f(0.0)? + 16.0 * f(-h)? - f(-2.0 * h)?) / (12.0 * h * h);
        Ok(0.5 * v)
    }
}

/// Step used in the jet finite differences.
pub const JET_STEP: f64 = 1e-3;

/// `a_{j,r,±}` (coefficients of `f_±^{(2j)}`) and `b_{j,r,±}` (of
/// `f_±^{(2j−1)}`) of the normalized invariant `β_j` of `γ^r`.
pub fn thm_sum_v_extract(curve: &BoundaryCurve, orbit: &PeriodicOrbit, r: usize, j: usize) -> Result<ThmSumCoefficients> {
    if j == 0 {
        return Err(Error::RangeError("j starts at 1".into()));
    }
    let bb = BouncingBall::new(curve, orbit, r, j)?;
    let (a_plus, n1) = bb.derivative(j, 2 * j, (1.0, 0.0), JET_STEP)?;
    let (a_minus, n2) = bb.derivative(j, 2 * j, (0.0, 1.0), JET_STEP)?;
    // f′(0) = 0 in the local frame, so there is no odd top jet for j = 1
    let ((b_plus, n3), (b_minus, n4)) = if j == 1 {
        ((C64::new(0.0, 0.0), 0.0), (C64::new(0.0, 0.0), 0.0))
    } else {
        (
            bb.derivative(j, 2 * j - 1, (1.0, 0.0), JET_STEP)?,
            bb.derivative(j, 2 * j - 1, (0.0, 1.0), JET_STEP)?,
        )
    };
    Ok(ThmSumCoefficients {
        j,
        r,
        a_plus,
        a_minus,
        b_plus,
        b_minus,
        nonlinearity: [n1, n2, n3, n4].into_iter().fold(0.0, f64::max),
        inverse_hessian: bb.inverse_hessian()?,
    })
}

/// One candidate reading of the cross-term denominator and how well it
/// matches the measured `f‴ f^{(2j−1)}` coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleCandidate {
    pub reading: AngleReading,
    /// Which angle is substituted for `α`: `"theta/2pi"`, `"theta"`, `"r*theta"`.
    pub alpha_convention: String,
    pub alpha: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

/// Measured cross coefficient for `j = 2` and the candidate readings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleReport {
    pub r: usize,
    pub j: usize,
    /// `½ ∂²β_j/∂s²` with `s = f_+‴ = f_−‴`.
    pub measured: C64,
    pub candidates: Vec<AngleCandidate>,
    /// Index into `candidates` of the best match.
    pub best: usize,
}

/// Measure the `f‴ f^{(2j−1)}` coefficient (`j = 2`, where it is `f‴²`) and
/// compare it with both denominator readings and several angle conventions.
pub fn angle_reading_report(curve: &BoundaryCurve, orbit: &PeriodicOrbit, r: usize) -> Result<AngleReport> {
    let theta = orbit.elliptic_angle.ok_or(Error::DegenerateAngle(f64::NAN))?;
    let j = 2;
    let bb = BouncingBall::new(curve, orbit, r, j)?;
    let measured = bb.quadratic(j, 3, (1.0, 1.0), JET_STEP)?;
    let hinv = bb.inverse_hessian()?;
    let h11 = hinv[0][0];
    let h1q: Vec<f64> = hinv[0].clone();
    let mut candidates = Vec::new();
    for reading in [AngleReading::HalvedCosine, AngleReading::CosineOfHalf] {
        for (name, alpha) in [("theta/2pi", theta / (2.0 * PI)), ("theta", theta), ("r*theta", r as f64 * theta)] {
            let alpha = alpha.rem_euclid(2.0 * PI);
            let Ok(predicted) = wtf_eval(r, j, h11, &h1q, alpha, reading, 1.0, 0.0, 1.0) else {
                continue;
            };
            let rel_err = (measured - predicted).norm() / predicted.abs().max(1e-300);
            candidates.push(AngleCandidate { reading, alpha_convention: name.into(), alpha, predicted, rel_err });
        }
    }
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.rel_err.total_cmp(&b.1.rel_err))
        .map(|(i, _)| i)
        .ok_or(Error::DegenerateAngle(theta))?;
    Ok(AngleReport { r, j, measured, candidates, best })
}

/// One row of the pipeline / formula / trace-fit comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    /// `"f2j"` for the `f^{(2j)}` coefficient, `"f3_f2jm1:<reading>:<alpha>"`
    /// for a cross-term candidate, `"B1"` for the leading invariant.
    pub term: String,
    pub j: usize,
    pub r: usize,
    pub pipeline: f64,
    pub wtf: Option<f64>,
    pub trace_fit: Option<f64>,
    pub rel_err: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Comparison rows for a bouncing ball: the `f^{(2j)}` coefficient against
/// `2r(h^{11})^j` for every `(j, r)`, the `j = 2` cross-term candidates for
/// every `r`, and optionally `|B_1|` against a trace fit (`(r, |B_1|)` pairs).
pub fn comparison_report(
    curve: &BoundaryCurve,
    orbit: &PeriodicOrbit,
    r_list: &[usize],
    j_list: &[usize],
    trace_b1: &[(usize, f64)],
) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for &r in r_list {
        for &j in j_list {
            let t = thm_sum_v_extract(curve, orbit, r, j)?;
            let h11 = t.inverse_hessian[0][0];
            let predicted = 2.0 * r as f64 * h11.powi(j as i32);
            let measured = (t.a_plus + t.a_minus).re;
            rows.push(ComparisonRow {
                term: "f2j".into(),
                j,
                r,
                pipeline: measured,
                wtf: Some(predicted),
                trace_fit: None,
                rel_err: rel(measured, predicted),
            });
        }
        if orbit.elliptic_angle.is_some() {
            let rep = angle_reading_report(curve, orbit, r)?;
            for c in &rep.candidates {
                let reading = match c.reading {
                    AngleReading::HalvedCosine => "halved_cosine",
                    AngleReading::CosineOfHalf => "cosine_of_half",
                };
                rows.push(ComparisonRow {
                    term: format!("f3_f2jm1:{reading}:{}", c.alpha_convention),
                    j: rep.j,
                    r,
                    pipeline: rep.measured.re,
                    wtf: Some(c.predicted),
                    trace_fit: None,
                    rel_err: c.rel_err,
                });
            }
        }
    }
    for &(r, fit) in trace_b1 {
        let geom = OrbitGeometry::from_config(curve, &orbit.config.iterate(r), 2)?;
        let b1 = invariants_from_geometry(&geom, 2, 1)?[0].norm();
        rows.push(ComparisonRow { term: "B1".into(), j: 1, r, pipeline: b1, wtf: None, trace_fit: Some(fit), rel_err: rel(fit, b1) });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_examples() {
        let h = [0.5, 0.2];
        let a = 1.0;
        assert_eq!(wtf_eval(1, 2, 0.5, &h, a, AngleReading::CosineOfHalf, 0.0, 0.0, 0.0).unwrap(), 0.0);
        let v = wtf_eval(1, 2, 0.5, &h, a, AngleReading::CosineOfHalf, 0.0, 1.0, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!(matches!(
            wtf_eval(1, 2, 0.5, &h, 0.0, AngleReading::HalvedCosine, 1.0, 1.0, 1.0),
            Err(Error::DegenerateAngle(_))
        ));
    }

    #[test]
    fn linear_and_homogeneous() {
        let h = [0.3, -0.1, 0.05, 0.2];
        let e = |r, f2j, f2jm1| wtf_eval(r, 3, 0.3, &h, 1.1, AngleReading::HalvedCosine, 0.7, f2j, f2jm1).unwrap();
        assert!((e(1, 2.0, 0.0) - 2.0 * e(1, 1.0, 0.0)).abs() < 1e-14);
        assert!((e(1, 0.0, 3.0) - 3.0 * e(1, 0.0, 1.0)).abs() < 1e-14);
        assert!((e(2, 1.0, 0.0) - 2.0 * e(1, 1.0, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn normalization_constants() {
        assert!((wtf_normalization(1) - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((wtf_normalization(2) - C64::new(0.0, -4.0)).norm() < 1e-15);
    }
}
