//! Acceptance checks, one line per criterion.
//!
//! Failing criteria are reported, not hidden. The process exits non-zero on a
//! failure only when `WAVETRACE_ACCEPTANCE_STRICT` is set.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::time::{Duration, Instant};
use wavetrace::billiards::*;
use wavetrace::geometry::BoundaryCurve;
use wavetrace::layers::*;
use wavetrace::quadrature::integrate_adaptive;
use wavetrace::specfun::hankel01;
use wavetrace::trace::*;
use wavetrace::waveinv::orbit::{principal_invariants, OrbitGeometry};
use wavetrace::waveinv::wtf::{angle_reading_report, thm_sum_v_extract};
use wavetrace::waveinv::*;
use wavetrace::{Scaling, SpectralParameter};

const I: C64 = C64 { re: 0.0, im: 1.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Result<Outcome, String> {
    Ok(Outcome { pass, detail })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn main() {
    let checks: [(&str, Duration, Check); 9] = [
        ("orbit finder on the circle", Duration::from_secs(5), orbit_finder),
        ("Poincare identity on the ellipse", Duration::from_secs(10), poincare_identity),
        ("disc boundary operator", Duration::from_secs(30), disc_operator),
        ("Hankel cutoff transforms", Duration::from_secs(60), hankel_transforms),
        ("Poisson peak on the disc", Duration::from_secs(600), poisson_peak),
        ("stationary phase engine", Duration::from_secs(60), stationary_phase_engine),
        ("bouncing-ball formula", Duration::from_secs(600), bouncing_ball_formula),
        ("pipeline vs boundary trace", Duration::from_secs(1800), end_to_end),
        ("tail decay", Duration::from_secs(600), tail_decay_check),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, budget, check)) in checks.iter().enumerate() {
        let id = format!("{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id) {
            continue;
        }
        let t0 = Instant::now();
        let res = check();
        let dt = t0.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass && dt <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name}: {detail} ({:.1} s, budget {} s)", dt.as_secs_f64(), budget.as_secs());
    }
    println!("acceptance: {failed} failed");
    if failed > 0 && std::env::var_os("WAVETRACE_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}

fn orbit_finder() -> Result<Outcome, String> {
    let c = BoundaryCurve::circle(1.0).map_err(err)?;
    let mut worst = 0.0f64;
    for (p, q) in [(1usize, 3usize), (1, 4), (2, 5)] {
        let all = find_periodic_orbits(&c, q, &SeedSpec::default(), NEWTON_TOL).map_err(err)?;
        let exact = 2.0 * q as f64 * (PI * p as f64 / q as f64).sin();
        let best = all
            .iter()
            .filter(|o| o.rotation_number == (p, q))
            .map(|o| (o.length - exact).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    let longest_pentagon = find_periodic_orbit(&c, 5, &SeedSpec::default(), NEWTON_TOL).map_err(err)?;
    let star = (longest_pentagon.length - 10.0 * (0.4 * PI).sin()).abs() < 1e-9;
    let dia = find_periodic_orbits(&c, 2, &SeedSpec::default(), NEWTON_TOL).map_err(err)?;
    let d = dia.iter().find(|o| (o.length - 4.0).abs() < 1e-9).ok_or("no diameter found")?;
    let degenerate = d.stability == Stability::Degenerate && d.det_h.abs() < 1e-10;
    outcome(
        worst < 1e-9 && star && degenerate,
        format!("max length error {worst:.1e}, (2,5) is the longest 5-link orbit: {star}, diameter det H = {:.1e} ({:?})", d.det_h, d.stability),
    )
}

fn poincare_identity() -> Result<Outcome, String> {
    let c = BoundaryCurve::ellipse(2.0, 1.0).map_err(err)?;
    let per = c.total_length();
    let minor = build_orbit(&c, &PolygonConfig::new(vec![0.25 * per, 0.75 * per])).map_err(err)?;
    let major = build_orbit(&c, &PolygonConfig::new(vec![0.0, 0.5 * per])).map_err(err)?;
    let mut worst = 0.0f64;
    for o in [&minor, &major] {
        let a = o.det_i_minus_p.ok_or("degenerate axis orbit")?;
        let b = o.det_i_minus_p_monodromy.ok_or("no monodromy")?;
        worst = worst.max((a - b).abs());
    }
    let classes = minor.stability == Stability::Elliptic && major.stability == Stability::Hyperbolic;
    outcome(
        worst < 1e-5 && classes,
        format!(
            "max |KT - monodromy| = {worst:.1e}, det(I-P) minor {:.6} major {:.6}, minor {:?}, major {:?}",
            minor.det_i_minus_p.unwrap_or(f64::NAN),
            major.det_i_minus_p.unwrap_or(f64::NAN),
            minor.stability,
            major.stability
        ),
    )
}

/// Fourier coefficient of the unit-disc kernel `n(θ) = (iκd/4) H1(κd)`, `d = 2|sin(θ/2)|`.
fn disc_eigenvalue_oracle(kappa: C64, n: i64) -> C64 {
    let f = |t: f64| {
        let d = 2.0 * (0.5 * t).sin().abs();
        let kern = if d < 1e-300 { C64::new(1.0 / (2.0 * PI), 0.0) } else { 0.25 * I * kappa * d * hankel01(kappa * d).1 };
        kern * C64::from_polar(1.0, n as f64 * t)
    };
    integrate_adaptive(&f, 0.0, 2.0 * PI, 1e-13)
}

fn disc_operator() -> Result<Outcome, String> {
    let c = BoundaryCurve::circle(1.0).map_err(err)?;
    let sp = SpectralParameter::constant(15.0, 0.5).map_err(err)?;
    let op = assemble(&c, &sp, 512, OperatorKind::N).map_err(err)?;
    let (mut vec_err, mut val_err) = (0.0f64, 0.0f64);
    for m in -40i64..=40 {
        let f: Vec<C64> = op.nodes.iter().map(|&t| C64::from_polar(1.0, m as f64 * t)).collect();
        let g = op.apply(&f);
        let lam = g.iter().zip(&f).map(|(a, b)| a * b.conj()).sum::<C64>() / f.len() as f64;
        let resid = g.iter().zip(&f).map(|(a, b)| (a - lam * b).norm()).fold(0.0, f64::max);
        vec_err = vec_err.max(resid);
        val_err = val_err.max((lam - disc_eigenvalue_oracle(sp.kappa(), m)).norm());
    }
    outcome(
        vec_err < 1e-7 && val_err < 1e-6,
        format!("eigenvector residual {vec_err:.1e}, eigenvalue error {val_err:.1e} over |n| <= 40"),
    )
}

fn hankel_transforms() -> Result<Outcome, String> {
    let a_grid = [-0.5, -0.25, 0.0, 0.25, 0.5];
    let b_grid = [C64::new(1.0, 0.02), C64::new(1.25, 0.05), C64::new(1.5, 0.1), C64::new(2.0, 0.02), C64::new(3.0, 0.3)];
    let mut worst = [0.0f64; 2];
    for (slot, variant) in [HankelVariant::Flat, HankelVariant::Offset { r: 0.5 }].into_iter().enumerate() {
        for &a in &a_grid {
            for &b in &b_grid {
                let t = hankel_cutoff_transform(a, b, 1e3, 0.75, variant).map_err(err)?;
                worst[slot] = worst[slot].max(t.residual);
            }
        }
    }
    outcome(
        worst[0] < 1e-5 && worst[1] < 1e-5,
        format!("max residual flat {:.1e}, offset (r = 0.5) {:.1e} at k = 1e3, delta = 0.75", worst[0], worst[1]),
    )
}

fn poisson_peak() -> Result<Outcome, String> {
    let k = 100.0;
    let peak = TraceWindow::new(4.0, 0.25, 0.0, Scaling::Logarithmic).map_err(err)?;
    let control = TraceWindow::new(3.5, 0.25, 0.0, Scaling::Logarithmic).map_err(err)?;
    let p = demodulate(&peak, 4.0, k, spectral_trace_disc(&peak, k, 200.0).map_err(err)?).norm();
    let q = demodulate(&control, 3.5, k, spectral_trace_disc(&control, k, 200.0).map_err(err)?).norm();
    let taus = [0.0, 0.05, 0.1, 0.15, 0.2];
    let mut pts = Vec::new();
    for &tau in &taus {
        let w = TraceWindow { tau, ..peak };
        pts.push((tau, spectral_trace_disc(&w, k, 200.0).map_err(err)?.norm().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let exponent = -slope / k.ln();
    let rel = (exponent - 4.0).abs() / 4.0;
    outcome(
        p >= 100.0 * q && rel < 0.1,
        format!("peak/control = {:.3e}, fitted exponent {exponent:.4} vs 4 (rel err {rel:.1e})", p / q),
    )
}

/// `∫ e^{ik(x²/2 + εx⁴)} dx` on the rotated contour `x = e^{iπ/8}s`, where the
/// integrand decays like `e^{-kεs⁴}`.
fn quartic_reference(k: f64, eps: f64) -> C64 {
    let rot = C64::from_polar(1.0, PI / 8.0);
    let f = |s: f64| {
        let x = rot * s;
        (I * k * (0.5 * x * x + eps * x.powi(4))).exp() * rot
    };
    integrate_adaptive(&f, -6.0, 6.0, 1e-16)
}

fn stationary_phase_engine() -> Result<Outcome, String> {
    let one = C64::new(1.0, 0.0);
    // Fresnel: x²/2 with unit amplitude
    let b = Basis::new(1, 18);
    let fresnel = OscillatoryIntegralJet::new(MPoly::univariate(&b, 0, &[0.0 * one, 0.0 * one, 0.5 * one]), vec![MPoly::constant(&b, one)], 0.0)
        .map_err(err)?;
    let e = stationary_phase(&fresnel, 50.0, 3).map_err(err)?;
    let lead = (2.0 * PI).sqrt() * C64::from_polar(1.0, PI / 4.0);
    let fresnel_err = (e.coefficients[0] - lead).norm() + e.coefficients[1..].iter().map(|a| a.norm()).sum::<f64>();

    let eps = 0.1;
    let quartic = OscillatoryIntegralJet::new(
        MPoly::univariate(&b, 0, &[0.0 * one, 0.0 * one, 0.5 * one, 0.0 * one, eps * one]),
        vec![MPoly::constant(&b, one)],
        0.0,
    )
    .map_err(err)?;
    let ks = [50.0, 100.0, 200.0];
    let refs: Vec<C64> = ks.iter().map(|&k| quartic_reference(k, eps)).collect();
    let mut ok = fresnel_err < 1e-13;
    let mut lines = vec![format!("Fresnel error {fresnel_err:.1e}")];
    for r in 0..=2usize {
        let mut errs = Vec::new();
        for (k, exact) in ks.iter().zip(&refs) {
            let sp = stationary_phase(&quartic, *k, r).map_err(err)?;
            errs.push((sp.evaluate(*k, r) - exact).norm() / exact.norm());
        }
        let bound_ok = ks.iter().zip(&errs).all(|(k, e)| *e <= k.powf(-(r as f64 + 0.5)));
        let slope = (errs[2] / errs[0]).ln() / (ks[2] / ks[0]).ln();
        ok &= bound_ok && slope <= -(r as f64 + 0.5);
        lines.push(format!("R={r}: rel err {:.1e}/{:.1e}/{:.1e}, slope {slope:.2}", errs[0], errs[1], errs[2]));
    }
    outcome(ok, lines.join("; "))
}

fn bouncing_ball_formula() -> Result<Outcome, String> {
    // r(θ) = 1 + 0.1 cos 2θ + 0.03 cos 3θ is symmetric under y -> -y, which
    // swaps the two ends of the vertical bouncing ball
    let c = BoundaryCurve::fourier(vec![1.0, 0.0, 0.1, 0.03], vec![0.0; 4]).map_err(err)?;
    let s = c.arclength_of(0.5 * PI);
    let cfg = newton_refine(&c, &PolygonConfig::new(vec![s, c.total_length() - s]), 1e-13).map_err(err)?;
    let o = build_orbit(&c, &cfg).map_err(err)?;
    if o.stability != Stability::Elliptic {
        return Err(format!("bouncing ball is {:?}", o.stability));
    }
    let mut worst = 0.0f64;
    for r in [1usize, 2] {
        for j in [1usize, 2] {
            let t = thm_sum_v_extract(&c, &o, r, j).map_err(err)?;
            let target = 2.0 * r as f64 * t.inverse_hessian[0][0].powi(j as i32);
            worst = worst.max((t.a_plus + t.a_minus - target).norm() / target.abs());
        }
    }
    let mut readings = Vec::new();
    let mut resolved = true;
    for r in [1usize, 2] {
        let rep = angle_reading_report(&c, &o, r).map_err(err)?;
        let best = &rep.candidates[rep.best];
        resolved &= best.rel_err < 0.05;
        readings.push(format!(
            "r={r}: measured f'''^2 coefficient {:.4}, best {:?} with alpha={} at rel err {:.2}",
            rep.measured.re, best.reading, best.alpha_convention, best.rel_err
        ));
    }
    outcome(
        worst < 1e-6 && resolved,
        format!(
            "f^(2j) coefficient vs 2r(h11)^j: max rel err {worst:.1e}; alpha reading resolved: {resolved}; {}",
            readings.join("; ")
        ),
    )
}

fn end_to_end() -> Result<Outcome, String> {
    let c = BoundaryCurve::ellipse(2.0, 1.0).map_err(err)?;
    let per = c.total_length();
    let o = build_orbit(&c, &PolygonConfig::new(vec![0.25 * per, 0.75 * per])).map_err(err)?;
    let table = wave_invariants(&c, &o, 1, 2, 0.0, 0.75).map_err(err)?;
    // the M = 2 boundary term carries no near-diagonal insertions
    let geom = OrbitGeometry::from_config(&c, &o.config, 6).map_err(err)?;
    let principal = principal_invariants(&geom, 2, 2).map_err(err)?;
    let w = TraceWindow::new(o.length, 0.5, 0.0, Scaling::Constant).map_err(err)?;
    let mut samples = Vec::new();
    for i in 0..9 {
        let k = 60.0 + 10.0 * i as f64;
        samples.push((k, bem_trace_term(&c, &w, k, 2, &BemTraceOptions::default()).map_err(err)?));
    }
    let fit = fit_expansion_for(&c, &samples, o.length, &w, 2).map_err(err)?;
    let b1 = table.entries[0].1;
    let rel = (fit.coefficients[0] - b1).norm() / b1.norm();
    outcome(
        rel < 0.1,
        format!(
            "pipeline B1 = {:.6}, fit B1 = {:.6} (rel err {rel:.1e}); B2 without/with near-diagonal correction {:.6} / {:.6}, fit {:.4} +- {:.2}",
            b1, fit.coefficients[0], principal[1], table.entries[1].1, fit.coefficients[1], fit.std_errors[1]
        ),
    )
}

fn tail_decay_check() -> Result<Outcome, String> {
    let c = BoundaryCurve::ellipse(2.0, 1.0).map_err(err)?;
    let per = c.total_length();
    let orbit_window = VertexWindow { vertices: vec![0.25 * per, 0.75 * per], radius: 0.3 };
    let trace_window = TraceWindow::new(4.0, 0.5, 0.0, Scaling::Logarithmic).map_err(err)?;
    let m0s: Vec<usize> = (0..=8).collect();
    let taus = [1.0, 2.0];
    let rows = tail_decay(&c, &[60.0], &m0s, &taus, &orbit_window, &trace_window, 4.0).map_err(err)?;
    let mut monotone = true;
    for &tau in &taus {
        let norms: Vec<f64> = m0s
            .iter()
            .map(|m| rows.iter().find(|r| r.tau == tau && r.m0 == *m).map(|r| r.frobenius_norm).unwrap_or(f64::NAN))
            .collect();
        monotone &= norms[3..].windows(2).all(|p| p[1] < p[0]);
    }
    let fitted = fit_damping_constant(&rows, 4.0, 2);
    let c_ok = fitted.is_some_and(|v| v > 0.0);
    let summary: Vec<String> = rows.iter().filter(|r| r.tau == 2.0).map(|r| format!("{:.2e}", r.frobenius_norm)).collect();
    outcome(
        monotone && c_ok,
        format!(
            "monotone beyond M0 = 3: {monotone}; fitted C = {} (sigma = 2, L = 4); norms at tau = 2: [{}]",
            fitted.map_or("none".into(), |v| format!("{v:.4}")),
            summary.join(", ")
        ),
    )
}
