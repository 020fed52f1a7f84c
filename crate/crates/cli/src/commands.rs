use crate::config::{JobConfig, OperatorSection, TailSection, TraceSection};
use crate::output::{canonical_json, num, Csv, OutDir};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use wavetrace::billiards::*;
use wavetrace::geometry::BoundaryCurve;
use wavetrace::layers::{assemble, tail_decay, OperatorKind};
use wavetrace::trace::*;
use wavetrace::waveinv::{comparison_report, wave_invariants};
use wavetrace::{Error, Result, SpectralParameter};

fn io(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Serialize)]
struct OrbitRecord {
    links: usize,
    vertices: Vec<f64>,
    length: f64,
    det_h: f64,
    det_i_minus_p: Option<f64>,
    det_i_minus_p_monodromy: Option<f64>,
    stability: Stability,
    elliptic_angle: Option<f64>,
    rotation_number: (usize, usize),
}

impl From<&PeriodicOrbit> for OrbitRecord {
    fn from(o: &PeriodicOrbit) -> Self {
        OrbitRecord {
            links: o.config.len(),
            vertices: o.config.vertices.clone(),
            length: o.length,
            det_h: o.det_h,
            det_i_minus_p: o.det_i_minus_p,
            det_i_minus_p_monodromy: o.det_i_minus_p_monodromy,
            stability: o.stability,
            elliptic_angle: o.elliptic_angle,
            rotation_number: o.rotation_number,
        }
    }
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Elliptic => "elliptic",
        Stability::Hyperbolic => "hyperbolic",
        Stability::Degenerate => "degenerate",
    }
}

pub fn orbits(cfg: &JobConfig, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let seeds = SeedSpec::Grid { per_axis: cfg.orbits.seeds_per_axis, rotation_offsets: cfg.orbits.rotation_offsets };
    let mut records = Vec::new();
    for &m in &cfg.orbits.m {
        for o in find_periodic_orbits(curve, m, &seeds, cfg.orbits.newton_tol)? {
            records.push(OrbitRecord::from(&o));
        }
    }
    let mut csv = Csv::new(&["links", "winding", "length", "det_h", "det_i_minus_p", "stability", "vertices"]);
    for r in &records {
        let verts: Vec<String> = r.vertices.iter().map(|v| num(*v)).collect();
        csv.row(&[
            r.links.to_string(),
            r.rotation_number.0.to_string(),
            num(r.length),
            num(r.det_h),
            opt(r.det_i_minus_p),
            stability_name(r.stability).into(),
            verts.join(";"),
        ]);
    }
    out.write("orbits.json", &canonical_json(&records)).map_err(io)?;
    out.write("orbits.csv", &csv.into_bytes()).map_err(io)
}

pub fn spectrum(cfg: &JobConfig, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let entries = enumerate_length_spectrum(curve, cfg.spectrum.l_max, cfg.spectrum.q_max)?;
    let mut csv = Csv::new(&["length", "winding", "links", "stability", "det_i_minus_p"]);
    for e in &entries {
        let (stab, dp) = match &e.orbit {
            Some(o) => (stability_name(o.stability), o.det_i_minus_p),
            // boundary length m·perimeter
            None => ("boundary", None),
        };
        csv.row(&[num(e.length), e.rotation_number.0.to_string(), e.rotation_number.1.to_string(), stab.into(), opt(dp)]);
    }
    out.write("spectrum.csv", &csv.into_bytes()).map_err(io)
}

fn window(t: &TraceSection) -> Result<TraceWindow> {
    TraceWindow::new(t.l_center, t.epsilon, t.tau, t.scaling.into())
}

#[derive(Serialize)]
struct FitRecord {
    l: f64,
    tau: f64,
    j: usize,
    coefficients: Vec<[f64; 2]>,
    std_errors: Vec<f64>,
    relative_residual: f64,
    condition: f64,
}

fn write_trace(
    cfg: &JobConfig,
    curve: &BoundaryCurve,
    w: &TraceWindow,
    samples: &[(f64, C64)],
    name: &str,
    out: &mut OutDir,
) -> Result<()> {
    let l = cfg.trace.l_center;
    let mut csv = Csv::new(&["k", "re_trace", "im_trace", "demod_re", "demod_im"]);
    for &(k, v) in samples {
        let d = demodulate(w, l, k, v);
        csv.row(&[num(k), num(v.re), num(v.im), num(d.re), num(d.im)]);
    }
    out.write(&format!("{name}.csv"), &csv.into_bytes()).map_err(io)?;
    if cfg.trace.j > 0 {
        let fit = fit_expansion_for(curve, samples, l, w, cfg.trace.j)?;
        let rec = FitRecord {
            l,
            tau: cfg.trace.tau,
            j: cfg.trace.j,
            coefficients: fit.coefficients.iter().map(|c| [c.re, c.im]).collect(),
            std_errors: fit.std_errors,
            relative_residual: fit.relative_residual,
            condition: fit.condition,
        };
        out.write(&format!("{name}_fit.json"), &canonical_json(&rec)).map_err(io)?;
    }
    Ok(())
}

pub fn disc_trace(cfg: &JobConfig, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    if !is_unit_disc(curve) {
        return Err(Error::DomainError("disc-trace needs the unit circle".into()));
    }
    let w = window(&cfg.trace)?;
    let margin = cfg.trace.lambda_margin;
    let samples = cfg
        .trace
        .k_values()
        .par_iter()
        .map(|&k| spectral_trace_disc(&w, k, k + margin).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    write_trace(cfg, curve, &w, &samples, "disc_trace", out)
}

pub fn is_unit_disc(curve: &BoundaryCurve) -> bool {
    matches!(curve.shape(), wavetrace::geometry::Shape::Circle { radius } if *radius == 1.0)
}

pub fn bem_trace(cfg: &JobConfig, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let w = window(&cfg.trace)?;
    let opts = BemTraceOptions {
        points_per_wavelength: cfg.trace.points_per_wavelength,
        mu_rule: MuRule::Moments { order: cfg.trace.moment_order },
        ..BemTraceOptions::default()
    };
    let samples = cfg
        .trace
        .k_values()
        .iter()
        .map(|&k| bem_trace_term(curve, &w, k, cfg.trace.m, &opts).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    write_trace(cfg, curve, &w, &samples, "bem_trace", out)?;
    if let Some(op) = &cfg.operator {
        operator_dump(op, curve, out)?;
    }
    if let Some(t) = &cfg.tail {
        tail_table(t, &cfg.trace, curve, out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct OperatorSidecar {
    n: usize,
    k: f64,
    tau: f64,
    scaling: String,
    kind: String,
    rule: String,
    layout: &'static str,
    curve: String,
    curve_hash: String,
}

fn operator_dump(op: &OperatorSection, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let kind = match op.kind.as_str() {
        "n" => OperatorKind::N,
        "n0" => OperatorKind::N0,
        "n1" => OperatorKind::N1,
        "s" => OperatorKind::S,
        _ => OperatorKind::NDot,
    };
    let sp = SpectralParameter::new(op.k, op.tau, op.scaling.into())?;
    let a = assemble(curve, &sp, op.nodes, kind)?;
    let n = a.n();
    let mut bytes = Vec::with_capacity(16 * n * n);
    for i in 0..n {
        for j in 0..n {
            let z = a.matrix[(i, j)];
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    let fp = curve.fingerprint();
    let side = OperatorSidecar {
        n,
        k: op.k,
        tau: op.tau,
        scaling: format!("{:?}", op.scaling).to_lowercase(),
        kind: op.kind.clone(),
        rule: format!("{:?}", a.rule).to_lowercase(),
        layout: "row-major complex128, little-endian (re, im) pairs",
        curve_hash: crate::output::sha256_hex(fp.as_bytes()),
        curve: fp,
    };
    out.write("operator.bin", &bytes).map_err(io)?;
    out.write("operator.json", &canonical_json(&side)).map_err(io)
}

fn tail_table(t: &TailSection, trace: &TraceSection, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let vw = VertexWindow { vertices: t.vertices.clone(), radius: t.radius };
    let tw = TraceWindow::new(trace.l_center, trace.epsilon, 0.0, wavetrace::Scaling::Logarithmic)?;
    let rows = tail_decay(curve, &t.k, &t.m0, &t.tau, &vw, &tw, t.half_width)?;
    let mut csv = Csv::new(&["k", "tau", "M0", "frobenius_norm"]);
    for r in &rows {
        csv.row(&[num(r.k), num(r.tau), r.m0.to_string(), num(r.frobenius_norm)]);
    }
    out.write("tail_decay.csv", &csv.into_bytes()).map_err(io)
}

pub fn find_orbit(cfg: &JobConfig, curve: &BoundaryCurve) -> Result<PeriodicOrbit> {
    let inv = &cfg.invariants;
    match &inv.seed {
        Some(v) => {
            let refined = newton_refine(curve, &PolygonConfig::new(v.clone()), cfg.orbits.newton_tol)?;
            build_orbit(curve, &refined)
        }
        None => find_periodic_orbit(curve, inv.m, &SeedSpec::default(), cfg.orbits.newton_tol),
    }
}

pub fn invariants(cfg: &JobConfig, curve: &BoundaryCurve, out: &mut OutDir) -> Result<()> {
    let inv = &cfg.invariants;
    let orbit = find_orbit(cfg, curve)?;
    let tables = inv
        .r
        .iter()
        .map(|&r| wave_invariants(curve, &orbit, r, inv.j_max, inv.tau, inv.delta))
        .collect::<Result<Vec<_>>>()?;
    out.write("invariants.json", &canonical_json(&tables)).map_err(io)?;
    let mut csv = Csv::new(&["r", "j", "re_b", "im_b", "length"]);
    for t in &tables {
        for (j, b) in &t.entries {
            csv.row(&[t.r.to_string(), j.to_string(), num(b.re), num(b.im), num(t.metadata.length)]);
        }
    }
    out.write("invariants.csv", &csv.into_bytes()).map_err(io)?;
    if orbit.config.len() == 2 && !inv.compare_j.is_empty() {
        let rows = comparison_report(curve, &orbit, &inv.r, &inv.compare_j, &inv.trace_b1)?;
        let mut csv = Csv::new(&["term", "j", "r", "pipeline", "wtf", "trace_fit", "rel_err"]);
        for row in &rows {
            csv.row(&[
                row.term.clone(),
                row.j.to_string(),
                row.r.to_string(),
                num(row.pipeline),
                opt(row.wtf),
                opt(row.trace_fit),
                num(row.rel_err),
            ]);
        }
        out.write("comparison.csv", &csv.into_bytes()).map_err(io)?;
    }
    Ok(())
}

pub fn selftest(out: &mut OutDir) -> Result<()> {
    let mut csv = Csv::new(&["function", "re", "im"]);
    for (name, v) in wavetrace::specfun::selftest_table() {
        // names contain commas
        csv.row(&[format!("\"{name}\""), num(v.re), num(v.im)]);
    }
    let bytes = csv.into_bytes();
    print!("{}", String::from_utf8_lossy(&bytes));
    out.write("selftest.csv", &bytes).map_err(io)
}
