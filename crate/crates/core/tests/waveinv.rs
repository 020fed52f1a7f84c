use num_complex::Complex64 as C64;
use wavetrace::billiards::{build_orbit, length_hessian, PeriodicOrbit, PolygonConfig};
use wavetrace::geometry::BoundaryCurve;
use wavetrace::trace::TraceWindow;
use wavetrace::waveinv::orbit::{orbit_jet, OrbitGeometry};
use wavetrace::waveinv::{build_orbit_integral, stationary_phase, wave_invariants};
use wavetrace::Scaling;

fn ellipse_axis(minor: bool) -> (BoundaryCurve, PeriodicOrbit) {
    let c = BoundaryCurve::ellipse(2.0, 1.0).unwrap();
    let l = c.total_length();
    let cfg = if minor { vec![0.25 * l, 0.75 * l] } else { vec![0.0, 0.5 * l] };
    let o = build_orbit(&c, &PolygonConfig::new(cfg)).unwrap();
    (c, o)
}

#[test]
fn ellipse_minor_axis_leading_invariant() {
    let (c, o) = ellipse_axis(true);
    let t = wave_invariants(&c, &o, 1, 2, 0.0, 0.75).unwrap();
    // 2L/√|det(I−P)| with det(I−P) = 3, times the Maslov factor −i
    let expect = C64::new(0.0, -4.0 / 3f64.sqrt());
    assert!((t.entries[0].1 - expect).norm() < 1e-10, "{:?}", t.entries);
}

#[test]
fn critical_value_and_hessian_block() {
    let (c, o) = ellipse_axis(true);
    for r in [1usize, 2] {
        let w = TraceWindow::new(4.0 * r as f64, 1.0, 0.0, Scaling::Logarithmic).unwrap();
        let jet = build_orbit_integral(&c, &o, r, &w, 1).unwrap();
        assert!((jet.critical_value - r as f64 * o.length).abs() < 1e-12);
        let h = jet.phase.hessian();
        let (lh, _) = length_hessian(&c, &o.config.iterate(r)).unwrap();
        let m = 2 * r;
        for a in 0..m {
            for b in 0..m {
                assert!((h[a + 2][b + 2] - lh[a][b]).abs() < 1e-8, "r={r} ({a},{b})");
            }
        }
        let tm = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        assert!((tm + 1.0).abs() < 1e-14);
    }
}

#[test]
fn integrating_out_time_and_energy_is_exact() {
    let (c, o) = ellipse_axis(true);
    let w = TraceWindow::new(4.0, 1.0, 0.0, Scaling::Logarithmic).unwrap();
    let full = build_orbit_integral(&c, &o, 1, &w, 2).unwrap();
    let geom = OrbitGeometry::from_config(&c, &o.config, 6).unwrap();
    let phi = orbit_jet(&geom, 2).unwrap();
    let a = stationary_phase(&full, 80.0, 2).unwrap();
    let b = stationary_phase(&phi, 80.0, 2).unwrap();
    for (x, y) in a.coefficients.iter().zip(&b.coefficients) {
        assert!((x - y).norm() < 1e-12 * y.norm().max(1e-3), "{x} {y}");
    }
    assert!((a.value - b.value).norm() < 1e-12 * b.value.norm());
}

#[test]
fn time_reversal_pairs_are_equal() {
    let c = BoundaryCurve::fourier(vec![1.0, 0.0, 0.08, 0.03], vec![0.0, 0.0, 0.0, 0.02]).unwrap();
    let seeds = wavetrace::billiards::SeedSpec::default();
    let o = wavetrace::billiards::find_periodic_orbit(&c, 3, &seeds, 1e-12).unwrap();
    let t = wave_invariants(&c, &o, 1, 3, 0.0, 0.75).unwrap();
    for (a, b) in t.forward.iter().zip(&t.reverse) {
        assert!((a - b).norm() < 1e-10 * a.norm(), "{a} {b}");
    }
}

mod quadrature_oracle {
    use super::*;
    use wavetrace::layers::kernel_n;
    use wavetrace::quadrature::composite_gl;
    use wavetrace::series::Series;
    use wavetrace::waveinv::MPoly;

    const SIGMA: f64 = 0.3;
    const HALF_WIDTH: f64 = 7.0 * SIGMA;

    /// Arclength `s(x) = ∫_0^x √(1 + f′²)` along a local graph.
    fn arclength(graph: &Series) -> Series {
        let fp = graph.derivative();
        let one = Series::constant(1.0, fp.order());
        let w = (&one + &(&fp * &fp)).sqrt();
        let mut c = vec![0.0; w.c.len() + 1];
        for (n, v) in w.c.iter().enumerate() {
            c[n + 1] = v / (n + 1) as f64;
        }
        Series::from_coeffs(c)
    }

    /// Expansion of `∫∫ n(q1,q2) n(q2,q1) e^{-(u²+v²)/2σ²} du dv` (arclength offsets).
    fn expansion(c: &BoundaryCurve, o: &PeriodicOrbit, r_order: usize) -> wavetrace::waveinv::OscillatoryIntegralJet {
        let geom = OrbitGeometry::from_config(c, &o.config, 2 * r_order + 2).unwrap();
        let mut jet = orbit_jet(&geom, r_order).unwrap();
        let b = jet.phase.basis.clone();
        let mut q = MPoly::zero(&b);
        for (i, v) in geom.vertices.iter().enumerate() {
            let s = arclength(&v.graph);
            let cs: Vec<C64> = s.c.iter().map(|&a| C64::new(a, 0.0)).collect();
            let si = MPoly::univariate(&b, i, &cs);
            q = q.add(&si.mul(&si));
        }
        let gauss = q.scale(C64::new(-0.5 / (SIGMA * SIGMA), 0.0)).exp();
        jet.amp = jet.amp.iter().map(|a| a.mul(&gauss)).collect();
        jet
    }

    fn direct(c: &BoundaryCurve, o: &PeriodicOrbit, k: f64) -> C64 {
        let panels = (2.0 * HALF_WIDTH * 2.0 * k / (2.0 * std::f64::consts::PI)).ceil() as usize + 8;
        let (u, w) = composite_gl(-HALF_WIDTH, HALF_WIDTH, panels, 16);
        let g: Vec<f64> = u.iter().zip(&w).map(|(x, wx)| (-0.5 * x * x / (SIGMA * SIGMA)).exp() * wx).collect();
        let f1: Vec<_> = u.iter().map(|x| c.eval_frame(o.config.vertices[0] + x)).collect();
        let f2: Vec<_> = u.iter().map(|x| c.eval_frame(o.config.vertices[1] + x)).collect();
        let kap = C64::new(k, 0.0);
        let mut total = C64::new(0.0, 0.0);
        for (a, ga) in f1.iter().zip(&g) {
            if *ga < 1e-300 {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for (b, gb) in f2.iter().zip(&g) {
                row += kernel_n(kap, a, b) * kernel_n(kap, b, a) * *gb;
            }
            total += row * *ga;
        }
        total
    }

    fn slope(ks: &[f64], errs: &[f64]) -> f64 {
        let n = ks.len() as f64;
        let x: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
        let y: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        -sxy / sxx
    }

    #[test]
    fn expansion_error_scales_with_order() {
        let ks = [40.0, 80.0, 160.0];
        for minor in [true, false] {
            let (c, o) = ellipse_axis(minor);
            let exact: Vec<C64> = ks.iter().map(|&k| direct(&c, &o, k)).collect();
            for r_order in 0..=2usize {
                let jet = expansion(&c, &o, r_order);
                let errs: Vec<f64> = ks
                    .iter()
                    .zip(&exact)
                    .map(|(&k, e)| (stationary_phase(&jet, k, r_order).unwrap().value - e).norm() / e.norm())
                    .collect();
                let s = slope(&ks, &errs);
                println!("minor={minor} R={r_order} errs={errs:?} slope={s:.2}");
                assert!(s >= r_order as f64 + 0.5, "minor={minor} R={r_order} errs={errs:?} slope={s}");
            }
        }
    }
}

mod bouncing_ball {
    use super::*;
    use std::f64::consts::PI;
    use wavetrace::billiards::{newton_refine, Stability};
    use wavetrace::waveinv::wtf::{angle_reading_report, thm_sum_v_extract};

    /// `r(θ) = 1 + 0.1 cos 2θ + 0.03 cos 3θ`: symmetric under `y → −y`, which
    /// swaps the ends of the vertical bouncing ball near `θ = ±π/2`.
    pub fn domain() -> (BoundaryCurve, PeriodicOrbit) {
        let c = BoundaryCurve::fourier(vec![1.0, 0.0, 0.1, 0.03], vec![0.0; 4]).unwrap();
        let s = c.arclength_of(0.5 * PI);
        let seed = PolygonConfig::new(vec![s, c.total_length() - s]);
        let cfg = newton_refine(&c, &seed, 1e-13).unwrap();
        let o = build_orbit(&c, &cfg).unwrap();
        assert!((c.point(cfg.vertices[0])[0] - c.point(cfg.vertices[1])[0]).abs() < 1e-10);
        (c, o)
    }

    #[test]
    fn extraction_matches_formula() {
        let (c, o) = domain();
        assert_eq!(o.stability, Stability::Elliptic);
        for r in [1usize, 2] {
            for j in [1usize, 2] {
                let t = thm_sum_v_extract(&c, &o, r, j).unwrap();
                let h11 = t.inverse_hessian[0][0];
                let target = 2.0 * r as f64 * h11.powi(j as i32);
                let sum = t.a_plus + t.a_minus;
                println!("r={r} j={j} a+={} a-={} b+={} b-={} target={target} nl={:e}", t.a_plus, t.a_minus, t.b_plus, t.b_minus, t.nonlinearity);
                assert!((sum - target).norm() < 1e-6 * target.abs(), "r={r} j={j}: {sum} vs {target}");
                assert!((t.a_plus - t.a_minus).norm() < 1e-8 * target.abs());
            }
            let rep = angle_reading_report(&c, &o, r).unwrap();
            println!("{rep:#?}");
        }
    }

    #[test]
    fn invariants_ignore_jets_beyond_order_2j() {
        use wavetrace::waveinv::orbit::principal_invariants;
        let (c, o) = domain();
        let j_max = 2;
        let geom = OrbitGeometry::from_config(&c, &o.config, 2 * j_max + 2).unwrap();
        let base = principal_invariants(&geom, 2, j_max).unwrap();
        let mut high = geom.clone();
        high.shift_jet(0, 2 * j_max + 1, 0.7);
        high.shift_jet(1, 2 * j_max + 2, -0.4);
        let same = principal_invariants(&high, 2, j_max).unwrap();
        for (a, b) in base.iter().zip(&same) {
            assert!((a - b).norm() < 1e-12 * a.norm(), "{a} {b}");
        }
        let mut top = geom.clone();
        top.shift_jet(0, 2 * j_max, 0.7);
        let moved = principal_invariants(&top, 2, j_max).unwrap();
        assert!((moved[j_max - 1] - base[j_max - 1]).norm() > 1e-3 * base[j_max - 1].norm());
    }

    #[test]
    fn asymmetric_coefficients_follow_each_endpoint() {
        // a sin 3θ term breaks the symmetry between the two ends
        let c = BoundaryCurve::fourier(vec![1.0, 0.0, 0.1, 0.03], vec![0.0, 0.0, 0.0, 0.02]).unwrap();
        let s = c.arclength_of(0.5 * PI);
        let cfg = newton_refine(&c, &PolygonConfig::new(vec![s, c.total_length() - s]), 1e-13).unwrap();
        let o = build_orbit(&c, &cfg).unwrap();
        assert_eq!(o.rotation_number, (1, 2));
        for r in [1usize, 2] {
            for j in [1usize, 2] {
                let t = thm_sum_v_extract(&c, &o, r, j).unwrap();
                let h = &t.inverse_hessian;
                assert!((h[0][0] - h[1][1]).abs() > 1e-3, "ends are equivalent");
                let (ap, am) = (r as f64 * h[0][0].powi(j as i32), r as f64 * h[1][1].powi(j as i32));
                assert!((t.a_plus - ap).norm() < 1e-6 * ap.abs(), "r={r} j={j}: {} vs {ap}", t.a_plus);
                assert!((t.a_minus - am).norm() < 1e-6 * am.abs(), "r={r} j={j}: {} vs {am}", t.a_minus);
            }
        }
    }
}
