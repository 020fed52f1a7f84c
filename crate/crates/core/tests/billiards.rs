use proptest::prelude::*;
use std::f64::consts::PI;
use wavetrace::billiards::*;
use wavetrace::geometry::BoundaryCurve;
use wavetrace::Error;

fn ellipse() -> BoundaryCurve {
    BoundaryCurve::ellipse(2.0, 1.0).unwrap()
}

fn central_gradient(c: &BoundaryCurve, cfg: &PolygonConfig, h: f64) -> Vec<f64> {
    (0..cfg.len())
        .map(|j| {
            let mut a = cfg.clone();
            let mut b = cfg.clone();
            a.vertices[j] += h;
            b.vertices[j] -= h;
            (length(c, &a).unwrap() - length(c, &b).unwrap()) / (2.0 * h)
        })
        .collect()
}

#[test]
fn circle_lengths() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    assert!((length(&c, &PolygonConfig::new(vec![0.0, PI])).unwrap() - 4.0).abs() < 1e-12);
    let tri = PolygonConfig::new(vec![0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0]);
    assert!((length(&c, &tri).unwrap() - 3.0 * 3f64.sqrt()).abs() < 1e-12);
    assert!(matches!(length(&c, &PolygonConfig::new(vec![0.0, 0.0])), Err(Error::SingularConfig { .. })));
}

#[test]
fn gradient_vanishes_on_regular_square() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    let sq = PolygonConfig::new(vec![0.0, PI / 2.0, PI, 1.5 * PI]);
    assert!(length_gradient(&c, &sq).unwrap().iter().all(|g| g.abs() < 1e-12));
    let two = PolygonConfig::new(vec![0.0, PI - 0.3]);
    let g = length_gradient(&c, &two).unwrap();
    assert!((g[0] + g[1]).abs() < 1e-12 && g[0].abs() > 1e-3);
}

#[test]
fn circle_diameter_hessian_is_degenerate() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    let (h, b) = length_hessian(&c, &PolygonConfig::new(vec![0.0, PI])).unwrap();
    let expect = [[-1.0, 1.0], [1.0, -1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((h[i][j] - expect[i][j]).abs() < 1e-12);
        }
    }
    assert!((b[0] - 0.5).abs() < 1e-12);
    assert!(matches!(poincare_data(&c, &PolygonConfig::new(vec![0.0, PI])), Err(Error::DegenerateOrbit(_))));
}

#[test]
fn hessian_matches_finite_differences() {
    let c = ellipse();
    let cfg = PolygonConfig::new(vec![0.3, 2.9, 5.1, 7.7]);
    let (h, _) = length_hessian(&c, &cfg).unwrap();
    let eps = 1e-4;
    for j in 0..4 {
        let mut a = cfg.clone();
        let mut b = cfg.clone();
        a.vertices[j] += eps;
        b.vertices[j] -= eps;
        let ga = length_gradient(&c, &a).unwrap();
        let gb = length_gradient(&c, &b).unwrap();
        for i in 0..4 {
            let fd = (ga[i] - gb[i]) / (2.0 * eps);
            assert!((fd - h[i][j]).abs() < 1e-5, "({i},{j}) {fd} vs {}", h[i][j]);
        }
    }
}

#[test]
fn circle_billiard_map() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    let s = billiard_map(&c, BilliardState { phi: 0.0, p: 0.0 }).unwrap();
    assert!((s.phi - PI).abs() < 1e-10 && s.p.abs() < 1e-10);
    let p = (PI / 4.0).sin();
    let s = billiard_map(&c, BilliardState { phi: 0.0, p }).unwrap();
    assert!((s.phi - PI / 2.0).abs() < 1e-10 && (s.p - p).abs() < 1e-10);
    assert!(matches!(billiard_map(&c, BilliardState { phi: 0.0, p: 1.0 }), Err(Error::GrazingRay(_))));
}

#[test]
fn ellipse_joachimsthal_integral_conserved() {
    // product of angular momenta about the two foci (±c, 0), c² = a² - b² = 3
    let c = ellipse();
    let invariant = |s: BilliardState| {
        let f = c.eval_frame(s.phi);
        let cth = (1.0 - s.p * s.p).sqrt();
        let v = [cth * f.inward_normal[0] + s.p * f.tangent[0], cth * f.inward_normal[1] + s.p * f.tangent[1]];
        let l = f.point[0] * v[1] - f.point[1] * v[0];
        l * l - 3.0 * v[1] * v[1]
    };
    let mut s = BilliardState { phi: 0.7, p: 0.31 };
    let j0 = invariant(s);
    for _ in 0..50 {
        s = billiard_map(&c, s).unwrap();
        assert!((invariant(s) - j0).abs() < 1e-9, "{} vs {j0}", invariant(s));
    }
}

#[test]
fn ellipse_axis_orbits() {
    let c = ellipse();
    let per = c.total_length();
    let seeds = SeedSpec::Explicit(vec![PolygonConfig::new(vec![0.26 * per, 0.74 * per])]);
    let minor = find_periodic_orbit(&c, 2, &seeds, NEWTON_TOL).unwrap();
    assert!((minor.length - 4.0).abs() < 1e-10);
    assert_eq!(minor.stability, Stability::Elliptic);
    let seeds = SeedSpec::Explicit(vec![PolygonConfig::new(vec![0.02 * per, 0.49 * per])]);
    let major = find_periodic_orbit(&c, 2, &seeds, NEWTON_TOL).unwrap();
    assert!((major.length - 8.0).abs() < 1e-10);
    assert_eq!(major.stability, Stability::Hyperbolic);
    for o in [&minor, &major] {
        let a = o.det_i_minus_p.unwrap();
        let b = o.det_i_minus_p_monodromy.unwrap();
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        // time reversal
        let r = build_orbit(&c, &o.config.reversed()).unwrap();
        assert!((r.length - o.length).abs() < 1e-12);
        assert!((r.det_h - o.det_h).abs() < 1e-10);
        assert!((r.det_i_minus_p.unwrap() - a).abs() < 1e-10);
    }
}

#[test]
fn circle_orbit_search() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    let tri = find_periodic_orbit(&c, 3, &SeedSpec::default(), NEWTON_TOL).unwrap();
    assert!((tri.length - 3.0 * 3f64.sqrt()).abs() < 1e-9);
    let dia = find_periodic_orbits(&c, 2, &SeedSpec::default(), NEWTON_TOL).unwrap();
    assert!(dia.iter().all(|o| o.stability == Stability::Degenerate));
    assert!(dia.iter().any(|o| (o.length - 4.0).abs() < 1e-9));
}

#[test]
fn circle_length_spectrum() {
    let c = BoundaryCurve::circle(1.0).unwrap();
    let spec = enumerate_length_spectrum(&c, 7.0, 4).unwrap();
    let lengths: Vec<f64> = spec.iter().map(|e| e.length).collect();
    for expect in [4.0, 3.0 * 3f64.sqrt(), 4.0 * 2f64.sqrt(), 2.0 * PI] {
        assert!(lengths.iter().any(|l| (l - expect).abs() < 1e-9), "missing {expect}: {lengths:?}");
    }
    for e in &spec {
        if let Some(o) = &e.orbit {
            assert!(o.gradient_norm < NEWTON_TOL);
        }
    }
    let e = ellipse();
    let spec = enumerate_length_spectrum(&e, 9.0, 2).unwrap();
    assert!(spec.iter().any(|x| (x.length - 4.0).abs() < 1e-9));
    assert!(spec.iter().any(|x| (x.length - 8.0).abs() < 1e-9));
}

#[test]
fn angle_extension_is_second_order() {
    // cos∠(q(φ) - q(φ'), ν(φ)) + κ(φ)|φ' - φ|/2 = O(|φ' - φ|²)
    let c = ellipse();
    let phi = 1.1;
    let f = c.eval_frame(phi);
    let resid = |gap: f64| {
        let q2 = c.point(phi + gap);
        let d = [f.point[0] - q2[0], f.point[1] - q2[1]];
        let cos = (d[0] * f.inward_normal[0] + d[1] * f.inward_normal[1]) / d[0].hypot(d[1]);
        (cos + 0.5 * f.curvature * gap.abs()).abs()
    };
    let slope = (resid(1e-2).ln() - resid(1e-3).ln()) / (1e-2f64.ln() - 1e-3f64.ln());
    assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn interior_gradient_vanishes_on_chord() {
    let g = interior_length_gradient([0.3, 0.0], [-1.0, 0.0], [1.0, 0.0]);
    assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15);
    let g = interior_length_gradient([0.3, 0.2], [-1.0, 0.0], [1.0, 0.0]);
    assert!(g[1] > 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gradient_matches_central_differences(a in 0.0f64..1.0, b in 0.1f64..0.45, c3 in 0.1f64..0.45) {
        let c = ellipse();
        let per = c.total_length();
        let cfg = PolygonConfig::new(vec![a * per, (a + b) * per, (a + b + c3) * per]);
        let g = length_gradient(&c, &cfg).unwrap();
        let fd = central_gradient(&c, &cfg, 1e-5);
        for (x, y) in g.iter().zip(&fd) {
            prop_assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn billiard_map_is_symplectic(phi in 0.0f64..9.6, p in -0.8f64..0.8) {
        let c = ellipse();
        let j = monodromy(&c, BilliardState { phi, p }, 1, 1e-5).unwrap();
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        prop_assert!((det - 1.0).abs() < 1e-6, "det {}", det);
    }
}
