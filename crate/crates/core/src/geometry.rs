//! Smooth closed plane curves in arclength parametrization.
//!
//! Every shape exposes Taylor series of its raw parametrization; frames,
//! curvature and local graph jets are derived from those series, so jets are
//! exact up to rounding rather than finite-difference estimates.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::series::Series;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

const TWO_PI: f64 = 2.0 * PI;

/// Cap on the jet order for analytic shapes.
pub const MAX_JET_ORDER: usize = 30;
/// Cap on the degree of graph-pair series data.
pub const GRAPH_DEGREE_CAP: usize = 16;

/// Raw (non-arclength) description of a closed curve, traversed
/// counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(θ) = cos[0] + Σ_{m≥1} cos[m] cos mθ + sin[m] sin mθ` (`sin[0]` ignored).
    Fourier { cos: Vec<f64>, sin: Vec<f64> },
    /// Two vertices at `(0, ±half_separation)` with local boundary graphs
    /// `top`, `bottom` (power-series coefficients in the inward frame:
    /// abscissa along the counter-clockwise tangent, ordinate along the
    /// inward normal), joined by a circle of radius `half_separation`
    /// through polar blending outside angular windows of half-width `window`.
    GraphPair { half_separation: f64, top: Vec<f64>, bottom: Vec<f64>, window: f64 },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidCurve(m.to_string()));
        match self {
            Shape::Circle { radius } if !(*radius > 0.0) => bad("circle radius must be positive"),
            Shape::Ellipse { a, b } if !(*a > 0.0 && *b > 0.0) => bad("ellipse semi-axes must be positive"),
            Shape::Fourier { cos, .. } if cos.is_empty() || !(cos[0] > 0.0) => {
                bad("fourier shape needs a positive mean radius cos[0]")
            }
            Shape::GraphPair { half_separation, top, bottom, window } => {
                if !(*half_separation > 0.0) || !(*window > 0.0 && *window < FRAC_PI_2) {
                    return bad("graph_pair needs half_separation > 0 and window in (0, π/2)");
                }
                if top.len() > GRAPH_DEGREE_CAP + 1 || bottom.len() > GRAPH_DEGREE_CAP + 1 {
                    return bad("graph_pair series degree exceeds cap 16");
                }
                for g in [top, bottom] {
                    if g.iter().take(2).any(|v| *v != 0.0) {
                        return bad("graph_pair series must start at degree 2 (tangency)");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Highest jet order the representation supports.
    pub fn max_jet_order(&self) -> usize {
        match self {
            Shape::GraphPair { .. } => GRAPH_DEGREE_CAP,
            _ => MAX_JET_ORDER,
        }
    }

    /// Taylor series of the raw parametrization `(x(θ0 + s), y(θ0 + s))`.
    pub fn raw_series(&self, theta0: f64, order: usize) -> (Series, Series) {
        match self {
            Shape::Circle { radius } => {
                let (c, s) = Series::cos_sin(theta0, order);
                (c.scale(*radius), s.scale(*radius))
            }
            Shape::Ellipse { a, b } => {
                let (c, s) = Series::cos_sin(theta0, order);
                (c.scale(*a), s.scale(*b))
            }
            Shape::Fourier { cos, sin } => {
                let r = fourier_radius_series(cos, sin, theta0, order);
                polar_to_xy(&r, theta0, order)
            }
            Shape::GraphPair { .. } => {
                let r = self.graph_pair_radius_series(theta0, order);
                polar_to_xy(&r, theta0, order)
            }
        }
    }

    /// `(q, q', q'')` of the raw parametrization.
    pub fn raw_derivatives(&self, theta: f64) -> [[f64; 2]; 3] {
        match self {
            Shape::Circle { radius: r } => {
                let (c, s) = (theta.cos(), theta.sin());
                [[r * c, r * s], [-r * s, r * c], [-r * c, -r * s]]
            }
            Shape::Ellipse { a, b } => {
                let (c, s) = (theta.cos(), theta.sin());
                [[a * c, b * s], [-a * s, b * c], [-a * c, -b * s]]
            }
            _ => {
                let (x, y) = self.raw_series(theta, 2);
                [[x.c[0], y.c[0]], [x.c[1], y.c[1]], [2.0 * x.c[2], 2.0 * y.c[2]]]
            }
        }
    }

    /// Polar radius of the graph pair as a series in `s = θ - θ0`.
    fn graph_pair_radius_series(&self, theta0: f64, order: usize) -> Series {
        let Shape::GraphPair { half_separation: h, top, bottom, window } = self else {
            unreachable!()
        };
        let th = theta0.rem_euclid(TWO_PI);
        // windows are narrower than π/2, so at most one vertex graph is active
        for (center, jets, is_top) in [(FRAC_PI_2, top, true), (3.0 * FRAC_PI_2, bottom, false)] {
            let delta = th - center;
            if delta.abs() >= *window {
                continue;
            }
            let w = window_weight_series(delta, *window, order);
            let rg = graph_radius_series(*h, jets, is_top, theta0, order);
            let base = Series::constant(*h, order);
            return &base + &(&w * &(&rg - &base));
        }
        Series::constant(*h, order)
    }
}

fn polar_to_xy(r: &Series, theta0: f64, order: usize) -> (Series, Series) {
    let (c, s) = Series::cos_sin(theta0, order);
    (r * &c, r * &s)
}

fn fourier_radius_series(cos: &[f64], sin: &[f64], theta0: f64, order: usize) -> Series {
    let mut out = Series::zero(order);
    out.c[0] = cos[0];
    let nmodes = cos.len().max(sin.len());
    for m in 1..nmodes {
        let a = cos.get(m).copied().unwrap_or(0.0);
        let b = sin.get(m).copied().unwrap_or(0.0);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let mf = m as f64;
        let mut scale = 1.0;
        for k in 0..=order {
            if k > 0 {
                scale *= mf / k as f64;
            }
            let ph = mf * theta0 + k as f64 * FRAC_PI_2;
            out.c[k] += scale * (a * ph.cos() + b * ph.sin());
        }
    }
    out
}

/// Plateau weight `χ(Δ/window)` around a vertex direction as a series in `s`.
fn window_weight_series(delta: f64, window: f64, order: usize) -> Series {
    // weight = smooth_step(2 (1 - |Δ + s| / window))
    let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
    let mut sigma = Series::zero(order);
    sigma.c[0] = 2.0 * (1.0 - delta.abs() / window);
    if order >= 1 {
        sigma.c[1] = -2.0 * sign / window;
    }
    if sigma.c[0] >= 1.0 {
        return Series::constant(1.0, order);
    }
    if sigma.c[0] <= 0.0 {
        return Series::zero(order);
    }
    let a = sigma.recip().scale(-1.0).exp();
    let one_minus = &Series::constant(1.0, order) - &sigma;
    let b = one_minus.recip().scale(-1.0).exp();
    &a * &(&a + &b).recip()
}

/// Point on a graph-pair vertex graph at local abscissa `x` (global coords).
fn graph_point(h: f64, g: &Series, is_top: bool, x: f64) -> [f64; 2] {
    let gv = g.eval(x);
    if is_top {
        [-x, h - gv]
    } else {
        [x, -h + gv]
    }
}

/// Polar radius series of the vertex graph near polar angle `theta0`.
fn graph_radius_series(h: f64, jets: &[f64], is_top: bool, theta0: f64, order: usize) -> Series {
    let mut coeffs = jets.to_vec();
    coeffs.resize(coeffs.len().max(3), 0.0);
    let g = Series::from_coeffs(coeffs);
    let wrap = |a: f64| (a + PI).rem_euclid(TWO_PI) - PI;
    let angle_err = |x: f64| {
        let p = graph_point(h, &g, is_top, x);
        wrap(p[1].atan2(p[0]) - theta0)
    };
    // Newton with numerical slope; the polar angle is monotone in x near a vertex.
    let mut x = if is_top { -h / theta0.tan() } else { h / theta0.tan() };
    if !x.is_finite() {
        x = 0.0;
    }
    for _ in 0..60 {
        let f = angle_err(x);
        let d = (angle_err(x + 1e-7) - angle_err(x - 1e-7)) / 2e-7;
        let step = f / d;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let gs = g.shifted(x).truncate(order.max(1));
    let order = order.max(1);
    let xi = Series::var(order);
    let xs = &Series::constant(x, order) + &xi;
    let (gx, gy) = if is_top {
        (xs.scale(-1.0), &Series::constant(h, order) - &gs)
    } else {
        (xs, &gs - &Series::constant(h, order))
    };
    let (x0, y0) = (gx.c[0], gy.c[0]);
    let cross = &gy.scale(x0) - &gx.scale(y0);
    let dot = &gx.scale(x0) + &gy.scale(y0);
    let mut ratio = &cross * &dot.recip();
    ratio.c[0] = 0.0;
    let dtheta = ratio.atan();
    let xi_of_s = dtheta.reversion();
    let rho = (&(&gx * &gx) + &(&gy * &gy)).sqrt();
    rho.compose(&xi_of_s)
}

/// Frame at a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub inward_normal: [f64; 2],
    pub curvature: f64,
}

/// Structured-text curve specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub shape: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub fourier_cos: Vec<f64>,
    #[serde(default)]
    pub fourier_sin: Vec<f64>,
    #[serde(default)]
    pub graph_top: Vec<f64>,
    #[serde(default)]
    pub graph_bottom: Vec<f64>,
    #[serde(default = "default_reparam_tol")]
    pub reparam_tol: f64,
}

fn default_reparam_tol() -> f64 {
    DEFAULT_REPARAM_TOL
}

pub const DEFAULT_REPARAM_TOL: f64 = 1e-11;

impl CurveSpec {
    pub fn to_shape(&self) -> Result<Shape> {
        let p = &self.params;
        let need = |n: usize| {
            if p.len() < n {
                Err(Error::InvalidCurve(format!("shape {} needs {n} params", self.shape)))
            } else {
                Ok(())
            }
        };
        let shape = match self.shape.as_str() {
            "circle" => {
                need(1)?;
                Shape::Circle { radius: p[0] }
            }
            "ellipse" => {
                need(2)?;
                Shape::Ellipse { a: p[0], b: p[1] }
            }
            "fourier" => Shape::Fourier { cos: self.fourier_cos.clone(), sin: self.fourier_sin.clone() },
            "graph_pair" => {
                need(1)?;
                Shape::GraphPair {
                    half_separation: p[0],
                    window: p.get(1).copied().unwrap_or(0.35),
                    top: self.graph_top.clone(),
                    bottom: self.graph_bottom.clone(),
                }
            }
            other => return Err(Error::InvalidCurve(format!("unknown shape '{other}'"))),
        };
        shape.validate()?;
        Ok(shape)
    }
}

const GL_ORDER: usize = 20;

/// Closed curve with an arclength table. Immutable after construction.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    shape: Shape,
    total_length: f64,
    reparam_tol: f64,
    /// Panel boundaries in the raw parameter, uniform on `[0, 2π]`.
    panels: usize,
    /// Cumulative arclength at each panel start (`panels + 1` entries).
    cumulative: Vec<f64>,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
}

impl BoundaryCurve {
    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(Shape::Circle { radius }, DEFAULT_REPARAM_TOL)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(Shape::Ellipse { a, b }, DEFAULT_REPARAM_TOL)
    }

    pub fn fourier(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(Shape::Fourier { cos, sin }, DEFAULT_REPARAM_TOL)
    }

    pub fn from_spec(spec: &CurveSpec) -> Result<Self> {
        Self::new(spec.to_shape()?, spec.reparam_tol)
    }

    /// Build the arclength table for a raw shape (arclength reparametrization).
    pub fn new(shape: Shape, reparam_tol: f64) -> Result<Self> {
        shape.validate()?;
        if !(reparam_tol > 0.0) {
            return Err(Error::InvalidCurve("reparam_tol must be positive".into()));
        }
        check_simple(&shape)?;
        let (gl_x, gl_w) = gauss_legendre(GL_ORDER);
        let mut panels = 64;
        let mut prev: Option<Vec<f64>> = None;
        loop {
            let cumulative = cumulative_table(&shape, panels, &gl_x, &gl_w);
            if let Some(p) = &prev {
                // compare at shared panel boundaries
                let err = (0..p.len())
                    .map(|i| (p[i] - cumulative[2 * i]).abs())
                    .fold(0.0, f64::max);
                let total = cumulative[panels];
                if err <= reparam_tol * total.max(1.0) {
                    return Ok(BoundaryCurve {
                        shape,
                        total_length: total,
                        reparam_tol,
                        panels,
                        cumulative,
                        gl_x,
                        gl_w,
                    });
                }
                if panels >= 8192 {
                    return Err(Error::ToleranceNotMet { tol: reparam_tol, achieved: err / total });
                }
            }
            prev = Some(cumulative);
            panels *= 2;
        }
    }

    /// Rebuild the table (idempotent up to `reparam_tol`).
    pub fn reparametrize(&self, reparam_tol: f64) -> Result<Self> {
        Self::new(self.shape.clone(), reparam_tol)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn reparam_tol(&self) -> f64 {
        self.reparam_tol
    }

    fn speed(&self, theta: f64) -> f64 {
        let d = self.shape.raw_derivatives(theta)[1];
        d[0].hypot(d[1])
    }

    /// Arclength from raw parameter 0 to `theta ∈ [0, 2π]`.
    pub fn arclength_of(&self, theta: f64) -> f64 {
        let h = TWO_PI / self.panels as f64;
        let p = ((theta / h).floor() as usize).min(self.panels - 1);
        let lo = p as f64 * h;
        let half = 0.5 * (theta - lo);
        let part: f64 = self
            .gl_x
            .iter()
            .zip(&self.gl_w)
            .map(|(x, w)| w * self.speed(lo + half * (x + 1.0)))
            .sum();
        self.cumulative[p] + half * part
    }

    /// Raw parameter for arclength `phi` (reduced modulo the perimeter).
    pub fn raw_param(&self, phi: f64) -> f64 {
        let s = phi.rem_euclid(self.total_length);
        let p = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
            Ok(i) => return i as f64 * TWO_PI / self.panels as f64,
            Err(i) => i.saturating_sub(1).min(self.panels - 1),
        };
        let h = TWO_PI / self.panels as f64;
        let (lo, hi) = (p as f64 * h, (p + 1) as f64 * h);
        let frac = (s - self.cumulative[p]) / (self.cumulative[p + 1] - self.cumulative[p]);
        let mut theta = lo + frac * h;
        for _ in 0..20 {
            let step = (self.arclength_of(theta) - s) / self.speed(theta);
            theta = (theta - step).clamp(lo, hi);
            if step.abs() < 1e-15 {
                break;
            }
        }
        theta
    }

    /// Point, unit tangent, inward unit normal and signed curvature at
    /// arclength `phi`. The unit circle has curvature +1.
    pub fn eval_frame(&self, phi: f64) -> Frame {
        frame_from_raw(self.shape.raw_derivatives(self.raw_param(phi)))
    }

    pub fn point(&self, phi: f64) -> [f64; 2] {
        self.shape.raw_derivatives(self.raw_param(phi))[0]
    }

    /// Local boundary graph over the tangent line at `phi0`, ordinate along
    /// the inward normal: `f(0) = f'(0) = 0`, `f''(0) = κ`.
    pub fn local_graph(&self, phi0: f64, order: usize) -> Result<Series> {
        let avail = self.shape.max_jet_order();
        if order > avail {
            return Err(Error::OrderUnavailable { requested: order, available: avail });
        }
        let ord = order.max(2);
        let theta0 = self.raw_param(phi0);
        let (x, y) = self.shape.raw_series(theta0, ord);
        let fr = frame_from_raw([[x.c[0], y.c[0]], [x.c[1], y.c[1]], [2.0 * x.c[2], 2.0 * y.c[2]]]);
        let mut dx = x.clone();
        dx.c[0] = 0.0;
        let mut dy = y.clone();
        dy.c[0] = 0.0;
        let u = &dx.scale(fr.tangent[0]) + &dy.scale(fr.tangent[1]);
        let v = &dx.scale(fr.inward_normal[0]) + &dy.scale(fr.inward_normal[1]);
        let mut f = v.compose(&u.reversion());
        f.c[0] = 0.0;
        f.c[1] = 0.0;
        Ok(f.truncate(order))
    }

    /// Derivatives `f^{(0..=order)}(0)` of the local boundary graph at `phi0`.
    pub fn boundary_jets(&self, phi0: f64, order: usize) -> Result<Vec<f64>> {
        Ok(self.local_graph(phi0, order)?.derivatives())
    }

    /// Enclosed area.
    pub fn area(&self) -> f64 {
        let h = TWO_PI / self.panels as f64;
        let mut a = 0.0;
        for p in 0..self.panels {
            let lo = p as f64 * h;
            for (x, w) in self.gl_x.iter().zip(&self.gl_w) {
                let [q, d, _] = self.shape.raw_derivatives(lo + 0.5 * h * (x + 1.0));
                a += 0.5 * h * w * 0.5 * (q[0] * d[1] - q[1] * d[0]);
            }
        }
        a
    }

    /// Minimum curvature over a sample grid.
    pub fn min_curvature(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| frame_from_raw(self.shape.raw_derivatives(TWO_PI * i as f64 / samples as f64)).curvature)
            .fold(f64::INFINITY, f64::min)
    }

    /// Errors with `NonConvexCurve` unless the curvature is positive everywhere.
    pub fn require_convex(&self) -> Result<()> {
        let k = self.min_curvature(2048);
        if k > 0.0 {
            Ok(())
        } else {
            Err(Error::NonConvexCurve(k))
        }
    }

    /// Stable textual identity for sidecars and manifests.
    pub fn fingerprint(&self) -> String {
        serde_json::to_string(&self.shape).unwrap_or_default()
    }
}

fn frame_from_raw(d: [[f64; 2]; 3]) -> Frame {
    let [q, d1, d2] = d;
    let sp = d1[0].hypot(d1[1]);
    let t = [d1[0] / sp, d1[1] / sp];
    Frame {
        point: q,
        tangent: t,
        inward_normal: [-t[1], t[0]],
        curvature: (d1[0] * d2[1] - d1[1] * d2[0]) / (sp * sp * sp),
    }
}

fn cumulative_table(shape: &Shape, panels: usize, gl_x: &[f64], gl_w: &[f64]) -> Vec<f64> {
    let h = TWO_PI / panels as f64;
    let mut cum = Vec::with_capacity(panels + 1);
    let mut acc = 0.0;
    cum.push(0.0);
    for p in 0..panels {
        let lo = p as f64 * h;
        let part: f64 = gl_x
            .iter()
            .zip(gl_w)
            .map(|(x, w)| {
                let d = shape.raw_derivatives(lo + 0.5 * h * (x + 1.0))[1];
                w * d[0].hypot(d[1])
            })
            .sum();
        acc += 0.5 * h * part;
        cum.push(acc);
    }
    cum
}

fn check_simple(shape: &Shape) -> Result<()> {
    let n = 256;
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|i| shape.raw_derivatives(TWO_PI * i as f64 / n as f64)[0])
        .collect();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in (i + 2)..n {
            if (j + 1) % n == i {
                continue;
            }
            let (c, d) = (pts[j], pts[(j + 1) % n]);
            let d1 = cross(a, b, c);
            let d2 = cross(a, b, d);
            let d3 = cross(c, d, a);
            let d4 = cross(c, d, b);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Err(Error::NonSimpleCurve(format!("segments {i} and {j} cross")));
            }
        }
    }
    // orientation: positive signed area means counter-clockwise
    let area: f64 = (0..n).map(|i| cross([0.0, 0.0], pts[i], pts[(i + 1) % n])).sum();
    if area <= 0.0 {
        return Err(Error::InvalidCurve("curve must be traversed counter-clockwise".into()));
    }
    Ok(())
}
