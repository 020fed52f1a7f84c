use serde::Deserialize;
use wavetrace::geometry::CurveSpec;
use wavetrace::Scaling;

/// Commands accepted on the command line or in the `command` key.
pub const COMMANDS: &[&str] = &["orbits", "spectrum", "disc-trace", "bem-trace", "invariants", "validate", "selftest"];

/// Bundled disc configuration, used when no `--config` is given.
pub const BUNDLED_DISC: &str = include_str!("../configs/disc.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<String>,
    pub curve: CurveSpec,
    #[serde(default)]
    pub orbits: OrbitsSection,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub trace: TraceSection,
    #[serde(default)]
    pub invariants: InvariantsSection,
    pub operator: Option<OperatorSection>,
    pub tail: Option<TailSection>,
    #[serde(default)]
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitsSection {
    /// Link counts to search.
    pub m: Vec<usize>,
    pub seeds_per_axis: usize,
    pub rotation_offsets: usize,
    pub newton_tol: f64,
}

impl Default for OrbitsSection {
    fn default() -> Self {
        OrbitsSection { m: vec![2, 3], seeds_per_axis: 6, rotation_offsets: 16, newton_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    pub l_max: f64,
    pub q_max: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { l_max: 10.0, q_max: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingName {
    Constant,
    Logarithmic,
}

impl From<ScalingName> for Scaling {
    fn from(s: ScalingName) -> Self {
        match s {
            ScalingName::Constant => Scaling::Constant,
            ScalingName::Logarithmic => Scaling::Logarithmic,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    pub l_center: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub scaling: ScalingName,
    pub k_min: f64,
    pub k_max: f64,
    pub k_step: f64,
    /// Bessel-zero cutoff above `k` for the disc oracle.
    pub lambda_margin: f64,
    /// Reflection count of the BEM term.
    pub m: usize,
    /// Terms in the expansion fit; 0 skips the fit.
    pub j: usize,
    pub points_per_wavelength: f64,
    pub moment_order: usize,
}

impl Default for TraceSection {
    fn default() -> Self {
        TraceSection {
            l_center: 4.0,
            epsilon: 0.25,
            tau: 0.0,
            scaling: ScalingName::Constant,
            k_min: 60.0,
            k_max: 140.0,
            k_step: 10.0,
            lambda_margin: 60.0,
            m: 2,
            j: 2,
            points_per_wavelength: 10.0,
            moment_order: 3,
        }
    }
}

impl TraceSection {
    pub fn k_values(&self) -> Vec<f64> {
        let n = ((self.k_max - self.k_min) / self.k_step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.k_min + self.k_step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvariantsSection {
    /// Link count of the orbit.
    pub m: usize,
    /// Explicit seed (arclength vertices); the longest orbit of `m` links otherwise.
    pub seed: Option<Vec<f64>>,
    pub r: Vec<usize>,
    pub j_max: usize,
    pub tau: f64,
    pub delta: f64,
    /// `j` values of the bouncing-ball comparison report.
    pub compare_j: Vec<usize>,
    /// `(r, |B_1|)` from trace fits, compared against the pipeline.
    pub trace_b1: Vec<(usize, f64)>,
}

impl Default for InvariantsSection {
    fn default() -> Self {
        InvariantsSection {
            m: 2,
            seed: None,
            r: vec![1],
            j_max: 2,
            tau: 0.0,
            delta: 0.75,
            compare_j: vec![1, 2],
            trace_b1: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub k: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default = "default_scaling")]
    pub scaling: ScalingName,
    pub nodes: usize,
    #[serde(default = "default_kind")]
    pub kind: String,
}

fn default_scaling() -> ScalingName {
    ScalingName::Constant
}

fn default_kind() -> String {
    "n".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSection {
    pub vertices: Vec<f64>,
    pub radius: f64,
    pub k: Vec<f64>,
    pub m0: Vec<usize>,
    pub tau: Vec<f64>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
}

fn default_half_width() -> f64 {
    4.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub modes: usize,
    pub nodes: usize,
    pub k_re: f64,
    pub k_im: f64,
    pub test_points: usize,
    pub tolerance: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { modes: 20, nodes: 256, k_re: 15.0, k_im: 0.5, test_points: 6, tolerance: 1e-6 }
    }
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

impl JobConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: JobConfig = toml::from_str(text).map_err(|e| e.message().to_string())?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        if let Some(c) = &self.command {
            if !COMMANDS.contains(&c.as_str()) {
                return Err(format!("unknown command '{c}'"));
            }
        }
        positive("curve.reparam_tol", self.curve.reparam_tol)?;
        positive("orbits.newton_tol", self.orbits.newton_tol)?;
        if self.orbits.m.iter().any(|&m| m < 2) {
            return Err("orbits.m entries must be >= 2".into());
        }
        positive("spectrum.l_max", self.spectrum.l_max)?;
        let t = &self.trace;
        positive("trace.l_center", t.l_center)?;
        positive("trace.epsilon", t.epsilon)?;
        positive("trace.k_step", t.k_step)?;
        positive("trace.k_min", t.k_min)?;
        positive("trace.points_per_wavelength", t.points_per_wavelength)?;
        if !(t.k_max > t.k_min) {
            return Err(format!("trace k range must increase: [{}, {}]", t.k_min, t.k_max));
        }
        if t.tau < 0.0 || self.invariants.tau < 0.0 {
            return Err("tau must be non-negative".into());
        }
        if self.invariants.r.is_empty() || self.invariants.r.contains(&0) {
            return Err("invariants.r must list positive iterates".into());
        }
        if let Some(op) = &self.operator {
            positive("operator.k", op.k)?;
            if !["n", "n0", "n1", "s", "ndot"].contains(&op.kind.as_str()) {
                return Err(format!("operator.kind '{}' not one of n, n0, n1, s, ndot", op.kind));
            }
        }
        if let Some(tl) = &self.tail {
            positive("tail.radius", tl.radius)?;
            positive("tail.half_width", tl.half_width)?;
            if tl.k.windows(2).any(|w| w[1] <= w[0]) {
                return Err("tail.k must increase".into());
            }
        }
        positive("validate.tolerance", self.validate.tolerance)?;
        Ok(())
    }
}
