//! Strict TOML experiment configuration.
//!
//! Every key is optional; missing keys take the defaults of the chosen
//! experiment and dimension. Unknown keys, duplicate keys and type mismatches
//! are errors that name the offending key.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use magframe::frame::FrameSpec;
use magframe::geometry::{PhasePoint, PhaseSpaceGrid, UniformGrid};
use magframe::magnetics::VectorPotential;
use magframe::superweyl::{double_tapered_trig, gaussian_bump, liouville_symbol, DoubleOrder, DoubleSymbol};
use magframe::C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    Missing(PathBuf),
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyFrame,
    QuantizeRoundtrip,
    GaugeCovariance,
    HsIsometry,
    ProductFormulas,
    SuperDecay,
    Boundedness,
    Liouville,
    SchurDemo,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Self::VerifyFrame,
        Self::QuantizeRoundtrip,
        Self::GaugeCovariance,
        Self::HsIsometry,
        Self::ProductFormulas,
        Self::SuperDecay,
        Self::Boundedness,
        Self::Liouville,
        Self::SchurDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyFrame => "verify-frame",
            Self::QuantizeRoundtrip => "quantize-roundtrip",
            Self::GaugeCovariance => "gauge-covariance",
            Self::HsIsometry => "hs-isometry",
            Self::ProductFormulas => "product-formulas",
            Self::SuperDecay => "super-decay",
            Self::Boundedness => "boundedness",
            Self::Liouville => "liouville",
            Self::SchurDemo => "schur-demo",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    /// Tolerance keys accepted under `[tolerances]`, with defaults.
    fn tolerances(self) -> &'static [(&'static str, f64)] {
        match self {
            Self::VerifyFrame => &[("parseval", 1e-8)],
            Self::QuantizeRoundtrip => &[("roundtrip", 1e-8), ("identity", 1e-10), ("ratio_spread", 1e-6), ("oracle", 1e-6)],
            Self::GaugeCovariance => &[("covariance", 1e-8)],
            Self::HsIsometry => &[("isometry", 1e-7), ("reconstruction", 1e-7)],
            Self::ProductFormulas => &[("contraction", 1e-6), ("factorization", 1e-9)],
            Self::SuperDecay => &[("saturation", 0.05), ("direct", 1e-3)],
            Self::Boundedness => &[("dominance", 1e-6), ("stability", 0.05)],
            Self::Liouville => &[("liouville", 1e-8), ("commutator_bound", 1e-6)],
            Self::SchurDemo => &[("schur", 1e-9)],
        }
    }

    fn uses_families(self) -> bool {
        matches!(self, Self::SuperDecay | Self::Boundedness | Self::Liouville | Self::SchurDemo)
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Vector potential selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {},
    Constant { value: Vec<f64> },
    /// `A = (B/2)(-x_2, x_1)`, d = 2 only.
    Symmetric { field: f64 },
    /// Graded-lex coefficients per component.
    Polynomial { coefficients: Vec<Vec<f64>> },
}

impl PotentialSpec {
    pub fn build(&self, d: usize) -> magframe::Result<VectorPotential> {
        match self {
            Self::Zero {} => Ok(VectorPotential::zero(d)),
            Self::Constant { value } => {
                if value.len() != d {
                    return Err(magframe::Error::DimensionMismatch { expected: d, found: value.len() });
                }
                VectorPotential::constant(value)
            }
            Self::Symmetric { field } => {
                if d != 2 {
                    return Err(magframe::Error::InvalidInput("the symmetric gauge needs dimension 2".into()));
                }
                Ok(VectorPotential::symmetric_gauge(*field))
            }
            Self::Polynomial { coefficients } => VectorPotential::from_coefficients(d, coefficients),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Zero {} => "zero".into(),
            Self::Constant { .. } => "constant".into(),
            Self::Symmetric { .. } => "symmetric".into(),
            Self::Polynomial { .. } => "polynomial".into(),
        }
    }
}

/// Double-symbol family selected by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Constant {
        value: f64,
    },
    /// Product of two tapered trigonometric symbols, class `S^{0,0}_{0,0}`.
    TaperedTrig {
        taper: f64,
        amplitude: f64,
    },
    /// Product of two Gaussian bumps centred at `left` and `right` (`[x.., xi..]`).
    BumpProduct {
        width: f64,
        left: Vec<f64>,
        right: Vec<f64>,
    },
    /// Liouville symbol of `h = amplitude * exp(-|X|^2 / (2 width^2))`.
    Liouville {
        width: f64,
        amplitude: f64,
    },
    /// Double symbol in the binary array format; `order` is `[m_L, m_R]`.
    File {
        path: PathBuf,
        #[serde(default)]
        order: Option<[f64; 2]>,
    },
}

impl FamilySpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Constant { .. } => "constant",
            Self::TaperedTrig { .. } => "tapered-trig",
            Self::BumpProduct { .. } => "bump-product",
            Self::Liouville { .. } => "liouville",
            Self::File { .. } => "file",
        }
    }

    pub fn build(&self, grid: PhaseSpaceGrid) -> magframe::Result<DoubleSymbol> {
        let d = grid.dim();
        let point = |v: &[f64]| {
            if v.len() != 2 * d {
                return Err(magframe::Error::DimensionMismatch { expected: 2 * d, found: v.len() });
            }
            PhasePoint::new(v[..d].to_vec(), v[d..].to_vec())
        };
        let zero = DoubleOrder::Pair(0.0, 0.0);
        Ok(match self {
            Self::Constant { value } => DoubleSymbol::constant(grid, C64::new(*value, 0.0)).with_order(zero, 0.0),
            Self::TaperedTrig { taper, amplitude } => double_tapered_trig(grid, *taper, *amplitude),
            Self::BumpProduct { width, left, right } => DoubleSymbol::product(
                gaussian_bump(grid, &point(left)?, *width).with_order(f64::NEG_INFINITY, 1.0),
                gaussian_bump(grid, &point(right)?, *width).with_order(f64::NEG_INFINITY, 1.0),
            )?
            .with_order(zero, 1.0),
            Self::Liouville { width, amplitude } => {
                let h = gaussian_bump(grid, &PhasePoint::origin(d), *width)
                    .scaled(C64::new(*amplitude, 0.0))
                    .with_order(f64::NEG_INFINITY, 1.0);
                liouville_symbol(&h)
            }
            Self::File { path, order } => {
                let file = std::fs::File::open(path)?;
                let f = DoubleSymbol::read_binary(std::io::BufReader::new(file))?;
                if *f.grid() != grid {
                    return Err(magframe::Error::GridMismatch(format!(
                        "{} is sampled on a different grid than the experiment",
                        path.display()
                    )));
                }
                let [ml, mr] = order.unwrap_or([0.0, 0.0]);
                f.with_order(DoubleOrder::Pair(ml, mr), 0.0)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameConfig {
    /// Lattice truncation `N`.
    pub lattice: usize,
    /// Modulation truncation `K`.
    pub modulation: usize,
}

/// Frame and quadrature of the direct-route cross-check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectConfig {
    pub half_width: f64,
    pub points: usize,
    pub lattice: usize,
    pub modulation: usize,
    pub quadrature_half_width: f64,
    pub quadrature_points: usize,
    pub octuples: usize,
}

/// Fully resolved configuration; serialised verbatim into `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dimension: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub trials: usize,
    /// Half-width of the box holding the centres of random inputs.
    pub spread: f64,
    pub grid: GridConfig,
    pub frame: FrameConfig,
    pub potentials: Vec<PotentialSpec>,
    pub families: Vec<FamilySpec>,
    /// Truncation boxes `[n_box, k_box]`, growing.
    pub boxes: Vec<[usize; 2]>,
    /// Decay weights use all `n, n* <= weight_max`.
    pub weight_max: u32,
    pub tolerances: BTreeMap<String, f64>,
    pub direct: DirectConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    half_width: Option<f64>,
    points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    lattice: Option<usize>,
    modulation: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDirect {
    half_width: Option<f64>,
    points: Option<usize>,
    lattice: Option<usize>,
    modulation: Option<usize>,
    quadrature_half_width: Option<f64>,
    quadrature_points: Option<usize>,
    octuples: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    dimension: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    trials: Option<usize>,
    spread: Option<f64>,
    grid: Option<RawGrid>,
    frame: Option<RawFrame>,
    potentials: Option<Vec<PotentialSpec>>,
    families: Option<Vec<FamilySpec>>,
    boxes: Option<Vec<[usize; 2]>>,
    weight_max: Option<u32>,
    tolerances: Option<BTreeMap<String, f64>>,
    direct: Option<RawDirect>,
}

impl ExperimentConfig {
    /// Defaults of `experiment` in dimension `d`.
    pub fn defaults(experiment: Experiment, d: usize) -> Self {
        use Experiment::*;
        let two = d == 2;
        let (l, m, n, k) = match (experiment, two) {
            (VerifyFrame, false) => (8.0, 512, 7, 48),
            (VerifyFrame, true) => (4.0, 64, 3, 25),
            (QuantizeRoundtrip, false) => (8.0, 128, 7, 16),
            (HsIsometry, false) => (5.0, 448, 4, 128),
            (ProductFormulas, false) => (5.0, 256, 4, 48),
            (SuperDecay, false) => (8.0, 512, 7, 16),
            (Boundedness, false) => (6.0, 288, 3, 24),
            (SchurDemo, false) => (4.0, 64, 2, 3),
            (GaugeCovariance | Liouville, false) => (8.0, 256, 7, 16),
            // Dense compositions dominate; the identity is exact on any grid.
            (Liouville, true) => (4.0, 32, 3, 6),
            (_, true) => (4.0, 48, 3, 6),
        };
        let (trials, spread) = match (experiment, two) {
            (VerifyFrame, false) => (20, 4.0),
            (VerifyFrame, true) => (20, 1.0),
            (QuantizeRoundtrip, _) => (10, l / 3.0),
            (GaugeCovariance, _) => (5, 1.0),
            (HsIsometry | ProductFormulas, _) => (10, 0.5),
            (Boundedness, _) => (20, 0.5),
            (Liouville, _) => (10, 0.5),
            (SuperDecay, _) => (1, 0.5),
            (SchurDemo, _) => (20, 0.5),
        };
        let potentials = match (experiment, two) {
            (VerifyFrame, false) => vec![PotentialSpec::Zero {}, PotentialSpec::Constant { value: vec![0.7] }],
            (VerifyFrame, true) => vec![
                PotentialSpec::Zero {},
                PotentialSpec::Constant { value: vec![0.7, -0.3] },
                PotentialSpec::Symmetric { field: 0.5 },
            ],
            (GaugeCovariance, true) => vec![PotentialSpec::Symmetric { field: 0.5 }],
            (GaugeCovariance, false) => vec![PotentialSpec::Constant { value: vec![0.7] }],
            (HsIsometry | ProductFormulas, false) => vec![PotentialSpec::Constant { value: vec![0.4] }],
            (SuperDecay | Boundedness | SchurDemo, _) => vec![PotentialSpec::Zero {}],
            (_, true) => vec![PotentialSpec::Zero {}, PotentialSpec::Symmetric { field: 0.5 }],
            (_, false) => vec![PotentialSpec::Zero {}, PotentialSpec::Constant { value: vec![0.7] }],
        };
        let zeros = vec![0.0; 2 * d];
        let shifted: Vec<f64> = (0..2 * d).map(|i| if i == 0 { 0.5 } else { -0.3 }).collect();
        let families = match experiment {
            SuperDecay => vec![FamilySpec::Constant { value: 1.0 }, FamilySpec::TaperedTrig { taper: 1.5, amplitude: 0.8 }],
            Boundedness => vec![
                FamilySpec::Constant { value: 1.0 },
                FamilySpec::TaperedTrig { taper: 1.5, amplitude: 0.8 },
                FamilySpec::BumpProduct { width: 1.0, left: shifted, right: zeros },
            ],
            Liouville => vec![FamilySpec::Liouville { width: 1.0, amplitude: 1.0 }],
            SchurDemo => vec![
                FamilySpec::BumpProduct { width: 1.0, left: shifted, right: zeros },
                FamilySpec::Liouville { width: 1.0, amplitude: 1.0 },
            ],
            _ => Vec::new(),
        };
        let boxes = match experiment {
            SuperDecay => vec![[1, 4], [2, 8], [3, 12]],
            Boundedness => vec![[3, 8], [3, 16], [3, 24]],
            _ => Vec::new(),
        };
        let mut tolerances: BTreeMap<String, f64> =
            experiment.tolerances().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        if experiment == VerifyFrame && two {
            // Coarser grid in two dimensions.
            tolerances.insert("parseval".into(), 1e-5);
        }
        Self {
            experiment,
            dimension: d,
            seed: 0,
            out: PathBuf::from("out"),
            trials,
            spread,
            grid: GridConfig { half_width: l, points: m },
            frame: FrameConfig { lattice: n, modulation: k },
            potentials,
            families,
            boxes,
            weight_max: 4,
            tolerances,
            direct: DirectConfig {
                half_width: 10.0,
                points: 160,
                lattice: 2,
                modulation: 4,
                quadrature_half_width: 6.0,
                quadrature_points: 48,
                octuples: 10,
            },
        }
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    pub fn position_grid(&self) -> magframe::Result<UniformGrid> {
        UniformGrid::new(self.dimension, self.grid.half_width, self.grid.points)
    }

    pub fn frame_spec(&self, potential: &VectorPotential) -> magframe::Result<FrameSpec> {
        FrameSpec::new(self.position_grid()?, self.frame.lattice, self.frame.modulation, potential.clone())
    }

    /// Checks every invariant that can be checked before running.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = self.dimension;
        if d != 1 && d != 2 {
            return Err(invalid(format!("dimension must be 1 or 2, got {d}")));
        }
        check_grid("grid", self.grid.half_width, self.grid.points)?;
        check_frame("frame", self.grid.half_width, self.grid.points, self.frame.lattice, self.frame.modulation)?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if !(self.spread.is_finite() && self.spread > 0.0) {
            return Err(invalid(format!("spread must be positive and finite, got {}", self.spread)));
        }
        if self.spread >= self.grid.half_width {
            return Err(invalid(format!(
                "spread = {} must be smaller than grid.half_width = {}",
                self.spread, self.grid.half_width
            )));
        }
        if self.potentials.is_empty() {
            return Err(invalid("potentials must not be empty"));
        }
        for p in &self.potentials {
            p.build(d).map_err(|e| invalid(format!("potentials: {e}")))?;
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(invalid(format!("tolerances.{k} must be positive and finite, got {v}")));
            }
        }
        if self.experiment.uses_families() {
            if self.families.is_empty() {
                return Err(invalid("families must not be empty"));
            }
            let grid = PhaseSpaceGrid::new(self.position_grid().map_err(|e| invalid(e.to_string()))?);
            for f in &self.families {
                let sym = f.build(grid).map_err(|e| invalid(format!("families ({}): {e}", f.label())))?;
                if self.experiment == Experiment::Boundedness && !sym.order().is_nonpositive() {
                    return Err(invalid(format!(
                        "families ({}): declared order {:?} is positive, boundedness requires order <= 0",
                        f.label(),
                        sym.order()
                    )));
                }
            }
        }
        match self.experiment {
            Experiment::SuperDecay | Experiment::Boundedness => {
                if self.boxes.len() < 3 && self.experiment == Experiment::SuperDecay {
                    return Err(invalid(format!("boxes needs at least 3 entries, got {}", self.boxes.len())));
                }
                if self.boxes.len() < 2 {
                    return Err(invalid(format!("boxes needs at least 2 entries, got {}", self.boxes.len())));
                }
                for b in &self.boxes {
                    if b[0] > self.frame.lattice || b[1] > self.frame.modulation {
                        return Err(invalid(format!(
                            "box {b:?} exceeds the frame truncation [{}, {}]",
                            self.frame.lattice, self.frame.modulation
                        )));
                    }
                }
                if self.boxes.windows(2).any(|w| w[1][0] < w[0][0] || w[1][1] < w[0][1]) {
                    return Err(invalid("boxes must grow monotonically"));
                }
            }
            _ => {}
        }
        if self.experiment == Experiment::SuperDecay {
            let c = &self.direct;
            if d != 1 {
                return Err(invalid("super-decay supports dimension 1 only (the direct cross-check is 4-dimensional at d = 1)"));
            }
            check_grid("direct", c.half_width, c.points)?;
            check_frame("direct", c.half_width, c.points, c.lattice, c.modulation)?;
            check_grid("direct.quadrature", c.quadrature_half_width, c.quadrature_points)?;
            if c.lattice < 1 || c.modulation < 1 {
                return Err(invalid("direct.lattice and direct.modulation must be at least 1"));
            }
            if c.quadrature_half_width + c.lattice as f64 >= c.half_width {
                return Err(invalid(format!(
                    "direct.quadrature_half_width + direct.lattice = {} must be smaller than direct.half_width = {} \
                     so translated frame vectors stay on the grid",
                    c.quadrature_half_width + c.lattice as f64,
                    c.half_width
                )));
            }
            if c.octuples == 0 {
                return Err(invalid("direct.octuples must be at least 1"));
            }
        }
        Ok(())
    }
}

fn check_grid(section: &str, l: f64, m: usize) -> Result<(), ConfigError> {
    if m == 0 || m % 2 != 0 {
        return Err(invalid(format!(
            "{section}.points = {m} violates the grid invariant: the number of points M must be even and positive"
        )));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(invalid(format!("{section}.half_width = {l} must be positive and finite")));
    }
    Ok(())
}

fn check_frame(section: &str, l: f64, m: usize, n: usize, k: usize) -> Result<(), ConfigError> {
    if l < n as f64 + 1.0 {
        return Err(invalid(format!(
            "{section}: lattice truncation N = {n} violates L >= N + 1 (half_width L = {l})"
        )));
    }
    let nyquist = m as f64 * PI / l;
    if 2.0 * k as f64 >= nyquist {
        return Err(invalid(format!(
            "{section}: modulation truncation K = {k} violates 2K < M pi / L = {nyquist:.6}"
        )));
    }
    Ok(())
}

/// Reads and resolves a config for `experiment`. The file's optional
/// `experiment` key must agree with the requested one.
pub fn parse_config(path: &Path, experiment: Experiment) -> Result<ExperimentConfig, ConfigError> {
    if !path.exists() {
        return Err(ConfigError::Missing(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, experiment)
}

pub fn parse_config_str(text: &str, experiment: Experiment) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim_end().to_string()))?;
    if let Some(name) = &raw.experiment {
        let named = Experiment::from_name(name).ok_or_else(|| {
            invalid(format!(
                "experiment = \"{name}\" is not one of {}",
                Experiment::ALL.map(|e| e.name()).join(", ")
            ))
        })?;
        if named != experiment {
            return Err(invalid(format!("experiment = \"{name}\" conflicts with the requested experiment {experiment}")));
        }
    }
    let d = raw.dimension.unwrap_or(1);
    let mut c = ExperimentConfig::defaults(experiment, d);
    if let Some(v) = raw.seed {
        c.seed = v;
    }
    if let Some(v) = raw.out {
        c.out = v;
    }
    if let Some(v) = raw.trials {
        c.trials = v;
    }
    if let Some(v) = raw.spread {
        c.spread = v;
    }
    if let Some(g) = raw.grid {
        c.grid.half_width = g.half_width.unwrap_or(c.grid.half_width);
        c.grid.points = g.points.unwrap_or(c.grid.points);
    }
    if let Some(f) = raw.frame {
        c.frame.lattice = f.lattice.unwrap_or(c.frame.lattice);
        c.frame.modulation = f.modulation.unwrap_or(c.frame.modulation);
    }
    if let Some(v) = raw.potentials {
        c.potentials = v;
    }
    if let Some(v) = raw.families {
        c.families = v;
    }
    if let Some(v) = raw.boxes {
        c.boxes = v;
    }
    if let Some(v) = raw.weight_max {
        c.weight_max = v;
    }
    if let Some(t) = raw.tolerances {
        for (k, v) in t {
            if !c.tolerances.contains_key(&k) {
                let known: Vec<_> = c.tolerances.keys().map(String::as_str).collect();
                return Err(invalid(format!(
                    "unknown key `tolerances.{k}` for {experiment}; expected one of {}",
                    known.join(", ")
                )));
            }
            c.tolerances.insert(k, v);
        }
    }
    if let Some(r) = raw.direct {
        let dc = &mut c.direct;
        dc.half_width = r.half_width.unwrap_or(dc.half_width);
        dc.points = r.points.unwrap_or(dc.points);
        dc.lattice = r.lattice.unwrap_or(dc.lattice);
        dc.modulation = r.modulation.unwrap_or(dc.modulation);
        dc.quadrature_half_width = r.quadrature_half_width.unwrap_or(dc.quadrature_half_width);
        dc.quadrature_points = r.quadrature_points.unwrap_or(dc.quadrature_points);
        dc.octuples = r.octuples.unwrap_or(dc.octuples);
    }
    c.validate()?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        for e in Experiment::ALL {
            let c = parse_config_str("", e).unwrap();
            assert_eq!(c, ExperimentConfig::defaults(e, 1));
        }
        let c = parse_config_str("dimension = 2", Experiment::VerifyFrame).unwrap();
        assert_eq!(c, ExperimentConfig::defaults(Experiment::VerifyFrame, 2));
    }

    #[test]
    fn strictness() {
        let e = Experiment::VerifyFrame;
        let msg = parse_config_str("foo = 1", e).unwrap_err().to_string();
        assert!(msg.contains("foo"), "{msg}");
        let msg = parse_config_str("[grid]\nfoo = 1", e).unwrap_err().to_string();
        assert!(msg.contains("foo"), "{msg}");
        let msg = parse_config_str("seed = 1\nseed = 2", e).unwrap_err().to_string();
        assert!(msg.contains("seed"), "{msg}");
        let msg = parse_config_str("seed = \"x\"", e).unwrap_err().to_string();
        assert!(msg.contains("seed"), "{msg}");
        let msg = parse_config_str("[tolerances]\nparseval = 1e-9\nbogus = 1.0", e).unwrap_err().to_string();
        assert!(msg.contains("bogus"), "{msg}");
        let msg = parse_config_str("experiment = \"liouville\"", e).unwrap_err().to_string();
        assert!(msg.contains("conflicts"), "{msg}");
        let msg = parse_config_str("[[potentials]]\nkind = \"zero\"\nextra = 2", e).unwrap_err().to_string();
        assert!(msg.contains("extra"), "{msg}");
    }

    #[test]
    fn validation_names_the_invariant() {
        let msg = parse_config_str("[grid]\npoints = 511", Experiment::VerifyFrame).unwrap_err().to_string();
        assert!(msg.contains("grid.points") && msg.contains("even"), "{msg}");
        let msg = parse_config_str("[frame]\nmodulation = 400", Experiment::VerifyFrame).unwrap_err().to_string();
        assert!(msg.contains("2K < M pi / L"), "{msg}");
        let msg = parse_config_str("[frame]\nlattice = 8", Experiment::VerifyFrame).unwrap_err().to_string();
        assert!(msg.contains("L >= N + 1"), "{msg}");
        let msg = parse_config_str("boxes = [[1, 4], [2, 8]]", Experiment::SuperDecay).unwrap_err().to_string();
        assert!(msg.contains("at least 3"), "{msg}");
        let msg = parse_config_str("[[potentials]]\nkind = \"symmetric\"\nfield = 1.0", Experiment::HsIsometry)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("dimension 2"), "{msg}");
    }

    #[test]
    fn overrides_are_applied() {
        let text = "seed = 9\ntrials = 3\n[grid]\npoints = 256\n[tolerances]\nparseval = 1e-6\n";
        let c = parse_config_str(text, Experiment::VerifyFrame).unwrap();
        assert_eq!((c.seed, c.trials, c.grid.points), (9, 3, 256));
        assert_eq!(c.tolerance("parseval"), 1e-6);
        assert_eq!(c.grid.half_width, 8.0);
    }
}
