//! Experiment configuration: a flat TOML document with one section per mode.

use std::path::Path;

use extremal_core::mc::{DominanceOptions, LemmaOptions, McConfig, StepMode, StepOptions};
use extremal_core::PrecisionCtx;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Scan,
    Mc,
    Classify,
    Feasibility,
    ShiftPhenomenon,
    Diagnose,
    Sweep,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Scan => "scan",
            Mode::Mc => "mc",
            Mode::Classify => "classify",
            Mode::Feasibility => "feasibility",
            Mode::ShiftPhenomenon => "shift-phenomenon",
            Mode::Diagnose => "diagnose",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mode: Option<Mode>,
    pub seed: u64,
    /// Parent of the timestamped run directories.
    pub out: String,
    pub ctx: PrecisionCtx,
    pub operator: OperatorConfig,
    pub vectors: VectorConfig,
    pub solve: SolveConfig,
    pub scan: ScanConfig,
    pub mc: McSection,
    pub classify: ClassifyConfig,
    pub feasibility: FeasibilityConfig,
    pub shift: ShiftConfig,
    pub diagnose: DiagnoseConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: None,
            seed: 0,
            out: "runs".into(),
            ctx: PrecisionCtx::default(),
            operator: OperatorConfig::default(),
            vectors: VectorConfig::default(),
            solve: SolveConfig::default(),
            scan: ScanConfig::default(),
            mc: McSection::default(),
            classify: ClassifyConfig::default(),
            feasibility: FeasibilityConfig::default(),
            shift: ShiftConfig::default(),
            diagnose: DiagnoseConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

/// `kind` is one of `harmonic-shift`, `geometric-shift`, `weighted-shift`,
/// `random-dense`, `random-normal`, `jordan`, `dense`, `diagonal`, `zero`
/// or `file`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorConfig {
    pub kind: String,
    pub dim: usize,
    /// Generator seed; the run seed when absent.
    pub seed: Option<u64>,
    pub lambda: (f64, f64),
    /// Inline entries: weights, diagonal or row-major matrix.
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// Serialized operator document for `kind = "file"`.
    pub path: Option<String>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        OperatorConfig {
            kind: "harmonic-shift".into(),
            dim: 8,
            seed: None,
            lambda: (0.0, 0.0),
            re: vec![],
            im: vec![],
            path: None,
        }
    }
}

/// Vector specs: `e<k>`, `random` (Gaussian), `unit` (random unit) or
/// `band` for `(sqrt 3/2) e0 + e1/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VectorConfig {
    pub y: String,
    pub x0: String,
    pub y_scale: f64,
}

impl Default for VectorConfig {
    fn default() -> Self {
        VectorConfig {
            y: "e0".into(),
            x0: "band".into(),
            y_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Calibrate to this distance; solve at unit scale when absent.
    pub eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Explicit grid for the calibration sweep; skipped when empty.
    pub grid: Vec<f64>,
    /// Run the threshold scan as well.
    pub lemma: bool,
    pub eps_start: f64,
    pub factor: f64,
    pub eps_theta_0: Option<f64>,
    pub grid_points: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let l = LemmaOptions::default();
        ScanConfig {
            grid: vec![],
            lemma: true,
            eps_start: l.eps_start,
            factor: l.factor,
            eps_theta_0: l.eps_theta_0,
            grid_points: l.grid_points,
        }
    }
}

impl ScanConfig {
    pub fn lemma_options(&self) -> LemmaOptions {
        LemmaOptions {
            eps_start: self.eps_start,
            factor: self.factor,
            eps_theta_0: self.eps_theta_0,
            grid_points: self.grid_points,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub u0: String,
    pub u1: String,
    pub summary_x0: bool,
    pub y0_scale: f64,
    pub eps_start: f64,
    pub factor: f64,
    pub eps_theta_0: Option<f64>,
    pub scan_points: usize,
    pub dominance_threshold: f64,
    pub dominance_points: usize,
    pub h_min: f64,
    pub case_cap: usize,
    pub beta: f64,
    pub beta_late: f64,
    pub beta_switch: f64,
    pub max_iters: usize,
    pub stop_factor: Option<f64>,
    pub milestones: Vec<f64>,
    pub n0: usize,
    pub witness_j_max: usize,
    /// `full` or `reduced`
    pub step_mode: String,
    pub s_min_factor: f64,
    pub max_halvings: u32,
    pub band_budget: f64,
    pub keep_dominance: bool,
}

impl Default for McSection {
    fn default() -> Self {
        let prec = 64;
        let e = extremal_core::HVector::basis(1, 0, prec);
        let m = McConfig::new(e.clone(), e);
        let s = StepOptions::default();
        McSection {
            u0: "e0".into(),
            u1: "e1".into(),
            summary_x0: m.summary_x0,
            y0_scale: m.y0_scale,
            eps_start: m.lemma.eps_start,
            factor: m.lemma.factor,
            eps_theta_0: m.lemma.eps_theta_0,
            scan_points: m.lemma.grid_points,
            dominance_threshold: m.dominance.threshold,
            dominance_points: m.dominance.grid_points,
            h_min: m.dominance.h_min,
            case_cap: m.case_cap,
            beta: m.beta,
            beta_late: m.beta_late,
            beta_switch: m.beta_switch,
            max_iters: m.max_iters,
            stop_factor: m.stop_factor,
            milestones: m.milestones,
            n0: m.n0,
            witness_j_max: m.witness_j_max,
            step_mode: "full".into(),
            s_min_factor: s.s_min_factor,
            max_halvings: s.max_halvings,
            band_budget: s.band_budget,
            keep_dominance: s.keep_dominance,
        }
    }
}

impl McSection {
    pub fn step_mode(&self) -> Result<StepMode, CliError> {
        match self.step_mode.as_str() {
            "full" => Ok(StepMode::Full),
            "reduced" => Ok(StepMode::Reduced),
            other => Err(CliError::config(format!("mc.step_mode: unknown mode {other:?}"))),
        }
    }

    pub fn to_config(&self, u0: extremal_core::HVector, u1: extremal_core::HVector) -> Result<McConfig, CliError> {
        let mut m = McConfig::new(u0, u1);
        m.summary_x0 = self.summary_x0;
        m.y0_scale = self.y0_scale;
        m.lemma = LemmaOptions {
            eps_start: self.eps_start,
            factor: self.factor,
            eps_theta_0: self.eps_theta_0,
            grid_points: self.scan_points,
        };
        m.dominance = DominanceOptions {
            threshold: self.dominance_threshold,
            grid_points: self.dominance_points,
            h_min: self.h_min,
        };
        m.case_cap = self.case_cap;
        m.beta = self.beta;
        m.beta_late = self.beta_late;
        m.beta_switch = self.beta_switch;
        m.max_iters = self.max_iters;
        m.stop_factor = self.stop_factor;
        m.milestones = self.milestones.clone();
        m.n0 = self.n0;
        m.witness_j_max = self.witness_j_max;
        m.step = StepOptions {
            beta: self.beta,
            mode: self.step_mode()?,
            s_min_factor: self.s_min_factor,
            max_halvings: self.max_halvings,
            band_budget: self.band_budget,
            keep_dominance: self.keep_dominance,
        };
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub u0: String,
    pub probes: usize,
    pub n_max: usize,
    pub floor: Option<f64>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            u0: "e0".into(),
            probes: 64,
            n_max: 10,
            floor: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeasibilityConfig {
    pub y0: String,
    /// Family `s_n`: the basis vectors `e_1 .. e_(dim-1)`.
    pub grid: Vec<f64>,
    pub blowup: f64,
    pub eps_target: Option<f64>,
}

impl Default for FeasibilityConfig {
    fn default() -> Self {
        FeasibilityConfig {
            y0: "e0".into(),
            grid: vec![0.0, 0.05, 0.1, 0.2, 0.4],
            blowup: 100.0,
            eps_target: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShiftConfig {
    /// `geometric` (`1/(K 2^n)`) or `harmonic` (`1/(K (n+1))`).
    pub weights: String,
    pub n_min: usize,
    pub n_max: usize,
    pub factor: f64,
    pub threshold: Option<f64>,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig {
            weights: "geometric".into(),
            n_min: 1,
            n_max: 10,
            factor: 10.0,
            threshold: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseConfig {
    /// Calibrate the candidate to this distance; unit scale when absent.
    pub eps: Option<f64>,
    /// Largest Krylov dimension tried; the operator dimension when absent.
    pub k_max: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Config files, relative to the sweep config.
    pub configs: Vec<String>,
}

/// Parse a config text, applying `key=value` overrides with dotted keys.
pub fn parse_config(text: &str, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    if sets.is_empty() {
        return toml::from_str(text).map_err(|e| CliError::config(e.to_string()));
    }
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    for s in sets {
        apply_set(&mut table, s)?;
    }
    ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| CliError::config(e.to_string()))
}

pub fn load_config(path: &Path, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse_config(&text, sets).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn apply_set(table: &mut toml::Table, set: &str) -> Result<(), CliError> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("--set {set:?}: expected key=value")))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("--set {key}: {p} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// TOML literal when it parses as one, bare string otherwise.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

pub fn resolve_path(base: &Path, p: &str) -> std::path::PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
