use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use strata_chern::model::Grid;
use strata_chern::{rng, Cplx, ModelParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "default_t1")]
    pub t1: f64,
    #[serde(default = "default_t2")]
    pub t2: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(rename = "M", default)]
    pub mass: f64,
}

fn default_t1() -> f64 {
    1.0
}
fn default_t2() -> f64 {
    1.0 / 3.0
}
fn default_phi() -> f64 {
    FRAC_PI_2
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            t1: default_t1(),
            t2: default_t2(),
            phi: default_phi(),
            mass: 0.0,
        }
    }
}

impl ModelSection {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.t1, self.t2, self.phi, self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub nx: usize,
    pub ny: usize,
}

impl Default for MeshSection {
    fn default() -> Self {
        Self { nx: 48, ny: 48 }
    }
}

/// `"auto"` or a fixed phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSetting {
    Fixed(f64),
    Named(String),
}

impl Default for ThetaSetting {
    fn default() -> Self {
        ThetaSetting::Named("auto".into())
    }
}

impl ThetaSetting {
    pub fn spec(&self) -> strata_chern::WitnessSpec {
        match self {
            ThetaSetting::Fixed(t) => strata_chern::WitnessSpec::Fixed(*t),
            ThetaSetting::Named(_) => strata_chern::WitnessSpec::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSection {
    #[serde(default)]
    pub theta: ThetaSetting,
}

/// Complex vector as `[[re, im], ...]`.
pub type PairVector = Vec<[f64; 2]>;

/// An `(x, y)` probe pair as complex vectors.
pub type ComplexPair = (Vec<Cplx<f64>>, Vec<Cplx<f64>>);

pub fn to_complex(v: &PairVector) -> Vec<Cplx<f64>> {
    v.iter().map(|&[re, im]| Cplx::new(re, im)).collect()
}

fn to_pairs(v: &[Cplx<f64>]) -> PairVector {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbePair {
    pub x: PairVector,
    pub y: PairVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiSection {
    #[serde(default = "default_dim")]
    pub m: usize,
    #[serde(default = "default_dim")]
    pub n: usize,
    /// Probe pairs; five seeded random pairs when empty.
    #[serde(default)]
    pub probes: Vec<ProbePair>,
    /// Product embedding `(x, y)`; a seeded random pair when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<ProbePair>,
}

fn default_dim() -> usize {
    2
}

impl Default for MultiSection {
    fn default() -> Self {
        Self {
            m: 2,
            n: 2,
            probes: Vec::new(),
            embedding: None,
        }
    }
}

/// Number of random probe pairs drawn when none are configured.
pub const DEFAULT_PROBE_COUNT: u64 = 5;

/// Stream indices reserved for configuration randomness, well clear of the
/// per-sample streams used by scans.
const EMBEDDING_STREAM: u64 = 1 << 40;
const PROBE_STREAM: u64 = (1 << 40) + 1;

impl MultiSection {
    pub fn embedding_vectors(&self, seed: u64) -> ComplexPair {
        match &self.embedding {
            Some(e) => (to_complex(&e.x), to_complex(&e.y)),
            None => {
                let mut r = rng::stream(seed, EMBEDDING_STREAM);
                (
                    rng::unit_vector(&mut r, self.m),
                    rng::unit_vector(&mut r, self.n),
                )
            }
        }
    }

    pub fn probe_vectors(&self, seed: u64) -> Vec<ComplexPair> {
        if !self.probes.is_empty() {
            return self
                .probes
                .iter()
                .map(|p| (to_complex(&p.x), to_complex(&p.y)))
                .collect();
        }
        (0..DEFAULT_PROBE_COUNT)
            .map(|i| {
                let mut r = rng::stream(seed, PROBE_STREAM + i);
                (
                    rng::unit_vector(&mut r, self.m),
                    rng::unit_vector(&mut r, self.n),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_m_min")]
    pub m_min: f64,
    #[serde(default = "default_m_max")]
    pub m_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_m_min() -> f64 {
    -3.0
}
fn default_m_max() -> f64 {
    3.0
}
fn default_steps() -> usize {
    25
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m_min: -3.0,
            m_max: 3.0,
            steps: 25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QfiScanSection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_samples() -> usize {
    10_000
}
fn default_seed() -> u64 {
    42
}

impl Default for QfiScanSection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub witness: WitnessSection,
    #[serde(default)]
    pub multi: MultiSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub qfi_scan: QfiScanSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            mesh: MeshSection::default(),
            witness: WitnessSection::default(),
            multi: MultiSection::default(),
            sweep: SweepSection::default(),
            qfi_scan: QfiScanSection::default(),
            output_dir: default_output_dir(),
        }
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

fn check_probe(v: &PairVector, dim: usize, field: String) -> Result<(), CliError> {
    if v.len() != dim {
        return Err(invalid(
            field,
            format!("expected {dim} components, found {}", v.len()),
        ));
    }
    let norm = v
        .iter()
        .map(|[re, im]| re * re + im * im)
        .sum::<f64>()
        .sqrt();
    if !((norm - 1.0).abs() <= strata_chern::multi::UNIT_TOLERANCE) {
        return Err(invalid(
            field,
            format!("probe must have unit norm, found {norm}"),
        ));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        for (name, v) in [
            ("model.t1", m.t1),
            ("model.t2", m.t2),
            ("model.phi", m.phi),
            ("model.M", m.mass),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        if self.mesh.nx < Grid::MIN_SIDE {
            return Err(invalid("mesh.nx", format!("must be >= {}", Grid::MIN_SIDE)));
        }
        if self.mesh.ny < Grid::MIN_SIDE {
            return Err(invalid("mesh.ny", format!("must be >= {}", Grid::MIN_SIDE)));
        }
        match &self.witness.theta {
            ThetaSetting::Fixed(t) if !t.is_finite() => {
                return Err(invalid("witness.theta", "must be finite"))
            }
            ThetaSetting::Named(s) if s != "auto" => {
                return Err(invalid(
                    "witness.theta",
                    format!("expected a number or \"auto\", found {s:?}"),
                ))
            }
            _ => {}
        }
        if self.multi.m == 0 {
            return Err(invalid("multi.m", "must be >= 1"));
        }
        if self.multi.n == 0 {
            return Err(invalid("multi.n", "must be >= 1"));
        }
        for (i, p) in self.multi.probes.iter().enumerate() {
            check_probe(&p.x, self.multi.m, format!("multi.probes[{i}].x"))?;
            check_probe(&p.y, self.multi.n, format!("multi.probes[{i}].y"))?;
        }
        if let Some(e) = &self.multi.embedding {
            check_probe(&e.x, self.multi.m, "multi.embedding.x".into())?;
            check_probe(&e.y, self.multi.n, "multi.embedding.y".into())?;
        }
        if !(self.sweep.m_min.is_finite() && self.sweep.m_max.is_finite()) {
            return Err(invalid("sweep.m_min", "sweep bounds must be finite"));
        }
        if self.sweep.m_min >= self.sweep.m_max {
            return Err(invalid("sweep.m_max", "must exceed sweep.m_min"));
        }
        if self.sweep.steps < 2 {
            return Err(invalid("sweep.steps", "must be >= 2"));
        }
        if self.qfi_scan.samples < 1 {
            return Err(invalid("qfi_scan.samples", "must be >= 1"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(invalid("output_dir", "must not be empty"));
        }
        Ok(())
    }

    /// Canonical JSON form, with any random embedding made explicit.
    pub fn canonical(&self) -> RunConfig {
        let mut c = self.clone();
        if c.multi.embedding.is_none() {
            let (x, y) = c.multi.embedding_vectors(c.qfi_scan.seed);
            c.multi.embedding = Some(ProbePair {
                x: to_pairs(&x),
                y: to_pairs(&y),
            });
        }
        c
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

/// Parses `NxM` (or a single `N`).
pub fn parse_mesh(s: &str) -> Result<MeshSection, CliError> {
    let bad = || invalid("--mesh", format!("expected NxM, found {s:?}"));
    let (a, b) = match s.split_once(['x', 'X']) {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let nx = a.trim().parse().map_err(|_| bad())?;
    let ny = b.trim().parse().map_err(|_| bad())?;
    Ok(MeshSection { nx, ny })
}
