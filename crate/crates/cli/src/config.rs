//! TOML configuration for scenarios and sweeps.

use crate::error::ConfigError;
use anyhow::{Context, Result};
use kgfield::amplitude::{GaussianAmplitude, QuadratureSpec};
use kgfield::currents::Which;
use kgfield::gauge::GroupParameter;
use kgfield::limits::MIN_LADDER;
use kgfield::packets::PacketEnergy;
use kgfield::{ModelParams, MomentumLattice, PlaneMode, Sector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "M")]
    pub m: f64,
    pub kappa: f64,
    pub a: f64,
    #[serde(default)]
    pub t0: f64,
}

impl Model {
    pub fn lattice(&self) -> Result<MomentumLattice> {
        if self.l.len() != self.d || self.n.len() != self.d {
            return Err(ConfigError::new(format!("model: L and N need {} entries", self.d)).into());
        }
        MomentumLattice::new(self.l.clone(), self.n.clone())
            .map_err(|e| ConfigError::new(format!("model: {e}")).into())
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.m, self.kappa, self.a)
            .map_err(|e| ConfigError::new(format!("model: {e}")).into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    GaussianPacket {
        center: Vec<f64>,
        width: f64,
        carrier: Vec<f64>,
        #[serde(default = "positive")]
        energy: PacketEnergy,
    },
    PlaneWaves {
        modes: Vec<PlaneMode>,
    },
    LocalizedState {
        epsilon: Sector,
        y: Vec<f64>,
    },
    Random {
        #[serde(default = "half")]
        band: f64,
    },
    FromFile {
        path: PathBuf,
    },
    Amplitude {
        #[serde(default)]
        plus: Option<GaussianAmplitude>,
        #[serde(default)]
        minus: Option<GaussianAmplitude>,
        #[serde(default = "ten")]
        radius: f64,
    },
}

fn positive() -> PacketEnergy {
    PacketEnergy::Positive
}

fn half() -> f64 {
    0.5
}

fn ten() -> f64 {
    10.0
}

fn small_angle() -> f64 {
    1e-4
}

fn unit_interval() -> (f64, f64) {
    (0.5, 3.0)
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Background {
    Free,
    Constant,
    Wave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    InnerProduct {
        times: Vec<f64>,
    },
    TotalProbability {
        times: Vec<f64>,
    },
    RhoA {
        times: Vec<f64>,
    },
    Current {
        which: Which,
        times: Vec<f64>,
    },
    ProbabilityRegion {
        lo: Vec<f64>,
        hi: Vec<f64>,
        #[serde(default)]
        normalize: bool,
    },
    PositionExpectation,
    RadialProfile {
        #[serde(default = "unit_interval")]
        mr_range: (f64, f64),
    },
    TwoMode {
        beta: Vec<f64>,
        #[serde(default = "hundred")]
        events: usize,
        #[serde(default = "ten")]
        extent: f64,
    },
    Gauge {
        theta: f64,
        #[serde(default = "small_angle")]
        dtheta: f64,
    },
    Group {
        parameter: GroupParameter,
    },
    Limits {
        which: Which,
        ratio: f64,
        steps: usize,
    },
    EmSpectrum {
        q: f64,
        background: Background,
        #[serde(default)]
        potential: Option<[f64; 2]>,
    },
    EmEvolve {
        q: f64,
        background: Background,
        #[serde(default)]
        potential: Option<[f64; 2]>,
        times: Vec<f64>,
    },
    Invariance {
        beta: Vec<f64>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::InnerProduct { .. } => "inner_product",
            Task::TotalProbability { .. } => "total_probability",
            Task::RhoA { .. } => "rho_a",
            Task::Current { .. } => "current",
            Task::ProbabilityRegion { .. } => "probability_region",
            Task::PositionExpectation => "position_expectation",
            Task::RadialProfile { .. } => "radial_profile",
            Task::TwoMode { .. } => "two_mode",
            Task::Gauge { .. } => "gauge",
            Task::Group { .. } => "group",
            Task::Limits { .. } => "limits",
            Task::EmSpectrum { .. } => "em_spectrum",
            Task::EmEvolve { .. } => "em_evolve",
            Task::Invariance { .. } => "invariance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default)]
    pub directory: Option<PathBuf>,
    #[serde(default = "csv_only")]
    pub formats: Vec<Format>,
}

fn csv_only() -> Vec<Format> {
    vec![Format::Csv]
}

impl Default for Output {
    fn default() -> Self {
        Output {
            directory: None,
            formats: csv_only(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub model: Model,
    pub field: FieldSpec,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    A,
    #[serde(rename = "M")]
    M,
    Theta,
    QuadratureOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    InnerProduct,
    TotalProbability,
    Norm,
    InvarianceDeviation,
    LimitDeviation,
    PsiC,
    PsiTilde,
    MutualDensity,
    SchrodingerResidual,
    OperatorExpansion,
}

impl Observable {
    pub fn axis(self) -> Axis {
        match self {
            Observable::InnerProduct | Observable::TotalProbability => Axis::A,
            Observable::Norm => Axis::Theta,
            Observable::InvarianceDeviation => Axis::QuadratureOrder,
            _ => Axis::M,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ladder {
    pub ratio: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub observable: Observable,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub ladder: Option<Ladder>,
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub which: Option<Which>,
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    pub model: Model,
    pub field: FieldSpec,
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: Output,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        let bad =
            |msg: String| -> Result<()> { Err(ConfigError::new(format!("sweep: {msg}")).into()) };
        if s.observable.axis() != s.axis {
            return bad(format!(
                "observable {:?} does not belong to axis {:?}",
                s.observable, s.axis
            ));
        }
        if s.values.is_empty() && !(s.axis == Axis::M && s.ladder.is_some()) {
            return bad("values must be non-empty".into());
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return bad("values must be finite".into());
        }
        match s.axis {
            Axis::A if s.values.iter().any(|a| !(*a > -1.0 && *a < 1.0)) => {
                bad("a values must lie in (-1, 1)".into())
            }
            Axis::M if s.values.iter().any(|m| *m <= 0.0) => bad("masses must be positive".into()),
            Axis::M if !s.values.is_empty() && s.ladder.is_some() => {
                bad("give either values or ladder".into())
            }
            Axis::M if s.observable == Observable::LimitDeviation && s.which.is_none() => {
                bad("limit_deviation needs `which`".into())
            }
            Axis::M if s.ladder.as_ref().map_or(s.values.len(), |l| l.steps) < MIN_LADDER => {
                bad(format!("mass ladders need at least {MIN_LADDER} points"))
            }
            Axis::QuadratureOrder if s.values.iter().any(|o| o.fract() != 0.0 || *o < 2.0) => {
                bad("quadrature orders must be integers >= 2".into())
            }
            Axis::QuadratureOrder if s.beta.is_none() => {
                bad("quadrature-order sweeps need `beta`".into())
            }
            _ => Ok(()),
        }
    }

    pub fn quadrature(&self, order: usize) -> Result<QuadratureSpec> {
        match &self.field {
            FieldSpec::Amplitude { radius, .. } => Ok(QuadratureSpec {
                order,
                radius: *radius,
            }),
            _ => Err(ConfigError::new("quadrature-order sweeps need an amplitude field").into()),
        }
    }
}

/// Parsed configuration with the SHA-256 of its source bytes.
pub struct Loaded<T> {
    pub config: T,
    pub hash: String,
    pub source: PathBuf,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| ConfigError::new(format!("{} is not UTF-8", path.display())))?;
    let config =
        toml::from_str(text).map_err(|e| ConfigError::new(format!("{}: {e}", path.display())))?;
    Ok(Loaded {
        config,
        hash: sha256_hex(&bytes),
        source: path.to_path_buf(),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `key = value` lines for every leaf of a serializable value, keys in sorted dotted form.
pub fn echo<T: Serialize>(value: &T) -> Result<Vec<(String, String)>> {
    fn walk(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
        match v {
            serde_json::Value::Object(map) => {
                for (k, x) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, x, out);
                }
            }
            serde_json::Value::Array(items) if items.iter().any(|x| x.is_object()) => {
                for (i, x) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk(
        "",
        &serde_json::to_value(value).context("serializing configuration")?,
        &mut out,
    );
    Ok(out)
}

/// Parameter echo for artifact headers; the effective seed is reported separately.
pub fn header_params<T: Serialize>(value: &T) -> Result<Vec<(String, String)>> {
    Ok(echo(value)?
        .into_iter()
        .filter(|(k, _)| k != "seed")
        .collect())
}

/// Resolves a path in the config relative to the config file's directory.
pub fn relative_to(config: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config.parent().unwrap_or(Path::new(".")).join(p)
    }
}
