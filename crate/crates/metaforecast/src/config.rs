//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use metaforecast_core::data::{FillPolicy, HourRange, SplitSpec};
use metaforecast_core::metaheuristics::{
    Algorithm, DeSettings, GaSettings, OptimizerConfig, ParamSpec, PsoCoefficients, SearchSpace,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::synth::SyntheticSpec;
use crate::weather_csv::{parse_date, stamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Arima,
    Ann,
    Lstm,
    Gru,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Arima, ModelKind::Ann, ModelKind::Lstm, ModelKind::Gru];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Arima => "arima",
            ModelKind::Ann => "ann",
            ModelKind::Lstm => "lstm",
            ModelKind::Gru => "gru",
        }
    }

    pub fn is_neural(self) -> bool {
        self != ModelKind::Arima
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown model `{s}`"))
    }
}

/// A row of the benchmark: a metaheuristic or the fixed manual choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    De,
    Pso,
    Manual,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ga, Method::De, Method::Pso, Method::Manual];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::De => "de",
            Method::Pso => "pso",
            Method::Manual => "manual",
        }
    }

    pub fn algorithm(self) -> Option<Algorithm> {
        match self {
            Method::Ga => Some(Algorithm::Genetic),
            Method::De => Some(Algorithm::DifferentialEvolution),
            Method::Pso => Some(Algorithm::ParticleSwarm),
            Method::Manual => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s)).ok_or_else(|| format!("unknown optimizer `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillMethod {
    Linear,
    Forward,
}

impl From<FillMethod> for FillPolicy {
    fn from(m: FillMethod) -> Self {
        match m {
            FillMethod::Linear => FillPolicy::LinearInterpolate,
            FillMethod::Forward => FillPolicy::ForwardFill,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    /// CSV file; relative paths resolve against the config file.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Generate data instead of reading `path`.
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default)]
    pub fill_time_gaps: bool,
    #[serde(default = "default_drop_threshold")]
    pub drop_threshold: f64,
    #[serde(default = "default_fill")]
    pub fill: FillMethod,
    #[serde(default = "default_target")]
    pub target: String,
}

fn default_drop_threshold() -> f64 {
    0.5
}
fn default_fill() -> FillMethod {
    FillMethod::Linear
}
fn default_target() -> String {
    "temperature".into()
}

/// Inclusive `[first_day, last_day]` ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub train: [String; 2],
    pub validation: [String; 2],
    pub test: [String; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowConfig {
    pub lookback: usize,
    pub horizon: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { lookback: 3, horizon: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelsConfig {
    pub kinds: Vec<ModelKind>,
    pub ann_widths: Vec<usize>,
    /// `[projection, recurrent]`.
    pub recurrent_widths: [usize; 2],
    pub pin_gru_gate_biases: bool,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self { kinds: ModelKind::ALL.to_vec(), ann_widths: vec![64, 36], recurrent_widths: [36, 64], pin_gru_gate_biases: false }
    }
}

/// Inclusive bounds of every searched hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Searched on a log scale.
    pub learning_rate: [f64; 2],
    pub batch_size: [i64; 2],
    pub epochs: [i64; 2],
    pub p: [i64; 2],
    pub d: [i64; 2],
    pub q: [i64; 2],
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { learning_rate: [1e-4, 0.5], batch_size: [8, 128], epochs: [1, 10], p: [0, 5], d: [0, 3], q: [0, 5] }
    }
}

impl SearchConfig {
    pub fn space(&self, model: ModelKind) -> Result<SearchSpace> {
        let bad = |e: metaforecast_core::OptimizerError| HarnessError::InvalidConfig(format!("search bounds: {e}"));
        let params = if model.is_neural() {
            vec![
                ParamSpec::log_continuous("learning_rate", self.learning_rate[0], self.learning_rate[1]).map_err(bad)?,
                ParamSpec::integer("batch_size", self.batch_size[0], self.batch_size[1]).map_err(bad)?,
                ParamSpec::integer("epochs", self.epochs[0], self.epochs[1]).map_err(bad)?,
            ]
        } else {
            vec![
                ParamSpec::integer("p", self.p[0], self.p[1]).map_err(bad)?,
                ParamSpec::integer("d", self.d[0], self.d[1]).map_err(bad)?,
                ParamSpec::integer("q", self.q[0], self.q[1]).map_err(bad)?,
            ]
        };
        SearchSpace::new(params).map_err(bad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub algorithms: Vec<Method>,
    pub population: usize,
    pub generations: usize,
    pub ga: GaSection,
    pub de: DeSection,
    pub pso: PsoSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GaSection {
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub mutation_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeSection {
    pub scale: f64,
    pub crossover: f64,
    pub force_jrand: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoSection {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for GaSection {
    fn default() -> Self {
        let g = GaSettings::default();
        Self { crossover_prob: g.crossover_prob, mutation_prob: g.mutation_prob, mutation_sigma: g.mutation_sigma }
    }
}

impl Default for DeSection {
    fn default() -> Self {
        let d = DeSettings::default();
        Self { scale: d.scale, crossover: d.crossover, force_jrand: d.force_jrand }
    }
}

impl Default for PsoSection {
    fn default() -> Self {
        let p = PsoCoefficients::default();
        Self { inertia: p.inertia, cognitive: p.cognitive, social: p.social }
    }
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            algorithms: vec![Method::Ga, Method::De, Method::Pso],
            population: 10,
            generations: 10,
            ga: GaSection::default(),
            de: DeSection::default(),
            pso: PsoSection::default(),
        }
    }
}

impl OptimizerSection {
    pub fn to_config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            population_size: self.population,
            generations: self.generations,
            seed,
            ga: GaSettings {
                crossover_prob: self.ga.crossover_prob,
                mutation_prob: self.ga.mutation_prob,
                mutation_sigma: self.ga.mutation_sigma,
            },
            de: DeSettings { scale: self.de.scale, crossover: self.de.crossover, force_jrand: self.de.force_jrand },
            pso: PsoCoefficients { inertia: self.pso.inertia, cognitive: self.pso.cognitive, social: self.pso.social },
        }
    }
}

/// Fixed hyperparameters of the manual baseline row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManualConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// `[p, d, q]`.
    pub arima: [usize; 3],
}

impl Default for ManualConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, batch_size: 32, epochs: 50, arima: [1, 1, 1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArimaSection {
    pub include_intercept: bool,
    pub min_obs_per_param: usize,
}

impl Default for ArimaSection {
    fn default() -> Self {
        Self { include_intercept: true, min_obs_per_param: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// Test windows kept per run for the forecast files.
    pub forecast_windows: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self { forecast_windows: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Parallel fitness evaluations; `METAFORECAST_WORKERS` overrides it.
    #[serde(default)]
    pub workers: Option<usize>,
    pub data: DataConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub models: ModelsConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub manual: ManualConfig,
    #[serde(default)]
    pub arima: ArimaSection,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_trials() -> usize {
    5
}
fn default_output_dir() -> PathBuf {
    "results".into()
}

pub const WORKERS_ENV: &str = "METAFORECAST_WORKERS";

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads and validates a config file; a relative data path is taken
    /// relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
            path: path.into(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| HarnessError::Config { path: path.into(), message: e.to_string() })?;
        if let Some(p) = &cfg.data.path {
            if p.is_relative() {
                cfg.data.path = Some(path.parent().unwrap_or(Path::new(".")).join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Small synthetic setup that runs the whole matrix in minutes.
    pub fn desk() -> Self {
        Self {
            seed: 0,
            trials: 3,
            output_dir: default_output_dir(),
            workers: None,
            data: DataConfig {
                path: None,
                synthetic: Some(SyntheticSpec::default()),
                fill_time_gaps: false,
                drop_threshold: default_drop_threshold(),
                fill: default_fill(),
                target: default_target(),
            },
            split: SplitConfig {
                train: ["2010-01-01".into(), "2010-02-09".into()],
                validation: ["2010-02-10".into(), "2010-02-19".into()],
                test: ["2010-02-20".into(), "2010-03-01".into()],
            },
            window: WindowConfig::default(),
            models: ModelsConfig::default(),
            search: SearchConfig::default(),
            optimizer: OptimizerSection { population: 6, generations: 5, ..OptimizerSection::default() },
            manual: ManualConfig::default(),
            arima: ArimaSection::default(),
            report: ReportConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.data.path.is_none() && self.data.synthetic.is_none() {
            return bad("data needs either `path` or a `synthetic` section".into());
        }
        if let Some(s) = &self.data.synthetic {
            if parse_date(&s.start).is_none() {
                return bad(format!("synthetic start `{}` is not YYYY-MM-DD", s.start));
            }
            if s.days == 0 {
                return bad("synthetic days must be positive".into());
            }
        }
        if !(self.data.drop_threshold > 0.0 && self.data.drop_threshold <= 1.0) {
            return bad("drop_threshold must lie in (0, 1]".into());
        }
        if self.window.lookback == 0 || self.window.horizon == 0 {
            return bad("lookback and horizon must be positive".into());
        }
        if self.models.kinds.is_empty() {
            return bad("no models selected".into());
        }
        if self.models.ann_widths.contains(&0) || self.models.recurrent_widths.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        if self.optimizer.algorithms.contains(&Method::Manual) {
            return bad("`manual` is not a search algorithm; it always runs".into());
        }
        if self.manual.batch_size == 0 || self.manual.epochs == 0 || !(self.manual.learning_rate >= 0.0) {
            return bad("manual hyperparameters must be positive".into());
        }
        self.split_spec()?;
        for m in ModelKind::ALL {
            self.search.space(m)?;
        }
        self.optimizer
            .to_config(0)
            .validate()
            .map_err(|e| HarnessError::InvalidConfig(format!("optimizer: {e}")))?;
        Ok(())
    }

    pub fn split_spec(&self) -> Result<SplitSpec> {
        let range = |r: &[String; 2], which: &str| -> Result<HourRange> {
            let day = |s: &str| {
                parse_date(s).ok_or_else(|| HarnessError::InvalidConfig(format!("{which} date `{s}` is not YYYY-MM-DD")))
            };
            Ok(HourRange::new(stamp(day(&r[0])?, 0), stamp(day(&r[1])?, 23)))
        };
        SplitSpec::new(range(&self.split.train, "train")?, range(&self.split.validation, "validation")?, range(&self.split.test, "test")?)
            .map_err(|e| HarnessError::InvalidConfig(format!("split: {e}")))
    }

    pub fn synthetic_start(&self) -> Option<NaiveDate> {
        self.data.synthetic.as_ref().and_then(|s| parse_date(&s.start))
    }

    /// Worker count: the environment override, then the config, then 1.
    pub fn worker_count(&self) -> usize {
        std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .or(self.workers)
            .unwrap_or(1)
            .max(1)
    }

    /// SHA-256 over everything that can change results. Output location and
    /// worker count are excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.workers = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
