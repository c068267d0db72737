use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::DsfConfig;
use crate::data::LabelScheme;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    /// Every individual violation message.
    pub fn messages(&self) -> Vec<String> {
        match self {
            ConfigError::Invalid(v) => v.clone(),
            other => vec![other.to_string()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Dpoem,
    DsfT,
    DsfD,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Dpoem => "dpoem",
            Algorithm::DsfT => "dsf_t",
            Algorithm::DsfD => "dsf_d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    ErdosRenyi,
    Path,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub kind: GraphKind,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
}

fn default_p() -> f64 {
    0.25
}

fn default_attempts() -> u32 {
    crate::network::DEFAULT_MAX_ATTEMPTS
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// A LIBSVM file on disk.
    Libsvm,
    /// The seeded stand-in named by `name`.
    Surrogate,
    /// `F(x; ξ) = ⟨c, x⟩ + ξ`.
    Linear,
    /// `F(x; ξ) = ‖x − c_i‖ + ξ`.
    Distance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterLayout {
    /// One center shared by all agents.
    #[default]
    Common,
    /// An independent center per agent.
    Spread,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DatasetSource,
    /// Dataset name: output file prefix, surrogate preset and cache lookup key.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Explicit feature dimension (LIBSVM) or problem dimension (synthetic).
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub labels: LabelScheme,
    /// Per-feature max-abs scaling.
    #[serde(default)]
    pub scale: bool,
    /// Keep a seeded random subset of this many samples; 0 keeps all.
    #[serde(default)]
    pub max_samples: usize,
    /// Use the surrogate if the LIBSVM file cannot be found.
    #[serde(default)]
    pub surrogate_fallback: bool,
    /// Half-width of the uniform oracle noise (synthetic sources).
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub centers: CenterLayout,
    /// Norm of generated centers / linear coefficients.
    #[serde(default = "default_center_radius")]
    pub center_radius: f64,
    /// Explicit center (distance) or coefficient vector (linear).
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
}

fn default_center_radius() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DsfSection {
    #[serde(default = "one")]
    pub eta0: f64,
    #[serde(default = "one")]
    pub mu0: f64,
    #[serde(default = "half")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "default_grid_eta0")]
    pub grid_eta0: Vec<f64>,
    #[serde(default = "default_grid_mu0")]
    pub grid_mu0: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_grid_eta0() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0]
}

fn default_grid_mu0() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0]
}

impl Default for DsfSection {
    fn default() -> Self {
        Self { eta0: 1.0, mu0: 1.0, alpha: 0.5, beta: 1.0, grid_eta0: default_grid_eta0(), grid_mu0: default_grid_mu0() }
    }
}

impl DsfSection {
    /// The DSF-D schedule.
    pub fn default_config(&self) -> DsfConfig {
        DsfConfig { eta0: self.eta0, mu0: self.mu0, alpha: self.alpha, beta: self.beta }
    }

    /// The DSF-T grid, `η₀`-major.
    pub fn grid(&self) -> Vec<DsfConfig> {
        let mut out = Vec::new();
        for &eta0 in &self.grid_eta0 {
            for &mu0 in &self.grid_mu0 {
                out.push(DsfConfig { eta0, mu0, alpha: self.alpha, beta: self.beta });
            }
        }
        out
    }
}

/// A complete declarative experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of every output file.
    pub name: String,
    pub agents: usize,
    #[serde(default = "one")]
    pub ball_radius: f64,
    pub r_eps: f64,
    pub horizon: usize,
    pub seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_stride")]
    pub metric_stride: usize,
    #[serde(default)]
    pub agent_stride: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Iterations of the full-batch reference solve for `f⋆`; 0 skips it.
    #[serde(default)]
    pub reference_iters: usize,
    pub graph: GraphConfig,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub dsf: DsfSection,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Dpoem, Algorithm::DsfT, Algorithm::DsfD]
}

fn default_stride() -> usize {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Collects every violation rather than stopping at the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        if self.name.trim().is_empty() || self.name.contains(['/', '\\']) {
            errs.push(format!("name {:?} must be a nonempty file-name-safe string", self.name));
        }
        if self.agents < 1 {
            errs.push("agents must be at least 1".into());
        }
        if !(self.ball_radius > 0.0 && self.ball_radius.is_finite()) {
            errs.push(format!("ball_radius must be positive, got {}", self.ball_radius));
        }
        if !(self.r_eps > 0.0) {
            errs.push(format!("r_eps must be positive, got {}", self.r_eps));
        } else if self.r_eps > 2.0 * self.ball_radius {
            errs.push(format!("r_eps exceeds diameter 2R ({} > {})", self.r_eps, 2.0 * self.ball_radius));
        }
        if self.horizon < 1 {
            errs.push("horizon must be at least 1".into());
        }
        if self.metric_stride < 1 {
            errs.push("metric_stride must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            errs.push("algorithms must list at least one of dpoem, dsf_t, dsf_d".into());
        }
        match self.graph.kind {
            GraphKind::ErdosRenyi => {
                if !(self.graph.p > 0.0 && self.graph.p <= 1.0) {
                    errs.push(format!("graph.p must lie in (0, 1], got {}", self.graph.p));
                }
                if self.agents < 2 {
                    errs.push("erdos_renyi graphs need at least 2 agents".into());
                }
                if self.graph.max_attempts == 0 {
                    errs.push("graph.max_attempts must be positive".into());
                }
            }
            GraphKind::Path | GraphKind::Complete => {}
        }
        let ds = &self.dataset;
        match ds.source {
            DatasetSource::Libsvm => {
                if ds.path.is_none() && ds.name.is_none() {
                    errs.push("dataset needs a path or a name".into());
                }
                if ds.surrogate_fallback
                    && ds.name.as_deref().and_then(crate::data::surrogate::SurrogateSpec::by_name).is_none()
                {
                    errs.push("surrogate_fallback needs dataset.name to be mushrooms, a9a or w8a".into());
                }
            }
            DatasetSource::Surrogate => {
                if ds.name.as_deref().and_then(crate::data::surrogate::SurrogateSpec::by_name).is_none() {
                    errs.push("surrogate datasets need name = mushrooms, a9a or w8a".into());
                }
            }
            DatasetSource::Linear | DatasetSource::Distance => {
                match (ds.dim, &ds.vector) {
                    (None, None) => errs.push("synthetic datasets need dim or vector".into()),
                    (Some(0), _) => errs.push("dataset.dim must be positive".into()),
                    (Some(d), Some(v)) if v.len() != d => {
                        errs.push(format!("dataset.vector has length {} but dim is {d}", v.len()))
                    }
                    _ => {}
                }
                if !(ds.noise >= 0.0) {
                    errs.push(format!("dataset.noise must be nonnegative, got {}", ds.noise));
                }
                if !(ds.center_radius >= 0.0) {
                    errs.push("dataset.center_radius must be nonnegative".into());
                }
            }
        }
        if self.algorithms.contains(&Algorithm::DsfD) {
            if let Err(e) = self.dsf.default_config().validate() {
                errs.push(format!("dsf: {e}"));
            }
        }
        if self.algorithms.contains(&Algorithm::DsfT) {
            let grid = self.dsf.grid();
            if grid.is_empty() {
                errs.push("dsf grid is empty".into());
            }
            if grid.iter().any(|c| c.validate().is_err()) {
                errs.push("dsf grid contains a nonpositive or out-of-range entry".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// Output label of the dataset.
    pub fn dataset_label(&self) -> &str {
        &self.name
    }
}

/// Loads and validates `path` without running anything.
pub fn validate_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::load(path)
}
