//! JSON run configuration: parsing, defaults, validation and hashing.
//! The schema is documented in `docs/config.md`.

use std::fmt;

use fracbridge::estimate::{classify_case, EstimatorKind, ExperimentConfig, LimitCase};
use fracbridge::{Complex, ModelParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

fn one() -> f64 {
    1.0
}
fn default_n_steps() -> usize {
    1 << 12
}
fn default_replications() -> usize {
    1000
}
fn default_delta() -> f64 {
    1e-3
}
fn default_steps_per_gap() -> usize {
    50
}
fn default_floor() -> f64 {
    0.05
}
fn default_ks_threshold() -> f64 {
    0.1
}
fn default_paths() -> usize {
    1
}
fn default_cr_samples() -> usize {
    10_000
}
fn default_table_points() -> usize {
    201
}
fn default_chaos_trials() -> usize {
    10_000
}

/// A run configuration with every default filled in.
///
/// Field names are the JSON keys; `H` and `T` keep their usual symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(rename = "H", alias = "hurst")]
    pub hurst: f64,
    /// `[re, im]`.
    pub alpha: [f64; 2],
    #[serde(rename = "T", alias = "horizon", default = "one")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    /// Steps of the simulation grid; lower bound on the experiment grids.
    #[serde(default = "default_n_steps")]
    pub n_steps: usize,
    /// Last grid time. Defaults to `T - delta`.
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Evaluation times of the estimation experiments.
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    #[serde(default)]
    pub estimator: EstimatorKind,
    #[serde(default = "default_steps_per_gap")]
    pub steps_per_gap: usize,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_ks_threshold")]
    pub ks_threshold: f64,
    #[serde(default)]
    pub paired: bool,
    /// Number of full paths dumped by `simulate`.
    #[serde(default = "default_paths")]
    pub paths: usize,
    /// CR scale for the `limitlaw` tables when the model has no CR limit.
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default = "default_cr_samples")]
    pub cr_samples: usize,
    #[serde(default = "default_table_points")]
    pub table_points: usize,
    #[serde(default = "default_chaos_trials")]
    pub chaos_trials: usize,
    /// Output directory; overridden by `FRACBRIDGE_OUT` and `--out`.
    #[serde(default, skip_serializing)]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Estimate,
    Consistency,
    Limitlaw,
    Constants,
    Selftest,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Estimate => "estimate",
            Self::Consistency => "consistency",
            Self::Limitlaw => "limitlaw",
            Self::Constants => "constants",
            Self::Selftest => "selftest",
        }
    }
}

/// Why a configuration was rejected.
#[derive(Debug)]
pub enum ConfigError {
    /// Malformed JSON, with line and column.
    Syntax(String),
    /// Schema violation at a field path.
    Schema { path: String, message: String },
    /// Values outside the model or experiment domain.
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(m) => write!(f, "config parse error: {m}"),
            Self::Schema { path, message } => write!(f, "config schema error at `{path}`: {message}"),
            Self::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a JSON document.
pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if inner.is_syntax() || inner.is_eof() {
            ConfigError::Syntax(inner.to_string())
        } else {
            ConfigError::Schema { path, message: inner.to_string() }
        }
    })?;
    de.end().map_err(|e| ConfigError::Syntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn params(&self) -> Result<ModelParams<f64>, ConfigError> {
        let alpha = Complex::new(self.alpha[0], self.alpha[1]);
        ModelParams::with_sigma(self.hurst, alpha, self.horizon, self.sigma)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn t_max(&self) -> f64 {
        self.t_max.unwrap_or(self.horizon - self.delta)
    }

    /// Checks shared by every subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let p = self.params()?;
        p.require_well_posed().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if !(self.delta > 0.0 && self.delta < self.horizon) {
            return bad(format!("delta must lie in (0, T), got {}", self.delta));
        }
        let t_max = self.t_max();
        if !(t_max > 0.0 && t_max < self.horizon) {
            return bad(format!("t_max must lie in (0, T) with T = {}, got {t_max}", self.horizon));
        }
        if self.n_steps == 0 {
            return bad("n_steps must be at least 1".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if let Some(ts) = &self.t_list {
            if ts.is_empty() {
                return bad("t_list must not be empty".into());
            }
            if let Some(t) = ts.iter().find(|&&t| !(t > 0.0 && t < self.horizon)) {
                return bad(format!("t_list entry {t} must lie in (0, T)"));
            }
        }
        if self.steps_per_gap == 0 {
            return bad("steps_per_gap must be at least 1".into());
        }
        if let Some(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("scale must be positive, got {s}"));
            }
        }
        if self.table_points < 2 {
            return bad("table_points must be at least 2".into());
        }
        if self.cr_samples == 0 {
            return bad("cr_samples must be at least 1".into());
        }
        if self.chaos_trials < 10_000 {
            return bad("chaos_trials must be at least 10000".into());
        }
        Ok(())
    }

    /// Subcommand preconditions, checked before any computation.
    pub fn validate_for(&self, cmd: Subcommand) -> Result<(), ConfigError> {
        self.validate()?;
        let p = self.params()?;
        match cmd {
            Subcommand::Estimate | Subcommand::Consistency | Subcommand::Limitlaw => {
                p.require_estimable().map_err(|e| ConfigError::Invalid(e.to_string()))?;
                let t = self.t_list_for(cmd)?;
                self.experiment(t).validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            _ => {}
        }
        if cmd == Subcommand::Limitlaw && self.case()? == LimitCase::Inconsistent {
            return Err(ConfigError::Invalid(
                "no normalised limit law when 1/2 < Re(alpha) < H".into(),
            ));
        }
        Ok(())
    }

    pub fn case(&self) -> Result<LimitCase, ConfigError> {
        classify_case(self.hurst, Complex::new(self.alpha[0], self.alpha[1]))
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Evaluation times: `t_list` if given, otherwise a per-subcommand default
    /// built from `T` and `delta`.
    pub fn t_list_for(&self, cmd: Subcommand) -> Result<Vec<f64>, ConfigError> {
        if let Some(t) = &self.t_list {
            return Ok(t.clone());
        }
        let (t, d) = (self.horizon, self.delta);
        let v = match cmd {
            Subcommand::Consistency => vec![t - 100.0 * d, t - 10.0 * d, t - d],
            Subcommand::Limitlaw => match self.case()? {
                LimitCase::CaseI | LimitCase::CaseII => vec![t - 5.0 * d],
                _ => vec![t - 10.0 * d, t - 2.0 * d],
            },
            _ => vec![self.t_max()],
        };
        if v.iter().any(|&x| !(x > 0.0)) {
            return Err(ConfigError::Invalid(format!(
                "default evaluation times {v:?} leave (0, T); set t_list or a smaller delta"
            )));
        }
        Ok(v)
    }

    pub fn experiment(&self, t_list: Vec<f64>) -> ExperimentConfig {
        let p = self.params().expect("validated");
        let mut c = ExperimentConfig::new(p, t_list, self.replications, self.seed);
        c.stream = self.stream;
        c.steps_per_gap = self.steps_per_gap;
        c.min_steps = self.n_steps;
        c.estimator = self.estimator;
        c.floor = self.floor;
        c.ks_threshold = self.ks_threshold;
        c.paired = self.paired;
        c
    }

    /// SHA-256 of the canonical JSON encoding (output directory excluded).
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}
