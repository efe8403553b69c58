//! Experiment configuration: a flat `key = value` file, every key also
//! settable programmatically (the CLI maps flags onto the same fields).

use crate::graph::AggregationKind;
use crate::model::Variant;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: unknown key `{key}`")]
    UnknownKey {
        path: PathBuf,
        line: usize,
        key: String,
    },
    #[error("{path}:{line}: bad value for `{key}`: {msg}")]
    BadValue {
        path: PathBuf,
        line: usize,
        key: String,
        msg: String,
    },
    #[error("{0}")]
    Invalid(String),
}

/// Message-passing flavor, including the optional per-epoch neighbor
/// sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMode {
    Gcn,
    RowMean,
    Sum,
    /// Per-epoch uniform sample of up to `k` neighbors, sum-aggregated.
    Sampled(usize),
}

impl AggregationMode {
    /// The fixed matrix flavor backing this mode ([`AggregationMode::Sampled`]
    /// re-draws each epoch and aggregates by sum).
    pub fn fixed_kind(&self) -> AggregationKind {
        match self {
            AggregationMode::Gcn => AggregationKind::SymmetricGcn,
            AggregationMode::RowMean => AggregationKind::RowMean,
            AggregationMode::Sum | AggregationMode::Sampled(_) => AggregationKind::Sum,
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "gcn" => Ok(AggregationMode::Gcn),
            "row-mean" => Ok(AggregationMode::RowMean),
            "sum" => Ok(AggregationMode::Sum),
            other => {
                if let Some(k) = other.strip_prefix("sample:") {
                    let k: usize = k
                        .parse()
                        .map_err(|_| format!("bad neighbor count in `{other}`"))?;
                    if k == 0 {
                        return Err("sample:k needs k >= 1".into());
                    }
                    Ok(AggregationMode::Sampled(k))
                } else {
                    Err(format!(
                        "unknown aggregation `{other}` (gcn, row-mean, sum, sample:k)"
                    ))
                }
            }
        }
    }
}

impl AggregationMode {
    fn as_string(&self) -> String {
        match self {
            AggregationMode::Gcn => "gcn".into(),
            AggregationMode::RowMean => "row-mean".into(),
            AggregationMode::Sum => "sum".into(),
            AggregationMode::Sampled(k) => format!("sample:{k}"),
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_string())
    }
}

impl Serialize for AggregationMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.as_string())
    }
}

impl<'de> Deserialize<'de> for AggregationMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        AggregationMode::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Parameters of the synthetic biased-graph generator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SynthParams {
    pub n: usize,
    pub homophily: f64,
    pub bias_strength: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n: 500,
            homophily: 0.9,
            bias_strength: 0.8,
            seed: 1,
        }
    }
}

/// Every tunable of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// `german`, `credit`, `bail`, `synth`, `synth-german`, or `custom`.
    pub dataset: String,
    /// Root directory for the named datasets.
    pub data_dir: PathBuf,
    pub features_path: Option<PathBuf>,
    pub edges_path: Option<PathBuf>,
    pub masks_path: Option<PathBuf>,
    /// Header names; named datasets carry defaults.
    pub sensitive_col: Option<String>,
    pub label_col: Option<String>,

    pub variant: Variant,
    pub beta: f64,
    pub lr: f64,
    pub epochs: usize,
    pub hidden_dim: usize,
    pub encoder_layers: usize,
    pub classifier_layers: usize,
    pub aggregation: AggregationMode,
    pub sample_final_only: bool,

    pub seeds: Vec<u64>,
    pub split_seed: u64,
    pub train_frac: f64,
    pub val_frac: f64,

    pub noise_std: f64,
    pub rs_trials: usize,

    pub synth: SynthParams,
    pub out_dir: PathBuf,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dataset: "synth".into(),
            data_dir: PathBuf::from("data"),
            features_path: None,
            edges_path: None,
            masks_path: None,
            sensitive_col: None,
            label_col: None,
            variant: Variant::Full,
            beta: 1000.0,
            lr: 0.01,
            epochs: 100,
            hidden_dim: 20,
            encoder_layers: 2,
            classifier_layers: 1,
            aggregation: AggregationMode::Gcn,
            sample_final_only: false,
            seeds: vec![0, 1, 2, 3, 4],
            split_seed: 42,
            train_frac: 0.5,
            val_frac: 0.25,
            noise_std: 1.0,
            rs_trials: 5,
            synth: SynthParams::default(),
            out_dir: PathBuf::from("runs"),
        }
    }
}

impl TrainConfig {
    /// Applies one `key = value` assignment. Shared by the file parser
    /// and by anything that patches configs textually.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str, what: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("`{v}` is not a valid {what}"))
        }
        match key {
            "dataset" => self.dataset = value.to_string(),
            "data_dir" => self.data_dir = PathBuf::from(value),
            "features_path" => self.features_path = Some(PathBuf::from(value)),
            "edges_path" => self.edges_path = Some(PathBuf::from(value)),
            "masks_path" => self.masks_path = Some(PathBuf::from(value)),
            "sensitive_col" => self.sensitive_col = Some(value.to_string()),
            "label_col" => self.label_col = Some(value.to_string()),
            "variant" => self.variant = Variant::parse(value).map_err(|e| e.to_string())?,
            "beta" => self.beta = num(value, "number")?,
            "lr" => self.lr = num(value, "number")?,
            "epochs" => self.epochs = num(value, "integer")?,
            "hidden_dim" => self.hidden_dim = num(value, "integer")?,
            "encoder_layers" => self.encoder_layers = num(value, "integer")?,
            "classifier_layers" => self.classifier_layers = num(value, "integer")?,
            "aggregation" => self.aggregation = AggregationMode::parse(value)?,
            "sample_final_only" => self.sample_final_only = num(value, "bool")?,
            "seeds" => {
                let mut seeds = Vec::new();
                for part in value.split(',').filter(|p| !p.trim().is_empty()) {
                    seeds.push(num(part.trim(), "seed")?);
                }
                self.seeds = seeds;
            }
            "split_seed" => self.split_seed = num(value, "integer")?,
            "train_frac" => self.train_frac = num(value, "number")?,
            "val_frac" => self.val_frac = num(value, "number")?,
            "noise_std" => self.noise_std = num(value, "number")?,
            "rs_trials" => self.rs_trials = num(value, "integer")?,
            "synth_n" => self.synth.n = num(value, "integer")?,
            "synth_homophily" => self.synth.homophily = num(value, "number")?,
            "synth_bias" => self.synth.bias_strength = num(value, "number")?,
            "synth_seed" => self.synth.seed = num(value, "integer")?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file (`#` comments, blank lines ok).
    pub fn from_file(path: &Path) -> Result<TrainConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = TrainConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(ConfigError::BadValue {
                    path: path.to_path_buf(),
                    line,
                    key: stripped.to_string(),
                    msg: "expected `key = value`".into(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            cfg.apply(key, value).map_err(|msg| {
                if msg.starts_with("unknown key") {
                    ConfigError::UnknownKey {
                        path: path.to_path_buf(),
                        line,
                        key: key.to_string(),
                    }
                } else {
                    ConfigError::BadValue {
                        path: path.to_path_buf(),
                        line,
                        key: key.to_string(),
                        msg,
                    }
                }
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.beta < 1.0 {
            return Err(ConfigError::Invalid(format!(
                "beta = {} but the trade-off weight must be >= 1",
                self.beta
            )));
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("seeds list is empty".into()));
        }
        if self.hidden_dim == 0 || self.encoder_layers == 0 || self.classifier_layers == 0 {
            return Err(ConfigError::Invalid(
                "hidden_dim, encoder_layers and classifier_layers must be >= 1".into(),
            ));
        }
        if self.noise_std < 0.0 {
            return Err(ConfigError::Invalid("noise_std must be >= 0".into()));
        }
        if !(self.train_frac > 0.0 && self.val_frac >= 0.0
            && self.train_frac + self.val_frac < 1.0)
        {
            return Err(ConfigError::Invalid(
                "train_frac/val_frac must leave room for a test split".into(),
            ));
        }
        Ok(())
    }
}
