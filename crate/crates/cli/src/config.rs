//! Experiment configuration: a JSON document, optionally overridden by flags.
//!
//! ```json
//! {
//!   "d": 3, "n": 3, "mode": "deferred",
//!   "noise": { "probs": [1.0, 0.0, 0.0] },
//!   "seed": 0, "trials": 1,
//!   "initial_state": "uniform",
//!   "max_paths": 4096,
//!   "out": "report.json", "history": "history.csv"
//! }
//! ```
//!
//! Every key is optional. `initial_state` is `"basis:<j>"`, `"uniform"`,
//! `"random"` or a list of `[re, im]` pairs.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qrep_core::chain::{seeded_rng, DEFAULT_MAX_PATHS};
use qrep_core::{make_state, random_state, ChainConfig, CorrectionMode, Dim, NoiseSpec, PureState};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ConfigError};

pub const DEFAULT_D: usize = 3;
pub const DEFAULT_N: usize = 3;
pub const DEFAULT_TRIALS: u64 = 1;

/// Initial state selector.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Basis(usize),
    Uniform,
    /// Haar-random, drawn from the master seed.
    Random,
    Amplitudes(Vec<Complex64>),
}

impl StateSpec {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let text = text.trim();
        if let Some(j) = text.strip_prefix("basis:") {
            let j = j.trim().parse().map_err(|_| {
                ConfigError::new("initial_state", format!("bad basis index in {text:?}"))
            })?;
            return Ok(StateSpec::Basis(j));
        }
        match text {
            "uniform" => Ok(StateSpec::Uniform),
            "random" => Ok(StateSpec::Random),
            _ => {
                let pairs: Vec<[f64; 2]> = serde_json::from_str(text).map_err(|_| {
                    ConfigError::new(
                        "initial_state",
                        format!(
                            "expected basis:<j>, uniform, random or [[re, im], ...], got {text:?}"
                        ),
                    )
                })?;
                Ok(StateSpec::Amplitudes(
                    pairs
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                ))
            }
        }
    }

    fn to_value(&self) -> StateValue {
        match self {
            StateSpec::Basis(j) => StateValue::Name(format!("basis:{j}")),
            StateSpec::Uniform => StateValue::Name("uniform".into()),
            StateSpec::Random => StateValue::Name("random".into()),
            StateSpec::Amplitudes(a) => {
                StateValue::Amplitudes(a.iter().map(|c| [c.re, c.im]).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum StateValue {
    Name(String),
    Amplitudes(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Local,
    Deferred,
}

impl From<ModeName> for CorrectionMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Local => CorrectionMode::LocalEachHop,
            ModeName::Deferred => CorrectionMode::DeferredFinal,
        }
    }
}

impl From<CorrectionMode> for ModeName {
    fn from(m: CorrectionMode) -> Self {
        match m {
            CorrectionMode::LocalEachHop => ModeName::Local,
            CorrectionMode::DeferredFinal => ModeName::Deferred,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseDocument {
    pub probs: Vec<f64>,
}

/// On-disk form of a configuration; also echoed into every report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_state: Option<StateValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_paths: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<PathBuf>,
}

/// Flag values that override the document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub mode: Option<ModeName>,
    /// Comma-separated probabilities.
    pub noise: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub state: Option<String>,
    pub max_paths: Option<usize>,
    pub out: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

/// Validated experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub d: Dim,
    pub n: usize,
    pub mode: CorrectionMode,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub trials: u64,
    pub initial_state: StateSpec,
    pub max_paths: usize,
    pub out: Option<PathBuf>,
    pub history: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            dim: self.d,
            n: self.n,
            mode: self.mode,
            noise: self.noise.clone(),
            seed: self.seed,
            record_entropy: false,
        }
    }

    /// Materializes `initial_state`. `random` draws from the master seed on a
    /// ChaCha stream separate from the trial streams.
    pub fn initial_state(&self) -> Result<PureState, ConfigError> {
        let d = self.d;
        let field = |e: qrep_core::Error| ConfigError::new("initial_state", e.to_string());
        match &self.initial_state {
            StateSpec::Basis(j) => {
                qrep_core::basis_state(d, 1, &qrep_core::BasisIndex::new(vec![*j])).map_err(field)
            }
            StateSpec::Uniform => Ok(qrep_core::uniform_superposition(d)),
            StateSpec::Random => Ok(random_state(d, 1, &mut state_rng(self.seed))),
            StateSpec::Amplitudes(a) => {
                if a.len() != d.get() {
                    return Err(ConfigError::new(
                        "initial_state",
                        format!("{} amplitudes given for a single d={d} qudit", a.len()),
                    ));
                }
                make_state(d, a.clone()).map_err(field)
            }
        }
    }

    /// Fully populated document describing this configuration.
    pub fn to_document(&self) -> ConfigDocument {
        ConfigDocument {
            d: Some(self.d.get()),
            n: Some(self.n),
            mode: Some(self.mode.into()),
            noise: Some(NoiseDocument {
                probs: self.noise.probs().to_vec(),
            }),
            seed: Some(self.seed),
            trials: Some(self.trials),
            initial_state: Some(self.initial_state.to_value()),
            max_paths: Some(self.max_paths),
            out: self.out.clone(),
            history: self.history.clone(),
        }
    }
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::new("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(ConfigDocument::from_json(&text)?)
    }

    /// Applies defaults and validates every field.
    pub fn resolve(self, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
        let d_raw = overrides.d.or(self.d).unwrap_or(DEFAULT_D);
        let d = Dim::new(d_raw).map_err(|e| ConfigError::new("d", e.to_string()))?;

        let n = overrides.n.or(self.n).unwrap_or(DEFAULT_N);
        if n == 0 {
            return Err(ConfigError::new("n", "repeater count must be at least 1"));
        }

        let mode = overrides
            .mode
            .or(self.mode)
            .unwrap_or(ModeName::Deferred)
            .into();

        let probs = match &overrides.noise {
            Some(text) => Some(parse_probs(text)?),
            None => self.noise.map(|n| n.probs),
        };
        let noise = match probs {
            Some(p) => {
                NoiseSpec::new(d, p).map_err(|e| ConfigError::new("noise.probs", e.to_string()))?
            }
            None => NoiseSpec::noiseless(d),
        };

        let trials = overrides.trials.or(self.trials).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }

        let initial_state = match (&overrides.state, self.initial_state) {
            (Some(text), _) => StateSpec::parse(text)?,
            (None, Some(StateValue::Name(name))) => StateSpec::parse(&name)?,
            (None, Some(StateValue::Amplitudes(pairs))) => StateSpec::Amplitudes(
                pairs
                    .iter()
                    .map(|[re, im]| Complex64::new(*re, *im))
                    .collect(),
            ),
            (None, None) => StateSpec::Uniform,
        };

        let max_paths = overrides
            .max_paths
            .or(self.max_paths)
            .unwrap_or(DEFAULT_MAX_PATHS);

        let cfg = ExperimentConfig {
            d,
            n,
            mode,
            noise,
            seed: overrides.seed.or(self.seed).unwrap_or(0),
            trials,
            initial_state,
            max_paths,
            out: overrides.out.clone().or(self.out),
            history: overrides.history.clone().or(self.history),
        };
        // Reject bad explicit states now rather than at run time.
        cfg.initial_state()?;
        Ok(cfg)
    }
}

fn parse_probs(text: &str) -> Result<Vec<f64>, ConfigError> {
    text.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|_| {
                ConfigError::new("noise.probs", format!("cannot parse {p:?} as a number"))
            })
        })
        .collect()
}

/// Loads `path` (if any) and applies flag overrides.
pub fn parse_config(
    path: Option<&Path>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let doc = match path {
        Some(p) => ConfigDocument::load(p)?,
        None => ConfigDocument::default(),
    };
    Ok(doc.resolve(overrides)?)
}

/// Stream 1 of the master seed; trial runs use stream 0.
fn state_rng(seed: u64) -> qrep_core::chain::SeededRng {
    let mut rng = seeded_rng(seed);
    rng.set_stream(1);
    rng
}
