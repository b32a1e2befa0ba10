//! Experiment configuration: command-line flags, optionally overridden by a
//! TOML file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    NeqClassical,
    DjShortening,
    NeqHybrid,
    IpPsm,
    Bhm,
    Forrelation,
    Productness,
    OneWay,
    TwoProver,
    Complementary,
    Tools,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::NeqClassical,
        Suite::DjShortening,
        Suite::NeqHybrid,
        Suite::IpPsm,
        Suite::Bhm,
        Suite::Forrelation,
        Suite::Productness,
        Suite::OneWay,
        Suite::TwoProver,
        Suite::Complementary,
        Suite::Tools,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::NeqClassical => "neq-classical",
            Suite::DjShortening => "dj-shortening",
            Suite::NeqHybrid => "neq-hybrid",
            Suite::IpPsm => "ip-psm",
            Suite::Bhm => "bhm",
            Suite::Forrelation => "forrelation",
            Suite::Productness => "productness",
            Suite::OneWay => "one-way",
            Suite::TwoProver => "two-prover",
            Suite::Complementary => "complementary",
            Suite::Tools => "tools",
        }
    }

    /// Sizes used when no --n is given. For bhm these are input lengths 2n.
    pub fn default_n(self) -> Vec<usize> {
        match self {
            Suite::NeqClassical => vec![1, 2, 3, 4],
            Suite::DjShortening => vec![2, 4, 8, 16],
            Suite::NeqHybrid => vec![4, 8, 16],
            Suite::IpPsm => vec![1, 2, 3],
            Suite::Bhm => vec![4, 8, 12],
            Suite::Forrelation => vec![4, 8, 16, 32],
            Suite::Tools => vec![2, 3, 4, 5, 6, 7, 8],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'; expected one of {}", Suite::ALL.map(|x| x.name()).join(", ")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}'; expected json or csv")),
        }
    }
}

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_REPS: usize = 15;

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub suite: Suite,
    /// Problem sizes; empty means the suite's defaults.
    pub n: Vec<usize>,
    /// Parallel-repetition counts for two-prover; empty means defaults.
    pub k: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Protocol selector for the CDQS suites; None runs the suite's set.
    pub protocol: Option<String>,
    /// Instance count for the sampled suites; None uses the suite default.
    pub instances: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    /// Fill in wall_time_ms. Off by default so reports are reproducible.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            n: Vec::new(),
            k: Vec::new(),
            reps: DEFAULT_REPS,
            seed: DEFAULT_SEED,
            protocol: None,
            instances: None,
            out: None,
            format: Format::Json,
            workers: 0,
            timing: false,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        if self.n.is_empty() {
            self.suite.default_n()
        } else {
            self.n.clone()
        }
    }

    /// Applies every field present in `file` on top of `self`.
    pub fn overlay(mut self, file: FileConfig) -> Self {
        if let Some(v) = file.suite {
            self.suite = v;
        }
        if let Some(v) = file.n {
            self.n = v;
        }
        if let Some(v) = file.k {
            self.k = v;
        }
        if let Some(v) = file.reps {
            self.reps = v;
        }
        if let Some(v) = file.seed {
            self.seed = v;
        }
        if let Some(v) = file.protocol {
            self.protocol = Some(v);
        }
        if let Some(v) = file.instances {
            self.instances = Some(v);
        }
        if let Some(v) = file.out {
            self.out = Some(v);
        }
        if let Some(v) = file.format {
            self.format = v;
        }
        if let Some(v) = file.workers {
            self.workers = v;
        }
        if let Some(v) = file.timing {
            self.timing = v;
        }
        self
    }
}

/// Contents of a config file. Every key is optional; unknown keys are errors.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub suite: Option<Suite>,
    pub n: Option<Vec<usize>>,
    pub k: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub protocol: Option<String>,
    pub instances: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub timing: Option<bool>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
