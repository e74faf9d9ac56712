use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::DEFAULT_BRUTE_BUDGET;
use crate::error::{Error, Result};
use crate::io::Format;
use crate::ogp::CoinMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    McIgp,
    McLas,
    Brute,
    OgpJoint,
    OnlineCheck,
    IngestRun,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::McIgp => "mc-igp",
            ExperimentKind::McLas => "mc-las",
            ExperimentKind::Brute => "brute",
            ExperimentKind::OgpJoint => "ogp-joint",
            ExperimentKind::OnlineCheck => "online-check",
            ExperimentKind::IngestRun => "ingest-run",
        }
    }
}

/// Problem size. For `ingest-run`, `n` and `p` come from the file and any
/// values given here must match.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    #[serde(default)]
    pub n: usize,
    pub k: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_p() -> usize {
    2
}

fn default_epsilon() -> f64 {
    0.1
}

/// Replaces the constructed partition with a uniform grid of depth `N`
/// and branching factor `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeOverride {
    #[serde(rename = "N")]
    pub depth: usize,
    #[serde(rename = "D")]
    pub branching: usize,
}

/// How the greedy procedure seeds its first round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitChoice {
    #[default]
    First,
    Seeded,
}

/// Algorithm applied to an ingested tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Igp,
    Las,
    Brute,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Igp => "igp",
            Algorithm::Las => "las",
            Algorithm::Brute => "brute",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Label mixed into every per-trial key; defaults to the kind label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub params: ParamSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeOverride>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub init: InitChoice,
    #[serde(default = "default_budget")]
    pub budget: u128,
    #[serde(default)]
    pub coins: CoinMode,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Adds a wall-clock column to the CSV, which then differs between runs.
    #[serde(default)]
    pub timing: bool,
}

fn default_trials() -> usize {
    1
}

fn default_threads() -> usize {
    1
}

fn default_budget() -> u128 {
    DEFAULT_BRUTE_BUDGET
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, params: ParamSpec, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            kind,
            id: None,
            params,
            scheme: None,
            trials,
            seed,
            threads: 1,
            output: OutputPaths::default(),
            init: InitChoice::First,
            budget: DEFAULT_BRUTE_BUDGET,
            coins: CoinMode::Shared,
            algorithm: Algorithm::Igp,
            input: None,
            format: None,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn experiment_id(&self) -> &str {
        self.id.as_deref().unwrap_or(self.kind.label())
    }
}
