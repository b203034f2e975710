//! Simulation configuration: defaults, JSON parsing, validation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::population::{default_author_specs, default_journal_specs, ArchetypeSpec};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid configuration:\n{}", violations.join("\n"))]
    Invalid { violations: Vec<String> },
}

/// How an author with outstanding review debt picks pool manuscripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DutyStrategy {
    /// Highest expertise score first (mirrors how journals pick referees).
    Expertise,
    /// Uniformly at random among eligible manuscripts.
    Random,
}

/// All knobs of one experiment. Every field has the stock default except
/// `master_seed`, which must be supplied by the config file or the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub master_seed: Option<u64>,
    pub months: u32,
    pub author_specs: Vec<ArchetypeSpec>,
    pub journal_specs: Vec<ArchetypeSpec>,
    /// Monthly probability that an author produces a manuscript.
    pub productivity: f64,
    /// Monthly probability that a pending review task completes.
    pub completion_prob: f64,
    /// Rejections before a manuscript is abandoned.
    pub max_rejections: u32,
    pub reviewers_per_ms: u32,
    /// Referees are sampled from this many top-scoring candidates.
    pub top_pool: u32,
    pub window_halfwidth: f64,
    /// Cap of the revision improvement function.
    pub improvement_cap: f64,
    /// Monthly bidding rounds a ripe manuscript gets before abandonment.
    /// Ripe manuscripts stay in the second pool and are re-evaluated by
    /// every journal each month until they draw a bid or exhaust this
    /// budget; set to 1 for the abandon-on-first-miss variant.
    pub as_bid_rounds: u32,
    pub as_duty_strategy: DutyStrategy,
    pub replicates: u32,
    /// When true, post-revision estimates appear in the same month the
    /// first round finishes; by default the re-review round takes time like
    /// the first one (see README on timing).
    pub instant_second_round: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            master_seed: None,
            months: 120,
            author_specs: default_author_specs(),
            journal_specs: default_journal_specs(),
            productivity: 0.25,
            completion_prob: 0.5,
            max_rejections: 5,
            reviewers_per_ms: 3,
            top_pool: 20,
            window_halfwidth: 0.1,
            improvement_cap: 0.1,
            as_bid_rounds: 10,
            as_duty_strategy: DutyStrategy::Expertise,
            replicates: 1,
            instant_second_round: false,
        }
    }
}

impl SimConfig {
    /// Default config with a seed; handy in tests.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            master_seed: Some(seed),
            ..Self::default()
        }
    }

    /// Parses a JSON config file. An empty (or whitespace-only) file yields
    /// all defaults; unknown keys are rejected.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut violations = Vec::new();
        if self.master_seed.is_none() {
            violations.push("master_seed: required (set it in the config file or pass --seed)".into());
        }
        if self.months == 0 {
            violations.push(format!("months: must be positive, got {}", self.months));
        }
        if !(0.0..=1.0).contains(&self.productivity) {
            violations.push(format!(
                "productivity: must be in [0, 1], got {}",
                self.productivity
            ));
        }
        if !(0.0..=1.0).contains(&self.completion_prob) {
            violations.push(format!(
                "completion_prob: must be in [0, 1], got {}",
                self.completion_prob
            ));
        }
        if self.max_rejections == 0 {
            violations.push(format!(
                "max_rejections: must be positive, got {}",
                self.max_rejections
            ));
        }
        if self.reviewers_per_ms == 0 {
            violations.push(format!(
                "reviewers_per_ms: must be positive, got {}",
                self.reviewers_per_ms
            ));
        }
        if self.reviewers_per_ms > self.top_pool {
            violations.push(format!(
                "reviewers_per_ms: must not exceed top_pool, got {} > {}",
                self.reviewers_per_ms, self.top_pool
            ));
        }
        if !(self.window_halfwidth > 0.0 && self.window_halfwidth < 0.5) {
            violations.push(format!(
                "window_halfwidth: must be in (0, 0.5), got {}",
                self.window_halfwidth
            ));
        }
        if !(0.0..=1.0).contains(&self.improvement_cap) {
            violations.push(format!(
                "improvement_cap: must be in [0, 1], got {}",
                self.improvement_cap
            ));
        }
        if self.as_bid_rounds == 0 {
            violations.push(format!(
                "as_bid_rounds: must be positive, got {}",
                self.as_bid_rounds
            ));
        }
        if self.replicates == 0 {
            violations.push(format!(
                "replicates: must be positive, got {}",
                self.replicates
            ));
        }
        for (name, specs) in [
            ("author_specs", &self.author_specs),
            ("journal_specs", &self.journal_specs),
        ] {
            for (i, spec) in specs.iter().enumerate() {
                if let Err(e) = spec.validate() {
                    violations.push(format!("{name}[{i}]: {e}"));
                }
            }
        }
        let authors: u32 = self.author_specs.iter().map(|s| s.count).sum();
        if authors < self.reviewers_per_ms + 1 {
            violations.push(format!(
                "author_specs: need at least reviewers_per_ms + 1 = {} authors, got {}",
                self.reviewers_per_ms + 1,
                authors
            ));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid { violations })
        }
    }

    /// Seed accessor for validated configs.
    pub fn seed(&self) -> u64 {
        self.master_seed
            .expect("config validated: master_seed present")
    }
}
