//! Replicate orchestration: seed derivation, shared populations, and the
//! parallel/sequential execution paths.
//!
//! Seed scheme (stateless, documented so runs can be reproduced piecemeal):
//! for replicate `r`, the population is drawn from sub-seed `3r`, the
//! editor-driven run from `3r + 1`, the pool run from `3r + 2`, where
//! sub-seed `i` is `derive_seed(master_seed, i)`. The population seed
//! splits once more: authors from its sub-stream 0, journals from 1.

use serde::{Deserialize, Serialize};

use crate::as_engine::AsState;
use crate::config::{ConfigError, SimConfig};
use crate::cs_engine::CsState;
use crate::metrics::{
    compare_runs, summarize_run, ComparisonReport, ManuscriptOutcome, RunExtras, RunSummary,
    Setting,
};
use crate::population::Population;
use crate::stochastics::derive_seed;

/// Which settings to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SettingChoice {
    Cs,
    As,
    Both,
}

impl SettingChoice {
    fn wants_cs(self) -> bool {
        matches!(self, SettingChoice::Cs | SettingChoice::Both)
    }

    fn wants_as(self) -> bool {
        matches!(self, SettingChoice::As | SettingChoice::Both)
    }
}

/// Summary plus raw per-manuscript records of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub outcomes: Vec<ManuscriptOutcome>,
}

/// Everything one replicate produced.
#[derive(Debug, Clone)]
pub struct ReplicateResult {
    pub replicate: u32,
    pub population: Population,
    pub journal_impacts: Vec<f64>,
    pub cs: Option<RunOutput>,
    pub as_run: Option<RunOutput>,
    pub comparison: Option<ComparisonReport>,
}

/// Runs one replicate: generates the shared population and plays the
/// requested settings on it with independent sub-streams.
pub fn run_replicate(cfg: &SimConfig, replicate: u32, choice: SettingChoice) -> ReplicateResult {
    let master = cfg.seed();
    let base = 3 * u64::from(replicate);
    let pop_seed = derive_seed(master, base);
    let cs_seed = derive_seed(master, base + 1);
    let as_seed = derive_seed(master, base + 2);

    let population = Population::generate(&cfg.author_specs, &cfg.journal_specs, pop_seed)
        .expect("config validated before running");
    let journal_impacts = population.journal_impacts(cfg.window_halfwidth);

    let cs = choice.wants_cs().then(|| {
        let state = CsState::run(&population, cfg, cs_seed);
        let outcomes = state.outcomes();
        let summary = summarize_run(
            Setting::Cs,
            cfg.months,
            &outcomes,
            &population,
            &journal_impacts,
            RunExtras::default(),
        );
        RunOutput { summary, outcomes }
    });

    let as_run = choice.wants_as().then(|| {
        let state = AsState::run(&population, cfg, as_seed);
        let outcomes = state.outcomes();
        let extras = RunExtras {
            first_pool: Some(state.first_pool_stats()),
            outstanding_debt: Some(state.outstanding_debt()),
        };
        let summary = summarize_run(
            Setting::As,
            cfg.months,
            &outcomes,
            &population,
            &journal_impacts,
            extras,
        );
        RunOutput { summary, outcomes }
    });

    let comparison = match (&cs, &as_run) {
        (Some(c), Some(a)) => Some(
            compare_runs(&c.summary, &a.summary)
                .expect("both runs share one population by construction"),
        ),
        _ => None,
    };

    ReplicateResult {
        replicate,
        population,
        journal_impacts,
        cs,
        as_run,
        comparison,
    }
}

/// All replicates, sequentially. Identical output to [`run_replicates`].
pub fn run_replicates_serial(
    cfg: &SimConfig,
    choice: SettingChoice,
) -> Result<Vec<ReplicateResult>, ConfigError> {
    cfg.validate()?;
    Ok((0..cfg.replicates)
        .map(|r| run_replicate(cfg, r, choice))
        .collect())
}

/// All replicates, on the rayon pool when the `parallel` feature is active.
/// Each replicate derives its own seeds, so scheduling cannot change the
/// results.
pub fn run_replicates(
    cfg: &SimConfig,
    choice: SettingChoice,
) -> Result<Vec<ReplicateResult>, ConfigError> {
    cfg.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..cfg.replicates)
            .into_par_iter()
            .map(|r| run_replicate(cfg, r, choice))
            .collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..cfg.replicates)
            .map(|r| run_replicate(cfg, r, choice))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> SimConfig {
        SimConfig {
            months: 24,
            replicates: 2,
            ..SimConfig::with_seed(42)
        }
    }

    #[test]
    fn both_settings_share_the_population() {
        let cfg = small_cfg();
        let results = run_replicates_serial(&cfg, SettingChoice::Both).unwrap();
        assert_eq!(results.len(), 2);
        for r in &results {
            assert!(r.cs.is_some());
            assert!(r.as_run.is_some());
            assert!(r.comparison.is_some());
        }
        // different replicates get different populations
        assert_ne!(results[0].population, results[1].population);
    }

    #[test]
    fn single_setting_skips_the_other() {
        let cfg = SimConfig {
            replicates: 1,
            ..small_cfg()
        };
        let results = run_replicates_serial(&cfg, SettingChoice::Cs).unwrap();
        assert!(results[0].cs.is_some());
        assert!(results[0].as_run.is_none());
        assert!(results[0].comparison.is_none());
    }

    #[test]
    fn zero_replicates_is_an_error() {
        let cfg = SimConfig {
            replicates: 0,
            ..small_cfg()
        };
        assert!(run_replicates_serial(&cfg, SettingChoice::Both).is_err());
    }

    #[test]
    fn parallel_and_serial_agree_exactly() {
        let cfg = small_cfg();
        let par = run_replicates(&cfg, SettingChoice::Both).unwrap();
        let ser = run_replicates_serial(&cfg, SettingChoice::Both).unwrap();
        assert_eq!(par.len(), ser.len());
        for (p, s) in par.iter().zip(&ser) {
            assert_eq!(p.population, s.population);
            assert_eq!(
                p.cs.as_ref().unwrap().summary,
                s.cs.as_ref().unwrap().summary
            );
            assert_eq!(
                p.as_run.as_ref().unwrap().summary,
                s.as_run.as_ref().unwrap().summary
            );
            assert_eq!(p.comparison, s.comparison);
        }
    }
}
