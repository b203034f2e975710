//! Author and journal populations, journal impact, and manuscripts.
//!
//! Each agent carries three beta distributions, topic (T), quality (Q) and
//! novelty (N), drawn parameter-by-parameter from archetype intervals.
//! Generation order is fixed (archetypes in list order, parameters in the
//! order aT, bT, aQ, bQ, aN, bN) so a seed pins the population exactly.

use serde::{Deserialize, Serialize};

use crate::stochastics::{window_density, BetaParams, RngStream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PopulationError {
    #[error("invalid interval [{lo}, {hi}]: bounds must satisfy 0 < lo <= hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("illegal manuscript state transition {from:?} -> {to:?}")]
    IllegalTransition { from: String, to: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Broad,
    Specialist,
    Normal,
}

impl Archetype {
    pub fn label(&self) -> &'static str {
        match self {
            Archetype::Broad => "broad",
            Archetype::Specialist => "specialist",
            Archetype::Normal => "normal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Author,
    Journal,
}

impl AgentKind {
    pub fn label(&self) -> &'static str {
        match self {
            AgentKind::Author => "author",
            AgentKind::Journal => "journal",
        }
    }
}

/// Closed interval for one shape parameter, 0 < lo <= hi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, PopulationError> {
        let iv = Self { lo, hi };
        iv.validate()?;
        Ok(iv)
    }

    pub fn validate(&self) -> Result<(), PopulationError> {
        if !(self.lo > 0.0 && self.lo <= self.hi && self.hi.is_finite()) {
            return Err(PopulationError::InvalidInterval {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

/// How many agents of one archetype to create and the uniform intervals
/// their six shape parameters are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeSpec {
    pub archetype: Archetype,
    pub count: u32,
    pub alpha_topic: Interval,
    pub beta_topic: Interval,
    pub alpha_quality: Interval,
    pub beta_quality: Interval,
    pub alpha_novelty: Interval,
    pub beta_novelty: Interval,
}

impl ArchetypeSpec {
    pub fn validate(&self) -> Result<(), PopulationError> {
        for iv in self.intervals() {
            iv.validate()?;
        }
        Ok(())
    }

    fn intervals(&self) -> [Interval; 6] {
        [
            self.alpha_topic,
            self.beta_topic,
            self.alpha_quality,
            self.beta_quality,
            self.alpha_novelty,
            self.beta_novelty,
        ]
    }

    /// True when every one of the profile's six parameters lies inside the
    /// declared interval.
    pub fn contains_profile(&self, p: &AgentProfile) -> bool {
        self.alpha_topic.contains(p.topic.alpha())
            && self.beta_topic.contains(p.topic.beta())
            && self.alpha_quality.contains(p.quality.alpha())
            && self.beta_quality.contains(p.quality.beta())
            && self.alpha_novelty.contains(p.novelty.alpha())
            && self.beta_novelty.contains(p.novelty.beta())
    }
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

/// 50 broad / 150 specialist / 300 normal authors.
pub fn default_author_specs() -> Vec<ArchetypeSpec> {
    vec![
        ArchetypeSpec {
            archetype: Archetype::Broad,
            count: 50,
            alpha_topic: iv(1.0, 5.0),
            beta_topic: iv(1.0, 5.0),
            alpha_quality: iv(50.0, 100.0),
            beta_quality: iv(5.0, 10.0),
            alpha_novelty: iv(50.0, 100.0),
            beta_novelty: iv(5.0, 10.0),
        },
        ArchetypeSpec {
            archetype: Archetype::Specialist,
            count: 150,
            alpha_topic: iv(10.0, 100.0),
            beta_topic: iv(10.0, 100.0),
            alpha_quality: iv(5.0, 10.0),
            beta_quality: iv(1.0, 5.0),
            alpha_novelty: iv(5.0, 10.0),
            beta_novelty: iv(1.0, 5.0),
        },
        ArchetypeSpec {
            archetype: Archetype::Normal,
            count: 300,
            alpha_topic: iv(1.0, 10.0),
            beta_topic: iv(1.0, 10.0),
            alpha_quality: iv(1.0, 10.0),
            beta_quality: iv(5.0, 10.0),
            alpha_novelty: iv(1.0, 10.0),
            beta_novelty: iv(5.0, 10.0),
        },
    ]
}

/// 5 broad / 15 specialist / 30 normal journals.
pub fn default_journal_specs() -> Vec<ArchetypeSpec> {
    let mut specs = default_author_specs();
    specs[0].count = 5;
    specs[1].count = 15;
    specs[2].count = 30;
    specs
}

/// One author or journal: three beta distributions plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentProfile {
    pub id: u32,
    pub kind: AgentKind,
    pub archetype: Archetype,
    pub topic: BetaParams,
    pub quality: BetaParams,
    pub novelty: BetaParams,
}

fn generate(
    kind: AgentKind,
    specs: &[ArchetypeSpec],
    rng: &mut RngStream,
) -> Result<Vec<AgentProfile>, PopulationError> {
    let mut out = Vec::new();
    let mut next_id = 0u32;
    for spec in specs {
        spec.validate()?;
        for _ in 0..spec.count {
            let mut draw = |iv: Interval| rng.uniform(iv.lo, iv.hi);
            let at = draw(spec.alpha_topic);
            let bt = draw(spec.beta_topic);
            let aq = draw(spec.alpha_quality);
            let bq = draw(spec.beta_quality);
            let an = draw(spec.alpha_novelty);
            let bn = draw(spec.beta_novelty);
            out.push(AgentProfile {
                id: next_id,
                kind,
                archetype: spec.archetype,
                topic: BetaParams::new(at, bt).expect("interval bounds are positive"),
                quality: BetaParams::new(aq, bq).expect("interval bounds are positive"),
                novelty: BetaParams::new(an, bn).expect("interval bounds are positive"),
            });
            next_id += 1;
        }
    }
    Ok(out)
}

pub fn generate_authors(
    specs: &[ArchetypeSpec],
    rng: &mut RngStream,
) -> Result<Vec<AgentProfile>, PopulationError> {
    generate(AgentKind::Author, specs, rng)
}

pub fn generate_journals(
    specs: &[ArchetypeSpec],
    rng: &mut RngStream,
) -> Result<Vec<AgentProfile>, PopulationError> {
    generate(AgentKind::Journal, specs, rng)
}

/// Impact = mean(Q) * mean(N) / z(T, mean(T)). Specialization (high window
/// density around the topic mean) divides impact down; a fully generalist
/// journal scores z = 2h and so gets the largest boost.
pub fn journal_impact(journal: &AgentProfile, halfwidth: f64) -> f64 {
    debug_assert_eq!(journal.kind, AgentKind::Journal);
    let z = window_density(&journal.topic, journal.topic.mean(), halfwidth)
        .expect("topic mean is inside (0, 1)");
    journal.quality.mean() * journal.novelty.mean() / z
}

/// The shared author/journal populations for one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub authors: Vec<AgentProfile>,
    pub journals: Vec<AgentProfile>,
}

impl Population {
    /// Draws authors and journals from two sub-streams of `seed`, so both
    /// settings of a replicate share one population.
    pub fn generate(
        author_specs: &[ArchetypeSpec],
        journal_specs: &[ArchetypeSpec],
        seed: u64,
    ) -> Result<Self, PopulationError> {
        let mut author_rng = RngStream::substream(seed, 0);
        let mut journal_rng = RngStream::substream(seed, 1);
        Ok(Self {
            authors: generate_authors(author_specs, &mut author_rng)?,
            journals: generate_journals(journal_specs, &mut journal_rng)?,
        })
    }

    pub fn journal_impacts(&self, halfwidth: f64) -> Vec<f64> {
        self.journals
            .iter()
            .map(|j| journal_impact(j, halfwidth))
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Manuscripts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManuscriptState {
    Draft,
    UnderReview,
    InFirstPool,
    InSecondPool,
    Published { journal_id: u32, month: u32 },
    Abandoned { month: u32 },
}

impl ManuscriptState {
    pub fn is_terminal(&self) -> bool {
        matches!(
            self,
            ManuscriptState::Published { .. } | ManuscriptState::Abandoned { .. }
        )
    }

    fn allows(&self, next: &ManuscriptState) -> bool {
        use ManuscriptState::*;
        matches!(
            (self, next),
            (Draft, UnderReview)
                | (Draft, InFirstPool)
                | (UnderReview, Published { .. })
                | (UnderReview, Abandoned { .. })
                | (InFirstPool, InSecondPool)
                | (InSecondPool, Published { .. })
                | (InSecondPool, Abandoned { .. })
        )
    }
}

/// One manuscript: an immutable topic draw plus quality/novelty values that
/// only ever increase through revision.
#[derive(Debug, Clone, PartialEq)]
pub struct Manuscript {
    pub id: u32,
    pub author_id: u32,
    pub topic: f64,
    pub quality: f64,
    pub novelty: f64,
    pub initial_quality: f64,
    pub initial_novelty: f64,
    /// Revision counter k; the first revision uses k = 1.
    pub revision_count: u32,
    pub created_month: u32,
    pub rejection_count: u32,
    /// Reviewer ids of completed reviews, in completion order.
    pub review_log: Vec<u32>,
    state: ManuscriptState,
}

impl Manuscript {
    pub fn state(&self) -> ManuscriptState {
        self.state
    }

    /// Applies one lifecycle transition; anything outside the lifecycle
    /// graph (in particular anything out of a terminal state) is an error.
    pub fn transition(&mut self, next: ManuscriptState) -> Result<(), PopulationError> {
        if !self.state.allows(&next) {
            return Err(PopulationError::IllegalTransition {
                from: format!("{:?}", self.state),
                to: format!("{next:?}"),
            });
        }
        self.state = next;
        Ok(())
    }
}

/// Samples (t, q, n) from the author's three distributions.
pub fn draw_manuscript(
    author: &AgentProfile,
    id: u32,
    month: u32,
    rng: &mut RngStream,
) -> Manuscript {
    debug_assert_eq!(author.kind, AgentKind::Author);
    let topic = author.topic.sample(rng);
    let quality = author.quality.sample(rng);
    let novelty = author.novelty.sample(rng);
    Manuscript {
        id,
        author_id: author.id,
        topic,
        quality,
        novelty,
        initial_quality: quality,
        initial_novelty: novelty,
        revision_count: 0,
        created_month: month,
        rejection_count: 0,
        review_log: Vec::new(),
        state: ManuscriptState::Draft,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_population_counts() {
        let pop = Population::generate(&default_author_specs(), &default_journal_specs(), 42)
            .unwrap();
        assert_eq!(pop.authors.len(), 500);
        assert_eq!(pop.journals.len(), 50);
        let count = |agents: &[AgentProfile], a: Archetype| {
            agents.iter().filter(|p| p.archetype == a).count()
        };
        assert_eq!(count(&pop.authors, Archetype::Broad), 50);
        assert_eq!(count(&pop.authors, Archetype::Specialist), 150);
        assert_eq!(count(&pop.authors, Archetype::Normal), 300);
        assert_eq!(count(&pop.journals, Archetype::Broad), 5);
        assert_eq!(count(&pop.journals, Archetype::Specialist), 15);
        assert_eq!(count(&pop.journals, Archetype::Normal), 30);
        // ids dense from 0
        for (i, a) in pop.authors.iter().enumerate() {
            assert_eq!(a.id, i as u32);
        }
    }

    #[test]
    fn empty_specs_give_empty_population() {
        let mut rng = RngStream::from_seed(1);
        assert!(generate_authors(&[], &mut rng).unwrap().is_empty());
        let mut zeroed = default_journal_specs();
        for s in &mut zeroed {
            s.count = 0;
        }
        assert!(generate_journals(&zeroed, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn parameters_stay_inside_archetype_intervals() {
        // 100 seeded regenerations, 100% containment.
        let author_specs = default_author_specs();
        let journal_specs = default_journal_specs();
        for seed in 0..100u64 {
            let pop = Population::generate(&author_specs, &journal_specs, seed).unwrap();
            for (agents, specs) in [
                (&pop.authors, &author_specs),
                (&pop.journals, &journal_specs),
            ] {
                for agent in agents.iter() {
                    let spec = specs
                        .iter()
                        .find(|s| s.archetype == agent.archetype)
                        .unwrap();
                    assert!(spec.contains_profile(agent), "seed {seed} agent {agent:?}");
                }
            }
        }
    }

    #[test]
    fn one_of_each_archetype() {
        let mut specs = default_author_specs();
        for s in &mut specs {
            s.count = 1;
        }
        let mut rng = RngStream::from_seed(3);
        let agents = generate_authors(&specs, &mut rng).unwrap();
        assert_eq!(agents.len(), 3);
        for (agent, spec) in agents.iter().zip(&specs) {
            assert!(spec.contains_profile(agent));
        }
    }

    #[test]
    fn specialist_journal_topic_alpha_in_range() {
        let mut rng = RngStream::from_seed(17);
        let journals = generate_journals(&default_journal_specs(), &mut rng).unwrap();
        for j in journals.iter().filter(|j| j.archetype == Archetype::Specialist) {
            assert!((10.0..=100.0).contains(&j.topic.alpha()));
        }
    }

    #[test]
    fn invalid_interval_rejected() {
        let mut specs = default_author_specs();
        specs[0].alpha_topic = Interval { lo: 2.0, hi: 1.0 };
        let mut rng = RngStream::from_seed(1);
        assert!(generate_authors(&specs, &mut rng).is_err());
        assert!(Interval::new(0.0, 1.0).is_err());
    }

    fn uniform_journal() -> AgentProfile {
        let u = BetaParams::new(1.0, 1.0).unwrap();
        AgentProfile {
            id: 0,
            kind: AgentKind::Journal,
            archetype: Archetype::Normal,
            topic: u,
            quality: u,
            novelty: u,
        }
    }

    #[test]
    fn impact_of_all_uniform_journal() {
        // 0.5 * 0.5 / 0.2 = 1.25
        let got = journal_impact(&uniform_journal(), 0.1);
        assert!((got - 1.25).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn impact_with_sharp_quality_and_novelty() {
        let mut j = uniform_journal();
        j.quality = BetaParams::new(50.0, 5.0).unwrap();
        j.novelty = BetaParams::new(50.0, 5.0).unwrap();
        let want = (10.0 / 11.0_f64).powi(2) / 0.2;
        let got = journal_impact(&j, 0.1);
        assert!((got - want).abs() < 1e-9, "got {got} want {want}");
    }

    #[test]
    fn sharper_topic_lowers_impact() {
        let mut spread = uniform_journal();
        spread.topic = BetaParams::new(2.0, 2.0).unwrap();
        let mut sharp = uniform_journal();
        sharp.topic = BetaParams::new(80.0, 80.0).unwrap();
        assert!(journal_impact(&sharp, 0.1) < journal_impact(&spread, 0.1));
    }

    #[test]
    fn impact_symmetric_in_quality_and_novelty() {
        let mut a = uniform_journal();
        a.quality = BetaParams::new(50.0, 5.0).unwrap();
        a.novelty = BetaParams::new(3.0, 7.0).unwrap();
        let mut b = uniform_journal();
        b.quality = BetaParams::new(3.0, 7.0).unwrap();
        b.novelty = BetaParams::new(50.0, 5.0).unwrap();
        assert_eq!(
            journal_impact(&a, 0.1).to_bits(),
            journal_impact(&b, 0.1).to_bits()
        );
    }

    #[test]
    fn drawn_manuscript_fields() {
        let mut rng = RngStream::from_seed(2);
        let authors = generate_authors(&default_author_specs(), &mut rng).unwrap();
        let ms = draw_manuscript(&authors[0], 7, 3, &mut rng);
        assert_eq!(ms.revision_count, 0);
        assert_eq!(ms.rejection_count, 0);
        assert_eq!(ms.created_month, 3);
        assert_eq!(ms.state(), ManuscriptState::Draft);
        for v in [ms.topic, ms.quality, ms.novelty] {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn drawn_quality_mean_tracks_distribution() {
        let mut rng = RngStream::from_seed(5);
        let mut author = generate_authors(&default_author_specs(), &mut rng).unwrap()[0].clone();
        author.quality = BetaParams::new(50.0, 5.0).unwrap();
        let n = 10_000;
        let mean = (0..n)
            .map(|i| draw_manuscript(&author, i, 0, &mut rng).quality)
            .sum::<f64>()
            / n as f64;
        let want = 50.0 / 55.0;
        let var = 50.0 * 5.0 / (55.0_f64.powi(2) * 56.0);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - want).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn same_seed_same_manuscript() {
        let specs = default_author_specs();
        let mut r1 = RngStream::from_seed(9);
        let mut r2 = RngStream::from_seed(9);
        let a1 = generate_authors(&specs, &mut r1).unwrap();
        let a2 = generate_authors(&specs, &mut r2).unwrap();
        let m1 = draw_manuscript(&a1[13], 0, 0, &mut r1);
        let m2 = draw_manuscript(&a2[13], 0, 0, &mut r2);
        assert_eq!(m1, m2);
    }

    #[test]
    fn transitions_enforce_lifecycle() {
        let mut rng = RngStream::from_seed(4);
        let authors = generate_authors(&default_author_specs(), &mut rng).unwrap();
        let mut ms = draw_manuscript(&authors[0], 0, 0, &mut rng);
        assert!(ms
            .transition(ManuscriptState::Published {
                journal_id: 0,
                month: 1
            })
            .is_err());
        ms.transition(ManuscriptState::UnderReview).unwrap();
        ms.transition(ManuscriptState::Published {
            journal_id: 2,
            month: 9,
        })
        .unwrap();
        // terminal states are absorbing
        assert!(ms.transition(ManuscriptState::UnderReview).is_err());
        assert!(ms
            .transition(ManuscriptState::Abandoned { month: 10 })
            .is_err());
    }
}
