//! The editor-driven setting: authors submit to the journal maximizing
//! expected impact, three referees review over stochastic months, the
//! manuscript is revised and re-reviewed, the editor decides one month
//! after the re-review finishes, and rejected manuscripts climb down the
//! ladder until they run out of attempts.
//!
//! Monthly tick phases, in fixed order and ascending-id iteration:
//! 1. production: each author creates a manuscript with the configured
//!    probability;
//! 2. submission: month-old drafts and due resubmissions pick a target
//!    journal and get referees;
//! 3. completion: every pending review task assigned in an earlier month
//!    completes with the configured probability;
//! 4. revision: manuscripts whose first round just finished are revised
//!    and their re-review round is opened (or, with
//!    `instant_second_round`, resolved on the spot);
//! 5. decision: manuscripts whose re-review finished in an earlier month
//!    get the acceptance lottery, then re-enter the ladder or leave it.

use crate::config::SimConfig;
use crate::population::{draw_manuscript, AgentProfile, Manuscript, ManuscriptState, Population};
use crate::review::{
    acceptance_probability, acceptance_probability_with_topic_density, aggregate_estimates,
    review_estimate_with_delta, reviewer_error_delta, EditorEstimate, ReviewTask, Round,
};
use crate::stochastics::{window_density, RngStream};
use crate::{metrics, par};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CsError {
    #[error("need at least {needed} eligible reviewer candidates, found {eligible}")]
    NotEnoughReviewers { eligible: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// One pass of a manuscript through one journal.
#[derive(Debug, Clone)]
pub struct SubmissionRecord {
    pub journal_id: u32,
    pub submitted_month: u32,
    pub first_round: Vec<ReviewTask>,
    pub second_round: Vec<ReviewTask>,
    pub first_done_month: Option<u32>,
    pub second_done_month: Option<u32>,
    pub decision: Option<(Decision, u32)>,
}

impl SubmissionRecord {
    pub fn reviewer_ids(&self) -> Vec<u32> {
        self.first_round.iter().map(|t| t.reviewer_id).collect()
    }
}

/// A manuscript plus its ladder history. The reviewer pool and per-journal
/// topic densities depend only on the immutable topic draw, so they are
/// computed once at first submission and reused on every resubmission.
#[derive(Debug, Clone)]
pub struct CsManuscript {
    pub ms: Manuscript,
    pub submissions: Vec<SubmissionRecord>,
    pub next_submission_month: Option<u32>,
    reviewer_pool: Vec<u32>,
    topic_densities: Vec<f64>,
}

impl CsManuscript {
    fn new(ms: Manuscript) -> Self {
        Self {
            ms,
            submissions: Vec::new(),
            next_submission_month: None,
            reviewer_pool: Vec::new(),
            topic_densities: Vec::new(),
        }
    }

    /// The open submission, if the manuscript is under review somewhere.
    pub fn open_submission(&self) -> Option<&SubmissionRecord> {
        self.submissions.last().filter(|s| s.decision.is_none())
    }

    pub fn tried_journals(&self) -> Vec<u32> {
        self.submissions.iter().map(|s| s.journal_id).collect()
    }
}

/// Expected-impact score the author optimizes: acceptance probability for
/// the exact (t, q, n) triple times journal impact. Authors assess their
/// own manuscript perfectly.
pub fn journal_score(
    ms: &Manuscript,
    journal: &AgentProfile,
    impact: f64,
    halfwidth: f64,
) -> f64 {
    let exact = EditorEstimate {
        topic: ms.topic,
        quality: ms.quality,
        novelty: ms.novelty,
    };
    acceptance_probability(journal, &exact, halfwidth) * impact
}

/// Highest-scoring journal not yet tried; `None` means the author abandons
/// (attempts exhausted, or nothing left to try). Ties go to the lowest
/// journal id.
pub fn choose_target(
    ms: &Manuscript,
    journals: &[AgentProfile],
    impacts: &[f64],
    already_rejected: &[u32],
    max_rejections: u32,
    halfwidth: f64,
) -> Option<u32> {
    if ms.rejection_count >= max_rejections {
        return None;
    }
    let mut best: Option<(u32, f64)> = None;
    for (journal, &impact) in journals.iter().zip(impacts) {
        if already_rejected.contains(&journal.id) {
            continue;
        }
        let score = journal_score(ms, journal, impact, halfwidth);
        // strict > keeps the lowest id on ties
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((journal.id, score));
        }
    }
    best.map(|(id, _)| id)
}

/// The top-`top_pool` candidate referees for a manuscript, the most
/// familiar with its topic first: candidates are ranked by their window
/// density z at the manuscript's topic, so small-delta experts fill the
/// pool. The author is never a candidate; ties break toward the lower id.
pub fn reviewer_pool(
    ms: &Manuscript,
    authors: &[AgentProfile],
    top_pool: usize,
    halfwidth: f64,
) -> Vec<u32> {
    let scores = par::map(authors, |a| {
        if a.id == ms.author_id {
            f64::NEG_INFINITY
        } else {
            window_density(&a.topic, ms.topic, halfwidth).expect("topic in [0, 1]")
        }
    });
    let mut order: Vec<u32> = (0..authors.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        scores[b as usize]
            .total_cmp(&scores[a as usize])
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .filter(|&id| id != ms.author_id)
        .take(top_pool)
        .collect()
}

/// Samples `count` distinct referees uniformly from the top pool.
pub fn select_reviewers(
    ms: &Manuscript,
    authors: &[AgentProfile],
    top_pool: usize,
    count: usize,
    halfwidth: f64,
    rng: &mut RngStream,
) -> Result<Vec<u32>, CsError> {
    let pool = reviewer_pool(ms, authors, top_pool, halfwidth);
    sample_from_pool(&pool, count, rng)
}

fn sample_from_pool(pool: &[u32], count: usize, rng: &mut RngStream) -> Result<Vec<u32>, CsError> {
    if pool.len() < count {
        return Err(CsError::NotEnoughReviewers {
            eligible: pool.len(),
            needed: count,
        });
    }
    Ok(rng
        .sample_indices(pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect())
}

/// Acceptance lottery: accept iff u <= p(accept | journal, estimate).
pub fn editor_decision(
    journal: &AgentProfile,
    estimate: &EditorEstimate,
    halfwidth: f64,
    rng: &mut RngStream,
) -> Decision {
    let p = acceptance_probability(journal, estimate, halfwidth);
    if rng.chance(p) {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

/// Full state of one run of the editor-driven setting.
#[derive(Debug, Clone)]
pub struct CsState {
    pub month: u32,
    pub manuscripts: Vec<CsManuscript>,
    pub journal_impacts: Vec<f64>,
    rng: RngStream,
}

impl CsState {
    pub fn new(pop: &Population, cfg: &SimConfig, seed: u64) -> Self {
        Self {
            month: 0,
            manuscripts: Vec::new(),
            journal_impacts: pop.journal_impacts(cfg.window_halfwidth),
            rng: RngStream::from_seed(seed),
        }
    }

    /// Runs `cfg.months` ticks from scratch.
    pub fn run(pop: &Population, cfg: &SimConfig, seed: u64) -> Self {
        let mut state = Self::new(pop, cfg, seed);
        for _ in 0..cfg.months {
            state.tick(pop, cfg);
        }
        state
    }

    /// Advances one month.
    pub fn tick(&mut self, pop: &Population, cfg: &SimConfig) {
        let month = self.month;

        // 1. production
        for author in &pop.authors {
            if self.rng.chance(cfg.productivity) {
                let id = self.manuscripts.len() as u32;
                let ms = draw_manuscript(author, id, month, &mut self.rng);
                self.manuscripts.push(CsManuscript::new(ms));
            }
        }

        // 2. submission: month-old drafts and due resubmissions
        for i in 0..self.manuscripts.len() {
            let due = {
                let m = &self.manuscripts[i];
                match m.ms.state() {
                    ManuscriptState::Draft => m.ms.created_month + 1 == month,
                    ManuscriptState::UnderReview => m.next_submission_month == Some(month),
                    _ => false,
                }
            };
            if due {
                self.submit(i, pop, cfg);
            }
        }

        // 3. review completion
        self.complete_reviews(pop, cfg);

        // 4. revision of manuscripts whose first round finished this month
        self.open_second_rounds(cfg);

        // 5. decisions for re-reviews finished in an earlier month
        self.decide(pop, cfg);

        self.month = month + 1;
    }

    fn submit(&mut self, idx: usize, pop: &Population, cfg: &SimConfig) {
        let month = self.month;
        let m = &mut self.manuscripts[idx];
        if m.ms.state() == ManuscriptState::Draft {
            m.ms
                .transition(ManuscriptState::UnderReview)
                .expect("draft enters review");
            // Both caches are pure functions of the immutable topic.
            m.topic_densities = par::map(&pop.journals, |j| {
                window_density(&j.topic, m.ms.topic, cfg.window_halfwidth)
                    .expect("topic in [0, 1]")
            });
            m.reviewer_pool = reviewer_pool(
                &m.ms,
                &pop.authors,
                cfg.top_pool as usize,
                cfg.window_halfwidth,
            );
        }
        m.next_submission_month = None;

        let tried = m.tried_journals();
        let target = if m.ms.rejection_count >= cfg.max_rejections {
            None
        } else {
            let mut best: Option<(u32, f64)> = None;
            for (j, journal) in pop.journals.iter().enumerate() {
                if tried.contains(&journal.id) {
                    continue;
                }
                let exact = EditorEstimate {
                    topic: m.ms.topic,
                    quality: m.ms.quality,
                    novelty: m.ms.novelty,
                };
                let score = acceptance_probability_with_topic_density(
                    m.topic_densities[j],
                    &journal.quality,
                    &journal.novelty,
                    &exact,
                ) * self.journal_impacts[j];
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((journal.id, score));
                }
            }
            best.map(|(id, _)| id)
        };

        let Some(journal_id) = target else {
            m.ms
                .transition(ManuscriptState::Abandoned { month })
                .expect("review ladder can end in abandonment");
            return;
        };

        let reviewers = sample_from_pool(
            &m.reviewer_pool,
            cfg.reviewers_per_ms as usize,
            &mut self.rng,
        )
        .expect("population large enough by config validation");
        let first_round = reviewers
            .iter()
            .map(|&r| ReviewTask {
                reviewer_id: r,
                assigned_month: month,
                delta: reviewer_error_delta(&pop.authors[r as usize], m.ms.topic, cfg.window_halfwidth),
                completed_month: None,
                estimate: None,
            })
            .collect();
        m.submissions.push(SubmissionRecord {
            journal_id,
            submitted_month: month,
            first_round,
            second_round: Vec::new(),
            first_done_month: None,
            second_done_month: None,
            decision: None,
        });
    }

    fn complete_reviews(&mut self, _pop: &Population, cfg: &SimConfig) {
        let month = self.month;
        for m in &mut self.manuscripts {
            let CsManuscript {
                ms, submissions, ..
            } = m;
            let Some(sub) = submissions.last_mut().filter(|s| s.decision.is_none()) else {
                continue;
            };
            for task in &mut sub.first_round {
                if task.completed_month.is_none()
                    && task.assigned_month < month
                    && self.rng.chance(cfg.completion_prob)
                {
                    task.estimate = Some(review_estimate_with_delta(
                        task.reviewer_id,
                        ms,
                        task.delta,
                        Round::First,
                        &mut self.rng,
                    ));
                    task.completed_month = Some(month);
                    ms.review_log.push(task.reviewer_id);
                }
            }
            if sub.first_done_month.is_none()
                && sub.first_round.iter().all(|t| t.completed_month.is_some())
            {
                sub.first_done_month = Some(month);
            }
            for task in &mut sub.second_round {
                if task.completed_month.is_none()
                    && task.assigned_month < month
                    && self.rng.chance(cfg.completion_prob)
                {
                    task.estimate = Some(review_estimate_with_delta(
                        task.reviewer_id,
                        ms,
                        task.delta,
                        Round::PostRevision,
                        &mut self.rng,
                    ));
                    task.completed_month = Some(month);
                }
            }
            if !sub.second_round.is_empty()
                && sub.second_done_month.is_none()
                && sub.second_round.iter().all(|t| t.completed_month.is_some())
            {
                sub.second_done_month = Some(month);
            }
        }
    }

    fn open_second_rounds(&mut self, cfg: &SimConfig) {
        let month = self.month;
        for m in &mut self.manuscripts {
            let CsManuscript {
                ms, submissions, ..
            } = m;
            let Some(sub) = submissions.last_mut().filter(|s| s.decision.is_none()) else {
                continue;
            };
            if sub.first_done_month != Some(month) || !sub.second_round.is_empty() {
                continue;
            }
            crate::review::revise(ms, cfg.improvement_cap, &mut self.rng);
            sub.second_round = sub
                .first_round
                .iter()
                .map(|t| ReviewTask {
                    reviewer_id: t.reviewer_id,
                    assigned_month: month,
                    delta: t.delta,
                    completed_month: None,
                    estimate: None,
                })
                .collect();
            if cfg.instant_second_round {
                for task in &mut sub.second_round {
                    task.estimate = Some(review_estimate_with_delta(
                        task.reviewer_id,
                        ms,
                        task.delta,
                        Round::PostRevision,
                        &mut self.rng,
                    ));
                    task.completed_month = Some(month);
                }
                sub.second_done_month = Some(month);
            }
        }
    }

    fn decide(&mut self, pop: &Population, cfg: &SimConfig) {
        let month = self.month;
        for m in &mut self.manuscripts {
            let CsManuscript {
                ms,
                submissions,
                next_submission_month,
                ..
            } = m;
            let Some(sub) = submissions.last_mut().filter(|s| s.decision.is_none()) else {
                continue;
            };
            if !matches!(sub.second_done_month, Some(d) if d < month) {
                continue;
            }
            let estimates: Vec<_> = sub
                .second_round
                .iter()
                .map(|t| t.estimate.expect("round complete"))
                .collect();
            let editor = aggregate_estimates(&estimates, cfg.reviewers_per_ms as usize)
                .expect("exactly one estimate per reviewer");
            let journal = &pop.journals[sub.journal_id as usize];
            match editor_decision(journal, &editor, cfg.window_halfwidth, &mut self.rng) {
                Decision::Accept => {
                    sub.decision = Some((Decision::Accept, month));
                    ms.transition(ManuscriptState::Published {
                        journal_id: sub.journal_id,
                        month,
                    })
                    .expect("under review can publish");
                }
                Decision::Reject => {
                    sub.decision = Some((Decision::Reject, month));
                    ms.rejection_count += 1;
                    if ms.rejection_count >= cfg.max_rejections {
                        ms.transition(ManuscriptState::Abandoned { month })
                            .expect("under review can be abandoned");
                    } else {
                        *next_submission_month = Some(month + 1);
                    }
                }
            }
        }
    }

    pub fn outcomes(&self) -> Vec<metrics::ManuscriptOutcome> {
        self.manuscripts
            .iter()
            .map(|m| {
                let reviews_assigned = m
                    .submissions
                    .iter()
                    .map(|s| s.first_round.len() as u32)
                    .sum();
                let reviews_completed = m
                    .submissions
                    .iter()
                    .flat_map(|s| &s.first_round)
                    .filter(|t| t.completed_month.is_some())
                    .count() as u32;
                metrics::ManuscriptOutcome::from_manuscript(
                    &m.ms,
                    metrics::Setting::Cs,
                    reviews_assigned,
                    reviews_completed,
                    m.submissions.len() as u32,
                )
            })
            .collect()
    }
}
