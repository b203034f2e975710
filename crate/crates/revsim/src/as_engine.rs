//! The pool setting: a new manuscript enters a shared first pool and its
//! author owes the pool three reviews, payable from the following month.
//! Once a manuscript has three completed reviews it is revised, its
//! reviewers give instant second opinions, and it moves to the second pool;
//! the next month every journal runs the acceptance lottery on it and bids,
//! and the author picks the highest-impact bidder. No bids means the
//! manuscript is abandoned.
//!
//! Monthly tick phases, fixed order: production, pool submission (+review
//! debt), duty assignment by debt holders, review completion / revision /
//! ripening, bidding on the second pool, resolution. Manuscripts ripening
//! in month m become biddable in month m+1.

use crate::config::{DutyStrategy, SimConfig};
use crate::population::{draw_manuscript, Manuscript, ManuscriptState, Population};
use crate::review::{
    acceptance_probability, aggregate_estimates, review_estimate_with_delta,
    reviewer_error_delta, revise, ReviewEstimate, ReviewTask, Round,
};
use crate::stochastics::{window_density, RngStream};
use crate::{metrics, par};

/// Outstanding review obligation from one pool submission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReviewDebt {
    pub owed: u32,
    pub incurred_month: u32,
}

/// One journal's bid on one ripe manuscript.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bid {
    pub journal_id: u32,
    pub manuscript_id: u32,
    pub month: u32,
}

/// A manuscript plus its pool lifecycle.
#[derive(Debug, Clone)]
pub struct AsManuscript {
    pub ms: Manuscript,
    pub pool_entry_month: Option<u32>,
    /// Reviewer engagements, in pick order; never more than
    /// `reviewers_per_ms`.
    pub tasks: Vec<ReviewTask>,
    pub second_opinions: Vec<ReviewEstimate>,
    pub ripened_month: Option<u32>,
    pub bid_rounds_used: u32,
}

impl AsManuscript {
    fn new(ms: Manuscript) -> Self {
        Self {
            ms,
            pool_entry_month: None,
            tasks: Vec::new(),
            second_opinions: Vec::new(),
            ripened_month: None,
            bid_rounds_used: 0,
        }
    }
}

/// Full state of one run of the pool setting.
#[derive(Debug, Clone)]
pub struct AsState {
    pub month: u32,
    pub manuscripts: Vec<AsManuscript>,
    /// Manuscripts awaiting their three reviews, in pool-entry order.
    pub first_pool: Vec<u32>,
    /// Ripe manuscripts biddable this month.
    pub second_pool: Vec<u32>,
    /// Ripened this month; biddable from next month.
    staged_ripe: Vec<u32>,
    /// Per-author debt records, oldest first.
    pub debts: Vec<Vec<ReviewDebt>>,
    pub journal_impacts: Vec<f64>,
    /// Exact integer ledger: debt ever incurred and duties ever assigned.
    pub total_debt_incurred: u64,
    pub total_duties_assigned: u64,
    /// Bidding rounds a ripe manuscript gets before abandonment.
    bid_round_budget: u32,
    rng: RngStream,
}

impl AsState {
    pub fn new(pop: &Population, cfg: &SimConfig, seed: u64) -> Self {
        Self {
            month: 0,
            manuscripts: Vec::new(),
            first_pool: Vec::new(),
            second_pool: Vec::new(),
            staged_ripe: Vec::new(),
            debts: vec![Vec::new(); pop.authors.len()],
            journal_impacts: pop.journal_impacts(cfg.window_halfwidth),
            total_debt_incurred: 0,
            total_duties_assigned: 0,
            bid_round_budget: cfg.as_bid_rounds,
            rng: RngStream::from_seed(seed),
        }
    }

    pub fn run(pop: &Population, cfg: &SimConfig, seed: u64) -> Self {
        let mut state = Self::new(pop, cfg, seed);
        for _ in 0..cfg.months {
            state.tick(pop, cfg);
        }
        state
    }

    /// Outstanding debt an author can act on this month (incurred earlier).
    fn actionable_debt(&self, author_id: u32) -> u32 {
        self.debts[author_id as usize]
            .iter()
            .filter(|d| d.incurred_month < self.month)
            .map(|d| d.owed)
            .sum()
    }

    /// Total outstanding debt across all authors.
    pub fn outstanding_debt(&self) -> u64 {
        self.debts
            .iter()
            .flatten()
            .map(|d| u64::from(d.owed))
            .sum()
    }

    /// Advances one month.
    pub fn tick(&mut self, pop: &Population, cfg: &SimConfig) {
        let month = self.month;

        // 1. production
        for author in &pop.authors {
            if self.rng.chance(cfg.productivity) {
                let id = self.manuscripts.len() as u32;
                let ms = draw_manuscript(author, id, month, &mut self.rng);
                self.manuscripts.push(AsManuscript::new(ms));
            }
        }

        // 2. month-old drafts enter the first pool
        for i in 0..self.manuscripts.len() {
            let due = {
                let m = &self.manuscripts[i];
                m.ms.state() == ManuscriptState::Draft && m.ms.created_month + 1 == month
            };
            if due {
                self.submit_to_pool(i as u32, cfg);
            }
        }

        // 3. debt holders pick review duties
        for author_id in 0..pop.authors.len() as u32 {
            self.assign_review_duties(author_id, pop, cfg);
        }

        // 4. review completion, revision, ripening
        self.process_pool_reviews(pop, cfg);

        // 5./6. bidding and resolution on the current second pool
        let bids = self.run_bidding_round(pop, cfg);
        self.resolve_bids(&bids);

        // manuscripts ripened this month become biddable next month
        let staged = std::mem::take(&mut self.staged_ripe);
        self.second_pool.extend(staged);
        self.month = month + 1;
    }

    /// Moves a draft into the first pool and books the author's debt.
    pub fn submit_to_pool(&mut self, ms_id: u32, cfg: &SimConfig) {
        let month = self.month;
        let m = &mut self.manuscripts[ms_id as usize];
        m.ms
            .transition(ManuscriptState::InFirstPool)
            .expect("draft enters the pool");
        m.pool_entry_month = Some(month);
        self.first_pool.push(ms_id);
        self.debts[m.ms.author_id as usize].push(ReviewDebt {
            owed: cfg.reviewers_per_ms,
            incurred_month: month,
        });
        self.total_debt_incurred += u64::from(cfg.reviewers_per_ms);
    }

    /// One author settles as much actionable debt as the pool allows.
    /// Eligible manuscripts: not their own, not already picked by them,
    /// fewer than `reviewers_per_ms` reviewers. Under the expertise
    /// strategy the author takes the manuscripts they are most familiar
    /// with (highest window density at the manuscript topic, mirroring how
    /// journals pick referees); ties go to the oldest pool entry, then the
    /// lowest id.
    pub fn assign_review_duties(&mut self, author_id: u32, pop: &Population, cfg: &SimConfig) {
        let month = self.month;
        let owed = self.actionable_debt(author_id);
        if owed == 0 {
            return;
        }
        let eligible: Vec<u32> = self
            .first_pool
            .iter()
            .copied()
            .filter(|&id| {
                let m = &self.manuscripts[id as usize];
                m.ms.author_id != author_id
                    && m.tasks.len() < cfg.reviewers_per_ms as usize
                    && !m.tasks.iter().any(|t| t.reviewer_id == author_id)
            })
            .collect();
        if eligible.is_empty() {
            return;
        }
        let take = (owed as usize).min(eligible.len());
        let picks: Vec<u32> = match cfg.as_duty_strategy {
            DutyStrategy::Expertise => {
                let author = &pop.authors[author_id as usize];
                let scores = par::map(&eligible, |&id| {
                    let m = &self.manuscripts[id as usize];
                    window_density(&author.topic, m.ms.topic, cfg.window_halfwidth)
                        .expect("topic in [0, 1]")
                });
                let mut order: Vec<usize> = (0..eligible.len()).collect();
                order.sort_unstable_by(|&a, &b| {
                    let ma = &self.manuscripts[eligible[a] as usize];
                    let mb = &self.manuscripts[eligible[b] as usize];
                    scores[b]
                        .total_cmp(&scores[a])
                        .then(ma.pool_entry_month.cmp(&mb.pool_entry_month))
                        .then(eligible[a].cmp(&eligible[b]))
                });
                order.into_iter().take(take).map(|i| eligible[i]).collect()
            }
            DutyStrategy::Random => self
                .rng
                .sample_indices(eligible.len(), take)
                .into_iter()
                .map(|i| eligible[i])
                .collect(),
        };
        let author = &pop.authors[author_id as usize];
        for ms_id in picks {
            let m = &mut self.manuscripts[ms_id as usize];
            m.tasks.push(ReviewTask {
                reviewer_id: author_id,
                assigned_month: month,
                delta: reviewer_error_delta(author, m.ms.topic, cfg.window_halfwidth),
                completed_month: None,
                estimate: None,
            });
            self.total_duties_assigned += 1;
        }
        // settle oldest actionable debt first
        let mut settled = take as u32;
        for debt in self.debts[author_id as usize]
            .iter_mut()
            .filter(|d| d.incurred_month < month)
        {
            let eat = settled.min(debt.owed);
            debt.owed -= eat;
            settled -= eat;
            if settled == 0 {
                break;
            }
        }
        self.debts[author_id as usize].retain(|d| d.owed > 0);
    }

    /// Pending reviews complete stochastically; a manuscript reaching its
    /// full review count is revised, gets instant second opinions, and
    /// ripens out of the first pool.
    pub fn process_pool_reviews(&mut self, _pop: &Population, cfg: &SimConfig) {
        let month = self.month;
        let mut ripened: Vec<u32> = Vec::new();
        for &id in &self.first_pool {
            let m = &mut self.manuscripts[id as usize];
            for task in &mut m.tasks {
                if task.completed_month.is_none()
                    && task.assigned_month < month
                    && self.rng.chance(cfg.completion_prob)
                {
                    task.estimate = Some(review_estimate_with_delta(
                        task.reviewer_id,
                        &m.ms,
                        task.delta,
                        Round::First,
                        &mut self.rng,
                    ));
                    task.completed_month = Some(month);
                    m.ms.review_log.push(task.reviewer_id);
                }
            }
            let complete = m.tasks.len() == cfg.reviewers_per_ms as usize
                && m.tasks.iter().all(|t| t.completed_month.is_some());
            if complete && m.ripened_month.is_none() {
                revise(&mut m.ms, cfg.improvement_cap, &mut self.rng);
                for task in &m.tasks {
                    m.second_opinions.push(review_estimate_with_delta(
                        task.reviewer_id,
                        &m.ms,
                        task.delta,
                        Round::PostRevision,
                        &mut self.rng,
                    ));
                }
                m.ripened_month = Some(month);
                m.ms
                    .transition(ManuscriptState::InSecondPool)
                    .expect("reviewed manuscript ripens");
                ripened.push(id);
            }
        }
        if !ripened.is_empty() {
            self.first_pool.retain(|id| !ripened.contains(id));
            self.staged_ripe.extend(ripened);
        }
    }

    /// Every journal runs the acceptance lottery on every manuscript in the
    /// second pool and bids on success. Journals evaluate independently;
    /// the acceptance probabilities are pure, so they are computed up front
    /// and only the lottery draws stay sequential.
    pub fn run_bidding_round(&mut self, pop: &Population, cfg: &SimConfig) -> Vec<Bid> {
        let month = self.month;
        let mut bids = Vec::new();
        for &ms_id in &self.second_pool {
            let m = &self.manuscripts[ms_id as usize];
            let editor = aggregate_estimates(&m.second_opinions, cfg.reviewers_per_ms as usize)
                .expect("ripe manuscripts carry a full second round");
            let probs = par::map(&pop.journals, |j| {
                acceptance_probability(j, &editor, cfg.window_halfwidth)
            });
            for (j, &p) in probs.iter().enumerate() {
                if self.rng.chance(p) {
                    bids.push(Bid {
                        journal_id: j as u32,
                        manuscript_id: ms_id,
                        month,
                    });
                }
            }
        }
        bids
    }

    /// Publishes each bid-on manuscript in its highest-impact bidder (ties:
    /// lowest journal id); manuscripts out of bidding rounds are abandoned.
    /// The second pool drains except for zero-bid manuscripts that still
    /// have retry rounds left (non-default configuration).
    pub fn resolve_bids(&mut self, bids: &[Bid]) {
        let month = self.month;
        let as_bid_rounds = self.bid_round_budget;
        let mut remaining = Vec::new();
        for &ms_id in &self.second_pool.clone() {
            let winner = bids
                .iter()
                .filter(|b| b.manuscript_id == ms_id)
                .max_by(|a, b| {
                    self.journal_impacts[a.journal_id as usize]
                        .total_cmp(&self.journal_impacts[b.journal_id as usize])
                        .then(b.journal_id.cmp(&a.journal_id))
                })
                .map(|b| b.journal_id);
            let m = &mut self.manuscripts[ms_id as usize];
            m.bid_rounds_used += 1;
            match winner {
                Some(journal_id) => {
                    m.ms
                        .transition(ManuscriptState::Published { journal_id, month })
                        .expect("ripe manuscript publishes");
                }
                None if m.bid_rounds_used >= as_bid_rounds => {
                    m.ms
                        .transition(ManuscriptState::Abandoned { month })
                        .expect("ripe manuscript can be abandoned");
                }
                None => remaining.push(ms_id),
            }
        }
        self.second_pool = remaining;
    }

    pub fn outcomes(&self) -> Vec<metrics::ManuscriptOutcome> {
        self.manuscripts
            .iter()
            .map(|m| {
                let completed = m
                    .tasks
                    .iter()
                    .filter(|t| t.completed_month.is_some())
                    .count() as u32;
                metrics::ManuscriptOutcome::from_manuscript(
                    &m.ms,
                    metrics::Setting::As,
                    m.tasks.len() as u32,
                    completed,
                    u32::from(m.pool_entry_month.is_some()),
                )
            })
            .collect()
    }

    /// Age statistics of the manuscripts still waiting in the first pool.
    pub fn first_pool_stats(&self) -> metrics::FirstPoolStats {
        let ages: Vec<u32> = self
            .first_pool
            .iter()
            .map(|&id| {
                let entry = self.manuscripts[id as usize]
                    .pool_entry_month
                    .expect("pooled manuscripts have an entry month");
                self.month - entry
            })
            .collect();
        metrics::FirstPoolStats {
            remaining: ages.len() as u32,
            mean_age_months: if ages.is_empty() {
                None
            } else {
                Some(ages.iter().map(|&a| f64::from(a)).sum::<f64>() / ages.len() as f64)
            },
        }
    }
}
