//! Review mechanics shared by both settings: referee noise, editor
//! aggregation, revision improvement, and the acceptance probability.

use crate::population::{AgentKind, AgentProfile, Manuscript};
use crate::stochastics::{window_density, BetaParams, RngStream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReviewError {
    #[error("editor aggregation needs exactly {expected} estimates, got {got}")]
    WrongEstimateCount { got: usize, expected: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Round {
    First,
    PostRevision,
}

/// One referee's noisy reading of a manuscript.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReviewEstimate {
    pub reviewer_id: u32,
    pub topic: f64,
    pub quality: f64,
    pub novelty: f64,
    pub round: Round,
}

/// Component-wise mean of the referee estimates of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditorEstimate {
    pub topic: f64,
    pub quality: f64,
    pub novelty: f64,
}

/// One reviewer's pending or finished engagement with a manuscript. A task
/// assigned in month m makes its first completion attempt in month m+1.
/// The noise half-width depends only on the reviewer and the manuscript's
/// immutable topic, so it is computed once at assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReviewTask {
    pub reviewer_id: u32,
    pub assigned_month: u32,
    pub delta: f64,
    pub completed_month: Option<u32>,
    pub estimate: Option<ReviewEstimate>,
}

/// Half-width of the referee's uniform error: (1 - z) / 2, where z is the
/// reviewer's window density at the manuscript's true topic. A reviewer
/// fully at home on the topic (z -> 1) reads the manuscript exactly.
pub fn reviewer_error_delta(reviewer: &AgentProfile, topic: f64, halfwidth: f64) -> f64 {
    debug_assert_eq!(reviewer.kind, AgentKind::Author);
    let z = window_density(&reviewer.topic, topic, halfwidth).expect("topic is in [0, 1]");
    (1.0 - z) / 2.0
}

fn noisy(truth: f64, delta: f64, rng: &mut RngStream) -> f64 {
    let lo = (truth - delta).max(0.0);
    let hi = (truth + delta).min(1.0);
    rng.uniform(lo, hi)
}

/// Draws the three components independently from the clipped delta-interval
/// around the true values. `delta` comes from [`reviewer_error_delta`] for
/// the reviewer; both rounds use the same delta.
pub fn review_estimate_with_delta(
    reviewer_id: u32,
    ms: &Manuscript,
    delta: f64,
    round: Round,
    rng: &mut RngStream,
) -> ReviewEstimate {
    debug_assert_ne!(reviewer_id, ms.author_id, "authors never review themselves");
    ReviewEstimate {
        reviewer_id,
        topic: noisy(ms.topic, delta, rng),
        quality: noisy(ms.quality, delta, rng),
        novelty: noisy(ms.novelty, delta, rng),
        round,
    }
}

pub fn review_estimate(
    reviewer: &AgentProfile,
    ms: &Manuscript,
    round: Round,
    halfwidth: f64,
    rng: &mut RngStream,
) -> ReviewEstimate {
    let delta = reviewer_error_delta(reviewer, ms.topic, halfwidth);
    review_estimate_with_delta(reviewer.id, ms, delta, round, rng)
}

/// Component-wise arithmetic mean; errors unless exactly `expected`
/// estimates are supplied. All estimates must share one round.
pub fn aggregate_estimates(
    reviews: &[ReviewEstimate],
    expected: usize,
) -> Result<EditorEstimate, ReviewError> {
    if reviews.len() != expected {
        return Err(ReviewError::WrongEstimateCount {
            got: reviews.len(),
            expected,
        });
    }
    debug_assert!(reviews.windows(2).all(|w| w[0].round == w[1].round));
    let n = reviews.len() as f64;
    Ok(EditorEstimate {
        topic: reviews.iter().map(|r| r.topic).sum::<f64>() / n,
        quality: reviews.iter().map(|r| r.quality).sum::<f64>() / n,
        novelty: reviews.iter().map(|r| r.novelty).sum::<f64>() / n,
    })
}

/// Bounded stochastic improvement a + (cap/k)(1-a)U[0,1]; gains shrink with
/// the revision counter k.
fn improve(value: f64, cap: f64, k: u32, rng: &mut RngStream) -> f64 {
    (value + (cap / k as f64) * (1.0 - value) * rng.u01()).min(1.0)
}

/// One revision round: increments k, then improves quality and novelty
/// (in that order) with independent draws. Neither value ever decreases.
pub fn revise(ms: &mut Manuscript, improvement_cap: f64, rng: &mut RngStream) {
    debug_assert!(!ms.state().is_terminal());
    ms.revision_count += 1;
    ms.quality = improve(ms.quality, improvement_cap, ms.revision_count, rng);
    ms.novelty = improve(ms.novelty, improvement_cap, ms.revision_count, rng);
}

/// p(accept) = z(T, t_e) * F_Q(q_e) * F_N(n_e) for the journal's three
/// distributions; each factor is in [0, 1].
pub fn acceptance_probability(
    journal: &AgentProfile,
    estimate: &EditorEstimate,
    halfwidth: f64,
) -> f64 {
    debug_assert_eq!(journal.kind, AgentKind::Journal);
    let z = window_density(&journal.topic, estimate.topic, halfwidth).expect("topic in [0, 1]");
    acceptance_probability_with_topic_density(z, &journal.quality, &journal.novelty, estimate)
}

/// Same as [`acceptance_probability`] with the topic window density already
/// evaluated; the engines cache z per (manuscript, journal) because the
/// topic never changes.
pub fn acceptance_probability_with_topic_density(
    topic_density: f64,
    quality: &BetaParams,
    novelty: &BetaParams,
    estimate: &EditorEstimate,
) -> f64 {
    topic_density
        * quality.cdf(estimate.quality).expect("quality in [0, 1]")
        * novelty.cdf(estimate.novelty).expect("novelty in [0, 1]")
}
