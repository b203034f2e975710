//! Aggregates over finished runs and the paired CS-vs-AS comparison.

use serde::{Deserialize, Serialize};

use crate::population::{Manuscript, ManuscriptState, Population};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("summaries come from different populations and cannot be paired")]
    PopulationMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Cs,
    As,
}

impl Setting {
    pub fn label(&self) -> &'static str {
        match self {
            Setting::Cs => "cs",
            Setting::As => "as",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Published { journal_id: u32, month: u32 },
    Abandoned { month: u32 },
    InFlight,
}

/// Flat per-manuscript record; the source for every aggregate and for the
/// manuscripts CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManuscriptOutcome {
    pub id: u32,
    pub author_id: u32,
    pub setting: Setting,
    pub topic: f64,
    pub initial_quality: f64,
    pub initial_novelty: f64,
    pub final_quality: f64,
    pub final_novelty: f64,
    pub revision_count: u32,
    pub created_month: u32,
    pub outcome: Outcome,
    pub reviews_assigned: u32,
    pub reviews_completed: u32,
    pub rejections: u32,
    pub submissions: u32,
}

impl ManuscriptOutcome {
    pub fn from_manuscript(
        ms: &Manuscript,
        setting: Setting,
        reviews_assigned: u32,
        reviews_completed: u32,
        submissions: u32,
    ) -> Self {
        let outcome = match ms.state() {
            ManuscriptState::Published { journal_id, month } => Outcome::Published {
                journal_id,
                month,
            },
            ManuscriptState::Abandoned { month } => Outcome::Abandoned { month },
            _ => Outcome::InFlight,
        };
        Self {
            id: ms.id,
            author_id: ms.author_id,
            setting,
            topic: ms.topic,
            initial_quality: ms.initial_quality,
            initial_novelty: ms.initial_novelty,
            final_quality: ms.quality,
            final_novelty: ms.novelty,
            revision_count: ms.revision_count,
            created_month: ms.created_month,
            outcome,
            reviews_assigned,
            reviews_completed,
            rejections: ms.rejection_count,
            submissions,
        }
    }

    /// Scalar merit: final quality times final novelty.
    pub fn merit(&self) -> f64 {
        self.final_quality * self.final_novelty
    }

    pub fn months_to_publication(&self) -> Option<u32> {
        match self.outcome {
            Outcome::Published { month, .. } => Some(month - self.created_month),
            _ => None,
        }
    }
}

/// Merit of a live manuscript (current q times n).
pub fn manuscript_merit(ms: &Manuscript) -> f64 {
    ms.quality * ms.novelty
}

/// Nearest-rank percentile: the smallest element with at least `p` of the
/// sorted data at or below it. `p` in (0, 1].
pub fn nearest_rank<T: Copy>(sorted: &[T], p: f64) -> T {
    debug_assert!(!sorted.is_empty());
    debug_assert!(p > 0.0 && p <= 1.0);
    let rank = ((p * sorted.len() as f64).ceil() as usize).max(1);
    sorted[rank - 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeStats {
    pub mean: f64,
    pub q1: u32,
    pub median: u32,
    pub q3: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorStats {
    pub author_id: u32,
    pub publications: u32,
    pub total_impact: f64,
    pub mean_impact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalStats {
    pub journal_id: u32,
    pub impact: f64,
    /// Impact quartile over the journal population, 1 = bottom, 4 = top.
    pub quartile: u8,
    pub publications: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstPoolStats {
    pub remaining: u32,
    pub mean_age_months: Option<f64>,
}

/// Everything one run reports.
///
/// Publication fractions come in two conventions: `_resolved` divides by
/// published + abandoned (manuscripts still in flight at the horizon are
/// excluded), `_all` divides by everything ever created. Review and
/// submission means use the resolved set so the 1-review-round-per-
/// submission ledger identity is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub setting: Setting,
    pub months: u32,
    pub manuscripts_total: u32,
    pub published: u32,
    pub abandoned: u32,
    pub in_flight: u32,
    pub publication_fraction_resolved: f64,
    pub publication_fraction_all: f64,
    pub submissions_total: u32,
    pub reviews_assigned_total: u32,
    pub reviews_completed_total: u32,
    pub reviews_mean_per_resolved: f64,
    pub submissions_mean_per_resolved: f64,
    pub reviews_mean_per_published: f64,
    /// Completed reviews per fully reviewed manuscript; in the pool setting
    /// this is exactly the review quota.
    pub reviews_per_fully_reviewed: Option<f64>,
    pub months_to_publication: Option<TimeStats>,
    pub merit_published_mean: Option<f64>,
    pub merit_abandoned_mean: Option<f64>,
    pub per_author: Vec<AuthorStats>,
    pub per_journal: Vec<JournalStats>,
    pub first_pool: Option<FirstPoolStats>,
    pub outstanding_debt: Option<u64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Quartile bucket of `impact` against the population thresholds
/// (nearest-rank 25th/50th/75th percentiles).
fn quartile(impact: f64, p25: f64, p50: f64, p75: f64) -> u8 {
    if impact <= p25 {
        1
    } else if impact <= p50 {
        2
    } else if impact <= p75 {
        3
    } else {
        4
    }
}

/// Optional extras only the pool setting produces.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunExtras {
    pub first_pool: Option<FirstPoolStats>,
    pub outstanding_debt: Option<u64>,
}

pub fn summarize_run(
    setting: Setting,
    months: u32,
    outcomes: &[ManuscriptOutcome],
    pop: &Population,
    journal_impacts: &[f64],
    extras: RunExtras,
) -> RunSummary {
    let total = outcomes.len() as u32;
    let published_set: Vec<&ManuscriptOutcome> = outcomes
        .iter()
        .filter(|o| matches!(o.outcome, Outcome::Published { .. }))
        .collect();
    let abandoned_set: Vec<&ManuscriptOutcome> = outcomes
        .iter()
        .filter(|o| matches!(o.outcome, Outcome::Abandoned { .. }))
        .collect();
    let published = published_set.len() as u32;
    let abandoned = abandoned_set.len() as u32;
    let resolved = published + abandoned;
    let in_flight = total - resolved;

    let resolved_reviews: u32 = outcomes
        .iter()
        .filter(|o| !matches!(o.outcome, Outcome::InFlight))
        .map(|o| o.reviews_assigned)
        .sum();
    let resolved_submissions: u32 = outcomes
        .iter()
        .filter(|o| !matches!(o.outcome, Outcome::InFlight))
        .map(|o| o.submissions)
        .sum();
    let published_reviews: u32 = published_set.iter().map(|o| o.reviews_assigned).sum();

    let fully_reviewed: Vec<&ManuscriptOutcome> = outcomes
        .iter()
        .filter(|o| o.revision_count >= 1)
        .collect();
    let reviews_per_fully_reviewed = (!fully_reviewed.is_empty()).then(|| {
        fully_reviewed
            .iter()
            .map(|o| f64::from(o.reviews_completed))
            .sum::<f64>()
            / fully_reviewed.len() as f64
    });

    let mut durations: Vec<u32> = published_set
        .iter()
        .filter_map(|o| o.months_to_publication())
        .collect();
    durations.sort_unstable();
    let months_to_publication = (!durations.is_empty()).then(|| TimeStats {
        mean: durations.iter().map(|&d| f64::from(d)).sum::<f64>() / durations.len() as f64,
        q1: nearest_rank(&durations, 0.25),
        median: nearest_rank(&durations, 0.50),
        q3: nearest_rank(&durations, 0.75),
    });

    let mut per_author: Vec<AuthorStats> = pop
        .authors
        .iter()
        .map(|a| AuthorStats {
            author_id: a.id,
            publications: 0,
            total_impact: 0.0,
            mean_impact: None,
        })
        .collect();
    let mut per_journal: Vec<JournalStats> = {
        let mut sorted = journal_impacts.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let (p25, p50, p75) = if sorted.is_empty() {
            (0.0, 0.0, 0.0)
        } else {
            (
                nearest_rank(&sorted, 0.25),
                nearest_rank(&sorted, 0.50),
                nearest_rank(&sorted, 0.75),
            )
        };
        pop.journals
            .iter()
            .zip(journal_impacts)
            .map(|(j, &impact)| JournalStats {
                journal_id: j.id,
                impact,
                quartile: quartile(impact, p25, p50, p75),
                publications: 0,
            })
            .collect()
    };
    for o in &published_set {
        if let Outcome::Published { journal_id, .. } = o.outcome {
            let a = &mut per_author[o.author_id as usize];
            a.publications += 1;
            a.total_impact += journal_impacts[journal_id as usize];
            per_journal[journal_id as usize].publications += 1;
        }
    }
    for a in &mut per_author {
        if a.publications > 0 {
            a.mean_impact = Some(a.total_impact / f64::from(a.publications));
        }
    }

    RunSummary {
        setting,
        months,
        manuscripts_total: total,
        published,
        abandoned,
        in_flight,
        publication_fraction_resolved: if resolved > 0 {
            f64::from(published) / f64::from(resolved)
        } else {
            0.0
        },
        publication_fraction_all: if total > 0 {
            f64::from(published) / f64::from(total)
        } else {
            0.0
        },
        submissions_total: outcomes.iter().map(|o| o.submissions).sum(),
        reviews_assigned_total: outcomes.iter().map(|o| o.reviews_assigned).sum(),
        reviews_completed_total: outcomes.iter().map(|o| o.reviews_completed).sum(),
        reviews_mean_per_resolved: if resolved > 0 {
            f64::from(resolved_reviews) / f64::from(resolved)
        } else {
            0.0
        },
        submissions_mean_per_resolved: if resolved > 0 {
            f64::from(resolved_submissions) / f64::from(resolved)
        } else {
            0.0
        },
        reviews_mean_per_published: if published > 0 {
            f64::from(published_reviews) / f64::from(published)
        } else {
            0.0
        },
        reviews_per_fully_reviewed,
        months_to_publication,
        merit_published_mean: mean(published_set.iter().map(|o| o.merit())),
        merit_abandoned_mean: mean(abandoned_set.iter().map(|o| o.merit())),
        per_author,
        per_journal,
        first_pool: extras.first_pool,
        outstanding_debt: extras.outstanding_debt,
    }
}

/// Paired author/journal deltas between the two settings on one shared
/// population. All fractions count strict improvement in the pool setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub authors_total: u32,
    pub authors_more_publications_in_as: f64,
    pub authors_higher_total_impact_in_as: f64,
    pub authors_higher_mean_impact_in_as: f64,
    pub journals_total: u32,
    pub journals_more_publications_in_as: f64,
    /// Mean publication delta (AS minus CS) per journal impact quartile,
    /// index 0 = bottom quartile.
    pub journal_quartile_publication_delta: [f64; 4],
}

pub fn compare_runs(cs: &RunSummary, as_: &RunSummary) -> Result<ComparisonReport, MetricsError> {
    let same_authors = cs.per_author.len() == as_.per_author.len()
        && cs
            .per_author
            .iter()
            .zip(&as_.per_author)
            .all(|(a, b)| a.author_id == b.author_id);
    let same_journals = cs.per_journal.len() == as_.per_journal.len()
        && cs
            .per_journal
            .iter()
            .zip(&as_.per_journal)
            .all(|(a, b)| a.journal_id == b.journal_id && a.impact.to_bits() == b.impact.to_bits());
    if !same_authors || !same_journals {
        return Err(MetricsError::PopulationMismatch);
    }

    let n_authors = cs.per_author.len();
    let frac = |count: usize, total: usize| {
        if total > 0 {
            count as f64 / total as f64
        } else {
            0.0
        }
    };
    let more_pubs = cs
        .per_author
        .iter()
        .zip(&as_.per_author)
        .filter(|(c, a)| a.publications > c.publications)
        .count();
    let more_total_impact = cs
        .per_author
        .iter()
        .zip(&as_.per_author)
        .filter(|(c, a)| a.total_impact > c.total_impact)
        .count();
    // authors without publications contribute a mean of zero
    let more_mean_impact = cs
        .per_author
        .iter()
        .zip(&as_.per_author)
        .filter(|(c, a)| a.mean_impact.unwrap_or(0.0) > c.mean_impact.unwrap_or(0.0))
        .count();

    let n_journals = cs.per_journal.len();
    let journals_more = cs
        .per_journal
        .iter()
        .zip(&as_.per_journal)
        .filter(|(c, a)| a.publications > c.publications)
        .count();
    let mut delta_sum = [0.0f64; 4];
    let mut delta_n = [0u32; 4];
    for (c, a) in cs.per_journal.iter().zip(&as_.per_journal) {
        let q = (c.quartile - 1) as usize;
        delta_sum[q] += f64::from(a.publications) - f64::from(c.publications);
        delta_n[q] += 1;
    }
    let mut journal_quartile_publication_delta = [0.0f64; 4];
    for q in 0..4 {
        if delta_n[q] > 0 {
            journal_quartile_publication_delta[q] = delta_sum[q] / f64::from(delta_n[q]);
        }
    }

    Ok(ComparisonReport {
        authors_total: n_authors as u32,
        authors_more_publications_in_as: frac(more_pubs, n_authors),
        authors_higher_total_impact_in_as: frac(more_total_impact, n_authors),
        authors_higher_mean_impact_in_as: frac(more_mean_impact, n_authors),
        journals_total: n_journals as u32,
        journals_more_publications_in_as: frac(journals_more, n_journals),
        journal_quartile_publication_delta,
    })
}
