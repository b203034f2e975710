//! Shared helpers for the integration suites: an independent quadrature
//! oracle for the beta CDF and invariant checkers over finished engine
//! states.

use revsim::as_engine::AsState;
use revsim::cs_engine::CsState;
use revsim::population::ManuscriptState;
use revsim::SimConfig;

/// Adaptive Simpson quadrature with Richardson refinement. Deliberately
/// independent of the library's continued-fraction CDF: this is the oracle
/// the kernel is judged against.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        m: f64,
        b: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let left = simpson(f, a, lm, m);
        let right = simpson(f, m, rm, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, lm, m, left, eps / 2.0, depth - 1)
                + recurse(f, m, rm, b, right, eps / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    recurse(f, a, m, b, simpson(f, a, m, b), eps, 40)
}

/// Spread of shape pairs covering the archetype parameter ranges.
pub fn oracle_parameter_pairs() -> Vec<(f64, f64)> {
    vec![
        (1.0, 1.0),
        (1.0, 5.0),
        (5.0, 1.0),
        (2.0, 2.0),
        (2.0, 8.0),
        (8.0, 2.0),
        (1.5, 9.5),
        (9.5, 1.5),
        (3.0, 7.0),
        (7.0, 3.0),
        (10.0, 10.0),
        (1.0, 10.0),
        (10.0, 1.0),
        (20.0, 80.0),
        (80.0, 20.0),
        (50.0, 5.0),
        (5.0, 50.0),
        (60.0, 60.0),
        (100.0, 100.0),
        (47.3, 8.1),
    ]
}

/// Checks every ladder invariant over a finished editor-driven run;
/// returns human-readable violations.
pub fn check_cs_invariants(state: &CsState, cfg: &SimConfig) -> Vec<String> {
    let mut violations = Vec::new();
    let mut push = |cond: bool, msg: String| {
        if !cond {
            violations.push(msg);
        }
    };
    for m in &state.manuscripts {
        let id = m.ms.id;
        push(
            m.ms.quality >= m.ms.initial_quality && m.ms.quality <= 1.0,
            format!("cs ms {id}: quality decreased or left [0,1]"),
        );
        push(
            m.ms.novelty >= m.ms.initial_novelty && m.ms.novelty <= 1.0,
            format!("cs ms {id}: novelty decreased or left [0,1]"),
        );
        let tried = m.tried_journals();
        let distinct: std::collections::HashSet<u32> = tried.iter().copied().collect();
        push(
            tried.len() == distinct.len(),
            format!("cs ms {id}: submitted twice to one journal"),
        );
        for sub in &m.submissions {
            push(
                sub.first_round.len() == cfg.reviewers_per_ms as usize,
                format!("cs ms {id}: submission without a full review round"),
            );
            let reviewers: std::collections::HashSet<u32> =
                sub.reviewer_ids().iter().copied().collect();
            push(
                reviewers.len() == sub.first_round.len(),
                format!("cs ms {id}: duplicate reviewer"),
            );
            push(
                !reviewers.contains(&m.ms.author_id),
                format!("cs ms {id}: author reviews own manuscript"),
            );
            for t in sub.first_round.iter().chain(&sub.second_round) {
                if let Some(done) = t.completed_month {
                    push(
                        done > t.assigned_month,
                        format!("cs ms {id}: review completed in its assignment month"),
                    );
                }
            }
        }
        push(
            !m.ms.review_log.contains(&m.ms.author_id),
            format!("cs ms {id}: review log contains the author"),
        );
        match m.ms.state() {
            ManuscriptState::Published { .. } => {
                push(
                    m.ms.rejection_count < cfg.max_rejections,
                    format!("cs ms {id}: published after too many rejections"),
                );
                push(
                    m.submissions.len() as u32 == m.ms.rejection_count + 1,
                    format!("cs ms {id}: submissions != rejections + 1"),
                );
            }
            ManuscriptState::Abandoned { .. } => {
                push(
                    m.ms.rejection_count == cfg.max_rejections,
                    format!("cs ms {id}: abandoned with wrong rejection count"),
                );
            }
            ManuscriptState::Draft | ManuscriptState::UnderReview => {}
            other @ (ManuscriptState::InFirstPool | ManuscriptState::InSecondPool) => {
                push(false, format!("cs ms {id}: impossible state {other:?}"));
            }
        }
    }
    // exact review ledger over the whole run
    let total_reviews: u32 = state
        .manuscripts
        .iter()
        .flat_map(|m| &m.submissions)
        .map(|s| s.first_round.len() as u32)
        .sum();
    let total_submissions: u32 = state
        .manuscripts
        .iter()
        .map(|m| m.submissions.len() as u32)
        .sum();
    push(
        total_reviews == cfg.reviewers_per_ms * total_submissions,
        format!("cs: review ledger broken ({total_reviews} != 3 x {total_submissions})"),
    );
    violations
}

/// Checks every pool invariant over a finished pool-setting run.
pub fn check_as_invariants(state: &AsState, cfg: &SimConfig) -> Vec<String> {
    let mut violations = Vec::new();
    let mut push = |cond: bool, msg: String| {
        if !cond {
            violations.push(msg);
        }
    };
    for m in &state.manuscripts {
        let id = m.ms.id;
        push(
            m.tasks.len() <= cfg.reviewers_per_ms as usize,
            format!("as ms {id}: more reviewers than the quota"),
        );
        let reviewers: std::collections::HashSet<u32> =
            m.tasks.iter().map(|t| t.reviewer_id).collect();
        push(
            reviewers.len() == m.tasks.len(),
            format!("as ms {id}: duplicate reviewer"),
        );
        push(
            !reviewers.contains(&m.ms.author_id),
            format!("as ms {id}: author reviews own manuscript"),
        );
        push(
            m.ms.quality >= m.ms.initial_quality && m.ms.novelty >= m.ms.initial_novelty,
            format!("as ms {id}: revision decreased quality or novelty"),
        );
        for t in &m.tasks {
            if let Some(done) = t.completed_month {
                push(
                    done > t.assigned_month,
                    format!("as ms {id}: review completed in its pick month"),
                );
            }
        }
        if m.ripened_month.is_some() {
            let completed = m.tasks.iter().filter(|t| t.completed_month.is_some()).count();
            push(
                completed == cfg.reviewers_per_ms as usize,
                format!("as ms {id}: ripened without a full round"),
            );
            push(
                m.second_opinions.len() == cfg.reviewers_per_ms as usize,
                format!("as ms {id}: ripened without second opinions"),
            );
            push(
                m.ms.revision_count == 1,
                format!("as ms {id}: ripened with revision count != 1"),
            );
        }
        match m.ms.state() {
            ManuscriptState::Published { month, .. } => {
                let ripe = m.ripened_month.unwrap_or(u32::MAX);
                push(
                    month > ripe && month - ripe <= cfg.as_bid_rounds,
                    format!("as ms {id}: published outside its bidding window"),
                );
            }
            ManuscriptState::Abandoned { .. } => {
                push(
                    m.bid_rounds_used == cfg.as_bid_rounds,
                    format!("as ms {id}: abandoned before exhausting bid rounds"),
                );
            }
            _ => {}
        }
    }
    // debt conservation, exact integers
    push(
        state.total_debt_incurred - state.total_duties_assigned == state.outstanding_debt(),
        "as: debt ledger broken".to_string(),
    );
    let tasks: u64 = state.manuscripts.iter().map(|m| m.tasks.len() as u64).sum();
    push(
        tasks == state.total_duties_assigned,
        "as: assigned duties do not match tasks".to_string(),
    );
    violations
}
