//! Scoring candidate trajectories against a specification and selecting the
//! best one.
//!
//! Each candidate gets a full robustness trace plus a single overall value.
//! "Overall" defaults to robustness at time 0, the same convention the
//! satisfaction check uses; mean robustness over the evaluation domain is
//! available as an alternative reading.

use std::io::Write;

use crate::formula::Formula;
use crate::monitor::{format_robustness, robustness_trace, required_horizon, MonitorError};
use crate::scene::Trajectory;
use crate::RobustnessTrace;

/// Candidate trajectories and the specification they compete on.
#[derive(Debug, Clone)]
pub struct RolloutSet {
    pub candidates: Vec<Trajectory>,
    pub spec: Formula,
}

/// How the overall value of a candidate is computed from its trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverallMetric {
    /// Robustness at time 0.
    #[default]
    RobustnessAtStart,
    /// Mean robustness over the whole evaluation domain.
    MeanOverDomain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutScore {
    pub index: usize,
    pub overall: f64,
    pub trace: RobustnessTrace,
}

#[derive(Debug, thiserror::Error)]
pub enum RolloutError {
    #[error("no candidates to score")]
    Empty,
    #[error("candidate {index}: {source}")]
    Candidate {
        index: usize,
        source: MonitorError,
    },
    #[error("candidate {index} is shorter than the specification horizon ({horizon} steps needed beyond t=0, length {len})")]
    Horizon {
        index: usize,
        horizon: usize,
        len: usize,
    },
}

/// Scores every candidate, preserving order.
pub fn score_rollouts(rs: &RolloutSet) -> Result<Vec<RolloutScore>, RolloutError> {
    score_rollouts_with(rs, OverallMetric::default())
}

pub fn score_rollouts_with(
    rs: &RolloutSet,
    metric: OverallMetric,
) -> Result<Vec<RolloutScore>, RolloutError> {
    if rs.candidates.is_empty() {
        return Err(RolloutError::Empty);
    }
    let horizon = required_horizon(&rs.spec);
    let mut scores = Vec::with_capacity(rs.candidates.len());
    for (index, candidate) in rs.candidates.iter().enumerate() {
        if horizon >= candidate.len() {
            return Err(RolloutError::Horizon {
                index,
                horizon,
                len: candidate.len(),
            });
        }
        let trace = robustness_trace(candidate, &rs.spec)
            .map_err(|source| RolloutError::Candidate { index, source })?;
        let overall = match metric {
            OverallMetric::RobustnessAtStart => trace.values[0].1,
            OverallMetric::MeanOverDomain => {
                trace.values.iter().map(|(_, v)| v).sum::<f64>() / trace.values.len() as f64
            }
        };
        scores.push(RolloutScore { index, overall, trace });
    }
    Ok(scores)
}

/// The candidate with the highest overall robustness; ties break toward the
/// lowest index.
pub fn select_best(rs: &RolloutSet) -> Result<RolloutScore, RolloutError> {
    select_best_with(rs, OverallMetric::default())
}

pub fn select_best_with(
    rs: &RolloutSet,
    metric: OverallMetric,
) -> Result<RolloutScore, RolloutError> {
    let scores = score_rollouts_with(rs, metric)?;
    Ok(scores
        .into_iter()
        .reduce(|best, candidate| if candidate.overall > best.overall { candidate } else { best })
        .expect("at least one candidate"))
}

/// CSV export `candidate,t,robustness`, candidates ascending then time
/// ascending; stable bytes for identical inputs.
pub fn export_traces(scores: &[RolloutScore], mut sink: impl Write) -> std::io::Result<()> {
    writeln!(sink, "candidate,t,robustness")?;
    for score in scores {
        for (t, value) in &score.trace.values {
            writeln!(sink, "{},{t},{}", score.index, format_robustness(*value))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formula::Interval;

    fn approach_set() -> RolloutSet {
        RolloutSet {
            candidates: fixtures::approach_candidates(),
            spec: fixtures::approach_spec(),
        }
    }

    #[test]
    fn single_candidate_scores_its_robustness() {
        let rs = RolloutSet {
            candidates: vec![fixtures::approach_candidates().remove(2)],
            spec: fixtures::approach_spec(),
        };
        let scores = score_rollouts(&rs).unwrap();
        assert_eq!(scores.len(), 1);
        assert!((scores[0].overall - 1.3).abs() < 1e-12);
        assert_eq!(scores[0].overall, scores[0].trace.values[0].1);
    }

    #[test]
    fn constructed_candidates_score_as_designed() {
        let scores = score_rollouts(&approach_set()).unwrap();
        let overalls: Vec<f64> = scores.iter().map(|s| s.overall).collect();
        for (got, want) in overalls.iter().zip([-0.5, 0.2, 1.3]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn best_is_the_argmax() {
        let best = select_best(&approach_set()).unwrap();
        assert_eq!(best.index, 2);
        let scores = score_rollouts(&approach_set()).unwrap();
        for s in scores {
            assert!(best.overall >= s.overall);
        }
    }

    #[test]
    fn ties_break_to_the_lowest_index() {
        let rs = RolloutSet {
            candidates: fixtures::tie_candidates(),
            spec: fixtures::approach_spec(),
        };
        let best = select_best(&rs).unwrap();
        assert_eq!(best.index, 0);
    }

    #[test]
    fn permuting_candidates_permutes_scores() {
        let rs = approach_set();
        let mut permuted = rs.clone();
        permuted.candidates.rotate_left(1);
        let best = select_best(&rs).unwrap();
        let best_permuted = select_best(&permuted).unwrap();
        assert_eq!(best.overall, best_permuted.overall);
        assert_eq!(best_permuted.index, 1);
    }

    #[test]
    fn adding_a_candidate_never_lowers_the_winner() {
        let rs = approach_set();
        let shorter = RolloutSet {
            candidates: rs.candidates[..2].to_vec(),
            spec: rs.spec.clone(),
        };
        let before = select_best(&shorter).unwrap().overall;
        let after = select_best(&rs).unwrap().overall;
        assert!(after >= before);
    }

    #[test]
    fn short_candidate_is_a_horizon_error() {
        let mut rs = approach_set();
        rs.spec = Formula::always(Interval::new(0, 5).unwrap(), rs.spec);
        let err = score_rollouts(&rs).unwrap_err();
        assert!(matches!(err, RolloutError::Horizon { index: 0, .. }));
    }

    #[test]
    fn csv_rows_and_stability() {
        let scores = score_rollouts(&approach_set()).unwrap();
        let mut a = Vec::new();
        export_traces(&scores, &mut a).unwrap();
        let mut b = Vec::new();
        export_traces(&scores, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "candidate,t,robustness");
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert!(lines[1].starts_with("0,0,"));
    }

    #[test]
    fn horizon_filling_trace_leaves_one_row_per_candidate() {
        // spec horizon equals len - 1, so each domain collapses to t = 0
        let rs = RolloutSet {
            candidates: fixtures::approach_candidates(),
            spec: Formula::always(Interval::new(0, 2).unwrap(), fixtures::approach_spec()),
        };
        let scores = score_rollouts(&rs).unwrap();
        let mut buf = Vec::new();
        export_traces(&scores, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3);
    }

    #[test]
    fn mean_metric_averages_the_domain() {
        let rs = approach_set();
        let scores = score_rollouts_with(&rs, OverallMetric::MeanOverDomain).unwrap();
        // constant candidates: mean equals the start value
        let start = score_rollouts(&rs).unwrap();
        for (m, s) in scores.iter().zip(&start) {
            assert!((m.overall - s.overall).abs() < 1e-12);
        }
    }
}
