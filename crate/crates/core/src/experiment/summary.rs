use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::ChoiceRecord;
use super::stats::{binomial_test_two_sided, clopper_pearson};
use super::ExperimentError;
use crate::bridge::{PolicyFlag, PolicyLabel, Problem};

/// Choice share of a policy under uniformly random choice.
pub const BASELINE: f64 = 0.25;
/// Confidence level of the reported intervals.
pub const CI_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSummary {
    pub label: PolicyLabel,
    pub flag: PolicyFlag,
    pub count: u64,
    pub frequency: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Two-sided exact binomial test of this label's share against the baseline.
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub problem_id: String,
    pub n: u64,
    pub counts: BTreeMap<PolicyLabel, u64>,
    pub frequencies: BTreeMap<PolicyLabel, f64>,
    /// The goal-inverting policy whose share is the ccb rate.
    pub inverse_policy: PolicyLabel,
    pub ccb_rate: f64,
    pub baseline: f64,
    pub p_value: f64,
    pub labels: Vec<LabelSummary>,
}

/// Summary from raw counts ordered A..D.
pub fn summarize_counts(problem: &Problem, counts: [u64; 4]) -> Result<CohortSummary, ExperimentError> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(ExperimentError::EmptyCohort);
    }
    let inverse = problem.policy_with_flag(PolicyFlag::Inverse).label;
    let labels: Vec<LabelSummary> = PolicyLabel::ALL
        .iter()
        .map(|&label| {
            let count = counts[label.index()];
            let (ci_lower, ci_upper) = clopper_pearson(count, n, 1.0 - CI_LEVEL);
            LabelSummary {
                label,
                flag: problem.policy(label).flag,
                count,
                frequency: count as f64 / n as f64,
                ci_lower,
                ci_upper,
                p_value: binomial_test_two_sided(count, n, BASELINE),
            }
        })
        .collect();
    let inv = &labels[inverse.index()];
    Ok(CohortSummary {
        problem_id: problem.id.clone(),
        n,
        counts: labels.iter().map(|l| (l.label, l.count)).collect(),
        frequencies: labels.iter().map(|l| (l.label, l.frequency)).collect(),
        inverse_policy: inverse,
        ccb_rate: inv.frequency,
        baseline: BASELINE,
        p_value: inv.p_value,
        labels,
    })
}

/// Counts, frequencies and the exact test of the goal-inverting policy's
/// share against the uniform baseline.
pub fn summarize(records: &[ChoiceRecord], problem: &Problem) -> Result<CohortSummary, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::EmptyCohort);
    }
    if let Some(r) = records.iter().find(|r| r.problem_id != problem.id) {
        return Err(ExperimentError::MixedProblemIds { expected: problem.id.clone(), found: r.problem_id.clone() });
    }
    let mut counts = [0u64; 4];
    for r in records {
        counts[r.chosen.index()] += 1;
    }
    summarize_counts(problem, counts)
}

impl CohortSummary {
    /// Whether the ccb rate exceeds the baseline with `p < alpha`.
    pub fn detects_bias(&self, alpha: f64) -> bool {
        self.ccb_rate > self.baseline && self.p_value < alpha
    }

    pub fn text_report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "problem: {}", self.problem_id);
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "label  flag       count  frequency  ci95_lower  ci95_upper  p_value");
        for l in &self.labels {
            let flag = match l.flag {
                PolicyFlag::Correct => "correct",
                PolicyFlag::Inverse => "inverse",
                PolicyFlag::Arbitrary => "arbitrary",
            };
            let _ = writeln!(
                s,
                "{:<5}  {:<9}  {:>5}  {:>9.4}  {:>10.4}  {:>10.4}  {:.4e}",
                l.label, flag, l.count, l.frequency, l.ci_lower, l.ci_upper, l.p_value
            );
        }
        let _ = writeln!(s, "ccb_rate: {:.4} (policy {})", self.ccb_rate, self.inverse_policy);
        let _ = writeln!(s, "baseline: {:.2}", self.baseline);
        let _ = writeln!(s, "p_value: {:.4e}", self.p_value);
        s
    }

    /// Tab-separated `label, frequency, ci_lower, ci_upper` with a header row.
    pub fn plot_data(&self) -> String {
        let mut s = String::from("label\tfrequency\tci_lower\tci_upper\n");
        for l in &self.labels {
            let _ = writeln!(s, "{}\t{}\t{}\t{}", l.label, l.frequency, l.ci_lower, l.ci_upper);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::record::Source;
    use crate::fixtures;

    fn records(problem: &str, counts: [usize; 4]) -> Vec<ChoiceRecord> {
        let mut out = Vec::new();
        for (label, &c) in PolicyLabel::ALL.iter().zip(&counts) {
            for _ in 0..c {
                let i = out.len() as u64;
                out.push(ChoiceRecord {
                    problem_id: problem.into(),
                    subject_id: format!("s{i}"),
                    cohort_id: "c".into(),
                    phase_timestamps: [i, i + 1, i + 2],
                    chosen: *label,
                    latency_ms: 0,
                    source: Source::Simulated,
                    session_id: None,
                    occupation: None,
                    education: None,
                });
            }
        }
        out
    }

    #[test]
    fn exact_null() {
        let p = fixtures::war_on_drugs();
        let s = summarize(&records("war_on_drugs", [25, 25, 25, 25]), &p).unwrap();
        assert_eq!(s.ccb_rate, 0.25);
        assert_eq!(s.p_value, 1.0);
        assert_eq!(s.counts.values().sum::<u64>(), 100);
        assert!((s.frequencies.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn everyone_picks_the_correct_policy() {
        let p = fixtures::student();
        let s = summarize(&records("student", [0, 100, 0, 0]), &p).unwrap();
        assert_eq!(s.inverse_policy, PolicyLabel::A);
        assert_eq!(s.ccb_rate, 0.0);
        assert!(s.labels[1].p_value < 1e-10);
    }

    #[test]
    fn inverting_majority() {
        let p = fixtures::student();
        let s = summarize(&records("student", [52, 20, 14, 14]), &p).unwrap();
        assert_eq!(s.ccb_rate, 0.52);
        assert!((s.p_value - 8.69e-9).abs() < 0.01e-9);
        assert!(s.detects_bias(0.01));
    }

    #[test]
    fn errors() {
        let p = fixtures::student();
        assert_eq!(summarize(&[], &p), Err(ExperimentError::EmptyCohort));
        let mut rs = records("student", [1, 1, 0, 0]);
        rs[1].problem_id = "other".into();
        assert_eq!(
            summarize(&rs, &p),
            Err(ExperimentError::MixedProblemIds { expected: "student".into(), found: "other".into() })
        );
    }

    #[test]
    fn reports() {
        let p = fixtures::war_on_drugs();
        let s = summarize(&records("war_on_drugs", [10, 60, 20, 10]), &p).unwrap();
        let text = s.text_report();
        assert!(text.contains("ccb_rate: 0.6000 (policy B)"));
        let plot = s.plot_data();
        assert_eq!(plot.lines().count(), 5);
        assert!(plot.lines().nth(2).unwrap().starts_with("B\t0.6\t"));
    }
}
