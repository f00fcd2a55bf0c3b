//! Ground-truth scoring of a selection: false discovery proportion, true
//! positive rate, and aggregation across repetitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SelectionScore {
    pub fdp: f64,
    pub tpr: f64,
    pub n_selected: usize,
    pub n_true_active: usize,
    /// Set when the all-null TPR convention applied (empty true support).
    pub empty_support_convention: bool,
}

/// FDP = |selected ∩ nulls| / (|selected| v 1); TPR = |selected ∩ actives| / |actives|.
///
/// With an empty true support the TPR ratio is undefined; the convention here
/// is 1 when nothing was selected and 0 otherwise, flagged in the score.
pub fn score_selection(selected: &[usize], support_true: &[usize], p: usize) -> Result<SelectionScore> {
    for &j in selected.iter().chain(support_true.iter()) {
        if j >= p {
            return Err(Error::input(format!("index {j} out of range for p = {p}")));
        }
    }
    let mut active = vec![false; p];
    for &j in support_true {
        active[j] = true;
    }
    let true_positives = selected.iter().filter(|&&j| active[j]).count();
    let false_positives = selected.len() - true_positives;
    let fdp = false_positives as f64 / selected.len().max(1) as f64;
    let (tpr, flagged) = if support_true.is_empty() {
        (if selected.is_empty() { 1.0 } else { 0.0 }, true)
    } else {
        (true_positives as f64 / support_true.len() as f64, false)
    };
    Ok(SelectionScore {
        fdp,
        tpr,
        n_selected: selected.len(),
        n_true_active: support_true.len(),
        empty_support_convention: flagged,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub fdr: MetricSummary,
    pub tpr: MetricSummary,
    pub n_selected: MetricSummary,
    pub count: usize,
}

fn median_of(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Exact order statistics; quartiles are medians of the lower and upper halves.
pub fn summarize(values: &[f64]) -> Result<MetricSummary> {
    if values.is_empty() {
        return Err(Error::input("cannot summarize an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let median = median_of(&sorted);
    let (lower, upper) = if n == 1 {
        (&sorted[..], &sorted[..])
    } else if n % 2 == 0 {
        (&sorted[..n / 2], &sorted[n / 2..])
    } else {
        (&sorted[..n / 2], &sorted[n / 2 + 1..])
    };
    Ok(MetricSummary {
        mean,
        median,
        q1: median_of(lower),
        q3: median_of(upper),
    })
}

/// Boxplot-style aggregation of per-repetition scores.
pub fn aggregate_scores(scores: &[SelectionScore]) -> Result<ScoreSummary> {
    if scores.is_empty() {
        return Err(Error::input("cannot aggregate an empty score list"));
    }
    let fdps: Vec<f64> = scores.iter().map(|s| s.fdp).collect();
    let tprs: Vec<f64> = scores.iter().map(|s| s.tpr).collect();
    let sizes: Vec<f64> = scores.iter().map(|s| s.n_selected as f64).collect();
    Ok(ScoreSummary {
        fdr: summarize(&fdps)?,
        tpr: summarize(&tprs)?,
        n_selected: summarize(&sizes)?,
        count: scores.len(),
    })
}
