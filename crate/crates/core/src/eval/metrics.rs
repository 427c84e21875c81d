use alloc::vec;
use alloc::vec::Vec;

use super::linear::{LogisticRegression, Matrix};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct F1Scores {
    pub macro_f1: f64,
    pub micro_f1: f64,
}

impl F1Scores {
    pub fn mean(scores: &[F1Scores]) -> F1Scores {
        if scores.is_empty() {
            return F1Scores::default();
        }
        let n = scores.len() as f64;
        F1Scores {
            macro_f1: scores.iter().map(|s| s.macro_f1).sum::<f64>() / n,
            micro_f1: scores.iter().map(|s| s.micro_f1).sum::<f64>() / n,
        }
    }
}

/// The `k` labels with the highest score, ties to the lower label id.
/// Returned in increasing label order.
pub fn top_k_labels(scores: &[f64], k: usize) -> Result<Vec<usize>, EvalError> {
    if k > scores.len() {
        return Err(EvalError::TooManyLabels { k, universe: scores.len() });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut top = order[..k].to_vec();
    top.sort_unstable();
    Ok(top)
}

/// For row `i`, the `k_per_node[i]` labels whose models score it highest.
pub fn predict_multilabel(
    models: &[LogisticRegression],
    features: &Matrix,
    k_per_node: &[usize],
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k_per_node.len() != features.rows() {
        return Err(EvalError::InvalidParameter("one label count per feature row is required"));
    }
    let mut probs = vec![0.0; models.len()];
    (0..features.rows())
        .map(|i| {
            for (p, m) in probs.iter_mut().zip(models) {
                *p = m.predict_proba(features.row(i));
            }
            top_k_labels(&probs, k_per_node[i])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: u64,
    fp: u64,
    fn_: u64,
}

impl Counts {
    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

fn per_label_counts(pred: &[Vec<usize>], truth: &[Vec<usize>], num_labels: usize) -> Vec<Counts> {
    assert_eq!(pred.len(), truth.len(), "predictions and truth must be aligned");
    let mut counts = vec![Counts::default(); num_labels];
    let mut in_pred = vec![false; num_labels];
    let mut in_truth = vec![false; num_labels];
    for (p, t) in pred.iter().zip(truth) {
        p.iter().for_each(|&l| in_pred[l] = true);
        t.iter().for_each(|&l| in_truth[l] = true);
        for &l in p.iter().chain(t) {
            let c = &mut counts[l];
            match (in_pred[l], in_truth[l]) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => continue,
            }
            in_pred[l] = false;
            in_truth[l] = false;
        }
    }
    counts
}

fn universe(pred: &[Vec<usize>], truth: &[Vec<usize>]) -> usize {
    pred.iter().chain(truth).flatten().map(|&l| l + 1).max().unwrap_or(0)
}

/// F1 over confusion counts pooled across all labels.
pub fn micro_f1(pred: &[Vec<usize>], truth: &[Vec<usize>]) -> f64 {
    let counts = per_label_counts(pred, truth, universe(pred, truth));
    let total = counts.iter().fold(Counts::default(), |a, c| Counts {
        tp: a.tp + c.tp,
        fp: a.fp + c.fp,
        fn_: a.fn_ + c.fn_,
    });
    total.f1()
}

/// Unweighted mean of per-label F1 over `0..num_labels`; a label with no
/// true positives, false positives or false negatives scores 0.
pub fn macro_f1(pred: &[Vec<usize>], truth: &[Vec<usize>], num_labels: usize) -> f64 {
    if num_labels == 0 {
        return 0.0;
    }
    let counts = per_label_counts(pred, truth, num_labels.max(universe(pred, truth)));
    counts[..num_labels].iter().map(Counts::f1).sum::<f64>() / num_labels as f64
}

pub fn f1_scores(pred: &[Vec<usize>], truth: &[Vec<usize>], num_labels: usize) -> F1Scores {
    F1Scores { macro_f1: macro_f1(pred, truth, num_labels), micro_f1: micro_f1(pred, truth) }
}
