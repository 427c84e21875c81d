//! Feature construction and train/test protocols.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::linear::{train_linear, LinearConfig, Matrix};
use super::metrics::{f1_scores, predict_multilabel, F1Scores};
use super::split::LinkPredSplit;
use super::EvalError;
use crate::graph::NodeId;
use crate::rng;
use crate::skipgram::EmbeddingModel;

/// Node tokens with their label sets; label ids are dense in
/// `0..label_names.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledDataset {
    pub nodes: Vec<String>,
    pub labels: Vec<Vec<usize>>,
    pub label_names: Vec<String>,
}

impl LabeledDataset {
    pub fn num_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// L2 strength; `None` uses `1 / n_train`.
    pub l2: Option<f64>,
    pub max_epochs: usize,
    pub tolerance: f64,
    pub standardize: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { l2: None, max_epochs: 1000, tolerance: 1e-6, standardize: false }
    }
}

impl EvalConfig {
    fn linear(&self, n_train: usize) -> LinearConfig {
        LinearConfig {
            lambda: self.l2.unwrap_or(1.0 / n_train.max(1) as f64),
            max_epochs: self.max_epochs,
            tolerance: self.tolerance,
        }
    }
}

/// Element-wise product of the target vectors of `u` and `v`.
pub fn hadamard(model: &EmbeddingModel, u: &str, v: &str) -> Result<Vec<f64>, EvalError> {
    let a = model.vector(u).ok_or_else(|| EvalError::UnknownNode(u.into()))?;
    let b = model.vector(v).ok_or_else(|| EvalError::UnknownNode(v.into()))?;
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

/// One row per labeled node: its target vector.
pub fn node_features(model: &EmbeddingModel, data: &LabeledDataset) -> Result<Matrix, EvalError> {
    let rows = data
        .nodes
        .iter()
        .map(|t| model.vector(t).ok_or_else(|| EvalError::UnknownNode(t.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(model.dim(), &rows))
}

/// Hadamard features of node-id pairs, resolved through `names`.
pub fn pair_features(model: &EmbeddingModel, names: &[String], pairs: &[(NodeId, NodeId)]) -> Result<Matrix, EvalError> {
    let rows = pairs
        .iter()
        .map(|&(u, v)| hadamard(model, &names[u], &names[v]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(model.dim(), &rows))
}

/// Link-prediction examples of a split: positives (label 1) then negatives
/// (label 0), as a two-label single-label dataset.
pub fn link_examples(model: &EmbeddingModel, split: &LinkPredSplit) -> Result<(Matrix, Vec<Vec<usize>>), EvalError> {
    let names = split.residual.names();
    let pairs: Vec<_> = split.positives.iter().chain(&split.negatives).copied().collect();
    let x = pair_features(model, names, &pairs)?;
    let labels = split
        .positives
        .iter()
        .map(|_| alloc::vec![1])
        .chain(split.negatives.iter().map(|_| alloc::vec![0]))
        .collect();
    Ok((x, labels))
}

/// Random permutation of `0..n` cut into `round(train_fraction * n)` training
/// rows and the rest.
pub fn train_test_split<R: Rng + ?Sized>(n: usize, train_fraction: f64, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let cut = (libm::round(train_fraction * n as f64) as usize).min(n);
    let test = idx.split_off(cut);
    (idx, test)
}

/// `folds` (train, test) index pairs over a seeded permutation of `0..n`.
pub type Fold = (Vec<usize>, Vec<usize>);

pub fn kfold(n: usize, folds: usize, seed: u64) -> Result<Vec<Fold>, EvalError> {
    if folds < 2 || folds > n {
        return Err(EvalError::InvalidParameter("fold count must lie in [2, number of examples]"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    Ok((0..folds)
        .map(|f| {
            let lo = f * n / folds;
            let hi = (f + 1) * n / folds;
            let test = idx[lo..hi].to_vec();
            let train = idx[..lo].iter().chain(&idx[hi..]).copied().collect();
            (train, test)
        })
        .collect())
}

/// Fits one-vs-rest models on `train` rows and scores `test` rows, each test
/// row predicted with as many labels as it truly has.
pub fn evaluate_split(
    x: &Matrix,
    labels: &[Vec<usize>],
    num_labels: usize,
    train: &[usize],
    test: &[usize],
    cfg: &EvalConfig,
) -> Result<F1Scores, EvalError> {
    if train.is_empty() || test.is_empty() {
        return Err(EvalError::InvalidParameter("train and test sets must be non-empty"));
    }
    let mut x_train = x.select_rows(train);
    let mut x_test = x.select_rows(test);
    if cfg.standardize {
        let stats = x_train.standardize();
        x_test.rescale(&stats);
    }
    let y_train: Vec<Vec<usize>> = train.iter().map(|&i| labels[i].clone()).collect();
    let y_test: Vec<Vec<usize>> = test.iter().map(|&i| labels[i].clone()).collect();
    let models = train_linear(&x_train, &y_train, num_labels, &cfg.linear(train.len()))?;
    let k: Vec<usize> = y_test.iter().map(Vec::len).collect();
    let pred = predict_multilabel(&models, &x_test, &k)?;
    Ok(f1_scores(&pred, &y_test, num_labels))
}

/// `instances` random splits at `train_fraction`, one score per split.
pub fn repeated_holdout(
    x: &Matrix,
    labels: &[Vec<usize>],
    num_labels: usize,
    train_fraction: f64,
    instances: usize,
    seed: u64,
    cfg: &EvalConfig,
) -> Result<Vec<F1Scores>, EvalError> {
    (0..instances)
        .map(|i| {
            let mut r = rng::sub_stream(seed, i as u64);
            let (train, test) = train_test_split(x.rows(), train_fraction, &mut r);
            evaluate_split(x, labels, num_labels, &train, &test, cfg)
        })
        .collect()
}

/// One score per fold.
pub fn cross_validate(
    x: &Matrix,
    labels: &[Vec<usize>],
    num_labels: usize,
    folds: usize,
    seed: u64,
    cfg: &EvalConfig,
) -> Result<Vec<F1Scores>, EvalError> {
    kfold(x.rows(), folds, seed)?
        .iter()
        .map(|(train, test)| evaluate_split(x, labels, num_labels, train, test, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn model() -> EmbeddingModel {
        let tokens = vec!["u".to_string(), "v".to_string(), "z".to_string()];
        EmbeddingModel::from_matrices(tokens, 2, vec![1.0, 2.0, 3.0, 4.0, 0.0, 0.0], vec![0.0; 6]).unwrap()
    }

    #[test]
    fn hadamard_definition() {
        let m = model();
        assert_eq!(hadamard(&m, "u", "v").unwrap(), vec![3.0, 8.0]);
        assert_eq!(hadamard(&m, "z", "v").unwrap(), vec![0.0, 0.0]);
        assert_eq!(hadamard(&m, "u", "v"), hadamard(&m, "v", "u"));
        assert_eq!(hadamard(&m, "u", "q"), Err(EvalError::UnknownNode("q".into())));
    }

    #[test]
    fn folds_partition_rows() {
        let folds = kfold(23, 10, 4).unwrap();
        assert_eq!(folds.len(), 10);
        let mut seen: Vec<usize> = folds.iter().flat_map(|(_, t)| t.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..23).collect::<Vec<_>>());
        for (train, test) in &folds {
            assert_eq!(train.len() + test.len(), 23);
            assert!(test.iter().all(|i| !train.contains(i)));
        }
        assert!(kfold(3, 10, 0).is_err());
    }

    #[test]
    fn holdout_sizes() {
        let (train, test) = train_test_split(10, 0.3, &mut rng::seeded(1));
        assert_eq!((train.len(), test.len()), (3, 7));
    }

    #[test]
    fn separable_classes_score_perfectly() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [if i % 2 == 0 { -3.0 - 0.1 * i as f64 } else { 3.0 + 0.1 * i as f64 }]).collect();
        let x = Matrix::from_rows(1, &rows);
        let labels: Vec<Vec<usize>> = (0..20).map(|i| vec![i % 2]).collect();
        let scores = repeated_holdout(&x, &labels, 2, 0.5, 3, 0, &EvalConfig::default()).unwrap();
        assert!(scores.iter().all(|s| s.macro_f1 == 1.0 && s.micro_f1 == 1.0), "{scores:?}");
        let cv = cross_validate(&x, &labels, 2, 5, 0, &EvalConfig::default()).unwrap();
        assert_eq!(cv.len(), 5);
    }
}
