//! L2-regularised logistic regression, one model per label.
//!
//! The objective for a binary column `y` is
//! `(1/n) Σ ln(1 + exp(-s_i (w·x_i + b))) + (λ/2)‖w‖²` with `s_i = ±1`
//! and an unregularised bias. It is minimised by full-batch gradient descent
//! with Barzilai-Borwein step sizes and an Armijo backtracking safeguard.

use alloc::vec;
use alloc::vec::Vec;

use super::EvalError;
use crate::skipgram::{log_sigmoid, sigmoid};

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data does not match its shape");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows<R: AsRef<[f64]>>(cols: usize, rows: &[R]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols);
            data.extend_from_slice(r.as_ref());
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    /// Rescales every column to zero mean and unit variance (constant columns
    /// are only centred) and returns the `(mean, scale)` used per column.
    pub fn standardize(&mut self) -> Vec<(f64, f64)> {
        let stats: Vec<(f64, f64)> = (0..self.cols)
            .map(|c| {
                let n = self.rows.max(1) as f64;
                let mean = (0..self.rows).map(|r| self.data[r * self.cols + c]).sum::<f64>() / n;
                let var = (0..self.rows)
                    .map(|r| {
                        let d = self.data[r * self.cols + c] - mean;
                        d * d
                    })
                    .sum::<f64>()
                    / n;
                (mean, if var > 0.0 { 1.0 / libm::sqrt(var) } else { 1.0 })
            })
            .collect();
        self.rescale(&stats);
        stats
    }

    /// Applies per-column `(mean, scale)` pairs from [`Matrix::standardize`].
    pub fn rescale(&mut self, stats: &[(f64, f64)]) {
        assert_eq!(stats.len(), self.cols);
        for row in self.data.chunks_exact_mut(self.cols.max(1)) {
            for (x, &(mean, scale)) in row.iter_mut().zip(stats) {
                *x = (*x - mean) * scale;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConfig {
    pub lambda: f64,
    pub max_epochs: usize,
    /// Stop once the objective changes by less than this between epochs.
    pub tolerance: f64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig { lambda: 1e-4, max_epochs: 1000, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
}

impl LogisticRegression {
    pub fn zeros(dim: usize, lambda: f64) -> Self {
        LogisticRegression { weights: vec![0.0; dim], bias: 0.0, lambda }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }

    pub fn weight_norm(&self) -> f64 {
        libm::sqrt(self.weights.iter().map(|w| w * w).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    pub epochs: usize,
    pub converged: bool,
    /// The column had a single class; a constant predictor was fitted.
    pub degenerate: bool,
    pub loss: f64,
}

/// Objective value at `params` (weights followed by the bias); when `grad`
/// is given it receives the gradient.
pub fn logistic_objective(params: &[f64], x: &Matrix, y: &[bool], lambda: f64, grad: Option<&mut [f64]>) -> f64 {
    let d = x.cols();
    let (w, b) = (&params[..d], params[d]);
    let n = x.rows().max(1) as f64;
    let mut loss = 0.0;
    let mut g = grad;
    if let Some(g) = g.as_deref_mut() {
        g.fill(0.0);
    }
    for (i, &yi) in y.iter().enumerate().take(x.rows()) {
        let row = x.row(i);
        let z = w.iter().zip(row).map(|(a, v)| a * v).sum::<f64>() + b;
        let s = if yi { 1.0 } else { -1.0 };
        loss -= log_sigmoid(s * z);
        if let Some(g) = g.as_deref_mut() {
            let r = (sigmoid(z) - if yi { 1.0 } else { 0.0 }) / n;
            for (gj, v) in g[..d].iter_mut().zip(row) {
                *gj += r * v;
            }
            g[d] += r;
        }
    }
    let reg = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    if let Some(g) = g {
        for (gj, wj) in g[..d].iter_mut().zip(w) {
            *gj += lambda * wj;
        }
    }
    loss / n + reg
}

pub fn fit_logistic(x: &Matrix, y: &[bool], cfg: &LinearConfig) -> (LogisticRegression, FitReport) {
    assert_eq!(x.rows(), y.len());
    let d = x.cols();
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        let negatives = y.len() - positives;
        let mut model = LogisticRegression::zeros(d, cfg.lambda);
        model.bias = libm::log((positives as f64 + 0.5) / (negatives as f64 + 0.5));
        return (model, FitReport { epochs: 0, converged: true, degenerate: true, loss: 0.0 });
    }

    let mut params = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    let mut loss = logistic_objective(&params, x, y, cfg.lambda, Some(&mut grad));
    // 1/L for the averaged logistic loss: L <= max ‖(x, 1)‖² / 4 + λ.
    let max_sq = (0..x.rows())
        .map(|i| x.row(i).iter().map(|v| v * v).sum::<f64>() + 1.0)
        .fold(0.0, f64::max);
    let mut step = 1.0 / (0.25 * max_sq + cfg.lambda);
    let mut trial = vec![0.0; d + 1];
    let mut trial_grad = vec![0.0; d + 1];
    let mut report = FitReport { epochs: 0, converged: false, degenerate: false, loss };

    for epoch in 1..=cfg.max_epochs {
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        if grad_sq == 0.0 {
            report.converged = true;
            break;
        }
        let trial_loss = loop {
            for ((t, p), g) in trial.iter_mut().zip(&params).zip(&grad) {
                *t = p - step * g;
            }
            let l = logistic_objective(&trial, x, y, cfg.lambda, Some(&mut trial_grad));
            if l <= loss - 1e-4 * step * grad_sq || step < 1e-12 {
                break l;
            }
            step *= 0.5;
        };
        let (mut ss, mut sy) = (0.0, 0.0);
        for j in 0..=d {
            let s = trial[j] - params[j];
            ss += s * s;
            sy += s * (trial_grad[j] - grad[j]);
        }
        let change = loss - trial_loss;
        core::mem::swap(&mut params, &mut trial);
        core::mem::swap(&mut grad, &mut trial_grad);
        loss = trial_loss;
        report.epochs = epoch;
        if change.abs() < cfg.tolerance {
            report.converged = true;
            break;
        }
        step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { step * 2.0 };
    }
    report.loss = loss;
    let bias = params.pop().unwrap_or(0.0);
    (LogisticRegression { weights: params, bias, lambda: cfg.lambda }, report)
}

/// One-vs-rest fit: label `l` is positive for row `i` iff `labels[i]`
/// contains `l`.
pub fn train_linear(
    x: &Matrix,
    labels: &[Vec<usize>],
    num_labels: usize,
    cfg: &LinearConfig,
) -> Result<Vec<LogisticRegression>, EvalError> {
    if labels.len() != x.rows() {
        return Err(EvalError::InvalidParameter("one label set per feature row is required"));
    }
    if labels.iter().flatten().any(|&l| l >= num_labels) {
        return Err(EvalError::InvalidParameter("label id outside the label universe"));
    }
    let mut models = Vec::with_capacity(num_labels);
    for label in 0..num_labels {
        let y: Vec<bool> = labels.iter().map(|ls| ls.contains(&label)).collect();
        let (model, report) = fit_logistic(x, &y, cfg);
        if report.degenerate {
            log::warn!("label {label} has a single class in the training data; fitting a constant predictor");
        }
        models.push(model);
    }
    Ok(models)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn toy() -> (Matrix, Vec<bool>) {
        let mut r = crate::rng::seeded(11);
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..3).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let y = rows.iter().map(|v| v[0] - 0.5 * v[1] + r.gen_range(-0.3..0.3) > 0.1).collect();
        (Matrix::from_rows(3, &rows), y)
    }

    #[test]
    fn zero_model_is_indifferent() {
        let m = LogisticRegression::zeros(4, 1.0);
        assert_eq!(m.predict_proba(&[3.0, -1.0, 2.0, 7.0]), 0.5);
    }

    #[test]
    fn separable_pair_without_penalty() {
        let x = Matrix::from_rows(1, &[[-1.0], [1.0]]);
        let y = [false, true];
        let cfg = LinearConfig { lambda: 0.0, ..LinearConfig::default() };
        let (m, _) = fit_logistic(&x, &y, &cfg);
        assert!(m.predict_proba(&[-1.0]) < 0.5);
        assert!(m.predict_proba(&[1.0]) > 0.5);
    }

    #[test]
    fn stronger_penalty_shrinks_weights() {
        let (x, y) = toy();
        let weak = fit_logistic(&x, &y, &LinearConfig { lambda: 0.01, ..LinearConfig::default() }).0;
        let strong = fit_logistic(&x, &y, &LinearConfig { lambda: 10.0, ..LinearConfig::default() }).0;
        assert!(strong.weight_norm() < weak.weight_norm());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = toy();
        let params = [0.3, -0.7, 0.2, 0.1];
        let mut grad = [0.0; 4];
        logistic_objective(&params, &x, &y, 0.05, Some(&mut grad));
        let h = 1e-5;
        for j in 0..4 {
            let (mut up, mut down) = (params, params);
            up[j] += h;
            down[j] -= h;
            let fd = (logistic_objective(&up, &x, &y, 0.05, None) - logistic_objective(&down, &x, &y, 0.05, None)) / (2.0 * h);
            assert!((fd - grad[j]).abs() <= 1e-4 * fd.abs().max(1e-8), "coordinate {j}: {fd} vs {}", grad[j]);
        }
    }

    #[test]
    fn converges_to_stationary_point() {
        let (x, y) = toy();
        let cfg = LinearConfig { lambda: 0.1, max_epochs: 5000, tolerance: 1e-12 };
        let (m, report) = fit_logistic(&x, &y, &cfg);
        assert!(report.converged);
        let mut params = m.weights.clone();
        params.push(m.bias);
        let mut grad = vec![0.0; 4];
        logistic_objective(&params, &x, &y, 0.1, Some(&mut grad));
        assert!(grad.iter().all(|g| g.abs() < 1e-4));
    }

    #[test]
    fn degenerate_column() {
        let x = Matrix::from_rows(1, &[[1.0], [2.0]]);
        let (m, report) = fit_logistic(&x, &[true, true], &LinearConfig::default());
        assert!(report.degenerate);
        assert!(m.predict_proba(&[0.0]) > 0.5);
        assert_relative_eq!(m.weight_norm(), 0.0);
    }

    #[test]
    fn one_vs_rest_shapes() {
        let x = Matrix::from_rows(1, &[[-1.0], [1.0], [2.0]]);
        let labels = vec![vec![0], vec![1], vec![1, 2]];
        let models = train_linear(&x, &labels, 3, &LinearConfig::default()).unwrap();
        assert_eq!(models.len(), 3);
        assert!(train_linear(&x, &labels, 2, &LinearConfig::default()).is_err());
    }

    #[test]
    fn standardize_columns() {
        let mut x = Matrix::from_rows(2, &[[1.0, 5.0], [3.0, 5.0]]);
        x.standardize();
        assert_eq!(x.row(0), &[-1.0, 0.0]);
        assert_eq!(x.row(1), &[1.0, 0.0]);
    }
}
