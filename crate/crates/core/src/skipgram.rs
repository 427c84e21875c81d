//! Skip-gram with negative sampling over a walk corpus.
//!
//! Each node owns a target vector `Φ(u)` and a context vector `Φ'(u)`. For
//! a (target, context) pair the trainer raises `σ(Φ'(ctx)·Φ(t))` and lowers
//! `σ(Φ'(neg)·Φ(t))` for a few noise nodes drawn from the unigram^0.75
//! distribution. With `negatives == 0` the trainer instead takes exact
//! gradient steps on the full softmax, which is only practical for tiny
//! vocabularies and serves as a reference.
//!
//! The update kernels are written against [`SgnsParams`] so that the same
//! code drives both the owned [`EmbeddingModel`] and shared-memory
//! (lock-free) parameter stores.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::Corpus;
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus yields no context pairs (every walk has length 1)")]
    NoContextPairs,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("matrix has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("row {row} holds a non-finite value")]
    NonFinite { row: usize },
    #[error("token {0:?} appears twice")]
    DuplicateToken(String),
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    /// Noise samples per pair; 0 selects full-softmax updates.
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub seed: u64,
    /// Single worker, fixed pair order, bit-reproducible output.
    pub deterministic: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            window: 10,
            negatives: 5,
            epochs: 1,
            initial_lr: 0.025,
            final_lr: 0.0001,
            seed: 0,
            deterministic: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.dim == 0 {
            return Err(TrainError::InvalidConfig("dim must be at least 1"));
        }
        if self.window == 0 {
            return Err(TrainError::InvalidConfig("window must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(TrainError::InvalidConfig("initial learning rate must be positive"));
        }
        if !(self.final_lr >= 0.0 && self.final_lr <= self.initial_lr) {
            return Err(TrainError::InvalidConfig("final learning rate must lie in [0, initial]"));
        }
        Ok(())
    }
}

/// Target and context matrices, row-major, one row per vocabulary token.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    tokens: Vec<String>,
    index: BTreeMap<String, usize>,
    target: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingModel {
    pub fn zeros(tokens: Vec<String>, dim: usize) -> Result<Self, ModelError> {
        let n = tokens.len() * dim;
        Self::from_matrices(tokens, dim, vec![0.0; n], vec![0.0; n])
    }

    /// Target rows uniform in `[-0.5/dim, 0.5/dim]`, context rows zero.
    pub fn random<R: Rng + ?Sized>(tokens: Vec<String>, dim: usize, rng: &mut R) -> Result<Self, ModelError> {
        let n = tokens.len() * dim;
        let half = 0.5 / dim.max(1) as f64;
        let target = (0..n).map(|_| rng.gen_range(-half..=half)).collect();
        Self::from_matrices(tokens, dim, target, vec![0.0; n])
    }

    pub fn from_matrices(
        tokens: Vec<String>,
        dim: usize,
        target: Vec<f64>,
        context: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        let expected = tokens.len() * dim;
        for m in [&target, &context] {
            if m.len() != expected {
                return Err(ModelError::ShapeMismatch { expected, got: m.len() });
            }
        }
        for m in [&target, &context] {
            if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
                return Err(ModelError::NonFinite { row: pos / dim });
            }
        }
        let mut index = BTreeMap::new();
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(ModelError::DuplicateToken(t.clone()));
            }
        }
        Ok(EmbeddingModel { dim, tokens, index, target, context })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn row_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Target vector of `token`.
    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.row_of(token).map(|r| self.target_row(r))
    }

    pub fn target_row(&self, row: usize) -> &[f64] {
        &self.target[row * self.dim..(row + 1) * self.dim]
    }

    pub fn context_row(&self, row: usize) -> &[f64] {
        &self.context[row * self.dim..(row + 1) * self.dim]
    }

    pub fn target_row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.target[row * self.dim..(row + 1) * self.dim]
    }

    pub fn context_row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.context[row * self.dim..(row + 1) * self.dim]
    }

    pub fn target_matrix(&self) -> &[f64] {
        &self.target
    }

    pub fn context_matrix(&self) -> &[f64] {
        &self.context
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let denom = libm::sqrt(dot(a, a) * dot(b, b));
    if denom == 0.0 {
        0.0
    } else {
        dot(a, b) / denom
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without overflow for large `|x|`.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -libm::log1p(libm::exp(-x))
    } else {
        x - libm::log1p(libm::exp(x))
    }
}

/// Row access used by the update kernels.
pub trait SgnsParams {
    fn dim(&self) -> usize;
    fn vocab_size(&self) -> usize;
    fn load_target(&self, row: usize, out: &mut [f64]);
    /// `Φ(row) += scale · delta`
    fn add_target(&mut self, row: usize, delta: &[f64], scale: f64);
    fn context_dot(&self, row: usize, v: &[f64]) -> f64;
    /// `out += scale · Φ'(row)`
    fn accumulate_context(&self, row: usize, scale: f64, out: &mut [f64]);
    /// `Φ'(row) += scale · v`
    fn add_context(&mut self, row: usize, v: &[f64], scale: f64);
}

impl SgnsParams for EmbeddingModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    fn load_target(&self, row: usize, out: &mut [f64]) {
        out.copy_from_slice(self.target_row(row));
    }

    fn add_target(&mut self, row: usize, delta: &[f64], scale: f64) {
        for (x, d) in self.target_row_mut(row).iter_mut().zip(delta) {
            *x += scale * d;
        }
    }

    fn context_dot(&self, row: usize, v: &[f64]) -> f64 {
        dot(self.context_row(row), v)
    }

    fn accumulate_context(&self, row: usize, scale: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.context_row(row)) {
            *o += scale * c;
        }
    }

    fn add_context(&mut self, row: usize, v: &[f64], scale: f64) {
        for (x, d) in self.context_row_mut(row).iter_mut().zip(v) {
            *x += scale * d;
        }
    }
}

/// Reusable buffers for the update kernels.
#[derive(Debug, Clone, Default)]
pub struct SgnsScratch {
    hidden: Vec<f64>,
    grad: Vec<f64>,
    coeffs: Vec<f64>,
    negatives: Vec<usize>,
}

impl SgnsScratch {
    fn prepare(&mut self, dim: usize) {
        self.hidden.resize(dim, 0.0);
        self.grad.clear();
        self.grad.resize(dim, 0.0);
        self.coeffs.clear();
    }
}

/// `-ln σ(Φ'(ctx)·Φ(t)) - Σ ln σ(-Φ'(neg)·Φ(t))`
pub fn sgns_loss(model: &EmbeddingModel, target: usize, context: usize, negatives: &[usize]) -> f64 {
    let h = model.target_row(target);
    let mut loss = -log_sigmoid(dot(model.context_row(context), h));
    for &n in negatives {
        loss -= log_sigmoid(-dot(model.context_row(n), h));
    }
    loss
}

/// One SGD step on the negative-sampling loss of a pair. All gradients are
/// taken at the pre-update parameters; returns the pre-update loss.
pub fn sgns_step_with<P: SgnsParams + ?Sized>(
    params: &mut P,
    scratch: &mut SgnsScratch,
    target: usize,
    context: usize,
    negatives: &[usize],
    lr: f64,
) -> f64 {
    scratch.prepare(params.dim());
    params.load_target(target, &mut scratch.hidden);
    let rows = || core::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    let mut loss = 0.0;
    for (row, positive) in rows() {
        let x = params.context_dot(row, &scratch.hidden);
        let g = if positive {
            loss -= log_sigmoid(x);
            sigmoid(x) - 1.0
        } else {
            loss -= log_sigmoid(-x);
            sigmoid(x)
        };
        params.accumulate_context(row, g, &mut scratch.grad);
        scratch.coeffs.push(g);
    }
    for ((row, _), &g) in rows().zip(scratch.coeffs.iter()) {
        params.add_context(row, &scratch.hidden, -lr * g);
    }
    params.add_target(target, &scratch.grad, -lr);
    loss
}

pub fn sgns_step(model: &mut EmbeddingModel, target: usize, context: usize, negatives: &[usize], lr: f64) -> f64 {
    sgns_step_with(model, &mut SgnsScratch::default(), target, context, negatives, lr)
}

/// Softmax over the whole vocabulary of `Φ'(w)·Φ(target)`.
pub fn softmax_probabilities(model: &EmbeddingModel, target: usize) -> Vec<f64> {
    let h = model.target_row(target);
    let logits: Vec<f64> = (0..model.len()).map(|w| dot(model.context_row(w), h)).collect();
    let lse = log_sum_exp(&logits);
    logits.iter().map(|z| libm::exp(z - lse)).collect()
}

/// `ln p(context | Φ(target))` under the full softmax.
pub fn softmax_log_prob(model: &EmbeddingModel, target: usize, context: usize) -> f64 {
    let h = model.target_row(target);
    let logits: Vec<f64> = (0..model.len()).map(|w| dot(model.context_row(w), h)).collect();
    logits[context] - log_sum_exp(&logits)
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(values.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

/// One exact gradient step on `-ln p(context | Φ(target))`; returns the
/// pre-update loss.
pub fn softmax_step_with<P: SgnsParams + ?Sized>(
    params: &mut P,
    scratch: &mut SgnsScratch,
    target: usize,
    context: usize,
    lr: f64,
) -> f64 {
    scratch.prepare(params.dim());
    params.load_target(target, &mut scratch.hidden);
    let vocab = params.vocab_size();
    for w in 0..vocab {
        scratch.coeffs.push(params.context_dot(w, &scratch.hidden));
    }
    let lse = log_sum_exp(&scratch.coeffs);
    let loss = lse - scratch.coeffs[context];
    for w in 0..vocab {
        let p = libm::exp(scratch.coeffs[w] - lse);
        let g = if w == context { p - 1.0 } else { p };
        scratch.coeffs[w] = g;
        params.accumulate_context(w, g, &mut scratch.grad);
    }
    for w in 0..vocab {
        params.add_context(w, &scratch.hidden, -lr * scratch.coeffs[w]);
    }
    params.add_target(target, &scratch.grad, -lr);
    loss
}

/// Alias-method sampler over `count^power` (power 0.75 for skip-gram noise).
#[derive(Debug, Clone)]
pub struct NoiseSampler {
    prob: Vec<f64>,
    alias: Vec<usize>,
    dist: Vec<f64>,
}

impl NoiseSampler {
    /// `None` when every count is zero.
    pub fn new(counts: &[u64], power: f64) -> Option<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| libm::pow(c as f64, power)).collect();
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return None;
        }
        let n = weights.len();
        let dist: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut scaled: Vec<f64> = dist.iter().map(|p| p * n as f64).collect();
        let mut prob = vec![1.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers in either list are 1 up to rounding.
        Some(NoiseSampler { prob, alias, dist })
    }

    pub fn unigram(counts: &[u64]) -> Option<Self> {
        Self::new(counts, 0.75)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.dist[i]
    }
}

/// Pairs `(walk[i], walk[j])` with `0 < |i - j| <= window`, by `i` then `j`.
pub fn walk_pairs(walk: &[u32], window: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = walk.len();
    (0..n).flat_map(move |i| {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(n.saturating_sub(1));
        (lo..=hi).filter(move |&j| j != i).map(move |j| (walk[i] as usize, walk[j] as usize))
    })
}

/// All (target, context) pairs of a corpus with a fixed window.
pub fn context_pairs(corpus: &Corpus, window: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    corpus.walks().flat_map(move |w| walk_pairs(w, window))
}

/// Number of pairs [`walk_pairs`] yields for a walk of `len` nodes.
pub fn pair_count(len: usize, window: usize) -> usize {
    (0..len)
        .map(|i| (i + window).min(len.saturating_sub(1)) - i.saturating_sub(window))
        .sum()
}

/// Linear decay from `initial` to `final_` over `total` pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningRate {
    pub initial: f64,
    pub final_: f64,
    pub total: usize,
}

impl LearningRate {
    pub fn at(&self, processed: usize) -> f64 {
        if self.total == 0 {
            return self.initial;
        }
        let frac = processed as f64 / self.total as f64;
        (self.initial - (self.initial - self.final_) * frac).max(self.final_)
    }
}

/// Trains on every pair of one walk at a fixed learning rate.
/// Returns the summed pre-update loss and the number of pairs.
#[allow(clippy::too_many_arguments)]
pub fn train_walk<P: SgnsParams + ?Sized, R: Rng + ?Sized>(
    params: &mut P,
    scratch: &mut SgnsScratch,
    walk: &[u32],
    window: usize,
    negatives: usize,
    noise: Option<&NoiseSampler>,
    lr: f64,
    rng: &mut R,
) -> (f64, usize) {
    let mut loss = 0.0;
    let mut pairs = 0;
    let mut negs = core::mem::take(&mut scratch.negatives);
    for (t, c) in walk_pairs(walk, window) {
        loss += match noise {
            Some(noise) if negatives > 0 => {
                negs.clear();
                for _ in 0..negatives {
                    let n = noise.sample(rng);
                    if n != c {
                        negs.push(n);
                    }
                }
                sgns_step_with(params, scratch, t, c, &negs, lr)
            }
            _ => softmax_step_with(params, scratch, t, c, lr),
        };
        pairs += 1;
    }
    scratch.negatives = negs;
    (loss, pairs)
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    /// Mean pre-update pair loss of every epoch.
    pub epoch_losses: Vec<f64>,
}

/// Everything a trainer needs before the first update.
#[derive(Debug, Clone)]
pub struct TrainSetup {
    pub model: EmbeddingModel,
    pub noise: Option<NoiseSampler>,
    pub schedule: LearningRate,
    pub pairs_per_epoch: usize,
}

/// Validates inputs, draws the initial model from `cfg.seed` and builds the
/// noise table and learning-rate schedule.
pub fn prepare_training(corpus: &Corpus, cfg: &TrainConfig) -> Result<TrainSetup, TrainError> {
    cfg.validate()?;
    if corpus.is_empty() || corpus.token_count() == 0 {
        return Err(TrainError::EmptyCorpus);
    }
    let pairs_per_epoch: usize = corpus.walks().map(|w| pair_count(w.len(), cfg.window)).sum();
    if pairs_per_epoch == 0 {
        return Err(TrainError::NoContextPairs);
    }
    let mut init_rng = rng::sub_stream(cfg.seed, 0);
    let model = EmbeddingModel::random(corpus.tokens().to_vec(), cfg.dim, &mut init_rng)
        .map_err(|_| TrainError::InvalidConfig("vocabulary tokens must be unique"))?;
    let noise = if cfg.negatives > 0 { NoiseSampler::unigram(corpus.counts()) } else { None };
    let schedule = LearningRate {
        initial: cfg.initial_lr,
        final_: cfg.final_lr,
        total: pairs_per_epoch * cfg.epochs,
    };
    Ok(TrainSetup { model, noise, schedule, pairs_per_epoch })
}

/// Single-worker training: walks are visited in a freshly shuffled order each
/// epoch, pairs within a walk in order. Bit-reproducible for a fixed seed.
pub fn train(corpus: &Corpus, cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    let TrainSetup { mut model, noise, schedule, .. } = prepare_training(corpus, cfg)?;
    let mut rng = rng::sub_stream(cfg.seed, 1);
    let mut scratch = SgnsScratch::default();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut processed = 0;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut pairs) = (0.0, 0);
        for &w in &order {
            let lr = schedule.at(processed);
            let (loss, n) = train_walk(
                &mut model,
                &mut scratch,
                corpus.walk(w),
                cfg.window,
                cfg.negatives,
                noise.as_ref(),
                lr,
                &mut rng,
            );
            loss_sum += loss;
            pairs += n;
            processed += n;
        }
        epoch_losses.push(loss_sum / pairs as f64);
    }
    Ok(TrainOutcome { model, epoch_losses })
}
