//! Multi-threaded walk sampling and lock-free skip-gram training.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use biasedwalk_core::corpus::Corpus;
use biasedwalk_core::graph::NodeId;
use biasedwalk_core::rng;
use biasedwalk_core::skipgram::{self, prepare_training, train_walk, SgnsParams, SgnsScratch, TrainOutcome, TrainSetup};
use biasedwalk_core::walker::{WalkError, WalkLanes, MAX_LANES};
use biasedwalk_core::{EmbeddingModel, Graph, TrainConfig, WalkConfig};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};

const SOURCES_PER_BATCH: usize = 1024;

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Runtime(format!("cannot start worker threads: {e}")))
}

/// `walks_per_node` walks from every node. Each walk draws from its own
/// (source, repetition) stream, so the corpus does not depend on `workers`.
pub fn generate_walks(g: &Graph, cfg: &WalkConfig, walks_per_node: usize, workers: usize) -> Result<Corpus> {
    cfg.validate()?;
    if walks_per_node == 0 {
        return Err(WalkError::InvalidWalksPerNode.into());
    }
    let mut corpus = Corpus::new(g.names().to_vec())?;
    let pool = thread_pool(workers)?;
    let sources: Vec<NodeId> = (0..g.node_count()).collect();
    for batch in sources.chunks(SOURCES_PER_BATCH) {
        // Each source's walks land in one flat buffer, split by length.
        let walks: Vec<(Vec<NodeId>, Vec<usize>)> = pool.install(|| {
            batch
                .par_iter()
                .map_init(
                    || WalkLanes::new(g, *cfg, walks_per_node.min(MAX_LANES)).expect("config validated above"),
                    |lanes, &s| {
                        let (mut nodes, mut lens) = (Vec::new(), Vec::with_capacity(walks_per_node));
                        lanes.walks_from(s, walks_per_node, |w| {
                            nodes.extend_from_slice(w);
                            lens.push(w.len());
                            Ok::<_, WalkError>(())
                        })?;
                        Ok::<_, WalkError>((nodes, lens))
                    },
                )
                .collect::<Result<Vec<_>, _>>()
        })?;
        for (nodes, lens) in &walks {
            let mut rest = &nodes[..];
            for &len in lens {
                let (w, tail) = rest.split_at(len);
                corpus.push_walk(w)?;
                rest = tail;
            }
        }
    }
    Ok(corpus)
}

/// Target and context matrices stored as `f64` bit patterns, updated without
/// locks. Concurrent writes to one row may overwrite each other.
struct SharedModel {
    dim: usize,
    target: Vec<AtomicU64>,
    context: Vec<AtomicU64>,
}

impl SharedModel {
    fn from_model(m: &EmbeddingModel) -> Self {
        let wrap = |xs: &[f64]| xs.iter().map(|x| AtomicU64::new(x.to_bits())).collect();
        SharedModel { dim: m.dim(), target: wrap(m.target_matrix()), context: wrap(m.context_matrix()) }
    }

    fn into_model(self, tokens: Vec<String>) -> Result<EmbeddingModel> {
        let unwrap = |xs: Vec<AtomicU64>| xs.into_iter().map(|x| f64::from_bits(x.into_inner())).collect();
        Ok(EmbeddingModel::from_matrices(tokens, self.dim, unwrap(self.target), unwrap(self.context))?)
    }
}

#[inline]
fn load(cell: &AtomicU64) -> f64 {
    f64::from_bits(cell.load(Ordering::Relaxed))
}

#[inline]
fn add(cell: &AtomicU64, delta: f64) {
    cell.store((load(cell) + delta).to_bits(), Ordering::Relaxed);
}

// Per-thread handle onto the shared matrices.
struct SharedView<'a>(&'a SharedModel);

impl SharedView<'_> {
    fn target(&self, row: usize) -> &[AtomicU64] {
        &self.0.target[row * self.0.dim..(row + 1) * self.0.dim]
    }

    fn context(&self, row: usize) -> &[AtomicU64] {
        &self.0.context[row * self.0.dim..(row + 1) * self.0.dim]
    }
}

impl SgnsParams for SharedView<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn vocab_size(&self) -> usize {
        self.0.target.len() / self.0.dim
    }

    fn load_target(&self, row: usize, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.target(row)) {
            *o = load(c);
        }
    }

    fn add_target(&mut self, row: usize, delta: &[f64], scale: f64) {
        for (c, d) in self.target(row).iter().zip(delta) {
            add(c, scale * d);
        }
    }

    fn context_dot(&self, row: usize, v: &[f64]) -> f64 {
        self.context(row).iter().zip(v).map(|(c, x)| load(c) * x).sum()
    }

    fn accumulate_context(&self, row: usize, scale: f64, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(self.context(row)) {
            *o += scale * load(c);
        }
    }

    fn add_context(&mut self, row: usize, v: &[f64], scale: f64) {
        for (c, x) in self.context(row).iter().zip(v) {
            add(c, scale * x);
        }
    }
}

/// Trains with `workers` threads sharing one model without locks. Deterministic
/// configurations and single-worker runs use the sequential trainer instead.
pub fn train(corpus: &Corpus, cfg: &TrainConfig, workers: usize) -> Result<TrainOutcome> {
    if cfg.deterministic || workers <= 1 {
        return Ok(skipgram::train(corpus, cfg)?);
    }
    let TrainSetup { model, noise, schedule, .. } = prepare_training(corpus, cfg)?;
    let tokens = model.tokens().to_vec();
    let shared = SharedModel::from_model(&model);
    drop(model);
    let processed = AtomicUsize::new(0);
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut shuffle_rng = rng::sub_stream(cfg.seed, 1);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let chunk = order.len().div_ceil(workers);
        let totals: Vec<(f64, usize)> = std::thread::scope(|scope| {
            let handles: Vec<_> = order
                .chunks(chunk)
                .enumerate()
                .map(|(w, part)| {
                    let (shared, processed, noise) = (&shared, &processed, noise.as_ref());
                    scope.spawn(move || {
                        let mut view = SharedView(shared);
                        let mut scratch = SgnsScratch::default();
                        let mut r = rng::sub_stream(cfg.seed, 2 + (epoch * workers + w) as u64);
                        let (mut loss, mut pairs) = (0.0, 0);
                        for &walk in part {
                            let lr = schedule.at(processed.load(Ordering::Relaxed));
                            let (l, n) = train_walk(
                                &mut view,
                                &mut scratch,
                                corpus.walk(walk),
                                cfg.window,
                                cfg.negatives,
                                noise,
                                lr,
                                &mut r,
                            );
                            processed.fetch_add(n, Ordering::Relaxed);
                            loss += l;
                            pairs += n;
                        }
                        (loss, pairs)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("training thread panicked")).collect()
        });
        let (loss, pairs) = totals.iter().fold((0.0, 0), |a, t| (a.0 + t.0, a.1 + t.1));
        epoch_losses.push(loss / pairs.max(1) as f64);
    }
    Ok(TrainOutcome { model: shared.into_model(tokens)?, epoch_losses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use biasedwalk_core::generate;
    use biasedwalk_core::walker::generate_walk_set;
    use biasedwalk_core::WalkType;

    #[test]
    fn corpus_is_independent_of_worker_count() {
        let g = generate::erdos_renyi(300, 6.0, 2).unwrap();
        let cfg = WalkConfig::new(WalkType::Dfs, 0.5, 15, 8).unwrap();
        let seq = generate_walk_set(&g, &cfg, 2).unwrap();
        for workers in [1, 3] {
            assert_eq!(generate_walks(&g, &cfg, 2, workers).unwrap(), seq);
        }
    }

    #[test]
    fn shared_kernels_match_owned_model() {
        let corpus = Corpus::from_walks(vec!["a".into(), "b".into(), "c".into()], [vec![0, 1, 2, 1]]).unwrap();
        let cfg = TrainConfig { dim: 4, window: 2, seed: 3, ..TrainConfig::default() };
        let setup = prepare_training(&corpus, &cfg).unwrap();
        let mut owned = setup.model.clone();
        let shared = SharedModel::from_model(&setup.model);
        let mut view = SharedView(&shared);
        let (mut s1, mut s2) = (SgnsScratch::default(), SgnsScratch::default());
        let noise = setup.noise.as_ref();
        let a = train_walk(&mut owned, &mut s1, corpus.walk(0), 2, 2, noise, 0.1, &mut rng::seeded(1));
        let b = train_walk(&mut view, &mut s2, corpus.walk(0), 2, 2, noise, 0.1, &mut rng::seeded(1));
        assert_eq!(a, b);
        assert_eq!(shared.into_model(owned.tokens().to_vec()).unwrap(), owned);
    }

    #[test]
    fn parallel_training_reduces_loss() {
        let g = generate::planted_partition(&[30, 30], 0.3, 0.02, 4).unwrap().0;
        let walks = generate_walk_set(&g, &WalkConfig::new(WalkType::Dfs, 0.5, 20, 4).unwrap(), 5).unwrap();
        let cfg = TrainConfig { dim: 16, window: 4, epochs: 3, seed: 4, ..TrainConfig::default() };
        let out = train(&walks, &cfg, 3).unwrap();
        assert!(out.epoch_losses[2] < out.epoch_losses[0]);
        assert!(out.model.target_matrix().iter().all(|x| x.is_finite()));
    }
}
