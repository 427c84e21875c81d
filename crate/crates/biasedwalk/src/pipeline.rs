//! The commands behind the CLI, callable as a library.

use std::path::{Path, PathBuf};
use std::time::Instant;

use biasedwalk_core::eval::protocol::{evaluate_split, kfold, link_examples, node_features, train_test_split};
use biasedwalk_core::eval::sweep::{self, GridPoint, ParamGrid, SweepReport};
use biasedwalk_core::eval::{split_edges_for_linkpred, EvalConfig, F1Scores, LabeledDataset, LinkPredSplit, Matrix};
use biasedwalk_core::generate::erdos_renyi;
use biasedwalk_core::graph::{is_connected, largest_connected_component};
use biasedwalk_core::{rng, Corpus, EmbeddingModel, Graph, WalkConfig};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::cli::*;
use crate::error::{Error, Result};
use crate::io::{self, ScoreRow};
use crate::manifest::{self, RunManifest};
use crate::parallel;

pub fn run(command: &Command) -> Result<RunManifest> {
    match command {
        Command::Embed(a) => embed(a),
        Command::Walks(a) => walks(a),
        Command::Nodeclass(a) => nodeclass(a),
        Command::Linkpred(a) => linkpred(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Bench(a) => bench(a).map(|(m, _)| m),
        Command::Lcc(a) => lcc(a),
        Command::Generate(a) => generate(a),
        Command::Replay(a) => replay(&a.manifest),
    }
}

fn eval_config(c: &ClassifierArgs) -> Result<EvalConfig> {
    if let Some(l2) = c.l2 {
        if !(l2.is_finite() && l2 >= 0.0) {
            return Err(Error::parameter("--l2 must be finite and non-negative"));
        }
    }
    Ok(EvalConfig { l2: c.l2, max_epochs: c.max_iter, tolerance: 1e-6, standardize: c.standardize })
}

fn load_input(g: &GraphArgs, m: &mut RunManifest) -> Result<Graph> {
    m.inputs.push(g.input.clone());
    let graph = m.time("loading", || io::load_graph(&g.input, g.directed, g.weighted))?;
    if graph.node_count() == 0 {
        return Err(Error::parameter(format!("{} contains no edges", g.input.display())));
    }
    Ok(graph)
}

/// Samples the walk corpus of `g`.
pub fn sample(g: &Graph, cfg: &WalkConfig, num_walks: usize, workers: usize) -> Result<Corpus> {
    let corpus = parallel::generate_walks(g, cfg, num_walks, workers)?;
    log::info!("sampled {} walks, {} tokens", corpus.len(), corpus.token_count());
    Ok(corpus)
}

/// Walks plus skip-gram training, timed into `m`.
#[allow(clippy::too_many_arguments)]
pub fn embed_graph(
    g: &Graph,
    cfg: &WalkConfig,
    shape: &ShapeArgs,
    train: &TrainArgs,
    run: &RunArgs,
    m: &mut RunManifest,
) -> Result<EmbeddingModel> {
    let corpus = m.time("sampling", || sample(g, cfg, shape.num_walks, run.workers()))?;
    let outcome = m.time("training", || parallel::train(&corpus, &train_config(train, run), run.workers()))?;
    if let Some(last) = outcome.epoch_losses.last() {
        log::info!("final epoch mean pair loss {last:.4}");
    }
    Ok(outcome.model)
}

fn embed(a: &EmbedArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Embed(a.clone()));
    m.seed = Some(a.run.seed);
    let g = load_input(&a.graph, &mut m)?;
    let model = embed_graph(&g, &walk_config(&a.bias, &a.shape, &a.run), &a.shape, &a.train, &a.run, &mut m)?;
    m.time("writing", || io::save_embeddings(&model, &a.output))?;
    m.outputs.push(a.output.clone());
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

fn walks(a: &WalksArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Walks(a.clone()));
    m.seed = Some(a.run.seed);
    let g = load_input(&a.graph, &mut m)?;
    let corpus = m.time("sampling", || sample(&g, &walk_config(&a.bias, &a.shape, &a.run), a.shape.num_walks, a.run.workers()))?;
    m.time("writing", || io::write_file(&a.output, |w| io::write_corpus(&corpus, w)))?;
    m.outputs.push(a.output.clone());
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    io::write_file(path, |w| io::write_scores(rows, w))
}

fn fraction_setting(f: f64) -> String {
    format!("train={f}")
}

/// Mean scores per training fraction, in the order given.
#[derive(Debug, Clone, Serialize)]
pub struct FractionSummary {
    pub train_fraction: f64,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

fn check_fraction(name: &str, f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(format!("{name} must lie strictly between 0 and 1, got {f}")))
    }
}

/// Scores of `instances` random splits per fraction, evaluated in parallel.
pub fn score_fractions(
    x: &Matrix,
    data: &LabeledDataset,
    fractions: &[f64],
    instances: usize,
    seed: u64,
    cfg: &EvalConfig,
    workers: usize,
) -> Result<Vec<ScoreRow>> {
    let jobs: Vec<(usize, usize)> = (0..fractions.len()).flat_map(|f| (0..instances).map(move |i| (f, i))).collect();
    let pool = parallel::thread_pool(workers)?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(f, i)| {
                let mut r = rng::sub_stream(seed, (f * instances + i) as u64);
                let (train, test) = train_test_split(x.rows(), fractions[f], &mut r);
                let scores = evaluate_split(x, &data.labels, data.num_labels(), &train, &test, cfg)?;
                Ok(ScoreRow { setting: fraction_setting(fractions[f]), fold: i, scores })
            })
            .collect()
    })
}

fn nodeclass(a: &NodeclassArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Nodeclass(a.clone()));
    m.seed = Some(a.run.seed);
    let cfg = eval_config(&a.classifier)?;
    if a.instances == 0 {
        return Err(Error::parameter("--instances must be at least 1"));
    }
    let mut fractions = a.fractions.clone();
    for &f in &fractions {
        check_fraction("training fraction", f)?;
    }
    if !fractions.contains(&0.5) {
        fractions.push(0.5);
    }
    m.inputs.push(a.labels.clone());
    let data = io::load_labels(&a.labels)?;
    let model = match &a.embeddings {
        Some(path) => {
            m.inputs.push(path.clone());
            m.time("loading", || io::load_embeddings(path))?
        }
        None => {
            let g = load_input(&a.graph, &mut m)?;
            embed_graph(&g, &walk_config(&a.bias, &a.shape, &a.run), &a.shape, &a.train, &a.run, &mut m)?
        }
    };
    let x = node_features(&model, &data)?;
    let rows = m.time("evaluation", || score_fractions(&x, &data, &fractions, a.instances, a.run.seed, &cfg, a.run.workers()))?;
    write_scores(&a.output, &rows)?;
    m.outputs.push(a.output.clone());

    let summary: Vec<FractionSummary> = fractions
        .iter()
        .map(|&f| {
            let s: Vec<F1Scores> = rows.iter().filter(|r| r.setting == fraction_setting(f)).map(|r| r.scores).collect();
            let mean = F1Scores::mean(&s);
            FractionSummary { train_fraction: f, macro_f1: mean.macro_f1, micro_f1: mean.micro_f1 }
        })
        .collect();
    let half = summary.iter().find(|s| s.train_fraction == 0.5).cloned().expect("0.5 is always evaluated");
    println!("train_fraction,macro_f1,micro_f1");
    for s in &summary {
        println!("{},{:.4},{:.4}", s.train_fraction, s.macro_f1, s.micro_f1);
    }
    println!("50/50 split over {} instances: macro_f1 {:.4}, micro_f1 {:.4}", a.instances, half.macro_f1, half.micro_f1);
    m.summary = json!({ "fractions": summary, "half_split": half });
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

fn connected_input(g: Graph) -> Graph {
    if is_connected(&g) {
        return g;
    }
    let lcc = largest_connected_component(&g);
    log::warn!(
        "graph is not connected; using its largest component ({} of {} nodes)",
        lcc.node_count(),
        g.node_count()
    );
    lcc
}

fn write_split(dir: &Path, split: &LinkPredSplit) -> Result<Vec<PathBuf>> {
    let names = split.residual.names();
    let residual = dir.join("residual.edges");
    let positives = dir.join("positives.edges");
    let negatives = dir.join("negatives.edges");
    io::save_graph(&split.residual, &residual)?;
    io::write_file(&positives, |w| io::write_pairs(names, &split.positives, w))?;
    io::write_file(&negatives, |w| io::write_pairs(names, &split.negatives, w))?;
    Ok(vec![residual, positives, negatives])
}

/// One link-prediction instance: embed the residual graph, then fit and
/// score a classifier on Hadamard features of a random half of the pairs.
#[allow(clippy::too_many_arguments)]
pub fn linkpred_instance(
    split: &LinkPredSplit,
    bias: &BiasArgs,
    shape: &ShapeArgs,
    train: &TrainArgs,
    run: &RunArgs,
    train_fraction: f64,
    cfg: &EvalConfig,
    m: &mut RunManifest,
) -> Result<F1Scores> {
    let model = embed_graph(&split.residual, &walk_config(bias, shape, run), shape, train, run, m)?;
    let (x, labels) = link_examples(&model, split)?;
    m.time("evaluation", || {
        let (tr, te) = train_test_split(x.rows(), train_fraction, &mut rng::sub_stream(run.seed, 0x11));
        Ok(evaluate_split(&x, &labels, 2, &tr, &te, cfg)?)
    })
}

fn linkpred(a: &LinkpredArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Linkpred(a.clone()));
    m.seed = Some(a.run.seed);
    let cfg = eval_config(&a.classifier)?;
    check_fraction("--fraction", a.fraction)?;
    check_fraction("--train-fraction", a.train_fraction)?;
    if a.instances == 0 {
        return Err(Error::parameter("--instances must be at least 1"));
    }
    let g = connected_input(load_input(&a.graph, &mut m)?);
    let mut rows = Vec::with_capacity(a.instances);
    for i in 0..a.instances {
        let seed = a.run.seed.wrapping_add(i as u64);
        let split = m.time("splitting", || split_edges_for_linkpred(&g, a.fraction, seed))?;
        m.outputs.extend(write_split(&a.output.join(format!("split-{i}")), &split)?);
        let run = RunArgs { seed, ..a.run };
        let scores = linkpred_instance(&split, &a.bias, &a.shape, &a.train, &run, a.train_fraction, &cfg, &mut m)?;
        log::info!("instance {i}: macro_f1 {:.4}, micro_f1 {:.4}", scores.macro_f1, scores.micro_f1);
        rows.push(ScoreRow { setting: "linkpred".into(), fold: i, scores });
    }
    let scores_path = a.output.join("scores.csv");
    write_scores(&scores_path, &rows)?;
    m.outputs.push(scores_path);
    let mean = F1Scores::mean(&rows.iter().map(|r| r.scores).collect::<Vec<_>>());
    println!("link prediction over {} splits: macro_f1 {:.4}, micro_f1 {:.4}", a.instances, mean.macro_f1, mean.micro_f1);
    m.summary = json!({ "macro_f1": mean.macro_f1, "micro_f1": mean.micro_f1 });
    m.save(&manifest::path_for_dir(&a.output))?;
    Ok(m)
}

fn point_setting(p: &GridPoint) -> String {
    format!("{}:{}", p.walk_type, p.alpha)
}

fn cv_parallel(x: &Matrix, labels: &[Vec<usize>], num_labels: usize, folds: usize, seed: u64, cfg: &EvalConfig, workers: usize) -> Result<Vec<F1Scores>> {
    let splits = kfold(x.rows(), folds, seed)?;
    parallel::thread_pool(workers)?.install(|| {
        splits
            .par_iter()
            .map(|(tr, te)| Ok(evaluate_split(x, labels, num_labels, tr, te, cfg)?))
            .collect()
    })
}

fn sweep_cmd(a: &SweepArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Sweep(a.clone()));
    m.seed = Some(a.run.seed);
    let cfg = eval_config(&a.classifier)?;
    let types: Vec<_> = a.walk_types.iter().map(|&t| t.into()).collect();
    let grid = ParamGrid::new(&types, &a.alphas)?;
    let g = load_input(&a.graph, &mut m)?;
    let workers = a.run.workers();

    let report: SweepReport = match a.task {
        Task::Nodeclass => {
            let path = a.labels.as_ref().ok_or_else(|| Error::parameter("--labels is required for node classification"))?;
            m.inputs.push(path.clone());
            let data = io::load_labels(path)?;
            sweep::sweep(&grid, |p| {
                let bias = BiasArgs { walk_type: mode_of(p), alpha: p.alpha };
                let model = embed_graph(&g, &walk_config(&bias, &a.shape, &a.run), &a.shape, &a.train, &a.run, &mut m)?;
                let x = node_features(&model, &data)?;
                m.time("evaluation", || cv_parallel(&x, &data.labels, data.num_labels(), a.folds, a.run.seed, &cfg, workers))
            })?
        }
        Task::Linkpred => {
            check_fraction("--fraction", a.fraction)?;
            let g = connected_input(g.clone());
            let split = split_edges_for_linkpred(&g, a.fraction, a.run.seed)?;
            sweep::sweep(&grid, |p| {
                let bias = BiasArgs { walk_type: mode_of(p), alpha: p.alpha };
                let model = embed_graph(&split.residual, &walk_config(&bias, &a.shape, &a.run), &a.shape, &a.train, &a.run, &mut m)?;
                let (x, labels) = link_examples(&model, &split)?;
                m.time("evaluation", || cv_parallel(&x, &labels, 2, a.folds, a.run.seed, &cfg, workers))
            })?
        }
    };

    let rows: Vec<ScoreRow> = report
        .rows
        .iter()
        .map(|r| ScoreRow { setting: point_setting(&r.point), fold: r.fold, scores: r.scores })
        .collect();
    write_scores(&a.output, &rows)?;
    m.outputs.push(a.output.clone());
    println!("setting,mean_macro_f1,mean_micro_f1");
    for (p, s) in &report.means {
        println!("{},{:.4},{:.4}", point_setting(p), s.macro_f1, s.micro_f1);
    }
    println!("best: {} (macro_f1 {:.4})", point_setting(&report.best), report.best_scores.macro_f1);
    m.summary = json!({
        "best": { "walk_type": report.best.walk_type.to_string(), "alpha": report.best.alpha },
        "best_macro_f1": report.best_scores.macro_f1,
        "best_micro_f1": report.best_scores.micro_f1,
        "cells": report.means.iter().map(|(p, s)| json!({
            "walk_type": p.walk_type.to_string(), "alpha": p.alpha, "macro_f1": s.macro_f1, "micro_f1": s.micro_f1,
        })).collect::<Vec<_>>(),
    });
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

fn mode_of(p: GridPoint) -> Mode {
    match p.walk_type {
        biasedwalk_core::WalkType::Bfs => Mode::Bfs,
        biasedwalk_core::WalkType::Dfs => Mode::Dfs,
        biasedwalk_core::WalkType::Uniform => Mode::Uniform,
    }
}

/// Timings and memory for one graph size.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub edges: usize,
    pub sampling_seconds: f64,
    pub total_seconds: f64,
    /// Adjacency, corpus and embedding matrices.
    pub structure_bytes: usize,
    /// Peak resident set of the process so far, when the platform reports it.
    pub peak_rss_bytes: Option<u64>,
}

/// Peak resident set size from `/proc/self/status`.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

pub fn bench(a: &BenchArgs) -> Result<(RunManifest, Vec<BenchRow>)> {
    let mut m = RunManifest::new(Command::Bench(a.clone()));
    m.seed = Some(a.run.seed);
    if a.sizes.is_empty() {
        return Err(Error::parameter("--sizes must list at least one graph size"));
    }
    let wcfg = walk_config(&a.bias, &a.shape, &a.run);
    let tcfg = train_config(&a.train, &a.run);
    let mut rows = Vec::new();
    for &n in &a.sizes {
        let g = m.time("generation", || erdos_renyi(n, a.degree, a.run.seed))?;
        let start = Instant::now();
        let corpus = sample(&g, &wcfg, a.shape.num_walks, a.run.workers())?;
        let sampling_seconds = start.elapsed().as_secs_f64();
        let model = parallel::train(&corpus, &tcfg, a.run.workers())?.model;
        let total_seconds = start.elapsed().as_secs_f64();
        let structure_bytes = g.adjacency_bytes() + corpus.heap_bytes() + 2 * model.target_matrix().len() * 8;
        let row = BenchRow { n, edges: g.edge_count(), sampling_seconds, total_seconds, structure_bytes, peak_rss_bytes: peak_rss_bytes() };
        log::info!("n={n}: sampling {sampling_seconds:.2}s, total {total_seconds:.2}s");
        *m.stage_seconds.entry("sampling".into()).or_insert(0.0) += sampling_seconds;
        *m.stage_seconds.entry("training".into()).or_insert(0.0) += total_seconds - sampling_seconds;
        rows.push(row);
    }
    io::write_file(&a.output, |w| {
        use std::io::Write;
        writeln!(w, "n,sampling_seconds,total_seconds,edges,structure_bytes,peak_rss_bytes")?;
        for r in &rows {
            let rss = r.peak_rss_bytes.map(|b| b.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{},{}", r.n, r.sampling_seconds, r.total_seconds, r.edges, r.structure_bytes, rss)?;
        }
        Ok(())
    })?;
    m.outputs.push(a.output.clone());
    m.summary = serde_json::to_value(&rows).map_err(|e| Error::Runtime(e.to_string()))?;
    m.save(&manifest::path_for_file(&a.output))?;
    Ok((m, rows))
}

fn lcc(a: &LccArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Lcc(a.clone()));
    let g = load_input(&a.graph, &mut m)?;
    let lcc = m.time("components", || largest_connected_component(&g));
    println!("kept {} of {} nodes, {} of {} edges", lcc.node_count(), g.node_count(), lcc.edge_count(), g.edge_count());
    io::save_graph(&lcc, &a.output)?;
    m.outputs.push(a.output.clone());
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

fn generate(a: &GenerateArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(Command::Generate(a.clone()));
    m.seed = Some(a.seed);
    let g = m.time("generation", || erdos_renyi(a.nodes, a.degree, a.seed))?;
    io::save_graph(&g, &a.output)?;
    m.outputs.push(a.output.clone());
    m.save(&manifest::path_for_file(&a.output))?;
    Ok(m)
}

/// Re-runs the recorded command; outputs and manifest are rewritten.
pub fn replay(path: &Path) -> Result<RunManifest> {
    let recorded = RunManifest::load(path)?;
    if let Command::Replay(_) = recorded.command {
        return Err(Error::parameter("a manifest cannot record a replay"));
    }
    let deterministic = match &recorded.command {
        Command::Embed(a) => a.run.deterministic,
        Command::Nodeclass(a) => a.run.deterministic || a.embeddings.is_some(),
        Command::Linkpred(a) => a.run.deterministic,
        Command::Sweep(a) => a.run.deterministic,
        Command::Bench(_) => false,
        _ => true,
    };
    if !deterministic {
        log::warn!("the recorded run was not deterministic; outputs may differ");
    }
    run(&recorded.command)
}
