use std::collections::BTreeSet;

use biasedwalk_core::eval::protocol::{node_features, repeated_holdout};
use biasedwalk_core::eval::{hadamard, macro_f1, micro_f1, split_edges_for_linkpred, EvalConfig, LabeledDataset};
use biasedwalk_core::generate::{erdos_renyi, planted_partition};
use biasedwalk_core::graph::{is_connected, largest_connected_component};
use biasedwalk_core::skipgram::train;
use biasedwalk_core::walker::generate_walk_set;
use biasedwalk_core::{EmbeddingModel, TrainConfig, WalkConfig, WalkType};
use proptest::prelude::*;

fn label_sets(n_rows: usize, universe: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::btree_set(0..universe, 0..=universe).prop_map(|s| s.into_iter().collect()), n_rows)
}

// Straight recount from set membership.
fn recount(pred: &[Vec<usize>], truth: &[Vec<usize>], universe: usize) -> (f64, f64) {
    let f1 = |tp: f64, fp: f64, fn_: f64| if tp + fp + fn_ == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) };
    let (mut all_tp, mut all_fp, mut all_fn) = (0.0, 0.0, 0.0);
    let mut per_label = 0.0;
    for l in 0..universe {
        let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for (p, t) in pred.iter().zip(truth) {
            match (p.contains(&l), t.contains(&l)) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                _ => {}
            }
        }
        per_label += f1(tp, fp, fn_);
        all_tp += tp;
        all_fp += fp;
        all_fn += fn_;
    }
    (per_label / universe as f64, f1(all_tp, all_fp, all_fn))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn f1_matches_recount(
        (pred, truth, universe) in (1usize..7, 1usize..12).prop_flat_map(|(k, n)| (label_sets(n, k), label_sets(n, k), Just(k)))
    ) {
        let (macro_want, micro_want) = recount(&pred, &truth, universe);
        prop_assert_eq!(macro_f1(&pred, &truth, universe), macro_want);
        prop_assert_eq!(micro_f1(&pred, &truth), micro_want);
    }
}

proptest! {
    #[test]
    fn hadamard_is_symmetric(values in prop::collection::vec(-10.0f64..10.0, 12)) {
        let tokens = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let m = EmbeddingModel::from_matrices(tokens, 4, values, vec![0.0; 12]).unwrap();
        for (u, v) in [("a", "b"), ("a", "c"), ("b", "c"), ("a", "a")] {
            prop_assert_eq!(hadamard(&m, u, v).unwrap(), hadamard(&m, v, u).unwrap());
        }
    }

    #[test]
    fn random_splits_are_sound(seed in 0u64..1000, fraction in 0.1f64..0.5) {
        let g = largest_connected_component(&erdos_renyi(80, 8.0, seed).unwrap());
        let s = split_edges_for_linkpred(&g, fraction, seed).unwrap();
        prop_assert!(is_connected(&s.residual));
        let residual: BTreeSet<(usize, usize)> = s.residual.edges().map(|(u, v, _)| (u, v)).collect();
        prop_assert!(s.positives.iter().all(|&(u, v)| g.has_arc(u, v) && !residual.contains(&(u, v))));
        prop_assert!(s.negatives.iter().all(|&(u, v)| u < v && !g.has_arc(u, v)));
        prop_assert_eq!(s.negatives.iter().collect::<BTreeSet<_>>().len(), s.negatives.len());
        prop_assert_eq!(residual.len() + s.positives.len(), g.edge_count());
    }
}

#[test]
fn hand_checked_f1() {
    let pred = vec![vec![0], vec![0]];
    let truth = vec![vec![0], vec![1]];
    assert_eq!(macro_f1(&pred, &truth, 2), 1.0 / 3.0);
    assert_eq!(micro_f1(&pred, &truth), 0.5);
}

#[test]
fn planted_communities_are_recovered() {
    let (g, block) = planted_partition(&[50, 50], 0.2, 0.01, 1).unwrap();
    let walks = generate_walk_set(&g, &WalkConfig::new(WalkType::Dfs, 0.5, 40, 1).unwrap(), 10).unwrap();
    let cfg = TrainConfig { dim: 32, window: 5, epochs: 3, seed: 1, deterministic: true, ..TrainConfig::default() };
    let model = train(&walks, &cfg).unwrap().model;
    let data = LabeledDataset {
        nodes: g.names().to_vec(),
        labels: block.iter().map(|&b| vec![b]).collect(),
        label_names: vec!["0".into(), "1".into()],
    };
    let x = node_features(&model, &data).unwrap();
    let scores = repeated_holdout(&x, &data.labels, 2, 0.5, 5, 1, &EvalConfig::default()).unwrap();
    let mean = scores.iter().map(|s| s.macro_f1).sum::<f64>() / scores.len() as f64;
    assert!(mean >= 0.9, "macro-F1 {mean}");
}
