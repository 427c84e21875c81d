//! Edge splits for link prediction.
//!
//! A random spanning structure (a spanning tree, or for directed graphs an
//! out-tree plus an in-tree through one root) is pinned first. The removed
//! edges are then drawn uniformly from everything else, so the residual graph
//! stays connected by construction.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::EvalError;
use crate::graph::{is_connected, Graph, GraphBuilder, NodeId};
use crate::rng::{self, Rng as StdRng};

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPredSplit {
    /// Original node set minus the removed edges.
    pub residual: Graph,
    /// Removed edges (`u < v` for undirected graphs), sorted.
    pub positives: Vec<(NodeId, NodeId)>,
    /// Sampled pairs that are not edges of the original graph, sorted.
    pub negatives: Vec<(NodeId, NodeId)>,
    pub seed: u64,
}

pub fn split_edges_for_linkpred(g: &Graph, fraction: f64, seed: u64) -> Result<LinkPredSplit, EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::InvalidParameter("removal fraction must lie in (0, 1)"));
    }
    if g.node_count() < 2 || !is_connected(g) {
        return Err(EvalError::Disconnected);
    }
    let mut rng = rng::seeded(seed);
    let edges: Vec<(NodeId, NodeId, f64)> = g.edges().collect();
    let pinned = if g.is_directed() {
        pin_strong_backbone(g, &mut rng)
    } else {
        pin_spanning_tree(g, &edges, &mut rng)
    };
    let mut pool: Vec<usize> = (0..edges.len()).filter(|&i| !pinned[i]).collect();
    let requested = libm::round(fraction * edges.len() as f64) as usize;
    if pool.len() < requested {
        return Err(EvalError::InsufficientRemovableEdges { requested, available: pool.len() });
    }
    let (chosen, _) = pool.partial_shuffle(&mut rng, requested);
    let mut removed = vec![false; edges.len()];
    for &i in chosen.iter() {
        removed[i] = true;
    }

    let mut b = GraphBuilder::new(g.is_directed(), g.is_weighted());
    for name in g.names() {
        b.node(name);
    }
    let mut positives = Vec::with_capacity(requested);
    for (i, &(u, v, w)) in edges.iter().enumerate() {
        if removed[i] {
            positives.push((u, v));
        } else {
            b.add_edge(u, v, w)?;
        }
    }
    positives.sort_unstable();
    let negatives = sample_non_edges(g, requested, &mut rng)?;
    Ok(LinkPredSplit { residual: b.build(), positives, negatives, seed })
}

// Random-order Kruskal over `edges`.
fn pin_spanning_tree(g: &Graph, edges: &[(NodeId, NodeId, f64)], rng: &mut StdRng) -> Vec<bool> {
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut parent: Vec<usize> = (0..g.node_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut pinned = vec![false; edges.len()];
    for i in order {
        let (u, v, _) = edges[i];
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            pinned[i] = true;
        }
    }
    pinned
}

// Breadth-first out-tree and in-tree from a random root, children visited in
// random order. Their union keeps every node reachable from and to the root.
fn pin_strong_backbone(g: &Graph, rng: &mut StdRng) -> Vec<bool> {
    let n = g.node_count();
    let mut first_arc = vec![0usize; n + 1];
    for u in 0..n {
        first_arc[u + 1] = first_arc[u] + g.degree(u);
    }
    let arc_index = |u: NodeId, v: NodeId| {
        let pos = g.out_arcs(u).binary_search_by(|a| a.node.cmp(&v)).expect("arc exists");
        first_arc[u] + pos
    };
    let root = rng.gen_range(0..n);
    let mut pinned = vec![false; g.arc_count()];
    for backward in [false, true] {
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut next: Vec<NodeId> = Vec::new();
        while let Some(u) = queue.pop_front() {
            let arcs = if backward { g.in_arcs(u) } else { g.out_arcs(u) };
            next.clear();
            next.extend(arcs.iter().map(|a| a.node));
            next.shuffle(rng);
            for &v in &next {
                if !seen[v] {
                    seen[v] = true;
                    pinned[if backward { arc_index(v, u) } else { arc_index(u, v) }] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    pinned
}

// Uniform distinct pairs absent from `g`: unordered for undirected graphs
// (stored `u < v`), ordered arcs for directed ones.
fn sample_non_edges(g: &Graph, count: usize, rng: &mut StdRng) -> Result<Vec<(NodeId, NodeId)>, EvalError> {
    let n = g.node_count() as u64;
    let total_pairs = if g.is_directed() { n * (n - 1) } else { n * (n - 1) / 2 };
    let available = (total_pairs - g.edge_count() as u64) as usize;
    if available < count {
        return Err(EvalError::InsufficientNonEdges { requested: count, available });
    }
    let mut chosen = BTreeSet::new();
    while chosen.len() < count {
        let u = rng.gen_range(0..g.node_count());
        let v = rng.gen_range(0..g.node_count());
        if u == v {
            continue;
        }
        let pair = if g.is_directed() { (u, v) } else { (u.min(v), u.max(v)) };
        if !g.has_arc(pair.0, pair.1) {
            chosen.insert(pair);
        }
    }
    Ok(chosen.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;

    fn cycle(n: usize, directed: bool) -> Graph {
        let mut b = GraphBuilder::with_numbered_nodes(n, directed, false);
        for i in 0..n {
            b.add_edge(i, (i + 1) % n, 1.0).unwrap();
        }
        b.build()
    }

    fn check_sound(g: &Graph, s: &LinkPredSplit) {
        assert!(is_connected(&s.residual));
        assert_eq!(s.positives.len(), s.negatives.len());
        assert_eq!(s.residual.edge_count() + s.positives.len(), g.edge_count());
        for &(u, v) in &s.positives {
            assert!(g.has_arc(u, v));
            assert!(!s.residual.has_arc(u, v));
        }
        for &(u, v) in &s.negatives {
            assert!(!g.has_arc(u, v));
            assert_ne!(u, v);
        }
    }

    #[test]
    fn four_cycle_cannot_lose_half() {
        // Any two removed edges of a 4-cycle disconnect it.
        let err = split_edges_for_linkpred(&cycle(4, false), 0.5, 0).unwrap_err();
        assert_eq!(err, EvalError::InsufficientRemovableEdges { requested: 2, available: 1 });
    }

    #[test]
    fn four_cycle_single_removal() {
        let g = cycle(4, false);
        for seed in 0..20 {
            let s = split_edges_for_linkpred(&g, 0.25, seed).unwrap();
            assert_eq!(s.positives.len(), 1);
            check_sound(&g, &s);
        }
    }

    #[test]
    fn tree_is_rejected() {
        let mut b = GraphBuilder::with_numbered_nodes(5, false, false);
        for i in 1..5 {
            b.add_edge(0, i, 1.0).unwrap();
        }
        assert!(matches!(
            split_edges_for_linkpred(&b.build(), 0.5, 1),
            Err(EvalError::InsufficientRemovableEdges { .. })
        ));
    }

    #[test]
    fn complete_graph_has_no_negatives() {
        let g = generate::erdos_renyi(5, 4.0, 0).unwrap();
        assert!(matches!(
            split_edges_for_linkpred(&g, 0.5, 1),
            Err(EvalError::InsufficientNonEdges { .. })
        ));
    }

    #[test]
    fn random_graphs_split_soundly() {
        let g = crate::graph::largest_connected_component(&generate::erdos_renyi(200, 8.0, 3).unwrap());
        for seed in 0..5 {
            let s = split_edges_for_linkpred(&g, 0.5, seed).unwrap();
            check_sound(&g, &s);
            assert_eq!(s, split_edges_for_linkpred(&g, 0.5, seed).unwrap());
        }
    }

    #[test]
    fn directed_split_stays_strongly_connected() {
        let mut b = GraphBuilder::with_numbered_nodes(30, true, false);
        for i in 0..30 {
            for d in [1, 2, 7] {
                b.add_edge(i, (i + d) % 30, 1.0).unwrap();
            }
        }
        let g = b.build();
        // At most 2 * 29 arcs are pinned, leaving at least 32 removable.
        for seed in 0..5 {
            let s = split_edges_for_linkpred(&g, 0.3, seed).unwrap();
            check_sound(&g, &s);
        }
        assert!(matches!(split_edges_for_linkpred(&cycle(6, true), 0.5, 0), Err(EvalError::InsufficientRemovableEdges { .. })));
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let g = GraphBuilder::with_numbered_nodes(3, false, false).build();
        assert_eq!(split_edges_for_linkpred(&g, 0.5, 0), Err(EvalError::Disconnected));
        assert!(split_edges_for_linkpred(&cycle(5, false), 1.0, 0).is_err());
    }
}
