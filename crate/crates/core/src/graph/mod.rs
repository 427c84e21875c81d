//! Compressed adjacency graphs.
//!
//! Nodes carry an external string token and a dense internal id in
//! `0..node_count`. Out-arcs of every node are stored contiguously and sorted
//! by target id; directed graphs also keep the reverse (in-arc) lists.
//! Undirected edges are stored once in each endpoint's list.

mod components;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::mem::size_of;

pub use components::{
    connected_components, is_connected, largest_connected_component,
    strongly_connected_components, Components,
};

/// Dense internal node id.
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} out of range (graph has {node_count} nodes)")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("edge weight {weight} is not a finite positive number")]
    InvalidWeight { weight: String },
    #[error("requested {requested} edges but at most {max} fit on {nodes} nodes")]
    TooManyEdges { requested: u64, max: u64, nodes: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// One entry of an adjacency list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node: NodeId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    directed: bool,
    weighted: bool,
    offsets: Vec<usize>,
    arcs: Vec<Neighbor>,
    // In-arc lists; empty for undirected graphs.
    rev_offsets: Vec<usize>,
    rev_arcs: Vec<Neighbor>,
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// Number of stored arcs: `2|E|` for undirected graphs, `|E|` for directed.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arcs.len()
        } else {
            self.arcs.len() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Whether edge weights take part in walk transitions and proximity updates.
    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn average_degree(&self) -> f64 {
        if self.names.is_empty() {
            0.0
        } else {
            self.arcs.len() as f64 / self.names.len() as f64
        }
    }

    /// Out-neighbors of `u` (all neighbors for undirected graphs), sorted by id.
    pub fn neighbors(&self, u: NodeId) -> Result<&[Neighbor], GraphError> {
        self.check(u)?;
        Ok(self.out_arcs(u))
    }

    /// In-neighbors of `u`. Same as [`Graph::neighbors`] for undirected graphs.
    pub fn in_neighbors(&self, u: NodeId) -> Result<&[Neighbor], GraphError> {
        self.check(u)?;
        Ok(self.in_arcs(u))
    }

    /// Unchecked variant of [`Graph::neighbors`]; panics when `u` is out of range.
    #[inline]
    pub fn out_arcs(&self, u: NodeId) -> &[Neighbor] {
        &self.arcs[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn in_arcs(&self, u: NodeId) -> &[Neighbor] {
        if self.directed {
            &self.rev_arcs[self.rev_offsets[u]..self.rev_offsets[u + 1]]
        } else {
            self.out_arcs(u)
        }
    }

    /// Asks the CPU to start loading the arc lists of `u`. Only a hint: it
    /// changes no state and compiles to nothing off x86-64.
    #[inline]
    pub fn prefetch(&self, u: NodeId) {
        #[cfg(target_arch = "x86_64")]
        {
            fn lines(arcs: &[Neighbor]) {
                use core::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
                let bytes = core::mem::size_of_val(arcs);
                let base = arcs.as_ptr() as *const i8;
                for off in (0..bytes).step_by(64) {
                    // SAFETY: SSE is part of the x86-64 baseline, and a
                    // prefetch never faults, whatever the address.
                    unsafe { _mm_prefetch::<_MM_HINT_T0>(base.wrapping_add(off)) };
                }
            }
            lines(self.out_arcs(u));
            if self.directed {
                lines(self.in_arcs(u));
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = u;
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn arc_weight(&self, u: NodeId, v: NodeId) -> Option<f64> {
        if u >= self.node_count() {
            return None;
        }
        let arcs = self.out_arcs(u);
        arcs.binary_search_by(|a| a.node.cmp(&v)).ok().map(|i| arcs[i].weight)
    }

    pub fn has_arc(&self, u: NodeId, v: NodeId) -> bool {
        self.arc_weight(u, v).is_some()
    }

    pub fn name(&self, u: NodeId) -> &str {
        &self.names[u]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// Every edge once: `(u, v, w)` with `u < v` for undirected graphs, every
    /// arc for directed ones. Ordered by `u`, then `v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let directed = self.directed;
        (0..self.node_count()).flat_map(move |u| {
            self.out_arcs(u)
                .iter()
                .filter(move |a| directed || a.node > u)
                .map(move |a| (u, a.node, a.weight))
        })
    }

    /// Heap bytes held by the adjacency arrays (names excluded).
    pub fn adjacency_bytes(&self) -> usize {
        (self.offsets.len() + self.rev_offsets.len()) * size_of::<usize>()
            + (self.arcs.len() + self.rev_arcs.len()) * size_of::<Neighbor>()
    }

    /// Subgraph induced by `keep`. Ids are reassigned in increasing order of
    /// the original ids; names and weights are carried over.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Graph {
        let mut keep: Vec<NodeId> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut remap = alloc::vec![usize::MAX; self.node_count()];
        let mut builder = GraphBuilder::new(self.directed, self.weighted);
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
            builder.node(&self.names[old]);
        }
        for &old in &keep {
            for a in self.out_arcs(old) {
                let target = remap[a.node];
                if target == usize::MAX || (!self.directed && a.node < old) {
                    continue;
                }
                builder.push_arc(remap[old], target, a.weight);
            }
        }
        builder.build()
    }

    fn check(&self, u: NodeId) -> Result<(), GraphError> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange { node: u, node_count: self.node_count() })
        }
    }
}

/// Accumulates nodes and edges, then packs them into a [`Graph`].
///
/// Self-loops are dropped and counted. Repeated edges are merged by summing
/// their weights.
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    directed: bool,
    weighted: bool,
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    arcs: Vec<(NodeId, NodeId, f64)>,
    self_loops: usize,
}

impl GraphBuilder {
    pub fn new(directed: bool, weighted: bool) -> Self {
        GraphBuilder {
            directed,
            weighted,
            names: Vec::new(),
            index: BTreeMap::new(),
            arcs: Vec::new(),
            self_loops: 0,
        }
    }

    /// Builder pre-populated with nodes named `"0"`, `"1"`, ... `n-1`.
    pub fn with_numbered_nodes(n: usize, directed: bool, weighted: bool) -> Self {
        let mut b = GraphBuilder::new(directed, weighted);
        for i in 0..n {
            b.node(&i.to_string());
        }
        b
    }

    /// Interns `name`, returning its id (new ids follow first appearance).
    pub fn node(&mut self, name: &str) -> NodeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops
    }

    /// Adds an edge between two named nodes. A self-loop is counted and
    /// skipped without interning its token.
    pub fn add_named_edge(&mut self, src: &str, dst: &str, weight: f64) -> Result<(), GraphError> {
        check_weight(weight)?;
        if src == dst {
            self.self_loops += 1;
            return Ok(());
        }
        let u = self.node(src);
        let v = self.node(dst);
        self.arcs.push((u, v, weight));
        Ok(())
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId, weight: f64) -> Result<(), GraphError> {
        check_weight(weight)?;
        let n = self.names.len();
        for node in [u, v] {
            if node >= n {
                return Err(GraphError::NodeOutOfRange { node, node_count: n });
            }
        }
        if u == v {
            self.self_loops += 1;
            return Ok(());
        }
        self.arcs.push((u, v, weight));
        Ok(())
    }

    // Caller guarantees validity.
    fn push_arc(&mut self, u: NodeId, v: NodeId, weight: f64) {
        self.arcs.push((u, v, weight));
    }

    pub fn build(self) -> Graph {
        let GraphBuilder { directed, weighted, names, index, mut arcs, self_loops } = self;
        if self_loops > 0 {
            log::warn!("dropped {self_loops} self-loop(s)");
        }
        if !directed {
            for arc in arcs.iter_mut() {
                if arc.0 > arc.1 {
                    core::mem::swap(&mut arc.0, &mut arc.1);
                }
            }
        }
        arcs.sort_unstable_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(arcs.len());
        for (u, v, w) in arcs {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }
        let n = names.len();
        let (offsets, arcs) = if directed {
            pack(n, merged.iter().map(|&(u, v, w)| (u, v, w)))
        } else {
            pack(n, merged.iter().flat_map(|&(u, v, w)| [(u, v, w), (v, u, w)]))
        };
        let (rev_offsets, rev_arcs) = if directed {
            pack(n, merged.iter().map(|&(u, v, w)| (v, u, w)))
        } else {
            (Vec::new(), Vec::new())
        };
        Graph { directed, weighted, offsets, arcs, rev_offsets, rev_arcs, names, index }
    }
}

fn check_weight(weight: f64) -> Result<(), GraphError> {
    if weight.is_finite() && weight > 0.0 {
        Ok(())
    } else {
        Err(GraphError::InvalidWeight { weight: alloc::format!("{weight}") })
    }
}

// Counting-sort arcs into offset-indexed rows, each row sorted by target.
fn pack<I>(n: usize, arcs: I) -> (Vec<usize>, Vec<Neighbor>)
where
    I: Iterator<Item = (NodeId, NodeId, f64)> + Clone,
{
    let mut offsets = alloc::vec![0usize; n + 1];
    for (u, _, _) in arcs.clone() {
        offsets[u + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut packed = alloc::vec![Neighbor { node: 0, weight: 0.0 }; offsets[n]];
    for (u, v, w) in arcs {
        packed[cursor[u]] = Neighbor { node: v, weight: w };
        cursor[u] += 1;
    }
    for u in 0..n {
        packed[offsets[u]..offsets[u + 1]].sort_unstable_by_key(|a| a.node);
    }
    (offsets, packed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn undirected(edges: &[(&str, &str)]) -> Graph {
        let mut b = GraphBuilder::new(false, false);
        for (s, d) in edges {
            b.add_named_edge(s, d, 1.0).unwrap();
        }
        b.build()
    }

    #[test]
    fn path_of_three() {
        let g = undirected(&[("a", "b"), ("b", "c")]);
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.arc_count(), 4);
        assert_eq!(g.degree(g.node_id("b").unwrap()), 2);
        assert_eq!(g.neighbors(0).unwrap(), &[Neighbor { node: 1, weight: 1.0 }]);
        assert_eq!(g.average_degree(), 4.0 / 3.0);
    }

    #[test]
    fn duplicates_merge_by_sum() {
        let g = undirected(&[("0", "1"), ("1", "0")]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.arc_weight(0, 1), Some(2.0));
        assert_eq!(g.arc_weight(1, 0), Some(2.0));
    }

    #[test]
    fn self_loops_are_dropped() {
        let mut b = GraphBuilder::new(false, false);
        b.add_named_edge("x", "x", 1.0).unwrap();
        b.add_named_edge("a", "b", 1.0).unwrap();
        assert_eq!(b.self_loops_dropped(), 1);
        let g = b.build();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.node_id("x"), None);
    }

    #[test]
    fn rejects_bad_weights() {
        let mut b = GraphBuilder::new(false, true);
        assert!(b.add_named_edge("0", "1", -3.0).is_err());
        assert!(b.add_named_edge("0", "1", 0.0).is_err());
        assert!(b.add_named_edge("0", "1", f64::NAN).is_err());
    }

    #[test]
    fn directed_semantics() {
        let mut b = GraphBuilder::new(true, false);
        b.add_named_edge("a", "b", 1.0).unwrap();
        let g = b.build();
        assert_eq!(g.neighbors(1).unwrap(), &[]);
        assert_eq!(g.in_neighbors(1).unwrap(), &[Neighbor { node: 0, weight: 1.0 }]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.average_degree(), 0.5);
    }

    #[test]
    fn isolated_and_out_of_range() {
        let g = GraphBuilder::with_numbered_nodes(2, false, false).build();
        assert!(g.neighbors(1).unwrap().is_empty());
        assert_eq!(
            g.neighbors(2),
            Err(GraphError::NodeOutOfRange { node: 2, node_count: 2 })
        );
    }

    #[test]
    fn offsets_are_consistent() {
        let g = undirected(&[("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")]);
        assert!(g.offsets.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*g.offsets.last().unwrap(), g.arc_count());
        for u in 0..g.node_count() {
            for a in g.out_arcs(u) {
                assert!(g.has_arc(a.node, u));
            }
        }
    }

    #[test]
    fn induced_subgraph_keeps_names() {
        let g = undirected(&[("a", "b"), ("b", "c"), ("c", "d")]);
        let sub = g.induced_subgraph(&[3, 2]);
        assert_eq!(sub.names(), &["c".to_string(), "d".to_string()]);
        assert_eq!(sub.edge_count(), 1);
        let edges: Vec<_> = sub.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1.0)]);
    }
}
