use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::{Graph, NodeId};

/// Component label per node plus component sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub label: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Label of the largest component; ties go to the component holding the
    /// smallest node id.
    pub fn largest(&self) -> Option<usize> {
        let mut first_node = vec![usize::MAX; self.sizes.len()];
        for (node, &c) in self.label.iter().enumerate() {
            if first_node[c] == usize::MAX {
                first_node[c] = node;
            }
        }
        (0..self.sizes.len()).min_by(|&a, &b| {
            self.sizes[b].cmp(&self.sizes[a]).then(first_node[a].cmp(&first_node[b]))
        })
    }

    pub fn members(&self, component: usize) -> Vec<NodeId> {
        self.label
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == component)
            .map(|(node, _)| node)
            .collect()
    }
}

/// Weakly connected components (arc direction ignored).
pub fn connected_components(g: &Graph) -> Components {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        label[root] = c;
        let mut size = 1;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for a in g.out_arcs(u).iter().chain(if g.is_directed() { g.in_arcs(u) } else { &[] }) {
                if label[a.node] == usize::MAX {
                    label[a.node] = c;
                    size += 1;
                    queue.push_back(a.node);
                }
            }
        }
        sizes.push(size);
    }
    Components { label, sizes }
}

/// Strongly connected components by an iterative Tarjan traversal.
pub fn strongly_connected_components(g: &Graph) -> Components {
    const UNSEEN: usize = usize::MAX;
    let n = g.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut frames: Vec<(NodeId, usize)> = Vec::new();
    let mut label = vec![UNSEEN; n];
    let mut sizes = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        frames.push((root, 0));

        while let Some(top) = frames.last_mut() {
            let v = top.0;
            let arcs = g.out_arcs(v);
            if top.1 < arcs.len() {
                let w = arcs[top.1].node;
                top.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            frames.pop();
            if low[v] == index[v] {
                let c = sizes.len();
                let mut size = 0;
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    label[w] = c;
                    size += 1;
                    if w == v {
                        break;
                    }
                }
                sizes.push(size);
            }
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    Components { label, sizes }
}

/// Induced subgraph on the largest connected component: weakly connected for
/// undirected graphs, strongly connected for directed ones.
pub fn largest_connected_component(g: &Graph) -> Graph {
    let comps = if g.is_directed() {
        strongly_connected_components(g)
    } else {
        connected_components(g)
    };
    match comps.largest() {
        Some(c) if comps.sizes[c] < g.node_count() => g.induced_subgraph(&comps.members(c)),
        _ => g.clone(),
    }
}

/// Connectivity in the graph's own sense (strong for directed graphs).
pub fn is_connected(g: &Graph) -> bool {
    let n = g.node_count();
    if n <= 1 {
        return true;
    }
    let reach = |backward: bool| {
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut count = 1;
        let mut todo = vec![0];
        while let Some(u) = todo.pop() {
            let arcs = if backward { g.in_arcs(u) } else { g.out_arcs(u) };
            for a in arcs {
                if !seen[a.node] {
                    seen[a.node] = true;
                    count += 1;
                    todo.push(a.node);
                }
            }
        }
        count
    };
    reach(false) == n && (!g.is_directed() || reach(true) == n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use alloc::string::ToString;

    fn build(directed: bool, edges: &[(usize, usize)], n: usize) -> Graph {
        let mut b = GraphBuilder::with_numbered_nodes(n, directed, false);
        for &(u, v) in edges {
            b.add_edge(u, v, 1.0).unwrap();
        }
        b.build()
    }

    // Reachability-closure oracle: u and v share an SCC iff each reaches the other.
    fn scc_oracle(g: &Graph) -> Vec<Vec<bool>> {
        let n = g.node_count();
        let mut reach = vec![vec![false; n]; n];
        for s in 0..n {
            reach[s][s] = true;
            let mut todo = vec![s];
            while let Some(u) = todo.pop() {
                for a in g.out_arcs(u) {
                    if !reach[s][a.node] {
                        reach[s][a.node] = true;
                        todo.push(a.node);
                    }
                }
            }
        }
        reach
    }

    #[test]
    fn picks_bigger_undirected_component() {
        let g = build(false, &[(0, 1), (3, 4), (4, 2)], 5);
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.node_count(), 3);
        assert_eq!(lcc.names(), &["2".to_string(), "3".to_string(), "4".to_string()]);
        assert!(is_connected(&lcc));
    }

    #[test]
    fn connected_graph_is_identity() {
        let g = build(false, &[(0, 1), (1, 2)], 3);
        assert_eq!(largest_connected_component(&g), g);
    }

    #[test]
    fn directed_cycle_with_pendant() {
        let g = build(true, &[(0, 1), (1, 2), (2, 0), (2, 3)], 4);
        let sccs = strongly_connected_components(&g);
        let reach = scc_oracle(&g);
        for u in 0..4 {
            for v in 0..4 {
                let same = reach[u][v] && reach[v][u];
                assert_eq!(same, sccs.label[u] == sccs.label[v]);
            }
        }
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.node_count(), 3);
        assert_eq!(lcc.edge_count(), 3);
        assert!(is_connected(&lcc));
        assert!(!is_connected(&g));
    }

    #[test]
    fn singleton() {
        let g = GraphBuilder::with_numbered_nodes(1, true, false).build();
        assert_eq!(largest_connected_component(&g), g);
        assert!(is_connected(&g));
    }

    #[test]
    fn tie_prefers_smallest_node() {
        let g = build(false, &[(2, 3), (0, 1)], 4);
        let lcc = largest_connected_component(&g);
        assert_eq!(lcc.names(), &["0".to_string(), "1".to_string()]);
    }
}
