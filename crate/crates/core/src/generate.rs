//! Synthetic graphs for benchmarks and tests.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::graph::{Graph, GraphBuilder, GraphError};
use crate::rng;

/// Undirected `G(n, m)` graph with `m = round(n * avg_degree / 2)` distinct
/// edges drawn uniformly. Nodes are named `"0".."n-1"`.
pub fn erdos_renyi(n: usize, avg_degree: f64, seed: u64) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameter("node count must be at least 1"));
    }
    if !(avg_degree.is_finite() && avg_degree >= 0.0) {
        return Err(GraphError::InvalidParameter("average degree must be finite and non-negative"));
    }
    let m = libm::round(n as f64 * avg_degree / 2.0) as u64;
    let pairs = n as u64 * (n as u64 - 1) / 2;
    if m > pairs {
        return Err(GraphError::TooManyEdges { requested: m, max: pairs, nodes: n });
    }
    let mut rng = rng::seeded(seed);
    // Floyd's sampling of m distinct pair indices out of `pairs`.
    let mut chosen = BTreeSet::new();
    for j in (pairs - m)..pairs {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut b = GraphBuilder::with_numbered_nodes(n, false, false);
    for k in chosen {
        let (u, v) = pair_from_index(k);
        b.add_edge(u, v, 1.0)?;
    }
    Ok(b.build())
}

// Pair index k enumerates (i, j), i < j, as j*(j-1)/2 + i.
fn pair_from_index(k: u64) -> (usize, usize) {
    let mut j = (((1.0 + libm::sqrt(1.0 + 8.0 * k as f64)) / 2.0) as u64).max(1);
    while j * (j - 1) / 2 > k {
        j -= 1;
    }
    while (j + 1) * j / 2 <= k {
        j += 1;
    }
    let i = k - j * (j - 1) / 2;
    (i as usize, j as usize)
}

/// Planted partition: blocks of the given sizes, each pair linked with
/// probability `p_in` inside a block and `p_out` across blocks.
/// Returns the graph and the block index of every node.
pub fn planted_partition(
    block_sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, Vec<usize>), GraphError> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(GraphError::InvalidParameter("edge probabilities must lie in [0, 1]"));
    }
    let block: Vec<usize> = block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| core::iter::repeat_n(b, size))
        .collect();
    let n = block.len();
    let mut rng = rng::seeded(seed);
    let mut b = GraphBuilder::with_numbered_nodes(n, false, false);
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                b.add_edge(u, v, 1.0)?;
            }
        }
    }
    Ok((b.build(), block))
}

/// `rows x cols` 4-neighbour lattice; node `r * cols + c` sits at `(r, c)`.
pub fn grid(rows: usize, cols: usize) -> Graph {
    let mut b = GraphBuilder::with_numbered_nodes(rows * cols, false, false);
    for r in 0..rows {
        for c in 0..cols {
            let u = r * cols + c;
            if c + 1 < cols {
                b.add_edge(u, u + 1, 1.0).expect("grid ids are in range");
            }
            if r + 1 < rows {
                b.add_edge(u, u + cols, 1.0).expect("grid ids are in range");
            }
        }
    }
    b.build()
}
