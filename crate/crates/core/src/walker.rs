//! Proximity-biased random walks.
//!
//! A walk keeps a score `τ_v` for every node adjacent to something it has
//! already expanded. Expanding the `i`-th node of the walk adds `α^(i-1)` to
//! each of its neighbours (in- and out-neighbours on directed graphs), so
//! nodes close to the source collect large scores. The next node is then
//! drawn among the out-neighbours of the current node with probability
//! proportional to `τ_v` (BFS-like, stays local) or to `1/τ_v` (DFS-like,
//! moves outward). Scores persist for the lifetime of one walk.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::corpus::{Corpus, CorpusError};
use crate::graph::{Graph, GraphError, Neighbor, NodeId};
use crate::rng;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("maximum walk length must be at least 1")]
    InvalidLength,
    #[error("number of walks per node must be at least 1")]
    InvalidWalksPerNode,
    #[error("node {0} has no out-neighbours")]
    DeadEnd(NodeId),
    #[error("candidate node {node} has non-positive proximity score {score}")]
    InvalidProximity { node: NodeId, score: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WalkType {
    Bfs,
    Dfs,
    /// Unbiased walk (weight-proportional); `alpha` is ignored.
    Uniform,
}

impl fmt::Display for WalkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkType::Bfs => "bfs",
            WalkType::Dfs => "dfs",
            WalkType::Uniform => "uniform",
        })
    }
}

impl FromStr for WalkType {
    type Err = &'static str;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bfs" => Ok(WalkType::Bfs),
            "dfs" => Ok(WalkType::Dfs),
            "uniform" => Ok(WalkType::Uniform),
            _ => Err("expected one of: bfs, dfs, uniform"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub walk_type: WalkType,
    pub alpha: f64,
    pub max_length: usize,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig { walk_type: WalkType::Dfs, alpha: 0.5, max_length: 80, seed: 0 }
    }
}

impl WalkConfig {
    pub fn new(walk_type: WalkType, alpha: f64, max_length: usize, seed: u64) -> Result<Self, WalkError> {
        let cfg = WalkConfig { walk_type, alpha, max_length, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        if self.walk_type != WalkType::Uniform && !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(WalkError::InvalidAlpha(self.alpha));
        }
        if self.max_length == 0 {
            return Err(WalkError::InvalidLength);
        }
        Ok(())
    }
}

/// Per-walk proximity scores in a small open-addressing table. A walk only
/// touches the neighbourhoods it expands, so the table stays cache-resident
/// however large the graph is, and is reused across walks.
#[derive(Debug, Clone)]
pub struct ProximityMap {
    slots: Vec<(NodeId, f64)>,
    // Occupied slot indices, for O(touched) clearing and iteration.
    used: Vec<usize>,
}

const EMPTY: NodeId = NodeId::MAX;

impl ProximityMap {
    pub fn new() -> Self {
        ProximityMap { slots: vec![(EMPTY, 0.0); 64], used: Vec::new() }
    }

    #[inline]
    fn home(&self, node: NodeId) -> usize {
        // Fibonacci hashing onto a power-of-two table.
        ((node as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32) as usize & (self.slots.len() - 1)
    }

    #[inline]
    pub fn get(&self, node: NodeId) -> Option<f64> {
        let mask = self.slots.len() - 1;
        let mut i = self.home(node);
        loop {
            match self.slots[i] {
                (k, v) if k == node => return Some(v),
                (EMPTY, _) => return None,
                _ => i = (i + 1) & mask,
            }
        }
    }

    pub fn len(&self) -> usize {
        self.used.len()
    }

    pub fn is_empty(&self) -> bool {
        self.used.is_empty()
    }

    /// Scored nodes in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let mut entries: Vec<(NodeId, f64)> = self.used.iter().map(|&i| self.slots[i]).collect();
        entries.sort_unstable_by_key(|e| e.0);
        entries.into_iter()
    }

    pub fn clear(&mut self) {
        for &i in &self.used {
            self.slots[i] = (EMPTY, 0.0);
        }
        self.used.clear();
    }

    #[inline]
    fn bump(&mut self, node: NodeId, amount: f64) {
        if 2 * (self.used.len() + 1) > self.slots.len() {
            self.grow();
        }
        let mask = self.slots.len() - 1;
        let mut i = self.home(node);
        loop {
            match &mut self.slots[i] {
                (k, v) if *k == node => {
                    *v += amount;
                    return;
                }
                slot @ (EMPTY, _) => {
                    *slot = (node, amount);
                    self.used.push(i);
                    return;
                }
                _ => i = (i + 1) & mask,
            }
        }
    }

    fn grow(&mut self) {
        let entries: Vec<(NodeId, f64)> = self.used.iter().map(|&i| self.slots[i]).collect();
        self.slots = vec![(EMPTY, 0.0); 2 * self.slots.len()];
        self.used.clear();
        for (k, v) in entries {
            self.bump(k, v);
        }
    }
}

impl Default for ProximityMap {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for ProximityMap {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().eq(other.iter())
    }
}

/// `α^(step_index - 1)`: the score a node contributes when it is the
/// `step_index`-th node of the walk (1-based).
#[inline]
pub fn proximity_increment(alpha: f64, step_index: usize) -> f64 {
    libm::pow(alpha, (step_index - 1) as f64)
}

/// Adds `weight · α^(step_index-1)` to the score of every neighbour of `u`.
/// On directed graphs both in- and out-neighbours are touched, once each;
/// a node that is both uses the out-arc weight. Unweighted graphs use weight 1.
pub fn update_proximity(tau: &mut ProximityMap, g: &Graph, u: NodeId, step_index: usize, alpha: f64) {
    debug_assert!(step_index >= 1);
    add_to_neighbourhood(tau, g, u, proximity_increment(alpha, step_index));
}

#[inline]
fn add_to_neighbourhood(tau: &mut ProximityMap, g: &Graph, u: NodeId, inc: f64) {
    let weighted = g.is_weighted();
    let mut bump = |a: &Neighbor| tau.bump(a.node, if weighted { a.weight * inc } else { inc });
    let out = g.out_arcs(u);
    if !g.is_directed() {
        out.iter().for_each(&mut bump);
        return;
    }
    let inn = g.in_arcs(u);
    let (mut i, mut j) = (0, 0);
    loop {
        match (out.get(i), inn.get(j)) {
            (Some(a), Some(b)) if a.node == b.node => {
                bump(a);
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a.node < b.node => {
                bump(a);
                i += 1;
            }
            (Some(_), Some(b)) | (None, Some(b)) => {
                bump(b);
                j += 1;
            }
            (Some(a), None) => {
                bump(a);
                i += 1;
            }
            (None, None) => break,
        }
    }
}

// Unnormalised transition weights over `arcs`; returns their sum.
fn transition_weights(
    tau: &ProximityMap,
    arcs: &[Neighbor],
    walk_type: WalkType,
    weighted: bool,
    out: &mut Vec<f64>,
) -> Result<f64, WalkError> {
    out.clear();
    let mut total = 0.0;
    for a in arcs {
        let w = match walk_type {
            WalkType::Uniform => {
                if weighted {
                    a.weight
                } else {
                    1.0
                }
            }
            WalkType::Bfs | WalkType::Dfs => {
                let score = tau.get(a.node).unwrap_or(0.0);
                if score.is_nan() || score <= 0.0 {
                    return Err(WalkError::InvalidProximity { node: a.node, score });
                }
                if walk_type == WalkType::Bfs {
                    score
                } else {
                    1.0 / score
                }
            }
        };
        out.push(w);
        total += w;
    }
    Ok(total)
}

/// Next-step distribution over the out-neighbours of `u`, in adjacency order.
/// Scores must already include the update for `u` itself.
pub fn transition_distribution(
    tau: &ProximityMap,
    g: &Graph,
    u: NodeId,
    walk_type: WalkType,
) -> Result<Vec<(NodeId, f64)>, WalkError> {
    let arcs = g.neighbors(u)?;
    if arcs.is_empty() {
        return Err(WalkError::DeadEnd(u));
    }
    let mut weights = Vec::with_capacity(arcs.len());
    let total = transition_weights(tau, arcs, walk_type, g.is_weighted(), &mut weights)?;
    Ok(arcs.iter().zip(weights).map(|(a, w)| (a.node, w / total)).collect())
}

// Inverse-CDF draw over `weights` in order.
fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Rounding left `target` past the last cumulative sum.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub nodes: Vec<NodeId>,
}

impl Walk {
    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// One in-flight walk. Buffers are reused across [`WalkState::start`] calls.
#[derive(Debug, Clone)]
pub struct WalkState<'g> {
    graph: &'g Graph,
    config: WalkConfig,
    nodes: Vec<NodeId>,
    tau: ProximityMap,
    // powers[i] = α^i, the increment of the (i+1)-th walk node.
    powers: Vec<f64>,
    weights: Vec<f64>,
    finished: bool,
}

impl<'g> WalkState<'g> {
    pub fn new(graph: &'g Graph, config: WalkConfig) -> Result<Self, WalkError> {
        config.validate()?;
        Ok(WalkState {
            graph,
            config,
            nodes: Vec::with_capacity(config.max_length),
            tau: ProximityMap::new(),
            powers: (1..config.max_length).map(|i| proximity_increment(config.alpha, i)).collect(),
            weights: Vec::new(),
            finished: true,
        })
    }

    pub fn start(&mut self, source: NodeId) -> Result<(), WalkError> {
        self.graph.neighbors(source)?;
        self.nodes.clear();
        self.nodes.push(source);
        self.tau.clear();
        self.finished = false;
        Ok(())
    }

    /// Extends the walk by one node. Returns `None` once the walk has reached
    /// its maximum length or sits on a node without out-neighbours.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<NodeId> {
        if self.finished {
            return None;
        }
        let step = self.nodes.len();
        let u = self.nodes[step - 1];
        let arcs = self.graph.out_arcs(u);
        if step >= self.config.max_length || arcs.is_empty() {
            self.finished = true;
            return None;
        }
        if self.config.walk_type != WalkType::Uniform {
            add_to_neighbourhood(&mut self.tau, self.graph, u, self.powers[step - 1]);
        }
        let total = transition_weights(
            &self.tau,
            arcs,
            self.config.walk_type,
            self.graph.is_weighted(),
            &mut self.weights,
        )
        .expect("every out-neighbour was just scored");
        let next = arcs[sample_index(&self.weights, total, rng)].node;
        self.nodes.push(next);
        Some(next)
    }

    pub fn run<R: Rng + ?Sized>(&mut self, rng: &mut R) -> &[NodeId] {
        while self.advance(rng).is_some() {}
        &self.nodes
    }

    /// Runs the `repetition`-th walk from `source` on its own seeded stream.
    pub fn walk_from(&mut self, source: NodeId, repetition: usize) -> Result<&[NodeId], WalkError> {
        self.start(source)?;
        let mut rng = rng::walk_stream(self.config.seed, source, repetition);
        Ok(self.run(&mut rng))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn proximity(&self) -> &ProximityMap {
        &self.tau
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }
}

/// Several walks from one source advanced in lockstep. Each lane's next
/// adjacency list is prefetched while the other lanes take their steps, which
/// hides memory latency once the graph no longer fits in cache. Every lane
/// draws from its own `(source, repetition)` stream, so the walks are
/// identical to those of [`WalkState::walk_from`].
#[derive(Debug, Clone)]
pub struct WalkLanes<'g> {
    graph: &'g Graph,
    lanes: Vec<(WalkState<'g>, rng::Rng)>,
}

impl<'g> WalkLanes<'g> {
    pub fn new(graph: &'g Graph, config: WalkConfig, width: usize) -> Result<Self, WalkError> {
        let state = WalkState::new(graph, config)?;
        let lanes = (0..width.max(1)).map(|_| (state.clone(), rng::seeded(0))).collect();
        Ok(WalkLanes { graph, lanes })
    }

    /// Runs repetitions `0..count` from `source` and hands each finished walk
    /// to `emit`, in repetition order.
    pub fn walks_from<E: From<WalkError>>(
        &mut self,
        source: NodeId,
        count: usize,
        mut emit: impl FnMut(&[NodeId]) -> Result<(), E>,
    ) -> Result<(), E> {
        let width = self.lanes.len();
        for first in (0..count).step_by(width) {
            let active = &mut self.lanes[..width.min(count - first)];
            for (i, (state, rng)) in active.iter_mut().enumerate() {
                state.start(source)?;
                *rng = rng::walk_stream(state.config.seed, source, first + i);
            }
            let mut moving = true;
            while moving {
                moving = false;
                for (state, rng) in active.iter_mut() {
                    if let Some(next) = state.advance(rng) {
                        self.graph.prefetch(next);
                        moving = true;
                    }
                }
            }
            for (state, _) in active.iter() {
                emit(state.nodes())?;
            }
        }
        Ok(())
    }
}

/// A single walk of at most `cfg.max_length` nodes from `source`.
pub fn global_random_walk<R: Rng + ?Sized>(
    g: &Graph,
    source: NodeId,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<Walk, WalkError> {
    let mut state = WalkState::new(g, *cfg)?;
    state.start(source)?;
    state.run(rng);
    Ok(Walk { nodes: state.nodes })
}

/// Lane count beyond which lockstep walking stops paying off.
pub const MAX_LANES: usize = 16;

/// `walks_per_node` walks from every node, ordered by source then repetition.
pub fn generate_walk_set(g: &Graph, cfg: &WalkConfig, walks_per_node: usize) -> Result<Corpus, WalkError> {
    if walks_per_node == 0 {
        return Err(WalkError::InvalidWalksPerNode);
    }
    let mut corpus = Corpus::new(g.names().to_vec())?;
    let mut lanes = WalkLanes::new(g, *cfg, walks_per_node.min(MAX_LANES))?;
    for source in 0..g.node_count() {
        lanes.walks_from(source, walks_per_node, |w| corpus.push_walk(w).map_err(WalkError::from))?;
    }
    Ok(corpus)
}
