//! Two-phase static modularity optimization (local moving, then aggregation
//! of each community into a single node), iterated until a pass stops paying.

use std::collections::HashMap;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::partition::{insertion_gain, modularity, CommunityId, Partition};

/// Smallest modularity gain that counts as an improving move.
pub const MOVE_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct LouvainConfig {
    /// A pass whose modularity gain falls below this ends the run.
    pub gain_threshold: f64,
    /// Shuffle the node visit order with this seed; registration order otherwise.
    pub node_order_seed: Option<u64>,
    pub max_passes: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self { gain_threshold: 1e-6, node_order_seed: None, max_passes: 20 }
    }
}

impl LouvainConfig {
    pub fn seeded(seed: u64) -> Self {
        Self { node_order_seed: Some(seed), ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoveOutcome {
    pub improved: bool,
    pub q_gain: f64,
    pub sweeps: usize,
    pub moves: usize,
}

/// Fine node to coarse node, one coarse node per community.
#[derive(Clone, Debug, Default)]
pub struct AggregationMap {
    coarse: HashMap<NodeId, NodeId>,
}

impl AggregationMap {
    pub fn get(&self, fine: NodeId) -> Option<NodeId> {
        self.coarse.get(&fine).copied()
    }

    pub fn len(&self) -> usize {
        self.coarse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coarse.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LouvainOutcome {
    /// Flat partition of the input graph's nodes.
    pub partition: Partition,
    pub modularity: f64,
    /// Passes that moved at least one node.
    pub passes: usize,
    /// Modularity after each such pass.
    pub pass_modularity: Vec<f64>,
}

/// Sweeps the nodes in visit order, moving each to the neighbouring community
/// with the largest positive gain, until a full sweep moves nothing.
pub fn local_move_phase(graph: &Graph, partition: &mut Partition, config: &LouvainConfig) -> Result<MoveOutcome> {
    let m = graph.total_weight();
    let mut outcome = MoveOutcome { improved: false, q_gain: 0.0, sweeps: 0, moves: 0 };
    if m <= 0.0 {
        return Ok(outcome);
    }
    let mut order: Vec<usize> = (0..graph.node_count()).collect();
    if let Some(seed) = config.node_order_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let q_start = partition.tracked_modularity(m);
    let mut links: IndexMap<CommunityId, f64> = IndexMap::new();

    loop {
        outcome.sweeps += 1;
        let mut moved = 0;
        for &ix in &order {
            let u = graph.id_at(ix);
            let from = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
            let k_i = graph.degree_at(ix);

            links.clear();
            let mut self_loop = 0.0;
            for (&v, &w) in graph.adjacency_at(ix) {
                if v == ix {
                    self_loop = w;
                    continue;
                }
                let nv = graph.id_at(v);
                let c = partition.community_of(nv).ok_or(Error::UnassignedNode(nv))?;
                *links.entry(c).or_insert(0.0) += w;
            }

            let k_from = links.get(&from).copied().unwrap_or(0.0);
            let stay = insertion_gain(m, k_i, k_from, partition.sigma_tot(from)? - k_i);
            let (mut best, mut best_gain, mut best_k) = (from, stay, k_from);
            for (&c, &k_c) in &links {
                if c == from {
                    continue;
                }
                let gain = insertion_gain(m, k_i, k_c, partition.sigma_tot(c)?);
                if gain > best_gain {
                    (best, best_gain, best_k) = (c, gain, k_c);
                }
            }
            if best != from && best_gain - stay > MOVE_EPSILON {
                partition.relocate(u, from, best, k_from, best_k, k_i, self_loop);
                moved += 1;
            }
        }
        outcome.moves += moved;
        if moved == 0 {
            break;
        }
    }
    outcome.improved = outcome.moves > 0;
    outcome.q_gain = partition.tracked_modularity(m) - q_start;
    Ok(outcome)
}

/// Collapses each community into one node. Cross-community weights are summed
/// into coarse edges; internal weight becomes a coarse self-loop, so the
/// coarse graph keeps `m` and the singleton partition of it keeps modularity.
pub fn aggregate(graph: &Graph, partition: &Partition) -> Result<(Graph, AggregationMap)> {
    let mut coarse = Graph::new();
    let mut label: HashMap<CommunityId, NodeId> = HashMap::new();
    let mut map = AggregationMap::default();
    for u in graph.nodes() {
        let c = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
        let next = NodeId(label.len() as u64);
        let cn = *label.entry(c).or_insert(next);
        coarse.add_node(cn);
        map.coarse.insert(u, cn);
    }
    for (u, v, w) in graph.edges() {
        let cu = map.coarse[&u];
        let cv = map.coarse[&v];
        if cu == cv {
            coarse.add_self_loop(cu, w)?;
        } else {
            coarse.add_or_increment_edge(cu, cv, w)?;
        }
    }
    Ok((coarse, map))
}

/// Runs passes of local moving and aggregation from singletons and returns the
/// flattened partition of `graph`.
pub fn run(graph: &Graph, config: &LouvainConfig) -> Result<LouvainOutcome> {
    if graph.node_count() == 0 || graph.total_weight() <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    // Original node -> node of the current level graph.
    let originals: Vec<NodeId> = graph.nodes().collect();
    let mut current: Vec<NodeId> = originals.clone();
    let mut level: Option<Graph> = None;
    let mut passes = 0;
    let mut pass_modularity = Vec::new();

    while passes < config.max_passes {
        let g = level.as_ref().unwrap_or(graph);
        let mut part = Partition::singletons(g);
        let pass_config = LouvainConfig {
            node_order_seed: config.node_order_seed.map(|s| s.wrapping_add(passes as u64)),
            ..config.clone()
        };
        let moved = local_move_phase(g, &mut part, &pass_config)?;
        if !moved.improved {
            break;
        }
        passes += 1;
        pass_modularity.push(part.tracked_modularity(g.total_weight()));
        let (coarse, map) = aggregate(g, &part)?;
        for node in current.iter_mut() {
            *node = map.get(*node).expect("aggregation map is total");
        }
        level = Some(coarse);
        if moved.q_gain < config.gain_threshold {
            break;
        }
    }

    let partition =
        Partition::from_assignment(graph, originals.into_iter().zip(current).map(|(u, c)| (u, CommunityId(c.0))))?;
    let q = modularity(graph, &partition)?;
    Ok(LouvainOutcome { partition, modularity: q, passes, pass_modularity })
}
