//! Weighted undirected graph with weight-accumulating insertion.
//!
//! Node identifiers are arbitrary `u64` values mapped to dense indices in
//! insertion order. Parallel insertions of the same unordered pair merge into a
//! single edge whose weight is the running sum. A self-loop of weight `w`
//! contributes `2w` to its node's degree, which keeps `sum(k) == 2m` exact.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;

use crate::error::{Error, Result};

pub type Weight = f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for NodeId {
    fn from(id: u64) -> Self {
        NodeId(id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeOutcome {
    Created,
    Incremented,
    /// Duplicate dropped under [`DuplicatePolicy::Ignore`].
    Ignored,
}

/// What to do when an already stored pair is inserted again.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DuplicatePolicy {
    #[default]
    Accumulate,
    Ignore,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    ids: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    adjacency: Vec<IndexMap<usize, Weight>>,
    degree: Vec<Weight>,
    total_weight: Weight,
    edge_count: usize,
    duplicates: DuplicatePolicy,
}

fn check_weight(w: Weight) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight(w))
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_duplicate_policy(duplicates: DuplicatePolicy) -> Self {
        Self { duplicates, ..Self::default() }
    }

    pub fn duplicate_policy(&self) -> DuplicatePolicy {
        self.duplicates
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of distinct stored pairs, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// `m`: the single-count sum of edge weights.
    pub fn total_weight(&self) -> Weight {
        self.total_weight
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        self.index.contains_key(&u)
    }

    /// Registers `u` without edges. Returns its dense index.
    pub fn add_node(&mut self, u: NodeId) -> usize {
        if let Some(&ix) = self.index.get(&u) {
            return ix;
        }
        let ix = self.ids.len();
        self.ids.push(u);
        self.index.insert(u, ix);
        self.adjacency.push(IndexMap::new());
        self.degree.push(0.0);
        ix
    }

    /// Adds `w` to the weight of `{u, v}`, creating the edge (and the nodes)
    /// when absent. Self-loops are rejected here; see [`Graph::add_self_loop`].
    pub fn add_or_increment_edge(&mut self, u: NodeId, v: NodeId, w: Weight) -> Result<EdgeOutcome> {
        check_weight(w)?;
        if u == v {
            return Err(Error::SelfLoopRejected(u));
        }
        let ui = self.add_node(u);
        let vi = self.add_node(v);
        Ok(self.bump(ui, vi, w))
    }

    /// Self-loop insertion for aggregated graphs. The loop counts twice in the
    /// owning node's degree and once in `m`.
    pub fn add_self_loop(&mut self, u: NodeId, w: Weight) -> Result<EdgeOutcome> {
        check_weight(w)?;
        let ui = self.add_node(u);
        Ok(self.bump(ui, ui, w))
    }

    fn bump(&mut self, ui: usize, vi: usize, w: Weight) -> EdgeOutcome {
        let existed = self.adjacency[ui].contains_key(&vi);
        if existed && self.duplicates == DuplicatePolicy::Ignore {
            return EdgeOutcome::Ignored;
        }
        *self.adjacency[ui].entry(vi).or_insert(0.0) += w;
        if ui != vi {
            *self.adjacency[vi].entry(ui).or_insert(0.0) += w;
        }
        self.degree[ui] += w;
        self.degree[vi] += w;
        self.total_weight += w;
        if existed {
            EdgeOutcome::Incremented
        } else {
            self.edge_count += 1;
            EdgeOutcome::Created
        }
    }

    pub fn weighted_degree(&self, u: NodeId) -> Result<Weight> {
        self.ix(u).map(|ix| self.degree[ix])
    }

    /// Incident edges of `u`, each exactly once; a self-loop appears as `(u, w)`.
    pub fn neighbors(&self, u: NodeId) -> Result<impl Iterator<Item = (NodeId, Weight)> + '_> {
        let ix = self.ix(u)?;
        Ok(self.adjacency[ix].iter().map(|(&v, &w)| (self.ids[v], w)))
    }

    pub fn edge_weight(&self, u: NodeId, v: NodeId) -> Option<Weight> {
        let ui = *self.index.get(&u)?;
        let vi = *self.index.get(&v)?;
        self.adjacency[ui].get(&vi).copied()
    }

    pub fn self_loop(&self, u: NodeId) -> Weight {
        self.edge_weight(u, u).unwrap_or(0.0)
    }

    /// Nodes in registration order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids.iter().copied()
    }

    /// Every stored edge once, as `(u, v, w)` with `u` registered no later than `v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, Weight)> + '_ {
        self.adjacency.iter().enumerate().flat_map(move |(ui, adj)| {
            adj.iter().filter(move |(&vi, _)| ui <= vi).map(move |(&vi, &w)| (self.ids[ui], self.ids[vi], w))
        })
    }

    pub(crate) fn ix(&self, u: NodeId) -> Result<usize> {
        self.index.get(&u).copied().ok_or(Error::UnknownNode(u))
    }

    pub(crate) fn id_at(&self, ix: usize) -> NodeId {
        self.ids[ix]
    }

    pub(crate) fn degree_at(&self, ix: usize) -> Weight {
        self.degree[ix]
    }

    pub(crate) fn adjacency_at(&self, ix: usize) -> &IndexMap<usize, Weight> {
        &self.adjacency[ix]
    }
}
