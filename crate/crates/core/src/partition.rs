//! Community assignment with incrementally maintained per-community sums.
//!
//! `sigma_in` uses the ordered-pair convention: an internal edge of weight `w`
//! contributes `2w`, and a self-loop of weight `w` also contributes `2w`.
//! `sigma_tot` is the sum of member degrees, so the `sigma_tot` values of all
//! communities add up to `2m`.
//!
//! Besides the per-community maps the partition keeps two running aggregates,
//! `sum(sigma_in)` and `sum(sigma_tot^2)`, which make the tracked modularity an
//! O(1) query.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, Weight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommunityId(pub u64);

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, Debug, Default)]
struct Community {
    sigma_in: Weight,
    sigma_tot: Weight,
    members: IndexSet<NodeId>,
}

#[derive(Clone, Debug, Default)]
pub struct Partition {
    assignment: HashMap<NodeId, CommunityId>,
    communities: IndexMap<CommunityId, Community>,
    next_id: u64,
    internal_sum: Weight,
    tot_sq_sum: f64,
}

impl Partition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every node of `graph` in its own community, ids in node order.
    pub fn singletons(graph: &Graph) -> Self {
        let mut p = Self::new();
        for u in graph.nodes() {
            let c = p.fresh_id();
            let sl = graph.self_loop(u);
            // Degree lookups cannot fail for nodes produced by the graph itself.
            let k = graph.weighted_degree(u).unwrap_or(0.0);
            p.install(c, Community { sigma_in: 2.0 * sl, sigma_tot: k, members: IndexSet::from([u]) });
            p.assignment.insert(u, c);
        }
        p
    }

    /// Builds a partition from explicit labels, recomputing every sum from the
    /// graph. All graph nodes must be labelled, and only graph nodes.
    pub fn from_assignment<I>(graph: &Graph, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, CommunityId)>,
    {
        let mut p = Self::new();
        for (u, c) in labels {
            if !graph.contains_node(u) {
                return Err(Error::UnknownNode(u));
            }
            if p.assignment.insert(u, c).is_some() {
                return Err(Error::AlreadyAssigned(u));
            }
            p.communities.entry(c).or_default().members.insert(u);
            p.next_id = p.next_id.max(c.0 + 1);
        }
        if let Some(u) = graph.nodes().find(|u| !p.assignment.contains_key(u)) {
            return Err(Error::UnassignedNode(u));
        }
        for (c, (sigma_in, sigma_tot)) in community_sums(graph, &p)? {
            let com = &mut p.communities[&c];
            com.sigma_in = sigma_in;
            com.sigma_tot = sigma_tot;
            p.internal_sum += sigma_in;
            p.tot_sq_sum += sigma_tot * sigma_tot;
        }
        Ok(p)
    }

    pub fn community_of(&self, u: NodeId) -> Option<CommunityId> {
        self.assignment.get(&u).copied()
    }

    pub fn contains_community(&self, c: CommunityId) -> bool {
        self.communities.contains_key(&c)
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn communities(&self) -> impl Iterator<Item = CommunityId> + '_ {
        self.communities.keys().copied()
    }

    pub fn sigma_in(&self, c: CommunityId) -> Result<Weight> {
        self.get(c).map(|com| com.sigma_in)
    }

    pub fn sigma_tot(&self, c: CommunityId) -> Result<Weight> {
        self.get(c).map(|com| com.sigma_tot)
    }

    pub fn member_count(&self, c: CommunityId) -> Result<usize> {
        self.get(c).map(|com| com.members.len())
    }

    pub fn members(&self, c: CommunityId) -> Result<impl Iterator<Item = NodeId> + '_> {
        self.get(c).map(|com| com.members.iter().copied())
    }

    /// `(node, community)` pairs sorted by node id.
    pub fn assignment(&self) -> Vec<(NodeId, CommunityId)> {
        let mut out: Vec<_> = self.assignment.iter().map(|(&u, &c)| (u, c)).collect();
        out.sort_unstable();
        out
    }

    /// Member sets sorted internally and by smallest member.
    pub fn groups(&self) -> Vec<Vec<NodeId>> {
        let mut out: Vec<Vec<NodeId>> = self
            .communities
            .values()
            .map(|com| {
                let mut m: Vec<_> = com.members.iter().copied().collect();
                m.sort_unstable();
                m
            })
            .collect();
        out.sort();
        out
    }

    /// Modularity from the running aggregates, O(1). `m` is the graph's total weight.
    pub fn tracked_modularity(&self, m: Weight) -> f64 {
        if m <= 0.0 {
            return 0.0;
        }
        self.internal_sum / (2.0 * m) - self.tot_sq_sum / (4.0 * m * m)
    }

    /// `sum(sigma_in)` over all communities.
    pub fn internal_sum(&self) -> Weight {
        self.internal_sum
    }

    /// `sum(sigma_tot^2)` over all communities.
    pub fn tot_sq_sum(&self) -> f64 {
        self.tot_sq_sum
    }

    /// Weight from `u` to members of `c`, ignoring a self-loop on `u`.
    pub fn weight_to_community(&self, graph: &Graph, u: NodeId, c: CommunityId) -> Result<Weight> {
        let ix = graph.ix(u)?;
        self.get(c)?;
        Ok(graph
            .adjacency_at(ix)
            .iter()
            .filter(|(&v, _)| v != ix && self.assignment.get(&graph.id_at(v)) == Some(&c))
            .map(|(_, &w)| w)
            .sum())
    }

    /// Modularity change from inserting the isolated node `i` into `c`.
    ///
    /// When `i` is currently a member of `c` its own degree is taken out of
    /// `sigma_tot`, so the value is the gain of re-inserting it after removal.
    pub fn gain_insert(&self, graph: &Graph, i: NodeId, c: CommunityId) -> Result<f64> {
        let m = positive_total(graph)?;
        let k_i = graph.weighted_degree(i)?;
        let k_in = self.weight_to_community(graph, i, c)?;
        let mut sigma_tot = self.get(c)?.sigma_tot;
        if self.community_of(i) == Some(c) {
            sigma_tot -= k_i;
        }
        Ok(insertion_gain(m, k_i, k_in, sigma_tot))
    }

    /// Modularity change from taking `i` out of its community into isolation.
    pub fn gain_remove(&self, graph: &Graph, i: NodeId) -> Result<f64> {
        let c = self.community_of(i).ok_or(Error::UnassignedNode(i))?;
        Ok(-self.gain_insert(graph, i, c)?)
    }

    /// Moves an assigned node to an existing community.
    pub fn move_node(&mut self, graph: &Graph, i: NodeId, target: CommunityId) -> Result<()> {
        let from = self.community_of(i).ok_or(Error::UnassignedNode(i))?;
        self.get(target)?;
        if from == target {
            return Ok(());
        }
        let k_from = self.weight_to_community(graph, i, from)?;
        let k_to = self.weight_to_community(graph, i, target)?;
        let k_i = graph.weighted_degree(i)?;
        self.relocate(i, from, target, k_from, k_to, k_i, graph.self_loop(i));
        Ok(())
    }

    /// Moves `i` using precomputed link weights. Retires `from` when it empties.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn relocate(
        &mut self,
        i: NodeId,
        from: CommunityId,
        to: CommunityId,
        k_from: Weight,
        k_to: Weight,
        k_i: Weight,
        self_loop: Weight,
    ) {
        self.adjust(from, -(2.0 * k_from + 2.0 * self_loop), -k_i);
        self.communities[&from].members.swap_remove(&i);
        self.adjust(to, 2.0 * k_to + 2.0 * self_loop, k_i);
        self.communities[&to].members.insert(i);
        self.assignment.insert(i, to);
        self.retire_if_empty(from);
    }

    /// Assigns a node that has no community yet to `c`.
    pub fn assign_new_node(&mut self, graph: &Graph, i: NodeId, c: CommunityId) -> Result<()> {
        if self.assignment.contains_key(&i) {
            return Err(Error::AlreadyAssigned(i));
        }
        let k_in = self.weight_to_community(graph, i, c)?;
        let k_i = graph.weighted_degree(i)?;
        self.adjust(c, 2.0 * (k_in + graph.self_loop(i)), k_i);
        self.communities[&c].members.insert(i);
        self.assignment.insert(i, c);
        Ok(())
    }

    /// Opens a fresh community holding the given unassigned nodes.
    pub fn create_community(&mut self, graph: &Graph, seeds: &[NodeId]) -> Result<CommunityId> {
        let seeds: IndexSet<NodeId> = seeds.iter().copied().collect();
        if seeds.is_empty() {
            return Err(Error::EmptySeedSet);
        }
        let mut sigma_in = 0.0;
        let mut sigma_tot = 0.0;
        for &s in &seeds {
            if self.assignment.contains_key(&s) {
                return Err(Error::AlreadyAssigned(s));
            }
            sigma_tot += graph.weighted_degree(s)?;
            for (v, w) in graph.neighbors(s)? {
                if v == s {
                    sigma_in += 2.0 * w;
                } else if seeds.contains(&v) {
                    sigma_in += w;
                }
            }
        }
        let c = self.fresh_id();
        for &s in &seeds {
            self.assignment.insert(s, c);
        }
        self.install(c, Community { sigma_in, sigma_tot, members: seeds });
        Ok(c)
    }

    /// Records an edge `{u, v, w}` that was just added to the graph between two
    /// assigned nodes.
    pub fn absorb_edge(&mut self, u: NodeId, v: NodeId, w: Weight) -> Result<()> {
        let cu = self.community_of(u).ok_or(Error::UnassignedNode(u))?;
        let cv = self.community_of(v).ok_or(Error::UnassignedNode(v))?;
        if cu == cv {
            self.adjust(cu, 2.0 * w, 2.0 * w);
        } else {
            self.adjust(cu, 0.0, w);
            self.adjust(cv, 0.0, w);
        }
        Ok(())
    }

    /// Records a degree increase of `w` on the assigned node `u` whose other
    /// endpoint is not (yet) assigned.
    pub fn absorb_degree(&mut self, u: NodeId, w: Weight) -> Result<()> {
        let c = self.community_of(u).ok_or(Error::UnassignedNode(u))?;
        self.adjust(c, 0.0, w);
        Ok(())
    }

    /// Total edge weight between communities `a` and `b`, found by scanning
    /// the adjacency of the smaller one.
    pub fn cross_weight(&self, graph: &Graph, a: CommunityId, b: CommunityId) -> Result<Weight> {
        let (small, big) = self.order_by_size(a, b)?;
        self.scan_cross(graph, small, big)
    }

    /// Unites `a` and `b`. The larger community (by member count, ties to the
    /// smaller id) survives and the other side is relabelled. `sigma_in` of the
    /// survivor is exact: both internal sums plus twice the cross weight.
    pub fn merge_communities(&mut self, graph: &Graph, a: CommunityId, b: CommunityId) -> Result<CommunityId> {
        if a == b {
            return Err(Error::SelfMerge(a));
        }
        let (small, big) = self.order_by_size(a, b)?;
        let cross = self.scan_cross(graph, small, big)?;

        let gone = self.communities.swap_remove(&small).expect("checked above");
        self.tot_sq_sum -= gone.sigma_tot * gone.sigma_tot;
        self.internal_sum -= gone.sigma_in;
        for &u in &gone.members {
            self.assignment.insert(u, big);
        }
        self.adjust(big, gone.sigma_in + 2.0 * cross, gone.sigma_tot);
        self.communities[&big].members.extend(gone.members);
        Ok(big)
    }

    pub fn write_export<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, c) in self.assignment() {
            writeln!(out, "{}\t{}", u.0, c.0)?;
        }
        Ok(())
    }

    fn order_by_size(&self, a: CommunityId, b: CommunityId) -> Result<(CommunityId, CommunityId)> {
        let na = self.get(a)?.members.len();
        let nb = self.get(b)?.members.len();
        let a_survives = na > nb || (na == nb && a < b);
        Ok(if a_survives { (b, a) } else { (a, b) })
    }

    fn scan_cross(&self, graph: &Graph, small: CommunityId, big: CommunityId) -> Result<Weight> {
        let mut cross = 0.0;
        for &u in &self.get(small)?.members {
            let ix = graph.ix(u)?;
            for (&v, &w) in graph.adjacency_at(ix) {
                if self.assignment.get(&graph.id_at(v)) == Some(&big) {
                    cross += w;
                }
            }
        }
        Ok(cross)
    }

    fn get(&self, c: CommunityId) -> Result<&Community> {
        self.communities.get(&c).ok_or(Error::UnknownCommunity(c))
    }

    fn fresh_id(&mut self) -> CommunityId {
        let c = CommunityId(self.next_id);
        self.next_id += 1;
        c
    }

    fn install(&mut self, c: CommunityId, com: Community) {
        self.internal_sum += com.sigma_in;
        self.tot_sq_sum += com.sigma_tot * com.sigma_tot;
        self.communities.insert(c, com);
    }

    fn adjust(&mut self, c: CommunityId, d_in: Weight, d_tot: Weight) {
        let com = &mut self.communities[&c];
        self.tot_sq_sum -= com.sigma_tot * com.sigma_tot;
        com.sigma_tot += d_tot;
        com.sigma_in += d_in;
        self.tot_sq_sum += com.sigma_tot * com.sigma_tot;
        self.internal_sum += d_in;
    }

    fn retire_if_empty(&mut self, c: CommunityId) {
        if self.communities[&c].members.is_empty() {
            let gone = self.communities.swap_remove(&c).expect("present");
            self.tot_sq_sum -= gone.sigma_tot * gone.sigma_tot;
            self.internal_sum -= gone.sigma_in;
        }
    }
}

/// Reads `node<TAB>community` lines (blank and `#` lines skipped) and builds a
/// partition of `graph` from them.
pub fn load_partition<R: BufRead>(graph: &Graph, reader: R) -> Result<Partition> {
    let labels = read_export(reader)?;
    if let Some(&(u, _)) = labels.iter().find(|(u, _)| !graph.contains_node(*u)) {
        return Err(Error::UnknownNodeInPartitionFile(u));
    }
    Partition::from_assignment(graph, labels)
}

pub fn read_export<R: BufRead>(reader: R) -> Result<Vec<(NodeId, CommunityId)>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |reason: &str| Error::MalformedLine { line: n + 1, reason: reason.to_string() };
        let mut fields = line.split_whitespace();
        let (Some(u), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(malformed("expected two fields: node community"));
        };
        let u = u.parse().map_err(|_| malformed("bad node id"))?;
        let c = c.parse().map_err(|_| malformed("bad community id"))?;
        out.push((NodeId(u), CommunityId(c)));
    }
    Ok(out)
}

pub(crate) fn insertion_gain(m: Weight, k_i: Weight, k_in: Weight, sigma_tot: Weight) -> f64 {
    (2.0 * k_in - sigma_tot * k_i / m) / (2.0 * m)
}

fn positive_total(graph: &Graph) -> Result<Weight> {
    let m = graph.total_weight();
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::EmptyGraph)
    }
}

/// `(sigma_in, sigma_tot)` per community recomputed from the graph alone.
pub fn community_sums(graph: &Graph, partition: &Partition) -> Result<IndexMap<CommunityId, (Weight, Weight)>> {
    let mut sums: IndexMap<CommunityId, (Weight, Weight)> = IndexMap::new();
    for ix in 0..graph.node_count() {
        let u = graph.id_at(ix);
        let c = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
        let entry = sums.entry(c).or_insert((0.0, 0.0));
        entry.1 += graph.degree_at(ix);
        for (&v, &w) in graph.adjacency_at(ix) {
            if v == ix {
                entry.0 += 2.0 * w;
            } else if partition.community_of(graph.id_at(v)) == Some(c) {
                entry.0 += w;
            }
        }
    }
    Ok(sums)
}

/// Modularity recomputed from scratch, community-sum form:
/// `Q = (1/2m) * sum_c (sigma_in - sigma_tot^2 / 2m)`.
///
/// An edgeless graph has modularity 0.
pub fn modularity(graph: &Graph, partition: &Partition) -> Result<f64> {
    let sums = community_sums(graph, partition)?;
    let m = graph.total_weight();
    if m <= 0.0 {
        return Ok(0.0);
    }
    let two_m = 2.0 * m;
    Ok(sums.values().map(|&(s_in, s_tot)| s_in - s_tot * s_tot / two_m).sum::<f64>() / two_m)
}

/// Modularity as the double sum over node pairs,
/// `(1/2m) * sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`. Quadratic in the
/// node count; meant for small graphs and cross-checks.
pub fn modularity_by_pairs(graph: &Graph, partition: &Partition) -> Result<f64> {
    let n = graph.node_count();
    let labels = (0..n)
        .map(|ix| {
            let u = graph.id_at(ix);
            partition.community_of(u).ok_or(Error::UnassignedNode(u))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = graph.total_weight();
    if m <= 0.0 {
        return Ok(0.0);
    }
    let two_m = 2.0 * m;
    let mut q = 0.0;
    for i in 0..n {
        let adj = graph.adjacency_at(i);
        for j in 0..n {
            if labels[i] != labels[j] {
                continue;
            }
            let a_ij = match adj.get(&j) {
                Some(&w) if i == j => 2.0 * w,
                Some(&w) => w,
                None => 0.0,
            };
            q += a_ij - graph.degree_at(i) * graph.degree_at(j) / two_m;
        }
    }
    Ok(q / two_m)
}

/// Modularity as `sum_c (e_cc - a_c^2)` with `e_cc` the fraction of edge-ends
/// inside `c` and `a_c` the fraction of edge-ends attached to `c`.
pub fn modularity_by_fractions(graph: &Graph, partition: &Partition) -> Result<f64> {
    let m = graph.total_weight();
    let mut e: IndexMap<CommunityId, f64> = IndexMap::new();
    let mut a: IndexMap<CommunityId, f64> = IndexMap::new();
    for (u, v, w) in graph.edges() {
        let cu = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
        let cv = partition.community_of(v).ok_or(Error::UnassignedNode(v))?;
        *a.entry(cu).or_default() += w;
        *a.entry(cv).or_default() += w;
        if cu == cv {
            *e.entry(cu).or_default() += 2.0 * w;
        }
    }
    if let Some(u) = graph.nodes().find(|&u| partition.community_of(u).is_none()) {
        return Err(Error::UnassignedNode(u));
    }
    if m <= 0.0 {
        return Ok(0.0);
    }
    let two_m = 2.0 * m;
    Ok(a.iter()
        .map(|(c, &ends)| {
            let e_cc = e.get(c).copied().unwrap_or(0.0) / two_m;
            let a_c = ends / two_m;
            e_cc - a_c * a_c
        })
        .sum())
}
