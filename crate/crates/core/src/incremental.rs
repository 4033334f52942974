//! Streaming maintenance of a partition under edge insertions.
//!
//! Each arriving edge is classified by whether its endpoints are already known
//! and whether they share a community, and one of four operations follows:
//!
//! | edge type        | operation                                   |
//! |------------------|---------------------------------------------|
//! | inner community  | keep                                        |
//! | cross community  | keep, or merge the two communities          |
//! | half-new         | assign the new node to the known one's community |
//! | new              | create a community holding both nodes       |
//!
//! Only the cross-community case involves a decision. Everything except a
//! merge touches O(1) bookkeeping; a merge relabels the smaller community.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Graph, Weight};
use crate::ingest::EdgeEvent;
use crate::partition::{modularity, CommunityId, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeType {
    InnerCommunity,
    CrossCommunity,
    HalfNew,
    New,
}

impl EdgeType {
    pub const ALL: [EdgeType; 4] =
        [EdgeType::InnerCommunity, EdgeType::CrossCommunity, EdgeType::HalfNew, EdgeType::New];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::InnerCommunity => "inner",
            EdgeType::CrossCommunity => "cross",
            EdgeType::HalfNew => "half_new",
            EdgeType::New => "new",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operation {
    Keep,
    Merge,
    AssignToExisting,
    CreateNew,
}

impl Operation {
    pub const ALL: [Operation; 4] =
        [Operation::Keep, Operation::Merge, Operation::AssignToExisting, Operation::CreateNew];

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Keep => "keep",
            Operation::Merge => "merge",
            Operation::AssignToExisting => "assign",
            Operation::CreateNew => "create",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Whether this operation may follow an edge of type `ty`.
    pub fn allowed_for(self, ty: EdgeType) -> bool {
        matches!(
            (ty, self),
            (EdgeType::InnerCommunity, Operation::Keep)
                | (EdgeType::CrossCommunity, Operation::Keep | Operation::Merge)
                | (EdgeType::HalfNew, Operation::AssignToExisting)
                | (EdgeType::New, Operation::CreateNew)
        )
    }
}

macro_rules! parse_by_name {
    ($ty:ty) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                <$ty>::ALL
                    .into_iter()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| format!("unknown {} {s:?}", stringify!($ty)))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

parse_by_name!(EdgeType);
parse_by_name!(Operation);

/// How a cross-community edge is resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecisionMode {
    /// Closed-form O(1) rule on `m`, `w` and the two `sigma_tot` values; any
    /// weight already running between the two communities is not consulted.
    #[default]
    PaperFaithful,
    /// Merge exactly when it yields the higher modularity, including the
    /// pre-existing cross weight. Costs a scan of the smaller community.
    Exact,
}

impl DecisionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionMode::PaperFaithful => "paper",
            DecisionMode::Exact => "exact",
        }
    }
}

impl FromStr for DecisionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(DecisionMode::PaperFaithful),
            "exact" => Ok(DecisionMode::Exact),
            _ => Err(format!("unknown decision mode {s:?} (expected paper or exact)")),
        }
    }
}

impl fmt::Display for DecisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Record of one processed edge.
#[derive(Clone, Debug, PartialEq)]
pub struct AppliedOp {
    pub edge: EdgeEvent,
    pub edge_type: EdgeType,
    pub operation: Operation,
    /// Modularity change of keeping the structure (cross edges only).
    pub delta_q_keep: Option<f64>,
    /// Modularity change of the merge alternative (cross edges only).
    pub delta_q_alt: Option<f64>,
    pub touched: Vec<CommunityId>,
}

impl AppliedOp {
    pub fn journal_line(&self) -> String {
        let dq = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:e}"));
        let touched: Vec<String> = self.touched.iter().map(|c| c.0.to_string()).collect();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.edge.source,
            self.edge.target,
            self.edge.weight,
            self.edge_type,
            self.operation,
            dq(self.delta_q_keep),
            dq(self.delta_q_alt),
            touched.join(",")
        )
    }
}

pub const JOURNAL_HEADER: &str = "# source\ttarget\tweight\tedge_type\toperation\tdq_keep\tdq_alt\ttouched";

/// Operation and edge-type tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpStats {
    ops: [u64; 4],
    types: [u64; 4],
}

impl OpStats {
    pub fn record(&mut self, edge_type: EdgeType, operation: Operation) {
        self.types[edge_type.index()] += 1;
        self.ops[operation.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.ops.iter().sum()
    }

    pub fn count(&self, op: Operation) -> u64 {
        self.ops[op.index()]
    }

    pub fn count_type(&self, ty: EdgeType) -> u64 {
        self.types[ty.index()]
    }

    /// Share of processed events taking `op`, in percent.
    pub fn percentage(&self, op: Operation) -> Result<f64> {
        self.share(self.count(op))
    }

    pub fn type_percentage(&self, ty: EdgeType) -> Result<f64> {
        self.share(self.count_type(ty))
    }

    fn share(&self, n: u64) -> Result<f64> {
        match self.total() {
            0 => Err(Error::NoEventsProcessed),
            total => Ok(100.0 * n as f64 / total as f64),
        }
    }

    /// Tallies a journal written by [`IncrementalTracker::set_journal`].
    pub fn from_journal<R: BufRead>(reader: R) -> Result<Self> {
        let mut stats = OpStats::default();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| Error::MalformedLine { line: n + 1, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 8 {
                return Err(malformed(format!("expected 8 fields, found {}", fields.len())));
            }
            let ty: EdgeType = fields[3].parse().map_err(malformed)?;
            let op: Operation = fields[4].parse().map_err(malformed)?;
            if !op.allowed_for(ty) {
                return Err(malformed(format!("operation {op} cannot follow a {ty} edge")));
            }
            stats.record(ty, op);
        }
        if stats.total() == 0 {
            return Err(Error::NoEventsProcessed);
        }
        Ok(stats)
    }

    /// Plain-text table of counts and percentages.
    pub fn table(&self) -> Result<String> {
        let mut s = String::from("operation  count      percent\n");
        for op in Operation::ALL {
            s += &format!("{:<10} {:<10} {:>7.3}%\n", op.as_str(), self.count(op), self.percentage(op)?);
        }
        s += "edge_type  count      percent\n";
        for ty in EdgeType::ALL {
            s += &format!("{:<10} {:<10} {:>7.3}%\n", ty.as_str(), self.count_type(ty), self.type_percentage(ty)?);
        }
        s += &format!("total      {}\n", self.total());
        Ok(s)
    }
}

pub fn classify(graph: &Graph, partition: &Partition, e: &EdgeEvent) -> EdgeType {
    match (graph.contains_node(e.source), graph.contains_node(e.target)) {
        (true, true) => {
            let cs = partition.community_of(e.source);
            if cs.is_some() && cs == partition.community_of(e.target) {
                EdgeType::InnerCommunity
            } else {
                EdgeType::CrossCommunity
            }
        }
        (true, false) | (false, true) => EdgeType::HalfNew,
        (false, false) => EdgeType::New,
    }
}

/// The closed-form merge rule for a cross edge of weight `w`, using the total
/// weight `m_before` and the two `sigma_tot` values read before the edge is
/// inserted: merge iff `w (2m + 2w) > 2 (S_i + w)(S_j + w)`.
pub fn should_merge(m_before: Weight, w: Weight, sigma_tot_i: Weight, sigma_tot_j: Weight) -> bool {
    w * (2.0 * m_before + 2.0 * w) > 2.0 * (sigma_tot_i + w) * (sigma_tot_j + w)
}

/// Modularity changes of the two candidate outcomes of a cross edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrossGains {
    pub keep: f64,
    pub merge: f64,
}

/// Modularity change of keeping versus merging for a cross edge of weight `w`
/// between `ci` and `cj`, evaluated before insertion. `cross_weight` is the
/// weight already running between the two communities; passing 0 gives the
/// closed form whose difference is `(2w - 2(S_i + w)(S_j + w)/(2m + 2w)) / (2m + 2w)`.
pub fn decision_gain_cross(
    partition: &Partition,
    m_before: Weight,
    w: Weight,
    ci: CommunityId,
    cj: CommunityId,
    cross_weight: Weight,
) -> Result<CrossGains> {
    let si = partition.sigma_tot(ci)?;
    let sj = partition.sigma_tot(cj)?;
    let d = 2.0 * m_before + 2.0 * w;
    let (a, b) = (si + w, sj + w);
    let q_before = partition.tracked_modularity(m_before);
    let tot_sq_keep = partition.tot_sq_sum() - si * si - sj * sj + a * a + b * b;
    let q_keep = partition.internal_sum() / d - tot_sq_keep / (d * d);
    let keep = q_keep - q_before;
    let merge = keep + (2.0 * w + 2.0 * cross_weight - 2.0 * a * b / d) / d;
    Ok(CrossGains { keep, merge })
}

fn validate(e: &EdgeEvent) -> Result<()> {
    if !(e.weight.is_finite() && e.weight > 0.0) {
        return Err(Error::NonPositiveWeight(e.weight));
    }
    if e.source == e.target {
        return Err(Error::SelfLoopRejected(e.source));
    }
    Ok(())
}

/// Inserts `e` into `graph` and updates `partition` by the operation its type
/// calls for. `partition` must cover every node of `graph`.
pub fn apply_edge(graph: &mut Graph, partition: &mut Partition, e: EdgeEvent, mode: DecisionMode) -> Result<AppliedOp> {
    validate(&e)?;
    let (u, v, w) = (e.source, e.target, e.weight);
    let edge_type = classify(graph, partition, &e);
    let mut record = AppliedOp {
        edge: e,
        edge_type,
        operation: Operation::Keep,
        delta_q_keep: None,
        delta_q_alt: None,
        touched: Vec::new(),
    };
    let ignored =
        graph.duplicate_policy() == crate::graph::DuplicatePolicy::Ignore && graph.edge_weight(u, v).is_some();

    match edge_type {
        EdgeType::InnerCommunity => {
            let c = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
            record.touched.push(c);
            if !ignored {
                graph.add_or_increment_edge(u, v, w)?;
                partition.absorb_edge(u, v, w)?;
            }
        }
        EdgeType::CrossCommunity => {
            let ci = partition.community_of(u).ok_or(Error::UnassignedNode(u))?;
            let cj = partition.community_of(v).ok_or(Error::UnassignedNode(v))?;
            record.touched = vec![ci, cj];
            if ignored {
                return Ok(record);
            }
            let m = graph.total_weight();
            let si = partition.sigma_tot(ci)?;
            let sj = partition.sigma_tot(cj)?;
            let (cross, merge) = match mode {
                DecisionMode::PaperFaithful => (0.0, should_merge(m, w, si, sj)),
                DecisionMode::Exact => {
                    let cross = partition.cross_weight(graph, ci, cj)?;
                    let d = 2.0 * m + 2.0 * w;
                    (cross, (w + cross) * d > (si + w) * (sj + w))
                }
            };
            let gains = decision_gain_cross(partition, m, w, ci, cj, cross)?;
            record.delta_q_keep = Some(gains.keep);
            record.delta_q_alt = Some(gains.merge);

            graph.add_or_increment_edge(u, v, w)?;
            partition.absorb_edge(u, v, w)?;
            if merge {
                partition.merge_communities(graph, ci, cj)?;
                record.operation = Operation::Merge;
            }
        }
        EdgeType::HalfNew => {
            let (known, fresh) = if graph.contains_node(u) { (u, v) } else { (v, u) };
            let c = partition.community_of(known).ok_or(Error::UnassignedNode(known))?;
            graph.add_or_increment_edge(u, v, w)?;
            partition.absorb_degree(known, w)?;
            partition.assign_new_node(graph, fresh, c)?;
            record.operation = Operation::AssignToExisting;
            record.touched.push(c);
        }
        EdgeType::New => {
            graph.add_or_increment_edge(u, v, w)?;
            let c = partition.create_community(graph, &[u, v])?;
            record.operation = Operation::CreateNew;
            record.touched.push(c);
        }
    }
    Ok(record)
}

/// Graph, partition and operation statistics evolving under a stream of edges.
pub struct IncrementalTracker {
    graph: Graph,
    partition: Partition,
    mode: DecisionMode,
    stats: OpStats,
    journal: Option<Box<dyn Write + Send>>,
}

impl fmt::Debug for IncrementalTracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IncrementalTracker")
            .field("nodes", &self.graph.node_count())
            .field("communities", &self.partition.community_count())
            .field("mode", &self.mode)
            .field("stats", &self.stats)
            .finish()
    }
}

impl IncrementalTracker {
    /// Starts from an empty graph.
    pub fn new(mode: DecisionMode) -> Self {
        Self::from_parts_unchecked(Graph::new(), Partition::new(), mode)
    }

    /// Starts from an existing graph and a partition covering all of its nodes.
    pub fn from_parts(graph: Graph, partition: Partition, mode: DecisionMode) -> Result<Self> {
        if let Some(u) = graph.nodes().find(|&u| partition.community_of(u).is_none()) {
            return Err(Error::UnassignedNode(u));
        }
        if partition.node_count() != graph.node_count() {
            let stray = partition.assignment().into_iter().find(|(u, _)| !graph.contains_node(*u)).map(|(u, _)| u);
            if let Some(u) = stray {
                return Err(Error::UnknownNode(u));
            }
        }
        Ok(Self::from_parts_unchecked(graph, partition, mode))
    }

    fn from_parts_unchecked(graph: Graph, partition: Partition, mode: DecisionMode) -> Self {
        Self { graph, partition, mode, stats: OpStats::default(), journal: None }
    }

    /// Sends one line per processed event to `sink`, after a header line.
    pub fn set_journal(&mut self, mut sink: Box<dyn Write + Send>) -> Result<()> {
        writeln!(sink, "{JOURNAL_HEADER}")?;
        self.journal = Some(sink);
        Ok(())
    }

    pub fn apply(&mut self, e: EdgeEvent) -> Result<AppliedOp> {
        let op = apply_edge(&mut self.graph, &mut self.partition, e, self.mode)?;
        self.stats.record(op.edge_type, op.operation);
        if let Some(sink) = self.journal.as_mut() {
            writeln!(sink, "{}", op.journal_line())?;
        }
        Ok(op)
    }

    pub fn flush_journal(&mut self) -> Result<()> {
        if let Some(sink) = self.journal.as_mut() {
            sink.flush()?;
        }
        Ok(())
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn mode(&self) -> DecisionMode {
        self.mode
    }

    /// Statistics over all processed events.
    pub fn stats(&self) -> Result<OpStats> {
        if self.stats.total() == 0 {
            return Err(Error::NoEventsProcessed);
        }
        Ok(self.stats)
    }

    /// Modularity from the tracked sums, O(1).
    pub fn tracked_modularity(&self) -> f64 {
        self.partition.tracked_modularity(self.graph.total_weight())
    }

    /// Modularity recomputed from the graph.
    pub fn modularity(&self) -> Result<f64> {
        modularity(&self.graph, &self.partition)
    }

    pub fn into_parts(self) -> (Graph, Partition) {
        (self.graph, self.partition)
    }
}
