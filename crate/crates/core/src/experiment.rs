//! Split-and-stream experiment: Louvain on the initial portion, incremental
//! tracking over the rest, modularity recomputed at every subset boundary.

use std::io::Write;
use std::time::Instant;

use crate::error::Result;
use crate::graph::Graph;
use crate::incremental::{DecisionMode, EdgeType, IncrementalTracker, OpStats, Operation};
use crate::ingest::{split_stream, EdgeEvent, SplitOptions};
use crate::louvain::{self, LouvainConfig};
use crate::partition::Partition;

pub const REPORT_VERSION: &str = "# dyncomm experiment report v1";
pub const CSV_COLUMNS: &str =
    "subset_index,edges_so_far,q_incremental,q_static_rerun,elapsed_incremental_s,elapsed_static_s";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub split: SplitOptions,
    pub mode: DecisionMode,
    pub gain_threshold: f64,
    /// Re-run Louvain from scratch on the accumulated graph at each checkpoint.
    pub static_rerun: bool,
}

impl ExperimentConfig {
    pub fn new(ratio: f64, subsets: usize, seed: u64) -> Self {
        Self {
            split: SplitOptions::new(ratio, subsets, seed),
            mode: DecisionMode::default(),
            gain_threshold: LouvainConfig::default().gain_threshold,
            static_rerun: false,
        }
    }

    fn louvain(&self) -> LouvainConfig {
        LouvainConfig {
            gain_threshold: self.gain_threshold,
            node_order_seed: Some(self.split.seed),
            ..LouvainConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointRow {
    /// 0 is the initial partition; `i` follows the i-th subset.
    pub subset_index: usize,
    pub edges_so_far: usize,
    /// Recomputed from the graph, not read from the tracked sums.
    pub q_incremental: f64,
    pub q_static_rerun: Option<f64>,
    /// Cumulative time spent applying stream events.
    pub elapsed_incremental_s: f64,
    /// Cumulative time spent in static re-runs.
    pub elapsed_static_s: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<CheckpointRow>,
    pub op_stats: OpStats,
    pub initial_passes: usize,
    pub final_partition: Partition,
    pub final_graph: Graph,
}

impl ExperimentReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let c = &self.config;
        writeln!(out, "{REPORT_VERSION}")?;
        writeln!(
            out,
            "# seed={} ratio={} subsets={} mode={} threshold={:e} keep_order={} static_rerun={}",
            c.split.seed,
            c.split.ratio,
            c.split.subset_count,
            c.mode,
            c.gain_threshold,
            c.split.keep_order,
            if c.static_rerun { "cold-start-per-checkpoint" } else { "off" },
        )?;
        writeln!(out, "{CSV_COLUMNS}")?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.subset_index,
                r.edges_so_far,
                r.q_incremental,
                opt(r.q_static_rerun),
                r.elapsed_incremental_s,
                opt(r.elapsed_static_s)
            )?;
        }
        let ops: Vec<String> = Operation::ALL.iter().map(|&op| format!("{op}={}", self.op_stats.count(op))).collect();
        writeln!(out, "# ops {}", ops.join(" "))?;
        let types: Vec<String> =
            EdgeType::ALL.iter().map(|&ty| format!("{ty}={}", self.op_stats.count_type(ty))).collect();
        writeln!(out, "# edge_types {}", types.join(" "))?;
        Ok(())
    }

    pub fn first(&self) -> &CheckpointRow {
        &self.rows[0]
    }

    pub fn last(&self) -> &CheckpointRow {
        self.rows.last().expect("report has the initial row")
    }
}

pub fn run_experiment(
    events: &[EdgeEvent],
    config: ExperimentConfig,
    journal: Option<Box<dyn Write + Send>>,
) -> Result<ExperimentReport> {
    let plan = split_stream(events, config.split)?;
    let lv = config.louvain();

    let mut initial_graph = Graph::new();
    for e in &plan.initial {
        initial_graph.add_or_increment_edge(e.source, e.target, e.weight)?;
    }
    let started = Instant::now();
    let (partition, initial_passes, q0) = if plan.initial.is_empty() {
        (Partition::new(), 0, None)
    } else {
        let out = louvain::run(&initial_graph, &lv)?;
        (out.partition, out.passes, Some(out.modularity))
    };
    let initial_static_s = started.elapsed().as_secs_f64();

    let mut tracker = IncrementalTracker::from_parts(initial_graph, partition, config.mode)?;
    if let Some(sink) = journal {
        tracker.set_journal(sink)?;
    }

    let mut rows = vec![CheckpointRow {
        subset_index: 0,
        edges_so_far: plan.initial.len(),
        q_incremental: tracker.modularity()?,
        q_static_rerun: if config.static_rerun { q0 } else { None },
        elapsed_incremental_s: 0.0,
        elapsed_static_s: (config.static_rerun && q0.is_some()).then_some(initial_static_s),
    }];

    let mut edges = plan.initial.len();
    let mut elapsed_inc = 0.0;
    let mut elapsed_static = 0.0;
    for (i, subset) in plan.subsets.iter().enumerate() {
        let t = Instant::now();
        for &e in subset {
            tracker.apply(e)?;
        }
        elapsed_inc += t.elapsed().as_secs_f64();
        edges += subset.len();

        let q_incremental = tracker.modularity()?;
        let q_static_rerun = if config.static_rerun && tracker.graph().total_weight() > 0.0 {
            let t = Instant::now();
            let q = louvain::run(tracker.graph(), &lv)?.modularity;
            elapsed_static += t.elapsed().as_secs_f64();
            Some(q)
        } else {
            None
        };
        rows.push(CheckpointRow {
            subset_index: i + 1,
            edges_so_far: edges,
            q_incremental,
            q_static_rerun,
            elapsed_incremental_s: elapsed_inc,
            elapsed_static_s: config.static_rerun.then_some(elapsed_static),
        });
    }
    tracker.flush_journal()?;

    let op_stats = tracker.stats().unwrap_or_default();
    let (final_graph, final_partition) = tracker.into_parts();
    Ok(ExperimentReport { config, rows, op_stats, initial_passes, final_partition, final_graph })
}
