//! Modularity-based community detection for growing graphs.
//!
//! A static Louvain run ([`louvain::run`]) gives the starting partition; after
//! that every inserted edge is folded in by [`incremental::apply_edge`] at
//! (almost always) constant cost.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod incremental;
pub mod ingest;
pub mod louvain;
pub mod partition;

pub use error::{Error, Result};
pub use experiment::{run_experiment, CheckpointRow, ExperimentConfig, ExperimentReport};
pub use graph::{DuplicatePolicy, EdgeOutcome, Graph, NodeId, Weight};
pub use incremental::{
    apply_edge, classify, decision_gain_cross, should_merge, AppliedOp, CrossGains, DecisionMode, EdgeType,
    IncrementalTracker, OpStats, Operation,
};
pub use ingest::{parse_edge_list, split_stream, symmetrize, EdgeEvent, MultiplicityPolicy, SplitOptions, StreamPlan};
pub use louvain::{aggregate, local_move_phase, AggregationMap, LouvainConfig, LouvainOutcome};
pub use partition::{load_partition, modularity, modularity_by_fractions, modularity_by_pairs, CommunityId, Partition};
