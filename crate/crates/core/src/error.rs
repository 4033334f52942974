use std::io;

use thiserror::Error;

use crate::graph::NodeId;
use crate::partition::CommunityId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge weight must be positive and finite, got {0}")]
    NonPositiveWeight(f64),

    #[error("self-loop on node {0} rejected")]
    SelfLoopRejected(NodeId),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("node {0} has no community assignment")]
    UnassignedNode(NodeId),

    #[error("node {0} is already assigned to a community")]
    AlreadyAssigned(NodeId),

    #[error("unknown community {0}")]
    UnknownCommunity(CommunityId),

    #[error("cannot merge community {0} with itself")]
    SelfMerge(CommunityId),

    #[error("community seed set is empty")]
    EmptySeedSet,

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("no events processed")]
    NoEventsProcessed,

    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("too few edges: have {have}, need at least {need}")]
    TooFewEdges { have: usize, need: usize },

    #[error("invalid stream split: {0}")]
    InvalidSplit(String),

    #[error("partition file names node {0}, which is not in the graph")]
    UnknownNodeInPartitionFile(NodeId),

    #[error(transparent)]
    Io(#[from] io::Error),
}
