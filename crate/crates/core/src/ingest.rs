//! Edge-list loading and stream preparation.
//!
//! Input is SNAP-style text: `#` comment lines, then one edge per line as two
//! whitespace-separated integer ids with an optional numeric weight.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{NodeId, Weight};

/// One stream element: an observed interaction of `weight` between two nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeEvent {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: Weight,
}

impl EdgeEvent {
    pub fn new(source: u64, target: u64, weight: Weight) -> Self {
        Self { source: NodeId(source), target: NodeId(target), weight }
    }

    /// Endpoints with the smaller id first.
    pub fn canonical(self) -> Self {
        if self.source <= self.target {
            self
        } else {
            Self { source: self.target, target: self.source, ..self }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedEdgeList {
    pub events: Vec<EdgeEvent>,
    pub self_loops_dropped: usize,
}

pub fn parse_edge_list<R: BufRead>(reader: R, default_weight: Weight) -> Result<ParsedEdgeList> {
    let mut out = ParsedEdgeList::default();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let event = parse_line(line, default_weight).map_err(|reason| Error::MalformedLine { line: n + 1, reason })?;
        if event.source == event.target {
            out.self_loops_dropped += 1;
        } else {
            out.events.push(event);
        }
    }
    if out.events.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

fn parse_line(line: &str, default_weight: Weight) -> std::result::Result<EdgeEvent, String> {
    let mut fields = line.split_whitespace();
    let mut id = |what: &str| -> std::result::Result<NodeId, String> {
        let field = fields.next().ok_or_else(|| format!("missing {what} id"))?;
        field.parse().map(NodeId).map_err(|_| format!("bad {what} id {field:?}"))
    };
    let source = id("source")?;
    let target = id("target")?;
    let weight = match fields.next() {
        None => default_weight,
        Some(field) => field.parse::<f64>().map_err(|_| format!("bad weight {field:?}"))?,
    };
    if fields.next().is_some() {
        return Err("too many fields".into());
    }
    if !(weight.is_finite() && weight > 0.0) {
        return Err(format!("weight must be positive, got {weight}"));
    }
    Ok(EdgeEvent { source, target, weight })
}

/// How repeated unordered pairs are folded by [`symmetrize`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MultiplicityPolicy {
    /// Keep the first occurrence's weight.
    #[default]
    Collapse,
    /// Sum the weights of all occurrences.
    SumWeights,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrized {
    pub events: Vec<EdgeEvent>,
    pub duplicates_removed: usize,
}

/// Folds direction pairs and repeats into one canonical event per unordered
/// pair, kept at the position of its first occurrence.
pub fn symmetrize(events: &[EdgeEvent], policy: MultiplicityPolicy) -> Symmetrized {
    let mut seen: HashMap<(NodeId, NodeId), usize> = HashMap::with_capacity(events.len());
    let mut out: Vec<EdgeEvent> = Vec::with_capacity(events.len());
    for &e in events {
        let e = e.canonical();
        match seen.get(&(e.source, e.target)) {
            Some(&at) => {
                if policy == MultiplicityPolicy::SumWeights {
                    out[at].weight += e.weight;
                }
            }
            None => {
                seen.insert((e.source, e.target), out.len());
                out.push(e);
            }
        }
    }
    Symmetrized { duplicates_removed: events.len() - out.len(), events: out }
}

/// Initial portion plus the incremental portion cut into subsets.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamPlan {
    pub initial: Vec<EdgeEvent>,
    pub subsets: Vec<Vec<EdgeEvent>>,
    pub seed: u64,
    pub ratio: f64,
    pub shuffled: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitOptions {
    pub ratio: f64,
    pub subset_count: usize,
    pub seed: u64,
    /// Skip the shuffle and keep file order.
    pub keep_order: bool,
}

impl SplitOptions {
    pub fn new(ratio: f64, subset_count: usize, seed: u64) -> Self {
        Self { ratio, subset_count, seed, keep_order: false }
    }
}

/// Shuffles `events` with a seeded permutation, takes the first
/// `ceil(ratio * n)` as the initial portion and cuts the rest into
/// `subset_count` contiguous blocks whose sizes differ by at most one.
pub fn split_stream(events: &[EdgeEvent], opts: SplitOptions) -> Result<StreamPlan> {
    if !(0.0..1.0).contains(&opts.ratio) {
        return Err(Error::InvalidSplit(format!("ratio must lie in [0, 1), got {}", opts.ratio)));
    }
    if opts.subset_count == 0 {
        return Err(Error::InvalidSplit("subset count must be at least 1".into()));
    }
    let need = opts.subset_count + 1;
    if events.len() < need {
        return Err(Error::TooFewEdges { have: events.len(), need });
    }
    let mut order = events.to_vec();
    if !opts.keep_order {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(opts.seed));
    }
    let n_initial = (opts.ratio * order.len() as f64).ceil() as usize;
    let rest = order.split_off(n_initial);
    let base = rest.len() / opts.subset_count;
    let extra = rest.len() % opts.subset_count;
    let mut subsets = Vec::with_capacity(opts.subset_count);
    let mut iter = rest.into_iter();
    for i in 0..opts.subset_count {
        let size = base + usize::from(i < extra);
        subsets.push(iter.by_ref().take(size).collect());
    }
    Ok(StreamPlan { initial: order, subsets, seed: opts.seed, ratio: opts.ratio, shuffled: !opts.keep_order })
}

const PLAN_MAGIC: &str = "# dyncomm stream-plan v1";

impl StreamPlan {
    pub fn subset_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn total_events(&self) -> usize {
        self.initial.len() + self.subsets.iter().map(Vec::len).sum::<usize>()
    }

    /// Three-column text. A header records the split parameters, and every
    /// block starts with a `# initial <n>` or `# subset <i> <n>` marker.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "{PLAN_MAGIC} seed={} ratio={} subsets={} shuffled={}",
            self.seed,
            self.ratio,
            self.subsets.len(),
            self.shuffled
        )?;
        writeln!(out, "# initial {}", self.initial.len())?;
        out.write_all(format_events(&self.initial).as_bytes())?;
        for (i, subset) in self.subsets.iter().enumerate() {
            writeln!(out, "# subset {} {}", i, subset.len())?;
            out.write_all(format_events(subset).as_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let malformed = |line: usize, reason: &str| Error::MalformedLine { line: line + 1, reason: reason.into() };

        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header?;
        let params = header.strip_prefix(PLAN_MAGIC).ok_or_else(|| malformed(0, "missing stream-plan header"))?;
        let mut seed = None;
        let mut ratio = None;
        let mut subsets_declared = None;
        let mut shuffled = true;
        for kv in params.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| malformed(0, "bad header field"))?;
            let bad = || malformed(0, "bad header value");
            match k {
                "seed" => seed = Some(v.parse().map_err(|_| bad())?),
                "ratio" => ratio = Some(v.parse().map_err(|_| bad())?),
                "subsets" => subsets_declared = Some(v.parse::<usize>().map_err(|_| bad())?),
                "shuffled" => shuffled = v.parse().map_err(|_| bad())?,
                _ => return Err(malformed(0, "unknown header field")),
            }
        }

        let mut initial = Vec::new();
        let mut subsets: Vec<Vec<EdgeEvent>> = Vec::new();
        let mut in_initial = false;
        for (n, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(marker) = line.strip_prefix('#') {
                let mut words = marker.split_whitespace();
                match words.next() {
                    Some("initial") => in_initial = true,
                    Some("subset") => {
                        in_initial = false;
                        subsets.push(Vec::new());
                    }
                    _ => {}
                }
                continue;
            }
            let e = parse_line(line, 1.0).map_err(|reason| Error::MalformedLine { line: n + 1, reason })?;
            if in_initial {
                initial.push(e);
            } else {
                subsets.last_mut().ok_or_else(|| malformed(n, "event outside a block"))?.push(e);
            }
        }
        let (Some(seed), Some(ratio), Some(declared)) = (seed, ratio, subsets_declared) else {
            return Err(malformed(0, "incomplete stream-plan header"));
        };
        if declared != subsets.len() {
            return Err(malformed(0, "subset count does not match header"));
        }
        Ok(Self { initial, subsets, seed, ratio, shuffled })
    }
}

/// Canonical `source target weight` lines, reparseable by [`parse_edge_list`].
pub fn format_events(events: &[EdgeEvent]) -> String {
    let mut s = String::with_capacity(events.len() * 12);
    for e in events {
        let _ = writeln!(s, "{} {} {}", e.source.0, e.target.0, e.weight);
    }
    s
}
