use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dyncomm::louvain::{self, LouvainConfig};
use dyncomm::{
    load_partition, parse_edge_list, run_experiment, symmetrize, DecisionMode, EdgeEvent, Error, ExperimentConfig,
    Graph, IncrementalTracker, MultiplicityPolicy, OpStats,
};

#[derive(Parser)]
#[command(name = "dyncomm", version, about = "Community detection on growing graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run static Louvain on an edge list and export the partition.
    Detect(DetectArgs),
    /// Split an edge list, detect on the initial part, stream the rest.
    Experiment(ExperimentArgs),
    /// Apply an event stream to a starting partition, one journal line per event.
    Track(TrackArgs),
    /// Summarize operations and edge types from a journal.
    Stats(StatsArgs),
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Seed for the node visit order; file order when absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    /// Partition export destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    ratio: f64,
    #[arg(long, default_value_t = 10)]
    subsets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DecisionMode::PaperFaithful)]
    mode: DecisionMode,
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    /// Re-run Louvain from scratch at every checkpoint.
    #[arg(long)]
    with_static_rerun: bool,
    /// Stream edges in file order instead of a seeded shuffle.
    #[arg(long)]
    keep_order: bool,
    #[arg(long)]
    journal: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrackArgs {
    /// Edge events applied in file order.
    #[arg(long)]
    events: PathBuf,
    /// Edge list of the graph the starting partition covers.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Starting partition export; requires --graph.
    #[arg(long, requires = "graph")]
    partition: Option<PathBuf>,
    #[arg(long, default_value_t = DecisionMode::PaperFaithful)]
    mode: DecisionMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Journal destination; stdout when absent.
    #[arg(long)]
    journal: Option<PathBuf>,
    /// Final partition destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    journal: PathBuf,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(io::stdout()),
    })
}

fn read_events(path: &Path) -> Result<Vec<EdgeEvent>> {
    let parsed = parse_edge_list(open(path)?, 1.0).with_context(|| format!("reading {}", path.display()))?;
    if parsed.self_loops_dropped > 0 {
        eprintln!("dropped {} self-loops from {}", parsed.self_loops_dropped, path.display());
    }
    Ok(parsed.events)
}

/// Parsed, self-loop-free edge list with each unordered pair kept once.
fn read_graph_events(path: &Path) -> Result<Vec<EdgeEvent>> {
    let sym = symmetrize(&read_events(path)?, MultiplicityPolicy::Collapse);
    if sym.duplicates_removed > 0 {
        eprintln!("collapsed {} repeated or reversed edges in {}", sym.duplicates_removed, path.display());
    }
    Ok(sym.events)
}

fn build_graph(events: &[EdgeEvent]) -> Result<Graph> {
    let mut g = Graph::new();
    for e in events {
        g.add_or_increment_edge(e.source, e.target, e.weight)?;
    }
    Ok(g)
}

fn detect(args: DetectArgs) -> Result<()> {
    let g = build_graph(&read_graph_events(&args.input)?)?;
    let config =
        LouvainConfig { gain_threshold: args.threshold, node_order_seed: args.seed, ..LouvainConfig::default() };
    let out = louvain::run(&g, &config)?;
    let mut w = sink(args.out.as_deref())?;
    out.partition.write_export(&mut w)?;
    w.flush()?;
    let summary = format!(
        "q={} passes={} communities={} nodes={} edges={}",
        out.modularity,
        out.passes,
        out.partition.community_count(),
        g.node_count(),
        g.edge_count()
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let events = read_graph_events(&args.input)?;
    let mut config = ExperimentConfig::new(args.ratio, args.subsets, args.seed);
    config.mode = args.mode;
    config.gain_threshold = args.threshold;
    config.static_rerun = args.with_static_rerun;
    config.split.keep_order = args.keep_order;
    let journal = match &args.journal {
        Some(p) => Some(sink(Some(p))?),
        None => None,
    };
    let report = run_experiment(&events, config, journal)?;
    let mut w = sink(args.out.as_deref())?;
    report.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn track(args: TrackArgs) -> Result<()> {
    let events = match parse_edge_list(open(&args.events)?, 1.0) {
        Ok(parsed) => parsed.events,
        Err(Error::EmptyInput) => Vec::new(),
        Err(e) => return Err(e).with_context(|| format!("reading {}", args.events.display())),
    };
    let mut tracker = match (&args.graph, &args.partition) {
        (Some(gp), Some(pp)) => {
            let g = build_graph(&read_graph_events(gp)?)?;
            let p = load_partition(&g, open(pp)?).with_context(|| format!("reading {}", pp.display()))?;
            IncrementalTracker::from_parts(g, p, args.mode)?
        }
        (Some(gp), None) => {
            let g = build_graph(&read_graph_events(gp)?)?;
            let p = louvain::run(&g, &LouvainConfig::seeded(args.seed))?.partition;
            IncrementalTracker::from_parts(g, p, args.mode)?
        }
        (None, _) => IncrementalTracker::new(args.mode),
    };
    tracker.set_journal(sink(args.journal.as_deref())?)?;
    for e in events {
        tracker.apply(e)?;
    }
    tracker.flush_journal()?;
    let mut w = sink(args.out.as_deref())?;
    tracker.partition().write_export(&mut w)?;
    w.flush()?;
    eprintln!(
        "q={} communities={} nodes={}",
        tracker.modularity()?,
        tracker.partition().community_count(),
        tracker.graph().node_count()
    );
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let stats =
        OpStats::from_journal(open(&args.journal)?).with_context(|| format!("reading {}", args.journal.display()))?;
    print!("{}", stats.table()?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(a) => detect(a),
        Command::Experiment(a) => experiment(a),
        Command::Track(a) => track(a),
        Command::Stats(a) => stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
