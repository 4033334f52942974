//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails.
//!
//! Dataset-backed criteria read `wiki-Vote.txt` and `Email-Enron.txt` from
//! `$DYNCOMM_DATA_DIR`, or `data/` at the repository root.

mod common;

use std::collections::HashMap;
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::time::Instant;

use common::{random_graph, random_stream, random_weight, Dense};
use dyncomm::louvain::{self, LouvainConfig};
use dyncomm::{
    apply_edge, modularity, modularity_by_fractions, modularity_by_pairs, parse_edge_list, run_experiment,
    should_merge, symmetrize, CommunityId, DecisionMode, EdgeEvent, EdgeType, ExperimentConfig, Graph,
    IncrementalTracker, MultiplicityPolicy, NodeId, Operation, Partition,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

enum Verdict {
    Pass,
    Fail,
    Skip,
    Info,
}

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, name: &str, verdict: Verdict, detail: String) {
        let tag = match verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                self.failed += 1;
                "FAIL"
            }
            Verdict::Skip => "SKIP",
            Verdict::Info => "INFO",
        };
        println!("[{tag}] {id:>3} {name}: {detail}");
    }

    fn check(&mut self, id: &str, name: &str, ok: bool, detail: String) {
        self.line(id, name, if ok { Verdict::Pass } else { Verdict::Fail }, detail);
    }
}

fn labels_of(p: &Partition) -> HashMap<u64, u64> {
    p.assignment().into_iter().map(|(u, c)| (u.0, c.0)).collect()
}

fn build(edges: &[(u64, u64, f64)]) -> Graph {
    let mut g = Graph::new();
    for &(u, v, w) in edges {
        g.add_or_increment_edge(NodeId(u), NodeId(v), w).unwrap();
    }
    g
}

fn data_dir() -> PathBuf {
    std::env::var_os("DYNCOMM_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

/// Parsed, self-loop-free, symmetrized events of a SNAP edge list.
fn load(name: &str) -> Result<Vec<EdgeEvent>, String> {
    let path = data_dir().join(name);
    let file = File::open(&path).map_err(|e| format!("{} not readable ({e})", path.display()))?;
    let parsed = parse_edge_list(BufReader::new(file), 1.0).map_err(|e| e.to_string())?;
    Ok(symmetrize(&parsed.events, MultiplicityPolicy::Collapse).events)
}

fn oracle_fidelity(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut events = 0;
    for s in 0..200 {
        let n = rng.gen_range(1..=300);
        let stream = random_stream(&mut rng, 50, n);
        let mode = if s % 2 == 0 { DecisionMode::PaperFaithful } else { DecisionMode::Exact };
        let mut t = IncrementalTracker::new(mode);
        for i in 0..stream.len() {
            let (u, v, w) = stream[i];
            t.apply(EdgeEvent::new(u, v, w)).unwrap();
            events += 1;
            let d = Dense::from_edges(&stream[..=i]);
            let labels = labels_of(t.partition());
            for (c, (sin, stot)) in d.sums(&labels) {
                let c = CommunityId(c);
                worst = worst.max((t.partition().sigma_in(c).unwrap() - sin).abs());
                worst = worst.max((t.partition().sigma_tot(c).unwrap() - stot).abs());
            }
            let q = d.q_by_id(&labels);
            worst = worst.max((t.modularity().unwrap() - q).abs());
            worst = worst.max((t.tracked_modularity() - q).abs());
        }
    }
    r.check(
        "1",
        "oracle fidelity",
        worst <= 1e-9,
        format!("200 streams, {events} events, max |err| {worst:.2e} (tol 1e-9)"),
    );
}

fn three_forms(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=200);
        let p = rng.gen_range(0.01..0.3);
        let edges = random_graph(&mut rng, n, p);
        if edges.is_empty() {
            continue;
        }
        let g = build(&edges);
        let k = rng.gen_range(1..=n.min(20));
        let part = Partition::from_assignment(&g, g.nodes().map(|u| (u, CommunityId(rng.gen_range(0..k))))).unwrap();
        let eq2 = modularity_by_pairs(&g, &part).unwrap();
        let eq3 = modularity_by_fractions(&g, &part).unwrap();
        let eq5 = modularity(&g, &part).unwrap();
        let oracle = Dense::from_edges(&edges).q_by_id(&labels_of(&part));
        for q in [eq3, eq5, oracle] {
            worst = worst.max((q - eq2).abs());
        }
        done += 1;
    }
    r.check(
        "2",
        "three-form modularity agreement",
        worst <= 1e-9,
        format!("100 graphs, max spread {worst:.2e} (tol 1e-9)"),
    );
}

fn bridged_triads(r: &mut Report) {
    let a = [(1, 2, 13.0), (1, 3, 8.0), (2, 3, 6.0), (4, 5, 12.0), (4, 6, 9.0), (5, 6, 5.0), (3, 4, 2.0)];
    let b = [(1, 2, 13.0), (1, 3, 8.0), (2, 3, 6.0), (3, 4, 2.0), (4, 5, 12.0), (4, 6, 9.0), (5, 6, 5.0)];
    let groups = |seq: &[(u64, u64, f64)]| {
        let mut t = IncrementalTracker::new(DecisionMode::PaperFaithful);
        for &(u, v, w) in seq {
            t.apply(EdgeEvent::new(u, v, w)).unwrap();
        }
        t.partition().groups().into_iter().map(|g| g.into_iter().map(|u| u.0).collect::<Vec<_>>()).collect::<Vec<_>>()
    };
    let (ga, gb) = (groups(&a), groups(&b));
    let ok = ga == vec![vec![1, 2, 3], vec![4, 5, 6]] && gb == vec![vec![1, 2, 3, 4, 5, 6]];
    r.check("3", "bridged-triad sequences", ok, format!("A -> {ga:?}, B -> {gb:?}"));
}

fn unconditional_rules(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut half_new, mut new, mut violations) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    while half_new + new < 10_000 {
        // Starting state: an incremental stream or a Louvain partition.
        let len = rng.gen_range(1..60);
        let mut edges = random_stream(&mut rng, 30, len);
        let (mut g, mut p) = if rng.gen_bool(0.5) {
            let mut t = IncrementalTracker::new(DecisionMode::PaperFaithful);
            for &(u, v, w) in &edges {
                t.apply(EdgeEvent::new(u, v, w)).unwrap();
            }
            t.into_parts()
        } else {
            let g = build(&edges);
            let p = louvain::run(&g, &LouvainConfig::seeded(rng.gen())).unwrap().partition;
            (g, p)
        };
        let mut fresh = 1_000;
        for _ in 0..10 {
            let w = random_weight(&mut rng);
            let nodes: Vec<u64> = g.nodes().map(|u| u.0).collect();
            let (u, v) = if rng.gen_bool(0.5) {
                fresh += 1;
                (nodes[rng.gen_range(0..nodes.len())], fresh)
            } else {
                fresh += 2;
                (fresh - 1, fresh)
            };
            let (u, v) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
            let op = apply_edge(&mut g, &mut p, EdgeEvent::new(u, v, w), DecisionMode::PaperFaithful).unwrap();
            edges.push((u, v, w));
            let d = Dense::from_edges(&edges);
            let chosen = labels_of(&p);
            let q_chosen = d.q_by_id(&chosen);
            let mut alt = chosen.clone();
            let spare = u64::MAX;
            match op.edge_type {
                EdgeType::HalfNew => {
                    half_new += 1;
                    if op.operation != Operation::AssignToExisting {
                        violations += 1;
                    }
                    let fresh_node = if nodes.contains(&u) { v } else { u };
                    alt.insert(fresh_node, spare);
                }
                EdgeType::New => {
                    new += 1;
                    if op.operation != Operation::CreateNew {
                        violations += 1;
                    }
                    alt.insert(u, spare);
                    alt.insert(v, spare - 1);
                }
                _ => unreachable!("generated events are HalfNew or New"),
            }
            let excess = d.q_by_id(&alt) - q_chosen;
            worst = worst.max(excess);
            if excess > 1e-12 {
                violations += 1;
            }
        }
    }
    r.check(
        "4",
        "unconditional rules",
        violations == 0,
        format!("{half_new} half-new + {new} new events, {violations} violations, max Q(alt) - Q(chosen) {worst:.2e} (tol 1e-12)"),
    );
}

fn two_community_no_merge(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut done, mut bad) = (0, 0);
    while done < 1_000 {
        let n = rng.gen_range(4..=60);
        let density = rng.gen_range(0.05..0.6);
        let edges = random_graph(&mut rng, n, density);
        let g = build(&edges);
        let nodes: Vec<NodeId> = g.nodes().collect();
        if nodes.len() < 2 {
            continue;
        }
        let mut side: Vec<u64> = nodes.iter().map(|_| rng.gen_range(0..2)).collect();
        side[0] = 0;
        side[1] = 1;
        let p = Partition::from_assignment(&g, nodes.iter().zip(&side).map(|(&u, &s)| (u, CommunityId(s)))).unwrap();
        let a: Vec<NodeId> = nodes.iter().zip(&side).filter(|(_, &s)| s == 0).map(|(&u, _)| u).collect();
        let b: Vec<NodeId> = nodes.iter().zip(&side).filter(|(_, &s)| s == 1).map(|(&u, _)| u).collect();
        let (u, v) = (a[rng.gen_range(0..a.len())], b[rng.gen_range(0..b.len())]);
        let w = random_weight(&mut rng);
        let m = g.total_weight();

        let lib = should_merge(m, w, p.sigma_tot(CommunityId(0)).unwrap(), p.sigma_tot(CommunityId(1)).unwrap());
        let sums = Dense::from_edges(&edges).sums(&labels_of(&p));
        let (sa, sb) = (sums[&0].1, sums[&1].1);
        let lhs = w * (2.0 * m + 2.0 * w);
        let rhs = 2.0 * (sa + w) * (sb + w);
        let identity = (lhs - rhs) - (-2.0 * m * w - 2.0 * sa * sb);
        let (mut g2, mut p2) = (g.clone(), p.clone());
        let op = apply_edge(&mut g2, &mut p2, EdgeEvent::new(u.0, v.0, w), DecisionMode::PaperFaithful).unwrap();
        if lib
            || lhs > rhs
            || identity.abs() > 1e-9 * rhs.max(1.0)
            || (sa + sb - 2.0 * m).abs() > 1e-9
            || op.operation == Operation::Merge
        {
            bad += 1;
        }
        done += 1;
    }
    r.check("5", "two-community no-merge", bad == 0, format!("1000 graphs, {bad} merges or identity mismatches"));
}

fn wiki_vote_static(r: &mut Report, events: &Result<Vec<EdgeEvent>, String>) {
    let events = match events {
        Ok(e) => e,
        Err(why) => return r.check("6", "wiki-Vote static Q in [0.39, 0.43]", false, why.clone()),
    };
    let mut g = Graph::new();
    for e in events {
        g.add_or_increment_edge(e.source, e.target, e.weight).unwrap();
    }
    let started = Instant::now();
    let qs: Vec<f64> = (0..10).map(|s| louvain::run(&g, &LouvainConfig::seeded(s)).unwrap().modularity).collect();
    let (lo, hi) = qs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(q), hi.max(q)));
    r.check(
        "6",
        "wiki-Vote static Q in [0.39, 0.43]",
        lo >= 0.39 && hi <= 0.43,
        format!(
            "{} nodes, {} edges, 10 seeds Q min {lo:.4} max {hi:.4}, {:.1}s",
            g.node_count(),
            g.edge_count(),
            started.elapsed().as_secs_f64()
        ),
    );
}

fn wiki_vote_incremental(r: &mut Report, events: &Result<Vec<EdgeEvent>, String>) {
    let events = match events {
        Ok(e) => e,
        Err(why) => {
            r.check("7", "wiki-Vote incremental final Q >= 0.38", false, why.clone());
            r.check("9", "wiki-Vote merge fraction < 2%", false, why.clone());
            r.check("10a", "wiki-Vote incremental half streams in < 5 s", false, why.clone());
            return;
        }
    };
    let report = run_experiment(events, ExperimentConfig::new(0.5, 10, 0), None).unwrap();
    let last = report.last();
    r.check(
        "7",
        "wiki-Vote incremental final Q >= 0.38",
        last.q_incremental >= 0.38,
        format!(
            "initial Q {:.4}, final Q {:.4} after {} edges",
            report.first().q_incremental,
            last.q_incremental,
            last.edges_so_far
        ),
    );
    let merges = report.op_stats.count(Operation::Merge);
    let total = report.op_stats.total();
    let pct = report.op_stats.percentage(Operation::Merge).unwrap_or(0.0);
    r.check("9", "wiki-Vote merge fraction < 2%", pct < 2.0, format!("{merges} merges of {total} events ({pct:.3}%)"));
    r.check(
        "10a",
        "wiki-Vote incremental half streams in < 5 s",
        last.elapsed_incremental_s < 5.0,
        format!("{total} events in {:.3}s", last.elapsed_incremental_s),
    );
}

fn enron_degradation(r: &mut Report) {
    let events = match load("Email-Enron.txt") {
        Ok(e) => e,
        Err(why) => {
            return r.line(
                "8",
                "Enron checkpoint decline <= 10%",
                Verdict::Skip,
                format!("optional dataset absent: {why}"),
            )
        }
    };
    let report = run_experiment(&events, ExperimentConfig::new(0.5, 10, 0), None).unwrap();
    let (first, last) = (report.first().q_incremental, report.last().q_incremental);
    let decline = (first - last) / first;
    r.check(
        "8",
        "Enron checkpoint decline <= 10%",
        decline <= 0.10,
        format!("Q {first:.4} -> {last:.4}, relative decline {:.2}%", 100.0 * decline),
    );
}

/// Planted-community graph: groups of 20, about 8 internal and 2 external
/// neighbours per node.
fn planted(rng: &mut ChaCha8Rng, n: u64) -> (Graph, Partition) {
    let group = 20;
    let mut g = Graph::new();
    for u in 0..n {
        let base = u / group * group;
        for _ in 0..4 {
            let v = base + rng.gen_range(0..group.min(n - base));
            if v != u {
                g.add_or_increment_edge(NodeId(u), NodeId(v), 1.0).unwrap();
            }
        }
        if rng.gen_bool(0.5) {
            let v = rng.gen_range(0..n);
            if v != u {
                g.add_or_increment_edge(NodeId(u), NodeId(v), 1.0).unwrap();
            }
        }
    }
    let p = Partition::from_assignment(&g, g.nodes().map(|u| (u, CommunityId(u.0 / group)))).unwrap();
    (g, p)
}

fn flat_cost(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sizes = [2_000u64, 4_000, 8_000, 12_000, 20_000];
    let reps = 12;
    let per_rep = 4_000;
    let graphs: Vec<(u64, Graph, Partition)> = sizes
        .iter()
        .map(|&n| {
            let (g, p) = planted(&mut rng, n);
            (n, g, p)
        })
        .collect();
    let mut obs: Vec<((EdgeType, Operation), f64, f64)> = Vec::new();
    // Sizes are visited in a fresh random order each round so that drift in
    // machine speed over the run cannot line up with graph size.
    for _ in 0..reps {
        let mut order: Vec<usize> = (0..graphs.len()).collect();
        order.shuffle(&mut rng);
        for i in order {
            let (n, g0, p0) = &graphs[i];
            let n = *n;
            let (mut g, mut p) = (g0.clone(), p0.clone());
            let mut fresh = n;
            let mut times: HashMap<(EdgeType, Operation), Vec<f64>> = HashMap::new();
            for _ in 0..per_rep {
                let roll: f64 = rng.gen();
                let (u, v) = if roll < 0.7 {
                    let u = rng.gen_range(0..n);
                    let mut v = rng.gen_range(0..n - 1);
                    if v >= u {
                        v += 1;
                    }
                    (u, v)
                } else if roll < 0.9 {
                    fresh += 1;
                    (rng.gen_range(0..n), fresh)
                } else {
                    fresh += 2;
                    (fresh - 1, fresh)
                };
                let e = EdgeEvent::new(u, v, 1.0);
                let t = Instant::now();
                let op = apply_edge(&mut g, &mut p, e, DecisionMode::PaperFaithful).unwrap();
                let ns = t.elapsed().as_nanos() as f64;
                if op.operation != Operation::Merge {
                    times.entry((op.edge_type, op.operation)).or_default().push(ns);
                }
            }
            for (key, mut ts) in times {
                if ts.len() < 50 {
                    continue;
                }
                ts.sort_by(f64::total_cmp);
                obs.push((key, n as f64, ts[ts.len() / 2]));
            }
        }
    }
    // Slope of median cost on n with a separate intercept per (edge type,
    // operation), so a shift in operation mix across sizes is not read as a
    // size effect.
    let mut groups: HashMap<(EdgeType, Operation), (f64, f64, f64)> = HashMap::new();
    for &(key, x, y) in &obs {
        let e = groups.entry(key).or_default();
        e.0 += 1.0;
        e.1 += x;
        e.2 += y;
    }
    let centred: Vec<(f64, f64)> = obs
        .iter()
        .map(|&(key, x, y)| {
            let (c, sx, sy) = groups[&key];
            (x - sx / c, y - sy / c)
        })
        .collect();
    let sxx: f64 = centred.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = centred.iter().map(|(x, y)| x * y).sum();
    let slope = sxy / sxx;
    let sse: f64 = centred.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let df = (obs.len() - groups.len() - 1) as f64;
    let se = (sse / df / sxx).sqrt();
    let t = if se > 0.0 {
        slope / se
    } else if slope == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    let crit = StudentsT::new(0.0, 1.0, df).unwrap().inverse_cdf(0.975);
    let ys: Vec<f64> = obs.iter().map(|o| o.2).collect();
    r.check(
        "10b",
        "per-event non-merge cost flat in graph size",
        t.abs() < crit,
        format!(
            "n {}..{}, {} groups, medians {:.0}..{:.0} ns/event, slope {slope:.3e} ns/node, |t| {:.2} vs t(0.975, {}) {crit:.2}",
            sizes[0],
            sizes[sizes.len() - 1],
            groups.len(),
            ys.iter().cloned().fold(f64::INFINITY, f64::min),
            ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            t.abs(),
            df
        ),
    );
}

fn main() {
    let mut r = Report { failed: 0 };
    oracle_fidelity(&mut r);
    three_forms(&mut r);
    bridged_triads(&mut r);
    unconditional_rules(&mut r);
    two_community_no_merge(&mut r);
    let wiki = load("wiki-Vote.txt");
    wiki_vote_static(&mut r, &wiki);
    wiki_vote_incremental(&mut r, &wiki);
    enron_degradation(&mut r);
    flat_cost(&mut r);
    r.line(
        "11",
        "reference numbers",
        Verdict::Info,
        "exact reference values need the original random splits and seeds; 6 to 10 are the tolerant substitutes".into(),
    );
    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
