//! Brute-force reference computations that share no code with the library:
//! dense adjacency matrices, the pairwise modularity double sum, and
//! exhaustive enumeration of set partitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

/// Dense symmetric adjacency built from `(u, v, w)` triples. A self-loop of
/// weight `w` is stored as `A_ii = 2w`.
pub struct Dense {
    pub ids: Vec<u64>,
    pub pos: HashMap<u64, usize>,
    pub a: Vec<Vec<f64>>,
}

impl Dense {
    pub fn from_edges(edges: &[(u64, u64, f64)]) -> Self {
        let mut ids: Vec<u64> = Vec::new();
        let mut pos = HashMap::new();
        for &(u, v, _) in edges {
            for x in [u, v] {
                pos.entry(x).or_insert_with(|| {
                    ids.push(x);
                    ids.len() - 1
                });
            }
        }
        let n = ids.len();
        let mut a = vec![vec![0.0; n]; n];
        for &(u, v, w) in edges {
            let (i, j) = (pos[&u], pos[&v]);
            if i == j {
                a[i][i] += 2.0 * w;
            } else {
                a[i][j] += w;
                a[j][i] += w;
            }
        }
        Dense { ids, pos, a }
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.a[i].iter().sum()
    }

    pub fn two_m(&self) -> f64 {
        (0..self.n()).map(|i| self.degree(i)).sum()
    }

    /// `(1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)` with labels by position.
    pub fn q(&self, labels: &[u64]) -> f64 {
        let two_m = self.two_m();
        if two_m == 0.0 {
            return 0.0;
        }
        let k: Vec<f64> = (0..self.n()).map(|i| self.degree(i)).collect();
        let mut q = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                if labels[i] == labels[j] {
                    q += self.a[i][j] - k[i] * k[j] / two_m;
                }
            }
        }
        q / two_m
    }

    /// Same as [`Dense::q`] with labels keyed by node id.
    pub fn q_by_id(&self, labels: &HashMap<u64, u64>) -> f64 {
        let by_pos: Vec<u64> = self.ids.iter().map(|u| labels[u]).collect();
        self.q(&by_pos)
    }

    /// `label -> (sigma_in, sigma_tot)` with internal pairs counted twice.
    pub fn sums(&self, labels: &HashMap<u64, u64>) -> BTreeMap<u64, (f64, f64)> {
        let mut out: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
        for i in 0..self.n() {
            let ci = labels[&self.ids[i]];
            let e = out.entry(ci).or_default();
            e.1 += self.degree(i);
            for j in 0..self.n() {
                if labels[&self.ids[j]] == ci {
                    e.0 += self.a[i][j];
                }
            }
        }
        out
    }
}

/// Every set partition of `n` elements as restricted growth strings.
pub fn set_partitions(n: usize) -> Vec<Vec<u64>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<u64>, max: u64, out: &mut Vec<Vec<u64>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            if i == 0 && c > 0 {
                break;
            }
            cur.push(c);
            rec(i + 1, n, cur, if i == 0 { 0 } else { max.max(c) }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(0, n, &mut Vec::with_capacity(n), 0, &mut out);
    }
    out
}

/// Best modularity over all partitions, by enumeration.
pub fn best_q(d: &Dense) -> (f64, Vec<u64>) {
    set_partitions(d.n())
        .into_iter()
        .map(|labels| (d.q(&labels), labels))
        .fold((f64::NEG_INFINITY, Vec::new()), |best, cand| if cand.0 > best.0 { cand } else { best })
}

/// Random stream of non-self-loop edges over at most `max_nodes` ids with
/// weights drawn from a mix of unit, small integer and fractional values.
pub fn random_stream<R: Rng>(rng: &mut R, max_nodes: u64, events: usize) -> Vec<(u64, u64, f64)> {
    let nodes = rng.gen_range(2..=max_nodes);
    (0..events)
        .map(|_| {
            let u = rng.gen_range(0..nodes);
            let mut v = rng.gen_range(0..nodes - 1);
            if v >= u {
                v += 1;
            }
            (u, v, random_weight(rng))
        })
        .collect()
}

pub fn random_weight<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..3) {
        0 => 1.0,
        1 => rng.gen_range(1..=10) as f64,
        _ => rng.gen_range(0.05..5.0),
    }
}

/// Random simple graph with `n` nodes and edge probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: u64, p: f64) -> Vec<(u64, u64, f64)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v, random_weight(rng)));
            }
        }
    }
    edges
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
