//! Correlation networks and community detection: Newman weighted modularity,
//! a two-phase greedy maximizer with pinned tie-breaking, and an exhaustive
//! set-partition oracle for small graphs.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::stats::CorrelationMatrix;

/// The oracle enumerates Bell(n) partitions; Bell(10) = 115975.
pub const BRUTE_FORCE_MAX_NODES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Abs,
    Squared,
    ClipPositive,
}

impl WeightMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightMode::Abs => "abs",
            WeightMode::Squared => "squared",
            WeightMode::ClipPositive => "clip_positive",
        }
    }

    fn apply(self, rho: f64) -> f64 {
        match self {
            WeightMode::Abs => rho.abs(),
            WeightMode::Squared => rho * rho,
            WeightMode::ClipPositive => rho.max(0.0),
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs" => Ok(WeightMode::Abs),
            "squared" => Ok(WeightMode::Squared),
            "clip-positive" | "clip_positive" => Ok(WeightMode::ClipPositive),
            other => Err(Error::Parameter(format!(
                "unknown weight mode '{other}' (expected abs, squared, or clip-positive)"
            ))),
        }
    }
}

/// Undirected weighted graph; edges stored once with i < j and w > 0.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(u32, u32, f64)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(u32, u32, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for &(i, j, w) in &edges {
            if i >= j || (j as usize) >= n {
                return Err(Error::Parameter(format!(
                    "edge ({i}, {j}) must satisfy i < j < n={n}"
                )));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Parameter(format!(
                    "edge ({i}, {j}) weight must be finite and positive (got {w})"
                )));
            }
            if !seen.insert((i, j)) {
                return Err(Error::Parameter(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }

    /// Weighted degree per node: sum of incident edge weights.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n];
        for &(i, j, w) in &self.edges {
            deg[i as usize] += w;
            deg[j as usize] += w;
        }
        deg
    }
}

/// Node -> community assignment with dense ids in first-appearance order.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub assignment: Vec<u32>,
    pub nc: usize,
    pub q: f64,
}

fn singleton_partition(n: usize) -> Partition {
    Partition {
        assignment: (0..n as u32).collect(),
        nc: n,
        q: 0.0,
    }
}

/// Thresholded projection of a correlation matrix: pair (i, j) becomes an
/// edge iff its transformed weight exceeds eps (and is positive).
pub fn graph_from_correlation(
    c: &CorrelationMatrix,
    weight_mode: WeightMode,
    eps: f64,
) -> WeightedGraph {
    let n = c.n();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = weight_mode.apply(c.get(i, j));
            if w > eps && w > 0.0 {
                edges.push((i as u32, j as u32, w));
            }
        }
    }
    WeightedGraph { n, edges }
}

/// Newman weighted modularity. Q = sum_c [in_c/m - (tot_c/2m)^2]; zero by
/// convention when the graph has no edge weight.
pub fn modularity(g: &WeightedGraph, assignment: &[u32]) -> Result<f64> {
    let n = g.n();
    if assignment.len() != n {
        return Err(Error::Parameter(format!(
            "assignment covers {} nodes, graph has {n}",
            assignment.len()
        )));
    }
    if assignment.iter().any(|&c| c as usize >= n) {
        return Err(Error::Parameter(
            "community ids must be below the node count".into(),
        ));
    }
    let m = g.total_weight();
    if m <= 0.0 {
        return Ok(0.0);
    }
    let deg = g.degrees();
    let mut populated = vec![false; n];
    let mut sig_tot = vec![0.0; n];
    for v in 0..n {
        let c = assignment[v] as usize;
        populated[c] = true;
        sig_tot[c] += deg[v];
    }
    let mut sig_in = vec![0.0; n];
    for &(i, j, w) in g.edges() {
        if assignment[i as usize] == assignment[j as usize] {
            sig_in[assignment[i as usize] as usize] += w;
        }
    }
    let two_m = 2.0 * m;
    let mut q = 0.0;
    for c in 0..n {
        if populated[c] {
            let t = sig_tot[c] / two_m;
            q += sig_in[c] / m - t * t;
        }
    }
    Ok(q)
}

/// Two-phase greedy modularity maximization. Phase 1 sweeps nodes in a
/// seed-deterministic shuffled order (one shuffle per level), moving each
/// node to the neighboring community with the largest strictly positive
/// gain, lowest community id on ties, until a full sweep makes no move.
/// Phase 2 aggregates communities (intra-community weight becomes a
/// self-loop holding twice the internal weight) and recurses; stops when
/// aggregation no longer shrinks the graph.
pub fn louvain(g: &WeightedGraph, seed: u64) -> Partition {
    let n = g.n();
    let m = g.total_weight();
    if n == 0 || m <= 0.0 {
        return singleton_partition(n);
    }
    // Level graph: sorted neighbor lists plus self-loop weights, so every
    // float accumulation order is fixed by node ids, never by hashing.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, w) in g.edges() {
        adj[i as usize].push((j as usize, w));
        adj[j as usize].push((i as usize, w));
    }
    for list in &mut adj {
        list.sort_unstable_by_key(|&(u, _)| u);
    }
    let mut loops = vec![0.0; n];
    let mut node_map: Vec<usize> = (0..n).collect();
    let mut rng = SplitMix64::new(seed);
    let two_m = 2.0 * m;

    loop {
        let nl = adj.len();
        let deg: Vec<f64> = (0..nl)
            .map(|u| loops[u] + adj[u].iter().map(|&(_, w)| w).sum::<f64>())
            .collect();
        let mut comm: Vec<usize> = (0..nl).collect();
        let mut sig_tot = deg.clone();
        let mut order: Vec<usize> = (0..nl).collect();
        rng.partial_shuffle(&mut order, nl);

        let mut nw: BTreeMap<usize, f64> = BTreeMap::new();
        loop {
            let mut moved_any = false;
            for &v in &order {
                let cur = comm[v];
                let kv = deg[v];
                sig_tot[cur] -= kv;
                nw.clear();
                for &(u, w) in &adj[v] {
                    *nw.entry(comm[u]).or_insert(0.0) += w;
                }
                let mut best = cur;
                let mut best_gain =
                    nw.get(&cur).copied().unwrap_or(0.0) - sig_tot[cur] * kv / two_m;
                for (&c, &w) in &nw {
                    let gain = w - sig_tot[c] * kv / two_m;
                    if gain > best_gain {
                        best_gain = gain;
                        best = c;
                    }
                }
                comm[v] = best;
                sig_tot[best] += kv;
                if best != cur {
                    moved_any = true;
                }
            }
            if !moved_any {
                break;
            }
        }

        let mut remap = vec![usize::MAX; nl];
        let mut nc = 0;
        for c in comm.iter_mut() {
            if remap[*c] == usize::MAX {
                remap[*c] = nc;
                nc += 1;
            }
            *c = remap[*c];
        }
        for slot in node_map.iter_mut() {
            *slot = comm[*slot];
        }
        if nc == nl {
            break;
        }

        let mut new_adj: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nc];
        let mut new_loops = vec![0.0; nc];
        for u in 0..nl {
            let cu = comm[u];
            new_loops[cu] += loops[u];
            for &(v, w) in &adj[u] {
                let cv = comm[v];
                if cu == cv {
                    // visited from both endpoints: self-loop holds 2w
                    new_loops[cu] += w;
                } else {
                    *new_adj[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        adj = new_adj
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        loops = new_loops;
    }

    let mut remap = vec![u32::MAX; n];
    let mut nc = 0u32;
    let mut assignment = Vec::with_capacity(n);
    for &c in &node_map {
        if remap[c] == u32::MAX {
            remap[c] = nc;
            nc += 1;
        }
        assignment.push(remap[c]);
    }
    let q = modularity(g, &assignment).expect("louvain assignment is valid");
    Partition {
        assignment,
        nc: nc as usize,
        q,
    }
}

fn rgs_enumerate(n: usize, visit: &mut dyn FnMut(&[u32])) {
    fn rec(a: &mut Vec<u32>, i: usize, mx: u32, visit: &mut dyn FnMut(&[u32])) {
        if i == a.len() {
            visit(a);
            return;
        }
        for v in 0..=mx + 1 {
            a[i] = v;
            rec(a, i + 1, mx.max(v), visit);
        }
    }
    let mut a = vec![0u32; n];
    if n <= 1 {
        visit(&a);
        return;
    }
    rec(&mut a, 1, 0, visit);
}

/// Exhaustive maximum over all set partitions, enumerated as restricted
/// growth strings in lexicographic order; ties keep the lexicographically
/// smallest string.
pub fn brute_force_max_modularity(g: &WeightedGraph) -> Result<Partition> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::Capacity(format!(
            "brute-force oracle is capped at {BRUTE_FORCE_MAX_NODES} nodes (got {n})"
        )));
    }
    if n == 0 || g.total_weight() <= 0.0 {
        return Ok(singleton_partition(n));
    }
    let mut best: Option<(f64, Vec<u32>)> = None;
    rgs_enumerate(n, &mut |a| {
        let q = modularity(g, a).expect("rgs assignment is valid");
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, a.to_vec()));
        }
    });
    let (q, assignment) = best.expect("at least one partition enumerated");
    let nc = assignment.iter().map(|&c| c + 1).max().unwrap_or(0) as usize;
    Ok(Partition { assignment, nc, q })
}
