//! Heuristic minor embedding in the style of Cai, Macready and Roy.
//!
//! Variables are placed one at a time. A variable's chain is a root qubit
//! joined by shortest paths to the chains of its already placed neighbours.
//! A qubit costs `(1 + history) * alpha^usage`, where `usage` counts the other
//! chains sitting on it and `history` counts the rounds it was overused.
//!
//! After a placement, every placed chain that still waits on unplaced
//! neighbours is grown until it has enough free boundary qubits for them, so
//! compact clusters of short chains do not wall each other in. Overlaps left
//! after the first pass are resolved by ripping up and re-routing every
//! variable with a slowly growing `alpha`. A final pass prunes dead-end qubits
//! and re-routes chains while that keeps them no longer and disjoint.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{validate_embedding, Embedding, HardwareGraph, LogicalGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbedParams {
    /// Randomized restarts before giving up.
    pub max_tries: usize,
    /// Rip-up-and-reroute rounds per try.
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            max_tries: 10,
            max_rounds: 40,
            seed: 0,
        }
    }
}

/// No disjoint embedding was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedFailure {
    pub tries: usize,
    pub reason: String,
}

impl fmt::Display for EmbedFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "embedding failed after {} tries: {}", self.tries, self.reason)
    }
}

impl std::error::Error for EmbedFailure {}

/// Shortening passes without improvement before stopping.
const SHORTEN_PATIENCE: usize = 3;

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // min-heap on cost, then qubit id
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

struct Router<'a> {
    hw: &'a HardwareGraph,
    adj: Vec<Vec<usize>>,
    chains: Vec<Vec<usize>>,
    usage: Vec<u32>,
    /// Rounds each qubit has spent overused; contested qubits get dearer.
    history: Vec<f64>,
    alpha: f64,
}

impl Router<'_> {
    fn weight(&self, q: usize) -> f64 {
        (1.0 + self.history[q]) * self.alpha.powi(self.usage[q].min(60) as i32)
    }

    fn place(&mut self, var: usize, chain: Vec<usize>) {
        for &q in &chain {
            self.usage[q] += 1;
        }
        self.chains[var] = chain;
    }

    fn rip_up(&mut self, var: usize) -> Vec<usize> {
        let chain = std::mem::take(&mut self.chains[var]);
        for &q in &chain {
            self.usage[q] -= 1;
        }
        chain
    }

    /// Node-weighted Dijkstra from `source`. `dist[q]` is the summed weight of
    /// the qubits strictly between the source chain and `q`.
    fn distances(&self, source: &[usize]) -> (Vec<f64>, Vec<usize>) {
        let n = self.hw.num_qubits();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut in_source = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in source {
            in_source[s] = true;
            dist[s] = 0.0;
            heap.push(Entry(0.0, s));
        }
        while let Some(Entry(d, q)) = heap.pop() {
            if d > dist[q] {
                continue;
            }
            let step = if in_source[q] { 0.0 } else { self.weight(q) };
            for &w in self.hw.neighbors(q) {
                let nd = d + step;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = q;
                    heap.push(Entry(nd, w));
                }
            }
        }
        (dist, pred)
    }

    /// Best chain for `var` given the current chains of its neighbours.
    fn route(&self, var: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        let n = self.hw.num_qubits();
        let placed: Vec<usize> = self.adj[var]
            .iter()
            .copied()
            .filter(|&u| !self.chains[u].is_empty())
            .collect();
        let searches: Vec<(Vec<f64>, Vec<usize>, usize)> = placed
            .iter()
            .map(|&u| {
                let (d, p) = self.distances(&self.chains[u]);
                (d, p, u)
            })
            .collect();
        let mut best_cost = f64::INFINITY;
        let mut candidates = Vec::new();
        for q in 0..n {
            let mut cost = self.weight(q);
            for (d, _, _) in &searches {
                cost += d[q];
            }
            if !cost.is_finite() {
                continue;
            }
            let tol = 1e-9 * cost.abs().max(1.0);
            if candidates.is_empty() || cost < best_cost - tol {
                best_cost = cost;
                candidates.clear();
                candidates.push(q);
            } else if cost <= best_cost + tol {
                candidates.push(q);
            }
        }
        let root = *candidates.choose(rng)?;
        let mut chain = vec![root];
        for (_, pred, u) in &searches {
            let target = &self.chains[*u];
            let mut q = root;
            loop {
                if target.contains(&q) {
                    break;
                }
                let p = pred[q];
                if p == usize::MAX || target.contains(&p) {
                    break;
                }
                chain.push(p);
                q = p;
            }
        }
        chain.sort_unstable();
        chain.dedup();
        Some(chain)
    }

    /// Free qubits adjacent to the chain of `var`.
    fn boundary(&self, var: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.chains[var]
            .iter()
            .flat_map(|&q| self.hw.neighbors(q))
            .copied()
            .filter(|&r| self.usage[r] == 0)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Grows the chain of `var` into free space until it has at least `need`
    /// free neighbouring qubits, one qubit at a time, each time taking the
    /// boundary qubit that adds the most new boundary.
    fn reserve(&mut self, var: usize, need: usize, rng: &mut ChaCha8Rng) {
        loop {
            let boundary = self.boundary(var);
            if boundary.len() >= need {
                return;
            }
            let mut best = Vec::new();
            let mut best_gain = 0isize;
            for &q in &boundary {
                let fresh = self
                    .hw
                    .neighbors(q)
                    .iter()
                    .filter(|&&r| self.usage[r] == 0 && boundary.binary_search(&r).is_err())
                    .count() as isize;
                let gain = fresh - 1;
                if gain > best_gain {
                    best_gain = gain;
                    best.clear();
                }
                if gain == best_gain && gain > 0 {
                    best.push(q);
                }
            }
            let Some(&q) = best.choose(rng) else {
                return;
            };
            self.usage[q] += 1;
            let chain = &mut self.chains[var];
            let at = chain.binary_search(&q).unwrap_or_else(|i| i);
            chain.insert(at, q);
        }
    }

    fn touches(&self, a: &[usize], b: &[usize]) -> bool {
        a.iter()
            .any(|&q| self.hw.neighbors(q).iter().any(|r| b.binary_search(r).is_ok()))
    }

    fn connected(&self, chain: &[usize]) -> bool {
        let Some(&start) = chain.first() else {
            return false;
        };
        let mut seen = vec![start];
        let mut k = 0;
        while k < seen.len() {
            let q = seen[k];
            k += 1;
            for &r in self.hw.neighbors(q) {
                if chain.binary_search(&r).is_ok() && !seen.contains(&r) {
                    seen.push(r);
                }
            }
        }
        seen.len() == chain.len()
    }

    /// Drops qubits of `var`'s chain that neither connectivity nor any
    /// logical coupling needs.
    fn prune(&mut self, var: usize, rng: &mut ChaCha8Rng) {
        let mut order = self.chains[var].clone();
        order.shuffle(rng);
        for q in order {
            let chain = &self.chains[var];
            if chain.len() == 1 {
                break;
            }
            let rest: Vec<usize> = chain.iter().copied().filter(|&r| r != q).collect();
            let keeps_couplings = self.adj[var]
                .iter()
                .all(|&u| self.touches(&rest, &self.chains[u]));
            if keeps_couplings && self.connected(&rest) {
                self.usage[q] -= 1;
                self.chains[var] = rest;
            }
        }
    }

    fn max_usage(&self) -> u32 {
        self.usage.iter().copied().max().unwrap_or(0)
    }
}

/// Breadth-first placement order from a random start in each component.
fn placement_order(adj: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = adj.len();
    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(rng);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in starts {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut k = order.len();
        order.push(s);
        while k < order.len() {
            let u = order[k];
            k += 1;
            let mut next: Vec<usize> = adj[u].iter().copied().filter(|&w| !seen[w]).collect();
            next.shuffle(rng);
            for w in next {
                seen[w] = true;
                order.push(w);
            }
        }
    }
    order
}

fn owner_of(router: &Router<'_>, q: usize) -> Vec<usize> {
    if router.usage[q] == 0 {
        return Vec::new();
    }
    (0..router.chains.len())
        .filter(|&v| router.chains[v].binary_search(&q).is_ok())
        .collect()
}

fn attempt(
    logical: &LogicalGraph,
    hw: &HardwareGraph,
    max_rounds: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<usize>>> {
    let mut router = Router {
        hw,
        adj: logical.adjacency(),
        chains: vec![Vec::new(); logical.num_vars],
        usage: vec![0; hw.num_qubits()],
        history: vec![0.0; hw.num_qubits()],
        alpha: 2.0,
    };
    let alpha_cap = (hw.num_qubits() as f64).max(4.0);
    // unplaced logical neighbours per variable
    router.alpha = alpha_cap;
    let mut pending: Vec<usize> = router.adj.iter().map(Vec::len).collect();
    for v in placement_order(&router.adj, rng) {
        let chain = router.route(v, rng)?;
        router.place(v, chain);
        let adj_v = router.adj[v].clone();
        for &u in &adj_v {
            pending[u] -= 1;
        }
        // keep room around every placed chain for the neighbours still to
        // come, so no chain gets walled in
        let mut touched = vec![v];
        for &q in &router.chains[v] {
            for &r in hw.neighbors(q) {
                touched.extend(owner_of(&router, r));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        for u in touched {
            if pending[u] > 0 {
                router.reserve(u, pending[u], rng);
            }
        }
    }
    let mut round = 0;
    while router.max_usage() > 1 {
        if round == max_rounds {
            return None;
        }
        round += 1;
        for q in 0..hw.num_qubits() {
            if router.usage[q] > 1 {
                router.history[q] += 1.0;
            }
        }
        router.alpha = (router.alpha * 1.1).min(alpha_cap);
        let mut order: Vec<usize> = (0..logical.num_vars).collect();
        order.shuffle(rng);
        for v in order {
            router.rip_up(v);
            let chain = router.route(v, rng)?;
            router.place(v, chain);
        }
    }

    // shorten chains while staying disjoint; equal-length moves are taken
    // too so chains can drift out of each other's way
    router.alpha = alpha_cap * alpha_cap;
    let total = |r: &Router<'_>| r.chains.iter().map(Vec::len).sum::<usize>();
    for v in 0..logical.num_vars {
        router.prune(v, rng);
    }
    let mut stale = 0;
    while stale < SHORTEN_PATIENCE {
        let before = total(&router);
        let mut order: Vec<usize> = (0..logical.num_vars).collect();
        order.shuffle(rng);
        for v in order {
            let old = router.rip_up(v);
            match router.route(v, rng) {
                Some(chain)
                    if chain.len() <= old.len() && chain.iter().all(|&q| router.usage[q] == 0) =>
                {
                    router.place(v, chain);
                    for u in router.adj[v].clone() {
                        router.prune(u, rng);
                    }
                }
                _ => router.place(v, old),
            }
        }
        if total(&router) < before {
            stale = 0;
        } else {
            stale += 1;
        }
    }
    Some(router.chains)
}

/// Searches for a valid embedding of `logical` into `hw`. Every returned
/// embedding passes [`validate_embedding`]; failure is reported as a value.
pub fn find_embedding(
    logical: &LogicalGraph,
    hw: &HardwareGraph,
    params: &EmbedParams,
) -> Result<Embedding, EmbedFailure> {
    if logical.num_vars == 0 {
        return Ok(Embedding::default());
    }
    if logical.num_vars > hw.num_qubits() {
        return Err(EmbedFailure {
            tries: 0,
            reason: format!(
                "{} variables exceed {} qubits",
                logical.num_vars,
                hw.num_qubits()
            ),
        });
    }
    let tries = params.max_tries.max(1);
    for t in 0..tries {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(t as u64);
        // consume one draw so streams diverge even for tiny graphs
        let _: u64 = rng.gen();
        let Some(chains) = attempt(logical, hw, params.max_rounds, &mut rng) else {
            continue;
        };
        let emb = Embedding::new(chains.into_iter().enumerate().collect::<BTreeMap<_, _>>());
        let report = validate_embedding(logical, hw, &emb);
        if report.is_valid() {
            return Ok(emb);
        }
        log::debug!("discarding invalid candidate embedding: {:?}", report.violations);
    }
    Err(EmbedFailure {
        tries,
        reason: "chains still overlap after rip-up and re-route".into(),
    })
}
