//! Tree instances of the restricted vertex multicut problem.
//!
//! An instance is an undirected tree on dense vertex ids `0..n` plus a list of
//! terminal pairs. Every pair must be disconnected by removing non-terminal
//! vertices; because the graph is a tree, each pair has exactly one path.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("n must be ≥ 3 (got {0})")]
    TooFewVertices(usize),
    #[error("k must be ≥ 1")]
    NoPairs,
    #[error(
        "generation failed: placed {placed} of {requested} terminal pairs within {attempts} draws"
    )]
    GenerationFailed {
        placed: usize,
        requested: usize,
        attempts: usize,
    },
    #[error("edges: not a tree ({0})")]
    NotATree(String),
    #[error("{field}: invalid vertex {vertex} (num_vertices = {num_vertices})")]
    InvalidVertex {
        field: &'static str,
        vertex: usize,
        num_vertices: usize,
    },
    #[error("terminal_pairs[{index}]: adjacent terminals ({s}, {t})")]
    AdjacentTerminals { index: usize, s: usize, t: usize },
    #[error("terminal_pairs[{index}]: source equals target ({s})")]
    DegeneratePair { index: usize, s: usize },
    #[error("terminal_pairs[{index}]: duplicate pair ({s}, {t})")]
    DuplicatePair { index: usize, s: usize, t: usize },
    #[error("path endpoints must differ (got {0})")]
    SameEndpoints(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// The unique simple path between two tree vertices, endpoints included.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn source(&self) -> usize {
        self.0[0]
    }

    pub fn target(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Vertices strictly between the endpoints.
    pub fn internal(&self) -> &[usize] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }
}

impl From<Path> for Vec<usize> {
    fn from(p: Path) -> Self {
        p.0
    }
}

/// A tree with terminal pairs.
///
/// Edges are stored canonically (`u < v`, sorted ascending). Terminal pairs
/// keep their given orientation and order.
#[derive(Clone, PartialEq, Eq)]
pub struct TreeInstance {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
    terminal_pairs: Vec<(usize, usize)>,
    seed: u64,
    adjacency: Vec<Vec<usize>>,
    // rooted at vertex 0
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl fmt::Debug for TreeInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeInstance")
            .field("num_vertices", &self.num_vertices)
            .field("edges", &self.edges)
            .field("terminal_pairs", &self.terminal_pairs)
            .field("seed", &self.seed)
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    num_vertices: usize,
    edges: Vec<[usize; 2]>,
    terminal_pairs: Vec<[usize; 2]>,
    seed: u64,
}

impl TreeInstance {
    /// Validates and builds an instance. Edge orientation and order are
    /// normalized; everything else is checked against the tree and
    /// terminal-pair invariants.
    pub fn new(
        num_vertices: usize,
        edges: Vec<(usize, usize)>,
        terminal_pairs: Vec<(usize, usize)>,
        seed: u64,
    ) -> Result<Self, InstanceError> {
        if num_vertices == 0 {
            return Err(InstanceError::NotATree("no vertices".into()));
        }
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .collect();
        for &(u, v) in &edges {
            for w in [u, v] {
                if w >= num_vertices {
                    return Err(InstanceError::InvalidVertex {
                        field: "edges",
                        vertex: w,
                        num_vertices,
                    });
                }
            }
            if u == v {
                return Err(InstanceError::NotATree(format!("self-loop at {u}")));
            }
        }
        edges.sort_unstable();
        if edges.len() != num_vertices - 1 {
            return Err(InstanceError::NotATree(format!(
                "{} edges for {} vertices",
                edges.len(),
                num_vertices
            )));
        }
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(InstanceError::NotATree(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }

        let mut adjacency = vec![Vec::new(); num_vertices];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }

        let mut parent = vec![usize::MAX; num_vertices];
        let mut depth = vec![0usize; num_vertices];
        let mut seen = vec![false; num_vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        parent[0] = 0;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                    depth[w] = depth[u] + 1;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != num_vertices {
            return Err(InstanceError::NotATree(format!(
                "only {reached} of {num_vertices} vertices reachable from vertex 0"
            )));
        }

        let mut instance = TreeInstance {
            num_vertices,
            edges,
            terminal_pairs: Vec::new(),
            seed,
            adjacency,
            parent,
            depth,
        };

        let mut seen_pairs = HashSet::new();
        for (index, &(s, t)) in terminal_pairs.iter().enumerate() {
            for w in [s, t] {
                if w >= num_vertices {
                    return Err(InstanceError::InvalidVertex {
                        field: "terminal_pairs",
                        vertex: w,
                        num_vertices,
                    });
                }
            }
            if s == t {
                return Err(InstanceError::DegeneratePair { index, s });
            }
            if instance.are_adjacent(s, t) {
                return Err(InstanceError::AdjacentTerminals { index, s, t });
            }
            if !seen_pairs.insert((s.min(t), s.max(t))) {
                return Err(InstanceError::DuplicatePair { index, s, t });
            }
        }
        instance.terminal_pairs = terminal_pairs;
        Ok(instance)
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn terminal_pairs(&self) -> &[(usize, usize)] {
        &self.terminal_pairs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// `V_H`: every vertex that appears in some terminal pair.
    pub fn terminal_set(&self) -> BTreeSet<usize> {
        self.terminal_pairs
            .iter()
            .flat_map(|&(s, t)| [s, t])
            .collect()
    }

    pub fn terminal_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_vertices];
        for &(s, t) in &self.terminal_pairs {
            mask[s] = true;
            mask[t] = true;
        }
        mask
    }

    pub fn unique_path(&self, u: usize, v: usize) -> Result<Path, InstanceError> {
        for w in [u, v] {
            if w >= self.num_vertices {
                return Err(InstanceError::InvalidVertex {
                    field: "path",
                    vertex: w,
                    num_vertices: self.num_vertices,
                });
            }
        }
        if u == v {
            return Err(InstanceError::SameEndpoints(u));
        }
        Ok(Path(tree_path(&self.parent, &self.depth, u, v)))
    }

    /// One path per terminal pair, in pair order.
    pub fn constraint_paths(&self) -> Vec<Path> {
        self.terminal_pairs
            .iter()
            .map(|&(s, t)| Path(tree_path(&self.parent, &self.depth, s, t)))
            .collect()
    }

    /// Canonical single-line JSON, terminated by a newline.
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            num_vertices: self.num_vertices,
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
            terminal_pairs: self.terminal_pairs.iter().map(|&(s, t)| [s, t]).collect(),
            seed: self.seed,
        };
        let mut out = serde_json::to_string(&file).expect("instance serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| InstanceError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        TreeInstance::new(
            file.num_vertices,
            file.edges.into_iter().map(|[u, v]| (u, v)).collect(),
            file.terminal_pairs.into_iter().map(|[s, t]| (s, t)).collect(),
            file.seed,
        )
    }
}

fn tree_path(parent: &[usize], depth: &[usize], u: usize, v: usize) -> Vec<usize> {
    let mut front = vec![u];
    let mut back = vec![v];
    let (mut a, mut b) = (u, v);
    while depth[a] > depth[b] {
        a = parent[a];
        front.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b];
        back.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        front.push(a);
        back.push(b);
    }
    // the meeting vertex is the last element of both halves
    back.pop();
    front.extend(back.into_iter().rev());
    front
}

pub fn unique_path(instance: &TreeInstance, u: usize, v: usize) -> Result<Path, InstanceError> {
    instance.unique_path(u, v)
}

pub fn enumerate_constraint_paths(instance: &TreeInstance) -> Vec<Path> {
    instance.constraint_paths()
}

pub fn serialize_instance(instance: &TreeInstance) -> String {
    instance.to_json()
}

pub fn parse_instance(text: &str) -> Result<TreeInstance, InstanceError> {
    TreeInstance::from_json(text)
}

/// Decodes a Prüfer sequence over `0..n` into a canonical edge list.
pub fn prufer_to_edges(n: usize, sequence: &[usize]) -> Vec<(usize, usize)> {
    assert!(n >= 2 && sequence.len() == n - 2, "Prüfer sequence length must be n - 2");
    let mut degree = vec![1usize; n];
    for &s in sequence {
        degree[s] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&v| degree[v] == 1)
        .map(Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in sequence {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(Reverse(s));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a.min(b), a.max(b)));
    edges.sort_unstable();
    edges
}

/// Uniform random labeled tree on `n` vertices plus `k` terminal pairs.
///
/// Pairs are drawn by rejection: a candidate is discarded when it is adjacent,
/// repeats an earlier pair, or when adding its endpoints to the terminal set
/// would leave any pair's path (old or new) without a non-terminal internal
/// vertex. At most `1000 * k` candidates are drawn.
pub fn generate_tree_instance(n: usize, k: usize, seed: u64) -> Result<TreeInstance, InstanceError> {
    if n < 3 {
        return Err(InstanceError::TooFewVertices(n));
    }
    if k < 1 {
        return Err(InstanceError::NoPairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sequence: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let edges = prufer_to_edges(n, &sequence);
    let tree = TreeInstance::new(n, edges, Vec::new(), seed)?;

    let budget = 1000 * k;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut seen = HashSet::new();
    let mut is_terminal = vec![false; n];
    let mut attempts = 0;
    while pairs.len() < k {
        if attempts == budget {
            return Err(InstanceError::GenerationFailed {
                placed: pairs.len(),
                requested: k,
                attempts,
            });
        }
        attempts += 1;
        let s = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if s == t || tree.are_adjacent(s, t) || seen.contains(&(s.min(t), s.max(t))) {
            continue;
        }
        let path = tree_path(&tree.parent, &tree.depth, s, t);
        let was = (is_terminal[s], is_terminal[t]);
        is_terminal[s] = true;
        is_terminal[t] = true;
        let has_free_internal =
            |p: &[usize]| p[1..p.len() - 1].iter().any(|&v| !is_terminal[v]);
        let ok = has_free_internal(&path) && paths.iter().all(|p| has_free_internal(p));
        if !ok {
            is_terminal[s] = was.0;
            is_terminal[t] = was.1;
            continue;
        }
        seen.insert((s.min(t), s.max(t)));
        pairs.push((s, t));
        paths.push(path);
    }
    TreeInstance::new(n, tree.edges, pairs, seed)
}
