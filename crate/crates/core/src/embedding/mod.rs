//! Minor embedding onto a qubit graph and the chained physical models built
//! from it.

mod chains;
mod pipeline;
mod search;
mod topology;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use chains::{
    embed_ising, embed_ising_with, unembed, uniform_torque_chain_strength, ChainStats,
    CouplerRange, EmbeddedIsing,
};
pub use pipeline::{
    autoscale_factor, run_pipeline, ChainStrength, PhaseTimes, PipelineConfig, PipelineError,
    PipelineOutcome, DEFAULT_TORQUE_PREFACTOR,
};
pub use search::{find_embedding, EmbedFailure, EmbedParams};
pub use topology::{chimera_graph, load_hardware_graph, HardwareGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    InvalidQubit { qubit: usize, num_qubits: usize },
    #[error("invalid embedding: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidEmbedding(Vec<Violation>),
    #[error("sample covers {got} qubits, the embedding uses {needed}")]
    MissingQubit { needed: usize, got: usize },
    #[error("{0}")]
    Io(String),
}

/// Logical interaction graph: variables `0..num_vars` and their couplings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalGraph {
    pub num_vars: usize,
    pub edges: Vec<(usize, usize)>,
}

impl LogicalGraph {
    pub fn new(num_vars: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        LogicalGraph {
            num_vars,
            edges: set.into_iter().collect(),
        }
    }

    pub fn complete(n: usize) -> Self {
        LogicalGraph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn path(n: usize) -> Self {
        LogicalGraph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vars];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }
}

/// Chains of physical qubits, one per logical variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Embedding {
    chains: BTreeMap<usize, Vec<usize>>,
}

impl Embedding {
    pub fn new(chains: BTreeMap<usize, Vec<usize>>) -> Self {
        Embedding { chains }
    }

    pub fn chains(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.chains
    }

    pub fn chain(&self, var: usize) -> Option<&[usize]> {
        self.chains.get(&var).map(Vec::as_slice)
    }

    pub fn num_physical(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn max_chain_len(&self) -> usize {
        self.chains.values().map(Vec::len).max().unwrap_or(0)
    }

    /// `{"<var>": [qubits...]}` with ascending keys.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.chains).expect("embedding serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, EmbeddingError> {
        serde_json::from_str(text)
            .map(|chains| Embedding { chains })
            .map_err(|e| EmbeddingError::Parse {
                line: e.line(),
                message: e.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingChain { var: usize },
    EmptyChain { var: usize },
    UnknownVariable { var: usize },
    InvalidQubit { var: usize, qubit: usize },
    Overlap { qubit: usize, vars: (usize, usize) },
    DisconnectedChain { var: usize },
    MissingCoupler { u: usize, v: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingChain { var } => write!(f, "missing chain: variable {var}"),
            Violation::EmptyChain { var } => write!(f, "empty chain: variable {var}"),
            Violation::UnknownVariable { var } => write!(f, "unknown variable {var}"),
            Violation::InvalidQubit { var, qubit } => {
                write!(f, "invalid qubit {qubit} in chain of variable {var}")
            }
            Violation::Overlap { qubit, vars } => {
                write!(f, "overlap: qubit {qubit} in chains {} and {}", vars.0, vars.1)
            }
            Violation::DisconnectedChain { var } => {
                write!(f, "disconnected chain: variable {var}")
            }
            Violation::MissingCoupler { u, v } => {
                write!(f, "missing coupler: no hardware edge between chains {u} and {v}")
            }
        }
    }
}

/// Every violation found; empty means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EmbeddingReport {
    pub violations: Vec<Violation>,
}

impl EmbeddingReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks chain presence, qubit ids, disjointness, chain connectivity and
/// coverage of every logical edge.
pub fn validate_embedding(
    logical: &LogicalGraph,
    hw: &HardwareGraph,
    emb: &Embedding,
) -> EmbeddingReport {
    let mut violations = Vec::new();
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for var in 0..logical.num_vars {
        if !emb.chains.contains_key(&var) {
            violations.push(Violation::MissingChain { var });
        }
    }
    for (&var, chain) in &emb.chains {
        if var >= logical.num_vars {
            violations.push(Violation::UnknownVariable { var });
        }
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { var });
            continue;
        }
        let mut valid = true;
        for &q in chain {
            if q >= hw.num_qubits() {
                violations.push(Violation::InvalidQubit { var, qubit: q });
                valid = false;
                continue;
            }
            if let Some(&other) = owner.get(&q) {
                violations.push(Violation::Overlap { qubit: q, vars: (other, var) });
            } else {
                owner.insert(q, var);
            }
        }
        if valid && !chain_connected(hw, chain) {
            violations.push(Violation::DisconnectedChain { var });
        }
    }
    for &(u, v) in &logical.edges {
        let (Some(cu), Some(cv)) = (emb.chains.get(&u), emb.chains.get(&v)) else {
            continue;
        };
        let covered = cu.iter().any(|&a| {
            a < hw.num_qubits() && cv.iter().any(|&b| b < hw.num_qubits() && hw.has_edge(a, b))
        });
        if !covered {
            violations.push(Violation::MissingCoupler { u, v });
        }
    }
    EmbeddingReport { violations }
}

fn chain_connected(hw: &HardwareGraph, chain: &[usize]) -> bool {
    let members: BTreeSet<usize> = chain.iter().copied().collect();
    let mut seen = BTreeSet::from([chain[0]]);
    let mut queue = VecDeque::from([chain[0]]);
    while let Some(q) = queue.pop_front() {
        for &w in hw.neighbors(q) {
            if members.contains(&w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == members.len()
}

/// Physical qubits per logical variable.
pub fn embedding_overhead(emb: &Embedding) -> f64 {
    if emb.chains.is_empty() {
        return 1.0;
    }
    emb.num_physical() as f64 / emb.chains.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlap_and_disconnection_are_reported() {
        let hw = chimera_graph(2, 2, 4).unwrap();
        let logical = LogicalGraph::new(2, [(0, 1)]);
        let emb = Embedding::new(BTreeMap::from([(0, vec![0, 4]), (1, vec![4])]));
        let report = validate_embedding(&logical, &hw, &emb);
        assert!(report.violations.iter().any(|v| v.to_string().contains("overlap")));

        let emb = Embedding::new(BTreeMap::from([(0, vec![0, 12]), (1, vec![5])]));
        let report = validate_embedding(&logical, &hw, &emb);
        assert_eq!(report.violations, vec![Violation::DisconnectedChain { var: 0 }]);
        assert!(report.violations[0].to_string().contains("disconnected chain"));
    }

    #[test]
    fn coverage_and_missing_chains() {
        let hw = chimera_graph(1, 1, 4).unwrap();
        let logical = LogicalGraph::new(3, [(0, 1)]);
        // 0 and 1 are on the same shore: not coupled
        let emb = Embedding::new(BTreeMap::from([(0, vec![0]), (1, vec![1])]));
        let v = validate_embedding(&logical, &hw, &emb).violations;
        assert!(v.contains(&Violation::MissingChain { var: 2 }));
        assert!(v.contains(&Violation::MissingCoupler { u: 0, v: 1 }));
        let ok = Embedding::new(BTreeMap::from([(0, vec![0]), (1, vec![4]), (2, vec![1])]));
        assert!(validate_embedding(&logical, &hw, &ok).is_valid());
    }

    #[test]
    fn overhead_ratio() {
        let identity = Embedding::new(BTreeMap::from([(0, vec![0]), (1, vec![4])]));
        assert_eq!(embedding_overhead(&identity), 1.0);
        let k3 = Embedding::new(BTreeMap::from([(0, vec![0, 4]), (1, vec![5]), (2, vec![1])]));
        assert!((embedding_overhead(&k3) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let emb = Embedding::new(BTreeMap::from([(0, vec![0, 4]), (10, vec![5])]));
        assert_eq!(emb.to_json(), "{\"0\":[0,4],\"10\":[5]}\n");
        assert_eq!(Embedding::from_json(&emb.to_json()).unwrap(), emb);
    }
}
