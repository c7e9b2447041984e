//! Chained physical models: chain strength, embedding a logical Ising model
//! onto chains, and majority-vote decoding back to logical spins.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{validate_embedding, Embedding, EmbeddingError, HardwareGraph, LogicalGraph};
use crate::qubo::IsingModel;
use crate::scalar::Scalar;
use crate::solvers::{SampleSet, Vartype};

/// Smallest chain strength handed out when the couplings are all zero.
const MIN_CHAIN_STRENGTH: f64 = 1e-6;

/// `prefactor · RMS(J) · sqrt(mean logical degree)`.
///
/// A model without couplers gets `1.0`; a zero result is raised to `1e-6`.
/// Both cases log a warning.
pub fn uniform_torque_chain_strength<T: Scalar>(
    m: &IsingModel<T>,
    logical_degree_mean: f64,
    prefactor: f64,
) -> T {
    if m.j().is_empty() {
        log::warn!("chain strength: model has no couplers, using 1.0");
        return T::one();
    }
    let mean_sq = m
        .j()
        .values()
        .map(|&c| {
            let c = c.to_f64_lossy();
            c * c
        })
        .sum::<f64>()
        / m.j().len() as f64;
    let mut strength = prefactor * mean_sq.sqrt() * logical_degree_mean.max(0.0).sqrt();
    if strength < MIN_CHAIN_STRENGTH {
        log::warn!("chain strength: computed {strength}, clamped to {MIN_CHAIN_STRENGTH}");
        strength = MIN_CHAIN_STRENGTH;
    }
    T::from_f64(strength).unwrap_or_else(T::one)
}

/// Allowed range of a physical coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplerRange<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> Default for CouplerRange<T> {
    fn default() -> Self {
        CouplerRange {
            min: -T::two(),
            max: T::one(),
        }
    }
}

/// A logical Ising model laid out on chains of physical qubits.
///
/// `model` is indexed compactly: physical variable `k` is hardware qubit
/// `qubits[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedIsing<T> {
    pub model: IsingModel<T>,
    pub qubits: Vec<usize>,
    pub embedding: Embedding,
    pub chain_strength: T,
    /// Intra-chain couplers, as hardware qubit pairs.
    pub chain_edges: Vec<(usize, usize)>,
    /// Energy contributed by the chain couplers in any chain-consistent
    /// state: physical energy = logical energy + `chain_offset`.
    pub chain_offset: T,
    /// Couplings that had to be clamped into the coupler range.
    pub clamp_events: usize,
}

impl<T: Scalar> EmbeddedIsing<T> {
    /// Compact indices of the chain of `var`.
    pub fn chain_indices(&self, var: usize) -> Vec<usize> {
        self.embedding
            .chain(var)
            .unwrap_or(&[])
            .iter()
            .map(|q| self.qubits.binary_search(q).expect("chain qubit is indexed"))
            .collect()
    }

    /// Physical spins with every chain set to its logical spin.
    pub fn spread(&self, logical: &[i8]) -> Vec<i8> {
        let mut phys = vec![-1; self.qubits.len()];
        for &var in self.embedding.chains().keys() {
            for k in self.chain_indices(var) {
                phys[k] = logical[var];
            }
        }
        phys
    }
}

/// [`embed_ising_with`] using the default `[-2, 1]` coupler range.
pub fn embed_ising<T: Scalar>(
    m: &IsingModel<T>,
    emb: &Embedding,
    hw: &HardwareGraph,
    chain_strength: T,
) -> Result<EmbeddedIsing<T>, EmbeddingError> {
    embed_ising_with(m, emb, hw, chain_strength, Some(CouplerRange::default()))
}

/// Splits each `h_i` evenly over chain `i`, each `J_ij` evenly over every
/// hardware coupler between chains `i` and `j`, and puts `-chain_strength`
/// on every hardware edge inside a chain. With a range, each resulting
/// coupling is clamped into it.
pub fn embed_ising_with<T: Scalar>(
    m: &IsingModel<T>,
    emb: &Embedding,
    hw: &HardwareGraph,
    chain_strength: T,
    clamp: Option<CouplerRange<T>>,
) -> Result<EmbeddedIsing<T>, EmbeddingError> {
    if chain_strength <= T::zero() || !chain_strength.is_finite_value() {
        return Err(EmbeddingError::InvalidParameter(format!(
            "chain strength must be positive (got {chain_strength})"
        )));
    }
    let logical = LogicalGraph::new(m.num_vars(), m.interactions());
    let report = validate_embedding(&logical, hw, emb);
    if !report.is_valid() {
        return Err(EmbeddingError::InvalidEmbedding(report.violations));
    }
    let mut qubits: Vec<usize> = emb.chains().values().flatten().copied().collect();
    qubits.sort_unstable();
    let index = |q: usize| qubits.binary_search(&q).expect("chain qubit is indexed");

    let mut h: BTreeMap<usize, T> = BTreeMap::new();
    for (&var, &hv) in m.h() {
        let chain = emb.chain(var).expect("validated");
        let share = hv / T::from_usize_exact(chain.len());
        for &q in chain {
            *h.entry(index(q)).or_insert_with(T::zero) =
                h.get(&index(q)).copied().unwrap_or_else(T::zero) + share;
        }
    }
    let mut j: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for (&(u, v), &c) in m.j() {
        let (cu, cv) = (emb.chain(u).expect("validated"), emb.chain(v).expect("validated"));
        let couplers: Vec<(usize, usize)> = cu
            .iter()
            .flat_map(|&a| cv.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| hw.has_edge(a, b))
            .collect();
        let share = c / T::from_usize_exact(couplers.len());
        for (a, b) in couplers {
            let (ia, ib) = (index(a), index(b));
            let key = (ia.min(ib), ia.max(ib));
            let cur = j.get(&key).copied().unwrap_or_else(T::zero);
            j.insert(key, cur + share);
        }
    }
    let mut chain_edges = Vec::new();
    for chain in emb.chains().values() {
        for (k, &a) in chain.iter().enumerate() {
            for &b in &chain[k + 1..] {
                if hw.has_edge(a, b) {
                    chain_edges.push((a.min(b), a.max(b)));
                    let (ia, ib) = (index(a), index(b));
                    j.insert((ia.min(ib), ia.max(ib)), -chain_strength);
                }
            }
        }
    }
    chain_edges.sort_unstable();

    let mut clamp_events = 0;
    if let Some(range) = clamp {
        for c in j.values_mut() {
            if *c < range.min {
                *c = range.min;
                clamp_events += 1;
            } else if *c > range.max {
                *c = range.max;
                clamp_events += 1;
            }
        }
    }
    let mut chain_offset = T::zero();
    for &(a, b) in &chain_edges {
        let (ia, ib) = (index(a), index(b));
        chain_offset = chain_offset + j[&(ia.min(ib), ia.max(ib))];
    }
    let model = IsingModel::new(qubits.len(), h, j, m.offset())
        .map_err(|e| EmbeddingError::InvalidParameter(e.to_string()))?;
    Ok(EmbeddedIsing {
        model,
        qubits,
        embedding: emb.clone(),
        chain_strength,
        chain_edges,
        chain_offset,
        clamp_events,
    })
}

/// Chain length and breakage summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStats {
    pub max_len: usize,
    pub mean_len: f64,
    /// Share of (sample, chain) pairs whose spins disagree, weighted by
    /// occurrences.
    pub break_fraction: f64,
    /// Physical qubits per logical variable.
    pub overhead_ratio: f64,
    pub logical_vars: usize,
    pub physical_qubits: usize,
    pub chain_strength: f64,
    pub clamp_events: usize,
}

impl ChainStats {
    /// Statistics of the embedding alone (no samples, so no breaks).
    pub fn of_embedding(emb: &Embedding) -> Self {
        let n = emb.chains().len();
        ChainStats {
            max_len: emb.max_chain_len(),
            mean_len: if n == 0 { 0.0 } else { emb.num_physical() as f64 / n as f64 },
            break_fraction: 0.0,
            overhead_ratio: super::embedding_overhead(emb),
            logical_vars: n,
            physical_qubits: emb.num_physical(),
            chain_strength: 0.0,
            clamp_events: 0,
        }
    }
}

/// Majority-vote decoding. A chain takes the sign of its spin sum; a zero sum
/// decodes to `-1`. Logical energies are recomputed from `logical`.
pub fn unembed<T: Scalar>(
    physical: &SampleSet<T>,
    embedded: &EmbeddedIsing<T>,
    logical: &IsingModel<T>,
) -> Result<(SampleSet<T>, ChainStats), EmbeddingError> {
    let needed = embedded.qubits.len();
    let chains: Vec<(usize, Vec<usize>)> = embedded
        .embedding
        .chains()
        .keys()
        .map(|&v| (v, embedded.chain_indices(v)))
        .collect();
    let spin = |v: i8| -> i32 {
        match physical.vartype {
            Vartype::Spin => v as i32,
            Vartype::Binary => 2 * v as i32 - 1,
        }
    };
    let mut broken = 0usize;
    let mut total = 0usize;
    let mut decoded = Vec::with_capacity(physical.records.len());
    for rec in &physical.records {
        if rec.assignment.len() < needed {
            return Err(EmbeddingError::MissingQubit {
                needed,
                got: rec.assignment.len(),
            });
        }
        let mut values = vec![-1i8; logical.num_vars()];
        for (var, idx) in &chains {
            let spins: Vec<i32> = idx.iter().map(|&k| spin(rec.assignment[k])).collect();
            let sum: i32 = spins.iter().sum();
            values[*var] = if sum > 0 { 1 } else { -1 };
            if spins.iter().any(|&s| s != spins[0]) {
                broken += rec.occurrences;
            }
            total += rec.occurrences;
        }
        decoded.push((values, rec.occurrences));
    }
    let mut set = SampleSet::from_weighted(logical, decoded, physical.solver_id.clone(), physical.seed)
        .map_err(|e| EmbeddingError::InvalidParameter(e.to_string()))?;
    set.info = physical.info.clone();
    set.wall_time_s = physical.wall_time_s;
    let mut stats = ChainStats::of_embedding(&embedded.embedding);
    stats.break_fraction = if total == 0 { 0.0 } else { broken as f64 / total as f64 };
    stats.chain_strength = embedded.chain_strength.to_f64_lossy();
    stats.clamp_events = embedded.clamp_events;
    Ok((set, stats))
}
