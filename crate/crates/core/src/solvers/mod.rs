//! Samplers and exact solvers over QUBO / Ising models, plus the exact
//! multicut oracle used to score them.

mod annealing;
mod bnb;
mod exact;
mod grid;
mod racing;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceError;
use crate::qubo::{IsingModel, Qubo, QuboError};
use crate::scalar::Scalar;

pub use annealing::{simulated_annealing, simulated_annealing_until, SaSchedule, ScheduleKind};
pub use bnb::{exact_multicut_bnb, exact_multicut_bnb_budgeted, BnbOutcome};
pub use exact::{
    exact_bruteforce, exact_ground_state, exact_with_separator, BRUTE_FORCE_LIMIT,
};
pub use grid::{grid_search_penalties, GridRow, GridSearchConfig};
pub use racing::{racing_solve, SolverConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("shots must be ≥ 1")]
    InvalidShots,
    #[error("model has no variables")]
    EmptyModel,
    #[error("{num_vars} variables exceeds brute-force limit of {limit}")]
    SizeLimit { num_vars: usize, limit: usize },
    #[error("instance is infeasible: path {path_index} has no removable vertex")]
    Infeasible { path_index: usize },
    #[error("penalty grid is empty")]
    EmptyGrid,
    #[error("no solver configurations given")]
    NoConfigs,
    #[error("time budget must be positive")]
    NonPositiveBudget,
    #[error("all racing members failed: {}", .0.join("; "))]
    AllMembersFailed(Vec<String>),
    #[error("sample set: {0}")]
    SampleSet(String),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vartype {
    Binary,
    Spin,
}

impl Vartype {
    /// The value a variable takes after a flip.
    fn flipped(self, v: i8) -> i8 {
        match self {
            Vartype::Binary => 1 - v,
            Vartype::Spin => -v,
        }
    }
}

/// Sparse `f64` copy of a model's coefficients for the inner sampling loops.
#[derive(Debug, Clone)]
pub struct SparseModel {
    pub vartype: Vartype,
    pub linear: Vec<f64>,
    pub neighbors: Vec<Vec<(usize, f64)>>,
}

impl SparseModel {
    fn build<T: Scalar>(
        vartype: Vartype,
        num_vars: usize,
        linear: &BTreeMap<usize, T>,
        quadratic: &BTreeMap<(usize, usize), T>,
    ) -> Self {
        let mut lin = vec![0.0; num_vars];
        for (&i, &u) in linear {
            lin[i] = u.to_f64_lossy();
        }
        let mut neighbors = vec![Vec::new(); num_vars];
        for (&(i, j), &w) in quadratic {
            let w = w.to_f64_lossy();
            neighbors[i].push((j, w));
            neighbors[j].push((i, w));
        }
        SparseModel {
            vartype,
            linear: lin,
            neighbors,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    /// `u_i + Σ_j w_ij v_j` for every variable.
    pub fn local_fields(&self, values: &[i8]) -> Vec<f64> {
        (0..self.num_vars())
            .map(|i| {
                self.linear[i]
                    + self.neighbors[i]
                        .iter()
                        .map(|&(j, w)| w * values[j] as f64)
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Anything the samplers can minimize.
pub trait EnergyModel<T: Scalar>: Sync {
    fn num_vars(&self) -> usize;
    fn vartype(&self) -> Vartype;
    /// Exact energy of `values` (0/1 for binary, ±1 for spin models).
    fn energy_of(&self, values: &[i8]) -> Result<T, QuboError>;
    fn sparse(&self) -> SparseModel;
    /// The same energy function as a QUBO, for the exact solvers.
    fn as_qubo(&self) -> Qubo<T>;
}

impl<T: Scalar> EnergyModel<T> for Qubo<T> {
    fn num_vars(&self) -> usize {
        Qubo::num_vars(self)
    }

    fn vartype(&self) -> Vartype {
        Vartype::Binary
    }

    fn energy_of(&self, values: &[i8]) -> Result<T, QuboError> {
        let x: Vec<u8> = values.iter().map(|&v| v as u8).collect();
        if let Some((index, &v)) = values.iter().enumerate().find(|(_, &v)| v != 0 && v != 1) {
            return Err(QuboError::InvalidBinary { index, value: v as i64 });
        }
        self.energy(&x)
    }

    fn sparse(&self) -> SparseModel {
        SparseModel::build(Vartype::Binary, self.num_vars(), self.linear(), self.quadratic())
    }

    fn as_qubo(&self) -> Qubo<T> {
        self.clone()
    }
}

impl<T: Scalar> EnergyModel<T> for IsingModel<T> {
    fn num_vars(&self) -> usize {
        IsingModel::num_vars(self)
    }

    fn vartype(&self) -> Vartype {
        Vartype::Spin
    }

    fn energy_of(&self, values: &[i8]) -> Result<T, QuboError> {
        self.energy(values)
    }

    fn sparse(&self) -> SparseModel {
        SparseModel::build(Vartype::Spin, self.num_vars(), self.h(), self.j())
    }

    fn as_qubo(&self) -> Qubo<T> {
        self.to_qubo()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord<T> {
    pub assignment: Vec<i8>,
    pub energy: T,
    pub occurrences: usize,
    /// Producing solver, set on merged (racing) sample sets.
    pub origin: Option<String>,
}

/// Aggregated sampler output in canonical order: ascending energy, then
/// origin, then lexicographic assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    pub vartype: Vartype,
    pub records: Vec<SampleRecord<T>>,
    pub solver_id: String,
    pub seed: u64,
    pub shots: usize,
    pub wall_time_s: f64,
    pub info: BTreeMap<String, String>,
}

impl<T: Scalar> SampleSet<T> {
    /// Aggregates raw samples into records and computes exact energies.
    pub fn from_samples<M: EnergyModel<T> + ?Sized>(
        model: &M,
        samples: Vec<Vec<i8>>,
        solver_id: impl Into<String>,
        seed: u64,
    ) -> Result<Self, SolverError> {
        Self::from_weighted(model, samples.into_iter().map(|s| (s, 1)), solver_id, seed)
    }

    /// As [`SampleSet::from_samples`], with an occurrence count per sample.
    pub fn from_weighted<M: EnergyModel<T> + ?Sized>(
        model: &M,
        samples: impl IntoIterator<Item = (Vec<i8>, usize)>,
        solver_id: impl Into<String>,
        seed: u64,
    ) -> Result<Self, SolverError> {
        let mut shots = 0;
        let mut counts: BTreeMap<Vec<i8>, usize> = BTreeMap::new();
        for (s, k) in samples {
            shots += k;
            *counts.entry(s).or_default() += k;
        }
        let mut records = Vec::with_capacity(counts.len());
        for (assignment, occurrences) in counts {
            let energy = model.energy_of(&assignment)?;
            records.push(SampleRecord {
                assignment,
                energy,
                occurrences,
                origin: None,
            });
        }
        let mut set = SampleSet {
            vartype: model.vartype(),
            records,
            solver_id: solver_id.into(),
            seed,
            shots,
            wall_time_s: 0.0,
            info: BTreeMap::new(),
        };
        set.sort();
        Ok(set)
    }

    pub fn sort(&mut self) {
        self.records.sort_by(|a, b| {
            a.energy
                .total_cmp_value(&b.energy)
                .then_with(|| a.origin.cmp(&b.origin))
                .then_with(|| a.assignment.cmp(&b.assignment))
        });
    }

    pub fn best(&self) -> Option<&SampleRecord<T>> {
        self.records.first()
    }

    pub fn best_energy(&self) -> Option<T> {
        self.best().map(|r| r.energy)
    }

    pub fn total_occurrences(&self) -> usize {
        self.records.iter().map(|r| r.occurrences).sum()
    }

    /// Checks that every stored energy matches the model within `1e-9`
    /// (relative to the energy's magnitude when it exceeds one).
    pub fn audit<M: EnergyModel<T> + ?Sized>(&self, model: &M) -> Result<(), SolverError> {
        for r in &self.records {
            let e = model.energy_of(&r.assignment)?;
            let (a, b) = (e.to_f64_lossy(), r.energy.to_f64_lossy());
            if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                return Err(SolverError::SampleSet(format!(
                    "record energy {b} differs from model energy {a}"
                )));
            }
        }
        if self.total_occurrences() != self.shots {
            return Err(SolverError::SampleSet(format!(
                "occurrences sum to {} but shots = {}",
                self.total_occurrences(),
                self.shots
            )));
        }
        Ok(())
    }

    /// Same samples in 0/1 form (`+1 → 1`, `-1 → 0`); energies are unchanged.
    pub fn to_binary(&self) -> SampleSet<T> {
        let mut out = self.clone();
        if self.vartype == Vartype::Spin {
            out.vartype = Vartype::Binary;
            for r in &mut out.records {
                for v in &mut r.assignment {
                    *v = i8::from(*v > 0);
                }
            }
            out.sort();
        }
        out
    }

    /// Binary assignment of a record, whatever the set's vartype.
    pub fn bits(&self, record: &SampleRecord<T>) -> Vec<u8> {
        record
            .assignment
            .iter()
            .map(|&v| u8::from(v > 0))
            .collect()
    }

    /// JSON file form. With `include_timing == false` the wall time is written
    /// as zero so reruns compare byte for byte.
    pub fn to_json(&self, include_timing: bool) -> String {
        let file = SampleSetFile {
            solver_id: self.solver_id.clone(),
            seed: self.seed,
            shots: self.shots,
            wall_time_s: if include_timing { self.wall_time_s } else { 0.0 },
            vartype: self.vartype,
            info: self.info.clone(),
            records: self
                .records
                .iter()
                .map(|r| RecordFile {
                    x: r.assignment.iter().map(|&v| if v > 0 { '1' } else { '0' }).collect(),
                    energy: r.energy.to_f64_lossy(),
                    occurrences: r.occurrences,
                    solver: r.origin.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("sample set serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SolverError> {
        let file: SampleSetFile =
            serde_json::from_str(text).map_err(|e| SolverError::SampleSet(e.to_string()))?;
        let mut records = Vec::with_capacity(file.records.len());
        for r in file.records {
            let assignment = r
                .x
                .chars()
                .map(|c| match (c, file.vartype) {
                    ('1', _) => Ok(1),
                    ('0', Vartype::Binary) => Ok(0),
                    ('0', Vartype::Spin) => Ok(-1),
                    _ => Err(SolverError::SampleSet(format!("bad bit `{c}`"))),
                })
                .collect::<Result<Vec<i8>, _>>()?;
            let energy = T::from_f64(r.energy)
                .ok_or_else(|| SolverError::SampleSet(format!("bad energy {}", r.energy)))?;
            records.push(SampleRecord {
                assignment,
                energy,
                occurrences: r.occurrences,
                origin: r.solver,
            });
        }
        Ok(SampleSet {
            vartype: file.vartype,
            records,
            solver_id: file.solver_id,
            seed: file.seed,
            shots: file.shots,
            wall_time_s: file.wall_time_s,
            info: file.info,
        })
    }
}

impl<T: Scalar> fmt::Display for SampleSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} shots, {} distinct, best {})",
            self.solver_id,
            self.shots,
            self.records.len(),
            self.best_energy()
                .map(|e| e.to_string())
                .unwrap_or_else(|| "-".into())
        )
    }
}

#[derive(Serialize, Deserialize)]
struct SampleSetFile {
    solver_id: String,
    seed: u64,
    shots: usize,
    wall_time_s: f64,
    vartype: Vartype,
    #[serde(default)]
    info: BTreeMap<String, String>,
    records: Vec<RecordFile>,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    x: String,
    energy: f64,
    occurrences: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Qubo<f64> {
        Qubo::unlabeled(
            2,
            BTreeMap::from([(0, -1.0), (1, 0.5)]),
            BTreeMap::from([((0, 1), 2.0)]),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn aggregation_orders_records() {
        let q = tiny();
        let set = SampleSet::from_samples(
            &q,
            vec![vec![1, 1], vec![1, 0], vec![0, 0], vec![1, 0]],
            "t",
            3,
        )
        .unwrap();
        let xs: Vec<_> = set.records.iter().map(|r| (r.assignment.clone(), r.occurrences)).collect();
        assert_eq!(xs, vec![(vec![1, 0], 2), (vec![0, 0], 1), (vec![1, 1], 1)]);
        assert_eq!(set.shots, 4);
        set.audit(&q).unwrap();
    }

    #[test]
    fn audit_catches_tampering() {
        let q = tiny();
        let mut set = SampleSet::from_samples(&q, vec![vec![1, 1]], "t", 0).unwrap();
        set.records[0].energy += 1.0;
        assert!(set.audit(&q).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = tiny().to_ising();
        let set = SampleSet::from_samples(&m, vec![vec![1, -1], vec![-1, -1]], "t", 7).unwrap();
        let back = SampleSet::<f64>::from_json(&set.to_json(true)).unwrap();
        assert_eq!(back, set);
        assert!(set.to_json(false).contains("\"wall_time_s\": 0.0"));
    }

    #[test]
    fn spin_to_binary_keeps_energies() {
        let q = tiny();
        let m = q.to_ising();
        let set = SampleSet::from_samples(&m, vec![vec![1, -1]], "t", 0).unwrap();
        let bin = set.to_binary();
        assert_eq!(bin.records[0].assignment, vec![1, 0]);
        bin.audit(&q).unwrap();
    }
}
