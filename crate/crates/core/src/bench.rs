//! Benchmark harness: instance suite, solver matrix, metrics rows and
//! report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{
    chimera_graph, run_pipeline, ChainStrength, EmbedParams, PipelineConfig, PipelineError,
    DEFAULT_TORQUE_PREFACTOR,
};
use crate::instance::{generate_tree_instance, TreeInstance};
use crate::qubo::{check_feasibility, default_penalties, extract_cutset, Encoding, EncodingOptions, Qubo};
use crate::scalar::Scalar;
use crate::solvers::{
    exact_ground_state, exact_multicut_bnb_budgeted, simulated_annealing, SaSchedule,
    SampleSet, ScheduleKind, SolverError,
};

/// Node budget of the exact oracle; cells beyond it carry no gap.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("optimal cost must be positive (got {0})")]
    NonPositiveOptimum(f64),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("no records to report")]
    NoRecords,
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// `(found − optimal) / optimal × 100`.
pub fn optimality_gap(found_cost: f64, optimal_cost: f64) -> Result<f64, BenchError> {
    if optimal_cost.is_nan() || optimal_cost <= 0.0 {
        return Err(BenchError::NonPositiveOptimum(optimal_cost));
    }
    Ok((found_cost - optimal_cost) / optimal_cost * 100.0)
}

/// Occurrence-weighted share of records whose cutset is feasible.
/// `samples` may be binary or spin over the variables of `qubo`.
pub fn feasibility_rate<T: Scalar>(
    samples: &SampleSet<T>,
    instance: &TreeInstance,
    qubo: &Qubo<T>,
) -> f64 {
    let total = samples.total_occurrences();
    if total == 0 {
        return 0.0;
    }
    let feasible: usize = samples
        .records
        .iter()
        .filter(|r| check_feasibility(instance, &extract_cutset(qubo, &samples.bits(r))).is_feasible())
        .map(|r| r.occurrences)
        .sum();
    feasible as f64 / total as f64
}

/// Ranks starting at 1, ties sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// `None` for mismatched or short inputs, or when either side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub vertices: usize,
    pub pairs: usize,
    pub seed: u64,
}

/// Nine sizes from `(24, 3)` to `(450, 100)`, geometric in both coordinates.
pub fn default_suite() -> Vec<SuiteEntry> {
    (0..9)
        .map(|i| {
            let f = i as f64 / 8.0;
            SuiteEntry {
                id: Some(format!("I{}", i + 1)),
                vertices: (24.0 * (450.0f64 / 24.0).powf(f)).round() as usize,
                pairs: (3.0 * (100.0f64 / 3.0).powf(f)).round() as usize,
                seed: i as u64 + 1,
            }
        })
        .collect()
}

fn default_schedule() -> ScheduleKind {
    ScheduleKind::Geometric
}
fn default_beta_min() -> f64 {
    0.1
}
fn default_beta_max() -> f64 {
    10.0
}
fn default_sweeps() -> usize {
    100
}
fn default_shots() -> usize {
    100
}
fn default_prefactor() -> f64 {
    DEFAULT_TORQUE_PREFACTOR
}
fn default_chimera() -> [usize; 3] {
    [16, 16, 4]
}
fn default_max_logical() -> usize {
    128
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaParams {
    #[serde(default = "default_schedule", with = "schedule_kind")]
    pub schedule: ScheduleKind,
    #[serde(default = "default_beta_min")]
    pub beta_min: f64,
    #[serde(default = "default_beta_max")]
    pub beta_max: f64,
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

impl Default for SaParams {
    fn default() -> Self {
        SaParams {
            schedule: default_schedule(),
            beta_min: default_beta_min(),
            beta_max: default_beta_max(),
            sweeps: default_sweeps(),
            shots: default_shots(),
        }
    }
}

impl SaParams {
    pub fn schedule(&self) -> Result<SaSchedule, SolverError> {
        SaSchedule::new(self.schedule, self.beta_min, self.beta_max, self.sweeps)
    }
}

mod schedule_kind {
    use super::ScheduleKind;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(k: &ScheduleKind, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&k.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ScheduleKind, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BenchSolver {
    /// Simulated annealing directly on the QUBO.
    Sa {
        #[serde(flatten)]
        params: SaParams,
    },
    /// Exact QUBO ground state where enumeration is tractable.
    Exact,
    /// Embed onto a Chimera graph, anneal the chained model, decode.
    Pipeline {
        #[serde(flatten)]
        params: SaParams,
        #[serde(default = "default_chimera")]
        chimera: [usize; 3],
        /// Fixed chain strength; uniform torque compensation when absent.
        #[serde(default)]
        chain_strength: Option<f64>,
        #[serde(default = "default_prefactor")]
        prefactor: f64,
        /// Larger models are reported as `embed_skipped`.
        #[serde(default = "default_max_logical")]
        max_logical_vars: usize,
    },
}

impl BenchSolver {
    pub fn id(&self) -> String {
        let sa = |p: &SaParams| format!("{}:{}-{}:{}x{}", p.schedule, p.beta_min, p.beta_max, p.sweeps, p.shots);
        match self {
            BenchSolver::Sa { params } => format!("sa[{}]", sa(params)),
            BenchSolver::Exact => "exact".into(),
            BenchSolver::Pipeline {
                params,
                chimera,
                chain_strength,
                prefactor,
                ..
            } => {
                let cs = chain_strength.map_or_else(|| format!("auto{prefactor}"), |c| c.to_string());
                format!(
                    "pipeline[chimera-{}-{}-{};cs={cs};{}]",
                    chimera[0],
                    chimera[1],
                    chimera[2],
                    sa(params)
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_dir: Option<PathBuf>,
}

fn default_encodings() -> Vec<Encoding> {
    vec![Encoding::Slack]
}
fn default_solvers() -> Vec<BenchSolver> {
    vec![BenchSolver::Sa {
        params: SaParams::default(),
    }]
}
fn default_repetitions() -> usize {
    1
}
fn default_true() -> bool {
    true
}
fn default_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_suite")]
    pub suite: Vec<SuiteEntry>,
    #[serde(default = "default_encodings")]
    pub encodings: Vec<Encoding>,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<BenchSolver>,
    /// Solver seeds per cell: `seed, seed + 1, ...`.
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub fix_terminals: bool,
    #[serde(default = "default_budget")]
    pub node_budget: u64,
    /// Penalty overrides; `None` uses the default penalties.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m2: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| BenchError::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes") + "\n"
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let err = |m: String| Err(BenchError::Spec(m));
        if self.suite.is_empty() {
            return err("suite: must not be empty".into());
        }
        if self.solvers.is_empty() {
            return err("solvers: must not be empty".into());
        }
        if self.encodings.is_empty() {
            return err("encodings: must not be empty".into());
        }
        if self.repetitions == 0 {
            return err("repetitions: must be ≥ 1".into());
        }
        for (name, m) in [("m1", self.m1), ("m2", self.m2)] {
            if m.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return err(format!("{name}: must be positive"));
            }
        }
        for (i, e) in self.suite.iter().enumerate() {
            if e.vertices < 3 {
                return err(format!("suite[{i}].vertices: must be ≥ 3 (got {})", e.vertices));
            }
            if e.pairs == 0 {
                return err(format!("suite[{i}].pairs: must be ≥ 1"));
            }
        }
        for (i, s) in self.solvers.iter().enumerate() {
            match s {
                BenchSolver::Sa { params } | BenchSolver::Pipeline { params, .. } => {
                    params
                        .schedule()
                        .map_err(|e| BenchError::Spec(format!("solvers[{i}]: {e}")))?;
                    if params.shots == 0 {
                        return err(format!("solvers[{i}].shots: must be ≥ 1"));
                    }
                }
                BenchSolver::Exact => {}
            }
            if let BenchSolver::Pipeline {
                chimera,
                chain_strength,
                ..
            } = s
            {
                if chimera.contains(&0) {
                    return err(format!("solvers[{i}].chimera: dimensions must be positive"));
                }
                if chain_strength.is_some_and(|c| !(c > 0.0 && c.is_finite())) {
                    return err(format!("solvers[{i}].chain_strength: must be positive"));
                }
            }
        }
        Ok(())
    }

    fn instance_id(&self, i: usize) -> String {
        self.suite[i].id.clone().unwrap_or_else(|| format!("I{}", i + 1))
    }
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub instance_id: String,
    pub vertices: usize,
    pub pairs: usize,
    pub encoding: Encoding,
    pub solver: String,
    pub seed: u64,
    /// QUBO energy of the lowest-energy sample.
    pub best_energy: Option<f64>,
    pub cutset_size: Option<usize>,
    pub feasible: bool,
    /// Present when the exact optimum is known and the cutset is feasible.
    pub gap_percent: Option<f64>,
    pub optimum: Option<usize>,
    pub build_s: f64,
    pub embed_s: Option<f64>,
    pub sample_s: f64,
    pub unembed_s: Option<f64>,
    pub logical_vars: usize,
    pub physical_qubits: Option<usize>,
    pub chain_max: Option<usize>,
    pub chain_mean: Option<f64>,
    pub break_fraction: Option<f64>,
    pub overhead_ratio: Option<f64>,
    pub chain_strength: Option<f64>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl MetricsRecord {
    fn blank(spec: &ExperimentSpec, i: usize, encoding: Encoding, solver: &BenchSolver, seed: u64) -> Self {
        MetricsRecord {
            instance_id: spec.instance_id(i),
            vertices: spec.suite[i].vertices,
            pairs: spec.suite[i].pairs,
            encoding,
            solver: solver.id(),
            seed,
            best_energy: None,
            cutset_size: None,
            feasible: false,
            gap_percent: None,
            optimum: None,
            build_s: 0.0,
            embed_s: None,
            sample_s: 0.0,
            unembed_s: None,
            logical_vars: 0,
            physical_qubits: None,
            chain_max: None,
            chain_mean: None,
            break_fraction: None,
            overhead_ratio: None,
            chain_strength: None,
            status: "ok".into(),
            detail: None,
        }
    }

    fn failed(mut self, status: &str, detail: impl ToString) -> Self {
        self.status = status.into();
        self.detail = Some(detail.to_string());
        self
    }
}

struct Prepared {
    instance: Result<TreeInstance, String>,
    optimum: Option<usize>,
}

fn prepare(entry: &SuiteEntry, node_budget: u64) -> Prepared {
    let instance = match generate_tree_instance(entry.vertices, entry.pairs, entry.seed) {
        Ok(i) => i,
        Err(e) => {
            return Prepared {
                instance: Err(e.to_string()),
                optimum: None,
            }
        }
    };
    let optimum = match exact_multicut_bnb_budgeted(&instance, node_budget) {
        Ok(out) if out.proven_optimal => Some(out.cutset.len()),
        Ok(_) => {
            log::info!("exact oracle exceeded {node_budget} nodes; no gap reported");
            None
        }
        Err(e) => {
            log::warn!("exact oracle failed: {e}");
            None
        }
    };
    Prepared {
        instance: Ok(instance),
        optimum,
    }
}

/// Fills energy, cutset, feasibility and gap from a binary assignment.
fn score(rec: &mut MetricsRecord, instance: &TreeInstance, q: &Qubo<f64>, bits: &[u8], optimum: Option<usize>) {
    rec.best_energy = Some(q.energy(bits).expect("assignment matches model"));
    let cut = extract_cutset(q, bits);
    rec.cutset_size = Some(cut.len());
    rec.feasible = check_feasibility(instance, &cut).is_feasible();
    rec.optimum = optimum;
    if rec.feasible {
        if let Some(opt) = optimum.filter(|&o| o > 0) {
            rec.gap_percent = optimality_gap(cut.len() as f64, opt as f64).ok();
        }
    }
}

fn run_cell(
    spec: &ExperimentSpec,
    prepared: &Prepared,
    i: usize,
    encoding: Encoding,
    solver: &BenchSolver,
    seed: u64,
) -> MetricsRecord {
    let rec = MetricsRecord::blank(spec, i, encoding, solver, seed);
    let instance = match &prepared.instance {
        Ok(inst) => inst,
        Err(e) => return rec.failed("failed", format!("instance generation: {e}")),
    };
    let mut rec = rec;
    let t0 = Instant::now();
    let options = EncodingOptions {
        encoding,
        fix_terminals: spec.fix_terminals,
        ..EncodingOptions::slack()
    };
    let (d1, d2) = default_penalties::<f64>(instance);
    let (m1, m2) = (spec.m1.unwrap_or(d1), spec.m2.unwrap_or(d2));
    let q = match options.build(instance, m1, m2) {
        Ok(q) => q,
        Err(e) => return rec.failed("failed", format!("build: {e}")),
    };
    rec.build_s = t0.elapsed().as_secs_f64();
    rec.logical_vars = q.num_vars();

    match solver {
        BenchSolver::Sa { params } => {
            let schedule = params.schedule().expect("validated");
            let t = Instant::now();
            let set = match simulated_annealing(&q, &schedule, params.shots, seed) {
                Ok(s) => s,
                Err(e) => return rec.failed("failed", e),
            };
            rec.sample_s = t.elapsed().as_secs_f64();
            let bits = set.bits(set.best().expect("at least one shot"));
            score(&mut rec, instance, &q, &bits, prepared.optimum);
        }
        BenchSolver::Exact => {
            let t = Instant::now();
            match exact_ground_state(&q) {
                Ok((bits, _)) => {
                    rec.sample_s = t.elapsed().as_secs_f64();
                    score(&mut rec, instance, &q, &bits, prepared.optimum);
                }
                Err(e @ SolverError::SizeLimit { .. }) => return rec.failed("too_large", e),
                Err(e) => return rec.failed("failed", e),
            }
        }
        BenchSolver::Pipeline {
            params,
            chimera,
            chain_strength,
            prefactor,
            max_logical_vars,
        } => {
            if q.num_vars() > *max_logical_vars {
                return rec.failed(
                    "embed_skipped",
                    format!("{} logical variables exceed limit {max_logical_vars}", q.num_vars()),
                );
            }
            let hw = match chimera_graph(chimera[0], chimera[1], chimera[2]) {
                Ok(hw) => hw,
                Err(e) => return rec.failed("failed", e),
            };
            let config = PipelineConfig {
                schedule: params.schedule().expect("validated"),
                shots: params.shots,
                chain_strength: chain_strength
                    .map_or(ChainStrength::Auto { prefactor: *prefactor }, ChainStrength::Fixed),
                embed: EmbedParams::default(),
                autoscale: true,
            };
            let out = match run_pipeline(&q.to_ising(), &hw, &config, seed) {
                Ok(out) => out,
                Err(PipelineError::EmbedFailed(e)) => return rec.failed("embed_failed", e),
                Err(e) => return rec.failed("failed", e),
            };
            rec.embed_s = Some(out.times.embed_s);
            rec.sample_s = out.times.sample_s;
            rec.unembed_s = Some(out.times.unembed_s);
            rec.physical_qubits = Some(out.stats.physical_qubits);
            rec.chain_max = Some(out.stats.max_len);
            rec.chain_mean = Some(out.stats.mean_len);
            rec.break_fraction = Some(out.stats.break_fraction);
            rec.overhead_ratio = Some(out.stats.overhead_ratio);
            rec.chain_strength = Some(out.stats.chain_strength);
            let best = out.logical.best().expect("at least one shot");
            let bits: Vec<u8> = best.assignment.iter().map(|&s| u8::from(s > 0)).collect();
            score(&mut rec, instance, &q, &bits, prepared.optimum);
        }
    }
    rec
}

/// Runs every (instance, encoding, solver, repetition) cell. Cells run in
/// parallel; the result is in that canonical order regardless. Per-cell
/// failures become rows with a non-`ok` status.
pub fn run_suite(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, BenchError> {
    spec.validate()?;
    let prepared: Vec<Prepared> = spec
        .suite
        .par_iter()
        .map(|e| prepare(e, spec.node_budget))
        .collect();
    let mut cells = Vec::new();
    for i in 0..spec.suite.len() {
        for &encoding in &spec.encodings {
            for solver in &spec.solvers {
                for r in 0..spec.repetitions {
                    cells.push((i, encoding, solver, spec.seed.wrapping_add(r as u64)));
                }
            }
        }
    }
    Ok(cells
        .into_par_iter()
        .map(|(i, encoding, solver, seed)| run_cell(spec, &prepared[i], i, encoding, solver, seed))
        .collect())
}

pub const CSV_COLUMNS: [&str; 19] = [
    "instance_id",
    "V",
    "H",
    "encoding",
    "solver",
    "seed",
    "best_energy",
    "cutset_size",
    "feasible",
    "gap_percent",
    "build_s",
    "embed_s",
    "sample_s",
    "unembed_s",
    "chain_max",
    "chain_mean",
    "break_fraction",
    "overhead_ratio",
    "status",
];

/// Columns holding wall-clock measurements.
pub const TIMING_COLUMNS: [&str; 4] = ["build_s", "embed_s", "sample_s", "unembed_s"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 fields")
}

/// CSV in [`CSV_COLUMNS`] order. Without `timing` the wall-time columns are
/// left empty so the bytes depend only on the spec.
pub fn records_to_csv(records: &[MetricsRecord], timing: bool) -> String {
    let mut w = csv_writer();
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in records {
        let t = |v: Option<f64>| if timing { opt(v) } else { String::new() };
        w.write_record([
            r.instance_id.clone(),
            r.vertices.to_string(),
            r.pairs.to_string(),
            r.encoding.to_string(),
            r.solver.clone(),
            r.seed.to_string(),
            opt(r.best_energy),
            opt(r.cutset_size),
            r.feasible.to_string(),
            opt(r.gap_percent),
            t(Some(r.build_s)),
            t(r.embed_s),
            t(Some(r.sample_s)),
            t(r.unembed_s),
            opt(r.chain_max),
            opt(r.chain_mean),
            opt(r.break_fraction),
            opt(r.overhead_ratio),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    finish(w)
}

pub fn records_to_json(records: &[MetricsRecord]) -> String {
    serde_json::to_string_pretty(records).expect("records serialize") + "\n"
}

pub fn records_from_json(text: &str) -> Result<Vec<MetricsRecord>, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Spec(format!("records: {e}")))
}

/// Per-figure data tables, by file name.
pub fn plot_data(records: &[MetricsRecord]) -> BTreeMap<String, String> {
    let mut files = BTreeMap::new();

    let mut w = csv_writer();
    w.write_record(["instance_id", "V", "encoding", "solver", "seed", "best_energy"]).unwrap();
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.vertices.to_string(),
            r.encoding.to_string(),
            r.solver.clone(),
            r.seed.to_string(),
            opt(r.best_energy),
        ])
        .unwrap();
    }
    files.insert("energy_vs_instance.csv".into(), finish(w));

    let mut w = csv_writer();
    w.write_record(["instance_id", "V", "encoding", "solver", "seed", "cutset_size", "optimum", "feasible"])
        .unwrap();
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.vertices.to_string(),
            r.encoding.to_string(),
            r.solver.clone(),
            r.seed.to_string(),
            opt(r.cutset_size),
            opt(r.optimum),
            r.feasible.to_string(),
        ])
        .unwrap();
    }
    files.insert("cutset_vs_instance.csv".into(), finish(w));

    // one row per logical size, averaged over embedded runs
    let mut by_size: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for r in records {
        if let Some(p) = r.physical_qubits {
            by_size.entry(r.logical_vars).or_default().push(p);
        }
    }
    let mut w = csv_writer();
    w.write_record(["logical_vars", "physical_qubits", "overhead_ratio", "runs"]).unwrap();
    for (n, ps) in &by_size {
        let mean = ps.iter().sum::<usize>() as f64 / ps.len() as f64;
        w.write_record([
            n.to_string(),
            mean.to_string(),
            (mean / *n as f64).to_string(),
            ps.len().to_string(),
        ])
        .unwrap();
    }
    files.insert("overhead_vs_logical.csv".into(), finish(w));

    let mut w = csv_writer();
    w.write_record(["instance_id", "encoding", "solver", "seed", "build_s", "embed_s", "sample_s", "unembed_s"])
        .unwrap();
    for r in records {
        w.write_record([
            r.instance_id.clone(),
            r.encoding.to_string(),
            r.solver.clone(),
            r.seed.to_string(),
            r.build_s.to_string(),
            opt(r.embed_s),
            r.sample_s.to_string(),
            opt(r.unembed_s),
        ])
        .unwrap();
    }
    files.insert("runtime_breakdown.csv".into(), finish(w));
    files
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown format `{s}` (expected csv|json)")),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::Io {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Writes the report to `out` and, with `plot_dir`, the plot-data tables.
/// Returns the paths written.
pub fn emit_report(
    records: &[MetricsRecord],
    format: ReportFormat,
    out: &Path,
    plot_dir: Option<&Path>,
    timing: bool,
) -> Result<Vec<PathBuf>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let body = match format {
        ReportFormat::Csv => records_to_csv(records, timing),
        ReportFormat::Json => records_to_json(records),
    };
    write(out, &body)?;
    let mut written = vec![out.to_owned()];
    if let Some(dir) = plot_dir {
        fs::create_dir_all(dir).map_err(|e| BenchError::Io {
            path: dir.to_owned(),
            message: e.to_string(),
        })?;
        for (name, contents) in plot_data(records) {
            let path = dir.join(name);
            write(&path, &contents)?;
            written.push(path);
        }
    }
    Ok(written)
}
