//! Racing meta-solver: several solver configurations run concurrently on the
//! same model and their best records are merged.
//!
//! Members run for a fixed number of shots under a shared wall-clock budget;
//! there is no dynamic reallocation between members. The merge is a pure fold
//! over member results in member order, so the output does not depend on
//! thread scheduling unless the budget truncates a member.

use std::collections::BTreeMap;
use std::thread;
use std::time::{Duration, Instant};

use super::{
    exact_bruteforce, simulated_annealing_until, EnergyModel, SaSchedule, SampleRecord,
    SampleSet, SolverError, Vartype,
};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum SolverConfig {
    Anneal {
        schedule: SaSchedule,
        shots: usize,
        /// Member seed; defaults to the race seed plus the member index.
        seed: Option<u64>,
    },
    Exact,
}

impl SolverConfig {
    fn kind(&self) -> &'static str {
        match self {
            SolverConfig::Anneal { .. } => "sa",
            SolverConfig::Exact => "exact",
        }
    }
}

fn run_member<T: Scalar, M: EnergyModel<T>>(
    model: &M,
    config: &SolverConfig,
    seed: u64,
    deadline: Instant,
) -> Result<SampleSet<T>, SolverError> {
    match config {
        SolverConfig::Anneal { schedule, shots, .. } => {
            simulated_annealing_until(model, schedule, *shots, seed, Some(deadline))
        }
        SolverConfig::Exact => {
            let (x, _) = exact_bruteforce(&model.as_qubo())?;
            let values: Vec<i8> = match model.vartype() {
                Vartype::Binary => x.iter().map(|&b| b as i8).collect(),
                Vartype::Spin => x.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect(),
            };
            SampleSet::from_samples(model, vec![values], "exact", seed)
        }
    }
}

pub fn racing_solve<T: Scalar, M: EnergyModel<T>>(
    model: &M,
    configs: &[SolverConfig],
    budget: Duration,
    seed: u64,
) -> Result<SampleSet<T>, SolverError> {
    if configs.is_empty() {
        return Err(SolverError::NoConfigs);
    }
    if budget.is_zero() {
        return Err(SolverError::NonPositiveBudget);
    }
    let start = Instant::now();
    let deadline = start + budget;
    let results: Vec<Result<SampleSet<T>, SolverError>> = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .enumerate()
            .map(|(i, config)| {
                let member_seed = match config {
                    SolverConfig::Anneal { seed: Some(s), .. } => *s,
                    _ => seed.wrapping_add(i as u64),
                };
                scope.spawn(move || run_member(model, config, member_seed, deadline))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("racing member panicked"))
            .collect()
    });

    let mut records: Vec<SampleRecord<T>> = Vec::new();
    let mut failures = Vec::new();
    let mut info = BTreeMap::new();
    for (i, (config, result)) in configs.iter().zip(results).enumerate() {
        let id = format!("{i}:{}", config.kind());
        match result {
            Ok(set) => {
                let best = set.best_energy().expect("member produced samples");
                info.insert(format!("member.{id}.best"), best.to_string());
                if set.info.contains_key("truncated") {
                    info.insert(format!("member.{id}.truncated"), "true".into());
                }
                records.extend(
                    set.records
                        .into_iter()
                        .filter(|r| r.energy == best)
                        .map(|r| SampleRecord {
                            origin: Some(id.clone()),
                            ..r
                        }),
                );
            }
            Err(e) => {
                info.insert(format!("member.{id}.error"), e.to_string());
                failures.push(format!("{id}: {e}"));
            }
        }
    }
    if records.is_empty() {
        return Err(SolverError::AllMembersFailed(failures));
    }
    let mut set = SampleSet {
        vartype: model.vartype(),
        shots: records.iter().map(|r| r.occurrences).sum(),
        records,
        solver_id: "race".into(),
        seed,
        wall_time_s: 0.0,
        info,
    };
    set.sort();
    set.wall_time_s = start.elapsed().as_secs_f64();
    Ok(set)
}
