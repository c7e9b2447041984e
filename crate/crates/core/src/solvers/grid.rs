//! Penalty-coefficient grid search driven by simulated annealing.

use super::{exact_multicut_bnb, simulated_annealing, SaSchedule, SolverError};
use crate::bench::{feasibility_rate, optimality_gap};
use crate::instance::TreeInstance;
use crate::qubo::{check_feasibility, extract_cutset, EncodingOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchConfig {
    pub encoding: EncodingOptions,
    pub schedule: SaSchedule,
    pub shots: usize,
    /// Independent SA runs per grid point (seeds `seed`, `seed + 1`, ...).
    pub replications: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub m1: f64,
    pub m2: f64,
    /// Occurrence-weighted share of feasible samples over all replications.
    pub feasibility_rate: f64,
    /// Gap (percent) of the smallest feasible cutset sampled; `None` if no
    /// sample was feasible.
    pub best_gap: Option<f64>,
    pub best_energy: f64,
}

pub fn grid_search_penalties(
    instance: &TreeInstance,
    grid: &[(f64, f64)],
    config: &GridSearchConfig,
    seed: u64,
) -> Result<Vec<GridRow>, SolverError> {
    if grid.is_empty() {
        return Err(SolverError::EmptyGrid);
    }
    let optimum = exact_multicut_bnb(instance)?.len();
    let mut rows = Vec::with_capacity(grid.len());
    for &(m1, m2) in grid {
        let q = config.encoding.build(instance, m1, m2)?;
        let mut feasible_weight = 0.0;
        let mut total = 0usize;
        let mut best_size: Option<usize> = None;
        let mut best_energy = f64::INFINITY;
        for r in 0..config.replications.max(1) {
            let set = simulated_annealing(&q, &config.schedule, config.shots, seed.wrapping_add(r as u64))?;
            feasible_weight += feasibility_rate(&set, instance, &q) * set.shots as f64;
            total += set.shots;
            best_energy = best_energy.min(set.best_energy().unwrap_or(f64::INFINITY));
            for rec in &set.records {
                let c = extract_cutset(&q, &set.bits(rec));
                if check_feasibility(instance, &c).is_feasible() {
                    best_size = Some(best_size.map_or(c.len(), |b| b.min(c.len())));
                }
            }
        }
        let best_gap = match best_size {
            Some(size) if optimum > 0 => optimality_gap(size as f64, optimum as f64).ok(),
            _ => None,
        };
        rows.push(GridRow {
            m1,
            m2,
            feasibility_rate: feasible_weight / total as f64,
            best_gap,
            best_energy,
        });
    }
    Ok(rows)
}
