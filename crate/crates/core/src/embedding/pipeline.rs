//! Simulated hardware run: scale, embed, anneal the chained model, decode.

use std::fmt;
use std::time::Instant;

use thiserror::Error;

use super::{
    embed_ising, find_embedding, unembed, uniform_torque_chain_strength, ChainStats,
    EmbedFailure, EmbedParams, Embedding, EmbeddingError, HardwareGraph, LogicalGraph,
};
use crate::qubo::IsingModel;
use crate::scalar::Scalar;
use crate::solvers::{simulated_annealing, SaSchedule, SampleSet, SolverError};

/// Default uniform-torque prefactor.
pub const DEFAULT_TORQUE_PREFACTOR: f64 = 1.414;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainStrength {
    /// [`uniform_torque_chain_strength`] with this prefactor, computed on the
    /// scaled model.
    Auto { prefactor: f64 },
    Fixed(f64),
}

impl Default for ChainStrength {
    fn default() -> Self {
        ChainStrength::Auto {
            prefactor: DEFAULT_TORQUE_PREFACTOR,
        }
    }
}

impl fmt::Display for ChainStrength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainStrength::Auto { prefactor } => write!(f, "auto({prefactor})"),
            ChainStrength::Fixed(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub schedule: SaSchedule,
    pub shots: usize,
    pub chain_strength: ChainStrength,
    pub embed: EmbedParams,
    /// Divide the logical model so that `|h| ≤ 2` and `|J| ≤ 1` before
    /// embedding.
    pub autoscale: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimes {
    pub embed_s: f64,
    pub sample_s: f64,
    pub unembed_s: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome<T> {
    /// Decoded spins with energies of the scaled logical model.
    pub logical: SampleSet<T>,
    pub scaled_model: IsingModel<T>,
    /// Factor the input model was divided by.
    pub scale: T,
    pub embedding: Embedding,
    pub stats: ChainStats,
    pub times: PhaseTimes,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    EmbedFailed(#[from] EmbedFailure),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Largest `max(|h|/2, |J|)`; one when the model is all zeros.
pub fn autoscale_factor<T: Scalar>(m: &IsingModel<T>) -> T {
    let two = T::two();
    let mut factor = T::zero();
    for &h in m.h().values() {
        let v = h.abs() / two;
        if v > factor {
            factor = v;
        }
    }
    for &c in m.j().values() {
        if c.abs() > factor {
            factor = c.abs();
        }
    }
    if factor.is_zero() {
        T::one()
    } else {
        factor
    }
}

pub fn run_pipeline<T: Scalar>(
    model: &IsingModel<T>,
    hw: &HardwareGraph,
    config: &PipelineConfig,
    seed: u64,
) -> Result<PipelineOutcome<T>, PipelineError> {
    let scale = if config.autoscale {
        autoscale_factor(model)
    } else {
        T::one()
    };
    let scaled = model.scaled(T::one() / scale);

    let t0 = Instant::now();
    let logical = LogicalGraph::new(scaled.num_vars(), scaled.interactions());
    let embedding = find_embedding(&logical, hw, &EmbedParams { seed, ..config.embed })?;
    let strength = match config.chain_strength {
        ChainStrength::Auto { prefactor } => {
            uniform_torque_chain_strength(&scaled, scaled.mean_degree(), prefactor)
        }
        ChainStrength::Fixed(v) => T::from_f64(v).ok_or_else(|| {
            EmbeddingError::InvalidParameter(format!("chain strength {v} is not representable"))
        })?,
    };
    let embedded = embed_ising(&scaled, &embedding, hw, strength)?;
    let embed_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let physical = simulated_annealing(&embedded.model, &config.schedule, config.shots, seed)?;
    let sample_s = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let (logical_set, stats) = unembed(&physical, &embedded, &scaled)?;
    let unembed_s = t2.elapsed().as_secs_f64();

    Ok(PipelineOutcome {
        logical: logical_set,
        scaled_model: scaled,
        scale,
        embedding,
        stats,
        times: PhaseTimes {
            embed_s,
            sample_s,
            unembed_s,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{chimera_graph, validate_embedding};
    use crate::instance::TreeInstance;
    use crate::qubo::EncodingOptions;
    use crate::solvers::ScheduleKind;

    #[test]
    fn three_path_slack_through_chimera() {
        let inst = TreeInstance::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)], 0).unwrap();
        let (m1, m2) = crate::qubo::default_penalties::<f64>(&inst);
        let q = EncodingOptions::slack().build(&inst, m1, m2).unwrap();
        let ising = q.to_ising();
        let hw = chimera_graph(2, 2, 4).unwrap();
        let config = PipelineConfig {
            schedule: SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 100).unwrap(),
            shots: 50,
            chain_strength: ChainStrength::default(),
            embed: EmbedParams::default(),
            autoscale: true,
        };
        let out = run_pipeline(&ising, &hw, &config, 7).unwrap();
        let logical = LogicalGraph::new(ising.num_vars(), ising.interactions());
        assert!(validate_embedding(&logical, &hw, &out.embedding).is_valid());
        assert!(out.stats.overhead_ratio >= 1.0);
        let best = out.logical.best().unwrap();
        let bits: Vec<u8> = best.assignment.iter().map(|&s| u8::from(s > 0)).collect();
        assert_eq!(q.energy(&bits).unwrap(), 1.0);
        let max_j = out.scaled_model.j().values().fold(0.0f64, |a, c| a.max(c.abs()));
        assert!(max_j <= 1.0 + 1e-12);
    }

    #[test]
    fn oversized_model_fails_to_embed() {
        let mut j = std::collections::BTreeMap::new();
        for a in 0..6 {
            for b in a + 1..6 {
                j.insert((a, b), 1.0);
            }
        }
        let m = IsingModel::new(6, Default::default(), j, 0.0).unwrap();
        let config = PipelineConfig {
            schedule: SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 10).unwrap(),
            shots: 1,
            chain_strength: ChainStrength::Fixed(1.0),
            embed: EmbedParams::default(),
            autoscale: false,
        };
        let err = run_pipeline(&m, &chimera_graph(1, 1, 4).unwrap(), &config, 0).unwrap_err();
        assert!(matches!(err, PipelineError::EmbedFailed(_)));
    }
}
