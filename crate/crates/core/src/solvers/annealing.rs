//! Single-site Metropolis simulated annealing.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnergyModel, SampleSet, SolverError, SparseModel, Vartype};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleKind {
    Geometric,
    Linear,
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "geometric" => Ok(ScheduleKind::Geometric),
            "linear" => Ok(ScheduleKind::Linear),
            _ => Err(format!("unknown schedule `{s}` (expected geometric|linear)")),
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::Linear => "linear",
        })
    }
}

/// Inverse-temperature ramp from `beta_min` to `beta_max` over `sweeps`
/// sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaSchedule {
    kind: ScheduleKind,
    beta_min: f64,
    beta_max: f64,
    sweeps: usize,
}

impl SaSchedule {
    pub fn new(
        kind: ScheduleKind,
        beta_min: f64,
        beta_max: f64,
        sweeps: usize,
    ) -> Result<Self, SolverError> {
        if !(beta_min.is_finite() && beta_max.is_finite()) || beta_min <= 0.0 {
            return Err(SolverError::InvalidSchedule(format!(
                "betas must be positive and finite (got {beta_min}, {beta_max})"
            )));
        }
        if beta_min >= beta_max {
            return Err(SolverError::InvalidSchedule(format!(
                "beta_min {beta_min} must be below beta_max {beta_max}"
            )));
        }
        if sweeps == 0 {
            return Err(SolverError::InvalidSchedule("sweeps must be ≥ 1".into()));
        }
        Ok(SaSchedule {
            kind,
            beta_min,
            beta_max,
            sweeps,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Beta used during sweep `t`. A single-sweep schedule runs at `beta_max`.
    pub fn beta_at(&self, t: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_max;
        }
        let frac = t as f64 / (self.sweeps - 1) as f64;
        match self.kind {
            ScheduleKind::Geometric => {
                self.beta_min * (self.beta_max / self.beta_min).powf(frac)
            }
            ScheduleKind::Linear => self.beta_min + frac * (self.beta_max - self.beta_min),
        }
    }

    pub fn betas(&self) -> Vec<f64> {
        (0..self.sweeps).map(|t| self.beta_at(t)).collect()
    }

    /// Short tag, e.g. `geometric:0.1-10:100`.
    pub fn tag(&self) -> String {
        format!("{}:{}-{}:{}", self.kind, self.beta_min, self.beta_max, self.sweeps)
    }
}

fn anneal_shot(model: &SparseModel, betas: &[f64], rng: &mut ChaCha8Rng) -> Vec<i8> {
    let n = model.num_vars();
    let mut values: Vec<i8> = (0..n)
        .map(|_| {
            let bit = rng.gen::<bool>();
            match model.vartype {
                Vartype::Binary => i8::from(bit),
                Vartype::Spin => {
                    if bit {
                        1
                    } else {
                        -1
                    }
                }
            }
        })
        .collect();
    let mut field = model.local_fields(&values);
    for &beta in betas {
        for i in 0..n {
            let next = model.vartype.flipped(values[i]);
            let delta = (next - values[i]) as f64;
            let de = delta * field[i];
            if de <= 0.0 || rng.gen::<f64>() < (-beta * de).exp() {
                values[i] = next;
                for &(j, w) in &model.neighbors[i] {
                    field[j] += w * delta;
                }
            }
        }
    }
    values
}

/// Runs `shots` independent anneals. Shot `k` draws from ChaCha stream `k` of
/// `seed`, so the first `k` shots of a run do not depend on how many shots
/// follow.
pub fn simulated_annealing<T: Scalar, M: EnergyModel<T> + ?Sized>(
    model: &M,
    schedule: &SaSchedule,
    shots: usize,
    seed: u64,
) -> Result<SampleSet<T>, SolverError> {
    simulated_annealing_until(model, schedule, shots, seed, None)
}

/// As [`simulated_annealing`], but stops starting new shots once `deadline`
/// has passed. The first shot always runs.
pub fn simulated_annealing_until<T: Scalar, M: EnergyModel<T> + ?Sized>(
    model: &M,
    schedule: &SaSchedule,
    shots: usize,
    seed: u64,
    deadline: Option<Instant>,
) -> Result<SampleSet<T>, SolverError> {
    if model.num_vars() == 0 {
        return Err(SolverError::EmptyModel);
    }
    if shots == 0 {
        return Err(SolverError::InvalidShots);
    }
    let start = Instant::now();
    let sparse = model.sparse();
    let betas = schedule.betas();
    let mut samples = Vec::with_capacity(shots);
    for shot in 0..shots {
        if shot > 0 && deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot as u64);
        samples.push(anneal_shot(&sparse, &betas, &mut rng));
    }
    let completed = samples.len();
    let mut set = SampleSet::from_samples(model, samples, format!("sa[{}]", schedule.tag()), seed)?;
    set.info.insert("schedule".into(), schedule.kind().to_string());
    set.info.insert("beta_min".into(), schedule.beta_min().to_string());
    set.info.insert("beta_max".into(), schedule.beta_max().to_string());
    set.info.insert("sweeps".into(), schedule.sweeps().to_string());
    set.info.insert("requested_shots".into(), shots.to_string());
    if completed < shots {
        set.info.insert("truncated".into(), "true".into());
    }
    set.wall_time_s = start.elapsed().as_secs_f64();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::Qubo;
    use std::collections::BTreeMap;

    #[test]
    fn schedule_endpoints() {
        let g = SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 5).unwrap();
        let b = g.betas();
        assert!((b[0] - 0.1).abs() < 1e-12 && (b[4] - 10.0).abs() < 1e-12);
        assert!((b[2] - 1.0).abs() < 1e-12);
        let l = SaSchedule::new(ScheduleKind::Linear, 1.0, 3.0, 3).unwrap();
        assert_eq!(l.betas(), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            SaSchedule::new(ScheduleKind::Linear, 1.0, 3.0, 1).unwrap().betas(),
            vec![3.0]
        );
    }

    #[test]
    fn schedule_validation() {
        assert!(SaSchedule::new(ScheduleKind::Linear, 2.0, 1.0, 10).is_err());
        assert!(SaSchedule::new(ScheduleKind::Linear, 0.0, 1.0, 10).is_err());
        assert!(SaSchedule::new(ScheduleKind::Linear, 0.1, 1.0, 0).is_err());
        assert!(SaSchedule::new(ScheduleKind::Linear, 0.1, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn single_variable_minimum() {
        let q = Qubo::<f64>::unlabeled(1, BTreeMap::from([(0, -1.0)]), BTreeMap::new(), 0.0)
            .unwrap();
        let s = SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 100).unwrap();
        let set = simulated_annealing(&q, &s, 100, 11).unwrap();
        assert_eq!(set.records.len(), 1);
        assert_eq!(set.records[0].assignment, vec![1]);
        assert_eq!(set.records[0].energy, -1.0);
        assert_eq!(set.records[0].occurrences, 100);
    }

    #[test]
    fn empty_model_and_zero_shots_rejected() {
        let q = Qubo::<f64>::unlabeled(0, BTreeMap::new(), BTreeMap::new(), 0.0).unwrap();
        let s = SaSchedule::new(ScheduleKind::Linear, 0.1, 1.0, 10).unwrap();
        assert_eq!(simulated_annealing(&q, &s, 10, 0).unwrap_err(), SolverError::EmptyModel);
        let q = Qubo::<f64>::unlabeled(1, BTreeMap::new(), BTreeMap::new(), 0.0).unwrap();
        assert_eq!(simulated_annealing(&q, &s, 0, 0).unwrap_err(), SolverError::InvalidShots);
    }

    #[test]
    fn spin_models_sample_too() {
        // ferromagnetic pair with a field: ground state (+1, +1)
        let m = crate::qubo::IsingModel::new(
            2,
            BTreeMap::from([(0, -0.5), (1, -0.5)]),
            BTreeMap::from([((0, 1), -1.0)]),
            0.0,
        )
        .unwrap();
        let s = SaSchedule::new(ScheduleKind::Geometric, 0.1, 10.0, 50).unwrap();
        let set = simulated_annealing(&m, &s, 20, 4).unwrap();
        assert_eq!(set.records[0].assignment, vec![1, 1]);
        assert_eq!(set.records[0].energy, -2.0);
        set.audit(&m).unwrap();
    }
}
