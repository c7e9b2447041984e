//! Restricted vertex minimum multicut on trees, modeled as QUBO / Ising
//! problems and solved with classical samplers, an exact branch-and-bound
//! oracle, and a simulated annealing-hardware pipeline (minor embedding onto
//! a Chimera-style qubit graph, chained physical models, majority-vote
//! unembedding).
//!
//! Energy models are generic over [`Scalar`]; the aliases below fix the common
//! instantiations.

pub mod bench;
pub mod embedding;
pub mod instance;
pub mod qubo;
pub mod scalar;
pub mod solvers;

pub use num_rational::Rational64;
pub use scalar::Scalar;

pub use instance::{generate_tree_instance, Path, TreeInstance};
pub use qubo::{Cutset, Encoding, EncodingOptions, Feasibility, IsingModel, Qubo, SlackSign, VarLabel};
pub use solvers::{SaSchedule, SampleSet, ScheduleKind};

pub type QuboF64 = qubo::Qubo<f64>;
pub type QuboF32 = qubo::Qubo<f32>;
pub type QuboExact = qubo::Qubo<Rational64>;

pub type IsingF64 = qubo::IsingModel<f64>;
pub type IsingF32 = qubo::IsingModel<f32>;
pub type IsingExact = qubo::IsingModel<Rational64>;

pub type SampleSetF64 = solvers::SampleSet<f64>;
pub type SampleSetExact = solvers::SampleSet<Rational64>;

pub type EmbeddedIsingF64 = embedding::EmbeddedIsing<f64>;
