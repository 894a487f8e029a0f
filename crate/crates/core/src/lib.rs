//! Numerical laboratory for a normal oscillator coupled to a ghost
//! (negative-energy) oscillator through a bounded potential.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, which is what the command-line
//! driver and the acceptance suite use.

pub mod commutator;
pub mod ehrenfest;
pub mod error;
pub mod fock;
pub mod grid;
pub mod model;
pub mod scalar;

pub use error::{BoundKind, Error, Result};
pub use scalar::Real;

pub type Coupling = model::Coupling<f64>;
pub type PhasePoint = model::PhasePoint<f64>;
pub type PotentialJet = model::PotentialJet<f64>;
pub type ClassicalObservables = model::ClassicalObservables<f64>;
pub type CoefficientTriple = commutator::CoefficientTriple<f64>;
pub type IntegratorConfig = ehrenfest::IntegratorConfig<f64>;
pub type Trajectory = ehrenfest::Trajectory<f64>;
pub type GridSpec = grid::GridSpec<f64>;
pub type Wavefunction = grid::Wavefunction<f64>;
pub type MomentRecord = grid::MomentRecord<f64>;
pub type EvolutionConfig = grid::EvolutionConfig<f64>;
pub type MonitorConfig = grid::MonitorConfig<f64>;
pub type FockOperator = fock::FockOperator<f64>;
pub type SpectrumResult = fock::SpectrumResult<f64>;
