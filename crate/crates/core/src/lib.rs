//! Shot-noise analysis of derivative estimators for Pauli-encoded parametrized circuits.
//!
//! The crate covers a dense statevector simulator, a hardware-efficient ansatz, binomial
//! shot sampling, finite-difference / generalized-difference / parameter-shift estimators,
//! closed-form mean-squared-error analytics and an experiment runner.

pub mod analytics;
pub mod ansatz;
pub mod bench;
pub mod error;
pub mod estimators;
pub mod pauli;
pub mod sampler;
pub mod statevector;

pub use analytics::{CaseLabel, Component, GDMatrices, MseBreakdown};
pub use ansatz::{Circuit, CircuitSpec, ParamIndex, ParamVector, Topology};
pub use error::{Error, Result};
pub use estimators::{Budget, ComponentRequest, EstimatorSpec, Family};
pub use pauli::{Observable, Pauli, PauliString};
pub use sampler::{RngStream, ShotBudget};
pub use statevector::{Gate, StateVector};
