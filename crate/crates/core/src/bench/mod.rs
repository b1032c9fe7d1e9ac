//! Experiment runner: empirical MSE ensembles, analytic sweeps, circuit-average checks,
//! Hamiltonian loading and result files.

pub mod config;
pub mod empirical;
pub mod haar;
pub mod hamiltonian;
pub mod output;
pub mod sweep;

pub use config::{EpsPolicy, EstimatorGrid, ExperimentConfig, HaarConfig, ObservableSource, RequestConfig};
pub use empirical::{estimate_once, run_empirical_mse, run_function_mse, FunctionMse, MseRecord};
pub use haar::{verify_haar, HaarEntry, HaarReport};
pub use hamiltonian::{eigenvalues, load_hamiltonian, min_eigenvalue};
pub use output::{emit_results, Format};
pub use sweep::{argmin_order, run_analytic_sweep, AnalyticRow, SweepConfig, SweepKind};
