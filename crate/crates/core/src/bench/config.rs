use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::Component;
use crate::ansatz::{CircuitSpec, ParamIndex, Topology};
use crate::error::{Error, Result};
use crate::estimators::{ComponentRequest, Family};
use crate::pauli::{parse_pauli, Observable};

/// Water-molecule Hamiltonian shipped with the crate (96 terms, 8 qubits).
pub const WATER_HAMILTONIAN: &str = include_str!("../../data/water.ham");

/// Where the measured observable comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableSource {
    /// A single Pauli string with unit weight.
    Pauli(String),
    /// Inline `(coefficient, letters)` terms.
    Terms(Vec<(f64, String)>),
    /// Path to a Hamiltonian text file.
    Hamiltonian(PathBuf),
    /// Named data set bundled with the crate; only `"water"` exists.
    Builtin(String),
}

impl ObservableSource {
    /// Relative Hamiltonian paths are resolved against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<Observable> {
        match self {
            ObservableSource::Pauli(p) => Observable::single(parse_pauli(p)?),
            ObservableSource::Terms(t) => {
                let terms = t
                    .iter()
                    .map(|(h, p)| Ok((*h, parse_pauli(p)?)))
                    .collect::<Result<Vec<_>>>()?;
                Observable::new(terms)
            }
            ObservableSource::Hamiltonian(path) => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                super::load_hamiltonian(&full)
            }
            ObservableSource::Builtin(name) if name == "water" => Observable::parse_terms(WATER_HAMILTONIAN),
            ObservableSource::Builtin(name) => {
                Err(Error::config("observable.builtin", format!("unknown data set {name:?}")))
            }
        }
    }
}

/// Step-size rule for FD/GD estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum EpsPolicy {
    Fixed { value: f64 },
    /// Leading-order FD step; GD coefficients are then optimized at that step.
    OptimalApprox,
    /// Joint numerical optimization of step and coefficients.
    OptimalNumeric,
}

/// Estimators to run: every listed family, GD once per order in `J`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorGrid {
    pub families: Vec<Family>,
    #[serde(rename = "J", default = "default_orders")]
    pub orders: Vec<usize>,
    #[serde(default = "default_eps")]
    pub epsilon: Vec<EpsPolicy>,
}

fn default_orders() -> Vec<usize> {
    vec![2]
}

fn default_eps() -> Vec<EpsPolicy> {
    vec![EpsPolicy::OptimalNumeric]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestConfig {
    pub component: Component,
    pub first: ParamIndex,
    #[serde(default)]
    pub second: Option<ParamIndex>,
}

impl RequestConfig {
    pub fn request(&self) -> ComponentRequest {
        ComponentRequest {
            first: self.first,
            second: match self.component {
                Component::Gradient => None,
                Component::DiagHessian => Some(self.first),
                Component::OffdiagHessian => self.second,
            },
        }
    }
}

/// Empirical-MSE experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub circuit: CircuitSpec,
    pub observable: ObservableSource,
    pub requests: Vec<RequestConfig>,
    pub estimators: EstimatorGrid,
    #[serde(rename = "N_T")]
    pub n_t: Vec<u64>,
    #[serde(default = "default_circuits")]
    pub num_circuits: usize,
    #[serde(default = "default_trials")]
    pub num_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_circuits() -> usize {
    50
}

fn default_trials() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        if self.num_circuits == 0 {
            return Err(Error::config("num_circuits", "must be >= 1"));
        }
        if self.num_trials == 0 {
            return Err(Error::config("num_trials", "must be >= 1"));
        }
        if self.n_t.is_empty() {
            return Err(Error::config("N_T", "empty list"));
        }
        if self.requests.is_empty() {
            return Err(Error::config("requests", "empty list"));
        }
        if self.estimators.families.is_empty() {
            return Err(Error::config("estimators.families", "empty list"));
        }
        if self.estimators.families.contains(&Family::GD)
            && (self.estimators.orders.is_empty() || self.estimators.orders.contains(&0))
        {
            return Err(Error::config("estimators.J", "orders must be >= 1"));
        }
        let needs_eps = self.estimators.families.iter().any(|f| *f != Family::PS);
        if needs_eps && self.estimators.epsilon.is_empty() {
            return Err(Error::config("estimators.epsilon", "empty list"));
        }
        for p in &self.estimators.epsilon {
            if let EpsPolicy::Fixed { value } = p {
                if !(*value > 0.0 && *value < std::f64::consts::TAU) {
                    return Err(Error::config("estimators.epsilon", format!("{value} outside (0, 2pi)")));
                }
            }
        }
        let circuit = self
            .circuit
            .build()
            .map_err(|e| Error::config("circuit", e.to_string()))?;
        let theta = circuit.random_params(0);
        for (i, r) in self.requests.iter().enumerate() {
            r.request()
                .resolve(r.component, &theta)
                .map_err(|e| Error::config(format!("requests[{i}]"), e.to_string()))?;
        }
        for (i, &n) in self.n_t.iter().enumerate() {
            if n == 0 {
                return Err(Error::config(format!("N_T[{i}]"), "must be >= 1"));
            }
        }
        Ok(())
    }

    /// Named scenarios: `water-eigensolver` and `supervised-learning` (8 qubits, five
    /// modules of four units; derivatives at `(50, 1)` and `(49, 2)`), and `two-design`
    /// (4 qubits with the differentiated slots sandwiched between untouched modules).
    pub fn preset(name: &str) -> Result<Self> {
        let hamiltonian = |encoding| CircuitSpec {
            n: 8,
            layers: 5,
            reps: 4,
            topology: Topology::Chain,
            encoding,
        };
        let eight_qubit_requests = vec![
            RequestConfig {
                component: Component::Gradient,
                first: ParamIndex::new(50, 1),
                second: None,
            },
            RequestConfig {
                component: Component::DiagHessian,
                first: ParamIndex::new(50, 1),
                second: None,
            },
            RequestConfig {
                component: Component::OffdiagHessian,
                first: ParamIndex::new(50, 1),
                second: Some(ParamIndex::new(49, 2)),
            },
        ];
        let grid = EstimatorGrid {
            families: vec![Family::FD, Family::GD, Family::PS],
            orders: vec![2],
            epsilon: vec![EpsPolicy::OptimalNumeric],
        };
        let n_t = vec![100, 316, 1000, 3162, 10000, 31623, 100000];
        Ok(match name {
            "water-eigensolver" => Self {
                circuit: hamiltonian(None),
                observable: ObservableSource::Builtin("water".into()),
                requests: eight_qubit_requests,
                estimators: grid,
                n_t,
                num_circuits: default_circuits(),
                num_trials: default_trials(),
                seed: 0,
                output: None,
            },
            "supervised-learning" => Self {
                circuit: hamiltonian(Some(crate::ansatz::EncodingSpec::RyLadder)),
                observable: ObservableSource::Pauli("ZIIIIIII".into()),
                requests: eight_qubit_requests,
                estimators: grid,
                n_t,
                num_circuits: default_circuits(),
                num_trials: default_trials(),
                seed: 0,
                output: None,
            },
            "two-design" => Self {
                circuit: CircuitSpec {
                    n: 4,
                    layers: 5,
                    reps: 4,
                    topology: Topology::Chain,
                    encoding: None,
                },
                observable: ObservableSource::Pauli("ZIII".into()),
                requests: vec![
                    RequestConfig {
                        component: Component::Gradient,
                        first: ParamIndex::new(20, 3),
                        second: None,
                    },
                    RequestConfig {
                        component: Component::DiagHessian,
                        first: ParamIndex::new(20, 3),
                        second: None,
                    },
                    RequestConfig {
                        component: Component::OffdiagHessian,
                        first: ParamIndex::new(20, 2),
                        second: Some(ParamIndex::new(20, 4)),
                    },
                ],
                estimators: grid,
                n_t: vec![200, 2000],
                num_circuits: default_circuits(),
                num_trials: 200,
                seed: 0,
                output: None,
            },
            other => return Err(Error::Argument(format!("unknown preset {other:?}"))),
        })
    }

    /// Ensemble size used for full reproductions (500 circuits x 500 trials).
    pub fn full_scale(mut self) -> Self {
        self.num_circuits = 500;
        self.num_trials = 500;
        self
    }
}

/// Circuit-average (Haar) verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarConfig {
    pub circuit: CircuitSpec,
    pub observable: String,
    /// Slot for the gradient and diagonal Hessian.
    pub first: ParamIndex,
    /// Two distinct slots for the off-diagonal Hessian.
    pub offdiag: (ParamIndex, ParamIndex),
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_draws() -> usize {
    2000
}

impl HaarConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Four qubits, five modules of four units; derivatives well inside the circuit.
    pub fn default_four_qubit() -> Self {
        Self {
            circuit: CircuitSpec {
                n: 4,
                layers: 5,
                reps: 4,
                topology: Topology::Chain,
                encoding: None,
            },
            observable: "ZIII".into(),
            first: ParamIndex::new(20, 3),
            offdiag: (ParamIndex::new(20, 2), ParamIndex::new(20, 4)),
            draws: default_draws(),
            seed: 0,
        }
    }
}
