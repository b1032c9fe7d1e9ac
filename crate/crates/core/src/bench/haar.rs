use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::HaarConfig;
use super::empirical::{draw_instance, mean_and_std_error};
use crate::analytics::{squared_average, CaseLabel, Component, Quantity};
use crate::error::Result;
use crate::estimators::{estimate, Budget, CircuitOracle, ComponentRequest, EstimatorSpec, FunctionOracle};
use crate::pauli::{parse_pauli, Observable};
use crate::sampler::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarEntry {
    pub quantity: String,
    pub estimate: f64,
    pub std_error: f64,
    pub target: f64,
    pub relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarReport {
    pub n_qubits: usize,
    pub draws: usize,
    pub seed: u64,
    pub entries: Vec<HaarEntry>,
}

impl HaarReport {
    pub fn entry(&self, quantity: &str) -> Option<&HaarEntry> {
        self.entries.iter().find(|e| e.quantity == quantity)
    }
}

/// Monte-Carlo averages of `f^2` and squared exact derivatives over random parameters,
/// next to their sandwiched-two-design values.
pub fn verify_haar(cfg: &HaarConfig) -> Result<HaarReport> {
    let circuit = cfg.circuit.build()?;
    let obs = Observable::single(parse_pauli(&cfg.observable)?)?;
    let draws = cfg.draws.max(1);
    let requests = [
        (Component::Gradient, ComponentRequest::gradient(cfg.first)),
        (Component::DiagHessian, ComponentRequest::diag(cfg.first)),
        (Component::OffdiagHessian, ComponentRequest::offdiag(cfg.offdiag.0, cfg.offdiag.1)),
    ];
    {
        let theta = circuit.random_params(0);
        for (c, r) in &requests {
            r.resolve(*c, &theta)?;
        }
    }
    let root = RngStream::new(cfg.seed);
    let samples = (0..draws as u64)
        .into_par_iter()
        .map(|i| -> Result<[f64; 4]> {
            let (theta, x) = draw_instance(&circuit, &root, i);
            let oracle = CircuitOracle::new(&circuit, theta, x, &obs)?;
            let f = oracle.exact(oracle.params())?;
            let mut out = [f * f, 0.0, 0.0, 0.0];
            for (k, (c, r)) in requests.iter().enumerate() {
                let v = estimate(&EstimatorSpec::ps(*c), &oracle, r, Budget::Exact, &root)?;
                out[k + 1] = v * v;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = circuit.dim();
    let names = ["f^2", "gradient^2", "diag_hessian^2", "offdiag_hessian^2"];
    let quantities = [
        Quantity::Function,
        Quantity::Derivative(Component::Gradient),
        Quantity::Derivative(Component::DiagHessian),
        Quantity::Derivative(Component::OffdiagHessian),
    ];
    let mut entries = Vec::new();
    for k in 0..4 {
        let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (mean, se) = mean_and_std_error(&col);
        let target = squared_average(quantities[k], CaseLabel::I, d)?.value;
        entries.push(HaarEntry {
            quantity: names[k].into(),
            estimate: mean,
            std_error: se,
            target,
            relative_deviation: (mean - target) / target,
        });
    }
    Ok(HaarReport {
        n_qubits: circuit.num_qubits(),
        draws,
        seed: cfg.seed,
        entries,
    })
}
