use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EpsPolicy, ExperimentConfig};
use crate::analytics::{
    eps_opt_approx, gd_matrices, minimize_over_eps, mse_fd, mse_ps, optimal_coefficients, Component,
};
use crate::ansatz::{Circuit, CircuitSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate, Budget, CircuitOracle, ComponentRequest, EstimatorSpec, Family, FunctionOracle, Stencil,
};
use crate::pauli::Observable;
use crate::sampler::RngStream;

/// Empirical MSE of one estimator at one copy budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRecord {
    pub estimator: String,
    pub component: Component,
    #[serde(rename = "J")]
    pub order: usize,
    pub epsilon: Option<f64>,
    pub n_qubits: usize,
    #[serde(rename = "N_T")]
    pub n_t: u64,
    pub empirical_mse: f64,
    pub std_error: f64,
    pub analytic_mse: Option<f64>,
    pub seed: u64,
    /// Seconds spent on this record, summed over workers.
    pub wall_time: f64,
}

/// One concrete (request, estimator, budget) cell of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub request: ComponentRequest,
    pub spec: EstimatorSpec,
    pub n_t: u64,
    pub analytic: f64,
}

/// Expands the estimator grid into concrete estimators with Case I analytic MSEs.
pub fn resolve_settings(cfg: &ExperimentConfig, d: u64) -> Result<Vec<Setting>> {
    let mut out = Vec::new();
    for rc in &cfg.requests {
        let comp = rc.component;
        let request = rc.request();
        for family in &cfg.estimators.families {
            for &n_t in &cfg.n_t {
                let nf = n_t as f64;
                match family {
                    Family::PS => out.push(Setting {
                        request,
                        spec: EstimatorSpec::ps(comp),
                        n_t,
                        analytic: mse_ps(comp, d, nf)?,
                    }),
                    Family::FD | Family::GD => {
                        let orders = if *family == Family::FD { vec![1] } else { cfg.estimators.orders.clone() };
                        for j in orders {
                            for policy in &cfg.estimators.epsilon {
                                let eps = match *policy {
                                    EpsPolicy::Fixed { value } => value,
                                    EpsPolicy::OptimalApprox => eps_opt_approx(comp, d, nf)?,
                                    EpsPolicy::OptimalNumeric => minimize_over_eps(comp, d, nf, j)?.eps,
                                };
                                let (spec, analytic) = if *family == Family::FD {
                                    (EstimatorSpec::fd(comp, eps), mse_fd(comp, d, nf, eps)?.total)
                                } else {
                                    let opt = optimal_coefficients(&gd_matrices(comp, d, nf, eps, j)?)?;
                                    (EstimatorSpec::gd(comp, eps, opt.c.iter().copied().collect()), opt.mse)
                                };
                                spec.validate()
                                    .map_err(|e| Error::config("estimators.epsilon", e.to_string()))?;
                                out.push(Setting {
                                    request,
                                    spec,
                                    n_t,
                                    analytic,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

struct CircuitResult {
    mean_sq: Vec<f64>,
    seconds: Vec<f64>,
}

/// Random parameters (and features) of circuit instance `i`.
pub(crate) fn draw_instance(circuit: &Circuit, root: &RngStream, i: u64) -> (crate::ansatz::ParamVector, Vec<f64>) {
    let cs = root.child(i);
    let theta = circuit.random_params_with(&mut cs.child(0).rng());
    let x = circuit.random_features_with(&mut cs.child(1).rng());
    (theta, x)
}

/// Runs every setting on `num_circuits` random instances with `num_trials` sampled
/// estimates each. The reference value is the exact parameter-shift derivative.
pub fn run_empirical_mse(cfg: &ExperimentConfig, obs: &Observable) -> Result<Vec<MseRecord>> {
    cfg.validate()?;
    let circuit = cfg.circuit.build()?;
    if obs.num_qubits() != circuit.num_qubits() {
        return Err(Error::config(
            "observable",
            format!("{} qubits for a {}-qubit circuit", obs.num_qubits(), circuit.num_qubits()),
        ));
    }
    let settings = resolve_settings(cfg, circuit.dim())?;
    let root = RngStream::new(cfg.seed);
    let trials = cfg.num_trials;

    let per_circuit = (0..cfg.num_circuits as u64)
        .into_par_iter()
        .map(|i| -> Result<CircuitResult> {
            let (theta, x) = draw_instance(&circuit, &root, i);
            let oracle = CircuitOracle::new(&circuit, theta, x, obs)?;
            let cs = root.child(i);
            let mut mean_sq = Vec::with_capacity(settings.len());
            let mut seconds = Vec::with_capacity(settings.len());
            let mut truth_cache: Vec<(ComponentRequest, Component, f64)> = Vec::new();
            for (si, s) in settings.iter().enumerate() {
                let start = Instant::now();
                let comp = s.spec.component;
                let y = match truth_cache.iter().find(|(r, c, _)| *r == s.request && *c == comp) {
                    Some(&(_, _, y)) => y,
                    None => {
                        let y = estimate(&EstimatorSpec::ps(comp), &oracle, &s.request, Budget::Exact, &cs)?;
                        truth_cache.push((s.request, comp, y));
                        y
                    }
                };
                let stencil = Stencil::for_spec(&s.spec, &s.request, oracle.params())?;
                let probs = stencil
                    .shifted_params(oracle.params())
                    .iter()
                    .map(|t| oracle.term_probabilities(t))
                    .collect::<Result<Vec<_>>>()?;
                let mut acc = 0.0;
                for t in 0..trials as u64 {
                    let stream = cs.keyed(&[2 + t, si as u64]);
                    let yhat = stencil.sample_from_probabilities(&probs, oracle.weights(), s.n_t, &stream)?;
                    acc += (yhat - y).powi(2);
                }
                mean_sq.push(acc / trials as f64);
                seconds.push(start.elapsed().as_secs_f64());
            }
            Ok(CircuitResult { mean_sq, seconds })
        })
        .collect::<Result<Vec<_>>>()?;

    let n_qubits = circuit.num_qubits();
    Ok(settings
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let samples: Vec<f64> = per_circuit.iter().map(|c| c.mean_sq[si]).collect();
            let (mean, se) = mean_and_std_error(&samples);
            MseRecord {
                estimator: s.spec.label(),
                component: s.spec.component,
                order: s.spec.order,
                epsilon: s.spec.epsilon,
                n_qubits,
                n_t: s.n_t,
                empirical_mse: mean,
                std_error: se,
                analytic_mse: Some(s.analytic),
                seed: cfg.seed,
                wall_time: per_circuit.iter().map(|c| c.seconds[si]).sum(),
            }
        })
        .collect())
}

/// Sample mean and its standard error, summed in index order.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical MSE of the function estimator itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionMse {
    pub empirical_mse: f64,
    pub std_error: f64,
    pub analytic_mse: f64,
}

/// Function-estimator MSE with `copies` measurements per term, over random circuits.
pub fn run_function_mse(
    spec: &CircuitSpec,
    obs: &Observable,
    copies: u64,
    num_circuits: usize,
    num_trials: usize,
    seed: u64,
) -> Result<FunctionMse> {
    if num_circuits == 0 || num_trials == 0 || copies == 0 {
        return Err(Error::Argument("ensemble sizes and copies must be >= 1".into()));
    }
    let circuit = spec.build()?;
    let root = RngStream::new(seed);
    let per_circuit = (0..num_circuits as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let (theta, x) = draw_instance(&circuit, &root, i);
            let f = circuit.evaluate_observable(&theta, &x, obs)?;
            let probs = crate::sampler::term_plus_probabilities(&circuit, &theta, &x, obs)?;
            let w = obs.normalized_weights();
            let cs = root.child(i);
            let mut acc = 0.0;
            for t in 0..num_trials as u64 {
                let mut rng = cs.child(2 + t).rng();
                let fhat = crate::sampler::sample_weighted_parity(&probs, &w, copies, &mut rng);
                acc += (fhat - f).powi(2);
            }
            Ok(acc / num_trials as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, se) = mean_and_std_error(&per_circuit);
    let d = circuit.dim() as f64;
    Ok(FunctionMse {
        empirical_mse: mean,
        std_error: se,
        analytic_mse: d / (copies as f64 * (d + 1.0)),
    })
}

/// Direct single estimate through the oracle path; used by the CLI.
pub fn estimate_once(
    circuit: &Circuit,
    obs: &Observable,
    spec: &EstimatorSpec,
    request: &ComponentRequest,
    budget: Budget,
    seed: u64,
) -> Result<(f64, f64)> {
    let root = RngStream::new(seed);
    let (theta, x) = draw_instance(circuit, &root, 0);
    let oracle = CircuitOracle::new(circuit, theta, x, obs)?;
    let truth = estimate(&EstimatorSpec::ps(spec.component), &oracle, request, Budget::Exact, &root)?;
    let value = estimate(spec, &oracle, request, budget, &root.child(1))?;
    Ok((value, truth))
}
