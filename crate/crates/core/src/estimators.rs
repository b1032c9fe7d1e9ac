//! Finite-difference (FD), generalized-difference (GD) and parameter-shift (PS) estimators
//! of gradient and Hessian components, exact or shot-sampled.
//!
//! Every estimator is a [`Stencil`]: a weighted sum of function values at shifted
//! parameters. In sampled mode the copy budget is split equally over the stencil points and
//! point `i` draws from child stream `i`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytics::Component;
use crate::ansatz::{Circuit, ParamIndex, ParamVector};
use crate::error::{Error, Result};
use crate::pauli::Observable;
use crate::sampler::{sample_weighted_parity, split_budget, term_plus_probabilities, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    FD,
    GD,
    PS,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FD" => Ok(Family::FD),
            "GD" => Ok(Family::GD),
            "PS" => Ok(Family::PS),
            other => Err(Error::Argument(format!("unknown estimator family {other:?}"))),
        }
    }
}

/// Coefficient sums must equal one to this tolerance.
pub const COEFFICIENT_SUM_TOL: f64 = 1e-12;

/// Full description of one estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub family: Family,
    pub component: Component,
    /// GD order `J`; 1 for FD and PS.
    #[serde(rename = "J", default = "one")]
    pub order: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

impl EstimatorSpec {
    pub fn ps(component: Component) -> Self {
        Self {
            family: Family::PS,
            component,
            order: 1,
            epsilon: None,
            coefficients: None,
        }
    }

    pub fn fd(component: Component, epsilon: f64) -> Self {
        Self {
            family: Family::FD,
            component,
            order: 1,
            epsilon: Some(epsilon),
            coefficients: None,
        }
    }

    pub fn gd(component: Component, epsilon: f64, coefficients: Vec<f64>) -> Self {
        Self {
            family: Family::GD,
            component,
            order: coefficients.len(),
            epsilon: Some(epsilon),
            coefficients: Some(coefficients),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::PS => {
                if self.epsilon.is_some() || self.coefficients.is_some() {
                    return Err(Error::Estimator("PS takes neither a step nor coefficients".into()));
                }
                if self.order != 1 {
                    return Err(Error::Estimator("PS has no order".into()));
                }
                Ok(())
            }
            Family::FD | Family::GD => {
                let eps = self
                    .epsilon
                    .ok_or_else(|| Error::Estimator("missing epsilon".into()))?;
                if !(eps > 0.0 && eps < TAU) {
                    return Err(Error::Estimator(format!("epsilon {eps} outside (0, 2pi)")));
                }
                if self.order == 0 {
                    return Err(Error::Estimator("J must be >= 1".into()));
                }
                if self.family == Family::FD && self.order != 1 {
                    return Err(Error::Estimator("FD has order 1; use GD".into()));
                }
                if let Some(c) = &self.coefficients {
                    if c.len() != self.order {
                        return Err(Error::Estimator(format!(
                            "{} coefficients for J = {}",
                            c.len(),
                            self.order
                        )));
                    }
                    let s: f64 = c.iter().sum();
                    if !c.iter().all(|v| v.is_finite()) || (s - 1.0).abs() > COEFFICIENT_SUM_TOL {
                        return Err(Error::CoefficientSum(s));
                    }
                } else if self.family == Family::GD && self.order > 1 {
                    return Err(Error::Estimator("GD needs coefficients".into()));
                }
                Ok(())
            }
        }
    }

    pub fn coefficient_vector(&self) -> Vec<f64> {
        self.coefficients.clone().unwrap_or_else(|| vec![1.0])
    }

    /// Number of distinct function evaluations.
    pub fn num_evals(&self) -> usize {
        let j = self.order;
        match (self.family, self.component) {
            (Family::PS, Component::Gradient) => 2,
            (Family::PS, Component::DiagHessian) => 3,
            (Family::PS, Component::OffdiagHessian) => 4,
            (_, Component::Gradient) => 2 * j,
            (_, Component::DiagHessian) => 2 * j + 1,
            (_, Component::OffdiagHessian) => 4 * j,
        }
    }

    /// Short label such as `PS`, `FD` or `GD3`.
    pub fn label(&self) -> String {
        match self.family {
            Family::PS => "PS".into(),
            Family::FD => "FD".into(),
            Family::GD => format!("GD{}", self.order),
        }
    }
}

/// Exact evaluation or a total copy budget per basis observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Budget {
    Exact,
    Shots(u64),
}

/// Which entry of the gradient or Hessian is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRequest {
    pub first: ParamIndex,
    #[serde(default)]
    pub second: Option<ParamIndex>,
}

impl ComponentRequest {
    pub fn gradient(idx: ParamIndex) -> Self {
        Self { first: idx, second: None }
    }

    pub fn diag(idx: ParamIndex) -> Self {
        Self {
            first: idx,
            second: Some(idx),
        }
    }

    pub fn offdiag(a: ParamIndex, b: ParamIndex) -> Self {
        Self { first: a, second: Some(b) }
    }

    /// Flat indices of the differentiated slots, checked against `component`.
    pub fn resolve(&self, component: Component, theta: &ParamVector) -> Result<(usize, Option<usize>)> {
        let a = theta.flat_index(self.first)?;
        let b = self.second.map(|s| theta.flat_index(s)).transpose()?;
        match (component, b) {
            (Component::Gradient, None) => Ok((a, None)),
            (Component::Gradient, Some(_)) => Err(Error::Request("gradient takes one index".into())),
            (Component::DiagHessian, None) => Ok((a, Some(a))),
            (Component::DiagHessian, Some(b)) if b == a => Ok((a, Some(a))),
            (Component::DiagHessian, Some(_)) => {
                Err(Error::Request("diagonal Hessian needs equal indices".into()))
            }
            (Component::OffdiagHessian, Some(b)) if b != a => Ok((a, Some(b))),
            (Component::OffdiagHessian, _) => {
                Err(Error::Request("off-diagonal Hessian needs two distinct indices".into()))
            }
        }
    }
}

/// Source of exact and sampled values of the circuit function.
pub trait FunctionOracle {
    /// Parameters at which derivatives are taken.
    fn params(&self) -> &ParamVector;
    fn exact(&self, theta: &ParamVector) -> Result<f64>;
    /// Estimate with `copies` measurements of every basis term.
    fn sampled(&self, theta: &ParamVector, copies: u64, rng: &mut dyn rand::RngCore) -> Result<f64>;
}

/// Oracle backed by the statevector simulator. Counts sampled copies per basis term.
#[derive(Debug)]
pub struct CircuitOracle<'a> {
    circuit: &'a Circuit,
    theta: ParamVector,
    x: Vec<f64>,
    obs: &'a Observable,
    weights: Vec<f64>,
    copies: AtomicU64,
}

impl<'a> CircuitOracle<'a> {
    pub fn new(circuit: &'a Circuit, theta: ParamVector, x: Vec<f64>, obs: &'a Observable) -> Result<Self> {
        if obs.num_qubits() != circuit.num_qubits() {
            return Err(Error::LengthMismatch {
                expected: circuit.num_qubits(),
                actual: obs.num_qubits(),
            });
        }
        if theta.len() != circuit.num_params() {
            return Err(Error::LengthMismatch {
                expected: circuit.num_params(),
                actual: theta.len(),
            });
        }
        if x.len() < circuit.num_features() {
            return Err(Error::LengthMismatch {
                expected: circuit.num_features(),
                actual: x.len(),
            });
        }
        Ok(Self {
            circuit,
            theta,
            x,
            weights: obs.normalized_weights(),
            obs,
            copies: AtomicU64::new(0),
        })
    }

    /// Copies per basis term consumed by sampled evaluations so far.
    pub fn copies_used(&self) -> u64 {
        self.copies.load(Ordering::Relaxed)
    }

    pub fn reset_copies(&self) {
        self.copies.store(0, Ordering::Relaxed);
    }

    /// `+1` probabilities of every basis term at `theta`.
    pub fn term_probabilities(&self, theta: &ParamVector) -> Result<Vec<f64>> {
        term_plus_probabilities(self.circuit, theta, &self.x, self.obs)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl FunctionOracle for CircuitOracle<'_> {
    fn params(&self) -> &ParamVector {
        &self.theta
    }

    fn exact(&self, theta: &ParamVector) -> Result<f64> {
        self.circuit.evaluate_observable(theta, &self.x, self.obs)
    }

    fn sampled(&self, theta: &ParamVector, copies: u64, rng: &mut dyn rand::RngCore) -> Result<f64> {
        if copies == 0 {
            return Err(Error::Budget { total: 0, evals: 1 });
        }
        let probs = self.term_probabilities(theta)?;
        self.copies.fetch_add(copies, Ordering::Relaxed);
        Ok(sample_weighted_parity(&probs, &self.weights, copies, rng))
    }
}

/// One evaluation point: weight and flat-index shifts.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilPoint {
    pub weight: f64,
    pub shifts: Vec<(usize, f64)>,
}

/// Weighted sum of shifted function evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub points: Vec<StencilPoint>,
}

impl Stencil {
    pub fn for_spec(spec: &EstimatorSpec, req: &ComponentRequest, theta: &ParamVector) -> Result<Self> {
        spec.validate()?;
        let (a, b) = req.resolve(spec.component, theta)?;
        let pt = |weight: f64, shifts: Vec<(usize, f64)>| StencilPoint { weight, shifts };
        let mut points = Vec::new();
        match spec.family {
            Family::PS => match spec.component {
                Component::Gradient => {
                    points.push(pt(0.5, vec![(a, FRAC_PI_2)]));
                    points.push(pt(-0.5, vec![(a, -FRAC_PI_2)]));
                }
                Component::DiagHessian => {
                    points.push(pt(0.25, vec![(a, PI)]));
                    points.push(pt(-0.5, vec![]));
                    points.push(pt(0.25, vec![(a, -PI)]));
                }
                Component::OffdiagHessian => {
                    let b = b.expect("resolved off-diagonal index");
                    for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                        points.push(pt(0.25 * sa * sb, vec![(a, sa * FRAC_PI_2), (b, sb * FRAC_PI_2)]));
                    }
                }
            },
            Family::FD | Family::GD => {
                let eps = spec.epsilon.expect("validated step");
                let c = spec.coefficient_vector();
                match spec.component {
                    Component::Gradient => {
                        for (j, cj) in c.iter().enumerate() {
                            let h = (j + 1) as f64 * eps;
                            points.push(pt(cj / h, vec![(a, h / 2.0)]));
                            points.push(pt(-cj / h, vec![(a, -h / 2.0)]));
                        }
                    }
                    Component::DiagHessian => {
                        let mut center = 0.0;
                        for (j, cj) in c.iter().enumerate() {
                            let h = (j + 1) as f64 * eps;
                            center -= 2.0 * cj / (h * h);
                        }
                        points.push(pt(center, vec![]));
                        for (j, cj) in c.iter().enumerate() {
                            let h = (j + 1) as f64 * eps;
                            points.push(pt(cj / (h * h), vec![(a, h)]));
                            points.push(pt(cj / (h * h), vec![(a, -h)]));
                        }
                    }
                    Component::OffdiagHessian => {
                        let b = b.expect("resolved off-diagonal index");
                        for (j, cj) in c.iter().enumerate() {
                            let h = (j + 1) as f64 * eps;
                            for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                                points.push(pt(
                                    sa * sb * cj / (h * h),
                                    vec![(a, sa * h / 2.0), (b, sb * h / 2.0)],
                                ));
                            }
                        }
                    }
                }
            }
        }
        debug_assert_eq!(points.len(), spec.num_evals());
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shifted parameter vectors, one per point.
    pub fn shifted_params(&self, theta: &ParamVector) -> Vec<ParamVector> {
        self.points.iter().map(|p| theta.shifted_flat(&p.shifts)).collect()
    }

    pub fn evaluate(&self, oracle: &dyn FunctionOracle, budget: Budget, rng: &RngStream) -> Result<f64> {
        let theta = oracle.params();
        match budget {
            Budget::Exact => {
                let mut acc = 0.0;
                for p in &self.points {
                    acc += p.weight * oracle.exact(&theta.shifted_flat(&p.shifts))?;
                }
                Ok(acc)
            }
            Budget::Shots(total) => {
                let split = split_budget(total, self.points.len())?;
                let mut acc = 0.0;
                for (i, p) in self.points.iter().enumerate() {
                    let mut r = rng.child(i as u64).rng();
                    acc += p.weight * oracle.sampled(&theta.shifted_flat(&p.shifts), split.per_eval, &mut r)?;
                }
                Ok(acc)
            }
        }
    }

    /// Sampled value from precomputed `+1` probabilities (`probs[point][term]`).
    ///
    /// Uses the same streams and draw order as [`Stencil::evaluate`] with a [`CircuitOracle`].
    pub fn sample_from_probabilities(
        &self,
        probs: &[Vec<f64>],
        weights: &[f64],
        total: u64,
        rng: &RngStream,
    ) -> Result<f64> {
        if probs.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                actual: probs.len(),
            });
        }
        let split = split_budget(total, self.points.len())?;
        let mut acc = 0.0;
        for (i, (p, pr)) in self.points.iter().zip(probs).enumerate() {
            let mut r = rng.child(i as u64).rng();
            acc += p.weight * sample_weighted_parity(pr, weights, split.per_eval, &mut r);
        }
        Ok(acc)
    }
}

/// Generic entry point.
pub fn estimate(
    spec: &EstimatorSpec,
    oracle: &dyn FunctionOracle,
    req: &ComponentRequest,
    budget: Budget,
    rng: &RngStream,
) -> Result<f64> {
    Stencil::for_spec(spec, req, oracle.params())?.evaluate(oracle, budget, rng)
}

pub fn ps_gradient(oracle: &dyn FunctionOracle, req: &ComponentRequest, budget: Budget, rng: &RngStream) -> Result<f64> {
    estimate(&EstimatorSpec::ps(Component::Gradient), oracle, req, budget, rng)
}

/// Diagonal when the request's indices coincide (or the second is absent), off-diagonal otherwise.
pub fn ps_hessian(oracle: &dyn FunctionOracle, req: &ComponentRequest, budget: Budget, rng: &RngStream) -> Result<f64> {
    estimate(&EstimatorSpec::ps(hessian_kind(req)), oracle, req, budget, rng)
}

pub fn fd_gradient(
    oracle: &dyn FunctionOracle,
    req: &ComponentRequest,
    eps: f64,
    budget: Budget,
    rng: &RngStream,
) -> Result<f64> {
    gd_gradient(oracle, req, eps, &[1.0], budget, rng)
}

pub fn fd_hessian(
    oracle: &dyn FunctionOracle,
    req: &ComponentRequest,
    eps: f64,
    budget: Budget,
    rng: &RngStream,
) -> Result<f64> {
    gd_hessian(oracle, req, eps, &[1.0], budget, rng)
}

/// Order is `c.len()`.
pub fn gd_gradient(
    oracle: &dyn FunctionOracle,
    req: &ComponentRequest,
    eps: f64,
    c: &[f64],
    budget: Budget,
    rng: &RngStream,
) -> Result<f64> {
    estimate(&gd_spec(Component::Gradient, eps, c), oracle, req, budget, rng)
}

pub fn gd_hessian(
    oracle: &dyn FunctionOracle,
    req: &ComponentRequest,
    eps: f64,
    c: &[f64],
    budget: Budget,
    rng: &RngStream,
) -> Result<f64> {
    estimate(&gd_spec(hessian_kind(req), eps, c), oracle, req, budget, rng)
}

fn gd_spec(component: Component, eps: f64, c: &[f64]) -> EstimatorSpec {
    let mut spec = EstimatorSpec::gd(component, eps, c.to_vec());
    if c.len() == 1 {
        spec.family = Family::FD;
    }
    spec
}

fn hessian_kind(req: &ComponentRequest) -> Component {
    match req.second {
        Some(b) if b != req.first => Component::OffdiagHessian,
        _ => Component::DiagHessian,
    }
}

/// Attenuation of exact FD/GD relative to the true derivative.
pub fn sinc_factor(component: Component, eps: f64, c: &[f64]) -> f64 {
    use crate::analytics::sinc;
    c.iter()
        .enumerate()
        .map(|(j, cj)| {
            let s = sinc((j + 1) as f64 * eps / 2.0);
            match component {
                Component::Gradient => cj * s,
                _ => cj * s * s,
            }
        })
        .sum()
}

/// Random coefficient vector summing to one, for tests and sweeps.
pub fn random_coefficients<R: Rng + ?Sized>(j: usize, rng: &mut R) -> Vec<f64> {
    let mut c: Vec<f64> = (0..j).map(|_| rng.random_range(-2.0..2.0)).collect();
    let s: f64 = c.iter().sum();
    let shift = (1.0 - s) / j as f64;
    c.iter_mut().for_each(|v| *v += shift);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{GateTemplate, Module};
    use crate::pauli::{parse_pauli, Pauli};

    fn cos_oracle_parts() -> (Circuit, Observable) {
        let c = Circuit::from_modules(
            1,
            vec![Module::Trainable(vec![GateTemplate::Param { qubit: 0, axis: Pauli::Y, slot: 0 }])],
        )
        .unwrap();
        (c, Observable::single(parse_pauli("Z").unwrap()).unwrap())
    }

    const IDX: ParamIndex = ParamIndex { mu: 1, l: 1 };

    fn exact<F>(theta: f64, f: F) -> f64
    where
        F: Fn(&CircuitOracle) -> Result<f64>,
    {
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![theta]).unwrap(), vec![], &obs).unwrap();
        f(&o).unwrap()
    }

    #[test]
    fn ps_single_qubit() {
        let rng = RngStream::new(0);
        let g = exact(PI / 3.0, |o| ps_gradient(o, &ComponentRequest::gradient(IDX), Budget::Exact, &rng));
        assert!((g + (PI / 3.0).sin()).abs() < 1e-12);
        let h = exact(PI / 3.0, |o| ps_hessian(o, &ComponentRequest::diag(IDX), Budget::Exact, &rng));
        assert!((h + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fd_single_qubit() {
        let rng = RngStream::new(0);
        let req = ComponentRequest::gradient(IDX);
        let g = exact(PI / 3.0, |o| fd_gradient(o, &req, 1.0, Budget::Exact, &rng));
        assert!((g - (-0.830_389_391_308_554)).abs() < 1e-12);
        let g = exact(PI / 3.0, |o| fd_gradient(o, &req, 1e-6, Budget::Exact, &rng));
        assert!((g / -(PI / 3.0).sin() - 1.0).abs() < 1e-9);
        let h = exact(0.0, |o| fd_hessian(o, &ComponentRequest::diag(IDX), 1.0, Budget::Exact, &rng));
        assert!((h - (-0.919_395_388_263_721)).abs() < 1e-12);
        let h = exact(0.0, |o| fd_hessian(o, &ComponentRequest::diag(IDX), 1e-4, Budget::Exact, &rng));
        assert!((h + 1.0).abs() < 1e-7);
    }

    #[test]
    fn gd_single_qubit() {
        let rng = RngStream::new(0);
        let req = ComponentRequest::gradient(IDX);
        let g = exact(PI / 3.0, |o| gd_gradient(o, &req, 0.5, &[2.0, -1.0], Budget::Exact, &rng));
        assert!((g - (-0.883_675_518_381_582)).abs() < 1e-12);
        let h = exact(0.0, |o| gd_hessian(o, &ComponentRequest::diag(IDX), 0.5, &[0.5, 0.5], Budget::Exact, &rng));
        assert!((h - (-0.949_367_446_570_369)).abs() < 1e-12);
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![0.0]).unwrap(), vec![], &obs).unwrap();
        assert!(gd_gradient(&o, &req, 0.5, &[0.5, 0.6], Budget::Exact, &rng).is_err());
    }

    #[test]
    fn fd_is_gd_with_unit_coefficient() {
        let rng = RngStream::new(3);
        let req = ComponentRequest::gradient(IDX);
        for budget in [Budget::Exact, Budget::Shots(100)] {
            let a = exact(0.4, |o| fd_gradient(o, &req, 0.7, budget, &rng));
            let b = exact(0.4, |o| estimate(&EstimatorSpec::gd(Component::Gradient, 0.7, vec![1.0]), o, &req, budget, &rng));
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn evaluation_counts() {
        let spec = EstimatorSpec::gd(Component::DiagHessian, 0.3, vec![0.5, 0.25, 0.25]);
        assert_eq!(spec.num_evals(), 7);
        assert_eq!(EstimatorSpec::gd(Component::OffdiagHessian, 0.3, vec![0.5, 0.5]).num_evals(), 8);
        assert_eq!(EstimatorSpec::ps(Component::DiagHessian).num_evals(), 3);
    }

    #[test]
    fn estimator_validation() {
        assert!(EstimatorSpec::fd(Component::Gradient, 0.0).validate().is_err());
        assert!(EstimatorSpec::fd(Component::Gradient, TAU).validate().is_err());
        assert!(matches!(
            EstimatorSpec::gd(Component::Gradient, 0.1, vec![1.0, 0.1]).validate(),
            Err(Error::CoefficientSum(_))
        ));
        let mut ps = EstimatorSpec::ps(Component::Gradient);
        ps.epsilon = Some(0.1);
        assert!(ps.validate().is_err());
    }

    #[test]
    fn budget_below_point_count() {
        let rng = RngStream::new(1);
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![0.2]).unwrap(), vec![], &obs).unwrap();
        assert!(ps_gradient(&o, &ComponentRequest::gradient(IDX), Budget::Shots(1), &rng).is_err());
        assert!(fd_hessian(&o, &ComponentRequest::diag(IDX), 0.1, Budget::Shots(2), &rng).is_err());
        assert!(ps_hessian(&o, &ComponentRequest::diag(IDX), Budget::Shots(3), &rng).is_ok());
    }

    #[test]
    fn copies_are_audited() {
        let rng = RngStream::new(1);
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![0.2]).unwrap(), vec![], &obs).unwrap();
        fd_hessian(&o, &ComponentRequest::diag(IDX), 0.1, Budget::Shots(2000), &rng).unwrap();
        assert_eq!(o.copies_used(), 3 * 666);
    }

    #[test]
    fn bad_requests() {
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![0.2]).unwrap(), vec![], &obs).unwrap();
        let rng = RngStream::new(0);
        let off = ComponentRequest::offdiag(IDX, IDX);
        assert!(estimate(&EstimatorSpec::ps(Component::OffdiagHessian), &o, &off, Budget::Exact, &rng).is_err());
        let out = ComponentRequest::gradient(ParamIndex::new(2, 1));
        assert!(ps_gradient(&o, &out, Budget::Exact, &rng).is_err());
    }

    #[test]
    fn sampled_fd_is_unbiased() {
        let (c, obs) = cos_oracle_parts();
        let o = CircuitOracle::new(&c, c.params(vec![0.9]).unwrap(), vec![], &obs).unwrap();
        let req = ComponentRequest::gradient(IDX);
        let eps = 0.8;
        let target = -(0.9f64).sin() * sinc_factor(Component::Gradient, eps, &[1.0]);
        let root = RngStream::new(11);
        let reps = 100_000;
        let spec = EstimatorSpec::fd(Component::Gradient, eps);
        let stencil = Stencil::for_spec(&spec, &req, o.params()).unwrap();
        let probs: Vec<Vec<f64>> = stencil
            .shifted_params(o.params())
            .iter()
            .map(|t| o.term_probabilities(t).unwrap())
            .collect();
        let vals: Vec<f64> = (0..reps)
            .map(|i| stencil.sample_from_probabilities(&probs, o.weights(), 100, &root.child(i)).unwrap())
            .collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        assert!((mean - target).abs() < 3.0 * (var / reps as f64).sqrt());
        // fast path matches the oracle path draw for draw
        let direct = stencil.evaluate(&o, Budget::Shots(100), &root.child(5)).unwrap();
        assert_eq!(direct.to_bits(), vals[5].to_bits());
    }
}
