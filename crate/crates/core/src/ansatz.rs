//! Layered parametrized circuits and the hardware-efficient ansatz.
//!
//! A circuit is a list of modules applied in order `W_1, V_1, W_2, V_2, ...`, i.e. the
//! unitary is `V_L W_L ... V_1 W_1`. Every trainable angle drives exactly one Pauli rotation.

use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::statevector::{Gate, StateVector, MAX_QUBITS};

use std::f64::consts::TAU;

/// Two-qubit entangler layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// `0->1, 1->2, ..., n-2->n-1`
    #[default]
    Chain,
    /// Chain plus `n-1->0`.
    Ring,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::Argument(format!("unknown topology {other:?}"))),
        }
    }
}

/// Feature-map block inserted after every trainable module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EncodingSpec {
    /// `RY(x_q)` on every qubit followed by a CNOT ladder.
    RyLadder,
}

/// JSON description of a hardware-efficient circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub layers: usize,
    pub reps: usize,
    #[serde(default)]
    pub topology: Topology,
    #[serde(default)]
    pub encoding: Option<EncodingSpec>,
}

impl CircuitSpec {
    pub fn build(&self) -> Result<Circuit> {
        build_hardware_efficient(self.n, self.layers, self.reps, self.topology, self.encoding)
    }
}

/// One gate of a module before parameters and features are bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateTemplate {
    Fixed(Gate),
    /// Rotation whose angle is trainable slot `slot` (0-based) of its module.
    Param { qubit: usize, axis: Pauli, slot: usize },
    /// Rotation by feature `x[feature]`.
    Feature { qubit: usize, axis: Pauli, feature: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Module {
    Trainable(Vec<GateTemplate>),
    Encoding(Vec<GateTemplate>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Fixed(Gate),
    Param { qubit: usize, axis: Pauli, slot: usize },
    Feature { qubit: usize, axis: Pauli, feature: usize },
}

/// Location of a trainable angle: `l` is the 1-based trainable-module index,
/// `mu` the 1-based slot inside that module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamIndex {
    pub mu: usize,
    pub l: usize,
}

impl ParamIndex {
    pub fn new(mu: usize, l: usize) -> Self {
        Self { mu, l }
    }
}

/// Trainable angles in flat order, together with the per-module slot counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    layout: Arc<[usize]>,
}

impl ParamVector {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Slot counts of the trainable modules, in order.
    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn flat_index(&self, idx: ParamIndex) -> Result<usize> {
        flat_index(&self.layout, idx)
    }

    pub fn get(&self, idx: ParamIndex) -> Result<f64> {
        Ok(self.values[self.flat_index(idx)?])
    }

    /// Copy with the given angle replaced.
    pub fn with_value(&self, idx: ParamIndex, value: f64) -> Result<Self> {
        let k = self.flat_index(idx)?;
        let mut out = self.clone();
        out.values[k] = value;
        Ok(out)
    }

    /// Copy with flat slots incremented; unchecked beyond slice bounds.
    pub(crate) fn shifted_flat(&self, shifts: &[(usize, f64)]) -> Self {
        let mut out = self.clone();
        for &(k, d) in shifts {
            out.values[k] += d;
        }
        out
    }
}

fn flat_index(layout: &[usize], idx: ParamIndex) -> Result<usize> {
    let bad = Error::ParamIndex {
        module: idx.l,
        slot: idx.mu,
    };
    if idx.l == 0 || idx.l > layout.len() || idx.mu == 0 || idx.mu > layout[idx.l - 1] {
        return Err(bad);
    }
    Ok(layout[..idx.l - 1].iter().sum::<usize>() + idx.mu - 1)
}

/// Copy of `theta` with `theta[idx]` incremented by `delta`.
pub fn shifted(theta: &ParamVector, idx: ParamIndex, delta: f64) -> Result<ParamVector> {
    let k = theta.flat_index(idx)?;
    Ok(theta.shifted_flat(&[(k, delta)]))
}

/// A bound-free circuit: gate list plus parameter table.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    ops: Vec<Op>,
    layout: Arc<[usize]>,
    num_features: usize,
    num_modules: usize,
}

impl Circuit {
    /// Assembles a circuit from modules applied in the given order.
    pub fn from_modules(n: usize, modules: Vec<Module>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let mut ops = Vec::new();
        let mut layout = Vec::new();
        let mut num_features = 0;
        let mut offset = 0;
        let num_modules = modules.len();
        for module in modules {
            let (trainable, gates) = match module {
                Module::Trainable(g) => (true, g),
                Module::Encoding(g) => (false, g),
            };
            let mut seen: Vec<bool> = Vec::new();
            for t in gates {
                let op = match t {
                    GateTemplate::Fixed(g) => {
                        g.validate(n)?;
                        Op::Fixed(g)
                    }
                    GateTemplate::Param { qubit, axis, slot } => {
                        if !trainable {
                            return Err(Error::Dimensions(
                                "trainable rotation inside an encoding module".into(),
                            ));
                        }
                        check_rotation(n, qubit, axis)?;
                        if seen.len() <= slot {
                            seen.resize(slot + 1, false);
                        }
                        if seen[slot] {
                            return Err(Error::Dimensions(format!("slot {slot} used twice")));
                        }
                        seen[slot] = true;
                        Op::Param {
                            qubit,
                            axis,
                            slot: offset + slot,
                        }
                    }
                    GateTemplate::Feature { qubit, axis, feature } => {
                        check_rotation(n, qubit, axis)?;
                        num_features = num_features.max(feature + 1);
                        Op::Feature { qubit, axis, feature }
                    }
                };
                ops.push(op);
            }
            if trainable {
                if let Some(gap) = seen.iter().position(|&used| !used) {
                    return Err(Error::Dimensions(format!("slot {gap} has no gate")));
                }
                layout.push(seen.len());
                offset += seen.len();
            }
        }
        Ok(Self {
            n,
            ops,
            layout: layout.into(),
            num_features,
            num_modules,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// `d = 2^n`.
    pub fn dim(&self) -> u64 {
        1u64 << self.n
    }

    pub fn num_params(&self) -> usize {
        self.layout.iter().sum()
    }

    /// Slot counts per trainable module.
    pub fn layout(&self) -> &[usize] {
        &self.layout
    }

    pub fn num_trainable_modules(&self) -> usize {
        self.layout.len()
    }

    pub fn num_modules(&self) -> usize {
        self.num_modules
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_gates(&self) -> usize {
        self.ops.len()
    }

    pub fn flat_index(&self, idx: ParamIndex) -> Result<usize> {
        flat_index(&self.layout, idx)
    }

    /// Wraps raw angles in flat order.
    pub fn params(&self, values: Vec<f64>) -> Result<ParamVector> {
        if values.len() != self.num_params() {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                actual: values.len(),
            });
        }
        Ok(ParamVector {
            values,
            layout: self.layout.clone(),
        })
    }

    /// Final state `U(theta; x)|0...0>`.
    pub fn state(&self, theta: &ParamVector, x: &[f64]) -> Result<StateVector> {
        if theta.len() != self.num_params() || *theta.layout != *self.layout {
            return Err(Error::LengthMismatch {
                expected: self.num_params(),
                actual: theta.len(),
            });
        }
        if x.len() < self.num_features {
            return Err(Error::LengthMismatch {
                expected: self.num_features,
                actual: x.len(),
            });
        }
        let mut s = StateVector::init_zero(self.n)?;
        for op in &self.ops {
            let g = match *op {
                Op::Fixed(g) => g,
                Op::Param { qubit, axis, slot } => rotation(qubit, axis, theta.values[slot]),
                Op::Feature { qubit, axis, feature } => rotation(qubit, axis, x[feature]),
            };
            s.apply_gate(&g)?;
        }
        Ok(s)
    }

    /// Exact `f_k = <0| U^dag O_k U |0>` for one basis term.
    pub fn evaluate_function(&self, theta: &ParamVector, x: &[f64], term: &PauliString) -> Result<f64> {
        self.state(theta, x)?.expectation(term)
    }

    /// Exact circuit function of a normalized observable.
    pub fn evaluate_observable(&self, theta: &ParamVector, x: &[f64], obs: &Observable) -> Result<f64> {
        let s = self.state(theta, x)?;
        let w = obs.normalized_weights();
        let mut acc = 0.0;
        for ((_, p), wk) in obs.terms().iter().zip(w) {
            acc += wk * s.expectation(p)?;
        }
        Ok(acc)
    }

    /// Independent uniform angles on `[0, 2pi)`.
    pub fn random_params(&self, seed: u64) -> ParamVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.random_params_with(&mut rng)
    }

    pub fn random_params_with<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector {
        let values = (0..self.num_params()).map(|_| rng.random_range(0.0..TAU)).collect();
        ParamVector {
            values,
            layout: self.layout.clone(),
        }
    }

    /// Features drawn uniformly from `[0, 2pi)`.
    pub fn random_features_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.num_features).map(|_| rng.random_range(0.0..TAU)).collect()
    }
}

/// Same as [`Circuit::random_params`].
pub fn random_params(c: &Circuit, seed: u64) -> ParamVector {
    c.random_params(seed)
}

/// Same as [`Circuit::evaluate_function`].
pub fn evaluate_function(c: &Circuit, theta: &ParamVector, x: &[f64], term: &PauliString) -> Result<f64> {
    c.evaluate_function(theta, x, term)
}

fn check_rotation(n: usize, qubit: usize, axis: Pauli) -> Result<()> {
    if axis == Pauli::I {
        return Err(Error::Dimensions("rotation about the identity".into()));
    }
    if qubit >= n {
        return Err(Error::QubitIndex { index: qubit, n });
    }
    Ok(())
}

fn rotation(qubit: usize, axis: Pauli, angle: f64) -> Gate {
    match axis {
        Pauli::Z => Gate::Rz(qubit, angle),
        Pauli::Y => Gate::Ry(qubit, angle),
        _ => Gate::RPauli { qubit, axis, angle },
    }
}

fn ladder(n: usize, topology: Topology) -> Vec<GateTemplate> {
    let mut out: Vec<GateTemplate> = (0..n - 1)
        .map(|q| GateTemplate::Fixed(Gate::Cnot { control: q, target: q + 1 }))
        .collect();
    if topology == Topology::Ring && n > 2 {
        out.push(GateTemplate::Fixed(Gate::Cnot { control: n - 1, target: 0 }));
    }
    out
}

/// Hardware-efficient ansatz with `layers` trainable modules of `reps` units each.
///
/// A unit is `RZ(a) RY(b) RZ(c)` on every qubit followed by a CNOT ladder; slot `3q + k`
/// of a unit holds the `k`-th angle of qubit `q` in operator order, so `c` acts first.
/// The structure is fully deterministic.
pub fn build_hardware_efficient(
    n: usize,
    layers: usize,
    reps: usize,
    topology: Topology,
    encoding: Option<EncodingSpec>,
) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::Dimensions(format!("n = {n}, need at least 2 qubits")));
    }
    if n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    if layers == 0 || reps == 0 {
        return Err(Error::Dimensions(format!("L = {layers}, reps = {reps}")));
    }
    let mut modules = Vec::new();
    for _ in 0..layers {
        let mut w = Vec::new();
        for u in 0..reps {
            for q in 0..n {
                let base = u * 3 * n + 3 * q;
                w.push(GateTemplate::Param { qubit: q, axis: Pauli::Z, slot: base + 2 });
                w.push(GateTemplate::Param { qubit: q, axis: Pauli::Y, slot: base + 1 });
                w.push(GateTemplate::Param { qubit: q, axis: Pauli::Z, slot: base });
            }
            w.extend(ladder(n, topology));
        }
        modules.push(Module::Trainable(w));
        if let Some(EncodingSpec::RyLadder) = encoding {
            let mut v: Vec<GateTemplate> = (0..n)
                .map(|q| GateTemplate::Feature { qubit: q, axis: Pauli::Y, feature: q })
                .collect();
            v.extend(ladder(n, topology));
            modules.push(Module::Encoding(v));
        }
    }
    Circuit::from_modules(n, modules)
}
