//! Dense statevector simulation.
//!
//! Qubit indices are 0-based; qubit 0 is the most significant bit of a basis index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{basis_change_gates, eigenvalue_of_index, Pauli, PauliString};

/// Largest supported register (2^20 amplitudes, 16 MiB).
pub const MAX_QUBITS: usize = 20;

/// Gate set of the simulator. Rotations use the half-angle convention `exp(-i phi P / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    Rz(usize, f64),
    Ry(usize, f64),
    RPauli { qubit: usize, axis: Pauli, angle: f64 },
    Hadamard(usize),
    /// S dagger, `diag(1, -i)`.
    InvPhase(usize),
    Cnot { control: usize, target: usize },
}

impl Gate {
    /// Checks qubit indices against a register of `n` qubits.
    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(Error::QubitIndex { index: q, n })
            }
        };
        match *self {
            Gate::Rz(q, _)
            | Gate::Ry(q, _)
            | Gate::RPauli { qubit: q, .. }
            | Gate::Hadamard(q)
            | Gate::InvPhase(q) => check(q),
            Gate::Cnot { control, target } => {
                check(control)?;
                check(target)?;
                if control == target {
                    return Err(Error::CnotSameQubit(control));
                }
                Ok(())
            }
        }
    }
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rotation_matrix(axis: Pauli, angle: f64) -> Option<Mat2> {
    let (s, co) = (angle / 2.0).sin_cos();
    match axis {
        Pauli::I => None,
        Pauli::X => Some([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]),
        Pauli::Y => Some([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]),
        Pauli::Z => Some([[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]),
    }
}

/// Pure state of `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits, `1 <= n <= MAX_QUBITS`.
    pub fn init_zero(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// Builds a state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Dimensions(format!("{len} amplitudes")));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::QubitCount(n));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn bit(&self, q: usize) -> usize {
        1 << (self.n - 1 - q)
    }

    fn apply_single(&mut self, q: usize, m: &Mat2) {
        let bit = self.bit(q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_diag(&mut self, q: usize, d0: Complex64, d1: Complex64) {
        let bit = self.bit(q);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & bit == 0 { d0 } else { d1 };
        }
    }

    /// Applies `g` in place.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.validate(self.n)?;
        match *g {
            Gate::Rz(q, phi) => {
                let (s, co) = (phi / 2.0).sin_cos();
                self.apply_diag(q, c(co, -s), c(co, s));
            }
            Gate::Ry(q, phi) => {
                let m = rotation_matrix(Pauli::Y, phi).unwrap();
                self.apply_single(q, &m);
            }
            Gate::RPauli { qubit, axis, angle } => match axis {
                Pauli::Z => self.apply_gate(&Gate::Rz(qubit, angle))?,
                _ => {
                    if let Some(m) = rotation_matrix(axis, angle) {
                        self.apply_single(qubit, &m);
                    } else {
                        // exp(-i phi I / 2) is a global phase
                        let (s, co) = (angle / 2.0).sin_cos();
                        let ph = c(co, -s);
                        self.amps.iter_mut().for_each(|a| *a *= ph);
                    }
                }
            },
            Gate::Hadamard(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let m = [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]];
                self.apply_single(q, &m);
            }
            Gate::InvPhase(q) => self.apply_diag(q, c(1.0, 0.0), c(0.0, -1.0)),
            Gate::Cnot { control, target } => {
                let cb = self.bit(control);
                let tb = self.bit(target);
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies a gate sequence in order.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    fn check_len(&self, p: &PauliString) -> Result<()> {
        if p.num_qubits() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: p.num_qubits(),
            });
        }
        Ok(())
    }

    /// Exact `<s|p|s>`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        self.check_len(p)?;
        let (flip, sign, ys) = p.masks();
        // <s|P|s> = sum_i conj(a_{i^flip}) * i^ys * (-1)^{|i & sign|} a_i
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            let term = self.amps[i ^ flip].conj() * a;
            if (i & sign).count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let phase = Complex64::i().powu(ys);
        Ok((phase * acc).re)
    }

    /// Probabilities of the `+1` and `-1` eigenspaces of `p`.
    pub fn outcome_probabilities(&self, p: &PauliString) -> Result<(f64, f64)> {
        self.check_len(p)?;
        let mut rotated = self.clone();
        rotated.apply_all(&basis_change_gates(p))?;
        let z_mask = p.support().fold(0usize, |m, q| m | rotated.bit(q));
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (i, a) in rotated.amps.iter().enumerate() {
            if eigenvalue_of_index(z_mask, i) > 0.0 {
                plus += a.norm_sqr();
            } else {
                minus += a.norm_sqr();
            }
        }
        Ok((plus, minus))
    }
}
