//! Multiqubit Pauli strings and normalized weighted observables.
//!
//! Qubit 0 is the leftmost letter of a Pauli text and the most significant bit of a
//! basis-state index, so `"ZI"` acts with Z on the first qubit.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::Gate;

/// Single-qubit Pauli axis, including the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    axes: Vec<Pauli>,
}

impl PauliString {
    pub fn new(axes: Vec<Pauli>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::EmptyPauli);
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.axes
    }

    pub fn num_qubits(&self) -> usize {
        self.axes.len()
    }

    pub fn is_identity(&self) -> bool {
        self.axes.iter().all(|&a| a == Pauli::I)
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.axes
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != Pauli::I)
            .map(|(q, _)| q)
    }

    /// Bit masks over basis-state indices: (flip mask for X/Y, sign mask for Y/Z, number of Ys).
    pub(crate) fn masks(&self) -> (usize, usize, u32) {
        let n = self.axes.len();
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut ys = 0u32;
        for (q, &a) in self.axes.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match a {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ys += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        (flip, sign, ys)
    }

    /// Dense 2^n x 2^n matrix of the string.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits();
        let mut out = DMatrix::zeros(dim, dim);
        self.add_scaled_to(&mut out, 1.0);
        out
    }

    fn add_scaled_to(&self, m: &mut DMatrix<Complex64>, scale: f64) {
        let (flip, sign, ys) = self.masks();
        let phase = Complex64::i().powu(ys);
        for col in 0..m.ncols() {
            let row = col ^ flip;
            let parity = (col & sign).count_ones() % 2;
            let s = if parity == 0 { scale } else { -scale };
            m[(row, col)] += phase * s;
        }
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        parse_pauli(text)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.axes {
            write!(f, "{}", a.as_char())?;
        }
        Ok(())
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_pauli(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses a string over `{I, X, Y, Z}`. Error positions are 1-based.
pub fn parse_pauli(text: &str) -> Result<PauliString> {
    let axes = text
        .chars()
        .enumerate()
        .map(|(i, c)| {
            Pauli::from_char(c).ok_or(Error::PauliParse {
                position: i + 1,
                letter: c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PauliString::new(axes)
}

/// Eigenvalue of a Z-type string on a computational basis state.
///
/// `bits[q]` is the outcome of qubit `q`. Every non-identity axis is read as Z, which
/// is correct once the state has been rotated by [`basis_change_gates`].
pub fn eigenvalue_of_bitstring(p: &PauliString, bits: &[bool]) -> Result<i8> {
    if bits.len() != p.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: p.num_qubits(),
            actual: bits.len(),
        });
    }
    let ones = p.support().filter(|&q| bits[q]).count();
    Ok(if ones % 2 == 0 { 1 } else { -1 })
}

/// Same as [`eigenvalue_of_bitstring`] for a basis-state index (qubit 0 is the MSB).
pub(crate) fn eigenvalue_of_index(z_mask: usize, index: usize) -> f64 {
    if (index & z_mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Gates rotating each non-identity factor of `p` onto Z.
pub fn basis_change_gates(p: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    for (q, &a) in p.axes().iter().enumerate() {
        match a {
            Pauli::X => gates.push(Gate::Hadamard(q)),
            Pauli::Y => {
                gates.push(Gate::InvPhase(q));
                gates.push(Gate::Hadamard(q));
            }
            Pauli::I | Pauli::Z => {}
        }
    }
    gates
}

/// Weighted MSE of a multi-term observable from independent, unbiased per-term estimates.
pub fn combine_component_mses(h: &[f64], per_term_mse: &[f64]) -> Result<f64> {
    if h.is_empty() {
        return Err(Error::Observable("no terms".into()));
    }
    if h.len() != per_term_mse.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: per_term_mse.len(),
        });
    }
    let norm2: f64 = h.iter().map(|x| x * x).sum();
    if norm2 <= 0.0 {
        return Err(Error::Observable("zero coefficient norm".into()));
    }
    let weighted: f64 = h.iter().zip(per_term_mse).map(|(x, m)| x * x * m).sum();
    Ok(weighted / norm2)
}

/// A traceless observable `sum_k h_k O_k / ||h||`. Coefficients are stored unnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    terms: Vec<(f64, PauliString)>,
    norm: f64,
}

impl Observable {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Observable("no terms".into()));
        };
        let n = first.num_qubits();
        let mut seen = HashSet::new();
        for (_, p) in &terms {
            if p.num_qubits() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: p.num_qubits(),
                });
            }
            if p.is_identity() {
                return Err(Error::Observable(format!("identity term {p} is not traceless")));
            }
            if !seen.insert(p.clone()) {
                return Err(Error::Observable(format!("duplicate term {p}")));
            }
        }
        let norm = terms.iter().map(|(h, _)| h * h).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Observable(format!("coefficient norm {norm} is not positive")));
        }
        Ok(Self { terms, norm })
    }

    /// Single Pauli string with unit weight.
    pub fn single(p: PauliString) -> Result<Self> {
        Self::new(vec![(1.0, p)])
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|(h, _)| *h).collect()
    }

    /// `h_k / ||h||` for every term.
    pub fn normalized_weights(&self) -> Vec<f64> {
        self.terms.iter().map(|(h, _)| h / self.norm).collect()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn num_qubits(&self) -> usize {
        self.terms[0].1.num_qubits()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Dense matrix of the unnormalized sum `sum_k h_k O_k`.
    pub fn to_dense_unnormalized(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.num_qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for (h, p) in &self.terms {
            p.add_scaled_to(&mut m, *h);
        }
        m
    }

    /// Parses the line format `<coefficient> <letters>`; `#` lines and blank lines are skipped.
    pub fn parse_terms(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| Error::Hamiltonian {
                line: line_no,
                message,
            };
            let (coef, letters) = line
                .split_once(' ')
                .ok_or_else(|| bad("expected `<coefficient> <pauli>`".into()))?;
            let h: f64 = coef
                .parse()
                .map_err(|_| bad(format!("bad coefficient {coef:?}")))?;
            let p = parse_pauli(letters).map_err(|e| bad(e.to_string()))?;
            if !seen.insert(p.clone()) {
                return Err(bad(format!("duplicate term {p}")));
            }
            terms.push((h, p));
        }
        Observable::new(terms).map_err(|e| match e {
            Error::LengthMismatch { .. } | Error::Observable(_) => Error::Hamiltonian {
                line: 0,
                message: e.to_string(),
            },
            other => other,
        })
    }
}
