use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;
use crate::pauli::Observable;

/// Reads a Hamiltonian file (`<coefficient> <letters>` per line, `#` comments).
pub fn load_hamiltonian(path: &Path) -> Result<Observable> {
    let text = std::fs::read_to_string(path)?;
    Observable::parse_terms(&text)
}

/// Ascending eigenvalues of the unnormalized sum `sum_k h_k O_k`.
///
/// Real-symmetric matrices are diagonalized directly; complex Hermitian ones through the
/// equivalent real symmetric matrix `[[Re, -Im], [Im, Re]]`, whose spectrum doubles each
/// eigenvalue.
pub fn eigenvalues(obs: &Observable) -> Vec<f64> {
    let h = obs.to_dense_unnormalized();
    let dim = h.nrows();
    let is_real = h.iter().all(|z| z.im == 0.0);
    let mut vals: Vec<f64> = if is_real {
        let re = DMatrix::from_fn(dim, dim, |r, c| h[(r, c)].re);
        SymmetricEigen::new(re).eigenvalues.iter().copied().collect()
    } else {
        let big = DMatrix::from_fn(2 * dim, 2 * dim, |r, c| {
            let z = h[(r % dim, c % dim)];
            match (r < dim, c < dim) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut all: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
        all.sort_by(f64::total_cmp);
        all.into_iter().step_by(2).collect()
    };
    vals.sort_by(f64::total_cmp);
    vals
}

pub fn min_eigenvalue(obs: &Observable) -> f64 {
    eigenvalues(obs)[0]
}
