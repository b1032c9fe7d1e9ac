//! Finite-copy sampling of Pauli measurements.
//!
//! Every basis term has eigenvalues `+1` and `-1` only, so each evaluation draws a single
//! binomial count per term instead of a full `d`-outcome multinomial.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::ansatz::{Circuit, ParamVector};
use crate::error::{Error, Result};
use crate::pauli::Observable;

/// Equal split of `total` copies over `num_evals` evaluations. Leftover copies are discarded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotBudget {
    pub total: u64,
    pub num_evals: usize,
    pub per_eval: u64,
}

impl ShotBudget {
    /// Copies actually consumed, `num_evals * floor(total / num_evals)`.
    pub fn used(&self) -> u64 {
        self.per_eval * self.num_evals as u64
    }
}

pub fn split_budget(total: u64, num_evals: usize) -> Result<ShotBudget> {
    if num_evals == 0 || total < num_evals as u64 {
        return Err(Error::Budget {
            total,
            evals: num_evals,
        });
    }
    Ok(ShotBudget {
        total,
        num_evals,
        per_eval: total / num_evals as u64,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-style random stream identified by a seed and a stream id.
///
/// Child streams are derived by hashing, so `(master, circuit, trial, eval)` keys give
/// disjoint generators independent of scheduling order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream: 0 }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream for sub-task `id`.
    pub fn child(&self, id: u64) -> Self {
        let key = splitmix64(self.seed ^ splitmix64(self.stream.wrapping_add(0x5851_f42d_4c95_7f2d)));
        Self {
            seed: splitmix64(key ^ splitmix64(id)),
            stream: id,
        }
    }

    /// Nested children, `self.child(k0).child(k1)...`.
    pub fn keyed(&self, keys: &[u64]) -> Self {
        keys.iter().fold(*self, |s, &k| s.child(k))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// Sample frequencies `(nu_plus, nu_minus)` of `copies` measurements. `nu_plus + nu_minus == 1`.
pub fn sample_frequencies<R: Rng + ?Sized>(probs: (f64, f64), copies: u64, rng: &mut R) -> Result<(f64, f64)> {
    let (plus, minus) = probs;
    let valid = plus.is_finite()
        && minus.is_finite()
        && (-1e-9..=1.0 + 1e-9).contains(&plus)
        && (-1e-9..=1.0 + 1e-9).contains(&minus)
        && (plus + minus - 1.0).abs() <= 1e-9;
    if !valid {
        return Err(Error::Probabilities { plus, minus });
    }
    if copies == 0 {
        return Err(Error::Budget { total: 0, evals: 1 });
    }
    let nu = sample_plus_count(plus, copies, rng) as f64 / copies as f64;
    Ok((nu, 1.0 - nu))
}

pub(crate) fn sample_plus_count<R: Rng + ?Sized>(p_plus: f64, copies: u64, rng: &mut R) -> u64 {
    let p = p_plus.clamp(0.0, 1.0);
    Binomial::new(copies, p)
        .expect("probability clamped to [0, 1]")
        .sample(rng)
}

/// Sampled `sum_k w_k (nu_plus_k - nu_minus_k)` from per-term `+1` probabilities.
pub(crate) fn sample_weighted_parity<R: Rng + ?Sized>(
    p_plus: &[f64],
    weights: &[f64],
    copies: u64,
    rng: &mut R,
) -> f64 {
    let n = copies as f64;
    p_plus
        .iter()
        .zip(weights)
        .map(|(&p, &w)| {
            let k = sample_plus_count(p, copies, rng) as f64;
            w * (2.0 * k - n) / n
        })
        .sum()
}

/// Probabilities of the `+1` outcome for every term of `obs` at `(theta, x)`.
pub fn term_plus_probabilities(c: &Circuit, theta: &ParamVector, x: &[f64], obs: &Observable) -> Result<Vec<f64>> {
    let s = c.state(theta, x)?;
    obs.terms()
        .iter()
        .map(|(_, p)| s.outcome_probabilities(p).map(|(plus, _)| plus))
        .collect()
}

/// Unbiased estimate of the circuit function with `copies` measurements of every basis term.
pub fn estimate_function<R: Rng + ?Sized>(
    c: &Circuit,
    theta: &ParamVector,
    x: &[f64],
    obs: &Observable,
    copies: u64,
    rng: &mut R,
) -> Result<f64> {
    if copies == 0 {
        return Err(Error::Budget { total: 0, evals: 1 });
    }
    let probs = term_plus_probabilities(c, theta, x, obs)?;
    Ok(sample_weighted_parity(&probs, &obs.normalized_weights(), copies, rng))
}
