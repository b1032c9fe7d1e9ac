use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{
    gd_mse_upper_bound, minimize_over_eps_in, mse_fd_opt_approx, mse_ps, n_star_crossings,
    n_star_fd_approx, n_star_gd_lower, Component,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    GdOptVsN,
    NstarVsN,
}

impl FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd-opt-vs-n" => Ok(SweepKind::GdOptVsN),
            "nstar-vs-n" => Ok(SweepKind::NstarVsN),
            other => Err(Error::Argument(format!("unknown sweep kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    #[serde(default = "all_components")]
    pub components: Vec<Component>,
    #[serde(rename = "J")]
    pub orders: Vec<usize>,
    /// Copy budget for `gd-opt-vs-n`; ignored by `nstar-vs-n`.
    #[serde(rename = "N_T", default = "default_nt")]
    pub n_t: f64,
    pub n_min: usize,
    pub n_max: usize,
    /// Upper end of the step search interval.
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
}

fn all_components() -> Vec<Component> {
    Component::ALL.to_vec()
}

fn default_nt() -> f64 {
    2000.0
}

fn default_eps_max() -> f64 {
    std::f64::consts::TAU
}

/// One row of an analytic sweep. `value` is the optimal MSE (`gd-opt-vs-n`) or the numeric
/// crossover copy number (`nstar-vs-n`, absent without a crossing); `approx` is the matching
/// closed form (leading-order value for `J = 1`, bound otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRow {
    pub kind: SweepKind,
    pub component: Component,
    pub n_qubits: usize,
    #[serde(rename = "J")]
    pub order: usize,
    #[serde(rename = "N_T")]
    pub n_t: Option<f64>,
    pub epsilon: Option<f64>,
    pub value: Option<f64>,
    pub approx: f64,
    pub reference: Option<f64>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min < 1 || self.n_min > self.n_max || self.n_max > 62 {
            return Err(Error::config("n_min/n_max", format!("bad range {}..={}", self.n_min, self.n_max)));
        }
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::config("J", "orders must be >= 1"));
        }
        if self.components.is_empty() {
            return Err(Error::config("components", "empty list"));
        }
        if !(self.n_t >= 1.0) {
            return Err(Error::config("N_T", "must be >= 1"));
        }
        if !(self.eps_max > 0.0) || !self.eps_max.is_finite() {
            return Err(Error::config("eps_max", "must be > 0"));
        }
        Ok(())
    }
}

/// Tabulates optimal GD MSEs or crossover copy numbers per `(component, n, J)`.
///
/// `reference` holds the PS MSE for `gd-opt-vs-n` and every further crossing for
/// `nstar-vs-n` is dropped; use [`n_star_crossings`] to see them all.
pub fn run_analytic_sweep(cfg: &SweepConfig) -> Result<Vec<AnalyticRow>> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &c in &cfg.components {
        for n in cfg.n_min..=cfg.n_max {
            for &j in &cfg.orders {
                cells.push((c, n, j));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(c, n, j)| -> Result<AnalyticRow> {
            let d = 1u64 << n;
            match cfg.kind {
                SweepKind::GdOptVsN => {
                    let opt = minimize_over_eps_in(c, d, cfg.n_t, j, cfg.eps_max)?;
                    let approx = if j == 1 {
                        mse_fd_opt_approx(c, d, cfg.n_t)?
                    } else {
                        gd_mse_upper_bound(c, d, cfg.n_t, j)?
                    };
                    Ok(AnalyticRow {
                        kind: cfg.kind,
                        component: c,
                        n_qubits: n,
                        order: j,
                        n_t: Some(cfg.n_t),
                        epsilon: Some(opt.eps),
                        value: Some(opt.mse),
                        approx,
                        reference: Some(mse_ps(c, d, cfg.n_t)?),
                    })
                }
                SweepKind::NstarVsN => {
                    let roots = n_star_crossings(c, d, j)?;
                    let approx = if j == 1 { n_star_fd_approx(c, d)? } else { n_star_gd_lower(c, d, j)? };
                    Ok(AnalyticRow {
                        kind: cfg.kind,
                        component: c,
                        n_qubits: n,
                        order: j,
                        n_t: None,
                        epsilon: None,
                        value: roots.first().copied(),
                        approx,
                        reference: None,
                    })
                }
            }
        })
        .collect()
}

/// Order with the smallest optimal MSE among `orders`, per qubit count.
pub fn argmin_order(
    component: Component,
    n_values: &[usize],
    orders: &[usize],
    n_t: f64,
    eps_max: f64,
) -> Result<Vec<usize>> {
    n_values
        .par_iter()
        .map(|&n| -> Result<usize> {
            let mut best = (f64::INFINITY, 0);
            for &j in orders {
                let m = minimize_over_eps_in(component, 1u64 << n, n_t, j, eps_max)?.mse;
                if m < best.0 {
                    best = (m, j);
                }
            }
            Ok(best.1)
        })
        .collect()
}
