//! Closed-form mean-squared errors of FD, GD and PS estimators averaged over
//! two-design circuits, their optimal tuning, and PS crossover copy numbers.
//!
//! `d` is the Hilbert-space dimension `2^n` and `n_t` the total number of copies per
//! basis observable spent on one estimated component.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which derivative is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Gradient,
    DiagHessian,
    OffdiagHessian,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Gradient, Component::DiagHessian, Component::OffdiagHessian];

    pub fn as_str(self) -> &'static str {
        match self {
            Component::Gradient => "gradient",
            Component::DiagHessian => "diag_hessian",
            Component::OffdiagHessian => "offdiag_hessian",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Component::Gradient),
            "diag_hessian" | "diag" => Ok(Component::DiagHessian),
            "offdiag_hessian" | "offdiag" => Ok(Component::OffdiagHessian),
            other => Err(Error::Argument(format!("unknown component {other:?}"))),
        }
    }
}

/// Circuit classes with known squared averages. `I` is the sandwiched two-design case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
}

impl FromStr for CaseLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => CaseLabel::I,
            "II" => CaseLabel::II,
            "III" => CaseLabel::III,
            "IV" => CaseLabel::IV,
            "V" => CaseLabel::V,
            "VI" => CaseLabel::VI,
            "VII" => CaseLabel::VII,
            other => return Err(Error::Argument(format!("unknown case {other:?}"))),
        })
    }
}

/// Quantity whose circuit average is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `f^2`
    Function,
    Derivative(Component),
}

/// Squared average; `is_bound` marks an upper bound rather than an exact value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquaredAverage {
    pub value: f64,
    pub is_bound: bool,
}

/// Finite-copy and nonzero-step contributions to an MSE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseBreakdown {
    pub finite_copy: f64,
    pub nonzero_eps: f64,
    pub total: f64,
}

impl MseBreakdown {
    fn new(finite_copy: f64, nonzero_eps: f64) -> Self {
        Self {
            finite_copy,
            nonzero_eps,
            total: finite_copy + nonzero_eps,
        }
    }
}

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Generalized harmonic number `H_{J,k} = sum_{m=1}^J m^{-k}`.
pub fn harmonic(j: usize, k: u32) -> f64 {
    (1..=j).map(|m| (m as f64).powi(-(k as i32))).sum()
}

fn check_d(d: u64) -> Result<f64> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::Dimension(d));
    }
    Ok(d as f64)
}

fn check_nt(n_t: f64) -> Result<()> {
    if !(n_t >= 1.0) || !n_t.is_finite() {
        return Err(Error::Argument(format!("N_T = {n_t} must be >= 1")));
    }
    Ok(())
}

fn check_j(j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::Argument("J must be >= 1".into()));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Argument(format!("epsilon = {eps} must be > 0")));
    }
    Ok(())
}

/// Parameter-shift MSE, pure shot noise.
pub fn mse_ps(component: Component, d: u64, n_t: f64) -> Result<f64> {
    let d = check_d(d)?;
    check_nt(n_t)?;
    let base = d / (n_t * (d + 1.0));
    Ok(match component {
        Component::DiagHessian => 9.0 * base / 8.0,
        _ => base,
    })
}

/// Case I squared average of the derivative; the nonzero-step term is this times `v^2`.
fn case1_derivative_average(component: Component, d: f64) -> f64 {
    match component {
        Component::Gradient | Component::DiagHessian => d * d / (2.0 * (d + 1.0) * (d * d - 1.0)),
        Component::OffdiagHessian => d.powi(4) / (4.0 * (d + 1.0) * (d * d - 1.0).powi(2)),
    }
}

/// Finite-difference MSE at step `eps`.
pub fn mse_fd(component: Component, d: u64, n_t: f64, eps: f64) -> Result<MseBreakdown> {
    let df = check_d(d)?;
    check_nt(n_t)?;
    check_eps(eps)?;
    let base = df / (n_t * (df + 1.0));
    let s = sinc(eps / 2.0);
    let (copy, v) = match component {
        Component::Gradient => (4.0 * base / (eps * eps), 1.0 - s),
        Component::DiagHessian => (18.0 * base / eps.powi(4), 1.0 - s * s),
        Component::OffdiagHessian => (16.0 * base / eps.powi(4), 1.0 - s * s),
    };
    Ok(MseBreakdown::new(copy, case1_derivative_average(component, df) * v * v))
}

/// Quadratic form `MSE_GD(c) = c^T M c` and its parts `M = prefactor * A + eps_scale * v v^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct GDMatrices {
    pub component: Component,
    pub m: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub v: DVector<f64>,
    pub copy_prefactor: f64,
    pub eps_scale: f64,
}

impl GDMatrices {
    pub fn order(&self) -> usize {
        self.v.len()
    }

    /// `c^T M c`.
    pub fn mse(&self, c: &DVector<f64>) -> f64 {
        c.dot(&(&self.m * c))
    }

    /// Finite-copy and nonzero-step parts of `c^T M c`.
    pub fn breakdown(&self, c: &DVector<f64>) -> MseBreakdown {
        let copy = self.copy_prefactor * c.dot(&(&self.a * c));
        let bias = self.eps_scale * c.dot(&self.v).powi(2);
        MseBreakdown::new(copy, bias)
    }
}

pub fn gd_matrices(component: Component, d: u64, n_t: f64, eps: f64, j: usize) -> Result<GDMatrices> {
    let df = check_d(d)?;
    check_nt(n_t)?;
    check_eps(eps)?;
    check_j(j)?;
    let jf = j as f64;
    let base = df / (n_t * (df + 1.0));
    let inv = |m: usize, p: i32| (m as f64).powi(-p);
    let mut a = DMatrix::zeros(j, j);
    let v = DVector::from_fn(j, |i, _| {
        let s = sinc((i + 1) as f64 * eps / 2.0);
        match component {
            Component::Gradient => 1.0 - s,
            _ => 1.0 - s * s,
        }
    });
    let copy_prefactor = match component {
        Component::Gradient => {
            for i in 0..j {
                a[(i, i)] = inv(i + 1, 2);
            }
            4.0 * jf * base / (eps * eps)
        }
        Component::DiagHessian => {
            for r in 0..j {
                for c in 0..j {
                    a[(r, c)] = 4.0 * inv(r + 1, 2) * inv(c + 1, 2);
                }
                a[(r, r)] += 2.0 * inv(r + 1, 4);
            }
            (2.0 * jf + 1.0) * base / eps.powi(4)
        }
        Component::OffdiagHessian => {
            for i in 0..j {
                a[(i, i)] = inv(i + 1, 4);
            }
            16.0 * jf * base / eps.powi(4)
        }
    };
    let eps_scale = case1_derivative_average(component, df);
    let m = &a * copy_prefactor + (&v * v.transpose()) * eps_scale;
    Ok(GDMatrices {
        component,
        m,
        a,
        v,
        copy_prefactor,
        eps_scale,
    })
}

/// Minimizer of `c^T M c` subject to `sum c = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalCoefficients {
    pub c: DVector<f64>,
    pub mse: f64,
    /// Squared ratio of extreme Cholesky pivots, a cheap lower estimate of `cond(M)`.
    pub condition: f64,
}

impl OptimalCoefficients {
    pub fn is_ill_conditioned(&self) -> bool {
        self.condition > 1e10
    }
}

pub fn optimal_coefficients(g: &GDMatrices) -> Result<OptimalCoefficients> {
    let j = g.order();
    let diag_ratio = |m: &DMatrix<f64>| {
        let d = m.diagonal();
        d.max() / d.min()
    };
    let Some(chol) = g.m.clone().cholesky() else {
        return Err(Error::NotPositiveDefinite {
            condition: diag_ratio(&g.m).abs(),
        });
    };
    let l = chol.l();
    let pivots = l.diagonal();
    let condition = (pivots.max() / pivots.min()).powi(2);
    let ones = DVector::from_element(j, 1.0);
    let y = chol.solve(&ones);
    let denom = ones.dot(&y);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::NotPositiveDefinite { condition });
    }
    Ok(OptimalCoefficients {
        c: y / denom,
        mse: 1.0 / denom,
        condition,
    })
}

/// Result of optimizing both the step and the coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsOptimum {
    pub eps: f64,
    pub c: DVector<f64>,
    pub mse: f64,
}

/// Grid size used before golden-section refinement.
pub const EPS_GRID_POINTS: usize = 2000;

/// Global minimizer of the coefficient-optimal GD MSE over `eps` in `(0, 2pi)`.
pub fn minimize_over_eps(component: Component, d: u64, n_t: f64, j: usize) -> Result<EpsOptimum> {
    minimize_over_eps_in(component, d, n_t, j, std::f64::consts::TAU)
}

/// As [`minimize_over_eps`] on `(0, eps_max)`.
pub fn minimize_over_eps_in(component: Component, d: u64, n_t: f64, j: usize, eps_max: f64) -> Result<EpsOptimum> {
    check_d(d)?;
    check_nt(n_t)?;
    check_j(j)?;
    check_eps(eps_max)?;
    let objective = |eps: f64| -> Result<f64> {
        Ok(optimal_coefficients(&gd_matrices(component, d, n_t, eps, j)?)?.mse)
    };
    let step = eps_max / (EPS_GRID_POINTS + 1) as f64;
    let mut best_i = 1;
    let mut best = f64::INFINITY;
    for i in 1..=EPS_GRID_POINTS {
        let val = objective(step * i as f64)?;
        if val < best {
            best = val;
            best_i = i;
        }
    }
    // golden section never evaluates the bracket ends, so lo = 0 is safe
    let lo = step * (best_i - 1) as f64;
    let hi = step * (best_i + 1) as f64;
    let eps = golden_section(lo, hi, 1e-7, |e| objective(e).unwrap_or(f64::INFINITY));
    let eps = if objective(eps)? <= best { eps } else { step * best_i as f64 };
    let opt = optimal_coefficients(&gd_matrices(component, d, n_t, eps, j)?)?;
    Ok(EpsOptimum {
        eps,
        c: opt.c,
        mse: opt.mse,
    })
}

fn golden_section(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Leading-order optimal FD step.
pub fn eps_opt_approx(component: Component, d: u64, n_t: f64) -> Result<f64> {
    let d = check_d(d)?;
    check_nt(n_t)?;
    let d2 = d * d - 1.0;
    Ok(match component {
        Component::Gradient => (2304.0 * d2 / (n_t * d)).powf(1.0 / 6.0),
        Component::DiagHessian => (5184.0 * d2 / (n_t * d)).powf(1.0 / 8.0),
        Component::OffdiagHessian => (9216.0 * d2 * d2 / (n_t * d.powi(3))).powf(1.0 / 8.0),
    })
}

/// FD MSE at the leading-order optimal step.
pub fn mse_fd_opt_approx(component: Component, d: u64, n_t: f64) -> Result<f64> {
    let d = check_d(d)?;
    check_nt(n_t)?;
    let d2 = d * d - 1.0;
    Ok(match component {
        Component::Gradient => {
            (3.0f64 / 32.0).cbrt() * d.powf(4.0 / 3.0) / ((d + 1.0) * d2.cbrt() * n_t.powf(2.0 / 3.0))
        }
        Component::DiagHessian => d.powf(1.5) / (2.0 * (d + 1.0) * d2.sqrt() * n_t.sqrt()),
        Component::OffdiagHessian => d.powf(2.5) / (3.0 * (d + 1.0) * d2 * n_t.sqrt()),
    })
}

/// Upper bound on the optimally tuned order-`J` GD MSE.
pub fn gd_mse_upper_bound(component: Component, d: u64, n_t: f64, j: usize) -> Result<f64> {
    let d = check_d(d)?;
    check_nt(n_t)?;
    check_j(j)?;
    let jf = j as f64;
    let d2 = d * d - 1.0;
    let h2 = harmonic(j, 2);
    let h4 = harmonic(j, 4);
    Ok(match component {
        Component::Gradient => {
            let inner = d.powi(4) * (jf + 1.0).powi(2) * (2.0 * jf + 1.0).powi(2)
                / (6.0 * n_t * n_t * jf * jf * (d + 1.0).powi(3) * d2);
            0.25 * inner.cbrt() * h2.powf(2.0 / 3.0)
        }
        Component::DiagHessian => {
            (jf + 1.0) / (36.0 * jf)
                * ((2.0 * d * jf + d) / (d + 1.0)).powf(1.5)
                * ((2.0 * h2 * h2 + h4) / (n_t * (d - 1.0))).sqrt()
        }
        Component::OffdiagHessian => {
            (jf + 1.0) * (2.0 * jf + 1.0) / (18.0 * (d + 1.0) * d2) * (d.powi(5) * h4 / (n_t * jf)).sqrt()
        }
    })
}

/// Approximate copy number at which PS overtakes optimal FD.
pub fn n_star_fd_approx(component: Component, d: u64) -> Result<f64> {
    let d = check_d(d)?;
    let d2 = d * d - 1.0;
    Ok(match component {
        Component::Gradient => 32.0 * d2 / (3.0 * d),
        Component::DiagHessian => 81.0 * d2 / (16.0 * d),
        Component::OffdiagHessian => 9.0 * d2 * d2 / d.powi(3),
    })
}

/// Lower bound on the copy number at which PS overtakes optimal order-`J` GD.
pub fn n_star_gd_lower(component: Component, d: u64, j: usize) -> Result<f64> {
    let d = check_d(d)?;
    check_j(j)?;
    let jf = j as f64;
    let d2 = d * d - 1.0;
    let h2 = harmonic(j, 2);
    let h4 = harmonic(j, 4);
    let jp = (jf + 1.0).powi(2);
    let j2 = (2.0 * jf + 1.0).powi(2);
    Ok(match component {
        Component::Gradient => 384.0 * jf * jf * d2 / (d * jp * j2 * h2 * h2),
        Component::DiagHessian => {
            6561.0 * jf * jf * d2 / (4.0 * d * jp * j2 * (2.0 * jf + 1.0) * (2.0 * h2 * h2 + h4))
        }
        Component::OffdiagHessian => 6561.0 * jf * d2 * d2 / (16.0 * d.powi(3) * jp * j2 * h4),
    })
}

/// Search window of [`n_star_numeric`].
pub const N_STAR_RANGE: (f64, f64) = (1.0, 1e12);

/// All sign changes of `MSE_GD,opt(N_T) - MSE_PS(N_T)` in [`N_STAR_RANGE`], ascending.
pub fn n_star_crossings(component: Component, d: u64, j: usize) -> Result<Vec<f64>> {
    check_d(d)?;
    check_j(j)?;
    let (lo, hi) = N_STAR_RANGE;
    // log ratio of the optimal GD MSE to the PS MSE; positive once PS wins
    let gap = |log_n: f64| -> Result<f64> {
        let n_t = log_n.exp();
        let gd = minimize_over_eps(component, d, n_t, j)?.mse;
        Ok((gd / mse_ps(component, d, n_t)?).ln())
    };
    let steps = 120;
    let (a, b) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..=steps).map(|i| a + (b - a) * i as f64 / steps as f64).collect();
    let vals = grid.iter().map(|&x| gap(x)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..steps {
        if (vals[i] < 0.0) == (vals[i + 1] < 0.0) {
            continue;
        }
        let (mut x0, mut x1, mut f0) = (grid[i], grid[i + 1], vals[i]);
        while x1 - x0 > 1e-4 {
            let xm = 0.5 * (x0 + x1);
            let fm = gap(xm)?;
            if (fm < 0.0) == (f0 < 0.0) {
                x0 = xm;
                f0 = fm;
            } else {
                x1 = xm;
            }
        }
        roots.push((0.5 * (x0 + x1)).exp());
    }
    Ok(roots)
}

/// Smallest crossover copy number; see [`n_star_crossings`].
pub fn n_star_numeric(component: Component, d: u64, j: usize) -> Result<f64> {
    let roots = n_star_crossings(component, d, j)?;
    roots.first().copied().ok_or(Error::NoCrossover {
        lo: N_STAR_RANGE.0,
        hi: N_STAR_RANGE.1,
    })
}

/// Circuit average of `f^2` or a squared derivative for the given case.
pub fn squared_average(quantity: Quantity, case: CaseLabel, d: u64) -> Result<SquaredAverage> {
    let d = check_d(d)?;
    let d2 = d * d - 1.0;
    let exact = |value| SquaredAverage { value, is_bound: false };
    let bound = |value| SquaredAverage { value, is_bound: true };
    let comp = match quantity {
        Quantity::Function => return Ok(exact(1.0 / (d + 1.0))),
        Quantity::Derivative(c) => c,
    };
    use CaseLabel::*;
    use Component::*;
    Ok(match (comp, case) {
        (c, I) => exact(case1_derivative_average(c, d)),
        (Gradient | DiagHessian, II) => bound(d / (2.0 * d2)),
        (Gradient | DiagHessian, III) => bound(1.0 / (d + 1.0)),
        (OffdiagHessian, II) => bound(d.powi(3) / (4.0 * d2 * d2)),
        (OffdiagHessian, III) => bound(1.0 / (2.0 * (d + 1.0))),
        (OffdiagHessian, IV) => bound(d * d / (2.0 * (d + 1.0) * d2)),
        (OffdiagHessian, V) => bound(3.0 * d / (4.0 * d2)),
        (OffdiagHessian, VI) => bound(d / (2.0 * d2)),
        (OffdiagHessian, VII) => bound(1.0 / (2.0 * (d + 1.0))),
        (c, case) => {
            return Err(Error::Argument(format!("case {case:?} does not apply to {c}")));
        }
    })
}

/// Leading-order optimal FD step and MSE for an arbitrary squared derivative average.
pub fn general_opt_from_averages(component: Component, d: u64, n_t: f64, sq_avg: f64) -> Result<(f64, f64)> {
    let d = check_d(d)?;
    check_nt(n_t)?;
    if !(sq_avg > 0.0) || !sq_avg.is_finite() {
        return Err(Error::Argument(format!("squared average {sq_avg} must be > 0")));
    }
    let r = d / (n_t * (d + 1.0));
    Ok(match component {
        Component::Gradient => (
            (1152.0 * r / sq_avg).powf(1.0 / 6.0),
            (3.0 * r * r * sq_avg / 16.0).cbrt(),
        ),
        Component::DiagHessian => ((2592.0 * r / sq_avg).powf(0.125), (r * sq_avg / 2.0).sqrt()),
        Component::OffdiagHessian => ((2304.0 * r / sq_avg).powf(0.125), 2.0 / 3.0 * (r * sq_avg).sqrt()),
    })
}
