//! Simulable models behind a common contract.
//!
//! A model maps `(theta, shocks[, covariates])` to a dataset and a dataset to
//! a moment vector. Conventions:
//!
//! - [`Dataset`] stores outcomes row-major with `t` columns per unit
//!   (`t = 1` for cross-sections, `t = T` for time-series paths, `t = L` for
//!   short stationary blocks). Optional covariates align with units.
//! - `simulate` is pure: identical `(theta, shocks, covariates)` give a
//!   bit-identical dataset.
//! - `moment_contributions` returns one row per unit (or per regression
//!   observation for time-series) whose column means equal `moments`; the
//!   variance machinery in the estimators is built on these rows.

mod arma;
mod het_income;
mod mean_variance;
mod probit;

pub use arma::Arma;
pub use het_income::{HetIncome, HET_INCOME_PARAM_NAMES};
pub use mean_variance::MeanVariance;
pub use probit::Probit;

use crate::samplers::ShockArray;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("singular design: {0}")]
    SingularDesign(String),
    #[error("non-finite value while simulating unit {unit}")]
    NonFinite { unit: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Outcomes plus optional covariates.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Outcomes, row-major, `t` values per unit.
    pub y: Vec<f64>,
    /// Columns per unit (1 for cross-sections).
    pub t: usize,
    /// One covariate per unit, when the model uses any.
    pub x: Option<Vec<f64>>,
}

impl Dataset {
    pub fn cross_section(y: Vec<f64>) -> Self {
        Dataset { y, t: 1, x: None }
    }

    pub fn with_covariates(y: Vec<f64>, x: Vec<f64>) -> Self {
        Dataset { y, t: 1, x: Some(x) }
    }

    pub fn panel(y: Vec<f64>, t: usize) -> Self {
        Dataset { y, t, x: None }
    }

    pub fn n_units(&self) -> usize {
        self.y.len() / self.t
    }

    pub fn unit(&self, i: usize) -> &[f64] {
        &self.y[i * self.t..(i + 1) * self.t]
    }
}

/// The common simulation/moment contract.
pub trait ModelSpec: Send + Sync {
    fn name(&self) -> &'static str;
    fn theta_dim(&self) -> usize;
    fn theta_names(&self) -> Vec<&'static str>;
    /// Shock coordinates consumed per simulated unit.
    fn shock_dim(&self) -> usize;
    fn moment_dim(&self) -> usize;
    /// Compact parameter box; the estimation objective is `+inf` outside.
    fn theta_box(&self) -> Vec<(f64, f64)>;
    /// Simulates a dataset with one unit per shock row. `data` supplies
    /// covariates where the model needs them (tiled over simulated samples).
    fn simulate(
        &self,
        theta: &[f64],
        shocks: &ShockArray,
        data: &Dataset,
    ) -> Result<Dataset, ModelError>;
    fn moments(&self, data: &Dataset) -> Result<DVector<f64>, ModelError>;
    /// Per-unit contributions; column means equal `moments(data)`.
    fn moment_contributions(&self, data: &Dataset) -> Result<DMatrix<f64>, ModelError>;
    /// The dynamic extension of this model, when it has one. Estimation
    /// algorithms that build stationary blocks require it.
    fn as_dynamic(&self) -> Option<&dyn DynamicModel> {
        None
    }
}

/// Dynamic extension: stationary initialisation, path recursion, and short
/// stationary blocks.
pub trait DynamicModel: ModelSpec {
    /// Observations per block (a block's last value is regressed on the
    /// `block_len() - 1` before it).
    fn block_len(&self) -> usize;
    /// Shock coordinates a block consumes: the initial joint draw plus one
    /// per recursion step.
    fn block_shock_dim(&self) -> usize;
    /// Maps two independent standard gaussians to a draw of `(y, e)` from
    /// the model's stationary joint law.
    fn stationary_init(&self, theta: &[f64], z1: f64, z2: f64) -> Result<(f64, f64), ModelError>;
    /// Runs the recursion from `(y0, e0)` over the given shocks, returning
    /// the simulated outcomes.
    fn simulate_path(
        &self,
        theta: &[f64],
        shocks: &[f64],
        init: (f64, f64),
    ) -> Result<Vec<f64>, ModelError>;
    /// One stationary block from a `block_shock_dim()`-wide gaussian row.
    fn simulate_block(&self, theta: &[f64], row: &[f64]) -> Result<Vec<f64>, ModelError>;
}

/// Pooled least squares of `y` on rows of `x` (including any intercept
/// column the caller put there). Returns (coefficients, residual variance
/// RSS/n, Q = X'X/n).
pub(crate) fn ols(
    x_rows: &[Vec<f64>],
    y: &[f64],
) -> Result<(DVector<f64>, f64, DMatrix<f64>), ModelError> {
    let n = y.len();
    let k = x_rows.first().map_or(0, Vec::len);
    if n == 0 || k == 0 || n < k {
        return Err(ModelError::Shape(format!(
            "ols needs at least as many observations as regressors ({n} x {k})"
        )));
    }
    let mut xtx = DMatrix::zeros(k, k);
    let mut xty = DVector::zeros(k);
    for (row, &yi) in x_rows.iter().zip(y) {
        for a in 0..k {
            xty[a] += row[a] * yi;
            for b in 0..k {
                xtx[(a, b)] += row[a] * row[b];
            }
        }
    }
    let q = xtx.clone() / n as f64;
    let chol = xtx
        .cholesky()
        .ok_or_else(|| ModelError::SingularDesign("X'X is not positive definite".into()))?;
    let coef = chol.solve(&xty);
    let mut rss = 0.0;
    for (row, &yi) in x_rows.iter().zip(y) {
        let fit: f64 = row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
        rss += (yi - fit) * (yi - fit);
    }
    Ok((coef, rss / n as f64, q))
}

pub(crate) fn check_theta_len(theta: &[f64], dim: usize) -> Result<(), ModelError> {
    if theta.len() != dim {
        return Err(ModelError::Shape(format!(
            "expected {dim} parameters, got {}",
            theta.len()
        )));
    }
    if let Some(v) = theta.iter().find(|v| !v.is_finite()) {
        return Err(ModelError::Domain(format!("non-finite parameter {v}")));
    }
    Ok(())
}
