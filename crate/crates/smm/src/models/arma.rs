//! ARMA(1,1): `y_t = rho * y_{t-1} + sigma * (e_t + vartheta * e_{t-1})`.

use super::{check_theta_len, ols, Dataset, DynamicModel, ModelError, ModelSpec};
use crate::samplers::ShockArray;
use nalgebra::{DMatrix, DVector};

/// Parameters are `theta = (rho, vartheta, sigma)`. Moments are the OLS
/// coefficients of `y_t` on its first `LAGS` lags plus the OLS residual
/// variance — five in total — computed by pooling over every unit (paths
/// or stationary blocks alike). The process is mean zero, so the lag
/// regression carries no intercept.
#[derive(Debug, Clone, Copy, Default)]
pub struct Arma;

/// Lags in the auxiliary regression.
pub const LAGS: usize = 4;

impl Arma {
    fn unpack(theta: &[f64]) -> Result<(f64, f64, f64), ModelError> {
        check_theta_len(theta, 3)?;
        let (rho, vartheta, sigma) = (theta[0], theta[1], theta[2]);
        if rho.abs() >= 1.0 {
            return Err(ModelError::Domain(format!(
                "autoregressive coefficient {rho} is not stationary"
            )));
        }
        if sigma <= 0.0 {
            return Err(ModelError::Domain(format!(
                "shock scale must be positive, got {sigma}"
            )));
        }
        Ok((rho, vartheta, sigma))
    }

    /// Stationary variance of `y_t`.
    pub fn gamma0(theta: &[f64]) -> Result<f64, ModelError> {
        let (rho, vartheta, sigma) = Self::unpack(theta)?;
        Ok((1.0 + vartheta * vartheta + 2.0 * rho * vartheta) * sigma * sigma
            / (1.0 - rho * rho))
    }

    /// Stationary lag-1 autocovariance of `y_t`.
    pub fn gamma1(theta: &[f64]) -> Result<f64, ModelError> {
        let (rho, vartheta, sigma) = Self::unpack(theta)?;
        Ok(rho * Self::gamma0(theta)? + vartheta * sigma * sigma)
    }

    /// Contemporaneous covariance of `(y_t, e_t)` implied by the recursion:
    /// `y_t` loads on `e_t` only through the `sigma * e_t` term.
    pub fn cov_y_e(theta: &[f64]) -> Result<f64, ModelError> {
        let (_, _, sigma) = Self::unpack(theta)?;
        Ok(sigma)
    }
}

impl ModelSpec for Arma {
    fn name(&self) -> &'static str {
        "arma"
    }

    fn theta_dim(&self) -> usize {
        3
    }

    fn theta_names(&self) -> Vec<&'static str> {
        vec!["rho", "vartheta", "sigma"]
    }

    fn shock_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        LAGS + 1
    }

    fn theta_box(&self) -> Vec<(f64, f64)> {
        vec![(-0.95, 0.95), (-0.95, 0.95), (0.05, 5.0)]
    }

    /// Simulates one path of length `spec.n` per simulated sample from the
    /// fixed initial values `(y_0, e_0) = (0, 0)`.
    fn simulate(
        &self,
        theta: &[f64],
        shocks: &ShockArray,
        _data: &Dataset,
    ) -> Result<Dataset, ModelError> {
        let t_len = shocks.spec().n;
        let s = shocks.spec().s;
        let mut y = Vec::with_capacity(t_len * s);
        for s_idx in 0..s {
            let e: Vec<f64> = (0..t_len).map(|t| shocks.get(s_idx * t_len + t, 0)).collect();
            y.extend(self.simulate_path(theta, &e, (0.0, 0.0))?);
        }
        Ok(Dataset::panel(y, t_len))
    }

    fn moments(&self, data: &Dataset) -> Result<DVector<f64>, ModelError> {
        let (rows, targets) = lag_design(data)?;
        let (coef, resid_var, _) = ols(&rows, &targets)?;
        let mut m: Vec<f64> = coef.iter().copied().collect();
        m.push(resid_var);
        Ok(DVector::from_vec(m))
    }

    fn moment_contributions(&self, data: &Dataset) -> Result<DMatrix<f64>, ModelError> {
        let (rows, targets) = lag_design(data)?;
        let (coef, _, q) = ols(&rows, &targets)?;
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| ModelError::SingularDesign("X'X/n not invertible".into()))?;
        let k = LAGS;
        let mut c = DMatrix::zeros(targets.len(), k + 1);
        for (i, (row, &yt)) in rows.iter().zip(&targets).enumerate() {
            let xi = DVector::from_vec(row.clone());
            let h = &q_inv * (&xi * yt);
            for j in 0..k {
                c[(i, j)] = h[j];
            }
            let fit: f64 = row.iter().zip(coef.iter()).map(|(a, b)| a * b).sum();
            c[(i, k)] = (yt - fit) * (yt - fit);
        }
        Ok(c)
    }

    fn as_dynamic(&self) -> Option<&dyn DynamicModel> {
        Some(self)
    }
}

/// Builds the pooled lag-regression design: for each unit, regress
/// `y_j` on `(y_{j-1}, ..., y_{j-LAGS})` for `j = LAGS..t`.
fn lag_design(data: &Dataset) -> Result<(Vec<Vec<f64>>, Vec<f64>), ModelError> {
    if data.t <= LAGS {
        return Err(ModelError::Shape(format!(
            "need more than {LAGS} observations per unit, got {}",
            data.t
        )));
    }
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for i in 0..data.n_units() {
        let path = data.unit(i);
        for j in LAGS..data.t {
            let mut row = Vec::with_capacity(LAGS);
            for l in 1..=LAGS {
                row.push(path[j - l]);
            }
            rows.push(row);
            targets.push(path[j]);
        }
    }
    Ok((rows, targets))
}

impl DynamicModel for Arma {
    fn block_len(&self) -> usize {
        LAGS + 1
    }

    /// Two coordinates seed the stationary `(y, e)` pair; the remaining
    /// `block_len() - 1` drive the recursion.
    fn block_shock_dim(&self) -> usize {
        2 + (self.block_len() - 1)
    }

    fn stationary_init(&self, theta: &[f64], z1: f64, z2: f64) -> Result<(f64, f64), ModelError> {
        let gamma0 = Self::gamma0(theta)?;
        let c = Self::cov_y_e(theta)?;
        // Cholesky factor of [[gamma0, c], [c, 1]].
        let a = gamma0.sqrt();
        let resid = 1.0 - c * c / gamma0;
        if resid < 0.0 {
            return Err(ModelError::Domain(
                "stationary joint covariance is not positive semidefinite".into(),
            ));
        }
        let y = a * z1;
        let e = (c / a) * z1 + resid.sqrt() * z2;
        Ok((y, e))
    }

    fn simulate_path(
        &self,
        theta: &[f64],
        shocks: &[f64],
        init: (f64, f64),
    ) -> Result<Vec<f64>, ModelError> {
        let (rho, vartheta, sigma) = Self::unpack(theta)?;
        let (mut y_prev, mut e_prev) = init;
        let mut out = Vec::with_capacity(shocks.len());
        for &e in shocks {
            let y = rho * y_prev + sigma * (e + vartheta * e_prev);
            out.push(y);
            y_prev = y;
            e_prev = e;
        }
        Ok(out)
    }

    fn simulate_block(&self, theta: &[f64], row: &[f64]) -> Result<Vec<f64>, ModelError> {
        if row.len() != self.block_shock_dim() {
            return Err(ModelError::Shape(format!(
                "block row needs {} coordinates, got {}",
                self.block_shock_dim(),
                row.len()
            )));
        }
        let (y1, e1) = self.stationary_init(theta, row[0], row[1])?;
        let mut block = Vec::with_capacity(self.block_len());
        block.push(y1);
        block.extend(self.simulate_path(theta, &row[2..], (y1, e1))?);
        Ok(block)
    }
}
