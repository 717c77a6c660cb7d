//! Gaussian location-scale model: `y_i = mu + sigma * e_i`.

use super::{check_theta_len, Dataset, ModelError, ModelSpec};
use crate::samplers::ShockArray;
use nalgebra::{DMatrix, DVector};

/// Parameters are `theta = (mu, sigma^2)`; moments are the sample mean and
/// the (1/n-normalised) sample variance, so the model is just identified.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanVariance;

impl ModelSpec for MeanVariance {
    fn name(&self) -> &'static str {
        "mean_variance"
    }

    fn theta_dim(&self) -> usize {
        2
    }

    fn theta_names(&self) -> Vec<&'static str> {
        vec!["mu", "sigma2"]
    }

    fn shock_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        2
    }

    fn theta_box(&self) -> Vec<(f64, f64)> {
        vec![(-5.0, 5.0), (1e-4, 25.0)]
    }

    fn simulate(
        &self,
        theta: &[f64],
        shocks: &ShockArray,
        _data: &Dataset,
    ) -> Result<Dataset, ModelError> {
        check_theta_len(theta, 2)?;
        let (mu, sigma2) = (theta[0], theta[1]);
        if sigma2 <= 0.0 {
            return Err(ModelError::Domain(format!(
                "variance must be positive, got {sigma2}"
            )));
        }
        let sigma = sigma2.sqrt();
        let y = (0..shocks.rows())
            .map(|i| mu + sigma * shocks.get(i, 0))
            .collect();
        Ok(Dataset::cross_section(y))
    }

    fn moments(&self, data: &Dataset) -> Result<DVector<f64>, ModelError> {
        if data.y.is_empty() {
            return Err(ModelError::Shape("empty dataset".into()));
        }
        let n = data.y.len() as f64;
        let mean = data.y.iter().sum::<f64>() / n;
        let var = data.y.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        Ok(DVector::from_vec(vec![mean, var]))
    }

    fn moment_contributions(&self, data: &Dataset) -> Result<DMatrix<f64>, ModelError> {
        let m = self.moments(data)?;
        let mean = m[0];
        let n = data.y.len();
        Ok(DMatrix::from_fn(n, 2, |i, j| {
            let y = data.y[i];
            if j == 0 {
                y
            } else {
                (y - mean) * (y - mean)
            }
        }))
    }
}
