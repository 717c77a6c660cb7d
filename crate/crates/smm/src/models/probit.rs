//! Binary choice model: `y_i = 1{theta1 + theta2 * x_i + e_i >= 0}`.

use super::{check_theta_len, ols, Dataset, ModelError, ModelSpec};
use crate::samplers::ShockArray;
use nalgebra::{DMatrix, DVector};

/// Parameters are `(theta1, theta2)`; moments are the OLS intercept and
/// slope of the binary outcome on the covariate (a linear probability
/// projection), so the model is just identified but the simulated moments
/// are non-smooth in theta.
#[derive(Debug, Clone, Copy, Default)]
pub struct Probit;

impl Probit {
    /// A crude starting value from the data's linear projection: invert the
    /// normal CDF at the projected choice probability. Good enough to start
    /// the simplex in the basin of theta_0.
    pub fn start_from_data(&self, data: &Dataset) -> Result<Vec<f64>, ModelError> {
        let m = self.moments(data)?;
        let p = m[0].clamp(0.02, 0.98);
        let a = crate::qmc::inv_normal_cdf(p)
            .map_err(|e| ModelError::Domain(e.to_string()))?;
        let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // With e ~ N(0,1), P(y=1) = Phi(t1/sqrt(1+t2^2)) and the projection
        // slope is roughly phi(a) * t2/sqrt(1+t2^2); invert both relations.
        let c = (m[1] / phi).clamp(-0.98, 0.98);
        let denom = (1.0 - c * c).sqrt();
        Ok(vec![(a / denom).clamp(-4.0, 4.0), (c / denom).clamp(-4.0, 4.0)])
    }
}

impl ModelSpec for Probit {
    fn name(&self) -> &'static str {
        "probit"
    }

    fn theta_dim(&self) -> usize {
        2
    }

    fn theta_names(&self) -> Vec<&'static str> {
        vec!["theta1", "theta2"]
    }

    fn shock_dim(&self) -> usize {
        1
    }

    fn moment_dim(&self) -> usize {
        2
    }

    fn theta_box(&self) -> Vec<(f64, f64)> {
        vec![(-5.0, 5.0), (-5.0, 5.0)]
    }

    fn simulate(
        &self,
        theta: &[f64],
        shocks: &ShockArray,
        data: &Dataset,
    ) -> Result<Dataset, ModelError> {
        check_theta_len(theta, 2)?;
        let x = data
            .x
            .as_ref()
            .ok_or_else(|| ModelError::Shape("probit needs covariates".into()))?;
        if x.is_empty() || shocks.rows() % x.len() != 0 {
            return Err(ModelError::Shape(format!(
                "shock rows {} must tile the {} covariates",
                shocks.rows(),
                x.len()
            )));
        }
        let n = x.len();
        let mut y = Vec::with_capacity(shocks.rows());
        let mut x_tiled = Vec::with_capacity(shocks.rows());
        for i in 0..shocks.rows() {
            let xi = x[i % n];
            let latent = theta[0] + theta[1] * xi + shocks.get(i, 0);
            y.push(f64::from(latent >= 0.0));
            x_tiled.push(xi);
        }
        Ok(Dataset::with_covariates(y, x_tiled))
    }

    fn moments(&self, data: &Dataset) -> Result<DVector<f64>, ModelError> {
        let x = data
            .x
            .as_ref()
            .ok_or_else(|| ModelError::Shape("probit needs covariates".into()))?;
        let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
        let (coef, _, _) = ols(&rows, &data.y)?;
        Ok(coef)
    }

    fn moment_contributions(&self, data: &Dataset) -> Result<DMatrix<f64>, ModelError> {
        let x = data
            .x
            .as_ref()
            .ok_or_else(|| ModelError::Shape("probit needs covariates".into()))?;
        let rows: Vec<Vec<f64>> = x.iter().map(|&xi| vec![1.0, xi]).collect();
        let (_, _, q) = ols(&rows, &data.y)?;
        let q_inv = q
            .try_inverse()
            .ok_or_else(|| ModelError::SingularDesign("X'X/n not invertible".into()))?;
        // h_i = (X'X/n)^{-1} x_i y_i averages to the OLS coefficients.
        let n = data.y.len();
        let mut c = DMatrix::zeros(n, 2);
        for i in 0..n {
            let h = &q_inv * DVector::from_vec(vec![data.y[i], data.y[i] * x[i]]);
            c[(i, 0)] = h[0];
            c[(i, 1)] = h[1];
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{DrawMethod, DrawSpec, ScrambleLayout};

    fn shocks_from(values: Vec<f64>) -> ShockArray {
        ShockArray::from_values(
            DrawSpec {
                method: DrawMethod::PseudoRandom,
                n: values.len(),
                s: 1,
                d: 1,
                layout: ScrambleLayout::Pooled,
                seed: 0,
            },
            values,
        )
    }

    #[test]
    fn saturated_choices() {
        let p = Probit;
        let data = Dataset::with_covariates(vec![0.0; 4], vec![-1.0, 0.5, 1.0, 2.0]);
        let e = shocks_from(vec![0.1, -0.2, 0.3, -0.4]);
        let up = p.simulate(&[10.0, 0.0], &e, &data).unwrap();
        assert!(up.y.iter().all(|&y| y == 1.0));
        let m = p.moments(&up).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12 && m[1].abs() < 1e-12);
        let down = p.simulate(&[-10.0, 0.0], &e, &data).unwrap();
        assert!(down.y.iter().all(|&y| y == 0.0));
        let m = p.moments(&down).unwrap();
        assert!(m[0].abs() < 1e-12 && m[1].abs() < 1e-12);
    }

    #[test]
    fn hand_ols_case() {
        let p = Probit;
        let data = Dataset::with_covariates(vec![0.0, 1.0, 1.0, 1.0], vec![-1.0, -1.0, 1.0, 1.0]);
        let m = p.moments(&data).unwrap();
        assert!((m[0] - 0.75).abs() < 1e-12);
        assert!((m[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn raising_the_intercept_never_flips_one_to_zero() {
        let p = Probit;
        let x: Vec<f64> = (0..50).map(|i| (i as f64 - 25.0) / 10.0).collect();
        let e: Vec<f64> = (0..50).map(|i| ((i * 37) % 100) as f64 / 25.0 - 2.0).collect();
        let data = Dataset::with_covariates(vec![0.0; 50], x);
        let lo = p.simulate(&[0.2, 0.7], &shocks_from(e.clone()), &data).unwrap();
        let hi = p.simulate(&[0.9, 0.7], &shocks_from(e), &data).unwrap();
        for i in 0..50 {
            assert!(hi.y[i] >= lo.y[i]);
        }
    }

    #[test]
    fn constant_covariate_is_singular() {
        let p = Probit;
        let data = Dataset::with_covariates(vec![0.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]);
        assert!(matches!(
            p.moments(&data),
            Err(ModelError::SingularDesign(_))
        ));
    }

    #[test]
    fn contributions_average_to_moments() {
        let p = Probit;
        let data = Dataset::with_covariates(vec![0.0, 1.0, 1.0, 0.0], vec![-1.5, -0.5, 0.5, 1.5]);
        let m = p.moments(&data).unwrap();
        let c = p.moment_contributions(&data).unwrap();
        for j in 0..2 {
            let avg = c.column(j).sum() / 4.0;
            assert!((avg - m[j]).abs() < 1e-12, "column {j}");
        }
    }

    #[test]
    fn sample_blocks_tile_the_covariates() {
        let p = Probit;
        let data = Dataset::with_covariates(vec![0.0, 0.0], vec![-1.0, 1.0]);
        let e = shocks_from(vec![0.0, 0.0, 0.0, 0.0]); // two samples of two
        let sim = p.simulate(&[0.0, 2.0], &e, &data).unwrap();
        assert_eq!(sim.x.as_ref().unwrap(), &vec![-1.0, 1.0, -1.0, 1.0]);
        assert_eq!(sim.y, vec![0.0, 1.0, 0.0, 1.0]);
    }
}
