//! Variance estimators for moment-based inference: the sandwich standard
//! errors plus three estimators of the long-run moment variance `V`.

use nalgebra::{DMatrix, DVector};

use super::EstimError;
use crate::models::{Dataset, ModelSpec};
use crate::samplers::{make_gaussian, DrawSpec};

/// Standard errors from the sandwich `(G'WG)^-1 G'WVWG (G'WG)^-1`, scaled
/// by `1/n` and square-rooted. `w = None` means the identity weight. Fails
/// when `G'WG` is rank deficient.
pub fn sandwich_se(
    g: &DMatrix<f64>,
    w: Option<&DMatrix<f64>>,
    v: &DMatrix<f64>,
    n: usize,
) -> Result<Vec<f64>, EstimError> {
    let q = g.nrows();
    let p = g.ncols();
    if v.nrows() != q || v.ncols() != q {
        return Err(EstimError::Config(format!(
            "variance is {}x{} but the jacobian has {q} rows",
            v.nrows(),
            v.ncols()
        )));
    }
    if n == 0 {
        return Err(EstimError::Config("sample size must be positive".into()));
    }
    let wg = match w {
        Some(w) => {
            if w.nrows() != q || w.ncols() != q {
                return Err(EstimError::Config("weight matrix shape mismatch".into()));
            }
            w * g
        }
        None => g.clone(),
    };
    let bread = g.transpose() * &wg;
    let bread_inv = bread.clone().try_inverse().ok_or_else(|| {
        EstimError::Numerical("the jacobian is rank deficient under this weighting".into())
    })?;
    let meat = wg.transpose() * v * &wg;
    let sigma = &bread_inv * meat * bread_inv.transpose();
    let mut se = Vec::with_capacity(p);
    for j in 0..p {
        let var = sigma[(j, j)] / n as f64;
        if var < -1e-10 || !var.is_finite() {
            return Err(EstimError::Numerical(format!(
                "negative or non-finite variance for coordinate {j}: {var}"
            )));
        }
        se.push(var.max(0.0).sqrt());
    }
    Ok(se)
}

/// Cross-sectional variance of per-observation moment differences.
///
/// Row i of each input is the moment contribution of observation i, on the
/// data side and averaged-over-simulations side respectively. The estimate
/// is the sample covariance of the row differences (denominator `n - 1`).
pub fn variance_pooled(
    data_contrib: &DMatrix<f64>,
    sim_contrib: &DMatrix<f64>,
) -> Result<DMatrix<f64>, EstimError> {
    if data_contrib.shape() != sim_contrib.shape() {
        return Err(EstimError::Config(format!(
            "contribution shapes differ: {:?} vs {:?}",
            data_contrib.shape(),
            sim_contrib.shape()
        )));
    }
    let n = data_contrib.nrows();
    if n < 2 {
        return Err(EstimError::Config(
            "at least two observations are needed for a variance".into(),
        ));
    }
    let diff = data_contrib - sim_contrib;
    sample_covariance(&diff)
}

/// Sample covariance of the rows of `rows` with denominator `n - 1`.
pub fn sample_covariance(rows: &DMatrix<f64>) -> Result<DMatrix<f64>, EstimError> {
    let n = rows.nrows();
    if n < 2 {
        return Err(EstimError::Config(
            "at least two observations are needed for a variance".into(),
        ));
    }
    let mean = rows.row_mean();
    let mut centered = rows.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    Ok(centered.transpose() * &centered / (n as f64 - 1.0))
}

/// Default Bartlett bandwidth: `floor(4 * (T/100)^(2/9))`.
pub fn hac_default_bandwidth(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Newey–West long-run variance of a (demeaned internally) series with a
/// Bartlett kernel: `G_0 + sum_k (1 - k/(B+1)) (G_k + G_k')` where
/// `G_k = (1/T) sum_t x_t x_{t+k}'`. Pass `bandwidth = None` to use
/// [`hac_default_bandwidth`].
pub fn variance_hac(
    series: &DMatrix<f64>,
    bandwidth: Option<usize>,
) -> Result<DMatrix<f64>, EstimError> {
    let t = series.nrows();
    let q = series.ncols();
    if t < 2 {
        return Err(EstimError::Config(
            "at least two periods are needed for a long-run variance".into(),
        ));
    }
    let b = bandwidth.unwrap_or_else(|| hac_default_bandwidth(t));
    if b >= t {
        return Err(EstimError::Config(format!(
            "bandwidth {b} must be smaller than the series length {t}"
        )));
    }
    let mean = series.row_mean();
    let mut x = series.clone();
    for mut row in x.row_iter_mut() {
        row -= &mean;
    }
    let mut v = DMatrix::zeros(q, q);
    for k in 0..=b {
        let mut gamma = DMatrix::zeros(q, q);
        for s in 0..t - k {
            let a = x.row(s);
            let c = x.row(s + k);
            gamma += a.transpose() * c;
        }
        gamma /= t as f64;
        if k == 0 {
            v += &gamma;
        } else {
            let weight = 1.0 - k as f64 / (b as f64 + 1.0);
            v += (&gamma + gamma.transpose()) * weight;
        }
    }
    Ok(v)
}

/// Simulation variance across independent re-randomisations of the draw
/// keys. Simulates the model at `theta` once per re-randomised key, records
/// the simulated moment vector, and returns `n` times the sample covariance
/// of those vectors so the result is on the same scale as the per-observation
/// variance `V`. Requires a randomised quasi-Monte Carlo method and
/// `r_count >= 2`.
pub fn variance_repeated_scramble(
    model: &dyn ModelSpec,
    spec: &DrawSpec,
    data: &Dataset,
    theta: &[f64],
    r_count: usize,
) -> Result<DMatrix<f64>, EstimError> {
    if !spec.method.is_randomized_qmc() {
        return Err(EstimError::Config(
            "repeated-scramble variance requires a randomised quasi-Monte Carlo method".into(),
        ));
    }
    if r_count < 2 {
        return Err(EstimError::Config(
            "at least two re-randomisations are needed".into(),
        ));
    }
    let q = model.moment_dim();
    let mut rows = DMatrix::zeros(r_count, q);
    for r in 0..r_count {
        let shocks = make_gaussian(&spec.rerandomized(r as u64))?;
        let sim = model.simulate(theta, &shocks, data)?;
        let psi: DVector<f64> = model.moments(&sim)?;
        for j in 0..q {
            rows[(r, j)] = psi[j];
        }
    }
    let cov = sample_covariance(&rows)?;
    Ok(cov * data.n_units() as f64)
}
