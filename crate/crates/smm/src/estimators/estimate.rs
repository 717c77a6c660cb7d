//! The estimation driver: prepares draws once (common random numbers),
//! minimises the weighted moment gap with a simplex search, and assembles
//! standard errors.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use super::nelder_mead::{nelder_mead, NmResult};
use super::variance::{
    sample_covariance, sandwich_se, variance_hac, variance_pooled, variance_repeated_scramble,
};
use super::{Algorithm, EstimError, EstimationConfig, EstimationResult, SeMethod, Weighting};
use crate::models::{Dataset, ModelError, ModelSpec};
use crate::rng::derive_key;
use crate::samplers::{make_gaussian, DrawMethod, DrawSpec, ScrambleLayout, ShockArray};

/// The quadratic form `gap' W gap`; `None` is the identity weight.
pub fn quadform_gap(gap: &DVector<f64>, w: Option<&DMatrix<f64>>) -> f64 {
    match w {
        Some(w) => (gap.transpose() * w * gap)[(0, 0)],
        None => gap.norm_squared(),
    }
}

/// Central finite-difference jacobian of a moment map, `q x p` with one
/// column per parameter. The step for coordinate `j` is
/// `step * max(1, |theta_j|)`; `step` must be positive.
pub fn jacobian_fd(
    f: &dyn Fn(&[f64]) -> Result<DVector<f64>, EstimError>,
    theta: &[f64],
    step: f64,
) -> Result<DMatrix<f64>, EstimError> {
    if !(step > 0.0) {
        return Err(EstimError::Config(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let p = theta.len();
    let mut columns: Vec<DVector<f64>> = Vec::with_capacity(p);
    for j in 0..p {
        let h = step * theta[j].abs().max(1.0);
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        up[j] += h;
        down[j] -= h;
        let diff = (f(&up)? - f(&down)?) / (2.0 * h);
        columns.push(diff);
    }
    let q = columns[0].len();
    Ok(DMatrix::from_fn(q, p, |r, c| columns[c][r]))
}

/// Fits model parameters by matching the model's own moments.
pub fn estimate(
    model: &dyn ModelSpec,
    data: &Dataset,
    config: &EstimationConfig,
) -> Result<EstimationResult, EstimError> {
    run(model, data, config, &|d| model.moments(d), true)
}

/// Fits model parameters by matching a caller-supplied auxiliary statistic
/// instead of the model's moments. Standard errors other than
/// [`SeMethod::None`] need per-observation contributions of the statistic,
/// which a bare closure cannot supply, so they are rejected here.
pub fn indirect_inference(
    model: &dyn ModelSpec,
    data: &Dataset,
    config: &EstimationConfig,
    aux: &dyn Fn(&Dataset) -> Result<DVector<f64>, ModelError>,
) -> Result<EstimationResult, EstimError> {
    run(model, data, config, aux, false)
}

fn run(
    model: &dyn ModelSpec,
    data: &Dataset,
    config: &EstimationConfig,
    aux: &dyn Fn(&Dataset) -> Result<DVector<f64>, ModelError>,
    aux_is_model_moments: bool,
) -> Result<EstimationResult, EstimError> {
    if config.start.len() != model.theta_dim() {
        return Err(EstimError::Config(format!(
            "start point has {} coordinates but the model has {} parameters",
            config.start.len(),
            model.theta_dim()
        )));
    }
    let draws = prepare_draws(model, config)?;
    let theta_box = model.theta_box();
    let psi_data = aux(data)?;

    let sim_moments = |theta: &[f64]| -> Result<DVector<f64>, EstimError> {
        let sim = simulate_for(model, config, &draws, theta, data)?;
        Ok(aux(&sim)?)
    };

    let w_fixed = match &config.weighting {
        Weighting::Identity | Weighting::TwoStep => None,
        Weighting::Fixed(m) => {
            let q = psi_data.len();
            if m.nrows() != q || m.ncols() != q {
                return Err(EstimError::Config("weight matrix shape mismatch".into()));
            }
            let asym = (m - m.transpose()).abs().max();
            if asym > 1e-8 * (1.0 + m.abs().max()) {
                return Err(EstimError::Config("weight matrix must be symmetric".into()));
            }
            if m.clone().cholesky().is_none() && m.iter().any(|&x| x != 0.0) {
                // Allow semidefinite limits but reject indefinite matrices.
                let eig = m.clone().symmetric_eigen();
                if eig.eigenvalues.iter().any(|&l| l < -1e-10) {
                    return Err(EstimError::Config(
                        "weight matrix must be positive semidefinite".into(),
                    ));
                }
            }
            Some(m.clone())
        }
    };

    let first = minimize(&sim_moments, &psi_data, w_fixed.as_ref(), &theta_box, config)?;

    let (w_final, nm) = if matches!(config.weighting, Weighting::TwoStep) {
        if !aux_is_model_moments {
            return Err(EstimError::Config(
                "two-step weighting needs model moment contributions".into(),
            ));
        }
        // Weighting only needs a positive-definite target, so the
        // time-series branch uses the plain contribution covariance
        // (bandwidth 0): the kernel terms add sampling noise to the weight
        // matrix without improving the estimator it produces.
        let v = moment_variance(model, data, config, &draws, &first.x, Some(0))?;
        let mut w = v.try_inverse().ok_or_else(|| {
            EstimError::Numerical("first-stage moment variance is singular".into())
        })?;
        w = (&w + w.transpose()) * 0.5;
        let second = minimize(&sim_moments, &psi_data, Some(&w), &theta_box, config)?;
        (Some(w), second)
    } else {
        (w_fixed, first)
    };

    let gap = &psi_data - sim_moments(&nm.x)?;
    let std_errors = match config.se_method {
        SeMethod::None => None,
        _ => {
            if !aux_is_model_moments {
                return Err(EstimError::Config(
                    "standard errors need model moment contributions".into(),
                ));
            }
            Some(standard_errors(
                model,
                data,
                config,
                &draws,
                &nm.x,
                w_final.as_ref(),
                &sim_moments,
            )?)
        }
    };

    Ok(EstimationResult {
        theta_hat: nm.x,
        objective_value: nm.value,
        moment_gap: gap.iter().copied().collect(),
        std_errors,
        iterations: nm.iterations,
        evaluations: nm.evaluations,
        converged: nm.converged,
    })
}

fn minimize(
    sim_moments: &dyn Fn(&[f64]) -> Result<DVector<f64>, EstimError>,
    psi_data: &DVector<f64>,
    w: Option<&DMatrix<f64>>,
    theta_box: &[(f64, f64)],
    config: &EstimationConfig,
) -> Result<NmResult, EstimError> {
    let pending: RefCell<Option<EstimError>> = RefCell::new(None);
    let f = |theta: &[f64]| -> f64 {
        if pending.borrow().is_some() {
            return f64::INFINITY;
        }
        let inside = theta
            .iter()
            .zip(theta_box)
            .all(|(v, (lo, hi))| v >= lo && v <= hi);
        if !inside {
            return f64::INFINITY;
        }
        match sim_moments(theta) {
            Ok(psi_sim) => quadform_gap(&(psi_data - psi_sim), w),
            Err(e) => {
                *pending.borrow_mut() = Some(e);
                f64::INFINITY
            }
        }
    };
    let nm = nelder_mead(f, &config.start, config.tolerance, config.max_iter)
        .map_err(EstimError::Numerical)?;
    if let Some(e) = pending.into_inner() {
        return Err(e);
    }
    Ok(nm)
}

/// Draw material prepared once per estimation so every trial parameter sees
/// the same random numbers.
enum SimDraws {
    /// One shock row per simulated unit; the model's own `simulate` runs.
    Whole(ShockArray),
    /// One stationary block per shock row.
    Blocks { shocks: ShockArray, block_len: usize },
    /// Pseudo-random path shocks provide block starting points; scrambled
    /// rows continue each block.
    Hybrid {
        path_shocks: Vec<f64>,
        scrambled: ShockArray,
        block_len: usize,
    },
}

fn prepare_draws(model: &dyn ModelSpec, config: &EstimationConfig) -> Result<SimDraws, EstimError> {
    let spec = &config.draw_spec;
    let wrong_method = |need: &str| {
        Err(EstimError::Config(format!(
            "{:?} requires {need}, got {:?} with {:?} layout",
            config.algorithm, spec.method, spec.layout
        )))
    };
    match config.algorithm {
        Algorithm::StaticSmm | Algorithm::DynamicSmm => {
            if !matches!(spec.method, DrawMethod::PseudoRandom | DrawMethod::Antithetic) {
                return wrong_method("pseudo-random or antithetic draws");
            }
            check_shock_dim(spec, model.shock_dim())?;
            Ok(SimDraws::Whole(make_gaussian(spec)?))
        }
        Algorithm::IndirectInference => {
            check_shock_dim(spec, model.shock_dim())?;
            Ok(SimDraws::Whole(make_gaussian(spec)?))
        }
        Algorithm::StaticScrambledPooled => {
            if !spec.method.is_randomized_qmc() || spec.layout != ScrambleLayout::Pooled {
                return wrong_method("randomised quasi-Monte Carlo draws pooled over samples");
            }
            check_shock_dim(spec, model.shock_dim())?;
            Ok(SimDraws::Whole(make_gaussian(spec)?))
        }
        Algorithm::StaticScrambledPerSample => {
            if !spec.method.is_randomized_qmc() || spec.layout != ScrambleLayout::PerSample {
                return wrong_method("randomised quasi-Monte Carlo draws scrambled per sample");
            }
            check_shock_dim(spec, model.shock_dim())?;
            Ok(SimDraws::Whole(make_gaussian(spec)?))
        }
        Algorithm::DynamicQmcOnly => {
            let dm = model
                .as_dynamic()
                .ok_or_else(|| EstimError::Config("this model has no dynamic extension".into()))?;
            if !(spec.method.is_randomized_qmc() || spec.method == DrawMethod::Sobol) {
                return wrong_method("quasi-Monte Carlo draws");
            }
            check_shock_dim(spec, dm.block_shock_dim())?;
            Ok(SimDraws::Blocks {
                shocks: make_gaussian(spec)?,
                block_len: dm.block_len(),
            })
        }
        Algorithm::DynamicHybrid => {
            let dm = model
                .as_dynamic()
                .ok_or_else(|| EstimError::Config("this model has no dynamic extension".into()))?;
            if !spec.method.is_randomized_qmc() {
                return wrong_method("randomised quasi-Monte Carlo draws");
            }
            check_shock_dim(spec, dm.block_len() - 1)?;
            let path_spec = DrawSpec {
                method: DrawMethod::PseudoRandom,
                n: spec.rows() + config.burn_in,
                s: 1,
                d: 1,
                layout: ScrambleLayout::Pooled,
                seed: derive_key(spec.seed, "mc-path", 0),
            };
            Ok(SimDraws::Hybrid {
                path_shocks: make_gaussian(&path_spec)?.values().to_vec(),
                scrambled: make_gaussian(spec)?,
                block_len: dm.block_len(),
            })
        }
    }
}

fn check_shock_dim(spec: &DrawSpec, need: usize) -> Result<(), EstimError> {
    if spec.d != need {
        return Err(EstimError::Config(format!(
            "draw dimension {} does not match the {need} shock coordinates consumed per unit",
            spec.d
        )));
    }
    Ok(())
}

fn simulate_for(
    model: &dyn ModelSpec,
    config: &EstimationConfig,
    draws: &SimDraws,
    theta: &[f64],
    data: &Dataset,
) -> Result<Dataset, EstimError> {
    match draws {
        SimDraws::Whole(shocks) => Ok(model.simulate(theta, shocks, data)?),
        SimDraws::Blocks { shocks, block_len } => {
            let dm = model.as_dynamic().expect("checked in prepare_draws");
            let mut y = Vec::with_capacity(shocks.rows() * block_len);
            for i in 0..shocks.rows() {
                y.extend(dm.simulate_block(theta, shocks.row(i))?);
            }
            Ok(Dataset::panel(y, *block_len))
        }
        SimDraws::Hybrid {
            path_shocks,
            scrambled,
            block_len,
        } => {
            let dm = model.as_dynamic().expect("checked in prepare_draws");
            let path = dm.simulate_path(theta, path_shocks, (0.0, 0.0))?;
            let burn = config.burn_in;
            let mut y = Vec::with_capacity(scrambled.rows() * block_len);
            for i in 0..scrambled.rows() {
                let y0 = path[burn + i];
                let e0 = path_shocks[burn + i];
                y.push(y0);
                y.extend(dm.simulate_path(theta, scrambled.row(i), (y0, e0))?);
            }
            Ok(Dataset::panel(y, *block_len))
        }
    }
}

/// Simulation-averaged moment contributions aligned with the data rows:
/// row `i` is the mean over simulated samples of the contribution of the
/// simulated observation sharing index `i`.
fn averaged_sim_contributions(
    model: &dyn ModelSpec,
    sim: &Dataset,
    data_rows: usize,
) -> Result<DMatrix<f64>, EstimError> {
    let c = model.moment_contributions(sim)?;
    if c.nrows() % data_rows != 0 {
        return Err(EstimError::Config(format!(
            "simulated contributions ({} rows) do not tile the {} data rows",
            c.nrows(),
            data_rows
        )));
    }
    let s = c.nrows() / data_rows;
    let mut avg = DMatrix::zeros(data_rows, c.ncols());
    for s_idx in 0..s {
        for i in 0..data_rows {
            for j in 0..c.ncols() {
                avg[(i, j)] += c[(s_idx * data_rows + i, j)] / s as f64;
            }
        }
    }
    Ok(avg)
}

/// The moment variance `V` used both for two-step weighting and for
/// sandwich standard errors.
fn moment_variance(
    model: &dyn ModelSpec,
    data: &Dataset,
    config: &EstimationConfig,
    draws: &SimDraws,
    theta: &[f64],
    bandwidth: Option<usize>,
) -> Result<DMatrix<f64>, EstimError> {
    let data_c = model.moment_contributions(data)?;
    if data.t > 1 {
        // Time-series data: long-run variance of the data contributions.
        variance_hac(&data_c, bandwidth)
    } else {
        let sim = simulate_for(model, config, draws, theta, data)?;
        let sim_avg = averaged_sim_contributions(model, &sim, data_c.nrows())?;
        variance_pooled(&data_c, &sim_avg)
    }
}

#[allow(clippy::too_many_arguments)]
fn standard_errors(
    model: &dyn ModelSpec,
    data: &Dataset,
    config: &EstimationConfig,
    draws: &SimDraws,
    theta: &[f64],
    w: Option<&DMatrix<f64>>,
    sim_moments: &dyn Fn(&[f64]) -> Result<DVector<f64>, EstimError>,
) -> Result<Vec<f64>, EstimError> {
    let g = jacobian_fd(sim_moments, theta, 1e-5)?;
    match config.se_method {
        SeMethod::None => unreachable!("handled by the caller"),
        SeMethod::SandwichPooled => {
            if data.t > 1 {
                return Err(EstimError::Config(
                    "pooled standard errors need cross-sectional data".into(),
                ));
            }
            let data_c = model.moment_contributions(data)?;
            let sim = simulate_for(model, config, draws, theta, data)?;
            let sim_avg = averaged_sim_contributions(model, &sim, data_c.nrows())?;
            let v = variance_pooled(&data_c, &sim_avg)?;
            sandwich_se(&g, w, &v, data_c.nrows())
        }
        SeMethod::SandwichHac { bandwidth } => {
            let data_c = model.moment_contributions(data)?;
            let v = variance_hac(&data_c, bandwidth)?;
            sandwich_se(&g, w, &v, data_c.nrows())
        }
        SeMethod::RepeatedScramble { replicates } => {
            let data_c = model.moment_contributions(data)?;
            let v_data = sample_covariance(&data_c)?;
            let v_sim = variance_repeated_scramble(
                model,
                &config.draw_spec,
                data,
                theta,
                replicates,
            )?;
            let v = v_data + v_sim;
            sandwich_se(&g, w, &v, data_c.nrows())
        }
    }
}
