//! The Monte-Carlo replication study: simulate data at the true parameters,
//! fit every (method, S) estimator on each replication, summarise.

use std::time::Instant;

use rayon::prelude::*;

use super::{ExperimentConfig, MethodName, ModelName, SummaryRow, SummaryTable};
use crate::estimators::{estimate, Algorithm, EstimError, EstimationConfig, Weighting};
use crate::models::{Dataset, ModelSpec, Probit};
use crate::qmc::inv_normal_cdf;
use crate::rng::{derive_key, CounterRng};
use crate::samplers::{DrawMethod, DrawSpec, ScrambleLayout, ShockArray};

/// Runs the full study described by `config`. Statistics are computed over
/// converged replications only; non-convergence and simulation failures are
/// counted per grid cell. Deterministic given the config and master seed,
/// at any parallelism degree.
pub fn run_replication_study(config: &ExperimentConfig) -> Result<SummaryTable, EstimError> {
    config.validate()?;
    let combos = config.combos();
    let model = config.model.build();
    let pool = super::thread_pool(config.threads)?;

    let reps = config.replications;
    let outcomes: Vec<Vec<(Option<Vec<f64>>, f64)>> = pool.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| run_replication(config, model.as_ref(), &combos, r as u64))
            .collect()
    });

    let scale = (config.n as f64).sqrt();
    let names = model.theta_names();
    let mut rows = Vec::new();
    for (j, coef) in names.iter().enumerate() {
        for (c_idx, &(m, s)) in combos.iter().enumerate() {
            let estimates: Vec<f64> = outcomes
                .iter()
                .filter_map(|rep| rep[c_idx].0.as_ref().map(|theta| theta[j]))
                .collect();
            let runtime: f64 = outcomes.iter().map(|rep| rep[c_idx].1).sum::<f64>()
                / reps as f64;
            let failures = reps - estimates.len();
            let k = estimates.len();
            let (std, bias, degenerate) = if k >= 2 {
                let mean = estimates.iter().sum::<f64>() / k as f64;
                let var = estimates.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (k - 1) as f64;
                (var.sqrt(), mean - config.true_theta[j], false)
            } else if k == 1 {
                (f64::NAN, estimates[0] - config.true_theta[j], true)
            } else {
                (f64::NAN, f64::NAN, true)
            };
            rows.push(SummaryRow {
                coef: coef.to_string(),
                method: m.label().to_string(),
                s,
                sqrt_n_std: scale * std,
                bias_x100: 100.0 * bias,
                mean_runtime_ms: runtime,
                failures,
                degenerate,
            });
        }
    }
    Ok(SummaryTable {
        rows,
        replications: reps,
        include_timing: config.include_timing,
    })
}

/// One replication: returns `(theta_hat or None, runtime_ms)` per combo,
/// in combo order.
fn run_replication(
    config: &ExperimentConfig,
    model: &dyn ModelSpec,
    combos: &[(MethodName, usize)],
    r: u64,
) -> Vec<(Option<Vec<f64>>, f64)> {
    let data_seed = derive_key(config.master_seed, "data", r);
    let data = match generate_data(config, model, data_seed) {
        Ok(d) => d,
        // A data failure sinks every estimator of this replication.
        Err(_) => return vec![(None, 0.0); combos.len()],
    };
    let start = start_point(config, model, &data);
    let rep_seed = derive_key(config.master_seed, "sim", r);

    combos
        .iter()
        .map(|&(m, s)| {
            let clock = Instant::now();
            let theta = fit_one(config, model, &data, &start, m, s, rep_seed);
            (theta, clock.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

fn fit_one(
    config: &ExperimentConfig,
    model: &dyn ModelSpec,
    data: &Dataset,
    start: &[f64],
    m: MethodName,
    s: usize,
    rep_seed: u64,
) -> Option<Vec<f64>> {
    if m == MethodName::Mm {
        // Mean-variance moments are the parameters themselves.
        return model.moments(data).ok().map(|psi| psi.iter().copied().collect());
    }
    let sim_seed = derive_key(derive_key(rep_seed, m.label(), 0), "s", s as u64);
    let spec = draw_spec_for(config, model, m, s, sim_seed)?;
    let algorithm = algorithm_for(config.model, m);
    let mut est = EstimationConfig::new(algorithm, spec, start.to_vec());
    // Overidentified models re-weight with the inverse moment covariance;
    // just-identified ones gain nothing from it.
    if model.moment_dim() > model.theta_dim() {
        est.weighting = Weighting::TwoStep;
    }
    match estimate(model, data, &est) {
        Ok(r) if r.converged => Some(r.theta_hat),
        _ => None,
    }
}

fn algorithm_for(model: ModelName, m: MethodName) -> Algorithm {
    match m {
        MethodName::Smm | MethodName::Antithetic => {
            if model == ModelName::Arma {
                Algorithm::DynamicSmm
            } else {
                Algorithm::StaticSmm
            }
        }
        MethodName::ScrambledPooled => Algorithm::StaticScrambledPooled,
        MethodName::ScrambledPerSample => Algorithm::StaticScrambledPerSample,
        MethodName::DynamicQmcOnly => Algorithm::DynamicQmcOnly,
        MethodName::DynamicHybrid => Algorithm::DynamicHybrid,
        MethodName::Mm => unreachable!("handled before dispatch"),
    }
}

fn draw_spec_for(
    config: &ExperimentConfig,
    model: &dyn ModelSpec,
    m: MethodName,
    s: usize,
    seed: u64,
) -> Option<DrawSpec> {
    let method = match m {
        MethodName::Smm => DrawMethod::PseudoRandom,
        MethodName::Antithetic => DrawMethod::Antithetic,
        MethodName::ScrambledPooled
        | MethodName::ScrambledPerSample
        | MethodName::DynamicQmcOnly
        | MethodName::DynamicHybrid => DrawMethod::ScrambledSobol,
        MethodName::Mm => return None,
    };
    let d = match m {
        MethodName::DynamicQmcOnly => model.as_dynamic()?.block_shock_dim(),
        MethodName::DynamicHybrid => model.as_dynamic()?.block_len() - 1,
        _ => model.shock_dim(),
    };
    let layout = if m == MethodName::ScrambledPerSample {
        ScrambleLayout::PerSample
    } else {
        ScrambleLayout::Pooled
    };
    Some(DrawSpec { method, n: config.n, s, d, layout, seed })
}

/// Simulates one data replication at the true parameters from a stream keyed
/// by the data seed alone.
fn generate_data(
    config: &ExperimentConfig,
    model: &dyn ModelSpec,
    data_seed: u64,
) -> Result<Dataset, EstimError> {
    simulate_study_data(config.model, &config.true_theta, config.n, data_seed, model)
}

/// Simulates a dataset of `n` units (or one path of `n` periods) at
/// `theta0`, deterministically in `seed`. The same generator seeds the
/// replication studies, so a single simulated dataset can be matched to a
/// study replication.
pub fn simulate_study_data(
    model_name: ModelName,
    theta0: &[f64],
    n: usize,
    data_seed: u64,
    model: &dyn ModelSpec,
) -> Result<Dataset, EstimError> {
    let mut rng = CounterRng::new(derive_key(data_seed, "shocks", 0));
    let mut z = move || -> Result<f64, EstimError> {
        Ok(inv_normal_cdf(rng.next_unit_open())?)
    };
    match model_name {
        ModelName::MeanVariance => {
            let sd = theta0[1].sqrt();
            let mut y = Vec::with_capacity(n);
            for _ in 0..n {
                y.push(theta0[0] + sd * z()?);
            }
            Ok(Dataset::cross_section(y))
        }
        ModelName::Probit => {
            let mut x = Vec::with_capacity(n);
            for _ in 0..n {
                x.push(z()?);
            }
            let mut y = Vec::with_capacity(n);
            for &xi in &x {
                let latent = theta0[0] + theta0[1] * xi + z()?;
                y.push(f64::from(latent >= 0.0));
            }
            Ok(Dataset::with_covariates(y, x))
        }
        ModelName::Arma => {
            let dynamic = model.as_dynamic().expect("the model is dynamic");
            let init = dynamic.stationary_init(theta0, z()?, z()?)?;
            let mut e = Vec::with_capacity(n);
            for _ in 0..n {
                e.push(z()?);
            }
            Ok(Dataset::panel(dynamic.simulate_path(theta0, &e, init)?, n))
        }
        ModelName::HetIncome => {
            let d = model.shock_dim();
            let mut values = Vec::with_capacity(n * d);
            for _ in 0..n * d {
                values.push(z()?);
            }
            let spec = DrawSpec {
                method: DrawMethod::PseudoRandom,
                n: n,
                s: 1,
                d,
                layout: ScrambleLayout::Pooled,
                seed: data_seed,
            };
            let shocks = ShockArray::from_values(spec, values);
            let placeholder = Dataset::cross_section(Vec::new());
            Ok(model.simulate(theta0, &shocks, &placeholder)?)
        }
    }
}

/// The optimiser start shared by every estimator on a replication: data
/// moments where they invert cheaply, the true parameters otherwise.
fn start_point(config: &ExperimentConfig, model: &dyn ModelSpec, data: &Dataset) -> Vec<f64> {
    match config.model {
        ModelName::MeanVariance => model
            .moments(data)
            .map(|m| {
                let bounds = model.theta_box();
                m.iter()
                    .zip(bounds)
                    .map(|(&v, (lo, hi))| v.clamp(lo + 1e-6, hi - 1e-6))
                    .collect()
            })
            .unwrap_or_else(|_| config.true_theta.clone()),
        ModelName::Probit => Probit
            .start_from_data(data)
            .unwrap_or_else(|_| config.true_theta.clone()),
        ModelName::Arma | ModelName::HetIncome => config.true_theta.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelName::MeanVariance,
            true_theta: vec![0.0, 1.0],
            n: 100,
            t: None,
            s_list: vec![1, 2],
            methods: vec![MethodName::Mm, MethodName::Smm, MethodName::ScrambledPooled],
            replications: 20,
            master_seed: 1,
            include_timing: false,
            threads: Some(2),
        }
    }

    #[test]
    fn study_is_deterministic_and_thread_independent() {
        let mut config = small_config();
        config.threads = Some(1);
        let a = run_replication_study(&config).unwrap();
        config.threads = Some(4);
        let b = run_replication_study(&config).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn changing_methods_does_not_move_other_cells() {
        let mut config = small_config();
        let full = run_replication_study(&config).unwrap();
        config.methods = vec![MethodName::Smm];
        let partial = run_replication_study(&config).unwrap();
        for row in &partial.rows {
            let same = full.row(&row.coef, &row.method, row.s).unwrap();
            assert_eq!(row.sqrt_n_std, same.sqrt_n_std);
            assert_eq!(row.bias_x100, same.bias_x100);
        }
    }

    #[test]
    fn mm_cells_have_no_failures_and_tight_spread() {
        let table = run_replication_study(&small_config()).unwrap();
        let row = table.row("mu", "mm", 0).unwrap();
        assert_eq!(row.failures, 0);
        assert!(row.sqrt_n_std > 0.5 && row.sqrt_n_std < 1.5, "{}", row.sqrt_n_std);
    }

    #[test]
    fn single_replication_is_degenerate_but_reported() {
        let mut config = small_config();
        config.replications = 1;
        let table = run_replication_study(&config).unwrap();
        assert!(table.rows.iter().all(|r| r.degenerate));
        let csv = table.to_csv();
        assert!(csv.lines().count() > 1);
        // The std column is blank, never a fake zero.
        assert!(csv.lines().nth(1).unwrap().contains(",,"));
    }

    #[test]
    fn incompatible_grids_fail_before_any_work() {
        let mut config = small_config();
        config.methods = vec![MethodName::DynamicQmcOnly];
        assert!(matches!(
            run_replication_study(&config),
            Err(EstimError::Config(_))
        ));
        let mut config2 = small_config();
        config2.model = ModelName::Probit;
        config2.true_theta = vec![1.0, 1.0];
        config2.methods = vec![MethodName::Mm];
        assert!(matches!(
            run_replication_study(&config2),
            Err(EstimError::Config(_))
        ));
    }

    #[test]
    fn antithetic_skips_odd_s() {
        let mut config = small_config();
        config.methods = vec![MethodName::Antithetic];
        config.s_list = vec![1, 2];
        let combos = config.combos();
        assert_eq!(combos, vec![(MethodName::Antithetic, 2)]);
    }
}
