//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line. Run with `--nocapture` to see the lines for passing
//! criteria. The heaviest studies carry `#[ignore]`; a reduced version of
//! each runs by default.

use rayon::prelude::*;
use smm::estimators::{estimate, Algorithm, EstimationConfig, SeMethod};
use smm::harness::{
    run_rate_study, run_replication_study, simulate_study_data, table1_config, table2_config,
    table3_config, het_income_config, Integrand, ModelName, RateMethod,
};
use smm::models::{Arma, DynamicModel, Probit};
use smm::qmc::{
    expand_direction_numbers, inv_normal_cdf, scramble_with, sobol_points, DirectionTable,
    PointMatrix, Provenance,
};
use smm::rng::{derive_key, CounterRng};
use smm::samplers::{make_uniform, DrawMethod, DrawSpec, ScrambleLayout};

/// Prints one PASS/FAIL line for a criterion and panics on failure.
fn report(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance {name}: PASS");
    } else {
        println!("acceptance {name}: FAIL");
        panic!("{name}:\n  {}", failures.join("\n  "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, detail: String) {
    if !ok {
        failures.push(detail);
    }
}

fn within(failures: &mut Vec<String>, what: &str, value: f64, target: f64, tol: f64) {
    check(
        failures,
        (value - target).abs() <= tol,
        format!("{what}: got {value:.4}, want {target} +- {tol}"),
    );
}

#[test]
fn a01_sobol_golden_values() {
    let mut f = Vec::new();
    let pts = sobol_points(DirectionTable::default_table(), 5, 1, 0).unwrap();
    let golden = [0.0, 0.5, 0.75, 0.25, 0.375];
    for (i, &g) in golden.iter().enumerate() {
        check(&mut f, pts.get(i, 0) == g, format!("point {i}: {} != {g}", pts.get(i, 0)));
    }
    // x^2 + x + 1: degree 2, one interior coefficient, m = (1, 3).
    let v = expand_direction_numbers(&[1], 2, &[1, 3], 4).unwrap();
    for (i, &g) in [0.5, 0.75, 0.375, 0.5625].iter().enumerate() {
        check(&mut f, v[i] == g, format!("v{}: {} != {g}", i + 1, v[i]));
    }
    report("01 sobol golden values", f);
}

#[test]
fn a02_scramble_golden_table() {
    let mut f = Vec::new();
    let input = PointMatrix::new(4, 1, vec![0.125, 0.375, 0.500, 0.875], Provenance::Sobol)
        .unwrap();

    // Stage one: the root permutation flips the leading digit of every point.
    let stage1 = scramble_with(&input, |_, depth, _| depth == 1).unwrap();
    for (i, &g) in [0.625, 0.875, 0.000, 0.375].iter().enumerate() {
        check(&mut f, stage1.get(i, 0) == g, format!("stage1[{i}]: {} != {g}", stage1.get(i, 0)));
    }

    // Stage two adds depth-2 permutations conditioned on the original
    // leading digit: identity below 1/2, a flip at or above it.
    let stage2 = scramble_with(&input, |_, depth, prefix| {
        depth == 1 || (depth == 2 && prefix == 1)
    })
    .unwrap();
    // KNOWN RED: the worked example this test encodes lists the third point
    // as 0.500, but that value is inconsistent with the example's own
    // permutation rules. 0.500 = .100 in binary; the root flip turns the
    // leading 1 into 0, and the depth-2 permutation for points whose
    // original leading digit was 1 flips the second digit to 1, giving
    // .010 = 0.250. No choice of the two stated depth-2 permutations can
    // produce 0.500, because the leading digit is already fixed to 0. The
    // example is asserted as given so the discrepancy stays visible instead
    // of being silently corrected.
    for (i, &g) in [0.625, 0.875, 0.500, 0.125].iter().enumerate() {
        check(&mut f, stage2.get(i, 0) == g, format!("stage2[{i}]: {} != {g}", stage2.get(i, 0)));
    }
    report("02 scramble golden table", f);
}

#[test]
fn a03_scramble_preserves_one_dimensional_nets() {
    let mut f = Vec::new();
    for m in 4..=12u32 {
        let n = 1usize << m;
        for seed in 0..100u64 {
            let spec = DrawSpec {
                method: DrawMethod::ScrambledSobol,
                n,
                s: 1,
                d: 1,
                layout: ScrambleLayout::Pooled,
                seed,
            };
            let pts = make_uniform(&spec).unwrap();
            let mut counts = vec![0usize; n];
            for i in 0..n {
                counts[(pts.get(i, 0) * n as f64) as usize] += 1;
            }
            if counts.iter().any(|&c| c != 1) {
                check(&mut f, false, format!("m = {m}, seed {seed}: unbalanced intervals"));
                break;
            }
        }
    }
    report("03 net preservation", f);
}

#[test]
fn a04_integration_rate_slopes() {
    let mut f = Vec::new();
    let grid: Vec<usize> = (4..=12).map(|k| 1usize << k).collect();
    let study = run_rate_study(
        Integrand::Square,
        &[RateMethod::MonteCarlo, RateMethod::ScrambledSobol],
        &grid,
        100,
        7,
    )
    .unwrap();
    let mc = study.slope(RateMethod::MonteCarlo).unwrap();
    let scr = study.slope(RateMethod::ScrambledSobol).unwrap();
    check(&mut f, (-0.6..=-0.4).contains(&mc), format!("mc slope {mc:.3} outside [-0.6, -0.4]"));
    check(&mut f, scr <= -1.2, format!("scrambled slope {scr:.3} > -1.2"));
    report("04 integration rate slopes", f);
}

#[test]
fn a05_mean_variance_study() {
    let mut f = Vec::new();
    let mut config = table1_config(2000, 20260826);
    config.s_list = vec![1, 2];
    let table = run_replication_study(&config).unwrap();
    let cell = |coef: &str, method: &str, s: usize| table.row(coef, method, s).unwrap();

    within(&mut f, "sqrt_n_std mu scramble S=1", cell("mu", "scrambled_pooled", 1).sqrt_n_std, 1.00, 0.10);
    within(&mut f, "sqrt_n_std mu smm S=1", cell("mu", "smm", 1).sqrt_n_std, 1.44, 0.12);
    within(&mut f, "sqrt_n_std sigma2 scramble S=1", cell("sigma2", "scrambled_pooled", 1).sqrt_n_std, 1.44, 0.15);
    within(&mut f, "sqrt_n_std sigma2 smm S=1", cell("sigma2", "smm", 1).sqrt_n_std, 2.07, 0.20);
    within(&mut f, "sqrt_n_std sigma2 antithetic S=2", cell("sigma2", "antithetic", 2).sqrt_n_std, 2.03, 0.20);

    let scr_bias = cell("sigma2", "scrambled_pooled", 1).bias_x100;
    let smm_bias = cell("sigma2", "smm", 1).bias_x100;
    check(&mut f, scr_bias < 0.0, format!("sigma2 scramble bias {scr_bias:.3} not negative"));
    check(&mut f, smm_bias > 0.0, format!("sigma2 smm bias {smm_bias:.3} not positive"));
    report("05 mean-variance study", f);
}

#[test]
fn a06_probit_ordering_reduced() {
    let mut f = Vec::new();
    let mut config = table2_config(500, 31);
    config.n = 500;
    config.s_list = vec![1];
    config.methods = vec![
        smm::harness::MethodName::Smm,
        smm::harness::MethodName::ScrambledPerSample,
    ];
    let table = run_replication_study(&config).unwrap();
    let scr = table.row("theta1", "scrambled_per_sample", 1).unwrap().sqrt_n_std;
    let smm_std = table.row("theta1", "smm", 1).unwrap().sqrt_n_std;
    check(
        &mut f,
        scr < smm_std,
        format!("theta1: scramble {scr:.3} not below smm {smm_std:.3}"),
    );
    report("06 probit ordering (reduced)", f);
}

/// Full-size version: levels of the slope coefficient's spread plus a paired
/// bootstrap over the replication set.
#[test]
#[ignore = "tens of minutes; reduced version runs by default"]
fn a06_probit_ordering_full() {
    let mut f = Vec::new();
    let (r, n) = (2000usize, 1000usize);
    let theta0 = [1.0, 1.0];
    let model = Probit;

    let fits: Vec<Option<(f64, f64)>> = (0..r as u64)
        .into_par_iter()
        .map(|rep| {
            let data =
                simulate_study_data(ModelName::Probit, &theta0, n, derive_key(5150, "data", rep), &model)
                    .ok()?;
            let start = model.start_from_data(&data).ok()?;
            let run = |method, algorithm, tag: &str| {
                let spec = DrawSpec {
                    method,
                    n,
                    s: 1,
                    d: 1,
                    layout: if method == DrawMethod::ScrambledSobol {
                        ScrambleLayout::PerSample
                    } else {
                        ScrambleLayout::Pooled
                    },
                    seed: derive_key(derive_key(5150, "sim", rep), tag, 0),
                };
                let config = EstimationConfig::new(algorithm, spec, start.clone());
                estimate(&model, &data, &config).ok().filter(|res| res.converged)
            };
            let smm_fit = run(DrawMethod::PseudoRandom, Algorithm::StaticSmm, "smm")?;
            let scr_fit = run(
                DrawMethod::ScrambledSobol,
                Algorithm::StaticScrambledPerSample,
                "scramble",
            )?;
            Some((smm_fit.theta_hat[0], scr_fit.theta_hat[0]))
        })
        .collect();

    let pairs: Vec<(f64, f64)> = fits.into_iter().flatten().collect();
    check(&mut f, pairs.len() >= (r * 98) / 100, format!("only {} of {r} pairs converged", pairs.len()));

    let scaled_std = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        (n as f64).sqrt() * var.sqrt()
    };
    let smm_std = scaled_std(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let scr_std = scaled_std(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    within(&mut f, "sqrt_n_std theta1 smm S=1", smm_std, 2.38, 0.15);
    within(&mut f, "sqrt_n_std theta1 scramble S=1", scr_std, 2.14, 0.15);

    // Paired bootstrap: resample replications, demand the ordering holds in
    // at least 95% of resamples.
    let mut rng = CounterRng::new(derive_key(5150, "bootstrap", 0));
    let b = 1000;
    let mut hold = 0usize;
    for _ in 0..b {
        let sample: Vec<(f64, f64)> = (0..pairs.len())
            .map(|_| pairs[(rng.next_u64() % pairs.len() as u64) as usize])
            .collect();
        let s_smm = scaled_std(&sample.iter().map(|p| p.0).collect::<Vec<_>>());
        let s_scr = scaled_std(&sample.iter().map(|p| p.1).collect::<Vec<_>>());
        if s_scr < s_smm {
            hold += 1;
        }
    }
    let frac = hold as f64 / b as f64;
    check(&mut f, frac >= 0.95, format!("ordering held in {frac:.3} of bootstrap resamples"));
    report("06 probit ordering (full)", f);
}

#[test]
fn a07_arma_ordering() {
    let mut f = Vec::new();
    let mut config = table3_config(1000, 77);
    config.s_list = vec![1];
    config.methods = vec![
        smm::harness::MethodName::Smm,
        smm::harness::MethodName::DynamicQmcOnly,
        smm::harness::MethodName::DynamicHybrid,
    ];
    let table = run_replication_study(&config).unwrap();
    // KNOWN RED (middle column): the hybrid here matches the reference
    // values for the pure-MC and pure-scramble columns but lands at the
    // scramble's accuracy instead of between the two. The hybrid's extra
    // Monte-Carlo noise sits in the high-lag regression coefficients, and
    // the inverse-covariance re-weighting steers the parameter fit away
    // from exactly those directions, so the middle column collapses onto
    // the scramble column (and can tie or cross it within simulation
    // noise). The in-between target appears to require a less efficient
    // weighting, which would push the other two columns off their targets.
    // The checks are asserted as stated so the trade-off stays visible.
    for coef in ["rho", "vartheta", "sigma"] {
        let smm_std = table.row(coef, "smm", 1).unwrap().sqrt_n_std;
        let hybrid = table.row(coef, "dynamic_hybrid", 1).unwrap().sqrt_n_std;
        let scr = table.row(coef, "dynamic_qmc_only", 1).unwrap().sqrt_n_std;
        check(
            &mut f,
            scr < hybrid && hybrid < smm_std,
            format!("{coef}: want scramble < hybrid < smm, got {scr:.3}, {hybrid:.3}, {smm_std:.3}"),
        );
    }
    within(&mut f, "sqrt_T_std rho scramble", table.row("rho", "dynamic_qmc_only", 1).unwrap().sqrt_n_std, 1.20, 0.12);
    within(&mut f, "sqrt_T_std rho hybrid", table.row("rho", "dynamic_hybrid", 1).unwrap().sqrt_n_std, 1.39, 0.12);
    within(&mut f, "sqrt_T_std rho smm", table.row("rho", "smm", 1).unwrap().sqrt_n_std, 1.64, 0.12);
    report("07 arma ordering", f);
}

#[test]
fn a08_standard_error_coverage() {
    let mut f = Vec::new();
    let (r, n) = (2000usize, 100usize);
    let theta0 = [0.0, 1.0];
    let model = ModelName::MeanVariance.build();

    // covered[method][coef] counts CIs containing the truth.
    let tallies: Vec<[[usize; 2]; 2]> = (0..r as u64)
        .into_par_iter()
        .filter_map(|rep| {
            let data = simulate_study_data(
                ModelName::MeanVariance,
                &theta0,
                n,
                derive_key(808, "data", rep),
                model.as_ref(),
            )
            .ok()?;
            let moments = model.moments(&data).ok()?;
            let start = vec![
                moments[0].clamp(-5.0 + 1e-6, 5.0 - 1e-6),
                moments[1].clamp(1e-4 + 1e-6, 25.0 - 1e-6),
            ];
            let run = |method, algorithm, se_method, tag: &str| {
                let spec = DrawSpec {
                    method,
                    n,
                    s: 1,
                    d: 1,
                    layout: ScrambleLayout::Pooled,
                    seed: derive_key(derive_key(808, "sim", rep), tag, 0),
                };
                let mut config = EstimationConfig::new(algorithm, spec, start.clone());
                config.se_method = se_method;
                estimate(model.as_ref(), &data, &config).ok().filter(|res| res.converged)
            };
            let smm_fit = run(
                DrawMethod::PseudoRandom,
                Algorithm::StaticSmm,
                SeMethod::SandwichPooled,
                "smm",
            )?;
            let scr_fit = run(
                DrawMethod::ScrambledSobol,
                Algorithm::StaticScrambledPooled,
                SeMethod::RepeatedScramble { replicates: 50 },
                "scramble",
            )?;
            // Two-sided 95% intervals with the small-sample critical value
            // for n - 1 = 99 degrees of freedom.
            let crit = 1.9842;
            let mut tally = [[0usize; 2]; 2];
            for (m, fit) in [smm_fit, scr_fit].iter().enumerate() {
                let se = fit.std_errors.as_ref()?;
                for j in 0..2 {
                    if (fit.theta_hat[j] - theta0[j]).abs() <= crit * se[j] {
                        tally[m][j] = 1;
                    }
                }
            }
            Some(tally)
        })
        .collect();

    check(&mut f, tallies.len() >= (r * 98) / 100, format!("only {} of {r} replications usable", tallies.len()));
    // KNOWN RED (scramble sigma2 only): the sigma2 interval under the
    // scramble covers ~0.9275 (stable when re-measured at R = 6000), just
    // under the stated 0.93 floor. A symmetric Wald interval for a variance
    // at n = 100 undercovers because the estimator's sampling distribution
    // is right-skewed and its standard error shrinks exactly when the
    // estimate undershoots. The pseudo-random version passes only because
    // its extra simulation noise is symmetric and pads the interval; the
    // scramble removes that padding and exposes the skewness. The check is
    // asserted as stated rather than silently widened.
    for (m, method) in ["smm sandwich", "scramble repeated-scramble"].iter().enumerate() {
        for (j, coef) in ["mu", "sigma2"].iter().enumerate() {
            let rate = tallies.iter().map(|t| t[m][j]).sum::<usize>() as f64 / tallies.len() as f64;
            within(&mut f, &format!("coverage {method} {coef}"), rate, 0.95, 0.02);
        }
    }
    report("08 standard-error coverage", f);
}

#[test]
fn a09_arma_stationary_initializer_oracle() {
    let mut f = Vec::new();
    let theta = [0.5, 0.5, 1.0];

    // Implied second moments of the initializer, by direct sampling.
    let draws = 1_000_000usize;
    let mut rng = CounterRng::new(derive_key(909, "init", 0));
    let (mut yy, mut ye) = (0.0, 0.0);
    for _ in 0..draws {
        let z1 = inv_normal_cdf(rng.next_unit_open()).unwrap();
        let z2 = inv_normal_cdf(rng.next_unit_open()).unwrap();
        let (y, e) = Arma.stationary_init(&theta, z1, z2).unwrap();
        yy += y * y;
        ye += y * e;
    }
    let init_gamma0 = yy / draws as f64;
    let init_cov = ye / draws as f64;

    // Brute-force oracle: long simulated paths of the recursion itself.
    let chains = 100usize;
    let t = 100_000usize;
    let stats: Vec<(f64, f64)> = (0..chains as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = CounterRng::new(derive_key(909, "path", c));
            let (rho, vartheta, sigma) = (theta[0], theta[1], theta[2]);
            let (mut y, mut e_prev) = (0.0f64, 0.0f64);
            let (mut yy, mut ye) = (0.0, 0.0);
            for i in 0..t + 1000 {
                let e = sigma * inv_normal_cdf(rng.next_unit_open()).unwrap();
                y = rho * y + e + vartheta * e_prev;
                e_prev = e;
                if i >= 1000 {
                    yy += y * y;
                    ye += y * e;
                }
            }
            (yy / t as f64, ye / t as f64)
        })
        .collect();
    let mean = |pick: &dyn Fn(&(f64, f64)) -> f64| {
        stats.iter().map(pick).sum::<f64>() / chains as f64
    };
    let se = |pick: &dyn Fn(&(f64, f64)) -> f64, m: f64| {
        let var = stats.iter().map(|s| (pick(s) - m).powi(2)).sum::<f64>() / (chains - 1) as f64;
        (var / chains as f64).sqrt()
    };
    let path_gamma0 = mean(&|s| s.0);
    let path_cov = mean(&|s| s.1);
    let se_gamma0 = se(&|s| s.0, path_gamma0);
    let se_cov = se(&|s| s.1, path_cov);

    check(
        &mut f,
        (init_gamma0 - path_gamma0).abs() <= 4.0 * se_gamma0,
        format!("gamma0: init {init_gamma0:.4} vs path {path_gamma0:.4} (se {se_gamma0:.4})"),
    );
    check(
        &mut f,
        (init_cov - path_cov).abs() <= 4.0 * se_cov,
        format!("cov(y, e): init {init_cov:.4} vs path {path_cov:.4} (se {se_cov:.4})"),
    );
    // Analytic value: (1 + vartheta^2 + 2 rho vartheta) sigma^2 / (1 - rho^2).
    within(&mut f, "gamma0 vs analytic", path_gamma0, 7.0 / 3.0, 0.01);
    report("09 arma stationary initializer", f);
}

#[test]
#[ignore = "hours at full size"]
fn a10_income_process_spread_ratio() {
    let mut f = Vec::new();
    let config = het_income_config(500, 100, 11);
    let table = run_replication_study(&config).unwrap();

    let mut ratios = Vec::new();
    let mut failures = 0usize;
    let mut cells = 0usize;
    for row in &table.rows {
        if row.method == "smm" && row.s == 1 {
            let scr = table.row(&row.coef, "scrambled_pooled", 1).unwrap();
            check(
                &mut f,
                row.sqrt_n_std.is_finite() && scr.sqrt_n_std.is_finite(),
                format!("{}: non-finite spread", row.coef),
            );
            ratios.push(scr.sqrt_n_std / row.sqrt_n_std);
            failures += row.failures + scr.failures;
            cells += 2;
        }
    }
    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = ratios[ratios.len() / 2];
    check(&mut f, median <= 1.0, format!("median spread ratio {median:.3} > 1"));
    let fail_frac = failures as f64 / (cells * config.replications) as f64;
    check(&mut f, fail_frac < 0.02, format!("failure fraction {fail_frac:.4} >= 2%"));
    report("10 income process spread ratio", f);
}

#[test]
fn a11_end_to_end_determinism() {
    let mut f = Vec::new();
    let bin = env!("CARGO_BIN_EXE_smm");
    let mut outputs = Vec::new();
    for threads in ["8", "8", "1"] {
        let out = std::process::Command::new(bin)
            .args(["table1", "--reps", "100", "--seed", "1"])
            .env("SMM_THREADS", threads)
            .output()
            .expect("binary runs");
        check(&mut f, out.status.success(), format!("exit {:?}", out.status.code()));
        outputs.push(out.stdout);
    }
    check(&mut f, outputs[0] == outputs[1], "repeat run differs".into());
    check(&mut f, outputs[0] == outputs[2], "thread count changes output".into());
    report("11 end-to-end determinism", f);
}
