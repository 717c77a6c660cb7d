//! Preset study grids at desk scale. Each preset mirrors a published
//! comparison; pass larger replication counts to reproduce it fully.

use super::{ExperimentConfig, MethodName, ModelName};
use crate::models::HetIncome;

/// Mean-variance grid: analytic moments, plain and antithetic simulation,
/// and the pooled scramble, at n = 100 and S in {1, 2, 4, 20}.
pub fn table1_config(replications: usize, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelName::MeanVariance,
        true_theta: vec![0.0, 1.0],
        n: 100,
        t: None,
        s_list: vec![1, 2, 4, 20],
        methods: vec![
            MethodName::Mm,
            MethodName::Smm,
            MethodName::Antithetic,
            MethodName::ScrambledPooled,
        ],
        replications,
        master_seed,
        include_timing: false,
        threads: None,
    }
}

/// Probit grid: plain, antithetic, and per-sample scrambled simulation at
/// n = 1000 and S in {1, 2, 4, 10}. The scramble must be per-sample here so
/// simulated rows stay aligned with the observed covariates.
pub fn table2_config(replications: usize, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelName::Probit,
        true_theta: vec![1.0, 1.0],
        n: 1000,
        t: None,
        s_list: vec![1, 2, 4, 10],
        methods: vec![
            MethodName::Smm,
            MethodName::Antithetic,
            MethodName::ScrambledPerSample,
        ],
        replications,
        master_seed,
        include_timing: false,
        threads: None,
    }
}

/// Autoregressive moving-average grid at T = 200 and S in {1, 2}: path
/// simulation (plain and antithetic), stationary blocks built purely from
/// scrambled rows, and the hybrid whose blocks start on a pseudo-random path.
pub fn table3_config(replications: usize, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelName::Arma,
        true_theta: vec![0.5, 0.5, 1.0],
        n: 200,
        t: None,
        s_list: vec![1, 2],
        methods: vec![
            MethodName::Smm,
            MethodName::Antithetic,
            MethodName::DynamicQmcOnly,
            MethodName::DynamicHybrid,
        ],
        replications,
        master_seed,
        include_timing: false,
        threads: None,
    }
}

/// Heterogeneous income-process study: n units observed for 30 periods,
/// 19 parameters, plain versus pooled-scramble simulation at S = 1.
pub fn het_income_config(n: usize, replications: usize, master_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        model: ModelName::HetIncome,
        true_theta: HetIncome::default_theta(),
        n,
        t: Some(30),
        s_list: vec![1],
        methods: vec![MethodName::Smm, MethodName::ScrambledPooled],
        replications,
        master_seed,
        include_timing: false,
        threads: None,
    }
}
