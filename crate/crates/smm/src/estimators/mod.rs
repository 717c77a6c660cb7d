//! Moment-matching estimation: minimise the weighted distance between data
//! moments and simulated moments over a parameter box, then attach sandwich
//! standard errors built from one of several variance estimators.

mod estimate;
mod nelder_mead;
mod variance;

pub use estimate::{estimate, indirect_inference, jacobian_fd, quadform_gap};
pub use nelder_mead::{nelder_mead, NmResult};
pub use variance::{
    hac_default_bandwidth, sample_covariance, sandwich_se, variance_hac, variance_pooled,
    variance_repeated_scramble,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::ModelError;
use crate::qmc::QmcError;
use crate::samplers::DrawSpec;

#[derive(Debug, Error)]
pub enum EstimError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Draws(#[from] QmcError),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

/// Which estimation strategy to run. The static variants simulate whole
/// cross-sections (or whole paths, for `DynamicSMM`); the remaining dynamic
/// variants build short stationary blocks instead of long paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Simulated method of moments with pseudo-random (or antithetic) draws.
    StaticSmm,
    /// One scramble randomises the pooled `(n * S) x d` point set.
    StaticScrambledPooled,
    /// Each simulated sample gets an independent scramble of the same net,
    /// keeping rows aligned with per-observation covariates.
    StaticScrambledPerSample,
    /// Path simulation with pseudo-random draws.
    DynamicSmm,
    /// Every observation is an independent stationary block built from
    /// quasi-Monte Carlo rows (initial joint draw plus recursion steps).
    DynamicQmcOnly,
    /// A pseudo-random path supplies stationary starting points; scrambled
    /// rows supply the recursion continuation of each block.
    DynamicHybrid,
    /// Match an auxiliary statistic instead of model moments.
    IndirectInference,
}

/// Weighting of the moment gap in the objective.
#[derive(Debug, Clone)]
pub enum Weighting {
    Identity,
    /// A fixed symmetric positive semidefinite matrix.
    Fixed(DMatrix<f64>),
    /// First stage under the identity, then re-minimise with the inverse of
    /// the estimated moment variance at the first-stage point.
    TwoStep,
}

/// How standard errors are produced after the point estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeMethod {
    /// Cross-sectional sandwich: variance of per-observation differences
    /// between data and simulation-averaged moment contributions.
    SandwichPooled,
    /// Time-series sandwich with a Bartlett long-run variance
    /// (`None` bandwidth means the default `floor(4 (T/100)^{2/9})`).
    SandwichHac { bandwidth: Option<usize> },
    /// Adds a simulation-noise term measured across independent
    /// re-randomisations of the quasi-Monte Carlo draws.
    RepeatedScramble { replicates: usize },
    /// Point estimate only.
    None,
}

/// Everything an estimation run needs besides the model and the data.
#[derive(Debug, Clone)]
pub struct EstimationConfig {
    pub algorithm: Algorithm,
    pub draw_spec: DrawSpec,
    pub weighting: Weighting,
    pub se_method: SeMethod,
    /// Optimiser start point; must lie inside the parameter box.
    pub start: Vec<f64>,
    /// Simplex value-spread tolerance relative to the initial spread.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Burn-in of the pseudo-random path layer used by [`Algorithm::DynamicHybrid`].
    pub burn_in: usize,
}

impl EstimationConfig {
    pub fn new(algorithm: Algorithm, draw_spec: DrawSpec, start: Vec<f64>) -> Self {
        EstimationConfig {
            algorithm,
            draw_spec,
            weighting: Weighting::Identity,
            se_method: SeMethod::None,
            start,
            tolerance: 1e-8,
            max_iter: 2000,
            burn_in: 200,
        }
    }
}

/// Outcome of an estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationResult {
    pub theta_hat: Vec<f64>,
    pub objective_value: f64,
    /// `data moments - simulated moments` at the estimate.
    pub moment_gap: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}
