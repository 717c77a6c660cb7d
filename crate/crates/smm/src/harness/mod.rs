//! Batch driver for Monte-Carlo studies: replication studies over a grid of
//! (method, S) estimators, integration-rate studies, and the preset tables.
//!
//! Reproducibility rules:
//!
//! - Data replications are seeded by `(master_seed, "data", r)` only, so the
//!   method list never changes the data.
//! - Simulation draws are seeded by `(master_seed, r, method, S)`.
//! - Replications run in parallel (`SMM_THREADS` overrides the degree) but
//!   aggregation is ordered by replication index, so output is byte-identical
//!   at any parallelism.

mod rate;
mod replication;
mod tables;

pub use rate::{run_rate_study, Integrand, RateMethod, RateRow, RateStudy};
pub use replication::{run_replication_study, simulate_study_data};
pub use tables::{het_income_config, table1_config, table2_config, table3_config};

use serde::{Deserialize, Serialize};

use crate::estimators::EstimError;
use crate::models::{Arma, HetIncome, MeanVariance, ModelSpec, Probit};

/// Which model a study estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    MeanVariance,
    Probit,
    Arma,
    HetIncome,
}

impl ModelName {
    pub fn build(self) -> Box<dyn ModelSpec> {
        match self {
            ModelName::MeanVariance => Box::new(MeanVariance),
            ModelName::Probit => Box::new(Probit),
            ModelName::Arma => Box::new(Arma),
            ModelName::HetIncome => Box::new(HetIncome::default()),
        }
    }
}

/// An estimator in a study grid. `Mm` is the analytic method-of-moments
/// fit (no simulation); it exists only where the moments invert in closed
/// form. The `Dynamic*` entries need a model with a dynamic extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Mm,
    Smm,
    Antithetic,
    ScrambledPooled,
    ScrambledPerSample,
    DynamicQmcOnly,
    DynamicHybrid,
}

impl MethodName {
    pub fn label(self) -> &'static str {
        match self {
            MethodName::Mm => "mm",
            MethodName::Smm => "smm",
            MethodName::Antithetic => "antithetic",
            MethodName::ScrambledPooled => "scrambled_pooled",
            MethodName::ScrambledPerSample => "scrambled_per_sample",
            MethodName::DynamicQmcOnly => "dynamic_qmc_only",
            MethodName::DynamicHybrid => "dynamic_hybrid",
        }
    }
}

/// A complete replication-study description, loadable from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelName,
    pub true_theta: Vec<f64>,
    /// Sample size: units for cross-sections, periods for a time series.
    pub n: usize,
    /// Panel length for models that simulate per-unit paths.
    #[serde(default)]
    pub t: Option<usize>,
    pub s_list: Vec<usize>,
    pub methods: Vec<MethodName>,
    pub replications: usize,
    pub master_seed: u64,
    /// Emit wall-clock times in the CSV. Off by default so output stays
    /// byte-identical across runs; timings are always in the JSON sidecar.
    #[serde(default)]
    pub include_timing: bool,
    /// Parallelism degree; `SMM_THREADS` overrides, 0/absent means all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// The (method, S) grid actually run. Antithetic draws pair sample `s`
    /// with `s + S/2`, so odd S entries are skipped for that method (the
    /// published grids mark them "-"); `Mm` uses no simulation and appears
    /// once with S = 0.
    pub fn combos(&self) -> Vec<(MethodName, usize)> {
        let mut out = Vec::new();
        for &m in &self.methods {
            if m == MethodName::Mm {
                out.push((m, 0));
                continue;
            }
            for &s in &self.s_list {
                if m == MethodName::Antithetic && s % 2 != 0 {
                    continue;
                }
                out.push((m, s));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), EstimError> {
        if self.replications == 0 {
            return Err(EstimError::Config("replications must be at least 1".into()));
        }
        if self.s_list.is_empty() || self.s_list.iter().any(|&s| s == 0) {
            return Err(EstimError::Config("S list must be non-empty and positive".into()));
        }
        if self.methods.is_empty() {
            return Err(EstimError::Config("method list is empty".into()));
        }
        let model = self.model.build();
        if self.true_theta.len() != model.theta_dim() {
            return Err(EstimError::Config(format!(
                "true theta has {} coordinates but the model has {} parameters",
                self.true_theta.len(),
                model.theta_dim()
            )));
        }
        for &m in &self.methods {
            let compatible = match m {
                MethodName::Mm => self.model == ModelName::MeanVariance,
                MethodName::DynamicQmcOnly | MethodName::DynamicHybrid => {
                    self.model == ModelName::Arma
                }
                _ => true,
            };
            if !compatible {
                return Err(EstimError::Config(format!(
                    "method {} is not available for model {:?}",
                    m.label(),
                    self.model
                )));
            }
        }
        Ok(())
    }
}

/// One summary cell: a coefficient under a (method, S) estimator.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub coef: String,
    pub method: String,
    pub s: usize,
    /// `sqrt(n) * std(theta_hat_j)` over converged replications; NaN when
    /// fewer than two replications converged.
    pub sqrt_n_std: f64,
    pub bias_x100: f64,
    pub mean_runtime_ms: f64,
    pub failures: usize,
    /// Too few converged replications to compute a standard deviation.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
    pub replications: usize,
    pub include_timing: bool,
}

impl SummaryTable {
    /// Renders the fixed CSV schema. The runtime column is left blank unless
    /// timing was requested, keeping the bytes reproducible.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("coef,method,S,sqrt_n_std,bias_x100,runtime_ms,failures\n");
        for row in &self.rows {
            let std = if row.degenerate { String::new() } else { format!("{}", row.sqrt_n_std) };
            let bias = if row.degenerate && row.failures == self.replications {
                String::new()
            } else {
                format!("{}", row.bias_x100)
            };
            let rt = if self.include_timing {
                format!("{:.3}", row.mean_runtime_ms)
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.coef, row.method, row.s, std, bias, rt, row.failures
            ));
        }
        out
    }

    /// Largest failure fraction across grid cells.
    pub fn failure_fraction(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.failures as f64 / self.replications as f64)
            .fold(0.0, f64::max)
    }

    pub fn row(&self, coef: &str, method: &str, s: usize) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.coef == coef && r.method == method && r.s == s)
    }
}

/// JSON metadata written next to a CSV: the config echo, the summary rows
/// (including timings), and the total wall-clock time.
pub fn sidecar_json(
    config: &ExperimentConfig,
    table: &SummaryTable,
    total_runtime_ms: f64,
) -> serde_json::Value {
    serde_json::json!({
        "config": config,
        "rows": table.rows,
        "replications": table.replications,
        "total_runtime_ms": total_runtime_ms,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Builds the rayon pool honouring `SMM_THREADS` (then the config value;
/// 0 or unset means one thread per core).
pub(crate) fn thread_pool(configured: Option<usize>) -> Result<rayon::ThreadPool, EstimError> {
    let n = std::env::var("SMM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(configured)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| EstimError::Config(format!("thread pool: {e}")))
}
