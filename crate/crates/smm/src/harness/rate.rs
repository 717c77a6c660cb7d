//! Integration-rate study: how fast does the quadrature error of
//! `(1/n) sum f(u_i)` shrink with `n` for each draw method?

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::EstimError;
use crate::rng::{derive_key, CounterRng};
use crate::samplers::{make_uniform, DrawMethod, DrawSpec, ScrambleLayout};

/// Test integrands on `[0, 1]` with known integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    /// `f(u) = u`, integral 1/2.
    Linear,
    /// `f(u) = u^2`, integral 1/3.
    Square,
    /// `f(u) = 1{u < 1/2}`, integral 1/2; dyadic nets integrate it exactly.
    StepAtHalf,
}

impl Integrand {
    pub fn value(self, u: f64) -> f64 {
        match self {
            Integrand::Linear => u,
            Integrand::Square => u * u,
            Integrand::StepAtHalf => f64::from(u < 0.5),
        }
    }

    pub fn integral(self) -> f64 {
        match self {
            Integrand::Linear | Integrand::StepAtHalf => 0.5,
            Integrand::Square => 1.0 / 3.0,
        }
    }
}

/// Draw methods compared in a rate study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    MonteCarlo,
    ScrambledSobol,
}

impl RateMethod {
    pub fn label(self) -> &'static str {
        match self {
            RateMethod::MonteCarlo => "monte_carlo",
            RateMethod::ScrambledSobol => "scrambled_sobol",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub method: String,
    pub n: usize,
    pub rmse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateStudy {
    pub rows: Vec<RateRow>,
    /// Least-squares slope of `log2 rmse` on `log2 n` per method; `None`
    /// when an exact-zero RMSE makes the log-log fit undefined.
    pub slopes: Vec<(String, Option<f64>)>,
}

impl RateStudy {
    pub fn slope(&self, method: RateMethod) -> Option<f64> {
        self.slopes
            .iter()
            .find(|(m, _)| m == method.label())
            .and_then(|(_, s)| *s)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,n,rmse\n");
        for row in &self.rows {
            out.push_str(&format!("{},{},{}\n", row.method, row.n, row.rmse));
        }
        out
    }
}

/// Measures the RMSE of the quadrature error over `replications` independent
/// randomisations at every grid size, then fits the log-log slope.
/// The grid must consist of powers of two and `replications >= 50` so the
/// RMSE is stable enough to regress on.
pub fn run_rate_study(
    integrand: Integrand,
    methods: &[RateMethod],
    n_grid: &[usize],
    replications: usize,
    seed: u64,
) -> Result<RateStudy, EstimError> {
    if n_grid.is_empty() || n_grid.iter().any(|&n| n == 0 || !n.is_power_of_two()) {
        return Err(EstimError::Config(
            "the size grid must be non-empty powers of two".into(),
        ));
    }
    if replications < 50 {
        return Err(EstimError::Config(
            "at least 50 randomisations are needed for a stable RMSE".into(),
        ));
    }
    if methods.is_empty() {
        return Err(EstimError::Config("method list is empty".into()));
    }

    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &method in methods {
        let mut points = Vec::new();
        for &n in n_grid {
            let mse: f64 = (0..replications)
                .into_par_iter()
                .map(|r| {
                    let e = quadrature_error(integrand, method, n, seed, r as u64);
                    e * e
                })
                .sum::<f64>()
                / replications as f64;
            let rmse = mse.sqrt();
            points.push((n, rmse));
            rows.push(RateRow { method: method.label().to_string(), n, rmse });
        }
        slopes.push((method.label().to_string(), log_log_slope(&points)));
    }
    Ok(RateStudy { rows, slopes })
}

fn quadrature_error(
    integrand: Integrand,
    method: RateMethod,
    n: usize,
    seed: u64,
    rep: u64,
) -> f64 {
    let mean = match method {
        RateMethod::MonteCarlo => {
            let mut rng = CounterRng::new(derive_key(seed, "rate-mc", rep));
            (0..n).map(|_| integrand.value(rng.next_unit_open())).sum::<f64>() / n as f64
        }
        RateMethod::ScrambledSobol => {
            let spec = DrawSpec {
                method: DrawMethod::ScrambledSobol,
                n,
                s: 1,
                d: 1,
                layout: ScrambleLayout::Pooled,
                seed: derive_key(seed, "rate-scramble", rep),
            };
            let pts = make_uniform(&spec).expect("valid spec");
            pts.values().iter().map(|&u| integrand.value(u)).sum::<f64>() / n as f64
        }
    };
    mean - integrand.integral()
}

/// Least-squares slope of `log2 y` on `log2 x`; `None` if any `y` is zero
/// (an exact result has no finite log) or the grid is a single point.
fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(_, y)| y == 0.0) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.log2()).collect();
    let k = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / k;
    let ybar = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    Some(sxy / sxx)
}
