//! Command line front end for the `smm` library.
//!
//! Exit codes: 0 on success, 1 on configuration or usage errors, 2 when a
//! run fails numerically (optimiser breakdown, model overflow, ...).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use smm::estimators::{estimate, Algorithm, EstimError, EstimationConfig, SeMethod, Weighting};
use smm::harness::{
    run_rate_study, run_replication_study, sidecar_json, simulate_study_data, table1_config,
    table2_config, table3_config, ExperimentConfig, Integrand, ModelName, RateMethod,
};
use smm::models::Dataset;
use smm::samplers::{make_uniform, DrawMethod, DrawSpec, ScrambleLayout};

#[derive(Parser)]
#[command(name = "smm", about = "Simulated method of moments toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a point set as CSV rows (one row per point).
    Points(PointsArgs),
    /// Measure integration-error decay rates on [0, 1] test integrands.
    Rate(RateArgs),
    /// Run a single estimation and print the result as JSON.
    Estimate(EstimateArgs),
    /// Run a replication study described by a JSON config file.
    Replicate(ReplicateArgs),
    /// Mean/variance study preset (cross-section, n = 100).
    Table1(PresetArgs),
    /// Probit study preset (cross-section with covariates, n = 1000).
    Table2(PresetArgs),
    /// ARMA study preset (time series, T = 200).
    Table3(PresetArgs),
}

#[derive(Args)]
struct PointsArgs {
    /// pseudo_random | antithetic | sobol | digital_shifted_sobol | scrambled_sobol
    #[arg(long)]
    method: String,
    /// Number of points.
    #[arg(long)]
    n: usize,
    /// Dimension.
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RateArgs {
    /// linear | square | step_at_half
    #[arg(long)]
    integrand: String,
    /// Comma-separated subset of monte_carlo,scrambled_sobol.
    #[arg(long, default_value = "monte_carlo,scrambled_sobol")]
    methods: String,
    /// Smallest grid size (a power of two).
    #[arg(long, default_value_t = 16)]
    n_min: usize,
    /// Largest grid size (a power of two); the grid doubles from n_min.
    #[arg(long, default_value_t = 1024)]
    n_max: usize,
    /// Randomisations per grid size.
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// mean_variance | probit | arma | het_income
    #[arg(long)]
    model: String,
    /// Path to a JSON estimation config (see EstimateFile).
    #[arg(long)]
    config: PathBuf,
    /// CSV data file: one column of y, or y,x for models with a covariate.
    #[arg(long, conflicts_with = "simulate_data")]
    data: Option<PathBuf>,
    /// Simulate the dataset instead of reading one.
    #[arg(long, requires = "theta0")]
    simulate_data: bool,
    /// True parameters for --simulate-data (comma-separated).
    #[arg(long)]
    theta0: Option<String>,
    /// Dataset size for --simulate-data.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
}

#[derive(Args)]
struct ReplicateArgs {
    /// Path to a JSON ExperimentConfig.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV; a JSON sidecar is written next to it. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long, default_value_t = 500)]
    reps: usize,
    #[arg(long, default_value_t = 20260826)]
    seed: u64,
    /// Include per-cell wall-clock times in the CSV (breaks byte-identity).
    #[arg(long)]
    timing: bool,
    /// Output CSV; a JSON sidecar is written next to it. Stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// JSON schema of the `estimate --config` file.
#[derive(Deserialize)]
struct EstimateFile {
    algorithm: Algorithm,
    draw_spec: DrawSpec,
    /// "identity" (default) or "two_step".
    #[serde(default)]
    weighting: Option<String>,
    #[serde(default)]
    se_method: Option<SeMethod>,
    start: Vec<f64>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
    #[serde(default)]
    burn_in: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap's rendering includes usage text; --help/--version land
            // here too and still exit 0.
            let is_error = err.use_stderr();
            let _ = err.print();
            return if is_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => write!(f, "{m}"),
        }
    }
}

impl From<EstimError> for CliError {
    fn from(err: EstimError) -> Self {
        match err {
            EstimError::Config(_) => CliError::Config(err.to_string()),
            _ => CliError::Numerical(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Config(err.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Points(args) => cmd_points(args),
        Command::Rate(args) => cmd_rate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Replicate(args) => cmd_replicate(args),
        Command::Table1(args) => cmd_preset(args, table1_config),
        Command::Table2(args) => cmd_preset(args, table2_config),
        Command::Table3(args) => cmd_preset(args, table3_config),
    }
}

/// Parses one of the snake_case enum names shared with the JSON configs.
fn parse_name<T: DeserializeOwned>(kind: &str, s: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::Config(format!("unknown {kind}: {s}")))
}

fn write_output(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, body)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_points(args: PointsArgs) -> Result<(), CliError> {
    let method: DrawMethod = parse_name("method", &args.method)?;
    let spec = DrawSpec {
        method,
        n: args.n,
        s: 1,
        d: args.d,
        layout: ScrambleLayout::Pooled,
        seed: args.seed,
    };
    let points = make_uniform(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    let mut body = Vec::new();
    points
        .write_csv(&mut body)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let body = String::from_utf8(body).expect("csv is ascii");
    write_output(args.out.as_deref(), &body)
}

fn cmd_rate(args: RateArgs) -> Result<(), CliError> {
    let integrand: Integrand = parse_name("integrand", &args.integrand)?;
    let methods = args
        .methods
        .split(',')
        .map(|m| parse_name::<RateMethod>("rate method", m.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    if args.n_min == 0 || args.n_max < args.n_min {
        return Err(CliError::Config(format!(
            "need 0 < n_min <= n_max, got {} and {}",
            args.n_min, args.n_max
        )));
    }
    let mut grid = Vec::new();
    let mut n = args.n_min;
    while n <= args.n_max {
        grid.push(n);
        n *= 2;
    }
    let study = run_rate_study(integrand, &methods, &grid, args.reps, args.seed)?;
    let mut body = study.to_csv();
    for (method, slope) in &study.slopes {
        match slope {
            Some(s) => body.push_str(&format!("# slope {method} {s:.4}\n")),
            None => body.push_str(&format!("# slope {method} undefined (zero rmse)\n")),
        }
    }
    write_output(args.out.as_deref(), &body)
}

fn parse_theta(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad number in theta list: {v}")))
        })
        .collect()
}

/// Reads a CSV with no header: one column (y) or two (y, then x). A pure
/// time-series model gets the single column as one path.
fn read_dataset(path: &Path, model: ModelName) -> Result<Dataset, CliError> {
    let text = fs::read_to_string(path)?;
    let mut cols: Option<usize> = None;
    let mut y = Vec::new();
    let mut x = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match cols {
            None => cols = Some(fields.len()),
            Some(c) if c != fields.len() => {
                return Err(CliError::Config(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    c,
                    fields.len()
                )));
            }
            _ => {}
        }
        let parse = |f: &str| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("line {}: bad number {f}", lineno + 1)))
        };
        y.push(parse(fields[0])?);
        if fields.len() > 1 {
            x.push(parse(fields[1])?);
        }
    }
    if y.is_empty() {
        return Err(CliError::Config(format!("{}: no data rows", path.display())));
    }
    match cols.unwrap_or(1) {
        1 if model == ModelName::Arma => {
            let t = y.len();
            Ok(Dataset::panel(y, t))
        }
        1 => Ok(Dataset::cross_section(y)),
        2 => Ok(Dataset::with_covariates(y, x)),
        c => Err(CliError::Config(format!("unsupported column count {c}"))),
    }
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let model_name: ModelName = parse_name("model", &args.model)?;
    let text = fs::read_to_string(&args.config)?;
    let file: EstimateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;

    let weighting = match file.weighting.as_deref() {
        None | Some("identity") => Weighting::Identity,
        Some("two_step") => Weighting::TwoStep,
        Some(other) => {
            return Err(CliError::Config(format!("unknown weighting: {other}")));
        }
    };
    let mut config = EstimationConfig::new(file.algorithm, file.draw_spec, file.start);
    config.weighting = weighting;
    config.se_method = file.se_method.unwrap_or(SeMethod::None);
    if let Some(t) = file.tolerance {
        config.tolerance = t;
    }
    if let Some(m) = file.max_iter {
        config.max_iter = m;
    }
    if let Some(b) = file.burn_in {
        config.burn_in = b;
    }

    let model = model_name.build();
    let data = if args.simulate_data {
        let theta0 = parse_theta(args.theta0.as_deref().unwrap_or_default())?;
        simulate_study_data(model_name, &theta0, args.n, args.data_seed, model.as_ref())?
    } else {
        let path = args
            .data
            .as_deref()
            .ok_or_else(|| CliError::Config("need --data or --simulate-data".into()))?;
        read_dataset(path, model_name)?
    };

    let result = estimate(model.as_ref(), &data, &config)?;
    let json = serde_json::to_string_pretty(&result)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn run_study_with_output(
    config: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let start = Instant::now();
    let table = run_replication_study(config)?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    write_output(out, &table.to_csv())?;
    if let Some(path) = out {
        let sidecar = sidecar_json(config, &table, total_ms);
        let meta_path = path.with_extension("meta.json");
        fs::write(&meta_path, serde_json::to_string_pretty(&sidecar).expect("plain json"))?;
    }
    Ok(())
}

fn cmd_replicate(args: ReplicateArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    run_study_with_output(&config, args.out.as_deref())
}

fn cmd_preset(
    args: PresetArgs,
    preset: fn(usize, u64) -> ExperimentConfig,
) -> Result<(), CliError> {
    let mut config = preset(args.reps, args.seed);
    config.include_timing = args.timing;
    run_study_with_output(&config, args.out.as_deref())
}
