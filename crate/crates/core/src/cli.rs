//! The `latentreg` command line: `estimate`, `simulate` and `diagnose`.
//!
//! Reports are JSON. Failures print `{"error": {"kind", "message", "exit_code"}}`
//! on stderr and exit with 2 (input), 3 (estimator degeneracy) or 4 (bootstrap
//! instability).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::data::{aggregate, load_grouped, load_observations, GroupedData, ObservationSet, Schema};
use crate::error::{Error, Result};
use crate::inference::{bootstrap, diagnose_precision, BootstrapConfig, BootstrapResult, DiagnosticConfig, DiagnosticReport};
use crate::linear::{
    classical_eiv, debiased_moment, estimate_cov12, fit_gaussian_prior_with, loo_iv, naive_ols, shrinkage_estimate,
    two_sided_corrected, weighted_classical_eiv, weighted_shrinkage, LinearEstimate, LinearEstimator, PriorMoments,
};
use crate::moments::{partial_out, sample_moments};
use crate::nonlinear::{npeb_tau, oracle_tau, plugin_tau, Prior, TauEstimate, TauEstimator};
use crate::priors::{DiscretePrior, NpmleConfig, Transform};
use crate::simulation::{
    calibrate_dgp, default_scaled_beta_mu, default_scaled_beta_sigma, linear_grid, nonlinear_grid, reference_design,
    reference_nonlinear_design, run_monte_carlo, write_replications, Builtin, Cell, DgpSpec, McConfig, McEstimator,
    LINEAR_COORDS, NONLINEAR_COORDS,
};
use crate::smooth::{Bandwidth, PiecewiseLinear};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Parser)]
#[command(name = "latentreg", version, about = "Regression on noisily measured latent attributes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run estimators on a CSV file and print a JSON report.
    Estimate(EstimateArgs),
    /// Monte Carlo comparison of estimators over a grid of designs.
    Simulate(SimulateArgs),
    /// Precision-independence diagnostics.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Column mapping, e.g. `y=score,x=va,sigma=se[,weight=n][,z=a+b][,group=teacher]`.
    #[arg(long, default_value = "y=y,x=x,sigma=sigma")]
    pub schema: String,
    #[arg(long, default_value = "classical,shrinkage")]
    pub estimators: String,
    /// Residualize y and x on the schema's z columns first.
    #[arg(long)]
    pub partial_out: bool,
    /// Weight column (same as `weight=` in the schema).
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value_t = 999)]
    pub boot: usize,
    /// Enables the bootstrap.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PriorModeArg::X)]
    pub prior_mode: PriorModeArg,
    /// `identity`, `above:V` or `table:FILE` (CSV with columns mu,f).
    #[arg(long, default_value = "identity")]
    pub transform: String,
    /// Discrete prior CSV (support,mass) for the oracle and plug-in estimators.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// Write the NPMLE prior fitted by `npeb` to this CSV.
    #[arg(long)]
    pub save_prior: Option<PathBuf>,
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorModeArg {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Default,
    Single,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Design JSON; the built-in design is used when neither this nor `--calibrate` is given.
    #[arg(long, conflicts_with = "calibrate")]
    pub spec: Option<PathBuf>,
    /// Calibrate the design to this CSV of (x, sigma).
    #[arg(long)]
    pub calibrate: Option<PathBuf>,
    #[arg(long, default_value = "y=y,x=x,sigma=sigma")]
    pub schema: String,
    /// Write the design (before grid coefficients) to this JSON file.
    #[arg(long)]
    pub emit_spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GridArg::Default)]
    pub grid: GridArg,
    /// Scaled beta_mu for `--grid single`.
    #[arg(long, default_value_t = 0.2)]
    pub beta_mu: f64,
    /// Scaled beta_sigma for `--grid single`.
    #[arg(long, default_value_t = 0.05)]
    pub beta_sigma: f64,
    /// Normalized effects, comma separated.
    #[arg(long, default_value = "1")]
    pub effect: String,
    /// Threshold quantiles of G, comma separated.
    #[arg(long, default_value = "0.75,0.9")]
    pub quantile: String,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Also write per-replication estimates in linear mode.
    #[arg(long)]
    pub replications: bool,
    #[arg(long, default_value_t = 300)]
    pub npmle_grid: usize,
    #[arg(long, default_value_t = 2000)]
    pub npmle_max_iter: usize,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "y=y,x=x,sigma=sigma")]
    pub schema: String,
    #[arg(long, default_value_t = 999)]
    pub boot: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// `auto` or a positive number.
    #[arg(long, default_value = "auto")]
    pub bandwidth: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub omit_timing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommandEcho {
    pub name: String,
    /// Arguments as given, minus `--threads`, which never changes results.
    pub args: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimateEntry {
    Linear {
        #[serde(flatten)]
        estimate: LinearEstimate,
        bootstrap: Option<BootstrapResult>,
    },
    Tau {
        #[serde(flatten)]
        estimate: TauEstimate,
        transform: Transform,
        bootstrap: Option<BootstrapResult>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: String,
    pub tool: ToolInfo,
    pub command: CommandEcho,
    pub input_digest: String,
    pub n_units: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_groups: Option<usize>,
    pub estimates: Vec<EstimateEntry>,
    pub diagnostics: Vec<DiagnosticReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let echo: Vec<String> = echo_args(&args);
    let result = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, echo),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Diagnose(a) => cmd_diagnose(a, echo),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = e.exit_code();
            let body = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": code }
            });
            eprintln!("{body}");
            code
        }
    }
}

fn echo_args(args: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = args.iter().skip(2).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--threads" {
            it.next();
        } else if !a.starts_with("--threads=") {
            out.push(a);
        }
    }
    out
}

fn digest_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let hash = Sha256::digest(&bytes);
    Ok(format!("sha256:{}", hash.iter().map(|b| format!("{b:02x}")).collect::<String>()))
}

fn write_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn tool() -> ToolInfo {
    ToolInfo {
        name: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
    }
}

/// Parses `identity`, `above:V` or `table:FILE`.
pub fn parse_transform(text: &str) -> Result<Transform> {
    if text == "identity" {
        return Ok(Transform::Identity);
    }
    if let Some(v) = text.strip_prefix("above:") {
        let threshold = f64::from_str(v.trim())
            .map_err(|_| Error::InvalidInput(format!("bad threshold in transform `{text}`")))?;
        return Ok(Transform::IndicatorAbove { threshold });
    }
    if let Some(path) = text.strip_prefix("table:") {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.into()))
        };
        let (mi, fi) = (col("mu")?, col("f")?);
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            for (idx, name, dst) in [(mi, "mu", &mut xs), (fi, "f", &mut ys)] {
                let cell = rec.get(idx).unwrap_or("");
                dst.push(cell.parse::<f64>().map_err(|_| Error::BadCell {
                    row: row + 1,
                    column: name.into(),
                    reason: format!("not a number: `{cell}`"),
                })?);
            }
        }
        return Ok(Transform::UserTable {
            table: PiecewiseLinear::new(xs, ys)?,
        });
    }
    Err(Error::InvalidInput(format!(
        "unknown transform `{text}`; expected identity, above:V or table:FILE"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Requested {
    Linear(LinearEstimator),
    Tau(TauEstimator),
}

fn parse_estimators(text: &str) -> Result<Vec<Requested>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<LinearEstimator>()
                .map(Requested::Linear)
                .or_else(|_| s.parse::<TauEstimator>().map(Requested::Tau))
                .map_err(|_| Error::InvalidInput(format!("unknown estimator `{s}`")))
        })
        .collect()
}

struct Settings {
    partial: bool,
    prior_mode: PriorMoments,
    transform: Transform,
    prior: Option<DiscretePrior>,
    npmle: NpmleConfig,
}

impl Settings {
    fn prepare(&self, data: &ObservationSet) -> Result<ObservationSet> {
        if self.partial {
            partial_out(data)
        } else {
            Ok(data.clone())
        }
    }

    fn linear(&self, id: LinearEstimator, unit: &ObservationSet, grouped: Option<&GroupedData>) -> Result<LinearEstimate> {
        let weights = || {
            unit.weights().ok_or_else(|| {
                Error::InvalidInput(format!("{} needs a weight column or grouped input", id.as_str()))
            })
        };
        let groups = || {
            grouped.ok_or_else(|| {
                Error::InvalidInput(format!("{} needs student-level input (schema group=COL)", id.as_str()))
            })
        };
        match id {
            LinearEstimator::Classical => classical_eiv(&sample_moments(unit)),
            LinearEstimator::Shrinkage => shrinkage_estimate(unit, self.prior_mode),
            LinearEstimator::NaiveOls => naive_ols(&sample_moments(unit)),
            LinearEstimator::WeightedClassical => weighted_classical_eiv(unit, weights()?),
            LinearEstimator::WeightedShrinkage => weighted_shrinkage(unit, weights()?, self.prior_mode),
            LinearEstimator::TwoSided => {
                let cov12 = estimate_cov12(groups()?);
                two_sided_corrected(unit, weights()?, &cov12)
            }
            LinearEstimator::LooIv => loo_iv(groups()?),
            LinearEstimator::DebiasedMoment => debiased_moment(groups()?),
        }
    }

    fn tau(&self, id: TauEstimator, unit: &ObservationSet) -> Result<TauEstimate> {
        let supplied = || {
            self.prior
                .clone()
                .map(Prior::Discrete)
                .ok_or_else(|| Error::InvalidInput("oracle needs --prior FILE".into()))
        };
        match id {
            TauEstimator::Oracle => oracle_tau(unit, &supplied()?, &self.transform),
            TauEstimator::Npeb => npeb_tau(unit, &self.transform, &self.npmle),
            TauEstimator::Plugin => {
                let prior = match &self.prior {
                    Some(p) => Prior::Discrete(p.clone()),
                    None => Prior::Gaussian(fit_gaussian_prior_with(&sample_moments(unit), self.prior_mode)),
                };
                plugin_tau(unit, &prior, &self.transform)
            }
        }
    }

    fn point(&self, req: Requested, unit: &ObservationSet, grouped: Option<&GroupedData>) -> Result<f64> {
        match req {
            Requested::Linear(id) => self.linear(id, unit, grouped).map(|e| e.beta),
            Requested::Tau(id) => self.tau(id, unit).map(|e| e.tau),
        }
    }
}

fn cmd_estimate(a: &EstimateArgs, echo: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let mut schema: Schema = a.schema.parse()?;
    if let Some(w) = &a.weights {
        schema = schema.with_weight(w.clone());
    }
    let requested = parse_estimators(&a.estimators)?;
    if requested.is_empty() {
        return Err(Error::InvalidInput("no estimators requested".into()));
    }
    let settings = Settings {
        partial: a.partial_out,
        prior_mode: match a.prior_mode {
            PriorModeArg::X => PriorMoments::Measurement,
            PriorModeArg::Y => PriorMoments::Outcome,
        },
        transform: parse_transform(&a.transform)?,
        prior: a.prior.as_ref().map(DiscretePrior::load).transpose()?,
        npmle: NpmleConfig::default(),
    };
    let boot = a.seed.map(|seed| BootstrapConfig::new(seed).draws(a.boot).level(a.level).threads(a.threads));

    let grouped = match schema.group {
        Some(_) => Some(load_grouped(&a.input, &schema)?),
        None => None,
    };
    let unit = match &grouped {
        Some(g) => aggregate(g)?,
        None => load_observations(&a.input, &schema)?,
    };
    let prepared = settings.prepare(&unit)?;

    let mut estimates = Vec::new();
    for &req in &requested {
        let bootstrap = match boot {
            None => None,
            Some(cfg) => Some(match &grouped {
                Some(g) => bootstrap(
                    g,
                    |g: &GroupedData| {
                        let u = settings.prepare(&aggregate(g)?)?;
                        settings.point(req, &u, Some(g))
                    },
                    &cfg,
                )?,
                None => bootstrap(
                    &unit,
                    |d: &ObservationSet| settings.point(req, &settings.prepare(d)?, None),
                    &cfg,
                )?,
            }),
        };
        estimates.push(match req {
            Requested::Linear(id) => EstimateEntry::Linear {
                estimate: settings.linear(id, &prepared, grouped.as_ref())?,
                bootstrap,
            },
            Requested::Tau(id) => {
                if id == TauEstimator::Npeb {
                    if let Some(path) = &a.save_prior {
                        crate::priors::fit_npmle(&prepared, &settings.npmle)?.prior.save(path)?;
                    }
                }
                EstimateEntry::Tau {
                    estimate: settings.tau(id, &prepared)?,
                    transform: settings.transform.clone(),
                    bootstrap,
                }
            }
        });
    }

    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        tool: tool(),
        command: CommandEcho {
            name: "estimate".into(),
            args: echo,
        },
        input_digest: digest_file(&a.input)?,
        n_units: unit.n(),
        n_groups: grouped.as_ref().map(|g| g.n_groups()),
        estimates,
        diagnostics: Vec::new(),
        timing_ms: (!a.omit_timing).then(|| start.elapsed().as_millis() as u64),
    };
    write_json(&report, a.output.as_deref())
}

fn cmd_diagnose(a: &DiagnoseArgs, echo: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let schema: Schema = a.schema.parse()?;
    let (data, groups) = match schema.group {
        Some(_) => {
            let g = load_grouped(&a.input, &schema)?;
            (aggregate(&g)?, Some(g.n_groups()))
        }
        None => (load_observations(&a.input, &schema)?, None),
    };
    let bandwidth = match a.bandwidth.as_str() {
        "auto" => Bandwidth::Auto,
        v => Bandwidth::Fixed(
            v.parse::<f64>()
                .ok()
                .filter(|h| *h > 0.0 && h.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad bandwidth `{v}`")))?,
        ),
    };
    let config = DiagnosticConfig {
        draws: a.boot,
        seed: a.seed,
        threads: a.threads,
        bandwidth,
    };
    let diagnostics = diagnose_precision(&data, &config)?;
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        tool: tool(),
        command: CommandEcho {
            name: "diagnose".into(),
            args: echo,
        },
        input_digest: digest_file(&a.input)?,
        n_units: data.n(),
        n_groups: groups,
        estimates: Vec::new(),
        diagnostics,
        timing_ms: (!a.omit_timing).then(|| start.elapsed().as_millis() as u64),
    };
    write_json(&report, a.output.as_deref())
}

fn parse_list(text: &str, flag: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad number `{s}` in {flag}")))
        })
        .collect()
}

#[derive(Serialize)]
struct SimulateOutput {
    cells: usize,
    reps: usize,
    summary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    replications: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spec: Option<String>,
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let base = match (&a.spec, &a.calibrate) {
        (Some(p), _) => DgpSpec::load(p)?,
        (None, Some(p)) => {
            let schema: Schema = a.schema.parse()?;
            calibrate_dgp(&load_observations(p, &schema)?, Bandwidth::Auto)?
        }
        (None, None) => match a.mode {
            ModeArg::Linear => reference_design(),
            ModeArg::Nonlinear => reference_nonlinear_design(),
        },
    };
    base.validate()?;
    if let Some(p) = &a.emit_spec {
        base.save(p)?;
    }

    let cells: Vec<Cell> = match (a.mode, a.grid) {
        (ModeArg::Linear, GridArg::Default) => {
            linear_grid(&base, &default_scaled_beta_mu(), &default_scaled_beta_sigma(), a.noise_sd)?
        }
        (ModeArg::Linear, GridArg::Single) => linear_grid(&base, &[a.beta_mu], &[a.beta_sigma], a.noise_sd)?,
        (ModeArg::Nonlinear, grid) => {
            let mut effects = parse_list(&a.effect, "--effect")?;
            let mut quantiles = parse_list(&a.quantile, "--quantile")?;
            if effects.is_empty() || quantiles.is_empty() {
                return Err(Error::InvalidInput("--effect and --quantile need at least one value".into()));
            }
            if grid == GridArg::Single {
                effects.truncate(1);
                quantiles.truncate(1);
            }
            nonlinear_grid(&base, &effects, &quantiles, a.noise_sd)?
        }
    };

    let npmle = NpmleConfig {
        grid_size: a.npmle_grid,
        max_iter: a.npmle_max_iter,
        ..NpmleConfig::default()
    };
    let builtins = match a.mode {
        ModeArg::Linear => Builtin::linear(),
        ModeArg::Nonlinear => vec![Builtin::Oracle, Builtin::Npeb(npmle), Builtin::Plugin],
    };
    let estimators: Vec<&dyn McEstimator> = builtins.iter().map(|b| b as &dyn McEstimator).collect();
    let reps = a.reps.unwrap_or(match a.mode {
        ModeArg::Linear => 1000,
        ModeArg::Nonlinear => 500,
    });
    let config = McConfig {
        reps,
        seed: a.seed,
        threads: a.threads,
        n: a.n,
    };
    let coords = match a.mode {
        ModeArg::Linear => LINEAR_COORDS,
        ModeArg::Nonlinear => NONLINEAR_COORDS,
    };
    let run = run_monte_carlo(&cells, coords, &estimators, &config)?;

    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let summary_path = a.out_dir.join("summary.csv");
    let f = std::fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    run.summary.write_csv(f)?;
    let replications = if a.mode == ModeArg::Nonlinear || a.replications {
        let p = a.out_dir.join("replications.csv");
        let f = std::fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        write_replications(&run.replications, f)?;
        Some(p.display().to_string())
    } else {
        None
    };
    write_json(
        &SimulateOutput {
            cells: cells.len(),
            reps,
            summary: summary_path.display().to_string(),
            replications,
            spec: a.emit_spec.as_ref().map(|p| p.display().to_string()),
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimator_lists() {
        assert_eq!(
            parse_estimators("classical, npeb").unwrap(),
            vec![Requested::Linear(LinearEstimator::Classical), Requested::Tau(TauEstimator::Npeb)]
        );
        assert!(parse_estimators("classical,bogus").is_err());
    }

    #[test]
    fn transforms() {
        assert_eq!(parse_transform("identity").unwrap(), Transform::Identity);
        assert_eq!(
            parse_transform("above:0.25").unwrap(),
            Transform::IndicatorAbove { threshold: 0.25 }
        );
        assert!(parse_transform("above:x").is_err());
        assert!(parse_transform("cubic").is_err());
    }

    #[test]
    fn threads_are_not_echoed() {
        let args: Vec<OsString> = ["latentreg", "simulate", "--threads", "8", "--seed", "1", "--threads=2"]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(echo_args(&args), vec!["--seed", "1"]);
    }
}
