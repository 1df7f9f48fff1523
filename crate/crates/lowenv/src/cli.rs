//! Config ingestion, subcommand dispatch and deterministic output emission.
//!
//! Configs are strict-schema JSON: unknown keys are rejected with the list of
//! expected fields. Every run writes a CSV and a JSON summary embedding the
//! fully resolved config and the crate version; identical `(config, seed)`
//! pairs produce byte-identical outputs.

use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::consistency::{certify, CertifySetup, ConsistencyCertificate, GridSpec, Route};
use crate::distributions::{Distribution, Family};
use crate::estimator::{lower_envelope_estimate, EnvelopeEstimate, SolverConfig};
use crate::experiments::beam::{beam_oracle, certify_beam_route, run_beam_example, BeamParams};
use crate::experiments::bias::{bias_sweep, naive_identical_sweep, BiasSetup, BiasSweepResult, NaiveSweepResult};
use crate::experiments::no_consistency::{
    finite_subfamily_contrast, run_no_consistency_example, FiniteSubfamilyResult,
    NoConsistencyResult,
};
use crate::experiments::quadrature_envelope_oracle;
use crate::sampling::{derive_seed, Backend};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Family construction spec, the JSON-facing view of [`Family`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    NormalBox {
        mu_lower: f64,
        mu_upper: f64,
        sigma_lower: f64,
        sigma_upper: f64,
    },
    NormalMean {
        mu_lower: f64,
        mu_upper: f64,
        sigma: f64,
    },
    Finite {
        members: Vec<Distribution>,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Family> {
        match self {
            FamilySpec::NormalBox {
                mu_lower,
                mu_upper,
                sigma_lower,
                sigma_upper,
            } => {
                if !(*sigma_lower > 0.0) {
                    return Err(Error::Config(format!(
                        "sigma_lower must be positive, got {sigma_lower}"
                    )));
                }
                Family::normal_box([*mu_lower, *mu_upper], [*sigma_lower, *sigma_upper])
            }
            FamilySpec::NormalMean {
                mu_lower,
                mu_upper,
                sigma,
            } => {
                if !(*sigma > 0.0) {
                    return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
                }
                Family::normal_mean_box([*mu_lower, *mu_upper], *sigma)
            }
            FamilySpec::Finite { members } => {
                for m in members {
                    m.validate()?;
                }
                Family::finite(members.clone())
            }
        }
    }
}

/// Named built-in integrands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum FSpec {
    /// `1` where `x > 0`, else `0`.
    IndicatorPositive,
    /// `1` where the beam limit state is positive (survival).
    BeamSurvival {
        #[serde(default)]
        params: BeamParams,
    },
    Constant {
        value: f64,
    },
    Identity,
    /// `c_0 + c_1 x + c_2 x^2 + ...`
    Polynomial {
        coefficients: Vec<f64>,
    },
}

impl FSpec {
    pub fn build(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match self {
            FSpec::IndicatorPositive => {
                Ok(Box::new(|x| if x > 0.0 { 1.0 } else { 0.0 }))
            }
            FSpec::BeamSurvival { params } => {
                params.validate()?;
                let p = params.clone();
                Ok(Box::new(move |x| {
                    if crate::experiments::beam::beam_limit_state(x, &p) > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }))
            }
            FSpec::Constant { value } => {
                let c = *value;
                Ok(Box::new(move |_| c))
            }
            FSpec::Identity => Ok(Box::new(|x| x)),
            FSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::Config("polynomial needs coefficients".into()));
                }
                let cs = coefficients.clone();
                Ok(Box::new(move |x| {
                    cs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
                }))
            }
        }
    }
}

fn default_backend() -> Backend {
    Backend::Importance
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub family: FamilySpec,
    pub central: Distribution,
    pub f: FSpec,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaiveConfig {
    pub dist: Distribution,
    pub m_list: Vec<usize>,
    pub n_per_dist: usize,
    pub replications: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasSweepConfig {
    pub family: FamilySpec,
    pub central: Distribution,
    pub f: FSpec,
    #[serde(default = "default_backend")]
    pub backend: Backend,
    pub n_grid: Vec<usize>,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Closed-form oracle; computed by quadrature on a 5x denser grid when
    /// absent.
    #[serde(default)]
    pub oracle_envelope: Option<f64>,
    #[serde(default)]
    pub naive: Option<NaiveConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyCheckConfig {
    #[serde(default)]
    pub route: Option<Route>,
    #[serde(default)]
    pub family: Option<FamilySpec>,
    /// When present, the check targets the beam family with its closed-form
    /// envelope maps.
    #[serde(default)]
    pub beam: Option<BeamParams>,
    #[serde(default)]
    pub grid: GridSpec,
}

impl Default for ConsistencyCheckConfig {
    fn default() -> Self {
        ConsistencyCheckConfig {
            route: None,
            family: None,
            beam: Some(BeamParams::default()),
            grid: GridSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamConfig {
    pub params: BeamParams,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub routes: Vec<Route>,
    pub oracle_grid_per_dim: usize,
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            params: BeamParams::default(),
            n: 10_000,
            replications: 5,
            seed: 0,
            solver: SolverConfig::default(),
            routes: vec![
                Route::GradientBox,
                Route::IsGradientDensity,
                Route::IsCompactBoundedF,
            ],
            oracle_grid_per_dim: 101,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoConsistencyConfig {
    pub f: FSpec,
    pub n_list: Vec<usize>,
    pub seed: u64,
    pub subfamily_n: usize,
}

impl Default for NoConsistencyConfig {
    fn default() -> Self {
        NoConsistencyConfig {
            f: FSpec::Constant { value: 2.0 },
            n_list: vec![1, 10, 100, 1000],
            seed: 0,
            subfamily_n: 10_000,
        }
    }
}

/// Reads and strictly validates a JSON config from a file or stdin (`-`).
pub fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?
    };
    parse_config_str(&text)
}

pub fn parse_config_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
}

fn parse_or_default<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T> {
    match path {
        Some(p) => parse_config(p),
        None => Ok(T::default()),
    }
}

fn require_config<T: serde::de::DeserializeOwned>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => parse_config(p),
        None => Err(Error::Config("--config is required for this subcommand".into())),
    }
}

/// Parsed command line.
#[derive(Debug, Clone)]
pub enum Subcommand {
    Estimate,
    BiasSweep,
    ConsistencyCheck { route: Option<String> },
    ExampleBeam,
    ExampleNoConsistency,
}

#[derive(Debug, Clone)]
pub struct CliOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

/// Exit status for an error: 2 for config/input problems, 1 for computation
/// failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) | Error::Io(_) => 2,
        _ => 1,
    }
}

#[derive(Serialize)]
struct Summary<'a, C: Serialize, R: Serialize> {
    version: &'static str,
    command: &'a str,
    config: C,
    results: R,
}

struct OutputWriter {
    out_dir: PathBuf,
}

impl OutputWriter {
    fn new(out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(OutputWriter {
            out_dir: out_dir.to_path_buf(),
        })
    }

    fn write_json<C: Serialize, R: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: C,
        results: R,
    ) -> Result<()> {
        let summary = Summary {
            version: VERSION,
            command,
            config,
            results,
        };
        let mut text = serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::Computation(format!("serialization failed: {e}")))?;
        text.push('\n');
        fs::write(self.out_dir.join(name), text)?;
        Ok(())
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<()> {
        let mut text = String::from(header);
        text.push('\n');
        for row in rows {
            text.push_str(row);
            text.push('\n');
        }
        fs::write(self.out_dir.join(name), text)?;
        Ok(())
    }
}

/// Slim, stable serialization of an estimate (the solver trace stays out of
/// the summary).
#[derive(Serialize)]
struct EstimateView {
    value: f64,
    argmin_t: Vec<f64>,
    n: usize,
    seed: u64,
    support_violations: usize,
    nan_objectives: usize,
}

impl From<&EnvelopeEstimate> for EstimateView {
    fn from(est: &EnvelopeEstimate) -> Self {
        EstimateView {
            value: est.value,
            argmin_t: est.argmin_t.clone(),
            n: est.n,
            seed: est.seed,
            support_violations: est.support_violations,
            nan_objectives: est.nan_objectives,
        }
    }
}

fn join_floats(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Runs a subcommand end to end. Outputs land in `opts.out_dir`.
pub fn dispatch(cmd: &Subcommand, opts: &CliOptions) -> Result<()> {
    if let Some(threads) = opts.threads {
        // Ignore the error when a pool already exists (repeated dispatch in
        // tests); the contract is schedule independence, not pool shape.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out = OutputWriter::new(&opts.out_dir)?;
    match cmd {
        Subcommand::Estimate => run_estimate(opts, &out),
        Subcommand::BiasSweep => run_bias_sweep(opts, &out),
        Subcommand::ConsistencyCheck { route } => run_consistency_check(route.as_deref(), opts, &out),
        Subcommand::ExampleBeam => run_example_beam(opts, &out),
        Subcommand::ExampleNoConsistency => run_example_no_consistency(opts, &out),
    }
}

fn run_estimate(opts: &CliOptions, out: &OutputWriter) -> Result<()> {
    let mut cfg: EstimateConfig = require_config(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.central.validate()?;
    cfg.solver.validate()?;
    let family = cfg.family.build()?;
    let f = cfg.f.build()?;
    let est = lower_envelope_estimate(
        &*f,
        &family,
        &cfg.central,
        cfg.backend,
        cfg.n,
        cfg.seed,
        &cfg.solver,
    )?;
    out.write_csv(
        "estimate.csv",
        "n,replication,estimate,seed,argmin",
        &[format!(
            "{},{},{},{},{}",
            est.n,
            0,
            est.value,
            est.seed,
            join_floats(&est.argmin_t, ";")
        )],
    )?;
    out.write_json("estimate.json", "estimate", &cfg, EstimateView::from(&est))
}

#[derive(Serialize)]
struct BiasSweepView {
    sweep: BiasSweepResult,
    naive: Option<NaiveSweepResult>,
}

fn run_bias_sweep(opts: &CliOptions, out: &OutputWriter) -> Result<()> {
    let mut cfg: BiasSweepConfig = require_config(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.central.validate()?;
    cfg.solver.validate()?;
    let family = cfg.family.build()?;
    let f = cfg.f.build()?;
    let oracle = match cfg.oracle_envelope {
        Some(v) => v,
        None => {
            let dense = (cfg.solver.grid_points_per_dim - 1) * 5 + 1;
            quadrature_envelope_oracle(&*f, &family, dense)?.1
        }
    };
    let setup = BiasSetup {
        f: &*f,
        family: &family,
        central: &cfg.central,
        backend: cfg.backend,
        oracle_envelope: oracle,
        solver: &cfg.solver,
    };
    let sweep = bias_sweep(&setup, &cfg.n_grid, cfg.replications, cfg.seed)?;
    let naive = match &cfg.naive {
        Some(nc) => {
            nc.dist.validate()?;
            Some(naive_identical_sweep(
                &*f,
                &nc.dist,
                &nc.m_list,
                nc.n_per_dist,
                nc.replications,
                derive_seed(cfg.seed, u64::MAX),
            )?)
        }
        None => None,
    };
    let mut rows = Vec::new();
    for i in 0..sweep.n_grid.len() {
        rows.push(format!(
            "{},{},{},{}",
            sweep.n_grid[i], sweep.replication_means[i], sweep.stderrs[i], sweep.oracle_envelope
        ));
    }
    out.write_csv("bias_sweep.csv", "n,replication_mean,stderr,oracle", &rows)?;
    if let Some(naive) = &naive {
        let rows: Vec<String> = (0..naive.m_list.len())
            .map(|i| format!("{},{},{}", naive.m_list[i], naive.means[i], naive.stderrs[i]))
            .collect();
        out.write_csv("naive_sweep.csv", "m,replication_mean,stderr", &rows)?;
    }
    out.write_json("bias_sweep.json", "bias-sweep", &cfg, BiasSweepView { sweep, naive })
}

fn run_consistency_check(
    route_flag: Option<&str>,
    opts: &CliOptions,
    out: &OutputWriter,
) -> Result<()> {
    let cfg: ConsistencyCheckConfig = parse_or_default(opts.config.as_deref())?;
    let route = match (route_flag, cfg.route) {
        (Some(flag), _) => Route::parse(flag)?,
        (None, Some(route)) => route,
        (None, None) => {
            return Err(Error::Config(
                "a route is required (--route or the config's \"route\" field)".into(),
            ))
        }
    };
    let certificate: ConsistencyCertificate = if let Some(beam) = &cfg.beam {
        certify_beam_route(beam, route, &cfg.grid)?
    } else if let Some(spec) = &cfg.family {
        let family = spec.build()?;
        let mut setup = CertifySetup::new(&family, route);
        setup.grid = cfg.grid.clone();
        certify(&setup)?
    } else {
        return Err(Error::Config(
            "config needs a \"family\" or \"beam\" section".into(),
        ));
    };
    out.write_csv(
        "consistency_check.csv",
        "route,max_violation",
        &[format!("{},{}", route.name(), certificate.max_violation)],
    )?;
    out.write_json("consistency_check.json", "consistency-check", &cfg, certificate)
}

#[derive(Serialize)]
struct BeamRunView {
    replication: usize,
    seed: u64,
    estimate: f64,
    upper_failure_prob: f64,
    argmin_t: Vec<f64>,
}

#[derive(Serialize)]
struct BeamView {
    oracle: crate::experiments::beam::BeamOracle,
    certificates: Vec<ConsistencyCertificate>,
    runs: Vec<BeamRunView>,
    replication_mean: f64,
    replication_stderr: f64,
}

fn run_example_beam(opts: &CliOptions, out: &OutputWriter) -> Result<()> {
    let mut cfg: BeamConfig = parse_or_default(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    cfg.solver.validate()?;
    let oracle = beam_oracle(&cfg.params, cfg.oracle_grid_per_dim)?;
    let mut certificates = Vec::new();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for rep in 0..cfg.replications.max(1) {
        let seed = derive_seed(cfg.seed, rep as u64);
        let routes: &[Route] = if rep == 0 { &cfg.routes } else { &[] };
        let result = run_beam_example(&cfg.params, cfg.n, seed, &cfg.solver, routes)?;
        if rep == 0 {
            certificates = result.certificates;
        }
        rows.push(format!(
            "{},{},{},{},{},{}",
            cfg.n,
            rep,
            result.estimate.value,
            result.upper_failure_prob,
            join_floats(&result.estimate.argmin_t, ";"),
            seed
        ));
        runs.push(BeamRunView {
            replication: rep,
            seed,
            estimate: result.estimate.value,
            upper_failure_prob: result.upper_failure_prob,
            argmin_t: result.estimate.argmin_t,
        });
    }
    let values: Vec<f64> = runs.iter().map(|r| r.estimate).collect();
    let (mean, stderr) = crate::experiments::mean_and_stderr(&values)?;
    out.write_csv(
        "beam.csv",
        "n,replication,estimate,upper_failure_prob,argmin,seed",
        &rows,
    )?;
    out.write_json(
        "beam.json",
        "example-beam",
        &cfg,
        BeamView {
            oracle,
            certificates,
            runs,
            replication_mean: mean,
            replication_stderr: stderr,
        },
    )
}

#[derive(Serialize)]
struct NoConsistencyView {
    adversarial: NoConsistencyResult,
    finite_subfamily: FiniteSubfamilyResult,
    verdict: NoConsistencyVerdict,
}

#[derive(Serialize)]
struct NoConsistencyVerdict {
    all_zero: bool,
    envelope_lower_bound: f64,
    subfamily_within_band: bool,
}

fn run_example_no_consistency(opts: &CliOptions, out: &OutputWriter) -> Result<()> {
    let mut cfg: NoConsistencyConfig = parse_or_default(opts.config.as_deref())?;
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let f = cfg.f.build()?;
    let adversarial = run_no_consistency_example(&*f, &cfg.n_list, cfg.seed)?;
    let finite = finite_subfamily_contrast(&*f, cfg.subfamily_n, derive_seed(cfg.seed, u64::MAX))?;
    let rows: Vec<String> = (0..adversarial.n_list.len())
        .map(|i| {
            format!(
                "{},{},{}",
                adversarial.n_list[i], adversarial.objectives[i], adversarial.occupied_cells[i]
            )
        })
        .collect();
    out.write_csv("no_consistency.csv", "n,objective,occupied_cells", &rows)?;
    let verdict = NoConsistencyVerdict {
        all_zero: adversarial.all_zero,
        envelope_lower_bound: adversarial.envelope_lower_bound,
        subfamily_within_band: (finite.estimate - finite.exact_min).abs() <= 3.0 * finite.stderr,
    };
    out.write_json(
        "no_consistency.json",
        "example-no-consistency",
        &cfg,
        NoConsistencyView {
            adversarial,
            finite_subfamily: finite,
            verdict,
        },
    )
}
