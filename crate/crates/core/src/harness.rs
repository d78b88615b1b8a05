//! Command-line runner: seeded trial ensembles, report writers and exit codes.
//!
//! Exit codes: 0 every verdict holds, 1 some verdict is violated, 2 usage or
//! configuration error, 3 numerical failure (positivity floor, eigensolver).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::inequality::{
    check_dilation, check_key_lemma, check_operator_ssa, check_operator_wm,
    check_operator_wm_tripartite, check_renyi, modular_dimension_obstruction, scalar_ssa,
    scalar_wm, single_term_spectrum, DilationReport, Inequality, LoewnerReport, ObstructionReport,
    Verdict,
};
use crate::search::{
    alpha_grid, maximize_violation, slot_shapes, stress_boundary_random, SearchRecord,
    SearchTarget,
};
use crate::state::{random_density_from, trial_rng, DensityMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const THREADS_ENV: &str = "LOEWNER_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Dilation,
    Sweep,
    Search,
    Entropy,
    Obstruction,
}

#[derive(Debug, Parser)]
#[command(name = "loewner-lab", version, about = "Numerical certification of operator entropy inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check one inequality on seeded random states.
    Verify(CommonArgs),
    /// Compare the dilation composition with its closed form.
    Dilation(CommonArgs),
    /// Rényi α sweep, or boundary probes when --eps is given.
    Sweep(CommonArgs),
    /// Nelder-Mead search for violations or extremal slack.
    Search(CommonArgs),
    /// Entropies and scalar WM / SSA slacks.
    Entropy(CommonArgs),
    /// Dimension conditions for a shared cyclic and separating vector.
    Obstruction(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Inequality id; search also takes `renyi(α)` and `single_term_max_eig`.
    #[arg(long, default_value = "key-lemma")]
    pub ineq: String,
    /// Comma-separated dimensions in A,B,C order (A,B,C,D for obstruction).
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// `start:step:end` or a single value.
    #[arg(long, default_value = "0:0.1:1")]
    pub alpha: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub state_in: Option<PathBuf>,
    #[arg(long)]
    pub sigma_in: Option<PathBuf>,
    #[arg(long, default_value_t = 5000)]
    pub budget: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    /// Comma-separated regularization levels for boundary probes.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Scan every dimension tuple in [1, N]^4.
    #[arg(long)]
    pub scan: Option<u64>,
}

/// `2,3,2` → `[2, 3, 2]`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let dims = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| LabError::InvalidArgument(format!("bad dimension `{p}`: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.contains(&0) {
        return Err(LabError::InvalidArgument("dimensions must be positive".into()));
    }
    Ok(dims)
}

/// `start:step:end` or a single value.
pub fn parse_alpha(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |p: &str| {
        p.trim()
            .parse::<f64>()
            .map_err(|e| LabError::InvalidArgument(format!("bad α `{p}`: {e}")))
    };
    match parts.as_slice() {
        [a] => Ok(vec![num(a)?]),
        [start, step, end] => alpha_grid(num(start)?, num(step)?, num(end)?),
        _ => Err(LabError::InvalidArgument(format!(
            "α must be `start:step:end` or a single value, got `{s}`"
        ))),
    }
}

/// Validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub ineq: String,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub alpha_grid: Vec<f64>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub threads: Option<usize>,
    pub state_in: Option<PathBuf>,
    pub sigma_in: Option<PathBuf>,
    pub budget: usize,
    pub restarts: usize,
    pub eps: Option<Vec<f64>>,
    pub scan: Option<u64>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let (command, a) = match cli.command {
            CliCommand::Verify(a) => (Command::Verify, a),
            CliCommand::Dilation(a) => (Command::Dilation, a),
            CliCommand::Sweep(a) => (Command::Sweep, a),
            CliCommand::Search(a) => (Command::Search, a),
            CliCommand::Entropy(a) => (Command::Entropy, a),
            CliCommand::Obstruction(a) => (Command::Obstruction, a),
        };
        let dims = match (a.dims.as_deref().map(parse_dims).transpose()?, command) {
            (Some(d), _) => d,
            (None, Command::Obstruction) if a.scan.is_some() => Vec::new(),
            (None, Command::Obstruction) => vec![1, 1, 1, 1],
            (None, Command::Verify | Command::Search)
                if lenient_target(&a.ineq)
                    .is_ok_and(|t| t.inequality() == Inequality::SingleTerm) =>
            {
                vec![2, 2]
            }
            (None, _) => vec![2, 2, 2],
        };
        let threads = match a.threads {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| {
                    LabError::InvalidArgument(format!("{THREADS_ENV}=`{v}` is not a thread count"))
                })?),
                Err(_) => None,
            },
        };
        let config = RunConfig {
            command,
            ineq: a.ineq,
            dims,
            trials: a.trials,
            seed: a.seed,
            tol: a.tol,
            alpha_grid: parse_alpha(&a.alpha)?,
            output: a.output,
            format: a.format,
            threads,
            state_in: a.state_in,
            sigma_in: a.sigma_in,
            budget: a.budget,
            restarts: a.restarts,
            eps: a.eps,
            scan: a.scan,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::InvalidArgument(m));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.dims.contains(&0) {
            return bad("dimensions must be positive".into());
        }
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("α values must lie in [0, 1]".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        match self.command {
            Command::Verify => {
                let ineq: Inequality = self.ineq.parse()?;
                slot_shapes(ineq, &self.dims)?;
            }
            Command::Search => {
                let target = self.search_target()?;
                target.shapes(&self.dims)?;
                if self.restarts == 0 || self.budget < self.restarts {
                    return bad("need budget ≥ restarts ≥ 1".into());
                }
            }
            Command::Dilation | Command::Sweep | Command::Entropy => {
                if self.dims.len() != 3 {
                    return bad(format!("expected 3 dimensions, got {:?}", self.dims));
                }
            }
            Command::Obstruction => {
                if self.scan.is_none() && self.dims.len() != 4 {
                    return bad(format!("expected 4 dimensions, got {:?}", self.dims));
                }
                if self.scan == Some(0) {
                    return bad("scan bound must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    /// Search target from `--ineq`; a bare `renyi` takes its α from a
    /// single-value `--alpha`.
    pub fn search_target(&self) -> Result<SearchTarget> {
        if self.ineq == "renyi" {
            return match self.alpha_grid.as_slice() {
                [a] => SearchTarget::new(Inequality::Renyi, Some(*a)),
                _ => Err(LabError::InvalidArgument(
                    "renyi search needs a single --alpha value or `renyi(α)`".into(),
                )),
            };
        }
        lenient_target(&self.ineq)
    }
}

/// Like `SearchTarget::from_str`, but also accepts a bare `renyi`.
fn lenient_target(s: &str) -> Result<SearchTarget> {
    if s == "renyi" {
        return SearchTarget::new(Inequality::Renyi, Some(0.5));
    }
    s.parse()
}

/// Flattening of a report record into CSV columns.
pub trait ReportRow {
    fn header() -> Vec<&'static str>;
    fn row(&self) -> Vec<String>;
}

fn float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.16e}")
    }
}

fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn dims_cell<T: ToString>(dims: &[T]) -> String {
    dims.iter().map(ToString::to_string).collect::<Vec<_>>().join("x")
}

fn verdict_cell(v: Verdict) -> String {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
    .into()
}

impl ReportRow for LoewnerReport {
    fn header() -> Vec<&'static str> {
        vec![
            "inequality", "dims", "seed", "trial", "alpha", "epsilon", "slack_min_eig", "scale",
            "tol_abs", "verdict", "error",
        ]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.inequality.to_string(),
            dims_cell(&self.dims),
            self.seed.to_string(),
            opt(&self.trial),
            opt_float(self.alpha),
            opt_float(self.epsilon),
            float(self.slack_min_eig),
            float(self.scale),
            float(self.tol_abs),
            verdict_cell(self.verdict),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

impl ReportRow for DilationReport {
    fn header() -> Vec<&'static str> {
        vec![
            "dims", "seed", "trial", "max_abs_diff", "scale", "rho_isometry_defect",
            "sigma_isometry_defect", "operator_norm", "tol_abs", "verdict",
        ]
    }

    fn row(&self) -> Vec<String> {
        vec![
            dims_cell(&self.dims),
            self.seed.to_string(),
            opt(&self.trial),
            float(self.max_abs_diff),
            float(self.scale),
            float(self.rho_isometry_defect),
            float(self.sigma_isometry_defect),
            float(self.operator_norm),
            float(self.tol_abs),
            verdict_cell(self.verdict),
        ]
    }
}

impl ReportRow for SearchRecord {
    fn header() -> Vec<&'static str> {
        vec![
            "target", "dims", "best_objective", "evaluations", "restarts", "seed", "violations",
            "best_state_file", "best_sigma_file",
        ]
    }

    fn row(&self) -> Vec<String> {
        vec![
            self.target.clone(),
            dims_cell(&self.dims),
            float(self.best_objective),
            self.evaluations.to_string(),
            self.restarts.to_string(),
            self.seed.to_string(),
            self.violations.to_string(),
            opt(&self.best_state_file),
            opt(&self.best_sigma_file),
        ]
    }
}

impl ReportRow for ObstructionReport {
    fn header() -> Vec<&'static str> {
        vec!["dims", "cond1", "cond2", "compatible"]
    }

    fn row(&self) -> Vec<String> {
        vec![
            dims_cell(&self.dims),
            self.cond1.to_string(),
            self.cond2.to_string(),
            self.compatible.to_string(),
        ]
    }
}

/// Von Neumann entropies (nats) of a tripartite state and its scalar slacks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub trial: Option<u64>,
    pub s_a: f64,
    pub s_b: f64,
    pub s_c: f64,
    pub s_ab: f64,
    pub s_bc: f64,
    pub s_abc: f64,
    pub scalar_wm: f64,
    pub scalar_ssa: f64,
    pub tol_abs: f64,
    pub verdict: Verdict,
}

impl EntropyRecord {
    pub fn compute(rho: &DensityMatrix, tol: f64) -> Result<Self> {
        let labels: Vec<String> = rho.shape().labels().iter().map(|l| l.to_string()).collect();
        if labels.len() != 3 {
            return Err(LabError::InvalidShape(format!(
                "entropy records need a tripartite state, got {}",
                rho.shape()
            )));
        }
        let (a, b, c) = (labels[0].as_str(), labels[1].as_str(), labels[2].as_str());
        let s = |keep: &[&str]| rho.marginal(keep)?.von_neumann_entropy();
        let wm = scalar_wm(rho)?;
        let ssa = scalar_ssa(rho)?;
        Ok(Self {
            dims: rho.shape().dims(),
            seed: 0,
            trial: None,
            s_a: s(&[a])?,
            s_b: s(&[b])?,
            s_c: s(&[c])?,
            s_ab: s(&[a, b])?,
            s_bc: s(&[b, c])?,
            s_abc: rho.von_neumann_entropy()?,
            scalar_wm: wm,
            scalar_ssa: ssa,
            tol_abs: tol,
            verdict: Verdict::classify(wm.min(ssa), 0.0, tol),
        })
    }
}

impl ReportRow for EntropyRecord {
    fn header() -> Vec<&'static str> {
        vec![
            "dims", "seed", "trial", "s_a", "s_b", "s_c", "s_ab", "s_bc", "s_abc", "scalar_wm",
            "scalar_ssa", "tol_abs", "verdict",
        ]
    }

    fn row(&self) -> Vec<String> {
        vec![
            dims_cell(&self.dims),
            self.seed.to_string(),
            opt(&self.trial),
            float(self.s_a),
            float(self.s_b),
            float(self.s_c),
            float(self.s_ab),
            float(self.s_bc),
            float(self.s_abc),
            float(self.scalar_wm),
            float(self.scalar_ssa),
            float(self.tol_abs),
            verdict_cell(self.verdict),
        ]
    }
}

/// Writes `records` as a JSON array or a CSV table to `path` (stdout when `None`).
pub fn emit_report<R: Serialize + ReportRow>(
    records: &[R],
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<()> {
    if records.is_empty() {
        return Err(LabError::InvalidArgument("no records to emit".into()));
    }
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(sink);
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, records)?;
            out.write_all(b"\n")?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(R::header())?;
            for r in records {
                w.write_record(r.row())?;
            }
            w.flush()?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Exit code implied by a set of verdicts and error flags.
fn verdict_exit(verdicts: impl IntoIterator<Item = (Verdict, bool)>) -> i32 {
    let mut code = EXIT_OK;
    for (v, errored) in verdicts {
        if v == Verdict::Violated {
            return EXIT_VIOLATED;
        }
        if errored {
            code = EXIT_NUMERICAL;
        }
    }
    code
}

fn loewner_exit(reports: &[LoewnerReport]) -> i32 {
    verdict_exit(reports.iter().map(|r| (r.verdict, r.error.is_some())))
}

/// Runs `config` and returns the process exit code.
pub fn run(config: &RunConfig) -> Result<i32> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| LabError::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match config.command {
        Command::Verify => run_verify(config),
        Command::Dilation => run_dilation(config),
        Command::Sweep => run_sweep(config),
        Command::Search => run_search(config),
        Command::Entropy => run_entropy(config),
        Command::Obstruction => run_obstruction(config),
    })
}

/// Parses `args` (program name first), runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|c| run(&c));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
    }
}

/// States for one trial: file overrides where given, seeded samples elsewhere.
fn trial_states(
    config: &RunConfig,
    shapes: &[crate::tensor::SystemShape],
    overrides: &[Option<DensityMatrix>],
    trial: u64,
) -> Result<Vec<DensityMatrix>> {
    let mut rng = trial_rng(config.seed, trial);
    shapes
        .iter()
        .enumerate()
        .map(|(i, shape)| {
            let sampled = random_density_from(&mut rng, shape, None)?;
            Ok(overrides.get(i).cloned().flatten().unwrap_or(sampled))
        })
        .collect()
}

/// Loads `--state-in` / `--sigma-in`, relabeled to the slot shapes.
fn load_overrides(
    config: &RunConfig,
    shapes: &[crate::tensor::SystemShape],
) -> Result<Vec<Option<DensityMatrix>>> {
    [&config.state_in, &config.sigma_in]
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let Some(path) = path else { return Ok(None) };
            let shape = shapes.get(i).ok_or_else(|| {
                LabError::InvalidArgument(format!("this command takes no state in slot {}", i + 1))
            })?;
            let rho = DensityMatrix::read_json(path)?;
            if rho.shape().dims() != shape.dims() {
                return Err(LabError::DimensionMismatch(format!(
                    "{} has shape {}, expected dimensions {:?}",
                    path.display(),
                    rho.shape(),
                    shape.dims()
                )));
            }
            Ok(Some(rho.with_labels(&shape.labels())?))
        })
        .collect()
}

/// Runs one inequality check on the states of a trial.
pub fn verify_once(
    inequality: Inequality,
    alpha: Option<f64>,
    states: &[DensityMatrix],
    tol: f64,
) -> Result<LoewnerReport> {
    let dims: Vec<usize> = match states {
        [rho, sigma] => vec![rho.shape().dim(0), rho.shape().dim(1), sigma.shape().dim(1)],
        [rho] => rho.shape().dims(),
        _ => return Err(LabError::InvalidArgument("expected one or two states".into())),
    };
    let scalar = |v: f64| LoewnerReport::new(inequality, dims.clone(), v, 0.0, tol, Vec::new());
    match (inequality, states) {
        (Inequality::KeyLemma, [r, s]) => check_key_lemma(r, s, tol),
        (Inequality::OperatorWm, [r, s]) => check_operator_wm(r, s, tol),
        (Inequality::Renyi, [r, s]) => {
            check_renyi(r, s, alpha.ok_or_else(|| LabError::InvalidArgument("missing α".into()))?, tol)
        }
        (Inequality::OperatorWmTripartite, [r]) => check_operator_wm_tripartite(r, tol),
        (Inequality::OperatorSsa, [r]) => check_operator_ssa(r, tol),
        (Inequality::ScalarWm, [r]) => Ok(scalar(scalar_wm(r)?)),
        (Inequality::ScalarSsa, [r]) => Ok(scalar(scalar_ssa(r)?)),
        (Inequality::SingleTerm, [r]) => {
            let eigs = single_term_spectrum(r)?;
            let (lo, hi) = (eigs[0], *eigs.last().unwrap());
            Ok(LoewnerReport::new(inequality, dims, -hi, lo.abs().max(hi.abs()), tol, Vec::new()))
        }
        _ => Err(LabError::InvalidArgument(format!(
            "{inequality} got {} states",
            states.len()
        ))),
    }
}

fn run_verify(config: &RunConfig) -> Result<i32> {
    let ineq: Inequality = config.ineq.parse()?;
    let shapes = slot_shapes(ineq, &config.dims)?;
    let overrides = load_overrides(config, &shapes)?;
    let alphas: Vec<Option<f64>> = if ineq == Inequality::Renyi {
        config.alpha_grid.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    let per_trial: Vec<Vec<LoewnerReport>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<LoewnerReport>> {
            let states = trial_states(config, &shapes, &overrides, t)?;
            let mut out = Vec::with_capacity(alphas.len());
            for &alpha in &alphas {
                let mut report = match verify_once(ineq, alpha, &states, config.tol) {
                    Ok(r) => r,
                    Err(e) if e.is_numerical() => {
                        LoewnerReport::failed(ineq, config.dims.clone(), config.tol, &e)
                    }
                    Err(e) => return Err(e),
                };
                report.alpha = alpha;
                out.push(report.with_seed(config.seed, Some(t)));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let reports: Vec<LoewnerReport> = per_trial.into_iter().flatten().collect();
    emit_report(&reports, config.format, config.output.as_deref())?;
    Ok(loewner_exit(&reports))
}

fn run_dilation(config: &RunConfig) -> Result<i32> {
    let shapes = slot_shapes(Inequality::KeyLemma, &config.dims)?;
    let overrides = load_overrides(config, &shapes)?;
    let reports: Vec<DilationReport> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let states = trial_states(config, &shapes, &overrides, t)?;
            Ok(check_dilation(&states[0], &states[1])?.with_seed(config.seed, Some(t)))
        })
        .collect::<Result<_>>()?;
    emit_report(&reports, config.format, config.output.as_deref())?;
    Ok(verdict_exit(reports.iter().map(|r| (r.verdict, false))))
}

fn run_sweep(config: &RunConfig) -> Result<i32> {
    if let Some(eps) = &config.eps {
        let reports = stress_boundary_random(&config.dims, eps, config.seed, config.tol)?;
        emit_report(&reports, config.format, config.output.as_deref())?;
        return Ok(loewner_exit(&reports));
    }
    let renyi = RunConfig { ineq: Inequality::Renyi.to_string(), ..config.clone() };
    run_verify(&renyi)
}

fn run_entropy(config: &RunConfig) -> Result<i32> {
    let shapes = slot_shapes(Inequality::ScalarWm, &config.dims)?;
    let overrides = load_overrides(config, &shapes)?;
    let records: Vec<EntropyRecord> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let states = trial_states(config, &shapes, &overrides, t)?;
            let mut r = EntropyRecord::compute(&states[0], config.tol)?;
            r.seed = config.seed;
            r.trial = Some(t);
            Ok(r)
        })
        .collect::<Result<_>>()?;
    emit_report(&records, config.format, config.output.as_deref())?;
    Ok(verdict_exit(records.iter().map(|r| (r.verdict, false))))
}

fn sidecar(output: &Path, suffix: &str) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    output.with_file_name(format!("{stem}.{suffix}.json"))
}

fn run_search(config: &RunConfig) -> Result<i32> {
    let target = config.search_target()?;
    let result = maximize_violation(
        target,
        &config.dims,
        config.budget,
        config.restarts,
        config.seed,
        config.tol,
    )?;
    let (mut state_file, mut sigma_file) = (None, None);
    if let Some(out) = &config.output {
        let states = result.best_states()?;
        let path = sidecar(out, "best_state");
        states[0].write_json(&path)?;
        state_file = Some(path.display().to_string());
        if let Some(sigma) = states.get(1) {
            let path = sidecar(out, "best_sigma");
            sigma.write_json(&path)?;
            sigma_file = Some(path.display().to_string());
        }
    }
    let record = result.record(state_file, sigma_file);
    emit_report(std::slice::from_ref(&record), config.format, config.output.as_deref())?;
    let proven = target.inequality().is_proven();
    Ok(if proven && result.violations > 0 { EXIT_VIOLATED } else { EXIT_OK })
}

fn run_obstruction(config: &RunConfig) -> Result<i32> {
    let reports: Vec<ObstructionReport> = match config.scan {
        Some(n) => {
            let mut out = Vec::with_capacity((n as usize).pow(4));
            for a in 1..=n {
                for b in 1..=n {
                    for c in 1..=n {
                        for d in 1..=n {
                            out.push(modular_dimension_obstruction(a, b, c, d)?);
                        }
                    }
                }
            }
            out
        }
        None => {
            let d: Vec<u64> = config.dims.iter().map(|&x| x as u64).collect();
            vec![modular_dimension_obstruction(d[0], d[1], d[2], d[3])?]
        }
    };
    emit_report(&reports, config.format, config.output.as_deref())?;
    Ok(EXIT_OK)
}
