//! Command-line front end.
//!
//! Every flag can also be set through an environment variable named
//! `REFGOV_<FLAG>` (for example `REFGOV_BETA`), or through a JSON run
//! configuration given with `--config`. Explicit flags win over the
//! environment, which wins over the configuration file.
//!
//! Exit codes: 0 success, 2 configuration error, 3 infeasible or inadmissible,
//! 4 numerical failure.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::governor::{self, GovernorState, ReferenceSearch};
use crate::lift::{box_vertices, ProblemSpec};
use crate::moas::{self, Polytope};
use crate::pipeline::{self, SynthesisOptions};
use crate::polytope_io;
use crate::problem_file::ProblemFile;
use crate::sim::{self, AircraftPreset, DisturbanceKind, DisturbanceSource, Trajectory};

pub const TOOL: &str = "refgov";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default horizon: 6 s at the aircraft sampling period.
pub const DEFAULT_STEPS: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Aircraft,
    AircraftDisturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaSamples {
    /// Vertices of the parameter box.
    Vertices,
    /// Vertices plus an interior grid.
    Grid,
    /// Midpoint of the box only.
    Nominal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Disturbance {
    UniformRandom,
    Zero,
    WorstCorner,
}

impl From<Disturbance> for DisturbanceKind {
    fn from(d: Disturbance) -> Self {
        match d {
            Disturbance::UniformRandom => DisturbanceKind::UniformRandom,
            Disturbance::Zero => DisturbanceKind::Zero,
            Disturbance::WorstCorner => DisturbanceKind::WorstCorner,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Reference governors for uncertain polynomial constraints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Synthesize the admissible set and write it with a report.
    BuildMoas,
    /// Simulate the governed (or ungoverned) loop.
    Run,
    /// Evaluate the constraint outputs of a run over parameter samples.
    Sweep,
    /// Tabulate the initial reference over a grid of initial states.
    GridInit,
    /// Compare the set sizes for several β with the reference counts.
    CalibrateBeta,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true, env = "REFGOV_CONFIG")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "REFGOV_PRESET", conflicts_with = "problem")]
    pub preset: Option<Preset>,
    /// JSON problem file.
    #[arg(long, global = true, env = "REFGOV_PROBLEM")]
    pub problem: Option<PathBuf>,
    #[arg(long, global = true, env = "REFGOV_BETA")]
    pub beta: Option<f64>,
    /// Relative tightening of the predicted rows.
    #[arg(long, global = true, env = "REFGOV_EPS")]
    pub eps: Option<f64>,
    #[arg(long, global = true, env = "REFGOV_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "REFGOV_STEPS")]
    pub steps: Option<usize>,
    #[arg(long, global = true, env = "REFGOV_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "REFGOV_NO_GOVERNOR")]
    pub no_governor: bool,
    #[arg(long, global = true, env = "REFGOV_BISECTION_DEPTH")]
    pub bisection_depth: Option<u32>,
    #[arg(long, global = true, env = "REFGOV_ITERATION_CAP")]
    pub iteration_cap: Option<usize>,
    /// Half-width of the aircraft disturbance box in rad.
    #[arg(long, global = true, env = "REFGOV_W_BOUND")]
    pub w_bound: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, global = true, env = "REFGOV_X0", value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long, global = true, env = "REFGOV_DISTURBANCE")]
    pub disturbance: Option<Disturbance>,
    #[arg(long, global = true, env = "REFGOV_THETA_SAMPLES")]
    pub theta_samples: Option<ThetaSamples>,
    /// Interior grid points per parameter axis for `--theta-samples grid`.
    #[arg(long, global = true, env = "REFGOV_PER_AXIS")]
    pub per_axis: Option<usize>,
    /// Grid points per state axis for `grid-init`.
    #[arg(long, global = true, env = "REFGOV_GRID_POINTS")]
    pub grid_points: Option<usize>,
    /// β values for `calibrate-beta`, comma separated.
    #[arg(long, global = true, env = "REFGOV_BETAS", value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Ignore and overwrite cached polytopes.
    #[arg(long, global = true, env = "REFGOV_NO_CACHE")]
    pub no_cache: bool,
}

/// Fully resolved settings of one invocation; written into every metadata sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub problem: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub steps: usize,
    pub beta: Option<f64>,
    pub eps: Option<f64>,
    pub bisection_depth: u32,
    pub iteration_cap: usize,
    pub w_bound: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub governor: bool,
    pub disturbance: Disturbance,
    pub theta_samples: ThetaSamples,
    pub per_axis: usize,
    pub grid_points: usize,
    pub betas: Vec<f64>,
    pub use_cache: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: None,
            problem: None,
            out: PathBuf::from("refgov-out"),
            seed: 0,
            steps: DEFAULT_STEPS,
            beta: None,
            eps: None,
            bisection_depth: governor::DEFAULT_BISECTION_DEPTH,
            iteration_cap: SynthesisOptions::default().iteration_cap,
            w_bound: None,
            x0: None,
            governor: true,
            disturbance: Disturbance::UniformRandom,
            theta_samples: ThetaSamples::Vertices,
            per_axis: 1,
            grid_points: 5,
            betas: pipeline::CALIBRATION_BETAS.to_vec(),
            use_cache: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Layers flags over an optional configuration file.
    pub fn resolve(flags: &Flags) -> Result<Self> {
        let mut c = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if flags.preset.is_some() || flags.problem.is_some() {
            c.preset = flags.preset;
            c.problem = flags.problem.clone();
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = flags.$f.clone() { c.$f = v; } )* };
        }
        take!(out, seed, steps, bisection_depth, iteration_cap, disturbance, theta_samples, per_axis, grid_points, betas);
        macro_rules! take_opt {
            ($($f:ident),*) => { $( if flags.$f.is_some() { c.$f = flags.$f.clone(); } )* };
        }
        take_opt!(beta, eps, w_bound, x0);
        if flags.no_governor {
            c.governor = false;
        }
        if flags.no_cache {
            c.use_cache = false;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.preset.is_some() == self.problem.is_some() {
            return Err(Error::InvalidArgument(
                "give exactly one of --preset or --problem".into(),
            ));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidArgument(format!("--beta must lie in (0, 1), got {b}")));
            }
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidArgument(format!("--eps must be finite and >= 0, got {e}")));
            }
        }
        if let Some(w) = self.w_bound {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("--w-bound must be finite and >= 0, got {w}")));
            }
            if self.preset.is_none() {
                return Err(Error::InvalidArgument("--w-bound only applies to the aircraft presets".into()));
            }
        }
        if self.bisection_depth == 0 {
            return Err(Error::InvalidArgument("--bisection-depth must be >= 1".into()));
        }
        if self.betas.iter().any(|&b| !(b > 0.0 && b < 1.0)) {
            return Err(Error::InvalidArgument("--betas entries must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn synthesis_options(&self) -> SynthesisOptions {
        SynthesisOptions {
            eps: self.eps,
            iteration_cap: self.iteration_cap,
            ..SynthesisOptions::default()
        }
    }

    fn aircraft(&self, beta: Option<f64>) -> AircraftPreset {
        let mut p = AircraftPreset::default();
        if let Some(b) = beta.or(self.beta) {
            p.beta = b;
        }
        if let Some(w) = self.w_bound {
            p.w_bound = w;
        }
        p
    }

    /// Problem for this configuration, with `beta` overriding everything else.
    pub fn problem_with_beta(&self, beta: Option<f64>) -> Result<ProblemSpec> {
        match (self.preset, &self.problem) {
            (Some(preset), _) => sim::build_aircraft_problem(&self.aircraft(beta), preset == Preset::AircraftDisturbed),
            (None, Some(path)) => {
                let mut file = ProblemFile::load(path)?;
                if let Some(b) = beta.or(self.beta) {
                    file.beta = b;
                }
                file.to_spec()
            }
            (None, None) => Err(Error::InvalidArgument("no problem given".into())),
        }
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        self.problem_with_beta(None)
    }

    /// Initial state: the flag, else 14° for the aircraft, else the origin.
    pub fn initial_state(&self, spec: &ProblemSpec) -> Result<Vec<f64>> {
        let x0 = match (&self.x0, self.preset) {
            (Some(x), _) => x.clone(),
            (None, Some(_)) => vec![14f64.to_radians(), 0.0],
            (None, None) => vec![0.0; spec.n_x()],
        };
        if x0.len() != spec.n_x() {
            return Err(Error::DimensionMismatch {
                what: "--x0".into(),
                expected: spec.n_x(),
                found: x0.len(),
            });
        }
        Ok(x0)
    }
}

/// Cache key of a synthesis: hash of the canonical problem JSON and every
/// numeric option that affects the polytope.
pub fn cache_key(spec: &ProblemSpec, opts: &SynthesisOptions) -> Result<String> {
    let canonical = ProblemFile::from_spec(spec)?.to_json();
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update(serde_json::to_string(opts)?.as_bytes());
    h.update(format!("eps={:e}", opts.eps_for(spec)).as_bytes());
    h.update(VERSION.as_bytes());
    Ok(hex::encode(h.finalize()))
}

/// Maps an error to the documented exit code.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::TightenedInfeasible { .. }
        | Error::InadmissibleInitialState { .. }
        | Error::UnboundedCoordinate { .. } => 3,
        Error::NumericallyDegenerate { .. } | Error::NotFinitelyDetermined { .. } | Error::NonFinite { .. } => 4,
        _ => 2,
    }
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    file: String,
    input_hash: &'a str,
    ordering: String,
    beta: f64,
    eps: f64,
    seed: u64,
    generator: &'static str,
    config: &'a RunConfig,
}

struct Context {
    cfg: RunConfig,
    command: Command,
    spec: ProblemSpec,
    opts: SynthesisOptions,
    key: String,
}

impl Context {
    fn new(cfg: RunConfig, command: Command) -> Result<Self> {
        let spec = cfg.problem()?;
        let opts = cfg.synthesis_options();
        let key = cache_key(&spec, &opts)?;
        std::fs::create_dir_all(&cfg.out)?;
        Ok(Self { cfg, command, spec, opts, key })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    /// Writes `name` and its `name.meta.json` sidecar.
    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, bytes)?;
        let bases = self.spec.bases()?;
        let meta = Metadata {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            file: name.to_string(),
            input_hash: &self.key,
            ordering: governor::ordering_label(&bases),
            beta: self.spec.beta,
            eps: self.opts.eps_for(&self.spec),
            seed: self.cfg.seed,
            generator: sim::GENERATOR_ID,
            config: &self.cfg,
        };
        let mut text = serde_json::to_string_pretty(&meta)?;
        text.push('\n');
        std::fs::write(self.path(&format!("{name}.meta.json")), text)?;
        Ok(path)
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn cache_path(&self, ext: &str) -> PathBuf {
        self.cfg.out.join("cache").join(format!("{}.{ext}", self.key))
    }

    /// Cached polytope and report if present, otherwise a fresh synthesis
    /// (which is then cached). The flag tells whether the cache was used.
    fn build(&self) -> Result<(BuildReport, Polytope, bool)> {
        let (poly_path, report_path) = (self.cache_path("poly"), self.cache_path("report.json"));
        if self.cfg.use_cache && poly_path.exists() && report_path.exists() {
            log::info!("using cached polytope {}", poly_path.display());
            let report: BuildReport = serde_json::from_str(&std::fs::read_to_string(&report_path)?)?;
            return Ok((report, polytope_io::load(&poly_path)?, true));
        }
        let (report, poly) = self.synthesize()?;
        std::fs::create_dir_all(poly_path.parent().expect("cache path has a parent"))?;
        polytope_io::save(&poly, &poly_path)?;
        std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
        Ok((report, poly, false))
    }

    fn polytope(&self) -> Result<Polytope> {
        Ok(self.build()?.1)
    }

    fn synthesize(&self) -> Result<(BuildReport, Polytope)> {
        let started = Instant::now();
        let s = pipeline::synthesize(&self.spec, &self.opts)?;
        let seconds = started.elapsed().as_secs_f64();
        let single_stage = self.spec.p == 1;
        let report = BuildReport {
            input_hash: self.key.clone(),
            dim: s.robust.polytope.dim(),
            ordering: s.robust.polytope.ordering().to_string(),
            theta_vertices: s.vertices.len(),
            vertex_rows: s.vertices.iter().map(|v| v.h.len()).sum(),
            beta: self.spec.beta,
            eps: s.eps,
            linear: StageReport::new(&s.linear, s.linear_seconds),
            robust: StageReport::new(&s.robust, s.robust_seconds),
            state_box: s.state_box.lower.iter().copied().zip(s.state_box.upper.iter().copied()).collect(),
            single_stage,
            note: single_stage.then(|| {
                "p = 1: the lifted system is the linear loop, so the second stage repeats the first on the same rows plus bounds"
                    .to_string()
            }),
            wall_seconds: seconds,
        };
        Ok((report, s.robust.polytope))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReport {
    pub t_star: usize,
    pub iterations: usize,
    pub rows_before: usize,
    pub rows_after: usize,
    pub seconds: f64,
}

impl StageReport {
    fn new(r: &moas::MoasResult, seconds: f64) -> Self {
        Self {
            t_star: r.t_star,
            iterations: r.iterations,
            rows_before: r.rows_before,
            rows_after: r.rows_after,
            seconds,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildReport {
    pub input_hash: String,
    pub dim: usize,
    pub ordering: String,
    pub theta_vertices: usize,
    pub vertex_rows: usize,
    pub beta: f64,
    pub eps: f64,
    pub linear: StageReport,
    pub robust: StageReport,
    pub state_box: Vec<(f64, f64)>,
    pub single_stage: bool,
    pub note: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub steps: usize,
    pub governed: bool,
    pub v0: Vec<f64>,
    /// Every audited step was inside the admissible set.
    pub audit_all_true: Option<bool>,
    pub first_violation: Option<Violation>,
    pub margin_exhausted_steps: Vec<usize>,
    /// `‖v(k)‖ <= β^k ‖v(0)‖` held at every step.
    pub reference_decay_ok: bool,
    /// Largest `|f_i|` per constraint over all steps and parameter vertices.
    pub max_abs_output: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    pub theta_sample: usize,
    pub constraint: usize,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory CSV: `k, x_*, v_*, w_*, lambda, audit, f<i>@theta<s>`.
pub fn trajectory_csv(traj: &Trajectory, n_x: usize, n_v: usize, n_w: usize, n_c: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string()];
    header.extend((1..=n_x).map(|i| format!("x_{i}")));
    header.extend((1..=n_v).map(|i| format!("v_{i}")));
    header.extend((1..=n_w).map(|i| format!("w_{i}")));
    header.push("lambda".into());
    header.push("audit".into());
    for s in 1..=traj.theta_samples.len() {
        for i in 1..=n_c {
            header.push(format!("f{i}@theta{s}"));
        }
    }
    w.write_record(&header)?;
    for k in 0..traj.len() {
        let mut rec = vec![traj.times[k].to_string()];
        rec.extend(traj.states[k].iter().map(|&v| num(v)));
        rec.extend(traj.refs[k].iter().map(|&v| num(v)));
        rec.extend(traj.disturbances[k].iter().map(|&v| num(v)));
        rec.push(traj.lambdas[k].map(num).unwrap_or_default());
        rec.push(traj.audit[k].map(|a| a.to_string()).unwrap_or_default());
        for outs in &traj.constraint_outputs[k] {
            rec.extend(outs.iter().map(|&v| num(v)));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn theta_samples(cfg: &RunConfig, spec: &ProblemSpec) -> Vec<Vec<f64>> {
    match cfg.theta_samples {
        ThetaSamples::Vertices => box_vertices(&spec.theta_box),
        ThetaSamples::Grid => sim::default_theta_samples(&spec.theta_box, cfg.per_axis),
        ThetaSamples::Nominal => vec![spec.theta_box.iter().map(|&(l, h)| 0.5 * (l + h)).collect()],
    }
}

fn simulate(ctx: &Context) -> Result<(Trajectory, RunReport)> {
    let spec = &ctx.spec;
    let x0 = ctx.cfg.initial_state(spec)?;
    let bases = spec.bases()?;
    let poly = if ctx.cfg.governor {
        Some(ctx.polytope()?)
    } else {
        // The audit is informative only; an ungoverned run does not need the set.
        match ctx.polytope() {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("no admissible set for the audit: {e}");
                None
            }
        }
    };
    let mut w_source = DisturbanceSource::new(ctx.cfg.seed, spec.w_box.clone(), ctx.cfg.disturbance.into())?;
    let mut gov = match (&poly, ctx.cfg.governor) {
        (Some(p), true) => {
            let v0 = governor::init_reference(&x0, p, &bases, &ReferenceSearch::default())?;
            let mut g = GovernorState::new(p.clone(), bases.clone(), spec.beta, spec.n_x(), v0)?;
            g.bisection_depth = ctx.cfg.bisection_depth;
            Some(g)
        }
        _ => None,
    };
    let v0 = gov.as_ref().map_or(vec![0.0; spec.n_v()], |g| g.v.clone());
    let traj = sim::simulate(spec, gov.as_mut(), poly.as_ref(), &x0, ctx.cfg.steps, &mut w_source)?;

    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let v0_norm = norm(&v0);
    let reference_decay_ok = traj
        .refs
        .iter()
        .enumerate()
        .all(|(k, v)| norm(v) <= spec.beta.powi(k as i32) * v0_norm * (1.0 + 1e-12) + 1e-15);
    let n_c = spec.constraints.len();
    let max_abs_output = (0..n_c)
        .map(|i| {
            traj.constraint_outputs
                .iter()
                .flat_map(|per| per.iter().map(move |o| o[i].abs()))
                .fold(0.0, f64::max)
        })
        .collect();
    let audit: Vec<bool> = traj.audit.iter().filter_map(|a| *a).collect();
    let report = RunReport {
        steps: traj.len(),
        governed: gov.is_some(),
        v0,
        audit_all_true: (!audit.is_empty() || poly.is_some()).then(|| audit.iter().all(|&a| a)),
        first_violation: traj
            .first_violation(spec, 1e-6)
            .map(|(step, theta_sample, constraint)| Violation {
                step,
                theta_sample,
                constraint,
            }),
        margin_exhausted_steps: traj.margin_exhausted.clone(),
        reference_decay_ok,
        max_abs_output,
    };
    Ok((traj, report))
}

fn cmd_build_moas(ctx: &Context) -> Result<()> {
    let (report, poly, cached) = ctx.build()?;
    if cached {
        println!("cache hit {}", ctx.key);
    }
    ctx.write("moas.poly", polytope_io::to_string(&poly).as_bytes())?;
    ctx.write_json("moas.report.json", &report)?;
    println!(
        "theta vertices {}; linear stage t* = {} ({} rows, {} before pruning); robust stage {} iterations ({} rows, {} before pruning); {:.2} s",
        report.theta_vertices,
        report.linear.t_star,
        report.linear.rows_after,
        report.linear.rows_before,
        report.robust.iterations,
        report.robust.rows_after,
        report.robust.rows_before,
        report.wall_seconds
    );
    Ok(())
}

fn cmd_run(ctx: &Context) -> Result<()> {
    let (traj, report) = simulate(ctx)?;
    let spec = &ctx.spec;
    let bytes = trajectory_csv(&traj, spec.n_x(), spec.n_v(), spec.n_w(), spec.constraints.len())?;
    ctx.write("trajectory.csv", &bytes)?;
    ctx.write_json("run.report.json", &report)?;
    match &report.first_violation {
        Some(v) => println!(
            "{} run: constraint {} violated at step {} (theta vertex {})",
            if report.governed { "governed" } else { "ungoverned" },
            v.constraint,
            v.step,
            v.theta_sample
        ),
        None => println!(
            "{} run: {} steps, all constraints satisfied at every parameter vertex",
            if report.governed { "governed" } else { "ungoverned" },
            report.steps
        ),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    samples: Vec<Vec<f64>>,
    max_abs: Vec<Vec<f64>>,
    overall_max_abs: Vec<f64>,
}

fn cmd_sweep(ctx: &Context) -> Result<()> {
    let (traj, _) = simulate(ctx)?;
    let spec = &ctx.spec;
    let samples = theta_samples(&ctx.cfg, spec);
    let sweep = sim::theta_sweep(spec, &traj, &samples)?;
    let n_theta = spec.n_theta();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample".to_string()];
    header.extend((1..=n_theta).map(|i| format!("theta_{i}")));
    header.extend(["k", "constraint", "value"].map(String::from));
    w.write_record(&header)?;
    for (s, series) in sweep.values.iter().enumerate() {
        for (k, outs) in series.iter().enumerate() {
            for (i, &f) in outs.iter().enumerate() {
                let mut rec = vec![(s + 1).to_string()];
                rec.extend(sweep.samples[s].iter().map(|&t| num(t)));
                rec.extend([traj.times[k].to_string(), (i + 1).to_string(), num(f)]);
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    ctx.write("sweep.csv", &bytes)?;
    let n_c = spec.constraints.len();
    let overall_max_abs = (0..n_c)
        .map(|i| sweep.max_abs.iter().map(|m| m[i]).fold(0.0, f64::max))
        .collect::<Vec<_>>();
    ctx.write_json(
        "sweep.summary.json",
        &SweepSummary {
            samples: sweep.samples.clone(),
            max_abs: sweep.max_abs.clone(),
            overall_max_abs: overall_max_abs.clone(),
        },
    )?;
    println!("{} series; max |f_i| over all samples: {:?}", sweep.samples.len(), overall_max_abs);
    Ok(())
}

fn cmd_grid_init(ctx: &Context) -> Result<()> {
    let spec = &ctx.spec;
    let poly = ctx.polytope()?;
    let bases = spec.bases()?;
    let n_x = spec.n_x();
    // Project the set onto each state coordinate to span the grid.
    let mut ranges = Vec::with_capacity(n_x);
    for i in 0..n_x {
        let mut dir = vec![0.0; poly.dim()];
        dir[i] = 1.0;
        let hi = poly.maximize(&dir)?;
        dir[i] = -1.0;
        let lo = poly.maximize(&dir)?;
        if hi.status != crate::lp::LpStatus::Optimal || lo.status != crate::lp::LpStatus::Optimal {
            return Err(Error::UnboundedCoordinate { coord: i });
        }
        ranges.push((-lo.value, hi.value));
    }
    let n = ctx.cfg.grid_points.max(1);
    let axis = |&(lo, hi): &(f64, f64)| -> Vec<f64> {
        if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
        }
    };
    let axes: Vec<Vec<f64>> = ranges.iter().map(axis).collect();
    let mut points = vec![Vec::new()];
    for a in &axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                a.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    let search = ReferenceSearch::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=n_x).map(|i| format!("x_{i}")).collect();
    header.extend((1..=spec.n_v()).map(|i| format!("v0_{i}")));
    header.push("admissible".into());
    w.write_record(&header)?;
    let mut admissible = 0;
    for x in &points {
        let mut rec: Vec<String> = x.iter().map(|&c| num(c)).collect();
        match governor::init_reference(x, &poly, &bases, &search) {
            Ok(v) => {
                admissible += 1;
                rec.extend(v.iter().map(|&c| num(c)));
                rec.push("true".into());
            }
            Err(Error::InadmissibleInitialState { .. }) => {
                rec.extend(std::iter::repeat_n(String::new(), spec.n_v()));
                rec.push("false".into());
            }
            Err(e) => return Err(e),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    ctx.write("grid_init.csv", &bytes)?;
    println!("{admissible} of {} grid states admit a reference", points.len());
    Ok(())
}

fn cmd_calibrate_beta(ctx: &Context) -> Result<()> {
    let targets = match ctx.cfg.preset {
        Some(Preset::Aircraft) => pipeline::NOMINAL_TARGETS,
        Some(Preset::AircraftDisturbed) => pipeline::DISTURBED_TARGETS,
        None => {
            return Err(Error::InvalidArgument(
                "calibrate-beta compares against the aircraft counts; use --preset".into(),
            ))
        }
    };
    let cal = pipeline::calibrate_beta(&ctx.cfg.betas, &targets, &ctx.opts, |b| ctx.cfg.problem_with_beta(Some(b)))?;
    ctx.write_json("calibration.json", &cal)?;
    let mut out = std::io::stdout().lock();
    for r in &cal.rows {
        let c = &r.counts;
        let show = |v: Option<usize>| v.map_or("-".to_string(), |n| n.to_string());
        writeln!(
            out,
            "beta {:.4}: linear t* {} rows {}; robust iterations {} rows {}; {}{}",
            r.beta,
            show(c.linear_t_star),
            show(c.linear_rows),
            show(c.robust_iterations),
            show(c.robust_rows),
            if r.matches { "match" } else { "no match" },
            c.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        )?;
    }
    match cal.matching_beta {
        Some(b) => writeln!(out, "matching beta: {b}")?,
        None => writeln!(out, "no beta reproduces the targets; nearest: {}", cal.nearest_beta)?,
    }
    Ok(())
}

pub fn execute(command: Command, cfg: RunConfig) -> Result<()> {
    let ctx = Context::new(cfg, command)?;
    match command {
        Command::BuildMoas => cmd_build_moas(&ctx),
        Command::Run => cmd_run(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::GridInit => cmd_grid_init(&ctx),
        Command::CalibrateBeta => cmd_calibrate_beta(&ctx),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("REFGOV_LOG", "warn")).try_init();
    let result = RunConfig::resolve(&cli.flags).and_then(|cfg| execute(cli.command, cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
