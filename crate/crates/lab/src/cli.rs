//! Command-line front end.
//!
//! Settings are resolved in three layers: built-in defaults, then the JSON
//! file given by `--config`, then command-line flags. `NV_LAB_OUT` overrides
//! `--out`. Every run writes a manifest next to its outputs.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use nv_core::lattice::{count, count_cubic, sigma1_count, sigma3_count, Curve, CurveSpec, HalfPoint, Window};
use nv_core::FrequencyPair;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolution::{simulate, standard_datum, Scheme, SimConfig, Termination};
use crate::invariants::{miura_consistency_check, scaling_symmetry_check, MiuraConfig, MnvForm, ScalingConfig};
use crate::probe::{probe_estimate, DataFamily, EstimateId, ProbeConfig};
use crate::sweep::{hyperbola_sweep, sweep_row, write_sweep_csv};
use crate::torus::{from_physical, read_nvf1, sample, write_nvf1, SpectralField, TorusGrid};
use crate::verify::{run_bounds, run_dualpath, run_identities, run_kform, VerifyConfig};

/// Version of the configuration file layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nv-lab", version, about = "Novikov-Veselov torus laboratory", allow_negative_numbers = true)]
pub struct Cli {
    /// JSON configuration file for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; NV_LAB_OUT takes precedence.
    #[arg(long, global = true, default_value = "nv-lab-out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Size of the worker pool.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Leave timestamps and timings out of all outputs.
    #[arg(long, global = true)]
    pub reproducible: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate NV from a datum; writes diagnostics CSV and NVF1 snapshots.
    Simulate {
        /// Remove the mean of the datum instead of rejecting it.
        #[arg(long)]
        project_mean: bool,
    },
    /// Run a verifier suite.
    Verify(VerifyArgs),
    /// Count lattice points on a curve, or run an exponent sweep.
    Count {
        #[command(subcommand)]
        which: CountCommand,
    },
    /// Probe a bilinear estimate on free solutions.
    Probe(ProbeArgs),
    /// Compare mNV evolved through the Miura map with NV.
    MiuraCheck(MiuraArgs),
    /// Compare a run from dilated data with the dilated run.
    ScalingCheck(ScalingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyWhich {
    Identities,
    Bounds,
    Dualpath,
    Kform,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub which: VerifyWhich,
    /// Replace the sharp constant by 1 in the resonance bound.
    #[arg(long)]
    pub constant_free: bool,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct WindowArgs {
    /// Square window: center x, center y, side.
    #[arg(long, num_args = 3, value_names = ["CX", "CY", "SIDE"])]
    pub square: Option<Vec<i64>>,
    /// Disc window: center x, center y (integers or halves), radius.
    #[arg(long, num_args = 3, value_names = ["CX", "CY", "R"])]
    pub disc: Option<Vec<String>>,
}

impl WindowArgs {
    fn window(&self) -> Result<Window> {
        if let Some(s) = &self.square {
            return Ok(Window::square(s[0], s[1], s[2])?);
        }
        let d = self.disc.as_ref().expect("clap enforces one window");
        let half = |s: &str| -> Result<i64> {
            let v: f64 = s.parse().map_err(|_| LabError::Config(format!("bad disc coordinate {s}")))?;
            let d = 2.0 * v;
            if d.fract() != 0.0 || d.abs() > 1e15 {
                return Err(LabError::Config(format!("disc center {s} must be an integer or half-integer")));
            }
            Ok(d as i64)
        };
        let r: i64 = d[2].parse().map_err(|_| LabError::Config(format!("bad radius {}", d[2])))?;
        Ok(Window::disc(HalfPoint::from_doubled(half(&d[0])?, half(&d[1])?), r)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum CountCommand {
    /// a(x² − y²) + 2bxy = c.
    Hyperbola {
        a: i64,
        b: i64,
        c: i64,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// (x + a)(x² − y²) = 2(y + b)xy.
    Cubic {
        a: i64,
        b: i64,
        /// Drop the vertical line x = 0 when it belongs to the curve.
        #[arg(long)]
        exclude_line: bool,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Points (ξ₁, η₁) with τ = φ(ζ₁) + φ(ζ − ζ₁).
    Sigma1 {
        xi: i64,
        eta: i64,
        tau: i64,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Cubic count at a = 2ξ₁, b = 2η₁ with the projector's exclusion.
    Sigma3 {
        xi1: i64,
        eta1: i64,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Random hyperbola sweep and growth-exponent fit.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [64i64, 128, 256, 512, 1024])]
        n_list: Vec<i64>,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Largest accepted fitted slope.
        #[arg(long, default_value_t = 0.7)]
        slope_bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    RandomInDisc,
    ResonantConcentrated,
    CounterexampleLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimateArg {
    Bilinear,
    Transfer,
    Dual,
    Transposed,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    #[arg(long, value_enum)]
    pub estimate: Option<EstimateArg>,
    /// Disable the projector Q.
    #[arg(long)]
    pub no_q: bool,
    #[arg(long, value_delimiter = ',')]
    pub r_list: Option<Vec<i64>>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MiuraArgs {
    /// Amplitude of the admissible datum a·(cos x cos y − i sin x sin y).
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Use the cubic term exactly as displayed in the reference form.
    #[arg(long)]
    pub as_displayed: bool,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub linear_only: bool,
}

/// How an initial datum is specified in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    Zero,
    /// The smooth datum of [`standard_datum`].
    Standard { amplitude: f64 },
    /// `a·(cos x cos y − i sin x sin y)`, which satisfies `Im ∂v = 0`.
    Admissible { amplitude: f64 },
    /// Explicit coefficients; `real` symmetrizes them.
    Modes {
        modes: Vec<ModeEntry>,
        #[serde(default)]
        real: bool,
    },
    /// An NVF1 snapshot.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub xi: i64,
    pub eta: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl DatumSpec {
    pub fn build(&self, grid: TorusGrid) -> Result<SpectralField> {
        match self {
            DatumSpec::Zero => Ok(SpectralField::zeros(grid)),
            DatumSpec::Standard { amplitude } => Ok(standard_datum(grid, *amplitude)),
            DatumSpec::Admissible { amplitude } => admissible_datum(grid, *amplitude),
            DatumSpec::Modes { modes, real } => {
                let list: Vec<_> = modes.iter().map(|m| (FrequencyPair::new(m.xi, m.eta), Complex64::new(m.re, m.im))).collect();
                let f = SpectralField::from_modes(grid, &list)?;
                Ok(if *real { f.into_real() } else { f })
            }
            DatumSpec::File { path } => {
                let f = read_nvf1(BufReader::new(File::open(path)?))?;
                f.grid().check_same(&grid)?;
                Ok(f)
            }
        }
    }
}

/// `a·(cos x cos y − i sin x sin y)`.
pub fn admissible_datum(grid: TorusGrid, amplitude: f64) -> Result<SpectralField> {
    from_physical(grid, &sample(grid, |x, y| Complex64::new(x.cos() * y.cos(), -x.sin() * y.sin()) * amplitude))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub schema_version: u32,
    pub simulation: SimConfig,
    pub datum: DatumSpec,
}

impl Default for SimulateFile {
    fn default() -> Self {
        SimulateFile {
            schema_version: SCHEMA_VERSION,
            simulation: SimConfig::new(TorusGrid::square(64).expect("valid"), 0.1, 1e-3, Scheme::Etdrk4),
            datum: DatumSpec::Standard { amplitude: 1e-2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub schema_version: u32,
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeFile {
    pub schema_version: u32,
    pub probe: ProbeConfig,
}

impl Default for ProbeFile {
    fn default() -> Self {
        ProbeFile { schema_version: SCHEMA_VERSION, probe: ProbeConfig::new(vec![4, 8, 16, 32, 64, 128], DataFamily::RandomInDisc, 4, 0) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MiuraFile {
    pub schema_version: u32,
    pub miura: MiuraConfig,
    pub amplitude: f64,
}

impl Default for MiuraFile {
    fn default() -> Self {
        MiuraFile {
            schema_version: SCHEMA_VERSION,
            miura: MiuraConfig {
                grid: TorusGrid::square(64).expect("valid"),
                t_end: 0.01,
                dt: 2.5e-3,
                levels: 4,
                scheme: Scheme::Etdrk4,
                form: MnvForm::Miura,
                dealias: false,
                order_slack: 0.5,
            },
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingFile {
    pub schema_version: u32,
    pub scaling: ScalingConfig,
    /// Datum of the undilated run, built on the grid `n/λ`.
    pub datum: DatumSpec,
}

impl Default for ScalingFile {
    fn default() -> Self {
        ScalingFile {
            schema_version: SCHEMA_VERSION,
            scaling: ScalingConfig {
                grid: TorusGrid::square(128).expect("valid"),
                lambda: 2,
                t: 0.01,
                dt: 1e-4,
                levels: 3,
                scheme: Scheme::Etdrk4,
                tolerance: 1e-6,
                linear_only: false,
            },
            datum: DatumSpec::Standard { amplitude: 1.0 },
        }
    }
}

/// Record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub tool_version: String,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; absent under `--reproducible`.
    pub started_at: Option<f64>,
    pub finished_at: Option<f64>,
    pub elapsed_s: Option<f64>,
    pub exit_code: i32,
    pub outputs: Vec<String>,
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}

fn check_schema(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(LabError::Config(format!("unsupported schema_version {v}; expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Exit code for an error.
pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Numeric(_) => EXIT_NUMERIC,
        LabError::Verification(_) => EXIT_VERIFICATION,
        _ => EXIT_CONFIG,
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Output directory plus the list of files written so far. Every file name
/// starts with the run tag, so runs of different kinds can share a directory.
struct Outputs {
    dir: PathBuf,
    tag: String,
    files: Vec<String>,
}

impl Outputs {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let name = format!("{}-{name}", self.tag);
        let f = File::create(self.dir.join(&name))?;
        self.files.push(name);
        Ok(BufWriter::new(f))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// What a subcommand hands back for the manifest.
struct Run {
    config: serde_json::Value,
    seed: Option<u64>,
    code: i32,
}

/// Parses `args` (program name first) and runs the subcommand; returns the
/// process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate { .. } => "simulate",
        Command::Verify(_) => "verify",
        Command::Count { .. } => "count",
        Command::Probe(_) => "probe",
        Command::MiuraCheck(_) => "miura-check",
        Command::ScalingCheck(_) => "scaling-check",
    }
}

/// Prefix of the run's output files.
fn run_tag(c: &Command) -> String {
    match c {
        Command::Verify(a) => format!("verify-{}", format!("{:?}", a.which).to_lowercase()),
        Command::Count { which } => {
            let kind = match which {
                CountCommand::Hyperbola { .. } => "hyperbola",
                CountCommand::Cubic { .. } => "cubic",
                CountCommand::Sigma1 { .. } => "sigma1",
                CountCommand::Sigma3 { .. } => "sigma3",
                CountCommand::Sweep { .. } => "sweep",
            };
            format!("count-{kind}")
        }
        other => subcommand_name(other).into(),
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(LabError::Config("--threads must be positive".into()));
        }
        // a pool may already exist when several runs share a process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let dir = std::env::var_os("NV_LAB_OUT").map(PathBuf::from).unwrap_or_else(|| cli.out.clone());
    fs::create_dir_all(&dir)?;
    let name = subcommand_name(&cli.command);
    let mut out = Outputs { dir, tag: run_tag(&cli.command), files: Vec::new() };
    let started = now();
    let clock = Instant::now();
    let run = match &cli.command {
        Command::Simulate { project_mean } => cmd_simulate(&cli, *project_mean, &mut out)?,
        Command::Verify(a) => cmd_verify(&cli, a, &mut out)?,
        Command::Count { which } => cmd_count(&cli, which, &mut out)?,
        Command::Probe(a) => cmd_probe(&cli, a, &mut out)?,
        Command::MiuraCheck(a) => cmd_miura(&cli, a, &mut out)?,
        Command::ScalingCheck(a) => cmd_scaling(&cli, a, &mut out)?,
    };
    let timed = !cli.reproducible;
    let manifest = RunManifest {
        subcommand: name.into(),
        config: run.config,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: run.seed,
        started_at: timed.then_some(started),
        finished_at: timed.then(now),
        elapsed_s: timed.then(|| clock.elapsed().as_secs_f64()),
        exit_code: run.code,
        outputs: out.files.clone(),
    };
    out.json("manifest.json", &manifest)?;
    Ok(run.code)
}

fn cmd_simulate(cli: &Cli, project_mean: bool, out: &mut Outputs) -> Result<Run> {
    let file: SimulateFile = match &cli.config {
        Some(p) => load(p)?,
        None => SimulateFile::default(),
    };
    check_schema(file.schema_version)?;
    file.simulation.validate()?;
    let mut u0 = file.datum.build(file.simulation.grid)?;
    if !u0.is_mean_zero() {
        if !project_mean {
            return Err(LabError::Config(format!(
                "datum has mean coefficient {}; NV is posed for mean-zero data (pass --project-mean to remove it)",
                u0.mean_coefficient()
            )));
        }
        let real = u0.is_real_valued();
        u0 = u0.project_mean().0;
        if real {
            u0 = u0.into_real();
        }
    }
    let traj = simulate(&u0, &file.simulation)?;
    traj.diagnostics.write_csv(out.create("diagnostics.csv")?)?;
    for (k, s) in traj.states.iter().enumerate() {
        let mut w = out.create(&format!("snapshot-{k:05}.nvf1"))?;
        write_nvf1(s, &mut w)?;
        w.flush()?;
    }
    #[derive(Serialize)]
    struct Summary {
        terminated_by: Termination,
        final_time: f64,
        steps: usize,
        snapshot_times: Vec<f64>,
        pairing_drift: f64,
    }
    let summary = Summary {
        terminated_by: traj.terminated_by,
        final_time: traj.final_time(),
        steps: traj.diagnostics.len().saturating_sub(1),
        snapshot_times: traj.times.clone(),
        pairing_drift: traj.diagnostics.pairing_drift(),
    };
    out.json("summary.json", &summary)?;
    println!("terminated: {:?} at t = {}", summary.terminated_by, summary.final_time);
    let code = if traj.terminated_by == Termination::StepUnderflow { EXIT_NUMERIC } else { EXIT_OK };
    Ok(Run { config: serde_json::to_value(&file)?, seed: None, code })
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs, out: &mut Outputs) -> Result<Run> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let f: VerifyFile = load(p)?;
            check_schema(f.schema_version)?;
            f.verify
        }
        None => VerifyConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if a.constant_free {
        cfg.constant_free = true;
    }
    if let Some(t) = a.theta {
        cfg.theta = t;
    }
    if let Some(n) = a.samples {
        cfg.identity_samples = n;
        cfg.bound_samples = n;
        cfg.dualpath_fields = n;
    }
    let pass = match a.which {
        VerifyWhich::Identities => {
            let r = run_identities(&cfg)?;
            out.json("report.json", &r)?;
            println!(
                "m-r identity: max deviation {:.3e} over {} pairs; resonance: {} mismatches in {} pairs",
                r.m_r_identity.max_deviation, r.m_r_identity.samples, r.resonance.mismatches, r.resonance.checked
            );
            r.pass
        }
        VerifyWhich::Bounds => {
            let r = run_bounds(&cfg)?;
            out.json("report.json", &r)?;
            println!("theta {}: constant {:.6}, max ratio {:.6}, violations {}", r.theta, r.constant, r.max_ratio, r.violations);
            if let Some(w) = r.first_violation {
                println!("first violation at zeta1 = {}, zeta2 = {}", w.first, w.second);
            }
            r.pass
        }
        VerifyWhich::Dualpath => {
            let r = run_dualpath(&cfg)?;
            out.json("report.json", &r)?;
            println!("dual path: max relative deviation {:.3e} over {} field pairs", r.max_relative_deviation, r.fields);
            r.pass
        }
        VerifyWhich::Kform => {
            let r = run_kform();
            out.json("report.json", &r)?;
            println!("{}", r.summary);
            true
        }
    };
    Ok(Run {
        config: serde_json::json!({ "which": format!("{:?}", a.which).to_lowercase(), "verify": cfg }),
        seed: Some(cfg.seed),
        code: if pass { EXIT_OK } else { EXIT_VERIFICATION },
    })
}

fn cmd_count(cli: &Cli, which: &CountCommand, out: &mut Outputs) -> Result<Run> {
    if cli.config.is_some() {
        return Err(LabError::Config("count takes its parameters on the command line".into()));
    }
    let timed = !cli.reproducible;
    let start = Instant::now();
    let (config, report, code) = match which {
        CountCommand::Sweep { n_list, samples, slope_bound } => {
            let seed = cli.seed.unwrap_or(0);
            let (r, rows) = hyperbola_sweep(n_list, *samples, seed, *slope_bound, timed)?;
            write_sweep_csv(&rows, out.create("sweep.csv")?)?;
            println!("fitted slope {:.4} (bound {}), maxima {:?}", r.exponent.fitted_slope, r.slope_bound, r.exponent.maxima);
            let config = serde_json::json!({ "sweep": { "N_list": n_list, "samples_per_N": samples, "slope_bound": slope_bound, "seed": seed } });
            let code = if r.pass { EXIT_OK } else { EXIT_VERIFICATION };
            out.json("exponent.json", &r)?;
            return Ok(Run { config, seed: Some(seed), code });
        }
        CountCommand::Hyperbola { a, b, c, window } => {
            let spec = CurveSpec::new(Curve::Hyperbola { a: *a, b: *b, c: *c }, window.window()?);
            (serde_json::to_value(spec)?, serde_json::to_value(count(&spec)?)?, EXIT_OK)
        }
        CountCommand::Cubic { a, b, exclude_line, window } => {
            let w = window.window()?;
            let r = count_cubic(*a, *b, w, *exclude_line)?;
            (serde_json::json!({ "spec": r.spec, "exclude_line": exclude_line }), serde_json::to_value(r)?, EXIT_OK)
        }
        CountCommand::Sigma1 { xi, eta, tau, window } => {
            let w = window.window()?;
            let r = sigma1_count(*xi, *eta, *tau, w)?;
            let spec = CurveSpec::new(Curve::KCurve { xi: *xi, eta: *eta, tau: *tau }, w);
            (serde_json::to_value(spec)?, serde_json::to_value(r)?, EXIT_OK)
        }
        CountCommand::Sigma3 { xi1, eta1, window } => {
            let w = window.window()?;
            let r = sigma3_count(*xi1, *eta1, w)?;
            (serde_json::to_value(r.spec)?, serde_json::to_value(r)?, EXIT_OK)
        }
    };
    let n = report["count"].as_u64().unwrap_or(0);
    println!("{n}");
    out.json("report.json", &report)?;
    let spec: CurveSpec = serde_json::from_value(config.get("spec").cloned().unwrap_or_else(|| config.clone()))?;
    let degenerate = report["degenerate"].as_bool().unwrap_or(false);
    let row = sweep_row(&spec, n, degenerate, timed.then(|| start.elapsed().as_nanos()));
    write_sweep_csv(&[row], out.create("row.csv")?)?;
    Ok(Run { config, seed: None, code })
}

fn cmd_probe(cli: &Cli, a: &ProbeArgs, out: &mut Outputs) -> Result<Run> {
    let mut file: ProbeFile = match &cli.config {
        Some(p) => load(p)?,
        None => ProbeFile::default(),
    };
    check_schema(file.schema_version)?;
    let p = &mut file.probe;
    if let Some(s) = cli.seed {
        p.seed = s;
    }
    if let Some(f) = a.family {
        p.data_family = match f {
            FamilyArg::RandomInDisc => DataFamily::RandomInDisc,
            FamilyArg::ResonantConcentrated => DataFamily::ResonantConcentrated,
            FamilyArg::CounterexampleLine => DataFamily::CounterexampleLine,
        };
    }
    if let Some(e) = a.estimate {
        p.estimate = match e {
            EstimateArg::Bilinear => EstimateId::Bilinear,
            EstimateArg::Transfer => EstimateId::Transfer,
            EstimateArg::Dual => EstimateId::Dual,
            EstimateArg::Transposed => EstimateId::Transposed,
        };
    }
    if a.no_q {
        p.q_enabled = false;
    }
    if let Some(r) = &a.r_list {
        p.r_list = r.clone();
    }
    if let Some(t) = a.trials {
        p.trials_per_r = t;
    }
    let r = probe_estimate(p)?;
    out.json("report.json", &r)?;
    match r.fitted_slope {
        Some(s) => println!("max ratios {:?}; fitted slope {s:.4}", r.max_ratios),
        None => println!("max ratios {:?}; no slope (vanishing ratios)", r.max_ratios),
    }
    Ok(Run { config: serde_json::to_value(&file)?, seed: Some(file.probe.seed), code: if r.pass { EXIT_OK } else { EXIT_VERIFICATION } })
}

fn cmd_miura(cli: &Cli, a: &MiuraArgs, out: &mut Outputs) -> Result<Run> {
    let mut file: MiuraFile = match &cli.config {
        Some(p) => load(p)?,
        None => MiuraFile::default(),
    };
    check_schema(file.schema_version)?;
    if let Some(x) = a.amplitude {
        file.amplitude = x;
    }
    if let Some(l) = a.levels {
        file.miura.levels = l;
    }
    if a.as_displayed {
        file.miura.form = MnvForm::AsDisplayed;
    }
    let v0 = admissible_datum(file.miura.grid, file.amplitude)?;
    let r = miura_consistency_check(&v0, &file.miura)?;
    out.json("report.json", &r)?;
    println!("final errors {:?}; orders {:?}", r.final_errors, r.refinement_orders);
    Ok(Run { config: serde_json::to_value(&file)?, seed: None, code: if r.pass { EXIT_OK } else { EXIT_VERIFICATION } })
}

fn cmd_scaling(cli: &Cli, a: &ScalingArgs, out: &mut Outputs) -> Result<Run> {
    let mut file: ScalingFile = match &cli.config {
        Some(p) => load(p)?,
        None => ScalingFile::default(),
    };
    check_schema(file.schema_version)?;
    if let Some(l) = a.lambda {
        file.scaling.lambda = l;
    }
    if a.linear_only {
        file.scaling.linear_only = true;
    }
    let l = file.scaling.lambda as usize;
    if l == 0 || file.scaling.grid.nx() % l != 0 || file.scaling.grid.ny() % l != 0 {
        return Err(LabError::Config("grid size must be divisible by lambda".into()));
    }
    let small = TorusGrid::new(file.scaling.grid.nx() / l, file.scaling.grid.ny() / l)?;
    let u0 = file.datum.build(small)?;
    let r = scaling_symmetry_check(&u0, &file.scaling)?;
    out.json("report.json", &r)?;
    println!("discrepancy d = {:e}", r.final_errors.last().copied().unwrap_or(0.0));
    Ok(Run { config: serde_json::to_value(&file)?, seed: None, code: if r.pass { EXIT_OK } else { EXIT_VERIFICATION } })
}
