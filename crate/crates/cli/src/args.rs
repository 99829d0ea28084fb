use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use parareal_lab::regions::Window;
use parareal_lab::{ImexTableau, IterationPolicy, MethodId};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "parareal-lab", version, about = "Stability, convergence and speedup analysis of Parareal with IMEX Runge-Kutta integrators")]
pub struct Cli {
    /// Worker threads for data-parallel loops; results do not depend on it.
    #[arg(long, global = true, env = "PARAREAL_LAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability/convergence overlay of a Parareal configuration.
    StabilityMap(MapArgs),
    /// Error of the Parareal (or fine serial) block propagator against the exact one.
    AccuracyMap(AccuracyArgs),
    /// One-step amplitude |R(iz1, iz2)| of a single IMEX-RK method.
    AmpSurface(SurfaceArgs),
    /// Theoretical speedup and efficiency for a range of step counts.
    SpeedupTable(SpeedupArgs),
    /// One NLS run, serial or Parareal, with a binary dump of the final state.
    NlsRun(NlsRunArgs),
    /// NLS error and runtime over a list of step counts.
    NlsSweep(NlsSweepArgs),
    /// Lemma oracle and cross-checks between independent implementations.
    SelfTest(SelfTestArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::StabilityMap(_) => "stability-map",
            Command::AccuracyMap(_) => "accuracy-map",
            Command::AmpSurface(_) => "amp-surface",
            Command::SpeedupTable(_) => "speedup-table",
            Command::NlsRun(_) => "nls-run",
            Command::NlsSweep(_) => "nls-sweep",
            Command::SelfTest(_) => "self-test",
        }
    }

    pub fn out_dir(&self) -> &Path {
        match self {
            Command::StabilityMap(a) => &a.output.out,
            Command::AccuracyMap(a) => &a.map.output.out,
            Command::AmpSurface(a) => &a.output.out,
            Command::SpeedupTable(a) => &a.output.out,
            Command::NlsRun(a) => &a.out,
            Command::NlsSweep(a) => &a.output.out,
            Command::SelfTest(a) => &a.out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Coarse method: a built-in name (rk1..rk4, imex-rk1..imex-rk4) or a tableau JSON file.
    #[arg(long, default_value = "rk3")]
    pub coarse: String,
    /// Fine method, same syntax as --coarse.
    #[arg(long, default_value = "rk4")]
    pub fine: String,
}

/// Block structure shared by every Parareal subcommand.
#[derive(Debug, Args)]
pub struct BlockArgs {
    /// Fine steps per block, NT = Np·Nf.
    #[arg(long)]
    pub nt: Option<usize>,
    /// Processors (intervals) per block.
    #[arg(long)]
    pub np: Option<usize>,
    /// Fine steps per interval.
    #[arg(long, default_value_t = 16)]
    pub nf: usize,
    /// Coarse steps per interval.
    #[arg(long, default_value_t = 1)]
    pub ng: usize,
}

impl BlockArgs {
    /// `Np`, after cross-checking `--nt` against `--np · --nf`.
    pub fn resolve_np(&self) -> anyhow::Result<usize> {
        if self.nf == 0 || self.ng == 0 {
            bail!("--nf and --ng must be at least 1");
        }
        match (self.nt, self.np) {
            (Some(nt), Some(np)) if nt != np * self.nf => {
                bail!("inconsistent block structure: NT = {nt} but Np·Nf = {np}·{} = {}", self.nf, np * self.nf)
            }
            (_, Some(np)) => Ok(np),
            (Some(nt), None) => {
                if nt % self.nf != 0 {
                    bail!("NT = {nt} is not a multiple of Nf = {}", self.nf);
                }
                Ok(nt / self.nf)
            }
            (None, None) => bail!("one of --nt or --np is required"),
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct WindowArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub z1_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z1_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z2_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z2_max: Option<f64>,
}

impl WindowArgs {
    pub fn over(&self, default: Window) -> anyhow::Result<Window> {
        let w = Window {
            z1_min: self.z1_min.unwrap_or(default.z1_min),
            z1_max: self.z1_max.unwrap_or(default.z1_max),
            z2_min: self.z2_min.unwrap_or(default.z2_min),
            z2_max: self.z2_max.unwrap_or(default.z2_max),
        };
        let finite = [w.z1_min, w.z1_max, w.z2_min, w.z2_max].iter().all(|v| v.is_finite());
        if !finite || w.z1_min > w.z1_max || w.z2_min > w.z2_max {
            bail!("invalid window [{}, {}] x [{}, {}]", w.z1_min, w.z1_max, w.z2_min, w.z2_max);
        }
        Ok(w)
    }
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub methods: MethodArgs,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Parareal iterations K.
    #[arg(long)]
    pub k: usize,
    /// Grid points per axis.
    #[arg(long, default_value_t = parareal_lab::regions::DEFAULT_RESOLUTION)]
    pub res: usize,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Map NT serial fine steps instead of the Parareal propagator.
    #[arg(long)]
    pub fine_only: bool,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, default_value = "rk3")]
    pub method: String,
    #[arg(long, default_value_t = parareal_lab::regions::DEFAULT_RESOLUTION)]
    pub res: usize,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SpeedupArgs {
    #[command(flatten)]
    pub methods: MethodArgs,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Mean iteration count K̄ (may be fractional).
    #[arg(long)]
    pub k: f64,
    /// Total step counts; defaults to powers of two from NT up to 2^18.
    #[arg(long, value_delimiter = ',')]
    pub ns: Vec<usize>,
    /// Fine step cost; defaults to the number of implicit stage solves.
    #[arg(long)]
    pub cf: Option<f64>,
    /// Coarse step cost; defaults to the number of implicit stage solves.
    #[arg(long)]
    pub cg: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Fourier modes M.
    #[arg(long, default_value_t = 1024)]
    pub m: usize,
    #[arg(long, default_value_t = 15.0)]
    pub t_final: f64,
    /// Coefficient c of the nonlinear term i·c·|u|²·u; 0 makes the problem linear.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub nonlinear_coeff: f64,
    /// Zero modes |j| > M/3 of the nonlinear term.
    #[arg(long)]
    pub dealias: bool,
}

impl ProblemArgs {
    pub fn problem(&self) -> anyhow::Result<parareal_lab::NlsProblem> {
        let p = parareal_lab::NlsProblem {
            m: self.m,
            t_final: self.t_final,
            nonlinear_coeff: self.nonlinear_coeff,
            dealias: self.dealias,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Fixed number of Parareal iterations per block.
    #[arg(long, conflicts_with = "adaptive")]
    pub k: Option<usize>,
    /// Iterate each block until the sweep residual is at most this tolerance.
    #[arg(long, requires = "kmax")]
    pub adaptive: Option<f64>,
    /// Iteration cap for --adaptive.
    #[arg(long, requires = "adaptive")]
    pub kmax: Option<usize>,
}

impl PolicyArgs {
    pub fn policy(&self) -> Option<IterationPolicy> {
        match (self.k, self.adaptive, self.kmax) {
            (Some(k), _, _) => Some(IterationPolicy::Fixed(k)),
            (None, Some(tol), Some(kmax)) => Some(IterationPolicy::Adaptive { tol, kmax }),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct NlsRunArgs {
    #[command(flatten)]
    pub methods: MethodArgs,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Blocks per run.
    #[arg(long)]
    pub nb: Option<usize>,
    /// Total fine steps; cross-checked against Np·Nf·Nb.
    #[arg(long)]
    pub ns: Option<usize>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Run the fine method serially for Ns steps instead of Parareal.
    #[arg(long)]
    pub serial: bool,
    /// Also compute a serial reference with this many steps and report the error.
    #[arg(long)]
    pub reference_ns: Option<usize>,
    #[arg(long, default_value = "rk4")]
    pub reference_method: String,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NlsSweepArgs {
    #[command(flatten)]
    pub methods: MethodArgs,
    #[command(flatten)]
    pub block: BlockArgs,
    /// Total step counts, each a multiple of NT.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Sweep the fine method serially instead of Parareal.
    #[arg(long)]
    pub serial: bool,
    #[arg(long, default_value_t = 1 << 16)]
    pub reference_ns: usize,
    #[arg(long, default_value = "rk4")]
    pub reference_method: String,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelfTestArgs {
    /// Random samples per check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// A built-in scheme by name, or a tableau read from a JSON file.
pub fn load_method(spec: &str) -> anyhow::Result<ImexTableau> {
    if let Ok(id) = spec.parse::<MethodId>() {
        return Ok(id.tableau());
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(parareal_lab::Error::UnknownMethod(spec.to_string()).into());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading tableau {}", path.display()))?;
    Ok(ImexTableau::from_json(&text)?)
}
