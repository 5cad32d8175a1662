use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use ksat_phase::io::Format;
use ksat_phase::{Error, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "KSAT_PHASE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Roots u of the surface on a z grid.
    Surface,
    /// Cusp points.
    Cusp,
    /// Spinodal densities.
    AlphaD,
    /// Threshold densities with the calibration report.
    AlphaC,
    /// Threshold curve samples.
    Curve,
    /// 2-SAT 50%-point table and regressions.
    TwosatTable,
    /// (2+p)-SAT critical point and 50%-point.
    Twopsat,
    /// K-COL conservation-law evolution.
    Kcol,
    /// Monte Carlo satisfiability probabilities.
    Mc,
    /// Empirical 50%-point by stochastic bisection.
    Y50Search,
    /// Branching random walk concentration study.
    Brw,
    /// Decide a DIMACS CNF file or an edge-list graph.
    Solve,
    /// Every table artifact in one run.
    Tables,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Surface => "surface",
            Command::Cusp => "cusp",
            Command::AlphaD => "alpha-d",
            Command::AlphaC => "alpha-c",
            Command::Curve => "curve",
            Command::TwosatTable => "twosat-table",
            Command::Twopsat => "twopsat",
            Command::Kcol => "kcol",
            Command::Mc => "mc",
            Command::Y50Search => "y50-search",
            Command::Brw => "brw",
            Command::Solve => "solve",
            Command::Tables => "tables",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Ksat,
    TwoPlusP,
    Graph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepArg {
    Gaussian,
    TwoPoint,
}

#[derive(Debug, Parser)]
#[command(name = "ksat-phase", version, about = "Phase-transition numerics for random K-SAT and K-COL")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Clause width.
    #[arg(long)]
    pub k: Option<u32>,
    /// Variables, vertices, or table size depending on the command.
    #[arg(long)]
    pub n: Option<u32>,
    /// Clause or edge count; overrides --z for `mc`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Fraction of 3-clauses.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub x: Option<f64>,
    /// Density (clauses or edges per variable); final z for `kcol`.
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    /// Curve step in x.
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Root/residual tolerance; bracket width for `y50-search` (default 0.01 there).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModelArg::Ksat)]
    pub model: ModelArg,
    #[arg(long)]
    pub colors: Option<u32>,
    /// Variables fixed to true before solving.
    #[arg(long, default_value_t = 0)]
    pub frozen: u32,
    /// `kcol` domain as x0,x1,y0,y1.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub domain: Option<Vec<f64>>,
    #[arg(long, default_value_t = 200)]
    pub generations: u32,
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, value_enum, default_value_t = StepArg::Gaussian)]
    pub law: StepArg,
    /// Step scale: sigma for `gaussian`, size for `two-point`.
    #[arg(long, default_value_t = 12.0)]
    pub sigma: f64,
    /// Decay of the position-suppressed twin branching mean.
    #[arg(long, default_value_t = 0.002)]
    pub slope: f64,
    /// Input file for `solve`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; a directory when the command writes several tables.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Default output directory.
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
}

/// Validated parameters for one invocation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub k: Option<u32>,
    pub n: Option<u32>,
    pub m: Option<usize>,
    pub p: Option<f64>,
    pub x: Option<f64>,
    pub z: Option<f64>,
    pub seed: u64,
    pub trials: u64,
    pub step: f64,
    pub grid: usize,
    pub tol: Option<f64>,
    pub model: ModelArg,
    pub colors: Option<u32>,
    pub frozen: u32,
    pub domain: Option<[f64; 4]>,
    pub generations: u32,
    pub cap: usize,
    pub replicates: usize,
    pub law: StepArg,
    pub sigma: f64,
    pub slope: f64,
    pub input: Option<PathBuf>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_BISECT_TOL: f64 = 0.01;

fn invalid(msg: String) -> Error {
    Error::Invalid(msg)
}

impl RunConfig {
    pub fn new(cli: Cli) -> Result<Self> {
        let domain = match cli.domain {
            Some(d) => Some(<[f64; 4]>::try_from(d).map_err(|d| invalid(format!("--domain needs 4 numbers, got {}", d.len())))?),
            None => None,
        };
        let cfg = RunConfig {
            command: cli.command,
            k: cli.k,
            n: cli.n,
            m: cli.m,
            p: cli.p,
            x: cli.x,
            z: cli.z,
            seed: cli.seed,
            trials: cli.trials,
            step: cli.step,
            grid: cli.grid,
            tol: cli.tol,
            model: cli.model,
            colors: cli.colors,
            frozen: cli.frozen,
            domain,
            generations: cli.generations,
            cap: cli.cap,
            replicates: cli.replicates,
            law: cli.law,
            sigma: cli.sigma,
            slope: cli.slope,
            input: cli.input,
            out: cli.out,
            out_dir: cli.out_dir,
            format: cli.format,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: Option<f64>| match v {
            Some(v) if !v.is_finite() => Err(invalid(format!("--{name} must be finite, got {v}"))),
            _ => Ok(()),
        };
        finite("p", self.p)?;
        finite("x", self.x)?;
        finite("z", self.z)?;
        if let Some(k) = self.k {
            if !(2..=64).contains(&k) {
                return Err(invalid(format!("--k must lie in 2..=64, got {k}")));
            }
        }
        if self.n == Some(0) {
            return Err(invalid("--n must be >= 1".into()));
        }
        if let Some(p) = self.p {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("--p must lie in [0, 1], got {p}")));
            }
        }
        if let Some(x) = self.x {
            if !(0.0..1.0).contains(&x) {
                return Err(invalid(format!("--x must lie in [0, 1), got {x}")));
            }
        }
        if let Some(z) = self.z {
            if z < 0.0 {
                return Err(invalid(format!("--z must be >= 0, got {z}")));
            }
        }
        if self.trials == 0 {
            return Err(invalid("--trials must be >= 1".into()));
        }
        if !(self.step > 0.0 && self.step <= 0.01) {
            return Err(invalid(format!("--step must lie in (0, 0.01], got {}", self.step)));
        }
        if self.grid < 3 {
            return Err(invalid(format!("--grid must be >= 3, got {}", self.grid)));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid(format!("--tol must be positive, got {t}")));
            }
        }
        if self.colors == Some(0) {
            return Err(invalid("--colors must be >= 1".into()));
        }
        if let Some([x0, x1, y0, y1]) = self.domain {
            if !(x0 < x1 && y0 < y1 && x0 >= 0.0 && y0 >= 0.0) {
                return Err(invalid(format!("--domain must be x0 < x1, y0 < y1, non-negative: {:?}", self.domain)));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) || !(self.slope >= 0.0 && self.slope.is_finite()) {
            return Err(invalid("--sigma must be positive and --slope non-negative".into()));
        }
        if self.replicates < 2 {
            return Err(invalid("--replicates must be >= 2".into()));
        }
        if self.command == Command::Solve && self.input.is_none() {
            return Err(invalid("`solve` needs --input".into()));
        }
        Ok(())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    /// `key: value` lines echoed into every output file.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![("tool".to_string(), format!("ksat-phase {}", env!("CARGO_PKG_VERSION")))];
        if let serde_json::Value::Object(map) = serde_json::to_value(self).expect("config serializes") {
            for (k, v) in map {
                if v.is_null() {
                    continue;
                }
                let text = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                out.push((k, text));
            }
        }
        out
    }
}
