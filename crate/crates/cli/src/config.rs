use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use hubbard_vqe::ansatz::{AnsatzConfig, AnsatzVariant};
use hubbard_vqe::lattice::LatticeGeometry;
use hubbard_vqe::observables::DEFAULT_U_GRID;
use hubbard_vqe::vqe::OptimizerSchedule;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceChoice {
    Exact,
    Vqe,
    Both,
}

/// Flags shared by every subcommand. All optional so a config file can
/// supply them; flags win over the file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML config file with the same keys as the long flags (dashes become underscores).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lattice as WIDTHxHEIGHT, e.g. 4x1 or 2x2.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Interaction strength U/t.
    #[arg(long)]
    pub u: Option<f64>,
    /// Comma-separated U/t values for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub u_grid: Option<Vec<f64>>,
    /// Spin sector as N_UP,N_DOWN.
    #[arg(long)]
    pub sector: Option<String>,
    /// Total electron number; every spin split is reported (exact) or the
    /// most balanced split is used (vqe, circuit-dump).
    #[arg(long)]
    pub n_electrons: Option<usize>,
    /// Number of levels to compute, starting at the ground state.
    #[arg(long)]
    pub levels: Option<usize>,
    /// Eigenvalues per sector for `exact`.
    #[arg(short = 'k')]
    pub k: Option<usize>,
    /// Energy level used in sweep diagrams.
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// modified_hopping, plain_hopping or number_preserving.
    #[arg(long)]
    pub variant: Option<String>,
    /// Bridge vertical bonds with fermionic swaps (default).
    #[arg(long, overrides_with = "no_fswap")]
    pub fswap: bool,
    /// Apply vertical hopping gates directly, ignoring the Jordan-Wigner string.
    #[arg(long, overrides_with = "fswap")]
    pub no_fswap: bool,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub stage1_iters: Option<usize>,
    #[arg(long)]
    pub stage2_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file (exact, vqe, circuit-dump) or directory (sweep).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the optimizer trace of `vqe` as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Which diagrams `sweep` computes.
    #[arg(long, value_enum)]
    pub source: Option<SourceChoice>,
}

/// Config file document: flat keys, unknown keys rejected.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub geometry: Option<String>,
    pub u: Option<f64>,
    pub u_grid: Option<Vec<f64>>,
    pub sector: Option<[usize; 2]>,
    pub n_electrons: Option<usize>,
    pub levels: Option<usize>,
    pub k: Option<usize>,
    pub level: Option<usize>,
    pub layers: Option<usize>,
    pub variant: Option<String>,
    pub fswap: Option<bool>,
    pub restarts: Option<usize>,
    pub stage1_iters: Option<usize>,
    pub stage2_iters: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trace: Option<PathBuf>,
    pub source: Option<SourceChoice>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: LatticeGeometry,
    pub u: Option<f64>,
    pub u_grid: Vec<f64>,
    pub sector: Option<(usize, usize)>,
    pub n_electrons: Option<usize>,
    pub levels: usize,
    pub k: usize,
    pub level: usize,
    pub ansatz: AnsatzConfig,
    pub schedule: OptimizerSchedule,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub trace: Option<PathBuf>,
    pub source: SourceChoice,
}

fn parse_sector(s: &str) -> anyhow::Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("sector must be N_UP,N_DOWN, got {s:?}");
    }
    Ok((parts[0].parse().context("n_up")?, parts[1].parse().context("n_down")?))
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let geometry_text = args
            .geometry
            .clone()
            .or(file.geometry)
            .context("--geometry is required (e.g. --geometry 4x1)")?;
        let geometry: LatticeGeometry = geometry_text.parse()?;

        let sector = match (&args.sector, file.sector) {
            (Some(s), _) => Some(parse_sector(s)?),
            (None, Some([a, b])) => Some((a, b)),
            (None, None) => None,
        };
        let fswap = if args.fswap {
            true
        } else if args.no_fswap {
            false
        } else {
            file.fswap.unwrap_or(true)
        };
        let variant: AnsatzVariant = match args.variant.clone().or(file.variant) {
            Some(v) => v.parse()?,
            None => AnsatzVariant::default(),
        };
        let ansatz = AnsatzConfig { layers: args.layers.or(file.layers).unwrap_or(2), use_fswap: fswap, variant };
        if ansatz.layers == 0 {
            bail!("--layers must be at least 1");
        }
        let defaults = OptimizerSchedule::default();
        let schedule = OptimizerSchedule {
            stage1_iters: args.stage1_iters.or(file.stage1_iters).unwrap_or(defaults.stage1_iters),
            stage2_iters: args.stage2_iters.or(file.stage2_iters).unwrap_or(defaults.stage2_iters),
            restarts: args.restarts.or(file.restarts).unwrap_or(defaults.restarts),
            seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
            ..defaults
        };
        schedule.validate()?;
        let workers = args
            .workers
            .or(file.workers)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        let u = args.u.or(file.u);
        let u_grid = args.u_grid.clone().or(file.u_grid).unwrap_or_else(|| DEFAULT_U_GRID.to_vec());
        if let Some(bad) = u.iter().chain(&u_grid).find(|v| !v.is_finite() || **v < 0.0) {
            bail!("U/t must be finite and non-negative, got {bad}");
        }
        Ok(Self {
            geometry,
            u,
            u_grid,
            sector,
            n_electrons: args.n_electrons.or(file.n_electrons),
            levels: args.levels.or(file.levels).unwrap_or(1),
            k: args.k.or(file.k).unwrap_or(1),
            level: args.level.or(file.level).unwrap_or(0),
            ansatz,
            schedule,
            workers,
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format),
            trace: args.trace.clone().or(file.trace),
            source: args.source.or(file.source).unwrap_or(SourceChoice::Both),
        })
    }

    pub fn require_u(&self) -> anyhow::Result<f64> {
        self.u.context("--u is required")
    }

    /// The explicit sector, or the most balanced split of `--n-electrons`
    /// (extra electron spin up).
    pub fn require_sector(&self) -> anyhow::Result<(usize, usize)> {
        match (self.sector, self.n_electrons) {
            (Some(s), _) => Ok(s),
            (None, Some(n)) => Ok((n.div_ceil(2), n / 2)),
            (None, None) => bail!("--sector or --n-electrons is required"),
        }
    }
}
