//! Command-line front end. Flags override keys of the `--config` file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Result;
use crate::geometry::{canonical_outline, ShapeKind};
use crate::io;
use crate::pipeline::{self, ModeName, PipelineConfig};

#[derive(Debug, Parser)]
#[command(
    name = "outline-energy",
    version,
    about = "Synthetic building-load samples, PCA and polynomial surrogates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample features, simulate loads and write dataset.csv.
    Generate(Common),
    /// Per-shape statistics and PCA of a dataset; writes analysis.json.
    Analyze {
        data: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also write scree and load-density figures.
        #[arg(long)]
        svg: bool,
    },
    /// Fit polynomial surrogates under each condition; writes fits.json.
    Fit {
        data: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Also write predicted-vs-simulated scatter grids.
        #[arg(long)]
        svg: bool,
    },
    /// Every stage, every artifact.
    RunAll(Common),
    /// Print the canonical outline vertices, area and perimeter.
    Outlines,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Pipeline config JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sampling seed; also the split seed unless the config sets split_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated polynomial degrees, e.g. 1,2,3,4.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Row count for --mode random.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum Mode {
    Factorial,
    Random,
}

impl Common {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(d) = &self.degrees {
            cfg.degrees = d.clone();
        }
        match self.mode {
            Some(Mode::Factorial) => {
                cfg.mode = ModeName::Factorial;
                cfg.n = None;
            }
            Some(Mode::Random) => cfg.mode = ModeName::Random,
            None => {}
        }
        if let Some(n) = self.n {
            cfg.n = Some(n);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(common) => {
            let cfg = common.resolve()?;
            let ds = pipeline::generate(&cfg)?;
            report(&pipeline::write_dataset(&cfg.out, &ds)?);
        }
        Command::Analyze { data, common, svg } => {
            let cfg = common.resolve()?;
            let ds = io::read_dataset(&data)?;
            let analysis = pipeline::analyze(&ds)?;
            let path = cfg.out.join("analysis.json");
            pipeline::write_json(&path, &analysis)?;
            report(&path);
            if svg {
                pipeline::write_analysis_figures(&cfg.out, &ds, &analysis)?;
                report(&cfg.out.join("figures"));
            }
        }
        Command::Fit { data, common, svg } => {
            let cfg = common.resolve()?;
            let ds = io::read_dataset(&data)?;
            let fits = pipeline::fit_all(&ds, &cfg.degrees, cfg.split_spec())?;
            let path = cfg.out.join("fits.json");
            pipeline::write_json(&path, &fits)?;
            report(&path);
            for f in &fits.fits {
                println!(
                    "{:>6} degree {}  r2_test {:.4}  r2_train {:.4}  {:.1} ms",
                    f.condition.label(),
                    f.degree,
                    f.r2_test,
                    f.r2_train,
                    f.training_time_ms
                );
            }
            if svg {
                pipeline::write_fit_figures(&cfg.out, &fits)?;
                report(&cfg.out.join("figures"));
            }
        }
        Command::RunAll(common) => {
            let cfg = common.resolve()?;
            pipeline::run_all(&cfg)?;
            report(&cfg.out);
        }
        Command::Outlines => {
            for k in ShapeKind::ALL {
                let o = canonical_outline(k);
                let pts: Vec<String> = o
                    .vertices
                    .iter()
                    .map(|p| format!("({},{})", p.x, p.y))
                    .collect();
                println!(
                    "{:<6} area {} m2, perimeter {} m: {}",
                    k.token(),
                    o.floor_area,
                    o.perimeter,
                    pts.join(" ")
                );
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs inside the configured thread pool and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = pipeline::thread_pool().and_then(|pool| pool.install(|| run(cli)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                if !e.to_string().contains(&s.to_string()) {
                    eprintln!("  caused by: {s}");
                }
                src = s.source();
            }
            e.exit_code()
        }
    }
}
