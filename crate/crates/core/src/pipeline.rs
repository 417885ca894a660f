//! End-to-end driver: generate → simulate → analyze → fit → write artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{
    load_distribution, run_pca, shape_comparison, summarize_by_shape, Dataset, PcaResult,
    Provenance, ShapeComparison, ShapeSummary,
};
use crate::error::{Error, Result};
use crate::geometry::ShapeKind;
use crate::oracle::{simulate_rows, ClimateConfig};
use crate::sampler::{generate_features, Priors, SampleMode};
use crate::surrogate::{
    run_experiment, Condition, FitReport, SplitSpec, DEFAULT_DEGREES, DEFAULT_TRAIN_FRACTION,
};
use crate::{io, svg};

pub const THREADS_ENV: &str = "OUTLINE_ENERGY_THREADS";
pub const DENSITY_BINS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Factorial,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub climate: ClimateConfig,
    pub priors: Priors,
    pub degrees: Vec<usize>,
    pub train_fraction: f64,
    /// Defaults to `seed`.
    pub split_seed: Option<u64>,
    pub mode: ModeName,
    /// Row count in random mode.
    pub n: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            out: PathBuf::from("out"),
            climate: ClimateConfig::default(),
            priors: Priors::default(),
            degrees: DEFAULT_DEGREES.to_vec(),
            train_fraction: DEFAULT_TRAIN_FRACTION,
            split_seed: None,
            mode: ModeName::Factorial,
            n: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.climate.validate()?;
        self.priors.validate()?;
        self.split_spec().validate()?;
        if self.degrees.is_empty() {
            return Err(Error::Config("degrees must not be empty".into()));
        }
        if let Some(d) = self.degrees.iter().find(|d| !(1..=4).contains(*d)) {
            return Err(Error::Config(format!("degrees: {d} is outside 1..=4")));
        }
        self.sample_mode().map(|_| ())
    }

    pub fn sample_mode(&self) -> Result<SampleMode> {
        match (self.mode, self.n) {
            (ModeName::Factorial, None) => Ok(SampleMode::Factorial),
            (ModeName::Factorial, Some(_)) => {
                Err(Error::Config("n applies only to mode \"random\"".into()))
            }
            (ModeName::Random, Some(n)) if n > 0 => Ok(SampleMode::Random { n }),
            (ModeName::Random, _) => {
                Err(Error::Config("mode \"random\" needs a positive n".into()))
            }
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            seed: self.split_seed.unwrap_or(self.seed),
        }
    }
}

/// Hex SHA-256 of the compact JSON encoding.
pub fn digest<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("config types serialize");
    hex::encode(Sha256::digest(json))
}

/// Digest of everything that shapes the results; the output path is left out.
pub fn config_digest(cfg: &PipelineConfig) -> String {
    let mut c = cfg.clone();
    c.out = PathBuf::new();
    digest(&c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub split_seed: u64,
    pub config_digest: String,
    pub priors_digest: String,
    pub climate_digest: String,
}

impl ProvenanceRecord {
    pub fn new(cfg: &PipelineConfig) -> Self {
        ProvenanceRecord {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            split_seed: cfg.split_spec().seed,
            config_digest: config_digest(cfg),
            priors_digest: digest(&cfg.priors),
            climate_digest: digest(&cfg.climate),
        }
    }
}

pub fn generate(cfg: &PipelineConfig) -> Result<Dataset> {
    cfg.validate()?;
    let rows = generate_features(cfg.seed, &cfg.priors, cfg.sample_mode()?)?;
    let samples = simulate_rows(&rows, &cfg.climate)?;
    Dataset::new(
        samples,
        Some(Provenance {
            seed: cfg.seed,
            priors_digest: digest(&cfg.priors),
            config_digest: config_digest(cfg),
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n_samples: usize,
    pub shape_summary: ShapeSummary,
    pub shape_comparison: Option<ShapeComparison>,
    pub pca: PcaResult,
}

pub fn analyze(ds: &Dataset) -> Result<AnalysisReport> {
    let shape_summary = summarize_by_shape(ds)?;
    let shape_comparison = if ds.shapes_present().len() == ShapeKind::ALL.len() {
        Some(shape_comparison(&shape_summary)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        n_samples: ds.len(),
        shape_summary,
        shape_comparison,
        pca: run_pca(ds)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitsReport {
    pub split: SplitSpec,
    pub degrees: Vec<usize>,
    pub fits: Vec<FitReport>,
}

impl FitsReport {
    pub fn condition(&self, c: Condition) -> Vec<&FitReport> {
        self.fits.iter().filter(|f| f.condition == c).collect()
    }

    pub fn get(&self, c: Condition, degree: usize) -> Option<&FitReport> {
        self.fits
            .iter()
            .find(|f| f.condition == c && f.degree == degree)
    }
}

pub fn fit_all(ds: &Dataset, degrees: &[usize], split: SplitSpec) -> Result<FitsReport> {
    Ok(FitsReport {
        split,
        degrees: degrees.to_vec(),
        fits: run_experiment(ds, degrees, &split)?,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, &text)
}

pub fn write_dataset(dir: &Path, ds: &Dataset) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("dataset.csv");
    io::write_dataset(&path, ds)?;
    Ok(path)
}

pub fn write_analysis_figures(dir: &Path, ds: &Dataset, report: &AnalysisReport) -> Result<()> {
    let figs = dir.join("figures");
    write_file(&figs.join("scree.svg"), &svg::scree_plot(&report.pca))?;
    let dist = load_distribution(ds, DENSITY_BINS)?;
    write_file(&figs.join("load_density.svg"), &svg::density_plot(&dist))
}

pub fn write_fit_figures(dir: &Path, report: &FitsReport) -> Result<()> {
    for c in Condition::ALL {
        let panels = report.condition(c);
        let title = format!("Predicted vs simulated load ({c})");
        write_file(
            &dir.join("figures").join(format!("scatter_{c}.svg")),
            &svg::scatter_grid(&title, &panels),
        )?;
    }
    Ok(())
}

/// Runs every stage and writes dataset.csv, analysis.json, fits.json,
/// provenance.json and figures/ under `cfg.out`.
pub fn run_all(cfg: &PipelineConfig) -> Result<()> {
    let out = &cfg.out;
    let ds = generate(cfg).map_err(Error::in_stage("generate"))?;
    write_dataset(out, &ds).map_err(Error::in_stage("generate"))?;
    let analysis = analyze(&ds).map_err(Error::in_stage("analyze"))?;
    write_json(&out.join("analysis.json"), &analysis).map_err(Error::in_stage("analyze"))?;
    write_analysis_figures(out, &ds, &analysis).map_err(Error::in_stage("analyze"))?;
    let fits = fit_all(&ds, &cfg.degrees, cfg.split_spec()).map_err(Error::in_stage("fit"))?;
    write_json(&out.join("fits.json"), &fits).map_err(Error::in_stage("fit"))?;
    write_fit_figures(out, &fits).map_err(Error::in_stage("fit"))?;
    write_json(&out.join("provenance.json"), &ProvenanceRecord::new(cfg))
        .map_err(Error::in_stage("provenance"))
}

/// Thread pool sized by `OUTLINE_ENERGY_THREADS` (unset or 0 = one per core).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            Error::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got {v:?}"
            ))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}
