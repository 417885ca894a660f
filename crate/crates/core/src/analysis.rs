//! Dataset-level statistics: per-shape load summaries, load densities and
//! PCA of the standardized feature matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ShapeKind;
use crate::numerics::{symmetric_eigen, Matrix};
use crate::oracle::Sample;
use crate::sampler::{FEATURE_LABELS, NUM_FEATURES};

/// Where a generated dataset came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub priors_digest: String,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Sample>,
    pub provenance: Option<Provenance>,
}

impl Dataset {
    pub fn new(rows: Vec<Sample>, provenance: Option<Provenance>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("dataset has no rows".into()));
        }
        Ok(Dataset { rows, provenance })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn shapes_present(&self) -> Vec<ShapeKind> {
        ShapeKind::ALL
            .into_iter()
            .filter(|k| self.rows.iter().any(|r| r.shape == *k))
            .collect()
    }

    pub fn loads_of(&self, shape: ShapeKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.shape == shape)
            .map(|r| r.load)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats {
    pub shape: ShapeKind,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub shapes: Vec<ShapeStats>,
}

impl ShapeSummary {
    pub fn get(&self, shape: ShapeKind) -> Option<&ShapeStats> {
        self.shapes.iter().find(|s| s.shape == shape)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Min, max, mean and sample standard deviation of load per shape present.
pub fn summarize_by_shape(ds: &Dataset) -> Result<ShapeSummary> {
    let mut shapes = Vec::new();
    for shape in ds.shapes_present() {
        let loads = ds.loads_of(shape);
        if loads.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "shape {shape} has {} row(s); at least 2 required",
                loads.len()
            )));
        }
        shapes.push(ShapeStats {
            shape,
            count: loads.len(),
            min: loads.iter().copied().fold(f64::INFINITY, f64::min),
            max: loads.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: mean(&loads),
            std: sample_std(&loads),
        });
    }
    if shapes.is_empty() {
        return Err(Error::InvalidInput("no shape groups".into()));
    }
    Ok(ShapeSummary { shapes })
}

/// Average of the T, U and L statistics relative to the square, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeComparison {
    pub min_pct: f64,
    pub max_pct: f64,
    pub mean_pct: f64,
    pub std_pct: f64,
}

pub fn shape_comparison(s: &ShapeSummary) -> Result<ShapeComparison> {
    let get = |k: ShapeKind| {
        s.get(k)
            .ok_or_else(|| Error::InvalidInput(format!("shape {k} missing from summary")))
    };
    let square = get(ShapeKind::Square)?;
    let others = [
        get(ShapeKind::TShape)?,
        get(ShapeKind::UShape)?,
        get(ShapeKind::LShape)?,
    ];
    let pct = |f: fn(&ShapeStats) -> f64| {
        let avg = others.iter().map(|o| f(o)).sum::<f64>() / 3.0;
        100.0 * (avg / f(square) - 1.0)
    };
    Ok(ShapeComparison {
        min_pct: pct(|x| x.min),
        max_pct: pct(|x| x.max),
        mean_pct: pct(|x| x.mean),
        std_pct: pct(|x| x.std),
    })
}

pub const DENSITY_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeDensity {
    pub shape: ShapeKind,
    /// Histogram density per bin; integrates to 1 over `bin_edges`.
    pub histogram: Vec<f64>,
    /// Gaussian-kernel bandwidth (Silverman's rule).
    pub bandwidth: f64,
    /// Kernel density evaluated on `LoadDistribution::grid`.
    pub kde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadDistribution {
    pub bin_edges: Vec<f64>,
    pub grid: Vec<f64>,
    pub shapes: Vec<ShapeDensity>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `0.9 · min(σ, IQR/1.34) · n^(-1/5)`, falling back to σ when the IQR is
/// zero and to a small fixed width when the sample is constant.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let sd = if xs.len() > 1 { sample_std(xs) } else { 0.0 };
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        _ => 0.0,
    };
    if spread > 0.0 {
        0.9 * spread * (xs.len() as f64).powf(-0.2)
    } else {
        1e-3 * mean(xs).abs().max(1.0)
    }
}

/// Per-shape histograms and kernel densities on a shared load axis.
pub fn load_distribution(ds: &Dataset, bins: usize) -> Result<LoadDistribution> {
    if bins < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let lo = ds.rows.iter().map(|r| r.load).fold(f64::INFINITY, f64::min);
    let hi = ds
        .rows
        .iter()
        .map(|r| r.load)
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let bin_edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let grid: Vec<f64> = (0..DENSITY_GRID_POINTS)
        .map(|i| lo + (hi - lo) * i as f64 / (DENSITY_GRID_POINTS - 1) as f64)
        .collect();

    let shapes = ds
        .shapes_present()
        .into_iter()
        .map(|shape| {
            let loads = ds.loads_of(shape);
            let n = loads.len() as f64;
            let mut counts = vec![0usize; bins];
            for &x in &loads {
                let b = (((x - lo) / width).floor() as usize).min(bins - 1);
                counts[b] += 1;
            }
            let histogram = counts.iter().map(|&c| c as f64 / (n * width)).collect();
            let h = silverman_bandwidth(&loads);
            let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
            let kde = grid
                .iter()
                .map(|&g| {
                    norm * loads
                        .iter()
                        .map(|&x| (-0.5 * ((g - x) / h).powi(2)).exp())
                        .sum::<f64>()
                })
                .collect();
            ShapeDensity {
                shape,
                histogram,
                bandwidth: h,
                kde,
            }
        })
        .collect();
    Ok(LoadDistribution {
        bin_edges,
        grid,
        shapes,
    })
}

/// Largest pointwise gap between two curves sampled on the same grid.
pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaResult {
    pub feature_names: Vec<String>,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `loadings[variable][pc]`; each PC column has unit norm.
    pub loadings: Vec<Vec<f64>>,
    pub explained_ratio: Vec<f64>,
    pub cumulative_ratio: Vec<f64>,
}

impl PcaResult {
    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.feature_means.iter().zip(&self.feature_stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    /// Scores of a standardized row on every PC.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let p = self.loadings.len();
        (0..p)
            .map(|pc| (0..p).map(|v| z[v] * self.loadings[v][pc]).sum())
            .collect()
    }

    /// Inverse of [`PcaResult::project`].
    pub fn reconstruct(&self, scores: &[f64]) -> Vec<f64> {
        self.loadings
            .iter()
            .map(|row| row.iter().zip(scores).map(|(l, s)| l * s).sum())
            .collect()
    }

    /// Variables ordered by |loading| on one PC, largest first.
    pub fn ranked_variables(&self, pc: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.loadings.len()).collect();
        idx.sort_by(|&a, &b| {
            self.loadings[b][pc]
                .abs()
                .total_cmp(&self.loadings[a][pc].abs())
        });
        idx
    }
}

/// PCA on the correlation matrix of the columns of `data`.
pub fn pca_matrix(data: &Matrix, names: &[&str]) -> Result<PcaResult> {
    let (n, p) = (data.rows(), data.cols());
    if names.len() != p {
        return Err(Error::InvalidInput("one name per column required".into()));
    }
    if n < p + 1 {
        return Err(Error::InvalidInput(format!(
            "PCA over {p} variables needs at least {} rows, got {n}",
            p + 1
        )));
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|j| data.column(j)).collect();
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let stds: Vec<f64> = columns.iter().map(|c| sample_std(c)).collect();
    if let Some(j) = stds.iter().position(|s| *s <= 0.0 || !s.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "feature {:?} has zero variance",
            names[j]
        )));
    }
    let z: Vec<Vec<f64>> = columns
        .iter()
        .enumerate()
        .map(|(j, c)| c.iter().map(|v| (v - means[j]) / stds[j]).collect())
        .collect();
    let mut corr = Matrix::zeros(p, p);
    for a in 0..p {
        for b in a..p {
            let r = z[a].iter().zip(&z[b]).map(|(x, y)| x * y).sum::<f64>() / (n - 1) as f64;
            corr[(a, b)] = r;
            corr[(b, a)] = r;
        }
    }
    let eig = symmetric_eigen(&corr)?;
    let explained_ratio: Vec<f64> = eig.eigenvalues.iter().map(|l| l / p as f64).collect();
    let cumulative_ratio = explained_ratio
        .iter()
        .scan(0.0, |acc, r| {
            *acc += r;
            Some(*acc)
        })
        .collect();
    let loadings = (0..p).map(|v| eig.eigenvectors.row(v).to_vec()).collect();
    Ok(PcaResult {
        feature_names: names.iter().map(|s| s.to_string()).collect(),
        feature_means: means,
        feature_stds: stds,
        eigenvalues: eig.eigenvalues,
        loadings,
        explained_ratio,
        cumulative_ratio,
    })
}

/// PCA over the eight building features; shape and load are excluded.
pub fn run_pca(ds: &Dataset) -> Result<PcaResult> {
    let data: Vec<f64> = ds.rows.iter().flat_map(|r| r.features.to_array()).collect();
    let m = Matrix::new(ds.len(), NUM_FEATURES, data)?;
    pca_matrix(&m, &FEATURE_LABELS)
}
