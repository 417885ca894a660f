//! Polynomial-regression surrogates of the load model, fitted on standardized
//! features and scored by R² on a held-out split.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::Dataset;
use crate::error::{Error, Result};
use crate::geometry::ShapeKind;
use crate::numerics::{least_squares_min_norm, Matrix};
use crate::sampler::{keyed_stream, NUM_FEATURES};

pub const MAX_DEGREE: usize = 4;
pub const DEFAULT_DEGREES: [usize; 4] = [1, 2, 3, 4];
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.3;

pub type Exponents = [u8; NUM_FEATURES];

fn check_degree(degree: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "polynomial degree must be in 1..={MAX_DEGREE}, got {degree}"
        )))
    }
}

/// Every exponent tuple with total degree ≤ `degree`, constant first, then
/// by total degree, ties broken lexicographically with larger leading
/// exponents first (x1² before x1·x2 before x2²).
pub fn monomial_exponents(degree: usize) -> Vec<Exponents> {
    fn fill(pos: usize, left: usize, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if pos == NUM_FEATURES - 1 {
            cur[pos] = left as u8;
            out.push(*cur);
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e as u8;
            fill(pos + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    for total in 0..=degree {
        fill(0, total, &mut [0; NUM_FEATURES], &mut out);
    }
    out
}

fn total_degree(e: &Exponents) -> usize {
    e.iter().map(|&v| v as usize).sum()
}

/// Values of the given monomials at `z`.
pub fn expand_with(z: &[f64; NUM_FEATURES], exponents: &[Exponents]) -> Vec<f64> {
    let max = exponents.iter().map(total_degree).max().unwrap_or(0);
    let mut powers = vec![[1.0; NUM_FEATURES]; max + 1];
    for p in 1..=max {
        for i in 0..NUM_FEATURES {
            powers[p][i] = powers[p - 1][i] * z[i];
        }
    }
    exponents
        .iter()
        .map(|e| {
            e.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| powers[k as usize][i])
                .product()
        })
        .collect()
}

/// Full monomial basis of the given degree evaluated at `z`.
pub fn poly_expand(z: &[f64; NUM_FEATURES], degree: usize) -> Result<Vec<f64>> {
    check_degree(degree)?;
    Ok(expand_with(z, &monomial_exponents(degree)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel {
    pub degree: usize,
    pub feature_means: Vec<f64>,
    /// Training-set sample std; a constant feature gets 1.
    pub feature_stds: Vec<f64>,
    pub exponents: Vec<Exponents>,
    pub coefficients: Vec<f64>,
}

impl PolyModel {
    pub fn standardize(&self, x: &[f64; NUM_FEATURES]) -> [f64; NUM_FEATURES] {
        std::array::from_fn(|i| (x[i] - self.feature_means[i]) / self.feature_stds[i])
    }

    pub fn predict(&self, x: &[f64; NUM_FEATURES]) -> f64 {
        expand_with(&self.standardize(x), &self.exponents)
            .iter()
            .zip(&self.coefficients)
            .map(|(m, c)| m * c)
            .sum()
    }

    pub fn predict_all(&self, xs: &[[f64; NUM_FEATURES]]) -> Vec<f64> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

/// Fits a least-squares polynomial of `degree`. The returned duration covers
/// standardization, expansion and the solve.
pub fn fit(xs: &[[f64; NUM_FEATURES]], ys: &[f64], degree: usize) -> Result<(PolyModel, Duration)> {
    check_degree(degree)?;
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "fit needs matching non-empty inputs, got {} rows and {} targets",
            xs.len(),
            ys.len()
        )));
    }
    let start = Instant::now();
    let n = xs.len() as f64;
    let means: Vec<f64> = (0..NUM_FEATURES)
        .map(|i| xs.iter().map(|x| x[i]).sum::<f64>() / n)
        .collect();
    let stds: Vec<f64> = (0..NUM_FEATURES)
        .map(|i| {
            if xs.len() < 2 {
                return 1.0;
            }
            let ss: f64 = xs.iter().map(|x| (x[i] - means[i]).powi(2)).sum();
            let s = (ss / (n - 1.0)).sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let exponents = monomial_exponents(degree);
    let mut model = PolyModel {
        degree,
        feature_means: means,
        feature_stds: stds,
        coefficients: Vec::new(),
        exponents,
    };
    let data: Vec<f64> = xs
        .iter()
        .flat_map(|x| expand_with(&model.standardize(x), &model.exponents))
        .collect();
    let design = Matrix::new(xs.len(), model.exponents.len(), data)?;
    model.coefficients = least_squares_min_norm(&design, ys)?;
    let elapsed = start.elapsed().max(Duration::from_nanos(1));
    Ok((model, elapsed))
}

/// `1 − SS_res/SS_tot`, with SS_tot taken about the mean of `actual`.
pub fn r_squared_values(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if actual.is_empty() || predicted.len() != actual.len() {
        return Err(Error::InvalidInput(
            "R² needs matching non-empty vectors".into(),
        ));
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::Numeric(format!(
                "R² undefined: constant target but residual sum of squares {ss_res}"
            )))
        };
    }
    Ok(1.0 - ss_res / ss_tot)
}

pub fn r_squared(model: &PolyModel, xs: &[[f64; NUM_FEATURES]], ys: &[f64]) -> Result<f64> {
    r_squared_values(&model.predict_all(xs), ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: DEFAULT_TRAIN_FRACTION,
            seed: 42,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train_fraction > 0.0 && self.train_fraction < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "train_fraction must lie strictly between 0 and 1, got {}",
                self.train_fraction
            )))
        }
    }

    pub fn train_count(&self, n: usize) -> usize {
        // Guard against 0.3·n landing a hair below an integer.
        ((self.train_fraction * n as f64) * (1.0 + 1e-12)).floor() as usize
    }
}

/// Seeded Fisher–Yates shuffle of `0..n`; returns (train, test) indices.
pub fn split(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = keyed_stream(spec.seed, "split", n as u64);
    for i in (1..n).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let test = idx.split_off(spec.train_count(n));
    Ok((idx, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// All shapes in one model, shape ignored.
    Pooled,
    Square,
    /// T, U and L outlines together.
    Tul,
}

impl Condition {
    pub const ALL: [Condition; 3] = [Condition::Pooled, Condition::Square, Condition::Tul];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Pooled => "pooled",
            Condition::Square => "square",
            Condition::Tul => "tul",
        }
    }

    pub fn includes(self, shape: ShapeKind) -> bool {
        match self {
            Condition::Pooled => true,
            Condition::Square => shape == ShapeKind::Square,
            Condition::Tul => shape != ShapeKind::Square,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub condition: Condition,
    pub degree: usize,
    pub n_monomials: usize,
    pub r2_test: f64,
    pub r2_train: f64,
    pub training_time_ms: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// `[predicted, simulated]` for every test row, in split order.
    pub pairs: Vec<[f64; 2]>,
}

fn fit_group(
    ds: &Dataset,
    condition: Condition,
    degree: usize,
    spec: &SplitSpec,
) -> Result<FitReport> {
    let rows: Vec<_> = ds
        .rows
        .iter()
        .filter(|r| condition.includes(r.shape))
        .collect();
    let (train, test) = split(rows.len(), spec)?;
    let gather = |idx: &[usize]| -> (Vec<[f64; NUM_FEATURES]>, Vec<f64>) {
        idx.iter()
            .map(|&i| (rows[i].features.to_array(), rows[i].load))
            .unzip()
    };
    let (x_train, y_train) = gather(&train);
    let (x_test, y_test) = gather(&test);
    if x_test.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{condition} group of {} rows leaves no test rows",
            rows.len()
        )));
    }
    let (model, elapsed) = fit(&x_train, &y_train, degree)?;
    let r2_train = r_squared(&model, &x_train, &y_train)?;
    let predicted = model.predict_all(&x_test);
    let r2_test = r_squared_values(&predicted, &y_test)?;
    Ok(FitReport {
        condition,
        degree,
        n_monomials: model.exponents.len(),
        r2_test,
        r2_train,
        training_time_ms: elapsed.as_secs_f64() * 1e3,
        n_train: train.len(),
        n_test: test.len(),
        pairs: predicted
            .into_iter()
            .zip(y_test)
            .map(|(p, y)| [p, y])
            .collect(),
    })
}

/// One model per (degree, condition): pooled, square only, and T/U/L
/// together. Each group draws its own split from the same seed.
pub fn run_experiment(ds: &Dataset, degrees: &[usize], spec: &SplitSpec) -> Result<Vec<FitReport>> {
    spec.validate()?;
    for &d in degrees {
        check_degree(d)?;
    }
    let present = ds.shapes_present();
    if let Some(missing) = ShapeKind::ALL.into_iter().find(|k| !present.contains(k)) {
        return Err(Error::InvalidInput(format!(
            "dataset lacks shape {missing}; all four outlines are required"
        )));
    }
    let jobs: Vec<(usize, Condition)> = degrees
        .iter()
        .flat_map(|&d| Condition::ALL.into_iter().map(move |c| (d, c)))
        .collect();
    jobs.into_par_iter()
        .map(|(d, c)| fit_group(ds, c, d, spec))
        .collect()
}
