//! Full-factorial feature grid with per-cell Gaussian perturbation.
//!
//! Grid order is an odometer over (WWR, shading depth, glazing U,
//! orientation, wall material), WWR slowest and material fastest. Each cell
//! draws its noise from a private ChaCha8 stream keyed by
//! SHA-256(seed, shape token, cell index), so rows never depend on
//! evaluation order or thread count.
//!
//! Normal deviates use the cosine branch of the Box–Muller transform on
//! two uniforms `u1 ∈ (0, 1]`, `u2 ∈ [0, 1)`:
//! `z = sqrt(-2 ln u1) · cos(2π u2)`. The sine branch is discarded so each
//! deviate consumes exactly two uniforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::ShapeKind;

pub const NUM_FEATURES: usize = 8;

/// Column names in feature order; also the CSV header order.
pub const FEATURE_COLUMNS: [&str; NUM_FEATURES] = [
    "orientation_deg",
    "wwr",
    "shading_depth_m",
    "glazing_u_w_m2k",
    "wall_thickness_m",
    "wall_conductivity_w_mk",
    "wall_density_kg_m3",
    "wall_shc_j_kgk",
];

pub const FEATURE_LABELS: [&str; NUM_FEATURES] = [
    "Orientation",
    "WWR",
    "Shading depth",
    "Glazing U-value",
    "Wall thickness",
    "Wall conductivity",
    "Wall density",
    "Wall SHC",
];

const MAX_REJECTIONS: usize = 100;

/// Physical support of a perturbed feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    Real,
    /// `x >= 0`
    NonNegative,
    /// `x > 0`
    Positive,
    /// `0 < x < 1`
    OpenUnit,
    /// Wrapped into `[0, modulus)`; never rejected.
    Circular {
        modulus: f64,
    },
}

impl Support {
    fn admits(self, x: f64) -> bool {
        match self {
            Support::Real | Support::Circular { .. } => x.is_finite(),
            Support::NonNegative => x >= 0.0 && x.is_finite(),
            Support::Positive => x > 0.0 && x.is_finite(),
            Support::OpenUnit => x > 0.0 && x < 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturePrior {
    pub name: String,
    pub grid_values: Vec<f64>,
    pub sigma: f64,
    pub support: Support,
}

impl FeaturePrior {
    fn new(name: &str, grid_values: Vec<f64>, sigma: f64, support: Support) -> Self {
        FeaturePrior {
            name: name.to_string(),
            grid_values,
            sigma,
            support,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "prior {}: sigma must be finite and >= 0",
                self.name
            )));
        }
        if self.grid_values.is_empty() {
            return Err(Error::Config(format!("prior {}: empty grid", self.name)));
        }
        if self
            .grid_values
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Config(format!(
                "prior {}: grid values must be strictly increasing",
                self.name
            )));
        }
        Ok(())
    }
}

/// Mean and standard deviation of one Gaussian-perturbed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gaussian {
    pub mean: f64,
    pub sigma: f64,
}

impl Gaussian {
    pub const fn new(mean: f64, sigma: f64) -> Self {
        Gaussian { mean, sigma }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialPrior {
    pub name: String,
    /// m
    pub thickness: Gaussian,
    /// W/m·K
    pub conductivity: Gaussian,
    /// kg/m³
    pub density: Gaussian,
    /// J/kg·K
    pub shc: Gaussian,
}

impl MaterialPrior {
    fn params(&self) -> [(&'static str, Gaussian); 4] {
        [
            ("thickness", self.thickness),
            ("conductivity", self.conductivity),
            ("density", self.density),
            ("shc", self.shc),
        ]
    }

    fn validate(&self) -> Result<()> {
        for (what, g) in self.params() {
            if !(g.mean > 0.0 && g.mean.is_finite() && g.sigma >= 0.0 && g.sigma.is_finite()) {
                return Err(Error::Config(format!(
                    "material {}: {what} needs mean > 0 and sigma >= 0",
                    self.name
                )));
            }
        }
        Ok(())
    }
}

/// Every prior the sampler draws from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Priors {
    pub orientation: FeaturePrior,
    pub wwr: FeaturePrior,
    pub shading_depth: FeaturePrior,
    pub glazing_u: FeaturePrior,
    pub materials: Vec<MaterialPrior>,
}

impl Default for Priors {
    fn default() -> Self {
        default_priors()
    }
}

/// Grid levels and noise levels for the office study.
pub fn default_priors() -> Priors {
    let orientation: Vec<f64> = (0..12).map(|k| 30.0 * k as f64).collect();
    Priors {
        orientation: FeaturePrior::new(
            "orientation",
            orientation,
            3.0,
            Support::Circular { modulus: 360.0 },
        ),
        wwr: FeaturePrior::new(
            "wwr",
            vec![0.1, 0.2, 0.3, 0.4, 0.5],
            0.01,
            Support::OpenUnit,
        ),
        shading_depth: FeaturePrior::new(
            "shading_depth",
            vec![0.0, 0.15, 0.30, 0.45],
            0.01,
            Support::NonNegative,
        ),
        glazing_u: FeaturePrior::new("glazing_u", vec![0.7, 2.72, 4.54], 0.01, Support::Positive),
        materials: vec![
            MaterialPrior {
                name: "concrete".into(),
                thickness: Gaussian::new(0.21, 0.021),
                conductivity: Gaussian::new(1.13, 0.1),
                density: Gaussian::new(2000.0, 30.0),
                shc: Gaussian::new(1000.0, 106.0),
            },
            MaterialPrior {
                name: "brick".into(),
                thickness: Gaussian::new(0.16, 0.016),
                conductivity: Gaussian::new(0.84, 0.27),
                density: Gaussian::new(1700.0, 297.5),
                shc: Gaussian::new(800.0, 86.0),
            },
        ],
    }
}

impl Priors {
    pub fn validate(&self) -> Result<()> {
        for p in self.grid_features() {
            p.validate()?;
        }
        if let Support::Circular { modulus } = self.orientation.support {
            if !(modulus > 0.0 && modulus.is_finite()) {
                return Err(Error::Config("orientation modulus must be > 0".into()));
            }
        }
        if self.materials.is_empty() {
            return Err(Error::Config("at least one wall material required".into()));
        }
        for m in &self.materials {
            m.validate()?;
        }
        Ok(())
    }

    /// Grid features in odometer order (slowest first), material excluded.
    fn grid_features(&self) -> [&FeaturePrior; 4] {
        [
            &self.wwr,
            &self.shading_depth,
            &self.glazing_u,
            &self.orientation,
        ]
    }

    /// Level counts in odometer order: wwr, shading, glazing, orientation, material.
    pub fn level_counts(&self) -> [usize; 5] {
        [
            self.wwr.grid_values.len(),
            self.shading_depth.grid_values.len(),
            self.glazing_u.grid_values.len(),
            self.orientation.grid_values.len(),
            self.materials.len(),
        ]
    }

    pub fn cells_per_shape(&self) -> usize {
        self.level_counts().iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Degrees clockwise from north, [0, 360).
    pub orientation: f64,
    pub wwr: f64,
    /// m
    pub shading_depth: f64,
    /// W/m²·K
    pub glazing_u: f64,
    /// m
    pub wall_thickness: f64,
    /// W/m·K
    pub wall_conductivity: f64,
    /// kg/m³
    pub wall_density: f64,
    /// J/kg·K
    pub wall_shc: f64,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        [
            self.orientation,
            self.wwr,
            self.shading_depth,
            self.glazing_u,
            self.wall_thickness,
            self.wall_conductivity,
            self.wall_density,
            self.wall_shc,
        ]
    }

    pub fn from_array(a: [f64; NUM_FEATURES]) -> Self {
        FeatureVector {
            orientation: a[0],
            wwr: a[1],
            shading_depth: a[2],
            glazing_u: a[3],
            wall_thickness: a[4],
            wall_conductivity: a[5],
            wall_density: a[6],
            wall_shc: a[7],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.to_array();
        if let Some(i) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{} is not finite",
                FEATURE_COLUMNS[i]
            )));
        }
        let bad = |i: usize, rule: &str| {
            Err(Error::InvalidInput(format!(
                "{} = {} violates {rule}",
                FEATURE_COLUMNS[i], a[i]
            )))
        };
        if !(0.0..360.0).contains(&self.orientation) {
            return bad(0, "0 <= x < 360");
        }
        if !(0.0..1.0).contains(&self.wwr) {
            return bad(1, "0 <= x < 1");
        }
        if self.shading_depth < 0.0 {
            return bad(2, "x >= 0");
        }
        for i in [3, 4, 5, 6, 7] {
            if a[i] <= 0.0 {
                return bad(i, "x > 0");
            }
        }
        Ok(())
    }
}

/// One factorial cell: level indices per grid feature plus the material.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub shape: ShapeKind,
    /// Position in odometer order within the shape.
    pub index: usize,
    pub wwr: usize,
    pub shading: usize,
    pub glazing: usize,
    pub orientation: usize,
    pub material: usize,
}

impl GridCell {
    /// Decodes an odometer index.
    pub fn from_index(shape: ShapeKind, index: usize, priors: &Priors) -> Self {
        let [_, ns, ng, no, nm] = priors.level_counts();
        let mut rest = index;
        let material = rest % nm;
        rest /= nm;
        let orientation = rest % no;
        rest /= no;
        let glazing = rest % ng;
        rest /= ng;
        let shading = rest % ns;
        rest /= ns;
        GridCell {
            shape,
            index,
            wwr: rest,
            shading,
            glazing,
            orientation,
            material,
        }
    }

    /// Grid values of the cell (material means for the wall features).
    pub fn nominal(&self, priors: &Priors) -> FeatureVector {
        let m = &priors.materials[self.material];
        FeatureVector {
            orientation: priors.orientation.grid_values[self.orientation],
            wwr: priors.wwr.grid_values[self.wwr],
            shading_depth: priors.shading_depth.grid_values[self.shading],
            glazing_u: priors.glazing_u.grid_values[self.glazing],
            wall_thickness: m.thickness.mean,
            wall_conductivity: m.conductivity.mean,
            wall_density: m.density.mean,
            wall_shc: m.shc.mean,
        }
    }
}

pub fn enumerate_grid(shape: ShapeKind, priors: &Priors) -> Vec<GridCell> {
    (0..priors.cells_per_shape())
        .map(|i| GridCell::from_index(shape, i, priors))
        .collect()
}

/// Standard normal deviate by the Box–Muller cosine branch.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn draw<R: Rng + ?Sized>(
    name: &str,
    nominal: f64,
    sigma: f64,
    support: Support,
    rng: &mut R,
) -> Result<f64> {
    for _ in 0..MAX_REJECTIONS {
        let x = nominal + sigma * standard_normal(rng);
        if let Support::Circular { modulus } = support {
            let w = x.rem_euclid(modulus);
            return Ok(if w >= modulus { 0.0 } else { w });
        }
        if support.admits(x) {
            return Ok(x);
        }
    }
    Err(Error::Sampler(format!(
        "{name}: {MAX_REJECTIONS} consecutive draws outside {support:?} \
         (nominal {nominal}, sigma {sigma})"
    )))
}

/// Adds Gaussian noise to every feature of a grid cell.
///
/// Draw order is the feature order of [`FeatureVector`]. Out-of-support
/// draws are redrawn; orientation wraps instead.
pub fn perturb<R: Rng + ?Sized>(
    cell: &GridCell,
    priors: &Priors,
    rng: &mut R,
) -> Result<FeatureVector> {
    let nominal = cell.nominal(priors);
    let m = &priors.materials[cell.material];
    let o = &priors.orientation;
    let orientation = draw(&o.name, nominal.orientation, o.sigma, o.support, rng)?;
    let w = &priors.wwr;
    let s = &priors.shading_depth;
    let g = &priors.glazing_u;
    Ok(FeatureVector {
        orientation,
        wwr: draw(&w.name, nominal.wwr, w.sigma, w.support, rng)?,
        shading_depth: draw(&s.name, nominal.shading_depth, s.sigma, s.support, rng)?,
        glazing_u: draw(&g.name, nominal.glazing_u, g.sigma, g.support, rng)?,
        wall_thickness: draw(
            "wall_thickness",
            m.thickness.mean,
            m.thickness.sigma,
            Support::Positive,
            rng,
        )?,
        wall_conductivity: draw(
            "wall_conductivity",
            m.conductivity.mean,
            m.conductivity.sigma,
            Support::Positive,
            rng,
        )?,
        wall_density: draw(
            "wall_density",
            m.density.mean,
            m.density.sigma,
            Support::Positive,
            rng,
        )?,
        wall_shc: draw("wall_shc", m.shc.mean, m.shc.sigma, Support::Positive, rng)?,
    })
}

pub(crate) fn keyed_stream(seed: u64, domain: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"outline-energy/v1/");
    h.update(domain.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    let key: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(key)
}

/// The private noise stream of one factorial cell.
pub fn cell_stream(seed: u64, shape: ShapeKind, cell_index: usize) -> ChaCha8Rng {
    keyed_stream(seed, shape.token(), cell_index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// One noisy draw per factorial cell, all shapes.
    Factorial,
    /// `n` rows, each with a uniformly drawn shape and cell.
    Random { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRow {
    pub shape: ShapeKind,
    pub cell: GridCell,
    pub features: FeatureVector,
}

pub fn generate_features(seed: u64, priors: &Priors, mode: SampleMode) -> Result<Vec<FeatureRow>> {
    priors.validate()?;
    match mode {
        SampleMode::Factorial => {
            let per_shape = priors.cells_per_shape();
            (0..ShapeKind::ALL.len() * per_shape)
                .into_par_iter()
                .map(|i| {
                    let shape = ShapeKind::ALL[i / per_shape];
                    let cell = GridCell::from_index(shape, i % per_shape, priors);
                    let mut rng = cell_stream(seed, shape, cell.index);
                    let features = perturb(&cell, priors, &mut rng)?;
                    Ok(FeatureRow {
                        shape,
                        cell,
                        features,
                    })
                })
                .collect()
        }
        SampleMode::Random { n } => {
            let per_shape = priors.cells_per_shape();
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = keyed_stream(seed, "random", i as u64);
                    let shape = ShapeKind::ALL[rng.random_range(0..ShapeKind::ALL.len())];
                    let cell = GridCell::from_index(shape, rng.random_range(0..per_shape), priors);
                    let features = perturb(&cell, priors, &mut rng)?;
                    Ok(FeatureRow {
                        shape,
                        cell,
                        features,
                    })
                })
                .collect()
        }
    }
}
