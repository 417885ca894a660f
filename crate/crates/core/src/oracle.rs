//! Steady-state degree-day model of annual heating plus cooling demand.
//!
//! ```text
//! H_tr   = U_wall·A_opaque + U_glazing·A_glazed + u_roof·A_floor + h_vent      [W/K]
//! G_sol  = Σ_edges shgc · f_shade · A_glazed,e · I(azimuth_e)                    [kWh/yr]
//! Q_heat = max(0, 0.024·H_tr·hdd − eta_gain·f_heat_season·G_sol)
//! Q_cool = 0.024·H_tr·cdd + f_cool_season·G_sol + q_internal·A_floor
//! load   = m(C) · (Q_heat + Q_cool) / A_floor                                    [kWh/m²·yr]
//! ```
//!
//! `h_vent`, `q_internal` and `u_roof` do not depend on the outline, so the
//! envelope carries only part of the load and the square-versus-other gap
//! stays moderate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    facade_breakdown, rotate_azimuths, OutlineSpec, ShapeKind, DEFAULT_WALL_HEIGHT,
};
use crate::sampler::{FeatureRow, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClimateConfig {
    /// Heating degree days, K·day.
    pub hdd: f64,
    /// Cooling degree days, K·day.
    pub cdd: f64,
    /// Annual facade irradiation at the best (south) azimuth, kWh/m²·yr.
    pub irr_max: f64,
    /// Annual facade irradiation at the worst (north) azimuth, kWh/m²·yr.
    pub irr_min: f64,
    pub shgc: f64,
    pub f_heat_season: f64,
    pub f_cool_season: f64,
    pub eta_gain: f64,
    /// W/m²·K
    pub u_roof: f64,
    /// m²·K/W
    pub r_si: f64,
    /// m²·K/W
    pub r_se: f64,
    /// W/K
    pub h_vent: f64,
    /// kWh/m²·yr
    pub q_internal: f64,
    pub alpha_mass: f64,
    /// J/m²·K
    pub c_ref: f64,
    /// m
    pub wall_height: f64,
}

impl Default for ClimateConfig {
    fn default() -> Self {
        ClimateConfig {
            hdd: 500.0,
            cdd: 300.0,
            irr_max: 1100.0,
            irr_min: 400.0,
            shgc: 0.6,
            f_heat_season: 0.4,
            f_cool_season: 0.35,
            eta_gain: 0.6,
            u_roof: 0.3,
            r_si: 0.13,
            r_se: 0.04,
            h_vent: 200.0,
            q_internal: 170.0,
            alpha_mass: 0.10,
            c_ref: 4.2e5,
            wall_height: DEFAULT_WALL_HEIGHT,
        }
    }
}

impl ClimateConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hdd", self.hdd),
            ("cdd", self.cdd),
            ("irr_max", self.irr_max),
            ("irr_min", self.irr_min),
            ("shgc", self.shgc),
            ("f_heat_season", self.f_heat_season),
            ("f_cool_season", self.f_cool_season),
            ("eta_gain", self.eta_gain),
            ("u_roof", self.u_roof),
            ("r_si", self.r_si),
            ("r_se", self.r_se),
            ("h_vent", self.h_vent),
            ("q_internal", self.q_internal),
            ("alpha_mass", self.alpha_mass),
            ("c_ref", self.c_ref),
            ("wall_height", self.wall_height),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Config(format!("climate.{name} must be finite")));
            }
            if v < 0.0 {
                return Err(Error::Config(format!("climate.{name} must be >= 0")));
            }
        }
        for (name, v) in [
            ("shgc", self.shgc),
            ("f_heat_season", self.f_heat_season),
            ("f_cool_season", self.f_cool_season),
            ("eta_gain", self.eta_gain),
            ("alpha_mass", self.alpha_mass),
        ] {
            if v > 1.0 {
                return Err(Error::Config(format!("climate.{name} must be <= 1")));
            }
        }
        if self.irr_max < self.irr_min {
            return Err(Error::Config("climate.irr_max must be >= irr_min".into()));
        }
        if self.wall_height == 0.0 {
            return Err(Error::Config("climate.wall_height must be > 0".into()));
        }
        Ok(())
    }
}

/// One simulated building: its outline, features and annual load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub shape: ShapeKind,
    pub features: FeatureVector,
    /// kWh/m²·yr
    pub load: f64,
}

impl Sample {
    pub fn new(shape: ShapeKind, features: FeatureVector, load: f64) -> Result<Self> {
        if !(load > 0.0 && load.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "thermal load must be positive and finite, got {load}"
            )));
        }
        Ok(Sample {
            shape,
            features,
            load,
        })
    }
}

/// Wall transmittance including inner and outer surface films.
pub fn wall_u_value(thickness: f64, conductivity: f64, config: &ClimateConfig) -> Result<f64> {
    if !(thickness > 0.0 && conductivity > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wall thickness ({thickness}) and conductivity ({conductivity}) must be positive"
        )));
    }
    Ok(1.0 / (config.r_si + thickness / conductivity + config.r_se))
}

/// Fraction of solar gain passing an overhang of the given depth.
pub fn shading_factor(depth: f64) -> f64 {
    (1.0 - 1.2 * depth).max(0.2)
}

/// Annual irradiation on a facade facing `azimuth` degrees.
pub fn facade_irradiation(azimuth: f64, config: &ClimateConfig) -> f64 {
    let phase = (azimuth - 180.0).to_radians();
    config.irr_min + (config.irr_max - config.irr_min) * (1.0 + phase.cos()) / 2.0
}

/// Load multiplier from areal heat capacity, in `(1 - alpha_mass, 1]`.
pub fn mass_factor(density: f64, shc: f64, thickness: f64, config: &ClimateConfig) -> f64 {
    let c = density * shc * thickness;
    1.0 - config.alpha_mass * c / (c + config.c_ref)
}

pub fn simulate_load(
    outline: &OutlineSpec,
    x: &FeatureVector,
    config: &ClimateConfig,
) -> Result<f64> {
    x.validate()?;
    let facade = facade_breakdown(outline, config.wall_height, x.wwr)?;
    let azimuths = rotate_azimuths(outline, x.orientation);
    let u_wall = wall_u_value(x.wall_thickness, x.wall_conductivity, config)?;

    let h_tr = u_wall * facade.total_opaque
        + x.glazing_u * facade.total_glazed
        + config.u_roof * outline.floor_area
        + config.h_vent;

    let shade = shading_factor(x.shading_depth);
    let g_sol: f64 = facade
        .glazed
        .iter()
        .zip(&azimuths)
        .map(|(area, &az)| config.shgc * shade * area * facade_irradiation(az, config))
        .sum();

    let q_heat = (h_tr * 24.0 * config.hdd / 1000.0
        - config.eta_gain * config.f_heat_season * g_sol)
        .max(0.0);
    let q_cool = h_tr * 24.0 * config.cdd / 1000.0
        + config.f_cool_season * g_sol
        + config.q_internal * outline.floor_area;

    let mass = mass_factor(x.wall_density, x.wall_shc, x.wall_thickness, config);
    let load = mass * (q_heat + q_cool) / outline.floor_area;
    if !load.is_finite() {
        return Err(Error::Numeric(format!("non-finite load for {x:?}")));
    }
    Ok(load)
}

/// Simulates every feature row; output order matches input order.
pub fn simulate_rows(rows: &[FeatureRow], config: &ClimateConfig) -> Result<Vec<Sample>> {
    config.validate()?;
    let outlines: Vec<OutlineSpec> = ShapeKind::ALL
        .iter()
        .map(|&k| crate::geometry::canonical_outline(k))
        .collect();
    rows.par_iter()
        .map(|r| {
            let load = simulate_load(&outlines[r.shape.index()], &r.features, config)?;
            Sample::new(r.shape, r.features, load)
        })
        .collect()
}
