//! Synthetic office-building samples over four plan outlines, a steady-state
//! thermal-load model, and the analysis chain built on top of it: per-shape
//! load statistics, PCA of the feature space, and polynomial surrogates
//! scored by R².

pub mod analysis;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod numerics;
pub mod oracle;
pub mod pipeline;
pub mod sampler;
pub mod surrogate;
pub mod svg;

pub use error::{Error, Result};
