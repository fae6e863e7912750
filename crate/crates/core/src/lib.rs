//! Spectral construction of the Brox diffusion generator `½Δ + W'·∇` on the
//! circle, with `W` a periodic Brownian environment.

pub mod diffusion;
mod error;
pub mod generator;
pub mod linalg;
pub mod noise;
mod par;
pub mod paracontrolled;
pub mod probes;
pub mod spectral;
pub mod spectrum;
pub mod stats;
pub mod weight;

pub use error::{Error, Result};
