//! Browser bindings for three operations on one sampled environment:
//! the potential with its invariant density, the leading eigenvalues, and
//! a heat-kernel row. Everything lives on a fixed 256-point grid.

use brox_core::noise::{sample_noise, EnhancedNoise};
use brox_core::spectral::PeriodicGrid;
use brox_core::spectrum::{heat_kernel_eigen, invariant_measure, spectrum_of, SpectralDecomposition};
use wasm_bindgen::prelude::*;

pub const POINTS: usize = 256;
pub const MAX_LEVEL: usize = 32;
const ALPHA: f64 = 1.45;

/// A noise sample cut at `level`, with its spectral decomposition.
#[wasm_bindgen]
pub struct Environment {
    xi: EnhancedNoise,
    dec: SpectralDecomposition,
}

impl Environment {
    pub fn build(seed: u64, level: usize, amplitude: f64) -> Result<Self, String> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(format!("level {level} must lie in 1..={MAX_LEVEL}"));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(format!("amplitude {amplitude} must be finite and nonnegative"));
        }
        let run = || -> brox_core::Result<Self> {
            let grid = PeriodicGrid::new(POINTS, POINTS / 3)?;
            let noise = sample_noise(seed, level)?.scaled(amplitude);
            let xi = EnhancedNoise::enhance(&noise, level, ALPHA, grid)?;
            let dec = spectrum_of(&xi)?;
            Ok(Self { xi, dec })
        };
        run().map_err(|e| e.to_string())
    }

    pub fn potential_values(&self) -> Vec<f64> {
        self.xi.potential().values()
    }

    pub fn density_values(&self) -> Result<Vec<f64>, String> {
        invariant_measure(self.xi.xi(), self.xi.potential(), POINTS)
            .map(|mu| mu.density)
            .map_err(|e| e.to_string())
    }

    pub fn leading_eigenvalues(&self, count: usize) -> Vec<f64> {
        self.dec.eigenvalues.iter().take(count).copied().collect()
    }

    /// `p_t(x_i, ·)` with `x_i = 2πi/256`, as a density in `y`.
    pub fn kernel_values(&self, t: f64, row: usize) -> Result<Vec<f64>, String> {
        if row >= POINTS {
            return Err(format!("row {row} must be below {POINTS}"));
        }
        let k = heat_kernel_eigen(&self.dec, t, POINTS, &[row]).map_err(|e| e.to_string())?;
        Ok(k.values.row(0).iter().copied().collect())
    }
}

#[wasm_bindgen]
impl Environment {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, level: usize, amplitude: f64) -> Result<Environment, JsError> {
        Self::build(seed as u64, level, amplitude).map_err(|e| JsError::new(&e))
    }

    pub fn potential(&self) -> Vec<f64> {
        self.potential_values()
    }

    pub fn density(&self) -> Result<Vec<f64>, JsError> {
        self.density_values().map_err(|e| JsError::new(&e))
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        self.leading_eigenvalues(count)
    }

    pub fn gap(&self) -> f64 {
        self.dec.gap()
    }

    pub fn kernel_row(&self, t: f64, row: usize) -> Result<Vec<f64>, JsError> {
        self.kernel_values(t, row).map_err(|e| JsError::new(&e))
    }
}
