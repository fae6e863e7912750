use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{FourierField, PeriodicGrid};

/// I.i.d. standard complex Gaussian coefficients `ξ_1..ξ_{K_max}` of the
/// periodic white noise; `ξ_0 = 0` and `ξ_{-k} = conj(ξ_k)`.
///
/// `ξ_k = (g_1 + i g_2)/√2` where `(g_1, g_2)` are the first two standard
/// normals of the ChaCha20 stream `(seed, k)`. The value of `ξ_k` therefore
/// does not depend on `K_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    seed: u64,
    coeffs: Vec<Complex64>,
}

pub fn noise_coefficient(seed: u64, k: u64) -> Complex64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let g1: f64 = rng.sample(StandardNormal);
    let g2: f64 = rng.sample(StandardNormal);
    Complex64::new(g1, g2) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn sample_noise(seed: u64, k_max: usize) -> Result<NoiseRealization> {
    if k_max < 1 {
        return Err(Error::Parameter("K_max must be at least 1".into()));
    }
    let coeffs = (1..=k_max as u64).map(|k| noise_coefficient(seed, k)).collect();
    Ok(NoiseRealization { seed, coeffs })
}

impl NoiseRealization {
    /// Environment with `ξ ≡ 0` (flat potential).
    pub fn flat(k_max: usize) -> Self {
        Self {
            seed: 0,
            coeffs: vec![Complex64::new(0.0, 0.0); k_max.max(1)],
        }
    }

    pub fn from_coeffs(seed: u64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parameter("K_max must be at least 1".into()));
        }
        Ok(Self { seed, coeffs })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k_max(&self) -> usize {
        self.coeffs.len()
    }

    /// `ξ_1..ξ_{K_max}`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if k == 0 || idx > self.coeffs.len() {
            return Complex64::new(0.0, 0.0);
        }
        let c = self.coeffs[idx - 1];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// The environment multiplied by `s` (`W ↦ sW`).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            seed: self.seed,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check_level(&self, n: usize, grid: PeriodicGrid) -> Result<()> {
        if n < 1 || n > self.k_max() {
            return Err(Error::Level { n, k_max: self.k_max() });
        }
        if n > grid.k() {
            return Err(Error::InvalidGrid(format!(
                "level {n} exceeds grid cutoff {}",
                grid.k()
            )));
        }
        Ok(())
    }

    /// `ξ_n = Σ_{0<|k|<=n} ξ_k e^{ikx}`.
    pub fn truncate(&self, n: usize, grid: PeriodicGrid) -> Result<FourierField> {
        self.check_level(n, grid)?;
        let mut c = vec![Complex64::new(0.0, 0.0)];
        c.extend_from_slice(&self.coeffs[..n]);
        FourierField::from_coeffs(grid, c)
    }

    /// `W_n(x) = Σ_{0<|k|<=n} ξ_k (e^{ikx} − 1)/(ik)`, so `W_n' = ξ_n` and `W_n(0) = 0`.
    pub fn potential(&self, n: usize, grid: PeriodicGrid) -> Result<FourierField> {
        Ok(potential_of(&self.truncate(n, grid)?))
    }
}

/// Antiderivative of a mean-zero field normalised to vanish at `x = 0`.
pub fn potential_of(xi: &FourierField) -> FourierField {
    let mut w = xi.map_modes(|k, c| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            c / Complex64::new(0.0, k as f64)
        }
    });
    let offset = w.eval(0.0);
    w -= &FourierField::constant(xi.grid(), offset);
    w
}

/// Oscillation `sup W − inf W` over the grid.
pub fn delta_w(w: &FourierField) -> f64 {
    let v = w.values();
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}
