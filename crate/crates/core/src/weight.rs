//! Spectrum of the invariant weight `e^{2W}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::fft::{analyze_full, synthesize};
use crate::spectral::FourierField;

pub const WEIGHT_TAIL: f64 = 1e-12;
const MAX_GRID: usize = 1 << 20;

/// Fourier coefficients `ŵ_0..ŵ_L` of `w = e^{2W}`, resolved so that every
/// discarded coefficient is below `1e-12 · ŵ_0`.
#[derive(Clone, Debug)]
pub struct ExpWeight {
    coeffs: Vec<Complex64>,
    tail: f64,
}

impl ExpWeight {
    /// `e^{factor·W}` with coefficients available at least up to `min_modes`.
    pub fn new(w: &FourierField, factor: f64, min_modes: usize) -> Result<Self> {
        let mut m = (4 * min_modes.max(w.kmax()) + 4).next_power_of_two().max(64);
        loop {
            let vals: Vec<f64> = w.values_on(m)?.into_iter().map(|x| (factor * x).exp()).collect();
            let full = analyze_full(&vals);
            let c0 = full[0].re;
            let tail = full[m / 4..=m / 2].iter().fold(0.0_f64, |t, c| t.max(c.norm())) / c0;
            if tail < WEIGHT_TAIL {
                let mut coeffs = full[..m / 4].to_vec();
                coeffs[0].im = 0.0;
                return Ok(Self { coeffs, tail });
            }
            if m >= MAX_GRID {
                return Err(Error::WeightTail { tail, m });
            }
            m *= 2;
        }
    }

    /// `ŵ_k` (zero beyond the resolved band).
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.coeffs.get(idx) {
            Some(&c) if k < 0 => c.conj(),
            Some(&c) => c,
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn bandwidth(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `∫_0^{2π} w dx`.
    pub fn integral(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.coeffs[0].re
    }

    /// `∫_0^{2π} g w dx` for `g` given by its full spectrum `ĝ_0..ĝ_{m/2}`.
    pub fn integrate_against(&self, g_half: &[Complex64]) -> f64 {
        let mut acc = g_half[0].re * self.coeffs[0].re;
        for (g, c) in g_half.iter().zip(&self.coeffs).skip(1) {
            acc += 2.0 * (g * c.conj()).re;
        }
        2.0 * std::f64::consts::PI * acc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Values of `w` on an `m`-point grid.
    pub fn values_on(&self, m: usize) -> Vec<f64> {
        synthesize(&self.coeffs, m)
    }

    /// Values of `w'` on an `m`-point grid.
    pub fn derivative_values_on(&self, m: usize) -> Vec<f64> {
        let d: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::new(0.0, k as f64))
            .collect();
        synthesize(&d, m)
    }

    /// Point values by spectral summation.
    pub fn eval(&self, x: f64) -> f64 {
        let step = Complex64::from_polar(1.0, x);
        let mut phase = step;
        let mut acc = 0.0;
        for c in &self.coeffs[1..] {
            acc += (c * phase).re;
            phase *= step;
        }
        self.coeffs[0].re + 2.0 * acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn flat_weight_is_one() {
        let g = PeriodicGrid::new(64, 21).unwrap();
        let w = ExpWeight::new(&FourierField::zeros(g), 2.0, 10).unwrap();
        assert!((w.coeff(0).re - 1.0).abs() < 1e-15);
        assert!(w.bandwidth() >= 10);
        assert!((w.integral() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn cosine_potential_gives_bessel_coefficients() {
        let g = PeriodicGrid::new(64, 21).unwrap();
        let w = ExpWeight::new(&FourierField::from_fn(g, f64::cos), 2.0, 4).unwrap();
        // ŵ_0 = I_0(2), ŵ_1 = I_1(2)
        assert!((w.coeff(0).re - 2.279_585_302_336_067).abs() < 1e-14);
        assert!((w.coeff(1).re - 1.590_636_854_637_329).abs() < 1e-14);
        assert!((w.eval(0.3) - (2.0 * 0.3f64.cos()).exp()).abs() < 1e-12);
    }
}
