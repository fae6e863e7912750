use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

/// Real periodic function (or distribution) on `[0, 2π)` stored through its
/// Fourier coefficients `c_k`, `|k| <= K`, with `c_{-k} = conj(c_k)`.
///
/// Only the non-negative half `c_0..c_K` is stored, so Hermitian symmetry
/// holds by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    grid: PeriodicGrid,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.k() + 1],
        }
    }

    pub fn constant(grid: PeriodicGrid, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// `amplitude · e^{ikx} + conj(amplitude) · e^{-ikx}` (or `Re(amplitude)` for `k = 0`).
    pub fn mode(grid: PeriodicGrid, k: usize, amplitude: Complex64) -> Result<Self> {
        if k > grid.k() {
            return Err(Error::Parameter(format!("mode {k} exceeds grid cutoff {}", grid.k())));
        }
        let mut f = Self::zeros(grid);
        f.coeffs[k] = amplitude;
        f.coeffs[0].im = 0.0;
        Ok(f)
    }

    /// Coefficients `c_0..c_n` with `n <= K`; missing modes are zero and the
    /// imaginary part of `c_0` is dropped.
    pub fn from_coeffs(grid: PeriodicGrid, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > grid.k() + 1 {
            return Err(Error::Parameter(format!(
                "expected 1..={} coefficients, got {}",
                grid.k() + 1,
                coeffs.len()
            )));
        }
        coeffs.resize(grid.k() + 1, Complex64::new(0.0, 0.0));
        coeffs[0].im = 0.0;
        Ok(Self { grid, coeffs })
    }

    /// Projection of grid values onto the retained modes.
    pub fn from_values(grid: PeriodicGrid, values: &[f64]) -> Result<Self> {
        if values.len() != grid.m() {
            return Err(Error::Parameter(format!(
                "expected {} grid values, got {}",
                grid.m(),
                values.len()
            )));
        }
        Ok(Self {
            grid,
            coeffs: fft::analyze(values, grid.k()),
        })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.points().into_iter().map(f).collect();
        Self {
            grid,
            coeffs: fft::analyze(&values, grid.k()),
        }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn kmax(&self) -> usize {
        self.grid.k()
    }

    /// Non-negative half of the spectrum, `c_0..c_K`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx > self.grid.k() {
            return Complex64::new(0.0, 0.0);
        }
        if k < 0 {
            self.coeffs[idx].conj()
        } else {
            self.coeffs[idx]
        }
    }

    pub fn values(&self) -> Vec<f64> {
        fft::synthesize(&self.coeffs, self.grid.m())
    }

    /// Point values on a finer equispaced grid of `m` points (zero padding).
    pub fn values_on(&self, m: usize) -> Result<Vec<f64>> {
        if !m.is_power_of_two() || m <= 2 * self.grid.k() {
            return Err(Error::InvalidGrid(format!(
                "cannot resolve K = {} on {m} points",
                self.grid.k()
            )));
        }
        Ok(fft::synthesize(&self.coeffs, m))
    }

    /// Spectral interpolation at an arbitrary real point (periodic extension).
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

    /// Applies `c_k ↦ f(k, c_k)` to the stored half; the result is Hermitian
    /// because the map is only defined on `k >= 0`.
    pub(crate) fn map_modes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        let mut coeffs: Vec<Complex64> = self.coeffs.iter().enumerate().map(|(k, &c)| f(k, c)).collect();
        coeffs[0].im = 0.0;
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn laplacian(&self) -> Self {
        self.map_modes(|k, c| c * -((k * k) as f64))
    }

    pub fn gradient(&self) -> Self {
        self.map_modes(|k, c| c * Complex64::new(0.0, k as f64))
    }

    /// Heat semigroup `e^{tΔ}`.
    pub fn heat(&self, t: f64) -> Self {
        self.map_modes(|k, c| c * (-t * (k * k) as f64).exp())
    }

    /// Keeps `|k| <= n`.
    pub fn truncated(&self, n: usize) -> Self {
        self.map_modes(|k, c| if k <= n { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Keeps `|k| > n`.
    pub fn high_pass(&self, n: usize) -> Self {
        self.map_modes(|k, c| if k > n { c } else { Complex64::new(0.0, 0.0) })
    }

    /// Re-embeds the coefficients on another grid, truncating if needed.
    pub fn regrid(&self, grid: PeriodicGrid) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.k() + 1];
        let n = coeffs.len().min(self.coeffs.len());
        coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        Self { grid, coeffs }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_modes(|_, c| c * s)
    }

    pub fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                m1: self.grid.m(),
                k1: self.grid.k(),
                m2: other.grid.m(),
                k2: other.grid.k(),
            });
        }
        Ok(())
    }

    /// Dealiased product: grid multiplication truncated back to `|k| <= K`.
    /// Equals the exact convolution of the two spectra restricted to `|k| <= K`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let a = self.values();
        let b = other.values();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self {
            grid: self.grid,
            coeffs: fft::analyze(&prod, self.grid.k()),
        })
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `∫_0^{2π} f g dx`.
    pub fn inner(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut acc = self.coeffs[0].re * other.coeffs[0].re;
        for k in 1..n {
            acc += 2.0 * (self.coeffs[k] * other.coeffs[k].conj()).re;
        }
        2.0 * PI * acc
    }

    /// `(∫_0^{2π} |f|^2 dx)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `(2π Σ_k (1 + k^2)^β |c_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, beta: f64) -> f64 {
        let mut acc = self.coeffs[0].norm_sqr();
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += 2.0 * (1.0 + (k * k) as f64).powf(beta) * c.norm_sqr();
        }
        (2.0 * PI * acc).sqrt()
    }

    /// Maximum modulus over the grid points.
    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len()) as i64;
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Real coordinates `[Re c_0, Re c_1, Im c_1, …, Re c_K, Im c_K]`.
    pub fn to_real_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.grid.k() + 1);
        v.push(self.coeffs[0].re);
        for c in &self.coeffs[1..] {
            v.push(c.re);
            v.push(c.im);
        }
        v
    }

    pub fn from_real_vec(grid: PeriodicGrid, v: &[f64]) -> Result<Self> {
        if v.len() != 2 * grid.k() + 1 {
            return Err(Error::Parameter(format!(
                "expected {} real coordinates, got {}",
                2 * grid.k() + 1,
                v.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(grid.k() + 1);
        coeffs.push(Complex64::new(v[0], 0.0));
        for pair in v[1..].chunks(2) {
            coeffs.push(Complex64::new(pair[0], pair[1]));
        }
        Ok(Self { grid, coeffs })
    }
}

fn zip_coeffs(a: &FourierField, b: &FourierField, f: impl Fn(Complex64, Complex64) -> Complex64) -> FourierField {
    assert_eq!(a.grid, b.grid, "field arithmetic on different grids");
    FourierField {
        grid: a.grid,
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &FourierField {
    type Output = FourierField;
    fn add(self, rhs: Self) -> FourierField {
        zip_coeffs(self, rhs, |x, y| x + y)
    }
}

impl Sub for &FourierField {
    type Output = FourierField;
    fn sub(self, rhs: Self) -> FourierField {
        zip_coeffs(self, rhs, |x, y| x - y)
    }
}

impl Add for FourierField {
    type Output = FourierField;
    fn add(self, rhs: Self) -> FourierField {
        &self + &rhs
    }
}

impl Sub for FourierField {
    type Output = FourierField;
    fn sub(self, rhs: Self) -> FourierField {
        &self - &rhs
    }
}

impl AddAssign<&FourierField> for FourierField {
    fn add_assign(&mut self, rhs: &FourierField) {
        assert_eq!(self.grid, rhs.grid, "field arithmetic on different grids");
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(x, y)| *x += y);
    }
}

impl SubAssign<&FourierField> for FourierField {
    fn sub_assign(&mut self, rhs: &FourierField) {
        assert_eq!(self.grid, rhs.grid, "field arithmetic on different grids");
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(x, y)| *x -= y);
    }
}

impl Neg for &FourierField {
    type Output = FourierField;
    fn neg(self) -> FourierField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &FourierField {
    type Output = FourierField;
    fn mul(self, rhs: f64) -> FourierField {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::new(64, 21).unwrap()
    }

    #[test]
    fn cosine_round_trip() {
        let f = FourierField::from_fn(grid(), |x| (3.0 * x).cos());
        assert!((f.coeff(3).re - 0.5).abs() < 1e-15);
        assert!((f.coeff(-3).re - 0.5).abs() < 1e-15);
        let v = f.values();
        for (j, x) in grid().points().into_iter().enumerate() {
            assert!((v[j] - (3.0 * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_cosine_is_minus_sine() {
        let f = FourierField::from_fn(grid(), f64::cos);
        let g = f.gradient().values();
        for (j, x) in grid().points().into_iter().enumerate() {
            assert!((g[j] + x.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn norms_of_constant() {
        let one = FourierField::constant(grid(), 1.0);
        assert!((one.l2_norm() - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!((one.sobolev_norm(2.0) - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!((one.sup_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_matches_grid_values() {
        let f = FourierField::from_fn(grid(), |x| (x.sin() * 2.0).exp());
        let v = f.values();
        for j in [0, 5, 17, 63] {
            assert!((f.eval(grid().point(j)) - v[j]).abs() < 1e-12);
        }
        assert!((f.eval(2.0 * PI + 0.3) - f.eval(0.3)).abs() < 1e-12);
    }

    #[test]
    fn real_vec_round_trip() {
        let f = FourierField::from_fn(grid(), |x| x.cos() + 0.3 * (2.0 * x).sin());
        let back = FourierField::from_real_vec(grid(), &f.to_real_vec()).unwrap();
        assert_eq!(f, back);
    }

    #[test]
    fn mismatched_product_fails() {
        let a = FourierField::constant(grid(), 1.0);
        let b = FourierField::constant(PeriodicGrid::new(128, 21).unwrap(), 1.0);
        assert!(matches!(a.mul(&b), Err(Error::GridMismatch { .. })));
    }
}
