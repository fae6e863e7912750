use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equispaced discretisation of the circle `[0, 2π)`.
///
/// `m` grid points carry fields whose Fourier modes are restricted to
/// `|k| <= k`. The bound `3k < m` keeps every quadratic product alias-free
/// once it is truncated back to `|k| <= k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PeriodicGrid {
    m: usize,
    k: usize,
}

impl PeriodicGrid {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if !m.is_power_of_two() || m < 4 {
            return Err(Error::InvalidGrid(format!("grid size {m} must be a power of two >= 4")));
        }
        if k < 1 || 3 * k >= m {
            return Err(Error::InvalidGrid(format!(
                "max wavenumber {k} must satisfy 1 <= K <= M/3 for M = {m}"
            )));
        }
        Ok(Self { m, k })
    }

    /// Grid of size `m` with the largest dealiased wavenumber.
    pub fn dealiased(m: usize) -> Result<Self> {
        Self::new(m, m / 3)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.m as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.point(j)).collect()
    }
}
