use nalgebra::DVector;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::occupation::Sampled;
use crate::error::{Error, Result};
use crate::spectrum::{basis_at, interval_gram, interval_moments, Arc, SpectralDecomposition};

/// `P_x0(X_{t_1} ∈ A_{i_1}, …, X_{t_k} ∈ A_{i_k})` for every cell, cells
/// enumerated with the last time varying fastest. At most three times.
pub fn fdd_expected(dec: &SpectralDecomposition, x0: f64, times: &[f64], arcs: &[Arc]) -> Result<Vec<f64>> {
    if times.is_empty() || times.len() > 3 {
        return Err(Error::Parameter("between one and three times are supported".into()));
    }
    if times[0] <= 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("times must be positive and increasing".into()));
    }
    let grams: Vec<_> = arcs.iter().map(|&a| interval_gram(dec, a)).collect();
    let last: Vec<DVector<f64>> = arcs.iter().map(|&a| interval_moments(dec, a)).collect();
    // Row vector of the law of X_{t_1} in the real basis, as a column.
    let mut fronts = vec![dec.propagator(times[0]).transpose() * basis_at(dec.grid.k(), x0)];
    for w in times.windows(2) {
        let step = dec.propagator(w[1] - w[0]).transpose();
        fronts = fronts
            .iter()
            .flat_map(|f| grams.iter().map(|g| &step * (g * f)).collect::<Vec<_>>())
            .collect();
    }
    Ok(fronts
        .iter()
        .flat_map(|f| last.iter().map(|l| f.dot(l)).collect::<Vec<_>>())
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct FddReport {
    pub times: Vec<f64>,
    pub arcs: Vec<Arc>,
    pub n_paths: usize,
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
    /// `(p̂ − p) / √(p(1−p)/N)` per cell.
    pub z_scores: Vec<f64>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl FddReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().fold(0.0, |a: f64, z| a.max(z.abs()))
    }
}

fn cell_of(path: &[f64], records: &[usize], arcs: &[Arc]) -> Option<usize> {
    let mut cell = 0;
    for &r in records {
        let i = arcs.iter().position(|a| a.contains(path[r]))?;
        cell = cell * arcs.len() + i;
    }
    Some(cell)
}

/// Pearson chi-square of the empirical joint cell frequencies against
/// `expected` (as from [`fdd_expected`]).
pub fn fdd_check(sample: Sampled, times: &[f64], arcs: &[Arc], expected: &[f64]) -> Result<FddReport> {
    let ens = sample.base();
    let records: Vec<usize> = times.iter().map(|&t| ens.record_index(t)).collect::<Result<_>>()?;
    let cells = arcs.len().pow(times.len() as u32);
    if expected.len() != cells {
        return Err(Error::Parameter(format!(
            "expected {cells} cell probabilities, got {}",
            expected.len()
        )));
    }
    if let Some(i) = expected.iter().position(|&p| p < 1e-12) {
        return Err(Error::InsufficientData(format!("cell {i} has vanishing probability")));
    }
    let rows = sample.rows(0..ens.n_records(), |path| {
        let mut h = vec![0.0; cells];
        if let Some(c) = cell_of(path, &records, arcs) {
            h[c] = 1.0;
        }
        h
    });
    let n = rows.len() as f64;
    let mut observed = vec![0.0; cells];
    for r in &rows {
        for (o, v) in observed.iter_mut().zip(r) {
            *o += v / n;
        }
    }
    let z_scores: Vec<f64> = observed
        .iter()
        .zip(expected)
        .map(|(o, p)| (o - p) / (p * (1.0 - p) / n).sqrt())
        .collect();
    let chi_square = n * observed
        .iter()
        .zip(expected)
        .map(|(o, p)| (o - p).powi(2) / p)
        .sum::<f64>();
    let dof = cells - 1;
    let p_value = if dof == 0 {
        1.0
    } else {
        let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Solver(e.to_string()))?;
        1.0 - dist.cdf(chi_square)
    };
    Ok(FddReport {
        times: times.to_vec(),
        arcs: arcs.to_vec(),
        n_paths: rows.len(),
        observed,
        expected: expected.to_vec(),
        z_scores,
        chi_square,
        dof,
        p_value,
    })
}
