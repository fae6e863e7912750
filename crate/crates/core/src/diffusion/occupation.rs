use serde::Serialize;

use super::path::PathEnsemble;
use crate::error::{Error, Result};
use crate::stats::{bootstrap_rows, circle_bin, ks_binned, sample_sd, total_variation};

/// Distance of a wrapped histogram to a reference law, with the bootstrap
/// distribution of the same distance under resampling of paths.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub samples: usize,
    pub bins: usize,
    pub tv: f64,
    pub ks: f64,
    /// Mean and spread of `TV(resampled, estimate)`.
    pub floor_mean: f64,
    pub floor_sd: f64,
    pub histogram: Vec<f64>,
    pub reference: Vec<f64>,
}

impl DistanceReport {
    /// `(tv − floor_mean) / floor_sd`.
    pub fn excess(&self) -> f64 {
        (self.tv - self.floor_mean) / self.floor_sd
    }

    /// The observed distance is within `k` bootstrap standard errors of the
    /// sampling floor.
    pub fn within(&self, k: f64) -> bool {
        self.tv <= self.floor_mean + k * self.floor_sd
    }
}

/// Compares the mean of per-path histograms with `reference`, bootstrapping
/// over paths.
pub fn compare_histograms(rows: &[Vec<f64>], reference: &[f64], reps: usize, seed: u64) -> Result<DistanceReport> {
    let bins = reference.len();
    if rows.len() < 2 {
        return Err(Error::InsufficientData("at least two paths are required".into()));
    }
    let mean_of = |pick: &[&Vec<f64>]| -> Vec<f64> {
        let mut h = vec![0.0; bins];
        for r in pick {
            for (a, b) in h.iter_mut().zip(r.iter()) {
                *a += b;
            }
        }
        h.iter_mut().for_each(|a| *a /= pick.len() as f64);
        h
    };
    let all: Vec<&Vec<f64>> = rows.iter().collect();
    let hist = mean_of(&all);
    let boot = bootstrap_rows(rows, reps, seed, |pick| total_variation(&mean_of(pick), &hist));
    let floor_mean = boot.iter().sum::<f64>() / boot.len() as f64;
    Ok(DistanceReport {
        samples: rows.len(),
        bins,
        tv: total_variation(&hist, reference),
        ks: ks_binned(&hist, reference),
        floor_mean,
        floor_sd: sample_sd(&boot),
        histogram: hist,
        reference: reference.to_vec(),
    })
}

/// A single ensemble, or a coupled `(dt, dt/2)` pair whose statistics are
/// combined as `2·fine − coarse` to cancel the first-order step bias.
#[derive(Clone, Copy, Debug)]
pub enum Sampled<'a> {
    Single(&'a PathEnsemble),
    Coupled {
        coarse: &'a PathEnsemble,
        fine: &'a PathEnsemble,
    },
}

impl<'a> Sampled<'a> {
    pub fn coupled(coarse: &'a PathEnsemble, fine: &'a PathEnsemble) -> Result<Self> {
        if coarse.n_paths() != fine.n_paths() || coarse.times() != fine.times() {
            return Err(Error::Parameter(
                "coupled ensembles must share paths and record times".into(),
            ));
        }
        Ok(Self::Coupled { coarse, fine })
    }

    /// The ensemble defining record times and path count.
    pub fn base(&self) -> &'a PathEnsemble {
        match *self {
            Self::Single(e) => e,
            Self::Coupled { coarse, .. } => coarse,
        }
    }

    /// Per-path values of `f` on the records in `range`, extrapolated for a pair.
    pub fn rows(&self, range: std::ops::Range<usize>, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
        match *self {
            Self::Single(e) => (0..e.n_paths()).map(|i| f(&e.path(i)[range.clone()])).collect(),
            Self::Coupled { coarse, fine } => (0..coarse.n_paths())
                .map(|i| {
                    let c = f(&coarse.path(i)[range.clone()]);
                    let g = f(&fine.path(i)[range.clone()]);
                    c.iter().zip(&g).map(|(a, b)| 2.0 * b - a).collect()
                })
                .collect(),
        }
    }

    /// Per-path normalised histograms over the records in `range`.
    pub fn histograms(&self, range: std::ops::Range<usize>, bins: usize) -> Vec<Vec<f64>> {
        self.rows(range, |xs| {
            let mut h = vec![0.0; bins];
            for &x in xs {
                h[circle_bin(x, bins)] += 1.0 / xs.len() as f64;
            }
            h
        })
    }
}

/// Occupation histogram after `burn_in` against the binned invariant law
/// `mu_bins`, bootstrapped over paths.
pub fn occupation_vs_mu(
    sample: Sampled,
    burn_in: f64,
    mu_bins: &[f64],
    reps: usize,
    seed: u64,
) -> Result<DistanceReport> {
    let ens = sample.base();
    let start = (burn_in / ens.record_dt()).ceil() as usize;
    if start >= ens.n_records() {
        return Err(Error::InsufficientData(format!(
            "burn-in {burn_in} leaves no samples before T = {}",
            ens.spec.t_end
        )));
    }
    let range = start..ens.n_records();
    let rows = sample.histograms(range.clone(), mu_bins.len());
    let mut rep = compare_histograms(&rows, mu_bins, reps, seed)?;
    rep.samples = range.len() * ens.n_paths();
    Ok(rep)
}
