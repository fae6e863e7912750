use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use super::occupation::{compare_histograms, Sampled};
use crate::error::{Error, Result};
use crate::linalg::linear_fit;
use crate::spectrum::{basis_at, mu_probabilities, occupation_probabilities, Arc, SpectralDecomposition};
use crate::stats::{bootstrap_rows, sample_sd, total_variation};

/// Least-squares fit `TV(t) ≈ C e^{rate·t}`.
#[derive(Clone, Debug, Serialize)]
pub struct MixingFit {
    pub c: f64,
    pub rate: f64,
    pub lambda2: f64,
    /// `|rate − λ_2| / |λ_2|`.
    pub relative_error: f64,
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
}

/// Fits `log tv = log C + rate·t`.
pub fn fit_exponential(times: &[f64], tv: &[f64]) -> Result<(f64, f64)> {
    let span =
        times.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - times.iter().cloned().fold(f64::INFINITY, f64::min);
    if times.len() < 3 || span.is_nan() || span <= 0.0 || tv.iter().any(|v| *v <= 0.0) {
        return Err(Error::InsufficientData("degenerate fit window".into()));
    }
    let logs: Vec<f64> = tv.iter().map(|v| v.ln()).collect();
    let (a, b) = linear_fit(times, &logs);
    Ok((a.exp(), b))
}

/// Grid point maximising `|e_2|`, where the second mode dominates the decay.
pub fn mixing_start(dec: &SpectralDecomposition, m: usize) -> Result<f64> {
    let e2 = dec.eigenfunction(1).values_on(m)?;
    let j = (0..m).max_by(|&a, &b| e2[a].abs().total_cmp(&e2[b].abs())).unwrap_or(0);
    Ok(2.0 * std::f64::consts::PI * j as f64 / m as f64)
}

/// `TV(p_t(x0, ·), μ)` by quadrature on an `m`-point grid.
pub fn tv_decay_kernel(dec: &SpectralDecomposition, x0: f64, times: &[f64], m: usize) -> Result<Vec<f64>> {
    let e = dec.eigenfunction_values(m)?;
    let w = dec.weight.values_on(m);
    let at = dec.vectors.transpose() * basis_at(dec.grid.k(), x0);
    let h = 2.0 * std::f64::consts::PI / m as f64;
    Ok(times
        .iter()
        .map(|&t| {
            let mut coef = at.clone();
            coef[0] = 0.0;
            for (c, l) in coef.iter_mut().zip(&dec.eigenvalues).skip(1) {
                *c *= (t * l).exp();
            }
            let diff = &e * coef;
            0.5 * h * diff.iter().zip(&w).map(|(d, w)| (d * w).abs()).sum::<f64>()
        })
        .collect())
}

/// Kernel route: fit over `t ∈ [4, 10]/|λ_2|` from the point [`mixing_start`].
pub fn mixing_rate_kernel(dec: &SpectralDecomposition, m: usize) -> Result<MixingFit> {
    let lambda2 = dec.eigenvalues[1];
    if lambda2 >= 0.0 {
        return Err(Error::Solver("no spectral gap".into()));
    }
    let x0 = mixing_start(dec, m)?;
    let times: Vec<f64> = (0..13).map(|i| (4.0 + i as f64 / 2.0) / lambda2.abs()).collect();
    let tv = tv_decay_kernel(dec, x0, &times, m)?;
    let (c, rate) = fit_exponential(&times, &tv)?;
    Ok(MixingFit {
        c,
        rate,
        lambda2,
        relative_error: (rate - lambda2).abs() / lambda2.abs(),
        times,
        tv,
    })
}

/// One time of the Monte Carlo route.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct McMixingRow {
    pub t: f64,
    /// Histogram against the binned invariant law.
    pub tv_mc: f64,
    /// Binned kernel row against the binned invariant law.
    pub tv_kernel: f64,
    /// Histogram against the binned kernel row, with its bootstrap floor.
    pub tv_to_kernel: f64,
    pub floor_mean: f64,
    pub floor_sd: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct McMixingReport {
    pub bins: usize,
    pub rows: Vec<McMixingRow>,
    pub rate_mc: f64,
    pub rate_sd: f64,
    pub rate_kernel: f64,
}

impl McMixingReport {
    /// The fitted rates agree within `k` bootstrap deviations, and every
    /// histogram is within its bootstrap band around the kernel law, the band
    /// widened so that the family of times has the two-sided level of `k`.
    pub fn consistent(&self, k: f64) -> bool {
        let normal = Normal::standard();
        let level = 2.0 * (1.0 - normal.cdf(k));
        let kb = normal.inverse_cdf(1.0 - level / (2.0 * self.rows.len() as f64));
        self.rows
            .iter()
            .all(|r| r.tv_to_kernel <= r.floor_mean + kb * r.floor_sd)
            && (self.rate_mc - self.rate_kernel).abs() <= k * self.rate_sd
    }
}

/// Monte Carlo route over the record times in `[t_lo, t_hi]`: binned laws of
/// `X_t` started at `spec.x0`, compared with the binned kernel rows.
pub fn mixing_rate_mc(
    sample: Sampled,
    dec: &SpectralDecomposition,
    bins: usize,
    t_lo: f64,
    t_hi: f64,
    reps: usize,
    seed: u64,
) -> Result<McMixingReport> {
    let ens = sample.base();
    let x0 = ens.spec.x0;
    let arcs = Arc::bins(bins);
    let mu = mu_probabilities(&dec.weight, &arcs);
    let records: Vec<usize> = (0..ens.n_records())
        .filter(|&r| {
            let t = r as f64 * ens.record_dt();
            t >= t_lo - 1e-12 && t <= t_hi + 1e-12 && t > 0.0
        })
        .collect();
    if records.len() < 3 {
        return Err(Error::InsufficientData(
            "fewer than three record times in the window".into(),
        ));
    }
    let mut rows = Vec::with_capacity(records.len());
    let mut per_time = Vec::with_capacity(records.len());
    let mut times = Vec::with_capacity(records.len());
    for (i, &r) in records.iter().enumerate() {
        let t = r as f64 * ens.record_dt();
        let kernel = occupation_probabilities(dec, t, x0, &arcs);
        let hist_rows = sample.histograms(r..r + 1, bins);
        let rep = compare_histograms(&hist_rows, &kernel, reps, seed.wrapping_add(i as u64))?;
        rows.push(McMixingRow {
            t,
            tv_mc: total_variation(&rep.histogram, &mu),
            tv_kernel: total_variation(&kernel, &mu),
            tv_to_kernel: rep.tv,
            floor_mean: rep.floor_mean,
            floor_sd: rep.floor_sd,
        });
        per_time.push(hist_rows);
        times.push(t);
    }
    let tv_mc: Vec<f64> = rows.iter().map(|r| r.tv_mc).collect();
    let tv_kernel: Vec<f64> = rows.iter().map(|r| r.tv_kernel).collect();
    let (_, rate_mc) = fit_exponential(&times, &tv_mc)?;
    let (_, rate_kernel) = fit_exponential(&times, &tv_kernel)?;
    // Bootstrap the fitted rate by resampling whole paths.
    let path_ids: Vec<usize> = (0..ens.n_paths()).collect();
    let boot = bootstrap_rows(&path_ids, reps, seed ^ 0x6d69_7869, |pick| {
        let tv: Vec<f64> = per_time
            .iter()
            .map(|rows_t| {
                let mut h = vec![0.0; bins];
                for &&i in pick {
                    for (a, b) in h.iter_mut().zip(&rows_t[i]) {
                        *a += b;
                    }
                }
                h.iter_mut().for_each(|a| *a /= pick.len() as f64);
                total_variation(&h, &mu).max(f64::MIN_POSITIVE)
            })
            .collect();
        fit_exponential(&times, &tv).map(|f| f.1).unwrap_or(f64::NAN)
    });
    let finite: Vec<f64> = boot.into_iter().filter(|r| r.is_finite()).collect();
    Ok(McMixingReport {
        bins,
        rows,
        rate_mc,
        rate_sd: sample_sd(&finite),
        rate_kernel,
    })
}
