use serde::Serialize;

use super::path::PathEnsemble;
use crate::error::{Error, Result};
use crate::linalg::linear_fit;

#[derive(Clone, Debug, Serialize)]
pub struct HolderFit {
    /// Half the log-log slope of the mean squared increment.
    pub exponent: f64,
    pub intercept: f64,
    pub lags: Vec<f64>,
    pub msd: Vec<f64>,
}

/// `E|X_{t+h} − X_t|²` averaged over paths and start times, for a lag of
/// `lag` records.
pub fn mean_squared_increment(ens: &PathEnsemble, lag: usize) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for i in 0..ens.n_paths() {
        let p = ens.path(i);
        for w in 0..p.len().saturating_sub(lag) {
            acc += (p[w + lag] - p[w]).powi(2);
            count += 1;
        }
    }
    acc / count as f64
}

/// Regression of `log E|X_{t+h} − X_t|²` on `log h` over about a dozen
/// log-spaced lags in `[h_min, h_max]`.
pub fn holder_exponent_window(ens: &PathEnsemble, h_min: f64, h_max: f64) -> Result<HolderFit> {
    let rdt = ens.record_dt();
    let lo = (h_min / rdt - 1e-9).ceil().max(1.0) as usize;
    let hi = ((h_max / rdt + 1e-9).floor() as usize).min(ens.n_records().saturating_sub(1));
    if hi < 2 * lo {
        return Err(Error::InsufficientData(format!(
            "lag window [{h_min}, {h_max}] spans less than a factor 2 at record step {rdt}"
        )));
    }
    let mut lags: Vec<usize> = (0..12)
        .map(|i| {
            let f = i as f64 / 11.0;
            ((lo as f64).ln() * (1.0 - f) + (hi as f64).ln() * f).exp().round() as usize
        })
        .collect();
    lags.dedup();
    let h: Vec<f64> = lags.iter().map(|&l| l as f64 * rdt).collect();
    let msd: Vec<f64> = lags.iter().map(|&l| mean_squared_increment(ens, l)).collect();
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = msd.iter().map(|v| v.ln()).collect();
    let (a, b) = linear_fit(&lx, &ly);
    Ok(HolderFit {
        exponent: 0.5 * b,
        intercept: a,
        lags: h,
        msd,
    })
}

/// Default window `h ∈ [4dt, T/100]`.
pub fn holder_exponent(ens: &PathEnsemble) -> Result<HolderFit> {
    if ens.n_paths() < 2 {
        return Err(Error::InsufficientData("need several paths".into()));
    }
    holder_exponent_window(ens, 4.0 * ens.spec.dt, ens.spec.t_end / 100.0)
}
