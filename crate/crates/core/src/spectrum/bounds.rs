use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::{HeatKernel, KernelMode};
use crate::error::{Error, Result};

/// Fraction of the row maximum below which kernel entries are treated as
/// numerically zero and left out of both fits.
pub const POSITIVE_FLOOR: f64 = 1e-4;

/// Smallest constants with `p ≤ c_u/√t e^{−d²/(c_u t)}` and
/// `p ≥ 1/(c_l √t) e^{−c_l d²/t}` over the kernel entries above `floor`
/// times their row maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub c_upper: f64,
    pub c_lower: f64,
    /// Kernel entries used in the fit.
    pub entries: usize,
}

/// Default small-time window: 8 log-spaced points in `[0.005, 0.1]`.
pub fn default_times() -> Vec<f64> {
    let (a, b) = (0.005f64.ln(), 0.1f64.ln());
    (0..8).map(|i| (a + (b - a) * i as f64 / 7.0).exp()).collect()
}

pub fn torus_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

#[derive(Clone, Copy)]
struct Entry {
    sqrt_t: f64,
    d2_over_t: f64,
    p: f64,
    t: f64,
    x: f64,
    y: f64,
}

fn smallest_feasible(ok: impl Fn(f64) -> bool) -> Option<f64> {
    let mut hi = 1.0;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = hi / 2.0;
    if ok(lo) {
        // Feasible below 1: search down to a small floor.
        lo = 1e-6;
        if ok(lo) {
            return Some(lo);
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

pub fn gaussian_bound_fit(kernels: &[HeatKernel], floor: f64) -> Result<GaussianFit> {
    let mut entries = Vec::new();
    for k in kernels {
        let h = k.spacing();
        let sqrt_t = k.t.sqrt();
        for (i, &row) in k.rows.iter().enumerate() {
            let x = row as f64 * h;
            let r = k.values.row(i);
            let cut = floor * r.max();
            for (j, &p) in r.iter().enumerate() {
                let y = j as f64 * h;
                let d = torus_distance(x, y);
                let e = Entry {
                    sqrt_t,
                    d2_over_t: d * d / k.t,
                    p,
                    t: k.t,
                    x,
                    y,
                };
                if p > cut {
                    entries.push(e);
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::InsufficientData("no positive kernel entries".into()));
    }
    let up_ok = |c: f64| entries.iter().all(|e| e.p <= c / e.sqrt_t * (-e.d2_over_t / c).exp());
    let low_ok = |c: f64| entries.iter().all(|e| (-c * e.d2_over_t).exp() / (c * e.sqrt_t) <= e.p);
    let violation = |es: &[Entry], bad: &dyn Fn(&Entry) -> bool| {
        let e = es.iter().find(|e| bad(e)).expect("some entry violates");
        Error::BoundViolation { t: e.t, x: e.x, y: e.y }
    };
    let c_upper = smallest_feasible(up_ok)
        .ok_or_else(|| violation(&entries, &|e| e.p > 1e12 / e.sqrt_t * (-e.d2_over_t / 1e12).exp()))?;
    let c_lower = smallest_feasible(low_ok)
        .ok_or_else(|| violation(&entries, &|e| (-1e12 * e.d2_over_t).exp() / (1e12 * e.sqrt_t) > e.p))?;
    Ok(GaussianFit {
        c_upper,
        c_lower,
        entries: entries.len(),
    })
}

/// Flat kernel `(1/2π) Σ_k e^{−tk²/2} cos(k(x−y))` of `½Δ` on the circle.
pub fn theta_kernel(t: f64, m: usize, rows: &[usize]) -> HeatKernel {
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let kmax = ((80.0 / t).sqrt() as usize).max(4);
    let profile: Vec<f64> = (0..m)
        .map(|j| {
            let z = j as f64 * h;
            let s: f64 = (1..=kmax)
                .map(|k| (-0.5 * t * (k * k) as f64).exp() * (k as f64 * z).cos())
                .sum();
            (1.0 + 2.0 * s) / (2.0 * std::f64::consts::PI)
        })
        .collect();
    let values = DMatrix::from_fn(rows.len(), m, |i, j| profile[(j + m - rows[i]) % m]);
    HeatKernel {
        t,
        mode: KernelMode::Theta,
        m,
        rows: rows.to_vec(),
        values,
        weight: vec![1.0; m],
    }
}
