use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(m: usize) -> Plans {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
            })
            .clone()
    })
}

/// Point values on an `m`-point grid of `Σ_{|k|<=K} c_k e^{ikx}` from the
/// non-negative half `c_0..c_K` of a Hermitian spectrum. Modes beyond the
/// Nyquist band are folded onto their grid aliases.
pub(crate) fn synthesize(coeffs: &[Complex64], m: usize) -> Vec<f64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    buf[0] = Complex64::new(coeffs[0].re, 0.0);
    for (k, &c) in coeffs.iter().enumerate().skip(1) {
        buf[k % m] += c;
        buf[(m - k % m) % m] += c.conj();
    }
    plans(m).1.process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Full complex spectrum `(1/m) Σ_j f_j e^{-2πijk/m}` of grid values.
pub(crate) fn analyze_full(values: &[f64]) -> Vec<Complex64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans(m).0.process(&mut buf);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Modes `0..=kmax` of grid values.
pub(crate) fn analyze(values: &[f64], kmax: usize) -> Vec<Complex64> {
    let mut full = analyze_full(values);
    full.truncate(kmax + 1);
    full[0].im = 0.0;
    full
}
