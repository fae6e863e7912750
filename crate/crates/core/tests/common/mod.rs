#![allow(dead_code)]

use brox_core::spectral::{block_of, FourierField, PeriodicGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Field with i.i.d. normal coefficients scaled by `(1+k)^{-decay}`.
pub fn random_field(grid: PeriodicGrid, seed: u64, decay: f64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = vec![Complex64::new(rng.random_range(-1.0..1.0), 0.0)];
    for k in 1..=grid.k() {
        let s = (1.0 + k as f64).powf(-decay);
        c.push(Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * s);
    }
    FourierField::from_coeffs(grid, c).unwrap()
}

fn full(f: &FourierField, k: i64) -> Complex64 {
    if k.unsigned_abs() as usize > f.kmax() {
        Complex64::new(0.0, 0.0)
    } else {
        f.coeff(k)
    }
}

/// `Σ_{j+l=k} a(j, l) f_j g_l` for `0 <= k <= K`, by direct double sum.
pub fn convolve_with(f: &FourierField, g: &FourierField, keep: impl Fn(i64, i64) -> bool) -> Vec<Complex64> {
    let kk = f.kmax() as i64;
    (0..=kk)
        .map(|k| {
            let mut s = Complex64::new(0.0, 0.0);
            for j in -kk..=kk {
                let l = k - j;
                if l.abs() <= kk && keep(j, l) {
                    s += full(f, j) * full(g, l);
                }
            }
            s
        })
        .collect()
}

pub fn block(k: i64) -> i32 {
    block_of(k.unsigned_abs() as usize)
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
