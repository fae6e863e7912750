//! Seeded probe fields for operator-norm proxies.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::spectral::{FourierField, PeriodicGrid};

/// Seeds of the shipped probe set.
pub const PROBE_SEEDS: [u64; 20] = [
    0x5eed_0001,
    0x5eed_0002,
    0x5eed_0003,
    0x5eed_0005,
    0x5eed_0008,
    0x5eed_000d,
    0x5eed_0015,
    0x5eed_0022,
    0x5eed_0037,
    0x5eed_0059,
    0x5eed_0090,
    0x5eed_00e9,
    0x5eed_0179,
    0x5eed_0262,
    0x5eed_03db,
    0x5eed_063d,
    0x5eed_0a18,
    0x5eed_1055,
    0x5eed_1a6d,
    0x5eed_2ac2,
];

/// Field with `c_0` standard normal and `c_k = k^{-decay}(g_1 + i g_2)/√2`
/// for `1 <= k <= min(K, kmax)`.
pub fn probe(grid: PeriodicGrid, seed: u64, decay: f64, kmax: usize) -> FourierField {
    let kmax = kmax.min(grid.k());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(kmax + 1);
    coeffs.push(Complex64::new(rng.sample(StandardNormal), 0.0));
    for k in 1..=kmax {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        coeffs.push(Complex64::new(re, im) * (std::f64::consts::FRAC_1_SQRT_2 * (k as f64).powf(-decay)));
    }
    FourierField::from_coeffs(grid, coeffs).expect("kmax clipped to grid")
}

/// The default probe set: `k^{-2}` decay over the full grid band.
pub fn probe_set(grid: PeriodicGrid) -> Vec<FourierField> {
    PROBE_SEEDS.iter().map(|&s| probe(grid, s, 2.0, grid.k())).collect()
}

/// Smoother probes (`k^{-decay}` up to `kmax`) for checks that need `u♯ ∈ H^2`.
pub fn smooth_probe_set(grid: PeriodicGrid, count: usize, decay: f64, kmax: usize) -> Vec<FourierField> {
    PROBE_SEEDS
        .iter()
        .take(count)
        .map(|&s| probe(grid, s, decay, kmax))
        .collect()
}
