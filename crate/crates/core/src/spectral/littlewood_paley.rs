use num_complex::Complex64;

use super::field::FourierField;

/// Dyadic block containing wavenumber `|k|`: `-1` for `|k| <= 1`, otherwise the
/// `j` with `2^j < |k| <= 2^{j+1}`.
pub fn block_of(k: usize) -> i32 {
    if k <= 1 {
        -1
    } else {
        (usize::BITS - 1 - (k - 1).leading_zeros()) as i32
    }
}

/// Last non-empty block for cutoff `K`.
pub fn max_block(kmax: usize) -> i32 {
    block_of(kmax)
}

fn block_range(j: i32) -> (usize, usize) {
    if j < 0 {
        (0, 1)
    } else {
        ((1usize << j) + 1, 1usize << (j + 1))
    }
}

/// Sharp projection `Δ_j f`.
pub fn lp_block(f: &FourierField, j: i32) -> FourierField {
    let (lo, hi) = block_range(j.max(-1));
    let keep = j >= -1;
    f.map_modes(|k, c| {
        if keep && k >= lo && k <= hi {
            c
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `S_j f = Σ_{i <= j} Δ_i f`; zero for `j < -1`.
pub fn low_pass(f: &FourierField, j: i32) -> FourierField {
    let hi = if j < -1 { None } else { Some(block_range(j).1) };
    f.map_modes(|k, c| match hi {
        Some(hi) if k <= hi => c,
        _ => Complex64::new(0.0, 0.0),
    })
}

/// All blocks `Δ_{-1} f, …, Δ_J f`; index `i` holds block `i - 1`.
pub fn blocks(f: &FourierField) -> Vec<FourierField> {
    (-1..=max_block(f.kmax())).map(|j| lp_block(f, j)).collect()
}
