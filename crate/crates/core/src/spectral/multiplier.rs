use num_complex::Complex64;

use super::field::FourierField;
use crate::error::{Error, Result};

/// Applies the Fourier multiplier `m`, checking `m(-k) = conj(m(k))` on every
/// retained wavenumber so that the output stays real.
pub fn apply_multiplier(f: &FourierField, m: impl Fn(i64) -> Complex64) -> Result<FourierField> {
    for k in 0..=f.kmax() as i64 {
        let pos = m(k);
        let neg = m(-k);
        let scale = pos.norm().max(1.0);
        if (neg - pos.conj()).norm() > 1e-14 * scale {
            return Err(Error::SymmetryViolation {
                k,
                lhs: format!("{neg}"),
                rhs: format!("{}", pos.conj()),
            });
        }
    }
    Ok(f.map_modes(|k, c| m(k as i64) * c))
}

pub fn laplacian_symbol(k: i64) -> Complex64 {
    Complex64::new(-((k * k) as f64), 0.0)
}

pub fn gradient_symbol(k: i64) -> Complex64 {
    Complex64::new(0.0, k as f64)
}

pub fn heat_symbol(t: f64) -> impl Fn(i64) -> Complex64 {
    move |k| Complex64::new((-t * (k * k) as f64).exp(), 0.0)
}

/// `G(k) = -(1 - e^{-k²})/k²`, `G(0) = -1`.
pub fn parametrix_symbol(k: i64) -> f64 {
    if k == 0 {
        -1.0
    } else {
        let k2 = (k * k) as f64;
        (-k2).exp_m1() / k2
    }
}

/// Parametrix `Δ⁻¹` with `Δ Δ⁻¹ = Id − e^Δ`.
pub fn parametrix_inverse(f: &FourierField) -> FourierField {
    let out = f.map_modes(|k, c| c * parametrix_symbol(k as i64));
    #[cfg(debug_assertions)]
    {
        let defect = &(&out.laplacian() + &f.heat(1.0)) - f;
        let scale = f.coeffs().iter().fold(1.0_f64, |m, c| m.max(c.norm()));
        debug_assert!(
            defect.coeffs().iter().all(|c| c.norm() <= 1e-13 * scale),
            "parametrix identity violated"
        );
    }
    out
}
