use num_complex::Complex64;

/// `∫_a^b f` for the real trigonometric polynomial with half spectrum
/// `c_0..c_D` (`c_{−k} = conj c_k`), by its exact antiderivative.
pub fn interval_integral(coeffs: &[Complex64], a: f64, b: f64) -> f64 {
    let mut acc = coeffs[0].re * (b - a);
    let (sa, sb) = (Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b));
    let (mut pa, mut pb) = (sa, sb);
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        acc += 2.0 * (c * (pb - pa) / Complex64::new(0.0, k as f64)).re;
        pa *= sa;
        pb *= sb;
    }
    acc
}

/// Integrals over the `bins` equal cells of `[0, 2π)`.
pub fn bin_integrals(coeffs: &[Complex64], bins: usize) -> Vec<f64> {
    let h = 2.0 * std::f64::consts::PI / bins as f64;
    (0..bins)
        .map(|i| interval_integral(coeffs, i as f64 * h, (i + 1) as f64 * h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_integrals() {
        // f = 1 + 2cos(2x): ∫_0^{π/4} f = π/4 + 1
        let c = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let v = interval_integral(&c, 0.0, std::f64::consts::FRAC_PI_4);
        assert!((v - (std::f64::consts::FRAC_PI_4 + 1.0)).abs() < 1e-14);
        let bins = bin_integrals(&c, 8);
        assert!((bins.iter().sum::<f64>() - 2.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
