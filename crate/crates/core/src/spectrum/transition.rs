//! Exact interval probabilities of the Galerkin heat kernel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::decomposition::{basis_at, basis_to_field, gram_pair, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::weight::ExpWeight;

/// An arc `[a, b)` of the circle, `a <= b <= a + 2π`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Arc {
    pub a: f64,
    pub b: f64,
}

impl Arc {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a <= b && b - a <= 2.0 * std::f64::consts::PI + 1e-12) {
            return Err(Error::Parameter(format!(
                "arc [{a}, {b}) is not a subset of one period"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn circle() -> Self {
        Self {
            a: 0.0,
            b: 2.0 * std::f64::consts::PI,
        }
    }

    /// The two halves `[0, π)` and `[π, 2π)`.
    pub fn halves() -> [Self; 2] {
        let pi = std::f64::consts::PI;
        [Self { a: 0.0, b: pi }, Self { a: pi, b: 2.0 * pi }]
    }

    /// `bins` equal cells of `[0, 2π)`.
    pub fn bins(bins: usize) -> Vec<Self> {
        let h = 2.0 * std::f64::consts::PI / bins as f64;
        (0..bins)
            .map(|i| Self {
                a: i as f64 * h,
                b: (i + 1) as f64 * h,
            })
            .collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        let two_pi = 2.0 * std::f64::consts::PI;
        let y = (x - self.a).rem_euclid(two_pi);
        y < self.b - self.a || self.b - self.a >= two_pi
    }
}

/// `∫_A e^{imx} w dx` for `m = 0..=r`.
pub fn weighted_moments(weight: &ExpWeight, arc: Arc, r: usize) -> Vec<Complex64> {
    let l = weight.bandwidth();
    let span = r + l;
    // ∫_A e^{ijx} dx for j in −span..=span
    let (ea, eb) = (Complex64::from_polar(1.0, arc.a), Complex64::from_polar(1.0, arc.b));
    let mut plain = vec![Complex64::new(0.0, 0.0); 2 * span + 1];
    plain[span] = Complex64::new(arc.b - arc.a, 0.0);
    let (mut pa, mut pb) = (ea, eb);
    for j in 1..=span {
        let v = (pb - pa) / Complex64::new(0.0, j as f64);
        plain[span + j] = v;
        plain[span - j] = v.conj();
        pa *= ea;
        pb *= eb;
    }
    (0..=r)
        .map(|m| {
            (-(l as i64)..=l as i64)
                .map(|j| weight.coeff(j) * plain[(span as i64 + j + m as i64) as usize])
                .sum()
        })
        .collect()
}

/// `∫_A φ_a φ_b w` over the real basis.
pub fn interval_gram(dec: &SpectralDecomposition, arc: Arc) -> DMatrix<f64> {
    let kmax = dec.grid.k();
    let mom = weighted_moments(&dec.weight, arc, 2 * kmax);
    let at = |m: i64| {
        if m >= 0 {
            mom[m as usize]
        } else {
            mom[(-m) as usize].conj()
        }
    };
    gram_pair(kmax, |m| at(m).re, |m| at(m).im, false).0
}

/// `∫_A φ_a w` over the real basis.
pub fn interval_moments(dec: &SpectralDecomposition, arc: Arc) -> DVector<f64> {
    let kmax = dec.grid.k();
    let mom = weighted_moments(&dec.weight, arc, kmax);
    let r2 = std::f64::consts::SQRT_2;
    let mut v = DVector::zeros(2 * kmax + 1);
    v[0] = mom[0].re;
    for k in 1..=kmax {
        v[2 * k - 1] = r2 * mom[k].re;
        v[2 * k] = r2 * mom[k].im;
    }
    v
}

/// `μ(A) = ∫_A w / ∫ w` for each arc.
pub fn mu_probabilities(weight: &ExpWeight, arcs: &[Arc]) -> Vec<f64> {
    let z = weight.integral();
    arcs.iter().map(|&a| weighted_moments(weight, a, 0)[0].re / z).collect()
}

/// `P_x0(X_t ∈ A)` for each arc.
pub fn occupation_probabilities(dec: &SpectralDecomposition, t: f64, x0: f64, arcs: &[Arc]) -> Vec<f64> {
    let row = dec.propagator(t).transpose() * basis_at(dec.grid.k(), x0);
    arcs.iter().map(|&a| row.dot(&interval_moments(dec, a))).collect()
}

/// `P_x0(X_{t1} ∈ A_i, X_{t2} ∈ A_j)` as a matrix over `(i, j)`.
pub fn joint_probabilities(
    dec: &SpectralDecomposition,
    x0: f64,
    t1: f64,
    t2: f64,
    arcs: &[Arc],
) -> Result<DMatrix<f64>> {
    if !(0.0 < t1 && t1 < t2) {
        return Err(Error::Parameter(format!("need 0 < t1 < t2, got {t1}, {t2}")));
    }
    let first = dec.propagator(t1).transpose() * basis_at(dec.grid.k(), x0);
    let second = dec.propagator(t2 - t1);
    let mut out = DMatrix::zeros(arcs.len(), arcs.len());
    let hit: Vec<DVector<f64>> = arcs.iter().map(|&a| &second * interval_moments(dec, a)).collect();
    for (i, &ai) in arcs.iter().enumerate() {
        let left = interval_gram(dec, ai) * &first;
        for (j, h) in hit.iter().enumerate() {
            out[(i, j)] = left.dot(h);
        }
    }
    Ok(out)
}

/// Half spectrum of `y ↦ p_t(x0, y)`, of degree `K + L`.
pub fn kernel_row_spectrum(dec: &SpectralDecomposition, t: f64, x0: f64) -> Vec<Complex64> {
    let coords = dec.propagator(t).transpose() * basis_at(dec.grid.k(), x0);
    let g = basis_to_field(dec.grid, coords.as_slice());
    let (k, l) = (g.kmax() as i64, dec.weight.bandwidth() as i64);
    (0..=k + l)
        .map(|m| {
            (-k..=k)
                .filter(|j| (m - j).abs() <= l)
                .map(|j| g.coeff(j) * dec.weight.coeff(m - j))
                .sum()
        })
        .collect()
}
