use serde::{Deserialize, Serialize};

use super::field::FourierField;
use super::littlewood_paley::{lp_block, max_block};
use crate::error::{Error, Result};

/// Exponents of `B^β_{p,q}`; `f64::INFINITY` stands for `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub beta: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovSpec {
    pub fn new(beta: f64, p: f64, q: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::InvalidBesov(format!("beta = {beta}")));
        }
        for (name, v) in [("p", p), ("q", q)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidBesov(format!("{name} = {v} is not in [1, ∞]")));
            }
        }
        Ok(Self { beta, p, q })
    }

    /// `C^β = B^β_{∞,∞}`.
    pub fn holder(beta: f64) -> Self {
        Self {
            beta,
            p: f64::INFINITY,
            q: f64::INFINITY,
        }
    }

    /// `H^β = B^β_{2,2}`.
    pub fn sobolev(beta: f64) -> Self {
        Self { beta, p: 2.0, q: 2.0 }
    }
}

/// Grid `L^p` norm with Lebesgue weight `2π/M` (max over the grid for `p = ∞`).
pub fn lp_norm(values: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    }
    let h = 2.0 * std::f64::consts::PI / values.len() as f64;
    if p == 2.0 {
        return (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    (h * values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

/// Block contributions `2^{βj} ‖Δ_j f‖_{L^p}` for `j = -1..=J`.
pub fn besov_profile(f: &FourierField, s: BesovSpec) -> Vec<f64> {
    (-1..=max_block(f.kmax()))
        .map(|j| 2f64.powf(s.beta * j as f64) * lp_norm(&lp_block(f, j).values(), s.p))
        .collect()
}

pub fn besov_norm(f: &FourierField, s: BesovSpec) -> f64 {
    let profile = besov_profile(f, s);
    if s.q.is_infinite() {
        profile.into_iter().fold(0.0, f64::max)
    } else {
        profile.iter().map(|v| v.powf(s.q)).sum::<f64>().powf(1.0 / s.q)
    }
}

pub fn holder_norm(f: &FourierField, beta: f64) -> f64 {
    besov_norm(f, BesovSpec::holder(beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn rejects_small_exponents() {
        assert!(BesovSpec::new(0.5, 0.5, 2.0).is_err());
        assert!(BesovSpec::new(0.5, 2.0, f64::NAN).is_err());
        assert!(BesovSpec::new(0.5, f64::INFINITY, 1.0).is_ok());
    }

    #[test]
    fn single_mode_norm() {
        let g = PeriodicGrid::new(64, 20).unwrap();
        let f = FourierField::from_fn(g, |x| (4.0 * x).cos());
        for beta in [-1.0, 0.0, 0.5, 1.0, 2.0] {
            let n = besov_norm(&f, BesovSpec::sobolev(beta));
            let want = 2f64.powf(beta) * PI.sqrt();
            assert!((n - want).abs() < 1e-12 * want, "beta {beta}: {n} vs {want}");
        }
    }

    #[test]
    fn holder_of_constant() {
        let g = PeriodicGrid::new(16, 4).unwrap();
        let f = FourierField::constant(g, -3.0);
        assert!((holder_norm(&f, 1.0) - 1.5).abs() < 1e-15);
    }
}
