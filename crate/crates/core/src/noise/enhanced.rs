use serde::{Deserialize, Serialize};

use super::realization::{potential_of, NoiseRealization};
use crate::error::{Error, Result};
use crate::paracontrolled::{para, resonant, SourcedField};
use crate::spectral::{holder_norm, FourierField, PeriodicGrid};

pub const DEFAULT_ALPHA: f64 = 1.45;

/// Components of the `𝒳^α = 𝒞^{α-2} × 𝒞^{2α-3}` norm of `(ξ, Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiNorms {
    pub xi: f64,
    pub resonant: f64,
}

impl XiNorms {
    pub fn total(&self) -> f64 {
        self.xi + self.resonant
    }
}

/// Truncated noise `ξ_n` with the solutions `X_1`, `X_2` of the two
/// parametrix equations and the resonant lift `Y = Π(∇X_1, ξ_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnhancedNoise {
    n: usize,
    alpha: f64,
    xi: FourierField,
    w: FourierField,
    x1: SourcedField,
    x2: SourcedField,
    resonant: FourierField,
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha < 1.5) {
        return Err(Error::Parameter(format!("alpha = {alpha} must lie in (1, 3/2)")));
    }
    Ok(())
}

/// `X_1 = −2Δ⁻¹ξ`.
pub fn solve_x1(xi: &FourierField) -> SourcedField {
    SourcedField::from_source(xi.clone())
}

/// `Y = Π(∇X_1, ξ)`.
pub fn resonant_lift(x1: &FourierField, xi: &FourierField) -> Result<FourierField> {
    resonant(&x1.gradient(), xi)
}

impl EnhancedNoise {
    pub fn enhance(noise: &NoiseRealization, n: usize, alpha: f64, grid: PeriodicGrid) -> Result<Self> {
        check_alpha(alpha)?;
        Self::from_xi(noise.truncate(n, grid)?, n, alpha)
    }

    /// Enhancement of an arbitrary mean-zero drift field labelled with level `n`.
    pub fn from_xi(xi: FourierField, n: usize, alpha: f64) -> Result<Self> {
        Self::renormalized(xi, n, alpha, None)
    }

    /// As [`EnhancedNoise::from_xi`] with `Y = Π(∇X_1, ξ) − c` for a
    /// regularisation-dependent counterterm `c`.
    pub fn renormalized(xi: FourierField, n: usize, alpha: f64, c: Option<&FourierField>) -> Result<Self> {
        check_alpha(alpha)?;
        let x1 = solve_x1(&xi);
        let dx1 = x1.value().gradient();
        let mut y = resonant(&dx1, &xi)?;
        if let Some(c) = c {
            c.check_grid(&y)?;
            y -= c;
        }
        let s2 = &para(&xi, &dx1)? + &y;
        Ok(Self {
            n,
            alpha,
            w: potential_of(&xi),
            xi,
            x1,
            x2: SourcedField::from_source(s2),
            resonant: y,
        })
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.xi.grid()
    }

    pub fn xi(&self) -> &FourierField {
        &self.xi
    }

    pub fn potential(&self) -> &FourierField {
        &self.w
    }

    pub fn x1(&self) -> &SourcedField {
        &self.x1
    }

    pub fn x2(&self) -> &SourcedField {
        &self.x2
    }

    pub fn resonant(&self) -> &FourierField {
        &self.resonant
    }

    /// `Ξ_N`: the enhancement of `ξ_n` truncated to `|k| <= N`.
    pub fn truncated(&self, level: usize) -> Result<Self> {
        if level > self.n {
            return Err(Error::Level {
                n: level,
                k_max: self.n,
            });
        }
        Self::from_xi(self.xi.truncated(level), level, self.alpha)
    }

    /// Enhancement of `sξ`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::from_xi(self.xi.scale(s), self.n, self.alpha)
    }

    pub fn norms(&self) -> XiNorms {
        XiNorms {
            xi: holder_norm(&self.xi, self.alpha - 2.0),
            resonant: holder_norm(&self.resonant, 2.0 * self.alpha - 3.0),
        }
    }

    /// `‖Ξ − Ξ'‖_{𝒳^α}` by components, both on the same grid.
    pub fn distance(&self, other: &Self) -> Result<XiNorms> {
        self.xi.check_grid(&other.xi)?;
        Ok(XiNorms {
            xi: holder_norm(&(&self.xi - &other.xi), self.alpha - 2.0),
            resonant: holder_norm(&(&self.resonant - &other.resonant), 2.0 * self.alpha - 3.0),
        })
    }

    /// Maximal coefficient residual of the two parametrix equations.
    pub fn solve_residual(&self) -> f64 {
        self.x1.residual().max(self.x2.residual())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_range() {
        assert!(check_alpha(1.0).is_err());
        assert!(check_alpha(1.5).is_err());
        assert!(check_alpha(1.45).is_ok());
    }

    #[test]
    fn x1_of_cosine() {
        let g = PeriodicGrid::new(64, 21).unwrap();
        let xi = FourierField::from_fn(g, f64::cos);
        let x1 = solve_x1(&xi);
        let amp = 2.0 * x1.value().coeff(1).re;
        assert!((amp - 1.264_241_117_657_115_4).abs() < 1e-14);
    }
}
