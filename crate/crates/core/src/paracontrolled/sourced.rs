use serde::{Deserialize, Serialize};

use crate::spectral::{parametrix_inverse, FourierField};

/// A field `X = −2Δ⁻¹S` stored together with its source `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourcedField {
    value: FourierField,
    source: FourierField,
}

impl SourcedField {
    pub fn from_source(source: FourierField) -> Self {
        let value = parametrix_inverse(&source).scale(-2.0);
        Self { value, source }
    }

    pub fn value(&self) -> &FourierField {
        &self.value
    }

    pub fn source(&self) -> &FourierField {
        &self.source
    }

    /// `max_k |X_k + 2 (Δ⁻¹S)_k|`.
    pub fn residual(&self) -> f64 {
        let back = parametrix_inverse(&self.source).scale(2.0);
        (&self.value + &back).coeffs().iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Difference of two sourced fields (linear in the source).
    pub fn minus(&self, other: &Self) -> Self {
        Self {
            value: &self.value - &other.value,
            source: &self.source - &other.source,
        }
    }
}
