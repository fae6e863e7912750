use super::products::{para, resonant};
use super::sourced::SourcedField;
use crate::error::Result;
use crate::spectral::{parametrix_inverse, FourierField};

/// Intertwined paraproduct `P̃_a X := −2Δ⁻¹(P_a S)` for `X = −2Δ⁻¹S`.
pub fn para_tilde(a: &FourierField, x: &SourcedField) -> Result<FourierField> {
    Ok(parametrix_inverse(&para(a, x.source())?).scale(-2.0))
}

/// `C∇(a, X, b) = Π(∇P̃_a X, b) − a Π(∇X, b)`.
pub fn corrector_cnabla(a: &FourierField, x: &SourcedField, b: &FourierField) -> Result<FourierField> {
    let first = resonant(&para_tilde(a, x)?.gradient(), b)?;
    let second = a.mul(&resonant(&x.value().gradient(), b)?)?;
    Ok(&first - &second)
}

/// `S(a, X, b) = P_b P̃_a X − P_a P_b X`.
pub fn corrector_s(a: &FourierField, x: &SourcedField, b: &FourierField) -> Result<FourierField> {
    let first = para(b, &para_tilde(a, x)?)?;
    let second = para(a, &para(b, x.value())?)?;
    Ok(&first - &second)
}

/// Gradient form `P_b ∇P̃_a X − P_a P_b ∇X`, the variant that enters the
/// generator.
pub fn corrector_s_nabla(a: &FourierField, x: &SourcedField, b: &FourierField) -> Result<FourierField> {
    let first = para(b, &para_tilde(a, x)?.gradient())?;
    let second = para(a, &para(b, &x.value().gradient())?)?;
    Ok(&first - &second)
}
