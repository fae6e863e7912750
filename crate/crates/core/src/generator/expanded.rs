use serde::{Deserialize, Serialize};

use super::GeneratorHandle;
use crate::error::{Error, Result};
use crate::noise::EnhancedNoise;
use crate::paracontrolled::{corrector_cnabla, corrector_s_nabla, para, resonant, ParacontrolledFunction};
use crate::spectral::{parametrix_inverse, FourierField};

/// Form of the `e^Δ` defect term in `F_Ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DefectVariant {
    /// `+e^Δ(P_{∇u}S_1 + P_{∇u}S_2)`, acting on the sources.
    Source,
    /// `−e^Δ(P_{∇u}X_1 + P_{∇u}X_2)`, acting on the solutions.
    Display,
}

/// The individual terms of the expanded generator, in summation order.
#[derive(Clone, Debug)]
pub struct ExpandedTerms {
    pub half_laplacian_sharp: FourierField,
    pub para_xi_sharp: FourierField,
    pub resonant_sharp: FourierField,
    pub para_y: FourierField,
    pub resonant_y: FourierField,
    pub corrector_c: FourierField,
    pub resonant_x2: FourierField,
    pub corrector_s: FourierField,
    pub para_x2: FourierField,
    pub defect: FourierField,
}

impl ExpandedTerms {
    pub fn sum(&self) -> FourierField {
        let mut acc = self.half_laplacian_sharp.clone();
        for t in [
            &self.para_xi_sharp,
            &self.resonant_sharp,
            &self.para_y,
            &self.resonant_y,
            &self.corrector_c,
            &self.resonant_x2,
            &self.corrector_s,
            &self.para_x2,
            &self.defect,
        ] {
            acc += t;
        }
        acc
    }
}

/// Terms of `Lu` for `u` in the domain of `Ξ`, with `a = ∇u` and
/// `u♯ = u − P̃_a X_1 − P̃_a X_2` the remainder against the full `X_i`:
///
/// `½Δu♯ + P_ξ∇u♯ + Π(∇u♯, ξ) + P_Y a + Π(a, Y) + C∇(a, X_1, ξ)
///  + Π(∇P̃_a X_2, ξ) + S∇(a, X_1, ξ) + P_ξ∇P̃_a X_2 + defect`.
pub fn expanded_terms(u: &FourierField, xi: &EnhancedNoise, defect: DefectVariant) -> Result<ExpandedTerms> {
    let noise = xi.xi();
    let y = xi.resonant();
    let a = u.gradient();
    let pa1 = para(&a, xi.x1().source())?;
    let pa2 = para(&a, xi.x2().source())?;
    let control = parametrix_inverse(&(&pa1 + &pa2)).scale(-2.0);
    let sharp = u - &control;
    let dsharp = sharp.gradient();
    let ptx2 = parametrix_inverse(&pa2).scale(-2.0);
    let dptx2 = ptx2.gradient();
    let defect = match defect {
        DefectVariant::Source => (&pa1 + &pa2).heat(1.0),
        DefectVariant::Display => (&para(&a, xi.x1().value())? + &para(&a, xi.x2().value())?)
            .heat(1.0)
            .scale(-1.0),
    };
    Ok(ExpandedTerms {
        half_laplacian_sharp: sharp.laplacian().scale(0.5),
        para_xi_sharp: para(noise, &dsharp)?,
        resonant_sharp: resonant(&dsharp, noise)?,
        para_y: para(y, &a)?,
        resonant_y: resonant(&a, y)?,
        corrector_c: corrector_cnabla(&a, xi.x1(), noise)?,
        resonant_x2: resonant(&dptx2, noise)?,
        corrector_s: corrector_s_nabla(&a, xi.x1(), noise)?,
        para_x2: para(noise, &dptx2)?,
        defect,
    })
}

pub(crate) fn apply_l_expanded_raw(
    u: &ParacontrolledFunction,
    xi: &EnhancedNoise,
    defect: DefectVariant,
) -> Result<FourierField> {
    if u.noise_level != xi.level() {
        return Err(Error::LevelMismatch(format!(
            "function built at level {}, generator at level {}",
            u.noise_level,
            xi.level()
        )));
    }
    u.u.check_grid(xi.xi())?;
    Ok(expanded_terms(&u.u, xi, defect)?.sum())
}

/// `Lu` through the paracontrolled expansion.
pub fn apply_l_expanded(u: &ParacontrolledFunction, h: &GeneratorHandle) -> Result<FourierField> {
    apply_l_expanded_raw(u, h.noise(), h.defect())
}

/// `L_n u = ½Δu + ξ_n·∇u`, truncated to the grid band.
pub fn apply_l_direct(u: &FourierField, xi_n: &FourierField) -> Result<FourierField> {
    Ok(&u.laplacian().scale(0.5) + &xi_n.mul(&u.gradient())?)
}

/// Point values of the untruncated `L_n u` on an `m`-point grid (`m > 4K`
/// resolves the product exactly).
pub fn apply_l_direct_values(u: &FourierField, xi_n: &FourierField, m: usize) -> Result<Vec<f64>> {
    u.check_grid(xi_n)?;
    let lap = u.laplacian().values_on(m)?;
    let du = u.gradient().values_on(m)?;
    let xv = xi_n.values_on(m)?;
    Ok(lap
        .iter()
        .zip(du.iter().zip(&xv))
        .map(|(l, (d, x))| 0.5 * l + x * d)
        .collect())
}
