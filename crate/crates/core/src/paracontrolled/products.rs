use crate::error::Result;
use crate::spectral::fft::analyze;
use crate::spectral::{low_pass, lp_block, max_block, FourierField};

fn accumulate(acc: &mut [f64], a: &[f64], b: &[f64]) {
    for ((s, x), y) in acc.iter_mut().zip(a).zip(b) {
        *s += x * y;
    }
}

fn finish(f: &FourierField, acc: &[f64]) -> FourierField {
    FourierField::from_coeffs(f.grid(), analyze(acc, f.kmax())).expect("length matches grid")
}

/// Bony paraproduct `P_f g = Σ_{ℓ'} S_{ℓ'-2} f · Δ_{ℓ'} g`.
pub fn para(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    f.check_grid(g)?;
    let m = f.grid().m();
    let mut acc = vec![0.0; m];
    for lp in 1..=max_block(f.kmax()) {
        let low = low_pass(f, lp - 2);
        let high = lp_block(g, lp);
        accumulate(&mut acc, &low.values(), &high.values());
    }
    Ok(finish(f, &acc))
}

/// Resonant product `Π(f, g) = Σ_{|ℓ-ℓ'| <= 1} Δ_ℓ f · Δ_{ℓ'} g`.
pub fn resonant(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    f.check_grid(g)?;
    let m = f.grid().m();
    let jmax = max_block(f.kmax());
    let gb: Vec<Vec<f64>> = (-1..=jmax).map(|j| lp_block(g, j).values()).collect();
    let mut acc = vec![0.0; m];
    let mut near = vec![0.0; m];
    for l in -1..=jmax {
        let i = (l + 1) as usize;
        near.iter_mut().for_each(|v| *v = 0.0);
        for g in &gb[i.saturating_sub(1)..=(i + 1).min(gb.len() - 1)] {
            near.iter_mut().zip(g).for_each(|(v, w)| *v += w);
        }
        accumulate(&mut acc, &lp_block(f, l).values(), &near);
    }
    Ok(finish(f, &acc))
}

/// Dealiased pointwise product truncated to the grid cutoff.
pub fn product(f: &FourierField, g: &FourierField) -> Result<FourierField> {
    f.mul(g)
}
