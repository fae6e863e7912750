use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::GeneratorHandle;
use crate::error::{Error, Result};
use crate::linalg::gmres;
use crate::paracontrolled::ParacontrolledFunction;
use crate::spectral::FourierField;

pub const RESOLVENT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ResolventOutcome {
    pub solution: ParacontrolledFunction,
    pub iterations: usize,
    /// `‖(L − c)u − f‖_{L²} / ‖f‖_{L²}`.
    pub relative_residual: f64,
}

/// Solves `(L − c)u = f` for the remainder `u♯` of `u = Γu♯`, with
/// `u♯ ↦ (L − c)Γu♯` applied matrix-free and `diag(1/(−k²/2 − c))` as right
/// preconditioner.
pub fn resolvent_solve(f: &FourierField, h: &GeneratorHandle) -> Result<ResolventOutcome> {
    let grid = h.noise().grid();
    f.check_grid(h.noise().xi())?;
    let c = h.c_shift();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let mut apply = |x: &[f64]| -> Vec<f64> {
        let run = || -> Result<Vec<f64>> {
            let sharp = FourierField::from_real_vec(grid, x)?;
            let u = h.gamma(&sharp)?;
            let lu = h.apply(&u)?;
            Ok((&lu - &u.u.scale(c)).to_real_vec())
        };
        match run() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                vec![0.0; x.len()]
            }
        }
    };
    let precond = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                let k = i.div_ceil(2) as f64;
                v / (-0.5 * k * k - c)
            })
            .collect()
    };
    let b = f.to_real_vec();
    let out = gmres(&mut apply, &precond, &b, 1e-11, 120, 1200);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let sharp = FourierField::from_real_vec(grid, &out.x)?;
    let solution = h.gamma(&sharp)?;
    let residual = &(&h.apply(&solution)? - &solution.u.scale(c)) - f;
    let fnorm = f.l2_norm();
    let rel = if fnorm > 0.0 {
        residual.l2_norm() / fnorm
    } else {
        residual.l2_norm()
    };
    if rel > RESOLVENT_TOLERANCE {
        return Err(Error::Conditioning {
            iterations: out.iterations,
            residual: rel,
        });
    }
    Ok(ResolventOutcome {
        solution,
        iterations: out.iterations,
        relative_residual: rel,
    })
}

/// Complex Fourier–Galerkin matrix of `L_n = ½Δ + ξ_n·∇` on `|k| <= K`;
/// row/column `i` is wavenumber `i − K`.
pub fn dense_generator(xi_n: &FourierField) -> DMatrix<Complex64> {
    let kmax = xi_n.kmax() as i64;
    let dim = (2 * kmax + 1) as usize;
    DMatrix::from_fn(dim, dim, |i, j| {
        let row = i as i64 - kmax;
        let col = j as i64 - kmax;
        let mut v = xi_n.coeff(row - col) * Complex64::new(0.0, col as f64);
        if i == j {
            v -= 0.5 * (col * col) as f64;
        }
        v
    })
}

/// `(L_n − c)⁻¹f` by dense LU.
pub fn dense_resolvent(f: &FourierField, xi_n: &FourierField, c: f64) -> Result<FourierField> {
    f.check_grid(xi_n)?;
    let kmax = f.kmax() as i64;
    let mut a = dense_generator(xi_n);
    for i in 0..a.nrows() {
        a[(i, i)] -= c;
    }
    let rhs = DVector::from_fn(a.nrows(), |i, _| f.coeff(i as i64 - kmax));
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Solver("singular resolvent matrix".into()))?;
    let half = (0..=kmax).map(|k| sol[(k + kmax) as usize]).collect();
    FourierField::from_coeffs(f.grid(), half)
}
