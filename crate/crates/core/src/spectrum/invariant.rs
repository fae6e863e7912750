use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::decomposition::{basis_to_field, field_to_basis};
use crate::error::{Error, Result};
use crate::generator::{apply_l_direct, resolvent_solve, GeneratorHandle};
use crate::spectral::FourierField;
use crate::weight::ExpWeight;

/// Normalised density `e^{2W_n}/Z` with its defining checks.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantMeasure {
    pub m: usize,
    pub density: Vec<f64>,
    pub normalizer: f64,
    /// `‖f' − 2ξ_n f‖_{L²} / ‖f‖_{L²}` for `f = e^{2W_n}`.
    pub adjoint_residual: f64,
    /// `max_k |∫ L_n(e^{ikx}) e^{2W_n}| / (Z (1 + k²/2))`.
    pub stationarity_defect: f64,
}

pub fn invariant_measure(xi_n: &FourierField, w_n: &FourierField, m: usize) -> Result<InvariantMeasure> {
    xi_n.check_grid(w_n)?;
    let weight = ExpWeight::new(w_n, 2.0, 2 * xi_n.kmax())?;
    let z = weight.integral();
    let density: Vec<f64> = weight.values_on(m).into_iter().map(|v| v / z).collect();

    let fine = (2 * (weight.bandwidth() + xi_n.kmax()) + 2).next_power_of_two();
    let f = weight.values_on(fine);
    let df = weight.derivative_values_on(fine);
    let xv = xi_n.values_on(fine)?;
    let (mut num, mut den) = (0.0, 0.0);
    for ((a, b), x) in df.iter().zip(&f).zip(&xv) {
        num += (a - 2.0 * x * b).powi(2);
        den += b * b;
    }

    let kmax = xi_n.kmax() as i64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut stationarity: f64 = 0.0;
    for k in -kmax..=kmax {
        let ik = Complex64::new(0.0, k as f64);
        let mut s = weight.coeff(-k) * (-0.5 * (k * k) as f64);
        for l in -kmax..=kmax {
            let c = xi_n.coeff(l);
            if c.norm() > 0.0 {
                s += ik * c * weight.coeff(-(l + k));
            }
        }
        stationarity = stationarity.max(two_pi * s.norm() / (z * (1.0 + 0.5 * (k * k) as f64)));
    }
    Ok(InvariantMeasure {
        m,
        density,
        normalizer: z,
        adjoint_residual: (num / den).sqrt(),
        stationarity_defect: stationarity,
    })
}

/// Eigenvalues of the plain Fourier–Galerkin truncation of `L_n` in the real
/// basis, sorted by decreasing real part.
pub fn galerkin_eigenvalues(xi_n: &FourierField) -> Result<Vec<Complex64>> {
    let grid = xi_n.grid();
    let dim = 2 * grid.k() + 1;
    let mut a = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for b in 0..dim {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[b] = 1.0;
        let col = field_to_basis(&apply_l_direct(&basis_to_field(grid, &e), xi_n)?);
        for (r, v) in col.into_iter().enumerate() {
            a[(r, b)] = v;
        }
    }
    let schur = nalgebra::Schur::try_new(a, 1e-15, 0)
        .ok_or_else(|| Error::Solver("Schur decomposition did not converge".into()))?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| y.re.total_cmp(&x.re));
    Ok(eig)
}

/// `e^{tc}(I − (t/N)(L − c))^{−N} f` by `N` paracontrolled resolvent solves.
pub fn semigroup_resolvent_power(h: &GeneratorHandle, t: f64, steps: usize, f: &FourierField) -> Result<FourierField> {
    if t.is_nan() || t <= 0.0 || steps == 0 {
        return Err(Error::Parameter("need t > 0 and at least one step".into()));
    }
    let rate = steps as f64 / t;
    let shifted = h.with_shift(h.c_shift() + rate)?;
    let mut u = f.clone();
    for _ in 0..steps {
        let r = resolvent_solve(&u, &shifted)?;
        u = r.solution.u.scale(-rate);
    }
    Ok(u.scale((t * h.c_shift()).exp()))
}
