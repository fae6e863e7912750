use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::decomposition::SpectralDecomposition;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMode {
    Eigen,
    /// Flat-environment theta series.
    Theta,
    ResolventPower {
        steps: usize,
    },
}

/// `p_t(x_i, y_j)` on an `m`-point grid for selected rows `x_i`.
#[derive(Clone, Debug)]
pub struct HeatKernel {
    pub t: f64,
    pub mode: KernelMode,
    pub m: usize,
    /// Grid indices of the rows.
    pub rows: Vec<usize>,
    pub values: DMatrix<f64>,
    /// `w(y_j)` on the same grid.
    pub weight: Vec<f64>,
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parameter(format!("time t = {t} must be positive")));
    }
    Ok(())
}

fn kernel_from_multipliers(
    dec: &SpectralDecomposition,
    t: f64,
    mode: KernelMode,
    m: usize,
    rows: &[usize],
    mult: &[f64],
) -> Result<HeatKernel> {
    let e = dec.eigenfunction_values(m)?;
    let weight = dec.weight.values_on(m);
    let er = DMatrix::from_fn(rows.len(), dec.dim(), |i, k| e[(rows[i], k)] * mult[k]);
    let mut values = er * e.transpose();
    for (j, w) in weight.iter().enumerate() {
        values.column_mut(j).scale_mut(*w);
    }
    Ok(HeatKernel {
        t,
        mode,
        m,
        rows: rows.to_vec(),
        values,
        weight,
    })
}

/// `p_t(x, y) = Σ_m e^{tλ_m} e_m(x) e_m(y) w(y)`.
pub fn heat_kernel_eigen(dec: &SpectralDecomposition, t: f64, m: usize, rows: &[usize]) -> Result<HeatKernel> {
    check_time(t)?;
    let mult: Vec<f64> = dec.eigenvalues.iter().map(|l| (t * l).exp()).collect();
    kernel_from_multipliers(dec, t, KernelMode::Eigen, m, rows, &mult)
}

/// Kernel of `e^{tc}(I − (t/N)(L − c))^{−N}`, diagonal in the eigenbasis.
pub fn resolvent_power_kernel(
    dec: &SpectralDecomposition,
    t: f64,
    steps: usize,
    c: f64,
    m: usize,
    rows: &[usize],
) -> Result<HeatKernel> {
    check_time(t)?;
    if steps == 0 {
        return Err(Error::Parameter("at least one resolvent step is required".into()));
    }
    let mult = resolvent_power_multipliers(&dec.eigenvalues, t, steps, c);
    kernel_from_multipliers(dec, t, KernelMode::ResolventPower { steps }, m, rows, &mult)
}

pub fn resolvent_power_multipliers(eigenvalues: &[f64], t: f64, steps: usize, c: f64) -> Vec<f64> {
    let h = t / steps as f64;
    eigenvalues
        .iter()
        .map(|l| (t * c - steps as f64 * (1.0 - h * (l - c)).ln()).exp())
        .collect()
}

impl HeatKernel {
    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.m as f64
    }

    /// `max_i |h Σ_j p(x_i, y_j) − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        let h = self.spacing();
        self.values
            .row_iter()
            .map(|r| (h * r.sum() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.min()
    }

    /// `max |p(x,y) w(x) − p(y,x) w(y)|` over row pairs present in the kernel,
    /// relative to the largest entry.
    pub fn detailed_balance_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, &ia) in self.rows.iter().enumerate() {
            for (b, &ib) in self.rows.iter().enumerate() {
                let lhs = self.values[(a, ib)] * self.weight[ia];
                let rhs = self.values[(b, ia)] * self.weight[ib];
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst / self.values.amax()
    }

    /// Row `i` of the kernel as a vector over `y`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }
}

/// `max |p_{s+t}(x,z) − ∫p_s(x,y)p_t(y,z)dy|` for the rows of `p_s`, with
/// `p_t` given on all rows; relative to the largest entry of `p_{s+t}`.
pub fn chapman_kolmogorov_defect(ps: &HeatKernel, pt_full: &HeatKernel, pst: &HeatKernel) -> Result<f64> {
    if pt_full.rows.len() != pt_full.m || ps.m != pt_full.m || pst.rows != ps.rows {
        return Err(Error::Parameter(
            "kernels must share grid and rows; p_t needs every row".into(),
        ));
    }
    let composed = &ps.values * &pt_full.values * ps.spacing();
    Ok((composed - &pst.values).amax() / pst.values.amax())
}

/// Applies `e^{tL}` to a function given on the eigenfunction grid via the
/// eigen-expansion: returns grid values.
pub fn semigroup_apply(dec: &SpectralDecomposition, t: f64, f_values: &[f64]) -> Result<Vec<f64>> {
    check_time(t)?;
    let m = f_values.len();
    let e = dec.eigenfunction_values(m)?;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let w = dec.weight.values_on(m);
    let fw = DVector::from_fn(m, |j, _| f_values[j] * w[j] * h);
    let mut coef = e.transpose() * fw;
    for (c, l) in coef.iter_mut().zip(&dec.eigenvalues) {
        *c *= (t * l).exp();
    }
    Ok((e * coef).iter().copied().collect())
}
