use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{FourierField, PeriodicGrid};
use crate::weight::ExpWeight;

/// Stiffness `A = ½∫φ_a'φ_b' w` and mass `B = ∫φ_a φ_b w` in the real basis
/// `{1, √2 cos kx, √2 sin kx}_{k<=K}` ordered `1, c_1, s_1, c_2, s_2, …`.
#[derive(Clone, Debug)]
pub struct WeightedPair {
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub weight: ExpWeight,
    pub grid: PeriodicGrid,
    pub level: usize,
}

/// Index of `cos kx` (`sin = cos + 1`) in the real basis.
fn cos_index(k: usize) -> usize {
    2 * k - 1
}

/// Real coordinates of the Galerkin pair for `w = e^{2W}`.
pub fn assemble_weighted(w_n: &FourierField, level: usize) -> Result<WeightedPair> {
    let grid = w_n.grid();
    let kmax = grid.k();
    let weight = ExpWeight::new(w_n, 2.0, 2 * kmax)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let (mass, stiffness) = gram_pair(
        kmax,
        |m| two_pi * weight.coeff(m).re,
        |m| -two_pi * weight.coeff(m).im,
        true,
    );
    Ok(WeightedPair {
        stiffness,
        mass,
        weight,
        grid,
        level,
    })
}

/// Gram matrix `∫ φ_a φ_b dν` (and the derivative Gram `½∫ φ_a' φ_b' dν` when
/// `with_stiffness`) from the moments `cc(m) = ∫cos(mx)dν`, `ss(m) = ∫sin(mx)dν`.
pub(crate) fn gram_pair(
    kmax: usize,
    cc: impl Fn(i64) -> f64,
    ss: impl Fn(i64) -> f64,
    with_stiffness: bool,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = 2 * kmax + 1;
    let mut mass = DMatrix::zeros(dim, dim);
    let mut stiff = DMatrix::zeros(
        if with_stiffness { dim } else { 0 },
        if with_stiffness { dim } else { 0 },
    );
    let r2 = std::f64::consts::SQRT_2;
    mass[(0, 0)] = cc(0);
    for l in 1..=kmax {
        let (cl, sl) = (cos_index(l), cos_index(l) + 1);
        let li = l as i64;
        mass[(0, cl)] = r2 * cc(li);
        mass[(0, sl)] = r2 * ss(li);
        mass[(cl, 0)] = mass[(0, cl)];
        mass[(sl, 0)] = mass[(0, sl)];
    }
    for j in 1..=kmax {
        let (cj, sj) = (cos_index(j), cos_index(j) + 1);
        let ji = j as i64;
        for l in j..=kmax {
            let (cl, sl) = (cos_index(l), cos_index(l) + 1);
            let li = l as i64;
            let (dm, sm) = (ji - li, ji + li);
            let b_cc = cc(dm) + cc(sm);
            let b_ss = cc(dm) - cc(sm);
            let b_cs = ss(sm) - ss(dm);
            let b_sc = ss(sm) - ss(-dm);
            mass[(cj, cl)] = b_cc;
            mass[(sj, sl)] = b_ss;
            mass[(cj, sl)] = b_cs;
            mass[(sj, cl)] = b_sc;
            for (a, b) in [(cj, cl), (sj, sl), (cj, sl), (sj, cl)] {
                mass[(b, a)] = mass[(a, b)];
            }
            if with_stiffness {
                let jl = (j * l) as f64;
                stiff[(cj, cl)] = 0.5 * jl * b_ss;
                stiff[(sj, sl)] = 0.5 * jl * b_cc;
                stiff[(cj, sl)] = -0.5 * jl * b_sc;
                stiff[(sj, cl)] = -0.5 * jl * b_cs;
                for (a, b) in [(cj, cl), (sj, sl), (cj, sl), (sj, cl)] {
                    stiff[(b, a)] = stiff[(a, b)];
                }
            }
        }
    }
    (mass, stiff)
}

impl WeightedPair {
    pub fn symmetry_defect(&self) -> f64 {
        let d = |m: &DMatrix<f64>| (m - m.transpose()).amax() / m.amax().max(1.0);
        d(&self.stiffness).max(d(&self.mass))
    }
}

/// Eigenpairs of the weighted problem, `λ_1 >= λ_2 >= …`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub level: usize,
    pub grid: PeriodicGrid,
    pub eigenvalues: Vec<f64>,
    /// Columns are real-basis coordinates of `e_m`, orthonormal in `L²(w)`.
    pub vectors: DMatrix<f64>,
    pub mass: DMatrix<f64>,
    pub weight: ExpWeight,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpectrumSummary {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
    pub constant_deviation: f64,
    pub orthonormality_defect: f64,
}

/// Generalised symmetric eigensolve `A v = μ B v` through the Cholesky factor
/// of `B`; `λ = −μ`.
pub fn eigendecompose(pair: &WeightedPair) -> Result<SpectralDecomposition> {
    let chol = pair
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solver("weighted mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
    let mut c = &linv * &pair.stiffness * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, 1e-15, 0)
        .ok_or_else(|| Error::Solver("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = order.len();
    let lt_inv = linv.transpose();
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (col, &i) in order.iter().enumerate() {
        eigenvalues.push(-eig.eigenvalues[i]);
        let v = &lt_inv * eig.eigenvectors.column(i);
        vectors.set_column(col, &v);
    }
    // One Cholesky re-orthonormalisation pass against B: a strongly varying
    // weight makes B ill-conditioned and L⁻ᵀ loses a few digits.
    let gram = vectors.transpose() * &pair.mass * &vectors;
    if let Some(g) = ((&gram + gram.transpose()) * 0.5).cholesky() {
        if let Some(r) = g.l().transpose().try_inverse() {
            vectors *= r;
        }
    }
    // Fix the sign of each eigenvector by its largest coordinate.
    for mut col in vectors.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(SpectralDecomposition {
        level: pair.level,
        grid: pair.grid,
        eigenvalues,
        vectors,
        mass: pair.mass.clone(),
        weight: pair.weight.clone(),
    })
}

/// Converts real-basis coordinates to a field.
pub fn basis_to_field(grid: PeriodicGrid, v: &[f64]) -> FourierField {
    let kmax = grid.k();
    let mut coeffs = Vec::with_capacity(kmax + 1);
    coeffs.push(Complex64::new(v[0], 0.0));
    for k in 1..=kmax {
        coeffs.push(Complex64::new(v[cos_index(k)], -v[cos_index(k) + 1]) * std::f64::consts::FRAC_1_SQRT_2);
    }
    FourierField::from_coeffs(grid, coeffs).expect("basis length matches grid")
}

/// Real basis functions evaluated at `x`.
pub fn basis_at(kmax: usize, x: f64) -> DVector<f64> {
    let mut v = DVector::zeros(2 * kmax + 1);
    v[0] = 1.0;
    let r2 = std::f64::consts::SQRT_2;
    for k in 1..=kmax {
        let (s, c) = (k as f64 * x).sin_cos();
        v[cos_index(k)] = r2 * c;
        v[cos_index(k) + 1] = r2 * s;
    }
    v
}

/// Inverse of [`basis_to_field`].
pub fn field_to_basis(f: &FourierField) -> Vec<f64> {
    let mut v = vec![f.coeff(0).re];
    for k in 1..=f.kmax() {
        let c = f.coeff(k as i64) * std::f64::consts::SQRT_2;
        v.push(c.re);
        v.push(-c.im);
    }
    v
}

impl SpectralDecomposition {
    pub fn gap(&self) -> f64 {
        self.eigenvalues[0] - self.eigenvalues[1]
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenfunction(&self, m: usize) -> FourierField {
        let col: Vec<f64> = self.vectors.column(m).iter().copied().collect();
        basis_to_field(self.grid, &col)
    }

    /// `‖VᵀBV − I‖_max`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.vectors.transpose() * &self.mass * &self.vectors;
        (g - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// `max w / min w`, which bounds the conditioning of the mass matrix.
    pub fn weight_range(&self) -> f64 {
        let w = self
            .weight
            .values_on((4 * self.weight.bandwidth() + 4).next_power_of_two());
        w.iter().cloned().fold(0.0, f64::max) / w.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Maximal non-constant coordinate of `e_1` relative to its constant one.
    pub fn constant_deviation(&self) -> f64 {
        let col = self.vectors.column(0);
        col.rows(1, col.len() - 1).amax() / col[0].abs()
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            lambda1: self.eigenvalues[0],
            lambda2: self.eigenvalues[1],
            gap: self.gap(),
            constant_deviation: self.constant_deviation(),
            orthonormality_defect: self.orthonormality_defect(),
        }
    }

    /// `V diag(e^{tλ}) Vᵀ`: maps `∫ φ f w` to the coordinates of `e^{tL} f`.
    pub fn propagator(&self, t: f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (mut col, l) in scaled.column_iter_mut().zip(&self.eigenvalues) {
            col *= (t * l).exp();
        }
        scaled * self.vectors.transpose()
    }

    /// `M × dim` matrix of eigenfunction values on an `m`-point grid.
    pub fn eigenfunction_values(&self, m: usize) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(m, self.dim());
        for j in 0..self.dim() {
            let vals = self.eigenfunction(j).values_on(m)?;
            out.set_column(j, &nalgebra::DVector::from_vec(vals));
        }
        Ok(out)
    }
}
