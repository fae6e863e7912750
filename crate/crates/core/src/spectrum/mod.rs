//! Weighted Galerkin spectrum, heat kernels, Gaussian bounds and the
//! invariant measure.

mod bounds;
mod decomposition;
mod invariant;
mod kernel;
mod transition;

pub use bounds::{default_times, gaussian_bound_fit, theta_kernel, torus_distance, GaussianFit, POSITIVE_FLOOR};
pub use decomposition::{
    assemble_weighted, basis_at, basis_to_field, eigendecompose, field_to_basis, SpectralDecomposition,
    SpectrumSummary, WeightedPair,
};
pub use invariant::{galerkin_eigenvalues, invariant_measure, semigroup_resolvent_power, InvariantMeasure};
pub use kernel::{
    chapman_kolmogorov_defect, heat_kernel_eigen, resolvent_power_kernel, resolvent_power_multipliers, semigroup_apply,
    HeatKernel, KernelMode,
};
pub use transition::{
    interval_gram, interval_moments, joint_probabilities, kernel_row_spectrum, mu_probabilities,
    occupation_probabilities, weighted_moments, Arc,
};

use crate::error::Result;
use crate::noise::EnhancedNoise;

/// Assembles and solves the weighted eigenproblem of `L_n`.
pub fn spectrum_of(xi: &EnhancedNoise) -> Result<SpectralDecomposition> {
    eigendecompose(&assemble_weighted(xi.potential(), xi.level())?)
}
