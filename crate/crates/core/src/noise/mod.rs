//! Periodic Brownian environment and its enhancement.

mod enhanced;
mod realization;

pub use enhanced::{check_alpha, resonant_lift, solve_x1, EnhancedNoise, XiNorms, DEFAULT_ALPHA};
pub use realization::{delta_w, noise_coefficient, potential_of, sample_noise, NoiseRealization};
