//! Periodic spectral calculus on `[0, 2π)`.

mod besov;
pub(crate) mod fft;
mod field;
mod grid;
pub mod io;
mod littlewood_paley;
mod multiplier;
mod quadrature;

pub use besov::{besov_norm, besov_profile, holder_norm, lp_norm, BesovSpec};
pub use field::FourierField;
pub use grid::PeriodicGrid;
pub use littlewood_paley::{block_of, blocks, low_pass, lp_block, max_block};
pub use multiplier::{
    apply_multiplier, gradient_symbol, heat_symbol, laplacian_symbol, parametrix_inverse, parametrix_symbol,
};
pub use quadrature::{bin_integrals, interval_integral};
