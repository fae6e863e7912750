//! Euler–Maruyama simulation of `dX = ξ_n(X)dt + dB` and Monte Carlo checks
//! against the spectral side: occupation, mixing, path regularity, the
//! martingale problem and finite-dimensional laws.

mod fdd;
mod holder;
mod io;
mod martingale;
mod mixing;
mod occupation;
mod path;

pub use fdd::{fdd_check, fdd_expected, FddReport};
pub use holder::{holder_exponent, holder_exponent_window, mean_squared_increment, HolderFit};
pub use io::{load_ensemble, save_ensemble};
pub use martingale::{
    default_triples, martingale_test, Functional, MartingaleReport, MartingaleSpec, TestFunction, Triple,
};
pub use mixing::{
    fit_exponential, mixing_rate_kernel, mixing_rate_mc, mixing_start, tv_decay_kernel, McMixingReport, McMixingRow,
    MixingFit,
};
pub use occupation::{compare_histograms, occupation_vs_mu, DistanceReport, Sampled};
pub use path::{
    path_rng, run_coupled_path, run_path, simulate_em, simulate_em_coupled, Drift, Member, PathEnsemble, SimulationSpec,
};
