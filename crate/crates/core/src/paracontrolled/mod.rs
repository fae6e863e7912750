//! Bony paraproducts, intertwined paraproducts, correctors and the domain
//! parametrisation `Φ^{>N}` / `Γ^{>N}`.

mod correctors;
mod domain;
mod products;
mod sourced;

pub use correctors::{corrector_cnabla, corrector_s, corrector_s_nabla, para_tilde};
pub use domain::{
    estimate_n_xi, gamma_map, phi_map, threshold_sweep, DomainMap, ParacontrolledFunction, ThresholdRow,
    GAMMA_MAX_ITERATIONS, GAMMA_TOLERANCE,
};
pub use products::{para, product, resonant};
pub use sourced::SourcedField;
