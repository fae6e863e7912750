//! The generator `L = ½Δ + ξ·∇` in paracontrolled form, its finite-level
//! direct form, the quadratic form and the resolvent.

mod expanded;
mod resolvent;

pub use expanded::{
    apply_l_direct, apply_l_direct_values, apply_l_expanded, expanded_terms, DefectVariant, ExpandedTerms,
};
pub use resolvent::{dense_generator, dense_resolvent, resolvent_solve, ResolventOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::EnhancedNoise;
use crate::paracontrolled::{estimate_n_xi, DomainMap, ParacontrolledFunction};
use crate::spectral::fft::analyze_full;
use crate::spectral::FourierField;
use crate::weight::ExpWeight;

/// Enhanced noise, reference cutoff and resolvent shift.
#[derive(Clone, Debug)]
pub struct GeneratorHandle {
    xi: EnhancedNoise,
    map: DomainMap,
    c_shift: f64,
    defect: DefectVariant,
}

impl GeneratorHandle {
    /// Requires `cutoff >= N_Ξ` and `c_shift > 0`.
    pub fn new(xi: EnhancedNoise, cutoff: usize, c_shift: f64) -> Result<Self> {
        let threshold = estimate_n_xi(&xi).unwrap_or(xi.level());
        if cutoff < threshold {
            return Err(Error::Threshold {
                cutoff,
                last_step: f64::NAN,
            });
        }
        Self::unchecked(xi, cutoff, c_shift)
    }

    /// Uses the estimated `N_Ξ` (or `n` if the sweep is exhausted).
    pub fn with_estimated_cutoff(xi: EnhancedNoise, c_shift: f64) -> Result<Self> {
        let cutoff = estimate_n_xi(&xi).unwrap_or(xi.level());
        Self::unchecked(xi, cutoff, c_shift)
    }

    fn unchecked(xi: EnhancedNoise, cutoff: usize, c_shift: f64) -> Result<Self> {
        if !(c_shift > 0.0 && c_shift.is_finite()) {
            return Err(Error::Parameter(format!(
                "resolvent shift c = {c_shift} must be positive"
            )));
        }
        let map = DomainMap::new(&xi, cutoff)?;
        Ok(Self {
            xi,
            map,
            c_shift,
            defect: DefectVariant::Source,
        })
    }

    /// Same noise and cutoff with another resolvent shift.
    pub fn with_shift(&self, c_shift: f64) -> Result<Self> {
        let mut h = self.clone();
        if !(c_shift > 0.0 && c_shift.is_finite()) {
            return Err(Error::Parameter(format!(
                "resolvent shift c = {c_shift} must be positive"
            )));
        }
        h.c_shift = c_shift;
        Ok(h)
    }

    pub fn with_defect(mut self, defect: DefectVariant) -> Self {
        self.defect = defect;
        self
    }

    pub fn noise(&self) -> &EnhancedNoise {
        &self.xi
    }

    pub fn domain(&self) -> &DomainMap {
        &self.map
    }

    pub fn cutoff(&self) -> usize {
        self.map.cutoff()
    }

    pub fn c_shift(&self) -> f64 {
        self.c_shift
    }

    pub fn defect(&self) -> DefectVariant {
        self.defect
    }

    pub fn gamma(&self, u_sharp: &FourierField) -> Result<ParacontrolledFunction> {
        self.map.gamma(u_sharp)
    }

    pub fn apply(&self, u: &ParacontrolledFunction) -> Result<FourierField> {
        apply_l_expanded(u, self)
    }
}

/// `⟨−L_n u, v⟩_{L²(e^{2W_n})}`, evaluated without truncating `L_n u` so the
/// quadrature is exact up to the resolved weight tail.
pub fn form_value(u: &FourierField, v: &FourierField, xi: &EnhancedNoise) -> Result<f64> {
    let weight = ExpWeight::new(xi.potential(), 2.0, 3 * u.kmax())?;
    form_value_with(u, v, xi.xi(), &weight)
}

pub fn form_value_with(u: &FourierField, v: &FourierField, xi: &FourierField, weight: &ExpWeight) -> Result<f64> {
    u.check_grid(v)?;
    let m = (6 * u.kmax() + 2).next_power_of_two();
    let lu = apply_l_direct_values(u, xi, m)?;
    let g: Vec<f64> = lu.iter().zip(v.values_on(m)?).map(|(a, b)| -a * b).collect();
    let spec = analyze_full(&g);
    Ok(weight.integrate_against(&spec[..=m / 2]))
}

/// `½ ∫ u' v' e^{2W}`, the integration-by-parts form of [`form_value`].
pub fn dirichlet_form(u: &FourierField, v: &FourierField, weight: &ExpWeight) -> Result<f64> {
    u.check_grid(v)?;
    let m = (4 * u.kmax() + 2).next_power_of_two();
    let du = u.gradient().values_on(m)?;
    let dv = v.gradient().values_on(m)?;
    let g: Vec<f64> = du.iter().zip(&dv).map(|(a, b)| 0.5 * a * b).collect();
    let spec = analyze_full(&g);
    Ok(weight.integrate_against(&spec[..=m / 2]))
}

/// One row of the `‖LΓu♯ − L_nΓ_nu♯‖` table.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub error_l2: f64,
    pub xi_distance: f64,
    pub ratio: f64,
    pub form_difference: f64,
}

/// Compares `L_nΓ_n u♯` against the finest level `Ξ_ref` for each `n` in
/// `levels`, with Γ at cutoff `min(N, n)`.
pub fn convergence_table(
    u_sharp: &FourierField,
    reference: &EnhancedNoise,
    cutoff: usize,
    levels: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    let fine_map = DomainMap::new(reference, cutoff.min(reference.level()))?;
    let fine_u = fine_map.gamma(u_sharp)?;
    let fine_lu = apply_l_expanded_raw(&fine_u, reference, DefectVariant::Source)?;
    let fine_form = -fine_lu.inner(&fine_u.u);
    let mut rows = Vec::with_capacity(levels.len());
    for &n in levels {
        let xi_n = reference.truncated(n)?;
        let map = DomainMap::new(&xi_n, cutoff.min(n))?;
        let u_n = map.gamma(u_sharp)?;
        let lu_n = apply_l_expanded_raw(&u_n, &xi_n, DefectVariant::Source)?;
        let err = (&fine_lu - &lu_n).l2_norm();
        let dist = reference.distance(&xi_n)?.total();
        let form_n = -lu_n.inner(&u_n.u);
        rows.push(ConvergenceRow {
            n,
            error_l2: err,
            xi_distance: dist,
            ratio: if dist > 0.0 { err / dist } else { 0.0 },
            form_difference: (form_n - fine_form).abs(),
        });
    }
    Ok(rows)
}

pub(crate) use expanded::apply_l_expanded_raw;

/// One row of the graph-norm comparison.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraphNormRow {
    pub domain_norm: f64,
    pub graph_norm: f64,
    pub ratio: f64,
}

/// `‖u‖_D = (‖u‖² + ‖Φ(u)‖²_{H²})^{1/2}` against `‖u‖_L = (‖u‖² + ‖Lu‖²)^{1/2}`
/// for `u = Γu♯` over the probes.
pub fn graph_norm_check(probes: &[FourierField], h: &GeneratorHandle) -> Result<Vec<GraphNormRow>> {
    probes
        .iter()
        .map(|p| {
            let u = h.gamma(p)?;
            let l2 = u.u.l2_norm();
            let domain = (l2 * l2 + h.domain().phi(&u.u)?.sobolev_norm(2.0).powi(2)).sqrt();
            let graph = (l2 * l2 + h.apply(&u)?.l2_norm().powi(2)).sqrt();
            Ok(GraphNormRow {
                domain_norm: domain,
                graph_norm: graph,
                ratio: domain / graph,
            })
        })
        .collect()
}
