use serde::{Deserialize, Serialize};

use super::products::para;
use crate::error::{Error, Result};
use crate::noise::EnhancedNoise;
use crate::probes::probe_set;
use crate::spectral::{parametrix_inverse, FourierField};

pub const GAMMA_TOLERANCE: f64 = 1e-11;
pub const GAMMA_MAX_ITERATIONS: usize = 200;

/// `u = P̃_{∇u}(X_1 − X_1^{(N)}) + P̃_{∇u}(X_2 − X_2^{(N)}) + u♯`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParacontrolledFunction {
    pub u: FourierField,
    pub u_sharp: FourierField,
    /// Reference cutoff `N`.
    pub cutoff: usize,
    /// Level `n` of the enhanced noise the function was built against.
    pub noise_level: usize,
    pub iterations: usize,
}

/// The maps `Φ^{>N}` and `Γ^{>N}` for one enhanced noise and cutoff.
///
/// Only the combined tail source `(S_1 − S_1^{(N)}) + (S_2 − S_2^{(N)})` is
/// needed: `Φ^{>N}(u) = u + 2Δ⁻¹P_{∇u}(tail)`.
#[derive(Clone, Debug)]
pub struct DomainMap {
    cutoff: usize,
    noise_level: usize,
    tail: FourierField,
}

impl DomainMap {
    pub fn new(xi: &EnhancedNoise, cutoff: usize) -> Result<Self> {
        let n = xi.level();
        if cutoff > n {
            return Err(Error::LevelMismatch(format!(
                "cutoff N = {cutoff} exceeds noise level n = {n}"
            )));
        }
        let tail = if cutoff == n {
            FourierField::zeros(xi.grid())
        } else {
            let low = xi.truncated(cutoff)?;
            &(xi.x1().source() - low.x1().source()) + &(xi.x2().source() - low.x2().source())
        };
        Ok(Self {
            cutoff,
            noise_level: n,
            tail,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_source(&self) -> &FourierField {
        &self.tail
    }

    /// `P̃_{∇u}(X_1 − X_1^{(N)}) + P̃_{∇u}(X_2 − X_2^{(N)})`.
    pub fn control(&self, u: &FourierField) -> Result<FourierField> {
        Ok(parametrix_inverse(&para(&u.gradient(), &self.tail)?).scale(-2.0))
    }

    /// `Φ^{>N}(u) = u♯`.
    pub fn phi(&self, u: &FourierField) -> Result<FourierField> {
        Ok(u - &self.control(u)?)
    }

    /// `Γ^{>N}u♯` by fixed-point iteration from `u⁰ = u♯`.
    pub fn gamma(&self, u_sharp: &FourierField) -> Result<ParacontrolledFunction> {
        let mut u = u_sharp.clone();
        let mut first_step = None;
        for it in 1..=GAMMA_MAX_ITERATIONS {
            let next = u_sharp + &self.control(&u)?;
            let step = (&next - &u).sobolev_norm(1.0);
            let scale = next.sobolev_norm(1.0).max(1.0);
            u = next;
            if !step.is_finite() || step > 1e8 * first_step.unwrap_or(f64::MAX).max(1.0) {
                return Err(Error::Threshold {
                    cutoff: self.cutoff,
                    last_step: step,
                });
            }
            first_step.get_or_insert(step);
            if step <= GAMMA_TOLERANCE * scale {
                return Ok(ParacontrolledFunction {
                    u,
                    u_sharp: u_sharp.clone(),
                    cutoff: self.cutoff,
                    noise_level: self.noise_level,
                    iterations: it,
                });
            }
        }
        let step = (&(u_sharp + &self.control(&u)?) - &u).sobolev_norm(1.0);
        Err(Error::Threshold {
            cutoff: self.cutoff,
            last_step: step,
        })
    }

    /// `max_i ‖u_i − Φ(u_i)‖_{H^1} / ‖u_i‖_{H^1}` over the given probes.
    pub fn lipschitz_ratio(&self, probes: &[FourierField]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in probes {
            let norm = p.sobolev_norm(1.0);
            if norm > 0.0 {
                worst = worst.max(self.control(p)?.sobolev_norm(1.0) / norm);
            }
        }
        Ok(worst)
    }
}

impl ParacontrolledFunction {
    /// `‖u − P̃(...) − u♯‖_{H^1}` against the map it was built with.
    pub fn fixed_point_residual(&self, map: &DomainMap) -> Result<f64> {
        Ok((&(&self.u - &map.control(&self.u)?) - &self.u_sharp).sobolev_norm(1.0))
    }
}

pub fn phi_map(u: &FourierField, xi: &EnhancedNoise, cutoff: usize) -> Result<FourierField> {
    DomainMap::new(xi, cutoff)?.phi(u)
}

pub fn gamma_map(u_sharp: &FourierField, xi: &EnhancedNoise, cutoff: usize) -> Result<ParacontrolledFunction> {
    DomainMap::new(xi, cutoff)?.gamma(u_sharp)
}

/// One row of the cutoff sweep.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub cutoff: usize,
    pub lipschitz_ratio: f64,
}

/// Lipschitz ratios of `u ↦ u − Φ^{>N}(u)` in `H^1` on the probe set for
/// `N = 0, 1, 2, 4, …` below the noise level, stopping at the first `N`
/// whose ratio is at most 1/2.
pub fn threshold_sweep(xi: &EnhancedNoise) -> Result<Vec<ThresholdRow>> {
    let probes = probe_set(xi.grid());
    let mut rows = Vec::new();
    let mut cutoff = 0;
    while cutoff < xi.level() {
        let ratio = DomainMap::new(xi, cutoff)?.lipschitz_ratio(&probes)?;
        rows.push(ThresholdRow {
            cutoff,
            lipschitz_ratio: ratio,
        });
        if ratio <= 0.5 {
            break;
        }
        cutoff = if cutoff == 0 { 1 } else { 2 * cutoff };
    }
    Ok(rows)
}

/// Smallest cutoff of the doubling sweep with Lipschitz ratio `<= 1/2`.
pub fn estimate_n_xi(xi: &EnhancedNoise) -> Result<usize> {
    threshold_sweep(xi)?
        .into_iter()
        .find(|r| r.lipschitz_ratio <= 0.5)
        .map(|r| r.cutoff)
        .ok_or(Error::NoiseLevelTooSmall { n: xi.level() })
}
