use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseRealization;
use crate::par::map_indices;
use crate::spectral::FourierField;

/// `ξ_n` as a trigonometric polynomial evaluable at any real point.
#[derive(Clone, Debug)]
pub struct Drift {
    coeffs: Vec<Complex64>,
}

impl Drift {
    /// Modes `1..=n` of a field (the mean is discarded).
    pub fn new(xi: &FourierField, n: usize) -> Self {
        let top = n.min(xi.kmax());
        Self::trimmed((1..=top).map(|k| xi.coeff(k as i64)).collect())
    }

    pub fn from_noise(noise: &NoiseRealization, n: usize) -> Self {
        let top = n.min(noise.k_max());
        Self::trimmed((1..=top).map(|k| noise.coeff(k as i64)).collect())
    }

    fn trimmed(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn level(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.coeffs.is_empty() {
            return 0.0;
        }
        let (s, c) = x.sin_cos();
        let step = Complex64::new(c, s);
        let mut phase = step;
        let mut acc = 0.0;
        for a in &self.coeffs {
            acc += a.re * phase.re - a.im * phase.im;
            phase *= step;
        }
        2.0 * acc
    }

    /// Maximum over a grid oversampling the top mode 16 times.
    pub fn sup_norm(&self) -> f64 {
        let m = 16 * (self.level() + 1);
        (0..m)
            .map(|j| self.eval(2.0 * std::f64::consts::PI * j as f64 / m as f64).abs())
            .fold(0.0, f64::max)
    }

    /// Largest step allowed by `dt <= 0.1 / (1 + ‖ξ_n‖²_∞)`.
    pub fn max_dt(&self) -> f64 {
        0.1 / (1.0 + self.sup_norm().powi(2))
    }

    pub fn check_dt(&self, dt: f64) -> Result<()> {
        let bound = self.max_dt();
        if !(dt > 0.0 && dt <= bound) {
            return Err(Error::Stability { dt, bound });
        }
        Ok(())
    }
}

/// Run parameters for an Euler–Maruyama ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub x0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Positions are stored every `record_every` steps.
    pub record_every: usize,
}

impl SimulationSpec {
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.record_every == 0 {
            return Err(Error::Parameter("n_paths and record_every must be positive".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("horizon T = {} must be positive", self.t_end)));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::Parameter(format!(
                "T = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(())
    }
}

/// Stream of path `index` under `master_seed`.
pub fn path_rng(master_seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Runs one Euler–Maruyama path and calls `visit(step, x)` for `step = 0..=steps`.
pub fn run_path(
    drift: &Drift,
    x0: f64,
    dt: f64,
    steps: usize,
    rng: &mut ChaCha20Rng,
    mut visit: impl FnMut(usize, f64),
) {
    let sq = dt.sqrt();
    let mut x = x0;
    visit(0, x);
    for k in 1..=steps {
        let z: f64 = StandardNormal.sample(rng);
        x += drift.eval(x) * dt + sq * z;
        visit(k, x);
    }
}

/// Which member of a coupled pair a visited state belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Member {
    Coarse,
    Fine,
}

/// Runs a path at step `dt` and its refinement at `dt/2` on the same Brownian
/// path: each coarse increment is the sum of two fine ones. `visit` sees every
/// fine step and every coarse step, with the step index of its own member.
pub fn run_coupled_path(
    drift: &Drift,
    x0: f64,
    dt: f64,
    coarse_steps: usize,
    rng: &mut ChaCha20Rng,
    mut visit: impl FnMut(Member, usize, f64),
) {
    let half = 0.5 * dt;
    let sq = half.sqrt();
    let (mut xc, mut xf) = (x0, x0);
    visit(Member::Coarse, 0, xc);
    visit(Member::Fine, 0, xf);
    for k in 1..=coarse_steps {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        xf += drift.eval(xf) * half + sq * z1;
        visit(Member::Fine, 2 * k - 1, xf);
        xf += drift.eval(xf) * half + sq * z2;
        visit(Member::Fine, 2 * k, xf);
        xc += drift.eval(xc) * dt + sq * (z1 + z2);
        visit(Member::Coarse, k, xc);
    }
}

/// Recorded unwrapped positions of independent paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathEnsemble {
    pub level: usize,
    pub spec: SimulationSpec,
    /// Row-major `n_paths × n_records`.
    positions: Vec<f64>,
    n_records: usize,
}

impl PathEnsemble {
    pub fn from_positions(level: usize, spec: SimulationSpec, positions: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let n_records = spec.steps() / spec.record_every + 1;
        if positions.len() != n_records * spec.n_paths {
            return Err(Error::Format(format!(
                "expected {} positions, found {}",
                n_records * spec.n_paths,
                positions.len()
            )));
        }
        Ok(Self {
            level,
            spec,
            positions,
            n_records,
        })
    }

    pub fn n_paths(&self) -> usize {
        self.spec.n_paths
    }

    pub fn n_records(&self) -> usize {
        self.n_records
    }

    /// Time between stored positions.
    pub fn record_dt(&self) -> f64 {
        self.spec.dt * self.spec.record_every as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_records).map(|r| r as f64 * self.record_dt()).collect()
    }

    /// Index of the stored time closest to `t`.
    pub fn record_index(&self, t: f64) -> Result<usize> {
        let r = (t / self.record_dt()).round();
        if !(0.0..self.n_records as f64).contains(&r) || (r * self.record_dt() - t).abs() > 1e-9 * t.max(1.0) {
            return Err(Error::Parameter(format!("time {t} is not a recorded time")));
        }
        Ok(r as usize)
    }

    pub fn path(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n_records..(i + 1) * self.n_records]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Positions of every path at record `r`.
    pub fn at(&self, r: usize) -> Vec<f64> {
        (0..self.n_paths()).map(|i| self.path(i)[r]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.positions.iter().all(|x| x.is_finite())
    }
}

/// Euler–Maruyama ensemble `X_{k+1} = X_k + ξ_n(X_k)dt + √dt N(0,1)`.
pub fn simulate_em(drift: &Drift, spec: &SimulationSpec) -> Result<PathEnsemble> {
    spec.validate()?;
    drift.check_dt(spec.dt)?;
    let steps = spec.steps();
    let every = spec.record_every;
    let rows = map_indices(spec.n_paths, |i| {
        let mut rng = path_rng(spec.master_seed, i as u64);
        let mut row = Vec::with_capacity(steps / every + 1);
        run_path(drift, spec.x0, spec.dt, steps, &mut rng, |k, x| {
            if k % every == 0 {
                row.push(x);
            }
        });
        row
    });
    PathEnsemble::from_positions(drift.level(), *spec, rows.concat())
}

/// Coupled ensembles at `dt` and `dt/2` sharing Brownian paths and record
/// times; `spec.dt` is the coarse step.
pub fn simulate_em_coupled(drift: &Drift, spec: &SimulationSpec) -> Result<(PathEnsemble, PathEnsemble)> {
    spec.validate()?;
    drift.check_dt(spec.dt)?;
    let steps = spec.steps();
    let every = spec.record_every;
    let rows = map_indices(spec.n_paths, |i| {
        let mut rng = path_rng(spec.master_seed, i as u64);
        let mut coarse = Vec::with_capacity(steps / every + 1);
        let mut fine = Vec::with_capacity(steps / every + 1);
        run_coupled_path(drift, spec.x0, spec.dt, steps, &mut rng, |member, k, x| match member {
            Member::Coarse if k % every == 0 => coarse.push(x),
            Member::Fine if k % (2 * every) == 0 => fine.push(x),
            _ => {}
        });
        (coarse, fine)
    });
    let (coarse, fine): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let fine_spec = SimulationSpec {
        dt: 0.5 * spec.dt,
        record_every: 2 * spec.record_every,
        ..*spec
    };
    Ok((
        PathEnsemble::from_positions(drift.level(), *spec, coarse.concat())?,
        PathEnsemble::from_positions(drift.level(), fine_spec, fine.concat())?,
    ))
}
