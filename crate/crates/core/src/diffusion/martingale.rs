use serde::{Deserialize, Serialize};

use super::path::{path_rng, run_coupled_path, run_path, Drift, Member};
use crate::error::{Error, Result};
use crate::generator::apply_l_direct_values;
use crate::par::map_indices;
use crate::paracontrolled::ParacontrolledFunction;
use crate::spectral::fft::analyze_full;
use crate::spectral::FourierField;
use crate::stats::{MeanEstimate, Running};

/// Bounded functionals of the path up to time `s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    One,
    /// `sin X_s`
    Sin,
    /// `cos X_s`
    Cos,
    /// `1{X_{s/2} mod 2π ∈ [0, π)}`
    HalfCircle,
}

impl Functional {
    pub fn dictionary() -> [Self; 4] {
        [Self::One, Self::Sin, Self::Cos, Self::HalfCircle]
    }

    fn eval(self, x_s: f64, x_half: f64) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Sin => x_s.sin(),
            Self::Cos => x_s.cos(),
            Self::HalfCircle => {
                if x_half.rem_euclid(2.0 * std::f64::consts::PI) < std::f64::consts::PI {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub s: f64,
    pub t: f64,
    pub functional: Functional,
}

/// The fixed `(s, t, F)` triples used by default, one per dictionary entry.
pub fn default_triples() -> Vec<Triple> {
    let f = Functional::dictionary();
    vec![
        Triple {
            s: 0.25,
            t: 0.75,
            functional: f[0],
        },
        Triple {
            s: 0.5,
            t: 1.0,
            functional: f[1],
        },
        Triple {
            s: 0.5,
            t: 1.0,
            functional: f[2],
        },
        Triple {
            s: 0.4,
            t: 1.0,
            functional: f[3],
        },
    ]
}

/// `u(x) = slope·x + p(x)` with periodic `p`; the linear part lets `x` itself
/// be tested on unwrapped paths.
#[derive(Clone, Debug)]
pub struct TestFunction {
    pub slope: f64,
    pub periodic: FourierField,
}

impl TestFunction {
    pub fn periodic(p: FourierField) -> Self {
        Self {
            slope: 0.0,
            periodic: p,
        }
    }

    pub fn from_paracontrolled(u: &ParacontrolledFunction) -> Self {
        Self::periodic(u.u.clone())
    }
}

/// Periodic cubic Hermite table of a function and its derivative.
#[derive(Clone, Debug)]
struct Table {
    h: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl Table {
    /// From grid values of a trigonometric polynomial resolved by the grid.
    fn from_values(values: Vec<f64>) -> Self {
        let m = values.len();
        let spec = analyze_full(&values);
        let d: Vec<num_complex::Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let kk = if k < m / 2 {
                    k as f64
                } else if k > m / 2 {
                    k as f64 - m as f64
                } else {
                    0.0
                };
                c * num_complex::Complex64::new(0.0, kk)
            })
            .collect();
        let derivs = crate::spectral::fft::synthesize(&d[..=m / 2], m);
        Self {
            h: 2.0 * std::f64::consts::PI / m as f64,
            values,
            derivs,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let m = self.values.len();
        let s = x.rem_euclid(2.0 * std::f64::consts::PI) / self.h;
        let i = (s.floor() as usize).min(m - 1);
        let j = (i + 1) % m;
        let u = s - i as f64;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.values[i] + h10 * self.h * self.derivs[i] + h01 * self.values[j] + h11 * self.h * self.derivs[j]
    }
}

/// `u` and `L_n u = ½u'' + ξ_n u'` tabulated for path evaluation.
#[derive(Clone, Debug)]
struct Tabulated {
    slope: f64,
    u: Table,
    lu: Table,
}

impl Tabulated {
    fn new(f: &TestFunction, xi_n: &FourierField) -> Result<Self> {
        let band = f.periodic.kmax() + xi_n.kmax();
        let m = (32 * band).next_power_of_two().max(8192);
        let xv = xi_n.values_on(m)?;
        let mut lu = apply_l_direct_values(&f.periodic, xi_n, m)?;
        lu.iter_mut().zip(&xv).for_each(|(l, x)| *l += f.slope * x);
        Ok(Self {
            slope: f.slope,
            u: Table::from_values(f.periodic.values_on(m)?),
            lu: Table::from_values(lu),
        })
    }

    fn u(&self, x: f64) -> f64 {
        self.slope * x + self.u.eval(x)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MartingaleSpec {
    pub x0: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Combine coupled `dt` and `dt/2` runs as `2·fine − coarse`.
    pub richardson: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub n_paths: usize,
    pub triples: Vec<Triple>,
    /// `estimates[probe][triple]` of `E[(M_t − M_s) F]`.
    pub estimates: Vec<Vec<MeanEstimate>>,
    pub z_scores: Vec<Vec<f64>>,
}

impl MartingaleReport {
    pub fn max_abs_z(&self) -> f64 {
        self.z_scores.iter().flatten().fold(0.0, |a: f64, z| a.max(z.abs()))
    }
}

/// Accumulates `u(X)` and `∫L_n u(X)` along one path at a fixed step.
struct PathState<'a> {
    tables: &'a [Tabulated],
    dt: f64,
    integral: Vec<f64>,
    prev: Vec<f64>,
    /// `(step, x, integrals)` at the requested steps.
    snaps: Vec<(usize, f64, Vec<f64>)>,
}

impl<'a> PathState<'a> {
    fn new(tables: &'a [Tabulated], dt: f64) -> Self {
        Self {
            tables,
            dt,
            integral: vec![0.0; tables.len()],
            prev: vec![0.0; tables.len()],
            snaps: Vec::new(),
        }
    }

    fn visit(&mut self, k: usize, x: f64, wanted: &[usize]) {
        for (p, tab) in self.tables.iter().enumerate() {
            let lu = tab.lu.eval(x);
            if k > 0 {
                self.integral[p] += 0.5 * self.dt * (lu + self.prev[p]);
            }
            self.prev[p] = lu;
        }
        if wanted.contains(&k) {
            self.snaps.push((k, x, self.integral.clone()));
        }
    }

    fn snap(&self, k: usize) -> (f64, &[f64]) {
        let s = self
            .snaps
            .iter()
            .find(|s| s.0 == k)
            .expect("requested step was recorded");
        (s.1, &s.2)
    }

    /// `(M_t − M_s) F` for each probe and triple, flattened probe-major.
    fn statistics(&self, triples: &[Triple]) -> Vec<f64> {
        let step = |t: f64| (t / self.dt).round() as usize;
        let mut out = Vec::with_capacity(self.tables.len() * triples.len());
        for (p, tab) in self.tables.iter().enumerate() {
            for tr in triples {
                let (xs, is) = self.snap(step(tr.s));
                let (xt, it) = self.snap(step(tr.t));
                let (xh, _) = self.snap(step(0.5 * tr.s));
                let m = tab.u(xt) - tab.u(xs) - (it[p] - is[p]);
                out.push(m * tr.functional.eval(xs, xh));
            }
        }
        out
    }
}

fn steps_for(triples: &[Triple], dt: f64) -> Result<Vec<usize>> {
    let mut wanted = Vec::new();
    for tr in triples {
        if !(0.0 < tr.s && tr.s < tr.t) {
            return Err(Error::Parameter(format!("need 0 < s < t, got ({}, {})", tr.s, tr.t)));
        }
        for t in [tr.s, tr.t, 0.5 * tr.s] {
            let k = t / dt;
            if (k - k.round()).abs() > 1e-6 {
                return Err(Error::Parameter(format!("time {t} is not a multiple of dt = {dt}")));
            }
            wanted.push(k.round() as usize);
        }
    }
    wanted.sort_unstable();
    wanted.dedup();
    Ok(wanted)
}

/// Monte Carlo estimate of `E[(M_t − M_s) F(X_{[0,s]})]` for
/// `M_t = u(X_t) − u(X_0) − ∫_0^t L_n u(X_r) dr`, streamed path by path
/// (nothing is stored beyond the requested times). The integral uses the
/// trapezoid rule at the simulation step.
pub fn martingale_test(
    xi_n: &FourierField,
    probes: &[TestFunction],
    triples: &[Triple],
    spec: &MartingaleSpec,
) -> Result<MartingaleReport> {
    if spec.n_paths < 2 {
        return Err(Error::InsufficientData("need at least two paths".into()));
    }
    let drift = Drift::new(xi_n, xi_n.kmax());
    drift.check_dt(spec.dt)?;
    let tables: Vec<Tabulated> = probes.iter().map(|p| Tabulated::new(p, xi_n)).collect::<Result<_>>()?;
    let coarse_steps = steps_for(triples, spec.dt)?;
    let fine_steps = steps_for(triples, 0.5 * spec.dt)?;
    let horizon = *coarse_steps.last().unwrap_or(&0);
    let stats = map_indices(spec.n_paths, |i| {
        let mut rng = path_rng(spec.master_seed, i as u64);
        if spec.richardson {
            let mut coarse = PathState::new(&tables, spec.dt);
            let mut fine = PathState::new(&tables, 0.5 * spec.dt);
            run_coupled_path(
                &drift,
                spec.x0,
                spec.dt,
                horizon,
                &mut rng,
                |member, k, x| match member {
                    Member::Coarse => coarse.visit(k, x, &coarse_steps),
                    Member::Fine => fine.visit(k, x, &fine_steps),
                },
            );
            let c = coarse.statistics(triples);
            let f = fine.statistics(triples);
            c.iter().zip(&f).map(|(a, b)| 2.0 * b - a).collect::<Vec<f64>>()
        } else {
            let mut state = PathState::new(&tables, spec.dt);
            run_path(&drift, spec.x0, spec.dt, horizon, &mut rng, |k, x| {
                state.visit(k, x, &coarse_steps)
            });
            state.statistics(triples)
        }
    });
    let nt = triples.len();
    let mut acc = vec![Running::default(); probes.len() * nt];
    for row in &stats {
        for (a, v) in acc.iter_mut().zip(row) {
            a.push(*v);
        }
    }
    let estimates: Vec<Vec<MeanEstimate>> = acc
        .chunks(nt)
        .map(|c| c.iter().map(Running::estimate).collect())
        .collect();
    let z_scores = estimates
        .iter()
        .map(|r| r.iter().map(MeanEstimate::z).collect())
        .collect();
    Ok(MartingaleReport {
        n_paths: spec.n_paths,
        triples: triples.to_vec(),
        estimates,
        z_scores,
    })
}
