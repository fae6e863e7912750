//! Monte Carlo summaries: means with standard errors, histograms, distances
//! between discrete laws and path bootstrap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl MeanEstimate {
    /// `mean / std_error` (0 when both vanish).
    pub fn z(&self) -> f64 {
        if self.std_error > 0.0 {
            self.mean / self.std_error
        } else if self.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY * self.mean.signum()
        }
    }
}

/// Welford accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Running {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Running {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn estimate(&self) -> MeanEstimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        MeanEstimate {
            mean: self.mean,
            std_error: (var / self.n.max(1) as f64).sqrt(),
            count: self.n,
        }
    }
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let mut r = Running::default();
    xs.iter().for_each(|&x| r.push(x));
    r.estimate()
}

/// Sample standard deviation.
pub fn sample_sd(xs: &[f64]) -> f64 {
    let e = mean_estimate(xs);
    e.std_error * (e.count as f64).sqrt()
}

/// Bin index of a point of the circle for `bins` equal bins on `[0, 2π)`.
pub fn circle_bin(x: f64, bins: usize) -> usize {
    let u = x.rem_euclid(2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI);
    ((u * bins as f64) as usize).min(bins - 1)
}

pub fn normalize(counts: &[f64]) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    counts.iter().map(|c| c / total).collect()
}

/// `½ Σ |p_i − q_i|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Kolmogorov distance between two laws on the same bins, at bin edges.
pub fn ks_binned(p: &[f64], q: &[f64]) -> f64 {
    let (mut a, mut b, mut worst) = (0.0, 0.0, 0.0_f64);
    for (x, y) in p.iter().zip(q) {
        a += x;
        b += y;
        worst = worst.max((a - b).abs());
    }
    worst
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut worst) = (0, 0, 0.0_f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    worst
}

/// Asymptotic two-sample KS threshold `c(α) √((n+m)/(nm))` at level α.
pub fn ks_critical(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Resamples whole rows (paths) with replacement and returns the statistic
/// for each of `reps` replicates.
pub fn bootstrap_rows<T>(rows: &[T], reps: usize, seed: u64, stat: impl Fn(&[&T]) -> f64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = rows.len();
    let mut pick: Vec<&T> = Vec::with_capacity(n);
    (0..reps)
        .map(|_| {
            pick.clear();
            for _ in 0..n {
                pick.push(&rows[rng.random_range(0..n)]);
            }
            stat(&pick)
        })
        .collect()
}
