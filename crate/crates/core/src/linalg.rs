//! Small linear-algebra helpers not covered by nalgebra.

/// Outcome of a GMRES solve.
#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖` as tracked by the Arnoldi recurrence.
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted, right-preconditioned GMRES for `A x = b` starting from zero.
///
/// `precond` applies `M⁻¹`; the iteration runs on `A M⁻¹ y = b` and returns
/// `x = M⁻¹ y`. Classical Gram–Schmidt with one reorthogonalisation pass.
pub fn gmres(
    apply: &mut dyn FnMut(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut total = 0;
    let mut rel = 1.0;
    while total < max_iter {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            return GmresOutcome {
                x,
                iterations: total,
                relative_residual: rel,
                converged: true,
            };
        }
        let m = restart.min(max_iter - total);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for j in 0..m {
            let mut w = apply(&precond(&v[j]));
            total += 1;
            for _ in 0..2 {
                for (i, vi) in v.iter().enumerate() {
                    let hij = dot(&w, vi);
                    h[i][j] += hij;
                    w.iter_mut().zip(vi).for_each(|(wk, vk)| *wk -= hij * vk);
                }
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = h[j][j].hypot(h[j + 1][j]);
            cs[j] = h[j][j] / denom;
            sn[j] = h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k_used = j + 1;
            rel = g[j + 1].abs() / bnorm;
            if rel <= tol || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|l| h[i][l] * y[l]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            z.iter_mut().zip(vi).for_each(|(zk, vk)| *zk += yi * vk);
        }
        let dx = precond(&z);
        x.iter_mut().zip(&dx).for_each(|(xk, dk)| *xk += dk);
    }
    let ax = apply(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    rel = rel.max(norm(&r) / bnorm);
    GmresOutcome {
        x,
        iterations: total,
        relative_residual: rel,
        converged: rel <= tol,
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let a = [[4.0, 1.0, 0.0], [-2.0, 3.0, 1.0], [0.5, 0.0, 2.0]];
        let mut apply = |x: &[f64]| -> Vec<f64> {
            a.iter()
                .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
                .collect()
        };
        let b = [1.0, 2.0, 3.0];
        let out = gmres(&mut apply, &|v| v.to_vec(), &b, 1e-13, 2, 50);
        assert!(out.converged);
        let ax = apply(&out.x);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 1.5 - 0.25 * v).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 1.5).abs() < 1e-14 && (b + 0.25).abs() < 1e-14);
    }
}
