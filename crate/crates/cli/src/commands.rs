use brox_core::diffusion::*;
use brox_core::generator::{apply_l_direct, graph_norm_check, resolvent_solve, GeneratorHandle};
use brox_core::noise::{delta_w, sample_noise, EnhancedNoise, NoiseRealization};
use brox_core::paracontrolled::{estimate_n_xi, threshold_sweep, DomainMap};
use brox_core::probes::smooth_probe_set;
use brox_core::spectral::FourierField;
use brox_core::spectrum::*;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Run};

type Rows = Vec<Vec<String>>;

const MIN_MEDIAN_SEEDS: u64 = 10;

fn noise(cfg: &ExperimentConfig, seed: u64) -> Result<NoiseRealization, CliError> {
    Ok(sample_noise(seed, cfg.noise.k_max)?.scaled(cfg.noise.amplitude))
}

fn enhanced(cfg: &ExperimentConfig, seed: u64, n: usize) -> Result<EnhancedNoise, CliError> {
    Ok(EnhancedNoise::enhance(
        &noise(cfg, seed)?,
        n,
        cfg.noise.alpha,
        cfg.grid(),
    )?)
}

fn handle(cfg: &ExperimentConfig, xi: EnhancedNoise) -> Result<GeneratorHandle, CliError> {
    Ok(match cfg.generator.cutoff {
        Some(c) => GeneratorHandle::new(xi, c, cfg.generator.c_shift)?,
        None => GeneratorHandle::with_estimated_cutoff(xi, cfg.generator.c_shift)?,
    })
}

fn domain(cfg: &ExperimentConfig, xi: &EnhancedNoise) -> Result<DomainMap, CliError> {
    let cutoff = match cfg.generator.cutoff {
        Some(c) => c,
        None => estimate_n_xi(xi)?,
    };
    Ok(DomainMap::new(xi, cutoff)?)
}

fn probes(cfg: &ExperimentConfig) -> Vec<FourierField> {
    let g = &cfg.generator;
    smooth_probe_set(cfg.grid(), g.probes, g.probe_decay, g.probe_kmax)
}

/// Runs `f` over the configured seeds in parallel, keeping seed order.
fn per_seed<T: Send>(
    cfg: &ExperimentConfig,
    f: impl Fn(u64) -> Result<T, CliError> + Sync,
) -> Result<Vec<(u64, T)>, CliError> {
    cfg.seeds().into_par_iter().map(|s| f(s).map(|v| (s, v))).collect()
}

fn max(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter()
        .fold(f64::NEG_INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
}

fn min(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter()
        .fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn kernel_rows(cfg: &ExperimentConfig) -> Vec<usize> {
    let (m, r) = (cfg.spectral.kernel_points, cfg.spectral.kernel_rows);
    (0..r).map(|i| i * m / r).collect()
}

fn sim_spec(cfg: &ExperimentConfig, seed: u64, x0: f64, t_end: f64, record_every: usize) -> SimulationSpec {
    SimulationSpec {
        x0,
        t_end,
        dt: cfg.mc.dt,
        n_paths: cfg.mc.n_paths,
        master_seed: seed,
        record_every,
    }
}

fn mc_env(cfg: &ExperimentConfig, seed: u64) -> Result<(EnhancedNoise, Drift, SpectralDecomposition), CliError> {
    let xi = enhanced(cfg, seed, cfg.mc.level)?;
    let drift = Drift::new(xi.xi(), cfg.mc.level);
    let dec = spectrum_of(&xi)?;
    Ok((xi, drift, dec))
}

pub fn sample_noise_cmd(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let n = cfg.max_level();
    let grid = cfg.grid();
    let res = per_seed(cfg, |s| {
        let nz = noise(cfg, s)?;
        let w = nz.potential(n, grid)?;
        Ok((nz, w))
    })?;
    let (mut coeffs, mut values): (Rows, Rows) = (Vec::new(), Vec::new());
    let mut w0: f64 = 0.0;
    for (s, (nz, w)) in &res {
        for (k, c) in nz.coeffs().iter().enumerate() {
            coeffs.push(vec![s.to_string(), (k + 1).to_string(), num(c.re), num(c.im)]);
        }
        let wv = w.values();
        w0 = w0.max(wv[0].abs());
        for (x, v) in grid.points().into_iter().zip(&wv) {
            values.push(vec![s.to_string(), num(x), num(*v)]);
        }
        run.summary(*s, n, None, "delta_w", delta_w(w));
    }
    run.table("noise.csv", "brox.noise.v1", &["seed", "k", "re", "im"], &coeffs)?;
    run.table("potential.csv", "brox.potential.v1", &["seed", "x", "w"], &values)?;
    run.check_le("potential pinned at 0", w0, 1e-12);
    Ok(())
}

pub fn enhance(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let mut levels = cfg.noise.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let res = per_seed(cfg, |s| {
        let nz = noise(cfg, s)?;
        levels
            .iter()
            .map(|&n| {
                let e = EnhancedNoise::enhance(&nz, n, cfg.noise.alpha, cfg.grid())?;
                let dist = if 2 * n <= cfg.noise.k_max {
                    EnhancedNoise::enhance(&nz, 2 * n, cfg.noise.alpha, cfg.grid())?
                        .distance(&e)?
                        .total()
                } else {
                    f64::NAN
                };
                Ok((n, e.norms(), e.solve_residual(), dist))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    let mut residual: f64 = 0.0;
    let mut by_level = vec![Vec::new(); levels.len()];
    for (s, items) in &res {
        for (i, (n, norms, r, d)) in items.iter().enumerate() {
            residual = residual.max(*r);
            let dist = if d.is_nan() { String::new() } else { num(*d) };
            rows.push(vec![
                s.to_string(),
                n.to_string(),
                num(norms.xi),
                num(norms.resonant),
                num(*r),
                dist,
            ]);
            run.summary(*s, *n, None, "xi_norm", norms.total());
            if !d.is_nan() {
                by_level[i].push(*d);
                run.summary(*s, *n, None, "distance_2n", *d);
            }
        }
    }
    run.table(
        "enhance.csv",
        "brox.enhance.v1",
        &["seed", "n", "xi_norm", "resonant_norm", "solve_residual", "distance_2n"],
        &rows,
    )?;
    let tol = run.tol().solve_residual;
    run.check_le("parametrix solve residual", residual, tol);
    let medians: Vec<f64> = by_level.into_iter().filter(|v| !v.is_empty()).map(median).collect();
    // One realisation fluctuates too much for a monotone median to mean anything.
    if medians.len() >= 2 && cfg.seeds >= MIN_MEDIAN_SEEDS {
        run.check_true(
            "median distance_2n strictly decreasing",
            medians.windows(2).all(|w| w[1] < w[0]),
        );
    }
    Ok(())
}

pub fn gamma(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let n = cfg.max_level();
    let ps = probes(cfg);
    let res = per_seed(cfg, |s| {
        let xi = enhanced(cfg, s, n)?;
        let sweep = threshold_sweep(&xi)?;
        let map = domain(cfg, &xi)?;
        let one = FourierField::constant(xi.grid(), 1.0);
        let gamma_one = map.gamma(&one)?.u.max_coeff_diff(&one);
        let mut round: f64 = 0.0;
        for p in &ps {
            let u = map.gamma(p)?;
            let back = map.gamma(&map.phi(&u.u)?)?;
            round = round.max((&back.u - &u.u).sobolev_norm(1.0) / p.sobolev_norm(1.0));
        }
        Ok((sweep, map.cutoff(), gamma_one, round))
    })?;
    let (mut rows, mut sweep_rows) = (Vec::new(), Vec::new());
    for (s, (sweep, cutoff, g1, round)) in &res {
        rows.push(vec![
            s.to_string(),
            n.to_string(),
            cutoff.to_string(),
            num(*round),
            num(*g1),
        ]);
        for r in sweep {
            sweep_rows.push(vec![s.to_string(), r.cutoff.to_string(), num(r.lipschitz_ratio)]);
        }
        run.summary(*s, n, None, "cutoff", *cutoff as f64);
        run.summary(*s, n, None, "round_trip", *round);
    }
    run.table(
        "gamma.csv",
        "brox.gamma.v1",
        &["seed", "n", "cutoff", "round_trip_h1", "gamma_one_error"],
        &rows,
    )?;
    run.table(
        "thresholds.csv",
        "brox.thresholds.v1",
        &["seed", "cutoff", "lipschitz_ratio"],
        &sweep_rows,
    )?;
    let t = *run.tol();
    run.check_le(
        "gamma/phi round trip (H1, relative)",
        max(res.iter().map(|r| r.1 .3)),
        t.round_trip,
    );
    run.check_le("gamma(1) = 1", max(res.iter().map(|r| r.1 .2)), t.gamma_one);
    Ok(())
}

pub fn generator_check(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let ps = probes(cfg);
    let res = per_seed(cfg, |s| {
        cfg.noise
            .levels
            .iter()
            .map(|&n| {
                let xi = enhanced(cfg, s, n)?;
                let h = handle(cfg, xi.clone())?;
                let mut worst: f64 = 0.0;
                for p in &ps {
                    let u = h.gamma(p)?;
                    let direct = apply_l_direct(&u.u, xi.xi())?;
                    let scale = direct.coeffs().iter().fold(1e-300_f64, |m, c| m.max(c.norm()));
                    worst = worst.max(h.apply(&u)?.max_coeff_diff(&direct) / scale);
                }
                let graph = graph_norm_check(&ps, &h)?;
                let ratios: Vec<f64> = graph.iter().map(|r| r.ratio).collect();
                Ok((n, h.cutoff(), worst, min(ratios.iter().cloned()), max(ratios)))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    for (s, items) in &res {
        for (n, cutoff, err, lo, hi) in items {
            rows.push(vec![
                s.to_string(),
                n.to_string(),
                cutoff.to_string(),
                num(*err),
                num(*lo),
                num(*hi),
            ]);
            run.summary(*s, *n, None, "exactness_error", *err);
        }
    }
    run.table(
        "generator_check.csv",
        "brox.generator_check.v1",
        &[
            "seed",
            "n",
            "cutoff",
            "max_relative_error",
            "graph_ratio_min",
            "graph_ratio_max",
        ],
        &rows,
    )?;
    let worst = max(res.iter().flat_map(|r| r.1.iter().map(|i| i.2)));
    let tol = run.tol().exactness;
    run.check_le("expanded vs direct generator (max relative error)", worst, tol);
    Ok(())
}

pub fn resolvent(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let top = cfg.max_level();
    let f = brox_core::probes::probe(cfg.grid(), brox_core::probes::PROBE_SEEDS[0], 2.0, 32);
    let res = per_seed(cfg, |s| {
        let reference = enhanced(cfg, s, top)?;
        let fine = resolvent_solve(&f, &handle(cfg, reference.clone())?)?;
        let mut rows = vec![(top, fine.iterations, fine.relative_residual, 0.0, 0.0, f64::NAN)];
        for &n in cfg.noise.levels.iter().filter(|&&n| n < top) {
            let h = handle(cfg, reference.truncated(n)?)?;
            let out = resolvent_solve(&f, &h)?;
            let err = (&fine.solution.u - &out.solution.u).sobolev_norm(1.0);
            let dist = reference.distance(h.noise())?.total();
            rows.push((n, out.iterations, out.relative_residual, err, dist, err / dist));
        }
        Ok(rows)
    })?;
    let mut table = Vec::new();
    let (mut residual, mut spread): (f64, f64) = (0.0, 1.0);
    for (s, rows) in &res {
        for &(n, it, r, err, dist, ratio) in rows {
            residual = residual.max(r);
            let ratio_s = if ratio.is_nan() { String::new() } else { num(ratio) };
            table.push(vec![
                s.to_string(),
                n.to_string(),
                it.to_string(),
                num(r),
                num(err),
                num(dist),
                ratio_s,
            ]);
            if !ratio.is_nan() {
                run.summary(*s, n, None, "error_ratio", ratio);
            }
        }
        let ratios: Vec<f64> = rows.iter().map(|r| r.5).filter(|r| !r.is_nan()).collect();
        if !ratios.is_empty() {
            spread = spread.max(max(ratios.iter().cloned()) / min(ratios.iter().cloned()));
        }
    }
    run.table(
        "resolvent.csv",
        "brox.resolvent.v1",
        &[
            "seed",
            "n",
            "iterations",
            "relative_residual",
            "error_h1",
            "xi_distance",
            "ratio",
        ],
        &table,
    )?;
    let t = *run.tol();
    run.check_le("GMRES relative residual", residual, t.gmres_residual);
    run.check_le("error / noise-distance ratio spread per seed", spread, t.ratio_spread);
    Ok(())
}

pub fn spectrum(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let res = per_seed(cfg, |s| {
        cfg.spectral
            .levels
            .iter()
            .map(|&n| Ok((n, spectrum_of(&enhanced(cfg, s, n)?)?)))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let (mut rows, mut summary) = (Vec::new(), Vec::new());
    let (mut l1, mut dev, mut gap, mut simple): (f64, f64, f64, bool) = (0.0, 0.0, f64::INFINITY, true);
    let t = *run.tol();
    for (s, items) in &res {
        for (n, dec) in items {
            for (i, l) in dec.eigenvalues.iter().take(cfg.spectral.eigencount).enumerate() {
                rows.push(vec![s.to_string(), n.to_string(), (i + 1).to_string(), num(*l)]);
            }
            let sm = dec.summary();
            summary.push(vec![
                s.to_string(),
                n.to_string(),
                num(sm.lambda1),
                num(sm.lambda2),
                num(sm.gap),
                num(sm.constant_deviation),
                num(sm.orthonormality_defect),
            ]);
            l1 = l1.max(sm.lambda1.abs());
            dev = dev.max(sm.constant_deviation);
            gap = gap.min(sm.gap);
            simple &= sm.lambda2 < -t.lambda1;
            run.summary(*s, *n, None, "gap", sm.gap);
        }
    }
    run.table(
        "eigenvalues.csv",
        "brox.eigenvalues.v1",
        &["seed", "n", "index", "lambda"],
        &rows,
    )?;
    run.table(
        "spectrum.csv",
        "brox.spectrum.v1",
        &[
            "seed",
            "n",
            "lambda1",
            "lambda2",
            "gap",
            "constant_deviation",
            "orthonormality_defect",
        ],
        &summary,
    )?;
    run.check_le("|lambda1|", l1, t.lambda1);
    run.check_le("e1 deviation from constant", dev, t.constant_mode);
    run.check_true("lambda1 simple", simple);
    if cfg.noise.amplitude > 0.0 {
        run.check_gt("spectral gap", gap, 0.0);
    }
    Ok(())
}

pub fn heat_kernel(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let n = *cfg.spectral.levels.iter().max().expect("validated");
    let m = cfg.spectral.kernel_points;
    let rows_idx = kernel_rows(cfg);
    let steps0 = cfg.generator.resolvent_steps;
    let res = per_seed(cfg, |s| {
        let xi = enhanced(cfg, s, n)?;
        let dec = spectrum_of(&xi)?;
        let kernels = cfg
            .spectral
            .times
            .iter()
            .map(|&t| heat_kernel_eigen(&dec, t, m, &rows_idx))
            .collect::<Result<Vec<_>, _>>()?;
        let t_last = *cfg.spectral.times.last().expect("validated");
        let all: Vec<usize> = (0..m).collect();
        let ck = chapman_kolmogorov_defect(
            &heat_kernel_eigen(&dec, 0.4 * t_last, m, &rows_idx)?,
            &heat_kernel_eigen(&dec, 0.6 * t_last, m, &all)?,
            &heat_kernel_eigen(&dec, t_last, m, &rows_idx)?,
        )?;
        let h = handle(cfg, xi.clone())?;
        let f = brox_core::probes::probe(cfg.grid(), brox_core::probes::PROBE_SEEDS[1], 2.0, 16);
        let exact = semigroup_apply(&dec, t_last, &f.values())?;
        let errs = [steps0, 2 * steps0, 4 * steps0]
            .into_iter()
            .map(|st| {
                let v = semigroup_resolvent_power(&h, t_last, st, &f)?.values();
                Ok((st, v.iter().zip(&exact).fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok((kernels, ck, errs))
    })?;
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let (mut values, mut checks, mut power) = (Vec::new(), Vec::new(), Vec::new());
    let (mut rs, mut db, mut ck_max, mut pos, mut halving_ok): (f64, f64, f64, f64, bool) =
        (0.0, 0.0, 0.0, f64::INFINITY, true);
    let band = run.tol().halving_band;
    for (s, (kernels, ck, errs)) in &res {
        for k in kernels {
            for (i, &r) in k.rows.iter().enumerate() {
                for (j, p) in k.row(i).iter().enumerate() {
                    values.push(vec![
                        s.to_string(),
                        num(k.t),
                        num(r as f64 * h),
                        num(j as f64 * h),
                        num(*p),
                    ]);
                }
            }
            checks.push(vec![
                s.to_string(),
                num(k.t),
                num(k.row_sum_error()),
                num(k.detailed_balance_defect()),
                num(k.min_value()),
            ]);
            rs = rs.max(k.row_sum_error());
            db = db.max(k.detailed_balance_defect());
            if k.t >= 0.5 {
                pos = pos.min(k.min_value());
            }
            run.summary(*s, n, Some(k.t), "row_sum_error", k.row_sum_error());
        }
        ck_max = ck_max.max(*ck);
        for (i, &(st, e)) in errs.iter().enumerate() {
            let ratio = if i == 0 { f64::NAN } else { errs[i - 1].1 / e };
            if i > 0 {
                halving_ok &= (ratio - 2.0).abs() <= 2.0 * band;
            }
            power.push(vec![
                s.to_string(),
                st.to_string(),
                num(e),
                if ratio.is_nan() { String::new() } else { num(ratio) },
            ]);
        }
    }
    run.table("kernel.csv", "brox.kernel.v1", &["seed", "t", "x", "y", "p"], &values)?;
    run.table(
        "kernel_checks.csv",
        "brox.kernel_checks.v1",
        &["seed", "t", "row_sum_error", "detailed_balance_defect", "min_value"],
        &checks,
    )?;
    run.table(
        "resolvent_power.csv",
        "brox.resolvent_power.v1",
        &["seed", "steps", "max_error", "halving_ratio"],
        &power,
    )?;
    let t = *run.tol();
    run.check_le("row sums", rs, t.row_sum);
    run.check_le("detailed balance", db, t.detailed_balance);
    run.check_le("Chapman-Kolmogorov", ck_max, t.chapman_kolmogorov);
    if pos.is_finite() {
        run.check_gt("positivity for t >= 0.5", pos, 0.0);
    }
    run.check_true("resolvent-power error halves as steps double", halving_ok);
    Ok(())
}

pub fn gaussian_fit(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let m = cfg.spectral.kernel_points;
    let rows_idx = kernel_rows(cfg);
    let res = per_seed(cfg, |s| {
        cfg.spectral
            .levels
            .iter()
            .map(|&n| {
                let dec = spectrum_of(&enhanced(cfg, s, n)?)?;
                let kernels = cfg
                    .spectral
                    .fit_times
                    .iter()
                    .map(|&t| heat_kernel_eigen(&dec, t, m, &rows_idx))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((n, gaussian_bound_fit(&kernels, POSITIVE_FLOOR)?))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let mut rows = Vec::new();
    let mut worst: f64 = 1.0;
    for (s, fits) in &res {
        for (n, f) in fits {
            rows.push(vec![
                s.to_string(),
                n.to_string(),
                num(f.c_upper),
                num(f.c_lower),
                f.entries.to_string(),
            ]);
            run.summary(*s, *n, None, "c_upper", f.c_upper);
            run.summary(*s, *n, None, "c_lower", f.c_lower);
        }
        for c in [
            fits.iter().map(|f| f.1.c_upper).collect::<Vec<_>>(),
            fits.iter().map(|f| f.1.c_lower).collect(),
        ] {
            worst = worst.max(max(c.iter().cloned()) / median(c));
        }
    }
    run.table(
        "gaussian_fit.csv",
        "brox.gaussian_fit.v1",
        &["seed", "n", "c_upper", "c_lower", "entries"],
        &rows,
    )?;
    let tol = run.tol().fit_uniformity;
    run.check_le("constants uniform in n (max / median per seed)", worst, tol);
    Ok(())
}

pub fn invariant(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let n = cfg.mc.level;
    let m = cfg.spectral.kernel_points;
    let res = per_seed(cfg, |s| {
        let (xi, drift, dec) = mc_env(cfg, s)?;
        let mu = invariant_measure(xi.xi(), xi.potential(), m)?;
        let mu_bins = mu_probabilities(&dec.weight, &Arc::bins(cfg.mc.bins));
        let spec = sim_spec(cfg, s, cfg.mc.x0, cfg.mc.t_end, cfg.mc.record_every);
        let reps = cfg.mc.bootstrap_reps;
        let rep = if cfg.mc.richardson {
            let (c, f) = simulate_em_coupled(&drift, &spec)?;
            occupation_vs_mu(Sampled::coupled(&c, &f)?, cfg.mc.burn_in, &mu_bins, reps, s)?
        } else {
            occupation_vs_mu(
                Sampled::Single(&simulate_em(&drift, &spec)?),
                cfg.mc.burn_in,
                &mu_bins,
                reps,
                s,
            )?
        };
        Ok((mu, rep))
    })?;
    let (mut density, mut occ) = (Vec::new(), Vec::new());
    let (mut adj, mut within) = (0.0_f64, true);
    let k = run.tol().bootstrap_k;
    for (s, (mu, rep)) in &res {
        for (j, d) in mu.density.iter().enumerate() {
            density.push(vec![
                s.to_string(),
                num(2.0 * std::f64::consts::PI * j as f64 / m as f64),
                num(*d),
            ]);
        }
        occ.push(vec![
            s.to_string(),
            rep.samples.to_string(),
            num(mu.adjoint_residual),
            num(mu.stationarity_defect),
            num(rep.tv),
            num(rep.floor_mean),
            num(rep.floor_sd),
        ]);
        adj = adj.max(mu.adjoint_residual);
        within &= rep.within(k);
        run.summary(*s, n, None, "occupation_tv", rep.tv);
        run.summary(*s, n, None, "occupation_excess", rep.excess());
    }
    run.table("density.csv", "brox.density.v1", &["seed", "x", "density"], &density)?;
    run.table(
        "occupation.csv",
        "brox.occupation.v1",
        &[
            "seed",
            "samples",
            "adjoint_residual",
            "stationarity_defect",
            "tv",
            "floor_mean",
            "floor_sd",
        ],
        &occ,
    )?;
    let tol = run.tol().adjoint;
    run.check_le("adjoint residual", adj, tol);
    run.check_true("occupation TV within bootstrap band", within);
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let res = per_seed(cfg, |s| {
        let (_, drift, _) = mc_env(cfg, s)?;
        Ok(simulate_em(
            &drift,
            &sim_spec(cfg, s, cfg.mc.x0, cfg.mc.t_end, cfg.mc.record_every),
        )?)
    })?;
    let mut rows = Vec::new();
    let mut finite = true;
    for (s, ens) in &res {
        let stem = format!("paths_s{s}");
        save_ensemble(&run.dir().join(&stem), ens)?;
        run.record_output(
            &format!("{stem}.bin"),
            "brox.ensemble.v1",
            &["f64 le, n_paths x n_records"],
        );
        finite &= ens.all_finite();
        let last = ens.at(ens.n_records() - 1);
        for (i, x) in last.iter().enumerate() {
            rows.push(vec![s.to_string(), i.to_string(), num(*x)]);
        }
        let mean = last.iter().sum::<f64>() / last.len() as f64;
        run.summary(*s, cfg.mc.level, Some(cfg.mc.t_end), "terminal_mean", mean);
    }
    run.table("terminal.csv", "brox.terminal.v1", &["seed", "path", "x"], &rows)?;
    run.check_true("all positions finite", finite);
    Ok(())
}

pub fn mixing(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let m = cfg.spectral.kernel_points;
    let res = per_seed(cfg, |s| {
        let (_, drift, dec) = mc_env(cfg, s)?;
        let fit = mixing_rate_kernel(&dec, m)?;
        let gap = dec.gap();
        let x0 = mixing_start(&dec, m)?;
        let step = cfg.mc.dt * cfg.mc.record_every as f64;
        let t_hi = (3.0 / gap / step).ceil() * step;
        let ens = simulate_em(&drift, &sim_spec(cfg, s, x0, t_hi, cfg.mc.record_every))?;
        let mc = mixing_rate_mc(
            Sampled::Single(&ens),
            &dec,
            cfg.mc.bins,
            1.0 / gap,
            t_hi,
            cfg.mc.bootstrap_reps,
            s,
        )?;
        Ok((fit, gap, mc))
    })?;
    let (mut rows, mut decay, mut mc_rows) = (Vec::new(), Vec::new(), Vec::new());
    let t = *run.tol();
    let (mut worst, mut consistent): (f64, bool) = (0.0, true);
    for (s, (fit, gap, mc)) in &res {
        let within = fit.relative_error <= t.mixing_relative;
        rows.push(vec![
            s.to_string(),
            cfg.mc.level.to_string(),
            num(fit.c),
            num(fit.rate),
            num(*gap),
            num(fit.relative_error),
            within.to_string(),
            num(mc.rate_mc),
            num(mc.rate_sd),
        ]);
        for (tt, tv) in fit.times.iter().zip(&fit.tv) {
            decay.push(vec![s.to_string(), num(*tt), num(*tv)]);
        }
        for r in &mc.rows {
            mc_rows.push(vec![
                s.to_string(),
                num(r.t),
                num(r.tv_mc),
                num(r.tv_kernel),
                num(r.tv_to_kernel),
                num(r.floor_mean),
                num(r.floor_sd),
            ]);
        }
        worst = worst.max(fit.relative_error);
        consistent &= mc.consistent(t.bootstrap_k);
        run.summary(*s, cfg.mc.level, None, "rate_relative_error", fit.relative_error);
    }
    run.table(
        "mixing.csv",
        "brox.mixing.v1",
        &[
            "seed",
            "n",
            "c",
            "rate",
            "gap",
            "relative_error",
            "within_tolerance",
            "rate_mc",
            "rate_mc_sd",
        ],
        &rows,
    )?;
    run.table("tv_decay.csv", "brox.tv_decay.v1", &["seed", "t", "tv"], &decay)?;
    run.table(
        "mixing_mc.csv",
        "brox.mixing_mc.v1",
        &[
            "seed",
            "t",
            "tv_mc",
            "tv_kernel",
            "tv_to_kernel",
            "floor_mean",
            "floor_sd",
        ],
        &mc_rows,
    )?;
    run.check_le("kernel decay rate vs gap (relative)", worst, t.mixing_relative);
    run.check_true("Monte Carlo route within bootstrap bands", consistent);
    Ok(())
}

pub fn holder(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let res = per_seed(cfg, |s| {
        let (_, drift, _) = mc_env(cfg, s)?;
        let ens = simulate_em(&drift, &sim_spec(cfg, s, cfg.mc.x0, cfg.mc.holder_horizon, 1))?;
        Ok(holder_exponent(&ens)?)
    })?;
    let mut rows = Vec::new();
    let band = run.tol().holder_band;
    let mut ok = true;
    for (s, fit) in &res {
        for (lag, msd) in fit.lags.iter().zip(&fit.msd) {
            rows.push(vec![s.to_string(), num(*lag), num(*msd), num(fit.exponent)]);
        }
        ok &= (fit.exponent - 0.5).abs() <= band;
        run.summary(*s, cfg.mc.level, None, "holder_exponent", fit.exponent);
    }
    run.table(
        "holder.csv",
        "brox.holder.v1",
        &["seed", "lag", "msd", "exponent"],
        &rows,
    )?;
    run.check_true(format!("Hölder exponent within 0.5 ± {band}"), ok);
    Ok(())
}

pub fn martingale(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let triples = default_triples();
    let res = per_seed(cfg, |s| {
        let (xi, _, _) = mc_env(cfg, s)?;
        let map = DomainMap::new(&xi, cfg.mc.cutoff)?;
        let tests = probes(cfg)
            .iter()
            .map(|p| Ok(TestFunction::from_paracontrolled(&map.gamma(p)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let ms = MartingaleSpec {
            x0: cfg.mc.x0,
            dt: cfg.mc.dt,
            n_paths: cfg.mc.n_paths,
            master_seed: s,
            richardson: cfg.mc.richardson,
        };
        Ok(martingale_test(xi.xi(), &tests, &triples, &ms)?)
    })?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (s, rep) in &res {
        for (p, (est, zs)) in rep.estimates.iter().zip(&rep.z_scores).enumerate() {
            for ((tr, e), z) in triples.iter().zip(est).zip(zs) {
                rows.push(vec![
                    s.to_string(),
                    p.to_string(),
                    num(tr.s),
                    num(tr.t),
                    format!("{:?}", tr.functional),
                    num(e.mean),
                    num(e.std_error),
                    num(*z),
                ]);
            }
        }
        worst = worst.max(rep.max_abs_z());
        run.summary(*s, cfg.mc.level, None, "max_abs_z", rep.max_abs_z());
    }
    run.table(
        "martingale.csv",
        "brox.martingale.v1",
        &["seed", "probe", "s", "t", "functional", "estimate", "std_error", "z"],
        &rows,
    )?;
    let tol = run.tol().z_max;
    run.check_le("max |z|", worst, tol);
    Ok(())
}

pub fn fdd(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let times = cfg.mc.fdd_times.clone();
    let arcs = Arc::halves();
    let res = per_seed(cfg, |s| {
        let (_, drift, dec) = mc_env(cfg, s)?;
        let expected = fdd_expected(&dec, cfg.mc.x0, &times, &arcs)?;
        let t_end = *times.last().expect("validated");
        let every = ((times[0] / cfg.mc.dt).round() as usize).max(1);
        let spec = sim_spec(cfg, s, cfg.mc.x0, t_end, every);
        let rep = if cfg.mc.richardson {
            let (c, f) = simulate_em_coupled(&drift, &spec)?;
            fdd_check(Sampled::coupled(&c, &f)?, &times, &arcs, &expected)?
        } else {
            fdd_check(Sampled::Single(&simulate_em(&drift, &spec)?), &times, &arcs, &expected)?
        };
        Ok(rep)
    })?;
    let (mut rows, mut tests) = (Vec::new(), Vec::new());
    let mut p_min: f64 = 1.0;
    for (s, rep) in &res {
        for (cell, ((o, e), z)) in rep.observed.iter().zip(&rep.expected).zip(&rep.z_scores).enumerate() {
            rows.push(vec![s.to_string(), cell.to_string(), num(*o), num(*e), num(*z)]);
        }
        tests.push(vec![
            s.to_string(),
            rep.n_paths.to_string(),
            num(rep.chi_square),
            rep.dof.to_string(),
            num(rep.p_value),
        ]);
        p_min = p_min.min(rep.p_value);
        run.summary(*s, cfg.mc.level, None, "fdd_p_value", rep.p_value);
    }
    run.table(
        "fdd_cells.csv",
        "brox.fdd_cells.v1",
        &["seed", "cell", "observed", "expected", "z"],
        &rows,
    )?;
    run.table(
        "fdd.csv",
        "brox.fdd.v1",
        &["seed", "n_paths", "chi_square", "dof", "p_value"],
        &tests,
    )?;
    let tol = run.tol().p_min;
    run.check_ge("chi-square p-value", p_min, tol);
    Ok(())
}
