mod common;

use brox_core::generator::*;
use brox_core::noise::{sample_noise, EnhancedNoise};
use brox_core::paracontrolled::{estimate_n_xi, DomainMap};
use brox_core::probes::{probe, smooth_probe_set};
use brox_core::spectral::*;
use brox_core::weight::ExpWeight;
use common::random_field;

fn env_on(g: PeriodicGrid, seed: u64, n: usize) -> EnhancedNoise {
    EnhancedNoise::enhance(&sample_noise(seed, g.k()).unwrap(), n, 1.45, g).unwrap()
}

fn env(seed: u64, n: usize) -> EnhancedNoise {
    env_on(PeriodicGrid::new(1024, 341).unwrap(), seed, n)
}

fn rel(a: &FourierField, b: &FourierField) -> f64 {
    a.max_coeff_diff(b) / b.coeffs().iter().fold(1e-300_f64, |m, c| m.max(c.norm()))
}

#[test]
fn generator_kills_constants() {
    let xi = env(1, 128);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
    let one = FourierField::constant(xi.grid(), 1.0);
    let u = h.gamma(&one).unwrap();
    assert!(h.apply(&u).unwrap().sup_norm() < 1e-10);
    assert!(apply_l_direct(&one, xi.xi()).unwrap().sup_norm() < 1e-15);
}

#[test]
fn direct_pure_laplacian() {
    let g = PeriodicGrid::new(64, 21).unwrap();
    let u = FourierField::from_fn(g, f64::sin);
    let out = apply_l_direct(&u, &FourierField::zeros(g)).unwrap();
    assert!(out.max_coeff_diff(&u.scale(-0.5)) < 1e-14);
}

#[test]
fn expanded_matches_direct_at_every_level() {
    for seed in 0..50u64 {
        let n = [16, 32, 64, 128, 256][seed as usize % 5];
        let xi = env(seed, n);
        let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
        for p in smooth_probe_set(xi.grid(), 5, 2.5, 64) {
            let u = h.gamma(&p).unwrap();
            let expanded = h.apply(&u).unwrap();
            let direct = apply_l_direct(&u.u, xi.xi()).unwrap();
            let err = rel(&expanded, &direct);
            assert!(err <= 1e-9, "seed {seed} n {n}: {err:e}");
        }
    }
}

#[test]
fn display_defect_variant_breaks_exactness() {
    let xi = env(2, 64);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0)
        .unwrap()
        .with_defect(DefectVariant::Display);
    let u = h.gamma(&probe(xi.grid(), 4, 2.5, 64)).unwrap();
    let err = rel(&h.apply(&u).unwrap(), &apply_l_direct(&u.u, xi.xi()).unwrap());
    assert!(err > 1e-6, "{err:e}");
}

#[test]
fn generator_is_linear() {
    let xi = env(3, 128);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
    let ps = smooth_probe_set(xi.grid(), 2, 2.5, 64);
    let (u, v) = (h.gamma(&ps[0]).unwrap(), h.gamma(&ps[1]).unwrap());
    let w = h.gamma(&(&ps[0].scale(2.0) + &ps[1].scale(-3.0))).unwrap();
    let combo = &h.apply(&u).unwrap().scale(2.0) + &h.apply(&v).unwrap().scale(-3.0);
    assert!(rel(&h.apply(&w).unwrap(), &combo) <= 1e-11);
}

#[test]
fn direct_matches_symmetric_form() {
    // ½ e^{-2W} (e^{2W} u')' on a grid fine enough to resolve e^{2W}.
    let g = PeriodicGrid::new(256, 85).unwrap();
    let fine = 4096;
    for seed in 0..5 {
        let xi = env_on(g, seed, 16);
        let u = random_field(g, seed + 30, 3.0);
        let w = xi.potential().values_on(fine).unwrap();
        let du = u.gradient().values_on(fine).unwrap();
        let flux: Vec<f64> = w.iter().zip(&du).map(|(w, d)| (2.0 * w).exp() * d).collect();
        let big = PeriodicGrid::new(fine, fine / 3).unwrap();
        let dflux = FourierField::from_values(big, &flux).unwrap().gradient().values();
        let sym: Vec<f64> = dflux.iter().zip(&w).map(|(f, w)| 0.5 * (-2.0 * w).exp() * f).collect();
        let direct = apply_l_direct_values(&u, xi.xi(), fine).unwrap();
        // conditioning of the oracle itself: the flux is large where W is
        let scale =
            dflux.iter().fold(0.0_f64, |m, v| m.max(v.abs())) * w.iter().fold(0.0_f64, |m, v| m.max((-2.0 * v).exp()));
        let err = sym.iter().zip(&direct).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-10 * scale, "seed {seed}: {err:e}");
    }
}

#[test]
fn convergence_table_of_constant_is_zero() {
    let xi = env(1, 256);
    let one = FourierField::constant(xi.grid(), 1.0);
    for row in convergence_table(&one, &xi, 32, &[32, 64, 128]).unwrap() {
        assert!(row.error_l2 < 1e-10 && row.form_difference < 1e-10, "{row:?}");
    }
}

#[test]
fn generator_converges_linearly_in_noise_distance() {
    let g = PeriodicGrid::new(2048, 682).unwrap();
    let mut ratios = Vec::new();
    let mut forms = [0.0; 3];
    for seed in 0..20 {
        let reference = env_on(g, seed, 512);
        let cutoff = estimate_n_xi(&reference).unwrap();
        let levels: Vec<usize> = [32, 64, 128, 256].into_iter().filter(|&n| n >= cutoff).collect();
        let u_sharp = probe(g, seed, 3.0, 16);
        let rows = convergence_table(&u_sharp, &reference, cutoff, &levels).unwrap();
        ratios.extend(rows.iter().map(|r| r.ratio));
        for (acc, row) in forms.iter_mut().zip(&rows[rows.len() - 3..]) {
            *acc += row.form_difference;
        }
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 10.0, "{min} .. {max}");
    // seed-averaged |⟨L_nΓ_nu♯, Γ_nu♯⟩ − ⟨LΓu♯, Γu♯⟩| at n = 64, 128, 256
    assert!(forms[1] < forms[0] && forms[2] < forms[1], "{forms:?}");
}

#[test]
fn form_of_constant_vanishes() {
    let xi = env(5, 128);
    let one = FourierField::constant(xi.grid(), 1.0);
    let v = probe(xi.grid(), 1, 2.0, 64);
    assert!(form_value(&one, &v, &xi).unwrap().abs() < 1e-10);
}

#[test]
fn form_is_nonnegative_and_symmetric() {
    for seed in 0..20 {
        let xi = env(seed, 128);
        let weight = ExpWeight::new(xi.potential(), 2.0, 3 * 341).unwrap();
        let u = random_field(xi.grid(), seed + 100, 1.5);
        let v = random_field(xi.grid(), seed + 200, 1.5);
        let uu = form_value(&u, &u, &xi).unwrap();
        assert!(uu >= -1e-9);
        let (uv, vu) = (form_value(&u, &v, &xi).unwrap(), form_value(&v, &u, &xi).unwrap());
        assert!((uv - vu).abs() <= 1e-9 * uu.max(1.0), "seed {seed}: {uv} vs {vu}");
        let parts = dirichlet_form(&u, &v, &weight).unwrap();
        assert!((uv - parts).abs() <= 1e-9 * uu.max(1.0));
    }
}

#[test]
fn resolvent_of_constant() {
    let xi = env(6, 128);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 2.0).unwrap();
    let f = FourierField::constant(xi.grid(), -2.0);
    let out = resolvent_solve(&f, &h).unwrap();
    let one = FourierField::constant(xi.grid(), 1.0);
    assert!(out.solution.u.max_coeff_diff(&one) < 1e-9);
}

#[test]
fn resolvent_without_noise_is_diagonal() {
    let xi = env(7, 64).scaled(0.0).unwrap();
    let c = 0.5;
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), c).unwrap();
    let f = random_field(xi.grid(), 8, 1.0);
    let u = resolvent_solve(&f, &h).unwrap().solution.u;
    for k in 0..=xi.grid().k() as i64 {
        let expected = f.coeff(k) / (-(k * k) as f64 / 2.0 - c);
        assert!(
            (u.coeff(k) - expected).norm() <= 1e-12 * f.coeff(k).norm().max(1e-3),
            "k {k}"
        );
    }
}

#[test]
fn gmres_agrees_with_dense_solve() {
    let xi = env(3, 32);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
    let f = probe(xi.grid(), 9, 2.0, 64);
    let out = resolvent_solve(&f, &h).unwrap();
    assert!(out.relative_residual <= 1e-8);
    let dense = dense_resolvent(&f, xi.xi(), 1.0).unwrap();
    assert!((&out.solution.u - &dense).l2_norm() <= 1e-7 * dense.l2_norm());
}

#[test]
fn resolvent_converges_in_noise_distance() {
    let reference = env(3, 256);
    let f = probe(reference.grid(), 11, 2.0, 32);
    let fine = resolvent_solve(
        &f,
        &GeneratorHandle::with_estimated_cutoff(reference.clone(), 1.0).unwrap(),
    )
    .unwrap();
    let ratios: Vec<f64> = [16, 32, 64, 128]
        .into_iter()
        .map(|n| {
            let xi_n = reference.truncated(n).unwrap();
            let h = GeneratorHandle::with_estimated_cutoff(xi_n, 1.0).unwrap();
            let u_n = resolvent_solve(&f, &h).unwrap().solution.u;
            (&fine.solution.u - &u_n).sobolev_norm(1.0) / reference.distance(h.noise()).unwrap().total()
        })
        .collect();
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 5.0, "{ratios:?}");
}

#[test]
fn cutoff_below_threshold_is_rejected() {
    let xi = env(1, 128);
    let n = estimate_n_xi(&xi).unwrap();
    assert!(n > 0);
    assert!(GeneratorHandle::new(xi.clone(), n - 1, 1.0).is_err());
    assert!(GeneratorHandle::new(xi, n, 0.0).is_err());
}

#[test]
fn graph_norm_of_constant() {
    let xi = env(2, 64);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
    let row = graph_norm_check(&[FourierField::constant(xi.grid(), 1.0)], &h).unwrap()[0];
    assert!((row.ratio - 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn graph_norm_equivalence() {
    let xi = env(4, 128);
    let h = GeneratorHandle::with_estimated_cutoff(xi.clone(), 1.0).unwrap();
    let probes: Vec<_> = (0..20).map(|s| probe(xi.grid(), s, 2.5, 64)).collect();
    let rows = graph_norm_check(&probes, &h).unwrap();
    let r: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let spread = r.iter().cloned().fold(0.0, f64::max) / r.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread <= 20.0, "{r:?}");
}

#[test]
fn graph_norm_ratio_is_resolution_independent() {
    let mut ratios = Vec::new();
    for m in [512, 1024, 2048, 4096] {
        let g = PeriodicGrid::new(m, m / 3).unwrap();
        let xi = env_on(g, 4, 128);
        let map = DomainMap::new(&xi, 16).unwrap();
        let h = GeneratorHandle::new(xi.clone(), map.cutoff().max(estimate_n_xi(&xi).unwrap()), 1.0).unwrap();
        let row = graph_norm_check(&[probe(g, 3, 2.5, 64)], &h).unwrap()[0];
        ratios.push(row.ratio);
    }
    let spread = ratios.iter().cloned().fold(0.0, f64::max) / ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.5, "{ratios:?}");
}
