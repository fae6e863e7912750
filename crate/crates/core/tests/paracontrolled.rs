mod common;

use brox_core::noise::{sample_noise, solve_x1, EnhancedNoise};
use brox_core::paracontrolled::*;
use brox_core::probes::{probe, probe_set, smooth_probe_set};
use brox_core::spectral::*;
use common::{block, convolve_with, max_diff, random_field};
use num_complex::Complex64;
use proptest::prelude::*;

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Coefficients `ξ_k k^{-decay}` shared by every grid, so sweeps over `M`
/// refine one function instead of drawing new ones.
fn refined(g: PeriodicGrid, seed: u64, decay: f64) -> FourierField {
    let n = sample_noise(seed, g.k()).unwrap();
    let c = (0..=g.k())
        .map(|k| match k {
            0 => Complex64::new(0.3, 0.0),
            _ => n.coeff(k as i64) * (k as f64).powf(-decay),
        })
        .collect();
    FourierField::from_coeffs(g, c).unwrap()
}

fn from_half(g: PeriodicGrid, c: Vec<Complex64>) -> FourierField {
    let mut c = c;
    c[0].im = 0.0;
    FourierField::from_coeffs(g, c).unwrap()
}

fn para_oracle(f: &FourierField, g: &FourierField) -> FourierField {
    from_half(f.grid(), convolve_with(f, g, |j, l| block(j) < block(l) - 1))
}

fn resonant_oracle(f: &FourierField, g: &FourierField) -> FourierField {
    from_half(f.grid(), convolve_with(f, g, |j, l| (block(j) - block(l)).abs() <= 1))
}

fn product_oracle(f: &FourierField, g: &FourierField) -> FourierField {
    from_half(f.grid(), convolve_with(f, g, |_, _| true))
}

fn para_tilde_oracle(a: &FourierField, s: &FourierField) -> FourierField {
    let p = para_oracle(a, s);
    from_half(
        a.grid(),
        (0..=a.kmax())
            .map(|k| p.coeff(k as i64) * (-2.0 * parametrix_symbol(k as i64)))
            .collect(),
    )
}

#[test]
fn constant_right_factor_has_no_paraproduct() {
    let g = PeriodicGrid::new(64, 21).unwrap();
    let f = random_field(g, 1, 0.5);
    let c = FourierField::constant(g, 2.5);
    assert_eq!(para(&f, &c).unwrap().sup_norm(), 0.0);
}

#[test]
fn paraproducts_match_convolution_oracle() {
    let g = PeriodicGrid::new(64, 16).unwrap();
    for seed in 0..5 {
        let f = random_field(g, seed, 0.5);
        let h = random_field(g, seed + 10, 0.2);
        assert!(para(&f, &h).unwrap().max_coeff_diff(&para_oracle(&f, &h)) < 1e-13);
        assert!(resonant(&f, &h).unwrap().max_coeff_diff(&resonant_oracle(&f, &h)) < 1e-13);
    }
}

#[test]
fn paraproduct_continuity_across_resolutions() {
    let mut ratios = Vec::new();
    for m in [256, 512, 1024, 2048, 4096] {
        let g = PeriodicGrid::new(m, m / 3).unwrap();
        let f = refined(g, 1, 0.85);
        let f = f.scale(1.0 / holder_norm(&f, 0.3));
        let h = refined(g, 2, 1.45);
        ratios.push(holder_norm(&para(&f, &h).unwrap(), 0.9) / holder_norm(&h, 0.9));
    }
    assert!(spread(&ratios) < 2.0, "{ratios:?}");
}

#[test]
fn para_tilde_of_zero() {
    let g = PeriodicGrid::new(64, 21).unwrap();
    let x = solve_x1(&random_field(g, 3, 0.0));
    assert_eq!(para_tilde(&FourierField::zeros(g), &x).unwrap().sup_norm(), 0.0);
}

#[test]
fn intertwining_cancellation() {
    let g = PeriodicGrid::new(1024, 341).unwrap();
    for seed in 0..10 {
        let xi = EnhancedNoise::enhance(&sample_noise(seed, 341).unwrap(), 256, 1.45, g).unwrap();
        let a = probe(g, seed, 1.5, 341);
        for x in [xi.x1(), xi.x2()] {
            let pt = para_tilde(&a, x).unwrap();
            let pas = para(&a, x.source()).unwrap();
            let defect = &(&pt.laplacian().scale(0.5) + &pas) - &pas.heat(1.0);
            let scale = pas.coeffs().iter().fold(1.0_f64, |m, c| m.max(c.norm()));
            assert!(defect.coeffs().iter().all(|c| c.norm() <= 1e-12 * scale));
        }
    }
}

#[test]
fn intertwined_paraproduct_is_smoother_than_plain() {
    // Sharp dyadic cutoffs cost about half a derivative in sup-norm block
    // estimates, so the gain is checked at 1.95 rather than 2.4.
    let (mut diff, mut plain) = (Vec::new(), Vec::new());
    for m in [256, 512, 1024, 2048, 4096] {
        let g = PeriodicGrid::new(m, m / 4).unwrap();
        let a = refined(g, 3, 1.5);
        let x = solve_x1(&refined(g, 4, 0.0));
        let pt = para_tilde(&a, &x).unwrap();
        let pp = para(&a, x.value()).unwrap();
        diff.push(holder_norm(&(&pt - &pp), 1.95));
        plain.push(holder_norm(&pp, 1.95));
    }
    assert!(spread(&diff) < 2.0, "{diff:?}");
    assert!(spread(&plain) > 2.0, "{plain:?}");
}

#[test]
fn cnabla_of_constant_is_low_frequency() {
    // P̃_c X = c X except for blocks −1 and 0, so the residual is
    // −c Π(∇(Δ₋₁X + Δ₀X), b), which lives in blocks ≤ 2.
    let g = PeriodicGrid::new(128, 32).unwrap();
    let x = solve_x1(&random_field(g, 5, 0.0));
    let b = random_field(g, 6, 0.0);
    let c = FourierField::constant(g, 0.7);
    let out = corrector_cnabla(&c, &x, &b).unwrap();
    let low = &lp_block(x.value(), -1) + &lp_block(x.value(), 0);
    let expected = resonant(&low.gradient(), &b).unwrap().scale(-0.7);
    assert!(out.max_coeff_diff(&expected) < 1e-12);
    for j in 3..=max_block(32) {
        assert!(lp_block(&out, j).sup_norm() < 1e-12, "block {j}");
    }
}

#[test]
fn correctors_match_convolution_oracle() {
    let g = PeriodicGrid::new(64, 16).unwrap();
    for seed in 0..5 {
        let a = random_field(g, seed, 1.0);
        let x = solve_x1(&random_field(g, seed + 20, 0.0));
        let b = random_field(g, seed + 40, 0.0);
        let pt = para_tilde_oracle(&a, x.source());
        let cn =
            &resonant_oracle(&pt.gradient(), &b) - &product_oracle(&a, &resonant_oracle(&x.value().gradient(), &b));
        assert!(corrector_cnabla(&a, &x, &b).unwrap().max_coeff_diff(&cn) < 1e-11);
        let s = &para_oracle(&b, &pt) - &para_oracle(&a, &para_oracle(&b, x.value()));
        assert!(corrector_s(&a, &x, &b).unwrap().max_coeff_diff(&s) < 1e-11);
        let z = FourierField::zeros(g);
        assert_eq!(corrector_s(&z, &x, &b).unwrap().sup_norm(), 0.0);
    }
}

#[test]
fn corrector_continuity_across_resolutions() {
    // Inputs in C^{0.95} × C^{1.45} × C^{-0.55}. Constants are measured half a
    // derivative below the smooth-partition exponents (0.85 and 1.85); at
    // the full exponents they drift upward with M.
    for seed in [3u64, 5, 9, 11] {
        let (mut cn, mut s) = (Vec::new(), Vec::new());
        for m in [256, 512, 1024, 2048, 4096] {
            let g = PeriodicGrid::new(m, m / 4).unwrap();
            let a = refined(g, seed, 1.5);
            let b = refined(g, seed + 50, 0.0);
            let x = solve_x1(&b);
            let norm = holder_norm(&a, 0.95) * holder_norm(x.value(), 1.45) * holder_norm(&b, -0.55);
            cn.push(holder_norm(&corrector_cnabla(&a, &x, &b).unwrap(), 0.35) / norm);
            s.push(holder_norm(&corrector_s(&a, &x, &b).unwrap(), 1.35) / norm);
        }
        assert!(spread(&cn) < 2.0, "seed {seed}: {cn:?}");
        assert!(spread(&s) < 2.0, "seed {seed}: {s:?}");
    }
}

fn env(seed: u64, n: usize) -> EnhancedNoise {
    let g = PeriodicGrid::new(1024, 341).unwrap();
    EnhancedNoise::enhance(&sample_noise(seed, 341).unwrap(), n, 1.45, g).unwrap()
}

#[test]
fn phi_fixes_constants_and_is_identity_at_full_cutoff() {
    let xi = env(1, 64);
    let one = FourierField::constant(xi.grid(), 1.0);
    assert!(phi_map(&one, &xi, 4).unwrap().max_coeff_diff(&one) < 1e-15);
    let u = probe(xi.grid(), 2, 2.0, 341);
    assert_eq!(phi_map(&u, &xi, 64).unwrap(), u);
    assert!(phi_map(&u, &xi, 65).is_err());
}

#[test]
fn phi_perturbation_bound_is_resolution_independent() {
    for beta in [0.0, 1.0, 1.2] {
        let mut consts = Vec::new();
        for m in [256, 512, 1024, 2048, 4096] {
            let g = PeriodicGrid::new(m, m / 3).unwrap();
            let xi = refined(g, 4, 0.0);
            let en = EnhancedNoise::from_xi(xi.clone(), g.k(), 1.45).unwrap();
            let low = en.truncated(8).unwrap();
            let tail = holder_norm(&(en.x1().value() - low.x1().value()), 1.45)
                + holder_norm(&(en.x2().value() - low.x2().value()), 1.9);
            let map = DomainMap::new(&en, 8).unwrap();
            let u = probe(g, 7, 2.0, g.k());
            consts.push(map.control(&u).unwrap().sobolev_norm(beta) / (u.sobolev_norm(beta) * tail));
        }
        assert!(spread(&consts) < 2.0, "beta {beta}: {consts:?}");
    }
}

#[test]
fn gamma_of_one_is_one() {
    let xi = env(2, 128);
    let n = estimate_n_xi(&xi).unwrap();
    let one = FourierField::constant(xi.grid(), 1.0);
    let u = gamma_map(&one, &xi, n).unwrap();
    assert!(u.u.max_coeff_diff(&one) < 1e-15);
}

#[test]
fn gamma_and_phi_are_inverse() {
    for seed in 0..5 {
        let xi = env(seed, 128);
        let map = DomainMap::new(&xi, estimate_n_xi(&xi).unwrap()).unwrap();
        for p in smooth_probe_set(xi.grid(), 5, 2.5, 64) {
            let u = map.gamma(&p).unwrap();
            let scale = p.sobolev_norm(1.0);
            assert!((&map.phi(&u.u).unwrap() - &p).sobolev_norm(1.0) <= 1e-10 * scale);
            assert!(u.fixed_point_residual(&map).unwrap() <= 1e-10 * scale);
            let back = map.gamma(&map.phi(&u.u).unwrap()).unwrap();
            assert!((&back.u - &u.u).sobolev_norm(1.0) <= 1e-10 * scale);
        }
    }
}

#[test]
fn gamma_approximation_tracks_noise_distance() {
    let reference = env(6, 256);
    let cutoff = estimate_n_xi(&reference).unwrap();
    let fine = DomainMap::new(&reference, cutoff).unwrap();
    let probes = smooth_probe_set(reference.grid(), 20, 2.5, 64);
    let mut consts = Vec::new();
    for n in [32, 64, 128] {
        if n <= cutoff {
            continue;
        }
        let xi_n = reference.truncated(n).unwrap();
        let coarse = DomainMap::new(&xi_n, cutoff).unwrap();
        let mut op: f64 = 0.0;
        for p in &probes {
            let d = &fine.gamma(p).unwrap().u - &coarse.gamma(p).unwrap().u;
            op = op.max(d.sobolev_norm(1.0) / p.sobolev_norm(1.0));
        }
        consts.push(op / reference.distance(&xi_n).unwrap().total());
    }
    assert!(consts.len() >= 2);
    assert!(
        consts.windows(2).all(|w| w[1] / w[0] < 2.0 && w[0] / w[1] < 2.0),
        "{consts:?}"
    );
}

#[test]
fn zero_noise_needs_no_cutoff() {
    let xi = env(3, 64).scaled(0.0).unwrap();
    assert_eq!(estimate_n_xi(&xi).unwrap(), 0);
}

#[test]
fn threshold_monotone_in_amplitude_and_gamma_converges() {
    for seed in 0..50 {
        let xi = env(seed, 128);
        let n1 = estimate_n_xi(&xi).unwrap_or(128);
        let n2 = estimate_n_xi(&xi.scaled(2.0).unwrap()).unwrap_or(128);
        assert!(n2 >= n1, "seed {seed}: {n1} -> {n2}");
        if n1 < 128 {
            let u = gamma_map(&probe(xi.grid(), seed, 2.5, 64), &xi, n1).unwrap();
            assert!(u.iterations <= 60, "seed {seed}: {} iterations", u.iterations);
        }
    }
}

#[test]
fn threshold_sweep_stops_at_first_contraction() {
    let xi = env(2, 128);
    let rows = threshold_sweep(&xi).unwrap();
    let last = rows.last().unwrap();
    assert!(last.lipschitz_ratio <= 0.5);
    assert!(rows[..rows.len() - 1].iter().all(|r| r.lipschitz_ratio > 0.5));
    assert_eq!(estimate_n_xi(&xi).unwrap(), last.cutoff);
    let map = DomainMap::new(&xi, last.cutoff).unwrap();
    assert_eq!(
        map.lipschitz_ratio(&probe_set(xi.grid())).unwrap(),
        last.lipschitz_ratio
    );
}

#[test]
fn domain_is_dense() {
    let g = PeriodicGrid::new(2048, 682).unwrap();
    let xi = EnhancedNoise::enhance(&sample_noise(1, 682).unwrap(), 512, 1.45, g).unwrap();
    let cutoff = estimate_n_xi(&xi).unwrap();
    let reference = DomainMap::new(&xi, cutoff).unwrap();
    let f = smooth_probe_set(g, 1, 3.0, 8).remove(0);
    let errs: Vec<f64> = [32, 64, 128, 256]
        .into_iter()
        .filter(|&n| n >= cutoff)
        .map(|n| {
            let phi_n = DomainMap::new(&xi.truncated(n).unwrap(), cutoff).unwrap();
            let u = reference.gamma(&phi_n.phi(&f).unwrap()).unwrap();
            (&f - &u.u).sobolev_norm(1.0)
        })
        .collect();
    assert!(errs.len() >= 3);
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn domain_functions_have_holder_three_halves_regularity() {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for m in [256, 512, 1024, 2048, 4096] {
        let g = PeriodicGrid::new(m, m / 3).unwrap();
        let en = EnhancedNoise::from_xi(refined(g, 8, 0.0), g.k(), 1.45).unwrap();
        let map = DomainMap::new(&en, 16).unwrap();
        let u = map.gamma(&refined(g, 9, 3.0)).unwrap().u;
        lo.push(holder_norm(&u, 1.4));
        hi.push(holder_norm(&u, 1.6));
    }
    assert!(spread(&lo) < 2.0, "{lo:?}");
    assert!(hi[4] > 2.0 * hi[0], "{hi:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bony_identity(s1 in any::<u64>(), s2 in any::<u64>(), d1 in 0.0f64..2.0, d2 in 0.0f64..2.0) {
        let g = PeriodicGrid::new(64, 16).unwrap();
        let f = random_field(g, s1, d1);
        let h = random_field(g, s2, d2);
        let sum = &(&para(&f, &h).unwrap() + &resonant(&f, &h).unwrap()) + &para(&h, &f).unwrap();
        prop_assert!(sum.max_coeff_diff(&product(&f, &h).unwrap()) <= 1e-12);
    }

    #[test]
    fn products_commute_with_oracle_on_larger_grids(seed in any::<u64>()) {
        let g = PeriodicGrid::new(128, 32).unwrap();
        let f = random_field(g, seed, 1.0);
        let h = random_field(g, seed ^ 0xabcd, 0.0);
        prop_assert!(max_diff(resonant(&f, &h).unwrap().coeffs(), resonant_oracle(&f, &h).coeffs()) < 1e-12);
    }
}
