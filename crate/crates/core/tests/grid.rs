use proptest::prelude::*;
use snls_core::grid::{mode_index, mode_slot, FieldState, Fft1d, Grid, GridSpec, NaiveDft, NaivePlanner, RustFftPlanner, FftPlanner};
use snls_core::{Complex64, SnlsError};
use std::f64::consts::PI;

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn grid(dim: usize, l: f64, n: usize, dealias: f64) -> std::sync::Arc<Grid> {
    Grid::with_default_backend(GridSpec::cube(dim, l, n).with_dealias(dealias)).unwrap()
}

fn random_signal(n: usize, seed: u64) -> Vec<Complex64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}

#[test]
fn rustfft_matches_direct_dft() {
    let mut planner = RustFftPlanner::default();
    for n in [8, 12, 30, 64, 96, 128] {
        let x = random_signal(n, n as u64);
        let fast = planner.plan(n);
        let slow = NaiveDft::new(n);
        for inverse in [false, true] {
            let mut a = x.clone();
            let mut b = x.clone();
            let mut scratch = vec![Complex64::new(0.0, 0.0); fast.scratch_len().max(n)];
            fast.process(&mut a, &mut scratch, inverse);
            let mut scratch = vec![Complex64::new(0.0, 0.0); slow.scratch_len()];
            slow.process(&mut b, &mut scratch, inverse);
            let err = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12 * scale, "n = {n}, inverse = {inverse}: {err}");
        }
    }
}

#[test]
fn naive_backend_grid_agrees_with_default() {
    let spec = GridSpec::cube(2, 10.0, 16);
    let slow = Grid::new(spec.clone(), &mut NaivePlanner).unwrap();
    let fast = Grid::with_default_backend(spec).unwrap();
    let f = |x: &[f64]| Complex64::new((-x[0] * x[0] - 0.5 * x[1] * x[1]).exp(), 0.3 * x[0]);
    let mut a = FieldState::from_fn(slow, f);
    let mut b = FieldState::from_fn(fast, f);
    let err = a
        .spectrum()
        .to_vec()
        .iter()
        .zip(b.spectrum())
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-11, "{err}");
}

#[test]
fn sech_quadratures_are_spectrally_accurate() {
    let g = grid(1, 60.0, 512, 1.0);
    let mut u = FieldState::from_fn(g, |x| Complex64::new(sech(x[0]), 0.0));
    assert!((u.mass() - 2.0).abs() < 1e-12);
    assert!((u.spectral_mass() - 2.0).abs() < 1e-12);
    assert!((u.gradient_norm_sq() - 2.0 / 3.0).abs() < 1e-10);
    assert!((u.lp_norm_pow(4.0) - 4.0 / 3.0).abs() < 1e-12);
    let v = snls_core::observables::variance(&u);
    assert!((v - PI * PI / 6.0).abs() < 1e-10, "{v}");
    let l1 = u.quadrature_lp(1.0).unwrap();
    assert!((l1 - PI).abs() < 1e-10);
}

#[test]
fn sqrt_sech_l2_norm() {
    // ‖sech^{1/2}‖² = π.
    let g = grid(1, 80.0, 1024, 1.0);
    let u = FieldState::from_fn(g, |x| Complex64::new(sech(x[0]).sqrt(), 0.0));
    assert!((u.mass() - PI).abs() < 1e-10);
}

#[test]
fn derivative_of_plane_wave() {
    let l = 2.0 * PI;
    let g = grid(1, l, 32, 1.0);
    let mut u = FieldState::from_fn(g.clone(), |x| Complex64::from_polar(1.0, 3.0 * x[0]));
    let du = u.derivative(0);
    for (idx, d) in du.iter().enumerate() {
        let expect = Complex64::new(0.0, 3.0) * Complex64::from_polar(1.0, 3.0 * g.x(idx, 0));
        assert!((d - expect).norm() < 1e-12);
    }
    assert!((u.gradient_norm_sq() - 9.0 * l).abs() < 1e-10);
}

#[test]
fn dealias_keeps_two_thirds_band() {
    for n in [8usize, 16, 30, 64] {
        let g = grid(1, 1.0, n, 2.0 / 3.0);
        let kept = g.dealias_mask().iter().filter(|&&k| k).count();
        let kmax = (2.0 / 3.0 * (n / 2) as f64).floor() as usize;
        assert_eq!(kept, 2 * kmax + 1, "n = {n}");
        for j in 0..n {
            let k = mode_index(j, n);
            let mirror = mode_slot(-k, n);
            if let Some(m) = mirror {
                assert_eq!(g.dealias_mask()[j], g.dealias_mask()[m], "asymmetric at k = {k}");
            }
        }
    }
    let g = grid(3, 1.0, 12, 2.0 / 3.0);
    assert_eq!(g.dealias_mask().iter().filter(|&&k| k).count(), 9 * 9 * 9);
}

#[test]
fn dealias_removes_high_modes_only() {
    let g = grid(1, 2.0 * PI, 16, 0.5);
    let mut u = FieldState::from_fn(g, |x| Complex64::new((2.0 * x[0]).cos() + (7.0 * x[0]).cos(), 0.0));
    u.apply_dealias();
    for (idx, v) in u.values().iter().enumerate() {
        let x = u.grid().x(idx, 0);
        assert!((v.re - (2.0 * x).cos()).abs() < 1e-12);
    }
}

#[test]
fn invalid_grids_are_rejected() {
    for spec in [
        GridSpec::cube(1, 10.0, 6),
        GridSpec::cube(1, 10.0, 9),
        GridSpec::cube(4, 10.0, 8),
        GridSpec::cube(1, -1.0, 8),
        GridSpec::cube(1, 10.0, 8).with_dealias(0.0),
        GridSpec::cube(1, 10.0, 8).with_dealias(1.5),
    ] {
        assert!(matches!(spec.validate(), Err(SnlsError::InvalidGrid(_))), "{spec:?}");
    }
    assert!(GridSpec::cube(3, 10.0, 8).validate().is_ok());
}

#[test]
fn quadrature_rejects_bad_input() {
    let g = grid(1, 10.0, 8, 1.0);
    let mut u = FieldState::zeros(g);
    assert!(u.quadrature_lp(0.5).is_err());
    u.values_mut()[3] = Complex64::new(f64::NAN, 0.0);
    assert!(u.quadrature_lp(2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_and_roundtrip(seed in any::<u64>(), dim in 1usize..=3, half in 4usize..=8) {
        let n = 2 * half;
        let g = grid(dim, 7.0, n, 1.0);
        let x = random_signal(g.len(), seed);
        let mut u = FieldState::new(g.clone(), x.clone()).unwrap();
        let m = u.mass();
        let ms = u.spectral_mass();
        prop_assert!((m - ms).abs() <= 1e-12 * m);
        let spec = u.spectrum().to_vec();
        let back = FieldState::from_spectrum(g, spec).unwrap();
        let err = back.values().iter().zip(&x).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-13);
    }

    #[test]
    fn mass_is_gauge_invariant(seed in any::<u64>(), theta in -10.0f64..10.0) {
        let g = grid(1, 5.0, 32, 1.0);
        let x = random_signal(g.len(), seed);
        let mut u = FieldState::new(g.clone(), x.clone()).unwrap();
        let rot: Vec<Complex64> = x.iter().map(|v| v * Complex64::from_polar(1.0, theta)).collect();
        let mut w = FieldState::new(g, rot).unwrap();
        prop_assert!((u.mass() - w.mass()).abs() <= 1e-12 * u.mass());
        let (a, b) = (u.gradient_norm_sq(), w.gradient_norm_sq());
        prop_assert!((a - b).abs() <= 1e-11 * a);
    }
}
