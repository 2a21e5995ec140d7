use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snls_core::grid::{Grid, GridSpec};
use snls_core::noise::{CovarianceSpec, ModeAmplitude, NoiseField, NoiseType};
use snls_core::rng::NoisePath;
use snls_core::SnlsError;
use std::f64::consts::PI;

fn periodic(dim: usize, l: f64, n: usize) -> std::sync::Arc<Grid> {
    Grid::with_default_backend(GridSpec::cube(dim, l, n).with_dealias(1.0)).unwrap()
}

#[test]
fn zero_mode_has_no_gradient() {
    let g = periodic(1, 10.0, 16);
    let a = 0.7;
    let f = NoiseField::new(g, NoiseType::Multiplicative, &CovarianceSpec::single_mode(vec![0], a)).unwrap();
    let c = f.constants(1, 2.0);
    assert!((c.hs00 - a * a).abs() < 1e-14);
    assert_eq!(c.m_phi, 0.0);
    assert!((c.f_phi_sup - a * a / 10.0).abs() < 1e-14);
    assert_eq!(f.n_coefficients(), 1);
}

#[test]
fn first_mode_pair_on_unit_circle() {
    let g = periodic(1, 2.0 * PI, 32);
    let a = 0.5;
    let f = NoiseField::new(g, NoiseType::Multiplicative, &CovarianceSpec::single_mode(vec![1], a)).unwrap();
    let c = f.constants(1, 2.0);
    // cos and sin with weight a √(2/L): hs00 = 2a², M_φ = F_φ = 2a²/L.
    assert!((c.hs00 - 2.0 * a * a).abs() < 1e-13);
    assert!((c.m_phi - 2.0 * a * a / (2.0 * PI)).abs() < 1e-13);
    assert!((c.f_phi_sup - 2.0 * a * a / (2.0 * PI)).abs() < 1e-13);
    assert!((c.hs01 - 4.0 * a * a).abs() < 1e-13);
    assert!((c.c_phi_1 - 2.0 * a * a).abs() < 1e-13);
    // F_φ is flat for a single ± pair.
    let spread = f.f_phi().iter().cloned().fold(0.0, f64::max) - f.f_phi().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-13);
    assert_eq!(f.n_coefficients(), 2);
}

#[test]
fn mirrored_and_asymmetric_tables() {
    let g = periodic(1, 2.0 * PI, 16);
    let both = CovarianceSpec::FourierDiagonal {
        modes: vec![
            ModeAmplitude { mode: vec![2], amplitude: 0.3 },
            ModeAmplitude { mode: vec![-2], amplitude: 0.3 },
        ],
    };
    let one = CovarianceSpec::single_mode(vec![2], 0.3);
    let a = NoiseField::new(g.clone(), NoiseType::Additive, &both).unwrap().constants(1, 2.0);
    let b = NoiseField::new(g.clone(), NoiseType::Additive, &one).unwrap().constants(1, 2.0);
    assert_eq!(a, b);
    let bad = CovarianceSpec::FourierDiagonal {
        modes: vec![
            ModeAmplitude { mode: vec![2], amplitude: 0.3 },
            ModeAmplitude { mode: vec![-2], amplitude: 0.4 },
        ],
    };
    assert!(matches!(
        NoiseField::new(g, NoiseType::Additive, &bad),
        Err(SnlsError::AsymmetricAmplitudes(_))
    ));
}

#[test]
fn band_is_enforced() {
    let g = Grid::with_default_backend(GridSpec::cube(1, 2.0 * PI, 16)).unwrap();
    let err = NoiseField::new(g, NoiseType::Multiplicative, &CovarianceSpec::single_mode(vec![7], 1.0));
    assert!(matches!(err, Err(SnlsError::BandExceeded(_))));
}

#[test]
fn no_noise_ignores_covariance() {
    let g = periodic(1, 2.0 * PI, 16);
    let f = NoiseField::new(g, NoiseType::None, &CovarianceSpec::single_mode(vec![7], 1.0)).unwrap();
    assert!(f.is_zero());
    assert_eq!(f.constants(1, 2.0).hs00, 0.0);
}

#[test]
fn gaussian_kernel_is_nonnegative_and_even() {
    let g = periodic(1, 20.0, 64);
    let cov = CovarianceSpec::PhysicalKernel {
        kernel: snls_core::noise::KernelShape::Gaussian { amplitude: 1.0, width: 1.0 },
    };
    let f = NoiseField::new(g, NoiseType::Multiplicative, &cov).unwrap();
    // K̂(0) = ∫K = √(2π).
    let zero = f.modes().into_iter().find(|(m, _)| m[0] == 0).unwrap().1;
    assert!((zero - (2.0 * PI).sqrt()).abs() < 1e-10);
}

#[test]
fn increments_are_reproducible() {
    let g = periodic(1, 10.0, 32);
    let f = NoiseField::new(
        g,
        NoiseType::Additive,
        &CovarianceSpec::GaussianSpectrum { width: 1.0, strength: 0.3, cutoff: 2.0 },
    )
    .unwrap();
    let path = NoisePath::new(42, 3);
    let draw = |step| {
        let mut v = Vec::new();
        f.sample_coefficients(0.01, &mut path.node_rng(step, 1), &mut v);
        v
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
    let mut other = Vec::new();
    f.sample_coefficients(0.01, &mut NoisePath::new(42, 4).node_rng(5, 1), &mut other);
    assert_ne!(draw(5), other);
}

#[test]
fn bridge_split_preserves_the_increment() {
    let g = periodic(1, 10.0, 32);
    let f = NoiseField::new(
        g,
        NoiseType::Multiplicative,
        &CovarianceSpec::GaussianSpectrum { width: 1.0, strength: 0.3, cutoff: 2.0 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut total = Vec::new();
    f.sample_coefficients(0.02, &mut rng, &mut total);
    let mut second = total.clone();
    let mut first = Vec::new();
    f.bridge_split(&mut second, 0.02, &mut rng, &mut first);
    for ((a, b), c) in first.iter().zip(&second).zip(&total) {
        assert!((a + b - c).abs() < 1e-15);
    }
}

#[test]
fn bridge_halves_have_half_variance() {
    let g = periodic(1, 2.0 * PI, 16);
    let f = NoiseField::new(g, NoiseType::Multiplicative, &CovarianceSpec::single_mode(vec![0], 1.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (n, dt) = (40_000, 1.0);
    let (mut s1, mut s12) = (0.0, 0.0);
    for _ in 0..n {
        let mut c = Vec::new();
        f.sample_coefficients(dt, &mut rng, &mut c);
        let mut first = Vec::new();
        f.bridge_split(&mut c, dt, &mut rng, &mut first);
        s1 += first[0] * first[0];
        s12 += first[0] * c[0];
    }
    let (v1, cov) = (s1 / n as f64, s12 / n as f64);
    // Var = dt/2, independent halves; 5 standard errors.
    assert!((v1 - 0.5).abs() < 5.0 * 0.5 * (2.0 / n as f64).sqrt(), "{v1}");
    assert!(cov.abs() < 5.0 * 0.5 / (n as f64).sqrt(), "{cov}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constants_scale_quadratically(strength in 0.01f64..2.0, factor in 0.1f64..10.0, width in 0.3f64..2.0) {
        let g = periodic(1, 20.0, 64);
        let mk = |s: f64| {
            NoiseField::new(g.clone(), NoiseType::Multiplicative, &CovarianceSpec::GaussianSpectrum { width, strength: s, cutoff: 2.0 })
                .unwrap()
                .constants(1, 2.0)
        };
        let (a, b) = (mk(strength), mk(strength * factor));
        let f2 = factor * factor;
        for (x, y) in [(a.hs00, b.hs00), (a.hs01, b.hs01), (a.m_phi, b.m_phi), (a.f_phi_sup, b.f_phi_sup), (a.c_phi_sigma, b.c_phi_sigma)] {
            prop_assert!((y - f2 * x).abs() <= 1e-10 * y.abs().max(1e-300));
        }
        // Interpolation constant is hs01^a hs00^b with a + b = 1/2 when nσ = 2.
        prop_assert!((b.c_phi_interp - factor * a.c_phi_interp).abs() <= 1e-10 * b.c_phi_interp);
    }

    #[test]
    fn hs01_dominates_hs00(strength in 0.01f64..2.0, cutoff in 0.0f64..3.0) {
        let g = periodic(2, 10.0, 16);
        let c = NoiseField::new(g, NoiseType::Additive, &CovarianceSpec::GaussianSpectrum { width: 1.0, strength, cutoff })
            .unwrap()
            .constants(2, 1.0);
        prop_assert!(c.hs01 >= c.hs00);
        prop_assert!((c.hs01 - c.hs00 - c.c_phi_1).abs() <= 1e-10 * c.hs01.max(1e-300));
    }
}
