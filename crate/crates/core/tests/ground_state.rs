use snls_core::ground_state::{gn_k, solve_ground_state, weinstein_ratio, GroundState};
use snls_core::{critical_index, scaling_index, validate_nonlinearity, SnlsError};
use std::f64::consts::PI;

// Γ(1/3) and Γ(5/6) to 16 digits.
const GAMMA_THIRD: f64 = 2.678_938_534_707_747_6;
const GAMMA_FIVE_SIXTHS: f64 = 1.128_787_029_908_125_9;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn residuals_within_tolerance_for_all_cases() {
    for (n, s) in [(1, 2.0), (1, 3.0), (1, 1.0), (2, 1.0), (3, 1.0), (2, 2.0)] {
        let gs = solve_ground_state(n, s).unwrap();
        let tol = GroundState::default_tolerance(n);
        gs.check(tol).unwrap_or_else(|f| panic!("({n}, {s}): {} = {}", f.name, f.value));
    }
}

#[test]
fn quintic_1d_closed_forms() {
    // Q = 3^{1/4} sech^{1/2}(2x), M(Q) = √3 π/2, ‖∇Q‖² = M/2, H(Q) = 0.
    let gs = solve_ground_state(1, 2.0).unwrap();
    assert!(rel(gs.mass, 3f64.sqrt() * PI / 2.0) < 1e-12);
    assert!(rel(gs.grad_sq, 3f64.sqrt() * PI / 4.0) < 1e-10);
    assert!(gs.energy.abs() < 1e-10);
    assert!(rel(gs.peak, 3f64.powf(0.25)) < 1e-14);
    assert_eq!(gs.alpha, None);
    // Sharp constant 4/π².
    assert!(rel(gs.gn_constant, 4.0 / (PI * PI)) < 1e-12);
}

#[test]
fn septic_1d_mass_from_beta_function() {
    // ∫ sech^{2/3}(3x) dx = B(1/3, 1/2)/3.
    let gs = solve_ground_state(1, 3.0).unwrap();
    let beta = GAMMA_THIRD * PI.sqrt() / GAMMA_FIVE_SIXTHS;
    assert!(rel(gs.mass, 4f64.powf(1.0 / 3.0) * beta / 3.0) < 1e-12);
    // s_c = 1/6, α = 5.
    assert!((gs.s_c - 1.0 / 6.0).abs() < 1e-15);
    assert!((gs.alpha.unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn cubic_1d_is_subcritical_with_known_integrals() {
    let gs = solve_ground_state(1, 1.0).unwrap();
    assert!(rel(gs.mass, 4.0) < 1e-12);
    assert!(rel(gs.grad_sq, 4.0 / 3.0) < 1e-10);
    assert!(rel(gs.lp_norm_pow, 16.0 / 3.0) < 1e-10);
    assert!(rel(gs.energy, -2.0 / 3.0) < 1e-10);
}

#[test]
fn townes_profiles() {
    let q2 = solve_ground_state(2, 1.0).unwrap();
    assert!((q2.peak - 2.206_200_864_65).abs() < 1e-6, "{}", q2.peak);
    assert!((q2.mass - 11.700_896_5).abs() < 1e-5, "{}", q2.mass);
    assert!(q2.energy.abs() < 1e-8);
    let q3 = solve_ground_state(3, 1.0).unwrap();
    assert!((q3.peak - 4.337_387_68).abs() < 1e-6, "{}", q3.peak);
    assert!(rel(q3.energy, q3.mass / 2.0) < 1e-8);
}

#[test]
fn energy_triple_consistency() {
    for (n, s) in [(1, 3.0), (3, 1.0), (2, 2.0)] {
        let gs = solve_ground_state(n, s).unwrap();
        assert!(rel(gs.energy, gs.energy_from_mass) < 1e-6);
        assert!(rel(gs.energy, gs.energy_from_gradient) < 1e-6);
        // f(x*) = H(Q) M(Q)^α.
        let alpha = gs.alpha.unwrap();
        assert!(rel(gs.f_x_star.unwrap(), gs.energy * gs.mass.powf(alpha)) < 1e-6);
        assert!(rel(gs.x_star.unwrap(), gs.grad_norm() * gs.norm().powf(alpha)) < 1e-6);
    }
}

#[test]
fn sharp_constant_is_attained_at_q() {
    for (n, s) in [(1, 2.0), (1, 3.0), (2, 1.0), (3, 1.0)] {
        let gs = solve_ground_state(n, s).unwrap();
        let j = weinstein_ratio(n, s, gs.mass, gs.grad_sq, gs.lp_norm_pow);
        assert!((j * gs.gn_constant - 1.0).abs() < 1e-6, "({n}, {s})");
    }
}

#[test]
fn gn_k_examples() {
    assert!((gn_k(1, 2.0) - 3.0).abs() < 1e-15);
    assert!((gn_k(2, 1.0) - 2.0).abs() < 1e-15);
    // n = 3, σ = 1: 4 · 1^{1/2} / 3^{3/2}.
    assert!((gn_k(3, 1.0) - 4.0 / 27f64.sqrt()).abs() < 1e-15);
}

#[test]
fn indices() {
    assert_eq!(critical_index(1, 2.0), 0.0);
    assert_eq!(critical_index(2, 1.0), 0.0);
    assert_eq!(critical_index(3, 1.0), 0.5);
    assert!(scaling_index(1, 2.0).is_none());
    assert_eq!(scaling_index(3, 1.0), Some(1.0));
    assert_eq!(scaling_index(1, 3.0), Some(5.0));
    // α = (1 - s_c)/s_c away from the critical case.
    for (n, s) in [(1, 4.0), (2, 1.5), (3, 0.8)] {
        let sc = critical_index(n, s);
        assert!((scaling_index(n, s).unwrap() - (1.0 - sc) / sc).abs() < 1e-12);
    }
}

#[test]
fn rejected_nonlinearities() {
    assert!(matches!(validate_nonlinearity(3, 2.0), Err(SnlsError::EnergySupercritical { .. })));
    assert!(matches!(validate_nonlinearity(1, -1.0), Err(SnlsError::InvalidParameter(_))));
    assert!(matches!(validate_nonlinearity(0, 1.0), Err(SnlsError::InvalidParameter(_))));
    assert!(matches!(solve_ground_state(4, 0.5), Err(SnlsError::UnsupportedDimension(4))));
}

#[test]
fn corrupted_scalars_are_named() {
    let mut gs = solve_ground_state(1, 3.0).unwrap();
    gs.grad_sq *= 1.001;
    let f = gs.check(1e-8).unwrap_err();
    assert_eq!(f.name, "pohozaev_gradient");
    let mut gs = solve_ground_state(1, 3.0).unwrap();
    gs.lp_norm_pow *= 1.001;
    assert_eq!(gs.check(1e-8).unwrap_err().name, "pohozaev_potential");
}

#[test]
fn radial_profile_decays_and_interpolates() {
    let gs = solve_ground_state(2, 1.0).unwrap();
    assert!((gs.radial_value(0.0) - gs.peak).abs() < 1e-12);
    let mut prev = gs.peak;
    for i in 1..200 {
        let v = gs.radial_value(i as f64 * 0.1);
        assert!(v <= prev + 1e-12 && v >= 0.0);
        prev = v;
    }
    assert!(gs.radial_value(30.0) < 1e-10);
}
