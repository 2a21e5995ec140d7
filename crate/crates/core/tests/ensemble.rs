use proptest::prelude::*;
use snls_core::dynamics::{BlowupTrigger, HitTimes, Status, TrajectoryResult};
use snls_core::ensemble::*;
use snls_core::grid::{Grid, GridSpec};
use snls_core::ground_state::solve_ground_state;
use snls_core::initial::InitialData;
use snls_core::noise::{CovarianceSpec, NoiseField, NoiseType};
use snls_core::observables::{initial_stats, Observables};
use snls_core::rng::NoisePath;
use snls_core::theory::{theory_report, TheoryInputs, TheoryParams, TheoryReport};
use snls_core::SnlsError;

fn obs(t: f64, mass: f64, energy: f64) -> Observables {
    Observables {
        t,
        mass,
        energy,
        grad_sq: 1.0,
        lp_norm_pow: 1.0,
        variance: 1.0,
        virial_g: 0.0,
        scaled_gradient: 1.0,
        mass_energy: energy,
        boundary_mass_fraction: 0.0,
        spectral_tail: 0.0,
        noise_energy_integral: 0.0,
    }
}

fn record(status: Status, t_end: f64, mass_end: f64) -> TrajectoryResult {
    let final_time = status.blowup_time().unwrap_or(t_end);
    let last = obs(final_time, mass_end, 0.5);
    TrajectoryResult {
        status,
        initial: obs(0.0, 1.0, 0.5),
        samples: vec![obs(0.0, 1.0, 0.5), last],
        checkpoint_samples: vec![if final_time >= t_end { Some(last) } else { None }],
        hits: HitTimes::default(),
        mass_contained: None,
        final_time,
        accepted_steps: 10,
        rejected_steps: 0,
        min_step: 0.1,
    }
}

fn survived(t_end: f64) -> TrajectoryResult {
    record(Status::Survived, t_end, 1.0)
}

fn blown(t: f64, t_end: f64) -> TrajectoryResult {
    record(
        Status::Blownup {
            t_b: t,
            trigger: BlowupTrigger::Gradient,
        },
        t_end,
        1.0,
    )
}

fn failed(t: f64, t_end: f64) -> TrajectoryResult {
    record(
        Status::Failed {
            t,
            reason: "non-finite field".into(),
        },
        t_end,
        1.0,
    )
}

fn global_report() -> TheoryReport {
    let gs = solve_ground_state(1, 3.0).unwrap();
    let g = Grid::with_default_backend(GridSpec::cube(1, 40.0, 256).with_dealias(1.0)).unwrap();
    let mut u = InitialData::ScaledGroundState { scale: 0.9 }.sample(g.clone(), Some(&gs), NoisePath::new(0, 0)).unwrap();
    let o = initial_stats(&mut u, 3.0, gs.alpha);
    let c = NoiseField::new(g, NoiseType::Multiplicative, &CovarianceSpec::GaussianSpectrum { width: 0.3, strength: 0.16, cutoff: 0.8 })
        .unwrap()
        .constants(1, 3.0);
    theory_report(&TheoryInputs {
        gs: &gs,
        noise_type: NoiseType::Multiplicative,
        constants: c,
        initial: o,
        mass_moment: None,
        params: TheoryParams::default(),
    })
    .unwrap()
}

fn find<'a>(c: &'a [Comparison], name: &str) -> &'a Comparison {
    c.iter().find(|x| x.name == name).unwrap_or_else(|| panic!("no {name}"))
}

#[test]
fn wilson_reference_values() {
    let all = wilson(200, 200, Z95);
    assert!(all.lo > 0.98 && all.hi == 1.0);
    let none = wilson(0, 50, Z95);
    assert_eq!(none.lo, 0.0);
    let half = wilson(50, 100, Z95);
    assert!((half.lo - 0.403_8).abs() < 1e-4 && (half.hi - 0.596_2).abs() < 1e-4, "{half:?}");
    assert_eq!(wilson(0, 0, Z95), Interval { lo: 0.0, hi: 1.0 });
}

#[test]
fn mean_and_standard_error() {
    let m = MeanSe::from_values([1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m.mean, 2.5);
    assert!((m.se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    assert_eq!(m.second_moment, 7.5);
    assert!((m.z_score(2.5)).abs() < 1e-15);
    let flat = MeanSe::from_values([2.0, 2.0]);
    assert_eq!(flat.z_score(2.0), 0.0);
    assert_eq!(flat.z_score(1.0), f64::INFINITY);
}

#[test]
fn summary_counts_and_censoring() {
    let t_end = 2.0;
    let recs = vec![survived(t_end), survived(t_end), blown(0.5, t_end), blown(1.0, t_end), failed(0.3, t_end)];
    let s = summarize(&recs, t_end, &[t_end]);
    assert_eq!((s.n_traj, s.survived, s.blownup, s.failed), (5, 2, 2, 1));
    assert!((s.failed_fraction - 0.2).abs() < 1e-15);
    assert!(!s.unusable);
    assert_eq!(s.survival.successes, 2);
    assert_eq!(s.survival.trials, 4);
    assert!((s.censored_blowup_time.mean - (2.0 + 2.0 + 0.5 + 1.0) / 4.0).abs() < 1e-15);
    assert_eq!(s.checkpoints[0].mass.n, 2);
    let p = estimate_survival(&recs, 0.75);
    assert_eq!(p.successes, 3);
    let s = summarize(&[survived(1.0), failed(0.1, 1.0), failed(0.2, 1.0)], 1.0, &[]);
    assert!(s.unusable);
}

#[test]
fn hash_mismatch_is_an_error() {
    let r = global_report();
    let s = summarize(&[survived(1.0)], 1.0, &[]);
    assert!(matches!(compare_with_theory(&s, "a", &r, "b"), Err(SnlsError::HashMismatch { .. })));
}

#[test]
fn survival_verdicts() {
    let r = global_report();
    let t_star = r.t_star_mult.value().unwrap();
    assert!(t_star > 1.0 && t_star.is_finite());
    let below = t_star / 2.0;
    let ok = summarize(&[survived(below), blown(0.1, below)], below, &[]);
    let c = compare_with_theory(&ok, "h", &r, "h").unwrap();
    assert_eq!(find(&c, "survival_below_t_star_mult").verdict, Verdict::Consistent);
    assert_eq!(find(&c, "mean_blowup_time_vs_t_star_mult").verdict, Verdict::Inconclusive);

    let dead = summarize(&[blown(0.1, below), blown(0.2, below), blown(0.15, below)], below, &[]);
    let c = compare_with_theory(&dead, "h", &r, "h").unwrap();
    assert_eq!(find(&c, "survival_below_t_star_mult").verdict, Verdict::Inconclusive);
    assert_eq!(find(&c, "mean_blowup_time_vs_t_star_mult").verdict, Verdict::Violated);

    let late = 2.0 * t_star;
    let past = summarize(&[survived(late)], late, &[]);
    let c = compare_with_theory(&past, "h", &r, "h").unwrap();
    assert_eq!(find(&c, "survival_below_t_star_mult").verdict, Verdict::Inconclusive);
    assert_eq!(find(&c, "mean_blowup_time_vs_t_star_mult").verdict, Verdict::Consistent);
}

#[test]
fn multiplicative_mass_check() {
    let r = global_report();
    let t = 1.0;
    let good = summarize(&[survived(t), survived(t)], t, &[t]);
    let c = compare_with_theory(&good, "h", &r, "h").unwrap();
    assert_eq!(find(&c, "mass_conservation@1").verdict, Verdict::Consistent);
    let bad = summarize(&[record(Status::Survived, t, 1.001), survived(t)], t, &[t]);
    let c = compare_with_theory(&bad, "h", &r, "h").unwrap();
    assert_eq!(find(&c, "mass_conservation@1").verdict, Verdict::Violated);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wilson_is_a_valid_interval(n in 1usize..2000, frac in 0.0f64..=1.0, z in 0.5f64..4.0) {
        let k = ((n as f64) * frac).round() as usize;
        let w = wilson(k, n, z);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= w.lo && w.lo <= p + 1e-12 && p <= w.hi + 1e-12 && w.hi <= 1.0);
        // Interior endpoints solve (p̂ - p)² = z² p(1 - p)/n.
        for e in [w.lo, w.hi] {
            if e > 0.0 && e < 1.0 {
                let lhs = (p - e) * (p - e);
                let rhs = z * z * e * (1.0 - e) / n as f64;
                prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1e-12));
            }
        }
    }

    #[test]
    fn summary_is_order_independent(seed in any::<u64>(), n in 2usize..20) {
        let t_end = 1.0;
        let mut recs: Vec<TrajectoryResult> = (0..n)
            .map(|i| if (seed >> (i % 64)) & 1 == 1 { survived(t_end) } else { blown(0.1 + 0.8 * i as f64 / n as f64, t_end) })
            .collect();
        let a = summarize(&recs, t_end, &[t_end]);
        recs.reverse();
        let b = summarize(&recs, t_end, &[t_end]);
        prop_assert_eq!(a.survived, b.survived);
        prop_assert!((a.censored_blowup_time.mean - b.censored_blowup_time.mean).abs() < 1e-12);
    }
}
