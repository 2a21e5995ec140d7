//! Invariant suites behind `snls verify`.
//!
//! Each check is a plain function returning a [`Check`], so the acceptance
//! suite and the CLI share one implementation.

use crate::error::Result;
use crate::lab::{Lab, OUTPUT_SCHEMA};
use crate::presets;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use snls_core::dynamics::{run_trajectory, Adaptivity, SimConfig};
use snls_core::ensemble::Verdict;
use snls_core::grid::{mode_index, FftPlanner, Fft1d, FieldState, Grid, GridSpec, NaiveDft, RustFftPlanner};
use snls_core::ground_state::{solve_ground_state, GroundState};
use snls_core::initial::InitialData;
use snls_core::noise::{CovarianceSpec, NoiseField, NoiseType};
use snls_core::rng::NoisePath;
use snls_core::theory::{t_star_additive_critical, t_star_multiplicative};
use snls_core::{critical_index, Complex64};
use std::path::Path;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            schema_version: OUTPUT_SCHEMA,
            suite: suite.into(),
            seed,
            checks,
            passed,
        }
    }
}

pub const GROUND_STATE_CASES: [(usize, f64); 4] = [(1, 2.0), (1, 3.0), (2, 1.0), (3, 1.0)];

/// Pokhozhaev residuals and the three expressions of `H(Q)`.
pub fn ground_state_check(dim: usize, sigma: f64) -> Check {
    let start = Instant::now();
    let tol = GroundState::default_tolerance(dim);
    let name = format!("ground_state_n{dim}_sigma{sigma}");
    match solve_ground_state(dim, sigma) {
        Ok(gs) => residual_check(&name, &gs, tol, start),
        Err(e) => Check {
            name,
            passed: false,
            value: f64::NAN,
            tolerance: tol,
            detail: e.to_string(),
        },
    }
}

fn residual_check(name: &str, gs: &GroundState, tol: f64, start: Instant) -> Check {
    let (worst, value) = gs
        .residuals()
        .into_iter()
        .fold(("", 0.0f64), |acc, (n, v)| if !(v <= acc.1) { (n, v) } else { acc });
    let failure = gs.check(tol).err();
    Check {
        name: name.into(),
        passed: failure.is_none(),
        value,
        tolerance: tol,
        detail: match failure {
            Some(f) => format!("residual {} = {:e} exceeds {:e}", f.name, f.value, f.tolerance),
            None => format!("largest residual {worst}; {:.0} ms", start.elapsed().as_secs_f64() * 1e3),
        },
    }
}

/// Residual check of a ground state read from a JSON file.
pub fn ground_state_file_check(path: &Path) -> Result<Check> {
    let gs: GroundState = crate::io::read_json(path)?;
    let tol = GroundState::default_tolerance(gs.dim);
    Ok(residual_check(
        &format!("ground_state_file {}", path.display()),
        &gs,
        tol,
        Instant::now(),
    ))
}

fn gn_ratio(u: &mut FieldState, dim: usize, sigma: f64, c_gn: f64) -> f64 {
    let n = dim as f64;
    let lp = u.lp_norm_pow(2.0 * sigma + 2.0);
    let g = u.gradient_norm_sq();
    let m = u.mass();
    lp / (c_gn * g.powf(n * sigma / 2.0) * m.powf((2.0 - (n - 2.0) * sigma) / 2.0))
}

fn random_smooth_field(grid: &std::sync::Arc<Grid>, rng: &mut ChaCha8Rng) -> FieldState {
    let bumps: Vec<(Vec<f64>, f64, f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| {
            let c: Vec<f64> = (0..grid.dim()).map(|_| rng.random_range(-3.0..3.0)).collect();
            (c, rng.random_range(0.3..2.0), rng.random_range(0.8..2.5), rng.random_range(0.0..6.28))
        })
        .collect();
    FieldState::from_fn(grid.clone(), |x| {
        bumps
            .iter()
            .map(|(c, a, w, th)| {
                let r2: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
                Complex64::from_polar(a * (-r2 / (w * w)).exp(), *th + 0.2 * x[0])
            })
            .sum()
    })
}

/// Equality of the sharp inequality at `Q` and strict inequality on `count` random fields.
pub fn gn_sharpness(seed: u64, count: usize) -> Vec<Check> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (dim, sigma, l, n) in [(1usize, 2.0, 40.0, 1024usize), (1, 3.0, 40.0, 1024), (2, 1.0, 24.0, 128)] {
        let gs = match solve_ground_state(dim, sigma) {
            Ok(gs) => gs,
            Err(e) => {
                out.push(Check::below(format!("gn_equality_n{dim}_sigma{sigma}"), f64::NAN, 1e-6, e.to_string()));
                continue;
            }
        };
        let n_f = dim as f64;
        let closed = gs.lp_norm_pow
            / (gs.gn_constant
                * gs.grad_sq.powf(n_f * sigma / 2.0)
                * gs.mass.powf((2.0 - (n_f - 2.0) * sigma) / 2.0));
        let grid = Grid::with_default_backend(GridSpec::cube(dim, l, n).with_dealias(1.0)).expect("valid grid");
        let mut q = FieldState::from_fn(grid.clone(), |x| Complex64::new(gs.value_at(x), 0.0));
        let sampled = gn_ratio(&mut q, dim, sigma, gs.gn_constant);
        out.push(Check::below(
            format!("gn_equality_n{dim}_sigma{sigma}"),
            (closed - 1.0).abs().max((sampled - 1.0).abs()),
            1e-6,
            format!("ratio at Q: {closed:.12} from the profile integrals, {sampled:.12} on the grid"),
        ));
        let worst = (0..count)
            .map(|_| gn_ratio(&mut random_smooth_field(&grid, &mut rng), dim, sigma, gs.gn_constant))
            .fold(0.0f64, f64::max);
        out.push(Check {
            name: format!("gn_strict_n{dim}_sigma{sigma}"),
            passed: worst < 1.0,
            value: worst,
            tolerance: 1.0,
            detail: format!("largest ratio over {count} random smooth fields"),
        });
    }
    out
}

fn random_field(grid: &std::sync::Arc<Grid>, rng: &mut ChaCha8Rng) -> FieldState {
    let v = (0..grid.len())
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    FieldState::new(grid.clone(), v).expect("sizes match")
}

/// Parseval and forward/inverse identity on random fields in 1 to 3 dimensions.
pub fn parseval(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (dim, n) in [(1usize, 256usize), (2, 32), (3, 16)] {
        let grid = Grid::with_default_backend(GridSpec::cube(dim, 10.0, n)).expect("valid grid");
        let mut u = random_field(&grid, &mut rng);
        let m = u.mass();
        worst = worst.max((m - u.spectral_mass()).abs() / m);
        let orig = u.values().to_vec();
        let mut spec = u.spectrum().to_vec();
        let mut work = grid.workspace();
        grid.transform(&mut spec, &mut work, true);
        let norm: f64 = orig.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = orig.iter().zip(&spec).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(err / norm);
    }
    Check::below("parseval_roundtrip", worst, 1e-12, "relative, dims 1-3")
}

/// FFT backend against the direct DFT.
pub fn fft_oracle(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for n in [8usize, 30, 64, 96] {
        let data: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let mut planner = RustFftPlanner::default();
        let fast = planner.plan(n);
        let naive = NaiveDft::new(n);
        for inverse in [false, true] {
            let mut a = data.clone();
            let mut b = data.clone();
            let mut s1 = vec![Complex64::new(0.0, 0.0); fast.scratch_len()];
            let mut s2 = vec![Complex64::new(0.0, 0.0); naive.scratch_len()];
            fast.process(&mut a, &mut s1, inverse);
            naive.process(&mut b, &mut s2, inverse);
            let scale: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let err: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(err / scale);
        }
    }
    Check::below("fft_vs_direct_dft", worst, 1e-12, "relative, lengths 8, 30, 64, 96")
}

/// Retained-mode count of the 2/3 rule against direct enumeration.
pub fn dealias_count() -> Check {
    let mut bad = 0.0;
    for n in [8usize, 16, 64, 256, 1000] {
        let grid = Grid::with_default_backend(GridSpec::cube(1, 1.0, n)).expect("valid grid");
        let kept = grid.dealias_mask().iter().filter(|&&k| k).count();
        let expected = (0..n)
            .filter(|&j| (mode_index(j, n).unsigned_abs() as f64) <= (2.0 / 3.0) * (n / 2) as f64)
            .count();
        let symmetric = (0..n).all(|j| {
            let k = mode_index(j, n);
            let kept_k = grid.dealias_mask()[j];
            match snls_core::grid::mode_slot(-k, n) {
                Some(m) => grid.dealias_mask()[m] == kept_k || k.unsigned_abs() as usize == n / 2,
                None => true,
            }
        });
        if kept != expected || !symmetric {
            bad += 1.0;
        }
    }
    Check::below("dealias_mode_count", bad, 0.0, "grids with a wrong or asymmetric retained set")
}

/// Largest `|M(t)/M(0) - 1|` over a multiplicative run of `steps` steps.
pub fn mass_conservation(sigma: f64, steps: u64) -> Result<Check> {
    let name = if sigma == 2.0 { "mult-mass-check" } else { "mult-mass-check-sigma3" };
    let mut cfg = presets::preset(name).expect("preset exists");
    cfg.physics.sigma = sigma;
    cfg.run.t_end = steps as f64 * cfg.run.dt;
    cfg.run.record_stride = (steps / 100).max(1) as usize;
    let lab = Lab::new(cfg)?;
    let start = Instant::now();
    let r = lab.trajectory(0)?;
    let m0 = r.initial.mass;
    let worst = r.samples.iter().map(|s| (s.mass / m0 - 1.0).abs()).fold(0.0, f64::max);
    let detail = format!(
        "{} steps, status {:?}, {:.1} s",
        r.accepted_steps,
        r.status,
        start.elapsed().as_secs_f64()
    );
    let mut c = Check::below(format!("mass_conservation_sigma{sigma}"), worst, 1e-10, detail);
    c.passed &= r.accepted_steps >= steps && !r.status.is_failed();
    Ok(c)
}

/// Relative errors of the centred differences `V' - 4G` and `G' - (2nσH - 2σ s_c ‖∇u‖²)`
/// along a deterministic trajectory with step `dt`.
pub fn virial_errors(dt: f64) -> Result<(f64, f64)> {
    let (dim, sigma) = (1usize, 2.0);
    let grid = Grid::with_default_backend(GridSpec::cube(dim, 40.0, 512).with_dealias(1.0))?;
    let u0 = InitialData::Gaussian {
        amplitude: 0.8,
        width: 1.5,
        chirp: 0.3,
    }
    .sample(grid.clone(), None, NoisePath::new(0, 0))?;
    let cfg = SimConfig {
        sigma,
        dt,
        t_end: 0.5,
        blowup_gradient: 100.0,
        spectral_tail_limit: 0.1,
        adaptivity: Adaptivity::Fixed,
        record_stride: 1,
        refinement: 0,
        checkpoints: Vec::new(),
        thresholds: Default::default(),
    };
    let noise = NoiseField::new(grid, NoiseType::None, &CovarianceSpec::FourierDiagonal { modes: Vec::new() })?;
    let r = run_trajectory(&cfg, u0, &noise, None, NoisePath::new(0, 0))?;
    let s = &r.samples;
    let s_c = critical_index(dim, sigma);
    let ns = dim as f64 * sigma;
    let (mut ev, mut sv, mut eg, mut sg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 1..s.len() - 1 {
        let h2 = s[k + 1].t - s[k - 1].t;
        let dv = (s[k + 1].variance - s[k - 1].variance) / h2;
        let dg = (s[k + 1].virial_g - s[k - 1].virial_g) / h2;
        let rhs_g = 2.0 * ns * s[k].energy - 2.0 * sigma * s_c * s[k].grad_sq;
        ev = ev.max((dv - 4.0 * s[k].virial_g).abs());
        sv = sv.max((4.0 * s[k].virial_g).abs());
        eg = eg.max((dg - rhs_g).abs());
        sg = sg.max(rhs_g.abs());
    }
    Ok((ev / sv, eg / sg))
}

/// Virial chain at `dt` and `dt/2`: final error and observed order.
pub fn virial_chain(dt: f64) -> Result<Vec<Check>> {
    let (v1, g1) = virial_errors(dt)?;
    let (v2, g2) = virial_errors(dt / 2.0)?;
    let ov = (v1 / v2).log2();
    let og = (g1 / g2).log2();
    let mk = |name: &str, e: f64, order: f64| Check {
        name: name.into(),
        passed: e <= 1e-3 && order >= 0.9,
        value: e,
        tolerance: 1e-3,
        detail: format!("error {e:.3e} at dt = {}, observed order {order:.2}", dt / 2.0),
    };
    Ok(vec![mk("virial_v_prime", v2, ov), mk("virial_g_prime", g2, og)])
}

/// Monotonicity sweeps of the closed-form horizons over random parameters.
pub fn theory_monotonicity(seed: u64, draws: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0usize;
    let t = |b: f64, sc: f64, n: usize, m: f64, r: f64| {
        t_star_multiplicative(b, sc, n, m, r).ok().and_then(|x| x.value()).unwrap_or(f64::NAN)
    };
    let ta = |b: f64, h: f64, mq: f64| {
        t_star_additive_critical(b, h, mq).ok().and_then(|x| x.t_star.value()).unwrap_or(f64::NAN)
    };
    for _ in 0..draws {
        let n = rng.random_range(1..=3usize);
        let sc = rng.random_range(0.05..0.95);
        let (b1, b2) = ordered(&mut rng, 0.01, 0.99);
        let (m1, m2) = ordered(&mut rng, 1e-4, 10.0);
        let (r1, r2) = ordered(&mut rng, 0.1, 10.0);
        let m = rng.random_range(1e-3..5.0);
        let r = rng.random_range(0.2..5.0);
        let b = rng.random_range(0.01..0.99);
        if !(t(b1, sc, n, m, r) > t(b2, sc, n, m, r)) {
            violations += 1;
        }
        if !(t(b, sc, n, m1, r) > t(b, sc, n, m2, r)) {
            violations += 1;
        }
        // A larger M(u₀) means a smaller ratio M(Q)/M(u₀).
        if !(t(b, sc, n, m, r2) > t(b, sc, n, m, r1)) {
            violations += 1;
        }
        let (h1, h2) = ordered(&mut rng, 1e-4, 10.0);
        let (q1, q2) = ordered(&mut rng, 0.5, 20.0);
        if !(ta(b, h1, 2.7) > ta(b, h2, 2.7)) || !(ta(b, 0.1, q2) > ta(b, 0.1, q1)) || !(ta(b1, 0.1, 2.7) > ta(b2, 0.1, 2.7)) {
            violations += 1;
        }
    }
    Check::below(
        "theory_monotonicity",
        violations as f64,
        0.0,
        format!("{draws} draws; T*_mult in β, M_φ, M(u₀); T*_add_crit in hs00, M(Q), β"),
    )
}

fn ordered(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> (f64, f64) {
    loop {
        let a = rng.random_range(lo..hi);
        let b = rng.random_range(lo..hi);
        if a != b {
            return (a.min(b), a.max(b));
        }
    }
}

/// Monte Carlo pointwise variance of real increments against `F_φ`, and
/// `E‖ΔW‖²/dt` of complex increments against `hs00`.
pub fn noise_moments(seed: u64, samples: usize) -> Result<Vec<Check>> {
    let grid = Grid::with_default_backend(GridSpec::cube(1, 20.0, 64))?;
    let cov = CovarianceSpec::GaussianSpectrum {
        width: 1.0,
        strength: 0.5,
        cutoff: 2.0,
    };
    let dt = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let real = NoiseField::new(grid.clone(), NoiseType::Multiplicative, &cov)?;
    let x0 = 17;
    let mut coeffs = Vec::new();
    let mut w = vec![0.0; grid.len()];
    let vals: Vec<f64> = (0..samples)
        .map(|_| {
            real.sample_coefficients(dt, &mut rng, &mut coeffs);
            real.synthesize_real(&coeffs, &mut w);
            w[x0] * w[x0] / dt
        })
        .collect();
    let m = snls_core::ensemble::MeanSe::from_values(vals);
    let z = m.z_score(real.f_phi()[x0]);
    out.push(Check::below(
        "noise_pointwise_variance",
        z.abs(),
        3.0,
        format!("Var ΔW(x₀)/dt = {:.6} vs F_φ(x₀) = {:.6}", m.mean, real.f_phi()[x0]),
    ));

    let cplx = NoiseField::new(grid.clone(), NoiseType::Additive, &cov)?;
    let hs00 = cplx.constants(1, 1.0).hs00;
    let mut wc = vec![Complex64::new(0.0, 0.0); grid.len()];
    let h = grid.cell_volume();
    let (mut norms, mut cross) = (Vec::new(), Vec::new());
    for _ in 0..samples {
        cplx.sample_coefficients(dt, &mut rng, &mut coeffs);
        cplx.synthesize_complex(&coeffs, &mut wc);
        norms.push(h * wc.iter().map(|v| v.norm_sqr()).sum::<f64>() / dt);
        cross.push(wc[x0].re * wc[x0].im / dt);
    }
    let m = snls_core::ensemble::MeanSe::from_values(norms);
    out.push(Check::below(
        "additive_increment_norm",
        m.z_score(hs00).abs(),
        3.0,
        format!("E‖ΔW‖²/dt = {:.6} vs hs00 = {hs00:.6}", m.mean),
    ));
    let c = snls_core::ensemble::MeanSe::from_values(cross);
    out.push(Check::below(
        "additive_re_im_correlation",
        c.z_score(0.0).abs(),
        3.0,
        format!("E[Re ΔW Im ΔW]/dt = {:.3e}", c.mean),
    ));
    Ok(out)
}

/// Runs a preset ensemble and checks every drift comparison it reports.
pub fn drift_ensemble(preset: &str, n_traj: usize, seed: u64, workers: usize) -> Result<Check> {
    let mut cfg = presets::preset(preset).expect("preset exists");
    cfg.ensemble.n_traj = n_traj;
    cfg.ensemble.master_seed = seed;
    let lab = Lab::new(cfg)?;
    let (summary, _) = lab.ensemble(workers)?;
    let drifts: Vec<_> = summary
        .theory_comparison
        .iter()
        .filter(|c| c.name.starts_with("mass_drift@") || c.name.starts_with("energy_drift@"))
        .collect();
    let worst = drifts.iter().filter_map(|c| c.z_score).map(f64::abs).fold(0.0, f64::max);
    let all_ok = !drifts.is_empty() && drifts.iter().all(|c| c.verdict == Verdict::Consistent);
    Ok(Check {
        name: format!("drift_{preset}"),
        passed: all_ok && !summary.stats.unusable,
        value: worst,
        tolerance: 3.0,
        detail: format!("{} checkpoints, {n_traj} trajectories, largest |z|", drifts.len()),
    })
}

/// Fast invariant suite.
pub fn quick(seed: u64, ground_state_file: Option<&Path>) -> Result<VerifyReport> {
    let mut checks: Vec<Check> = GROUND_STATE_CASES
        .iter()
        .map(|&(n, s)| ground_state_check(n, s))
        .collect();
    if let Some(p) = ground_state_file {
        checks.push(ground_state_file_check(p)?);
    }
    checks.extend(gn_sharpness(seed, 20));
    checks.push(parseval(seed));
    checks.push(fft_oracle(seed));
    checks.push(dealias_count());
    checks.push(mass_conservation(2.0, 5_000)?);
    checks.push(mass_conservation(3.0, 5_000)?);
    checks.extend(virial_chain(2e-3)?);
    checks.push(theory_monotonicity(seed, 100));
    Ok(VerifyReport::new("quick", seed, checks))
}

/// Seeded Monte Carlo suite.
pub fn statistical(seed: u64, workers: usize) -> Result<VerifyReport> {
    let mut checks = noise_moments(seed, 20_000)?;
    checks.push(drift_ensemble("add-mass-drift", 300, seed, workers)?);
    checks.push(drift_ensemble("mult-energy-drift", 200, seed, workers)?);
    let stats = {
        let mut cfg = presets::preset("mult-critical-survival").expect("preset exists");
        cfg.ensemble.n_traj = 30;
        cfg.ensemble.master_seed = seed;
        Lab::new(cfg)?.ensemble(workers)?.0
    };
    checks.push(Check {
        name: "critical_survival".into(),
        passed: stats.stats.survival.estimate == 1.0 && !stats.any_violated,
        value: stats.stats.survival.estimate,
        tolerance: 1.0,
        detail: format!("{} trajectories below the critical mass", stats.stats.n_traj),
    });
    Ok(VerifyReport::new("statistical", seed, checks))
}
