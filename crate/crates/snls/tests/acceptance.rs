//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::time::Instant;

use snls::lab::{EnsembleSummary, Lab};
use snls::presets;
use snls::verify::{self, Check, GROUND_STATE_CASES};
use snls_core::dynamics::Status;
use snls_core::theory::t_star_additive_critical;

const SEED: u64 = 20_240_611;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn from_checks(id: &'static str, checks: &[Check]) -> Outcome {
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} = {:.3e} (tol {:.1e}; {})", c.name, c.value, c.tolerance, c.detail))
        .collect();
    let worst = checks
        .iter()
        .map(|c| format!("{} {:.2e}", c.name, c.value))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome {
        id,
        passed: failed.is_empty() && !checks.is_empty(),
        detail: if failed.is_empty() { worst } else { failed.join("; ") },
    }
}

fn errored(id: &'static str, e: impl std::fmt::Display) -> Outcome {
    Outcome {
        id,
        passed: false,
        detail: format!("error: {e}"),
    }
}

fn lab(name: &str) -> Lab {
    Lab::new(presets::preset(name).expect("preset exists")).expect("preset builds")
}

fn ground_states() -> Outcome {
    let checks: Vec<Check> = GROUND_STATE_CASES.iter().map(|&(n, s)| verify::ground_state_check(n, s)).collect();
    from_checks("ground-state residuals and energy identities", &checks)
}

fn gagliardo_nirenberg() -> Outcome {
    from_checks("sharp Gagliardo-Nirenberg equality and strict inequality", &verify::gn_sharpness(SEED, 20))
}

fn multiplicative_mass() -> Outcome {
    let id = "multiplicative mass over 1e5 steps";
    match (verify::mass_conservation(2.0, 100_000), verify::mass_conservation(3.0, 100_000)) {
        (Ok(a), Ok(b)) => from_checks(id, &[a, b]),
        (Err(e), _) | (_, Err(e)) => errored(id, e),
    }
}

fn deterministic_dichotomy() -> Outcome {
    let id = "deterministic critical dichotomy";
    let below = match lab("det-critical-below").trajectory(0) {
        Ok(r) => r,
        Err(e) => return errored(id, e),
    };
    let g0 = below.initial.grad_sq.sqrt();
    let sup = below.samples.iter().map(|s| s.grad_sq.sqrt()).fold(0.0, f64::max);
    let survived = below.status == Status::Survived && below.final_time >= 10.0 - 1e-9 && sup.is_finite();
    let above = match lab("det-critical-above").trajectory_document(0) {
        Ok(d) => d,
        Err(e) => return errored(id, e),
    };
    let (bracket_ok, bracket) = match above.bracket {
        Some(b) => (b.relative_width() <= 0.2, format!("t_b in [{:.5}, {:.5}], width {:.2}%", b.lower, b.upper, 100.0 * b.relative_width())),
        None => (false, format!("no bracket, status {:?}", above.result.status)),
    };
    Outcome {
        id,
        passed: survived && bracket_ok,
        detail: format!(
            "0.8 M(Q): {:?} to t = {}, sup ‖∇u‖/‖∇u₀‖ = {:.3}; 1.1 Q: {bracket}",
            below.status,
            below.final_time,
            sup / g0
        ),
    }
}

fn virial() -> Outcome {
    let id = "virial chain order and accuracy";
    match verify::virial_chain(2e-3) {
        Ok(c) => from_checks(id, &c),
        Err(e) => errored(id, e),
    }
}

fn drift(id: &'static str, preset: &str, checkpoints: usize) -> Outcome {
    match verify::drift_ensemble(preset, 1000, SEED, snls::lab::default_workers()) {
        Ok(c) => {
            let mut o = from_checks(id, std::slice::from_ref(&c));
            o.passed &= c.detail.starts_with(&format!("{checkpoints} checkpoints"));
            o.detail = format!("{}; {}", c.detail, o.detail);
            o
        }
        Err(e) => errored(id, e),
    }
}

fn theory() -> Outcome {
    let id = "theory determinism, ε*(0) and monotonicity";
    let mut mismatched: Vec<String> = Vec::new();
    for name in presets::NAMES {
        let once = lab(name).theory().map(|r| serde_json::to_vec(&r).unwrap());
        let twice = lab(name).theory().map(|r| serde_json::to_vec(&r).unwrap());
        match (once, twice) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => mismatched.push(name.to_string()),
        }
    }
    let eps = t_star_additive_critical(0.0, 1.0, 1.0).map(|a| a.eps_star).unwrap_or(f64::NAN);
    let eps_err = (eps - (3.0 * 10f64.sqrt() - 9.0)).abs();
    let mono = verify::theory_monotonicity(SEED, 100);
    Outcome {
        id,
        passed: mismatched.is_empty() && eps_err <= 1e-12 && mono.passed,
        detail: format!(
            "{} presets bit-identical, mismatched {mismatched:?}; |ε*(0) - (3√10 - 9)| = {eps_err:.1e}; {} monotonicity violations",
            presets::NAMES.len() - mismatched.len(),
            mono.value
        ),
    }
}

fn ensemble(name: &str, workers: usize) -> snls::Result<EnsembleSummary> {
    Ok(lab(name).ensemble(workers)?.0)
}

fn stochastic_regimes() -> Outcome {
    let id = "stochastic survival below T* and blow-up";
    let workers = snls::lab::default_workers();
    let (surv, blow) = match (ensemble("mult-survival-below-tstar", workers), ensemble("blowup-mult", workers)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return errored(id, e),
    };
    let below = surv
        .theory_comparison
        .iter()
        .find(|c| c.name == "survival_below_t_star_mult" && c.theoretical.is_some_and(|t| surv.stats.t_end < t));
    let lo = below.and_then(|c| c.interval).map_or(0.0, |i| i.lo);
    let bf = blow.stats.blowup_fraction;
    Outcome {
        id,
        passed: lo > 0.0 && bf.successes > 0 && bf.trials == 100 && !surv.any_violated && !blow.any_violated,
        detail: format!(
            "survival {}/{} to T = {} (Wilson lo {lo:.3}); blow-up {}/{}; violated: {} / {}",
            surv.stats.survival.successes,
            surv.stats.survival.trials,
            surv.stats.t_end,
            bf.successes,
            bf.trials,
            surv.any_violated,
            blow.any_violated
        ),
    }
}

fn worker_independence() -> Outcome {
    let id = "summaries independent of worker count";
    let mut differing = Vec::new();
    for name in ["blowup-mult", "add-mass-drift"] {
        let one = ensemble(name, 1).map(|s| serde_json::to_vec(&s).unwrap());
        let eight = ensemble(name, 8).map(|s| serde_json::to_vec(&s).unwrap());
        match (one, eight) {
            (Ok(a), Ok(b)) if a == b => {}
            (Err(e), _) | (_, Err(e)) => return errored(id, e),
            _ => differing.push(name),
        }
    }
    Outcome {
        id,
        passed: differing.is_empty(),
        detail: format!("1 vs 8 workers on blowup-mult and add-mass-drift; differing {differing:?}"),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1", ground_states),
        ("2", gagliardo_nirenberg),
        ("3", multiplicative_mass),
        ("4", deterministic_dichotomy),
        ("5", virial),
        ("6", || drift("additive mass drift", "add-mass-drift", 5)),
        ("7", || drift("multiplicative energy drift", "mult-energy-drift", 3)),
        ("8", theory),
        ("9", stochastic_regimes),
        ("10", worker_independence),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let o = f();
        failures += usize::from(!o.passed);
        println!(
            "{} [{n}] {}: {} ({:.1} s)",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
