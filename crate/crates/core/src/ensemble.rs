//! Ensemble statistics: Wilson intervals, censored hitting-time moments,
//! checkpoint drifts and one-sided comparison against a [`TheoryReport`].
//!
//! Aggregation here is single-threaded over records in index order, so a
//! summary depends only on the records, never on how they were produced.

use crate::dynamics::{HitTimes, Status, TrajectoryResult};
use crate::noise::NoiseType;
use crate::theory::{Bound, TheoryReport};
use crate::{Result, SnlsError};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Drift checks pass while `|z| <= Z_DRIFT`.
pub const Z_DRIFT: f64 = 3.0;

/// Fraction of failed runs above which a summary is flagged unusable.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: usize, n: usize, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    Interval {
        lo: if k == 0 { 0.0 } else { (centre - half).max(0.0) },
        hi: if k >= n { 1.0 } else { (centre + half).min(1.0) },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub interval: Interval,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        Self {
            successes,
            trials,
            estimate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
            interval: wilson(successes, trials, Z95),
        }
    }
}

/// Sample mean with its standard error and raw second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub second_moment: f64,
}

impl MeanSe {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return Self::default();
        }
        let nf = n as f64;
        let mean = v.iter().sum::<f64>() / nf;
        let second_moment = v.iter().map(|x| x * x).sum::<f64>() / nf;
        let se = if n > 1 {
            (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0) / nf).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            mean,
            se,
            second_moment,
        }
    }

    /// `mean / se`, zero when both vanish.
    pub fn z_score(&self, expected: f64) -> f64 {
        let d = self.mean - expected;
        if self.se > 0.0 {
            d / self.se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    }
}

/// Statistics of a stopping time censored at `t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitStats {
    pub name: String,
    pub reached: usize,
    pub censored: usize,
    /// Moments of `min(τ, t_end)` over all usable runs.
    pub censored_time: MeanSe,
}

/// Ensemble means of the observables at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    /// Nominal checkpoint time.
    pub t: f64,
    /// Mean of the actual sample times.
    pub t_mean: f64,
    pub mass: MeanSe,
    pub energy: MeanSe,
    pub grad_sq: MeanSe,
    pub variance: MeanSe,
    /// `M(t) - M(u₀)`.
    pub mass_increment: MeanSe,
    /// `H(t) - H(u₀)`.
    pub energy_increment: MeanSe,
    /// `H(t) - H(u₀) - ½∫₀ᵗ∫|u|² f1_φ`.
    pub energy_residual: MeanSe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub theoretical: Option<f64>,
    pub empirical: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub verdict: Verdict,
    pub note: String,
}

/// Aggregated statistics of an ensemble of trajectory records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_traj: usize,
    pub t_end: f64,
    pub survived: usize,
    pub blownup: usize,
    pub failed: usize,
    pub failed_fraction: f64,
    /// More than 20% of runs failed.
    pub unusable: bool,
    /// `P(τ* > t_end)` over non-failed runs.
    pub survival: Proportion,
    pub blowup_fraction: Proportion,
    /// `min(t_b, t_end)` over non-failed runs.
    pub censored_blowup_time: MeanSe,
    pub hits: Vec<HitStats>,
    pub checkpoints: Vec<CheckpointStats>,
    /// `E sup_{s<=t_end} M(u(s))` over recorded samples.
    pub sup_mass: MeanSe,
    /// Fraction of runs whose mass stayed below `δ² M(Q)`, when tracked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_contained: Option<Proportion>,
}

/// Whether the run was alive at time `t`. Failed runs count only up to their failure time.
pub fn survived_to(r: &TrajectoryResult, t: f64) -> bool {
    match &r.status {
        Status::Survived => t <= r.final_time,
        Status::Blownup { t_b, .. } => *t_b > t,
        Status::Failed { t: tf, .. } => *tf > t,
    }
}

/// Empirical `P(τ* > t)` with its Wilson interval.
pub fn estimate_survival(records: &[TrajectoryResult], t: f64) -> Proportion {
    let k = records.iter().filter(|r| survived_to(r, t)).count();
    Proportion::new(k, records.len())
}

pub fn summarize(records: &[TrajectoryResult], t_end: f64, checkpoint_times: &[f64]) -> EnsembleStats {
    let n = records.len();
    let ok: Vec<&TrajectoryResult> = records.iter().filter(|r| !r.status.is_failed()).collect();
    let failed = n - ok.len();
    let blownup = ok.iter().filter(|r| r.status.blowup_time().is_some()).count();
    let survived = ok.len() - blownup;
    let failed_fraction = if n == 0 { 0.0 } else { failed as f64 / n as f64 };

    let hits = HitTimes::NAMES
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let times: Vec<Option<f64>> = ok.iter().map(|r| r.hits.as_array()[i]).collect();
            let reached = times.iter().filter(|t| matches!(t, Some(x) if *x <= t_end)).count();
            HitStats {
                name: name.to_string(),
                reached,
                censored: ok.len() - reached,
                censored_time: MeanSe::from_values(times.iter().map(|t| t.map_or(t_end, |x| x.min(t_end)))),
            }
        })
        .collect();

    let checkpoints = checkpoint_times
        .iter()
        .enumerate()
        .map(|(ci, &t)| {
            let pairs: Vec<_> = ok
                .iter()
                .filter_map(|r| r.checkpoint_samples.get(ci).copied().flatten().map(|s| (r.initial, s)))
                .collect();
            let col = |f: &dyn Fn(&crate::observables::Observables, &crate::observables::Observables) -> f64| {
                MeanSe::from_values(pairs.iter().map(|(a, b)| f(a, b)))
            };
            CheckpointStats {
                t,
                t_mean: col(&|_, b| b.t).mean,
                mass: col(&|_, b| b.mass),
                energy: col(&|_, b| b.energy),
                grad_sq: col(&|_, b| b.grad_sq),
                variance: col(&|_, b| b.variance),
                mass_increment: col(&|a, b| b.mass - a.mass),
                energy_increment: col(&|a, b| b.energy - a.energy),
                energy_residual: col(&|a, b| b.energy - a.energy - b.noise_energy_integral),
            }
        })
        .collect();

    let sup_mass = MeanSe::from_values(ok.iter().map(|r| {
        r.samples.iter().map(|s| s.mass).fold(r.initial.mass, f64::max)
    }));
    let tracked: Vec<bool> = ok.iter().filter_map(|r| r.mass_contained).collect();
    let mass_contained = if tracked.is_empty() {
        None
    } else {
        Some(Proportion::new(tracked.iter().filter(|&&b| b).count(), tracked.len()))
    };

    EnsembleStats {
        n_traj: n,
        t_end,
        survived,
        blownup,
        failed,
        failed_fraction,
        unusable: failed_fraction > MAX_FAILED_FRACTION,
        survival: Proportion::new(survived, ok.len()),
        blowup_fraction: Proportion::new(blownup, ok.len()),
        censored_blowup_time: MeanSe::from_values(
            ok.iter().map(|r| r.status.blowup_time().map_or(t_end, |t| t.min(t_end))),
        ),
        hits,
        checkpoints,
        sup_mass,
        mass_contained,
    }
}

/// Survival to `t_end < T` is predicted with positive probability.
fn survival_check(name: &str, bound: &Bound, s: &EnsembleStats) -> Option<Comparison> {
    let b = bound.value()?;
    let p = s.survival;
    let (verdict, note) = if s.t_end >= b {
        (Verdict::Inconclusive, "t_end is not below the bound; the theorem says nothing".to_string())
    } else if p.successes > 0 {
        (Verdict::Consistent, "positive survival observed below the bound".to_string())
    } else {
        (
            Verdict::Inconclusive,
            "no survivor; a positive probability may lie below resolution".to_string(),
        )
    };
    Some(Comparison {
        name: name.into(),
        theoretical: Some(b),
        empirical: Some(p.estimate),
        interval: Some(p.interval),
        z_score: None,
        verdict,
        note,
    })
}

/// `E τ* >= T` compared through `min(τ̂, t_end)`; only an uncensored sample can violate it.
fn censored_mean_check(name: &str, bound: &Bound, s: &EnsembleStats) -> Option<Comparison> {
    let b = bound.value()?;
    let m = s.censored_blowup_time;
    let censored = s.survived;
    let upper = m.mean + Z95 * m.se;
    let (verdict, note) = if censored == 0 && upper < b {
        (Verdict::Violated, "uncensored mean blow-up time below the bound".to_string())
    } else if m.mean >= b {
        (Verdict::Consistent, format!("censored mean reaches the bound ({censored} censored)"))
    } else if censored > 0 {
        (
            Verdict::Inconclusive,
            format!("{censored} runs censored at t_end; the censored mean underestimates E τ*"),
        )
    } else {
        (Verdict::Inconclusive, "interval overlaps the bound".to_string())
    };
    Some(Comparison {
        name: name.into(),
        theoretical: Some(b),
        empirical: Some(m.mean),
        interval: Some(Interval {
            lo: m.mean - Z95 * m.se,
            hi: upper,
        }),
        z_score: None,
        verdict,
        note,
    })
}

fn drift_check(name: &str, expected: f64, m: &MeanSe, t: f64) -> Comparison {
    let z = m.z_score(expected);
    let verdict = if m.n < 2 {
        Verdict::Inconclusive
    } else if z.abs() <= Z_DRIFT {
        Verdict::Consistent
    } else {
        Verdict::Violated
    };
    Comparison {
        name: format!("{name}@{t}"),
        theoretical: Some(expected),
        empirical: Some(m.mean),
        interval: Some(Interval {
            lo: m.mean - Z_DRIFT * m.se,
            hi: m.mean + Z_DRIFT * m.se,
        }),
        z_score: Some(z),
        verdict,
        note: format!("n = {}", m.n),
    }
}

/// One-sided comparison of ensemble statistics with the closed-form report.
///
/// `summary_hash` and `report_hash` identify the configurations both were
/// computed from and must agree.
pub fn compare_with_theory(
    stats: &EnsembleStats,
    summary_hash: &str,
    report: &TheoryReport,
    report_hash: &str,
) -> Result<Vec<Comparison>> {
    if summary_hash != report_hash {
        return Err(SnlsError::HashMismatch {
            summary: summary_hash.into(),
            report: report_hash.into(),
        });
    }
    let mut out = Vec::new();
    out.extend(survival_check("survival_below_t_star_mult", &report.t_star_mult, stats));
    out.extend(survival_check("survival_below_t_star_mult_random", &report.t_star_mult_random, stats));
    out.extend(censored_mean_check("mean_blowup_time_vs_t_star_mult", &report.t_star_mult, stats));
    if let Some(ac) = &report.additive_critical {
        out.extend(censored_mean_check("mean_blowup_time_vs_t_star_add_crit", &ac.t_star, stats));
    }
    if let Some(ai) = &report.additive_intercritical {
        out.extend(survival_check("survival_below_t_tilde_add_inter", &ai.t_tilde, stats));
    }
    if report.s_c == 0.0 && report.position.class == crate::observables::Dichotomy::GlobalSide && report.noise_type != NoiseType::Additive {
        let p = stats.survival;
        out.push(Comparison {
            name: "critical_global_existence".into(),
            theoretical: Some(1.0),
            empirical: Some(p.estimate),
            interval: Some(p.interval),
            z_score: None,
            verdict: if p.interval.hi < 1.0 { Verdict::Violated } else { Verdict::Consistent },
            note: "mass below M(Q) gives global existence almost surely".into(),
        });
    }
    for ledger in &report.blowup_ledgers {
        let p = stats.blowup_fraction;
        let (verdict, note) = if !ledger.satisfied {
            (Verdict::Inconclusive, "sufficient condition not satisfied".to_string())
        } else if p.successes > 0 {
            (Verdict::Consistent, "blow-up observed".to_string())
        } else {
            (Verdict::Inconclusive, "no blow-up observed; the probability may lie below resolution".to_string())
        };
        out.push(Comparison {
            name: format!("blowup_{}", ledger.name),
            theoretical: None,
            empirical: Some(p.estimate),
            interval: Some(p.interval),
            z_score: None,
            verdict,
            note,
        });
    }
    if report.blowup_ledgers.is_empty() && report.position.class == crate::observables::Dichotomy::BlowupSide {
        let p = stats.blowup_fraction;
        out.push(Comparison {
            name: "blowup_side".into(),
            theoretical: None,
            empirical: Some(p.estimate),
            interval: Some(p.interval),
            z_score: None,
            verdict: if p.successes > 0 { Verdict::Consistent } else { Verdict::Inconclusive },
            note: "data on the blow-up side; no ledger evaluated".into(),
        });
    }

    match report.noise_type {
        NoiseType::Additive => {
            let hs00 = report.noise_constants.hs00;
            let hs01 = report.noise_constants.hs01;
            for c in &stats.checkpoints {
                out.push(drift_check("mass_drift", c.t_mean * hs00, &c.mass_increment, c.t));
                let bound = 0.5 * hs01 * c.t_mean;
                let m = &c.energy_increment;
                let excess = m.mean - bound;
                out.push(Comparison {
                    name: format!("energy_bound@{}", c.t),
                    theoretical: Some(bound),
                    empirical: Some(m.mean),
                    interval: Some(Interval {
                        lo: m.mean - Z_DRIFT * m.se,
                        hi: m.mean + Z_DRIFT * m.se,
                    }),
                    z_score: Some(if m.se > 0.0 { excess / m.se } else { 0.0 }),
                    verdict: if m.n < 2 {
                        Verdict::Inconclusive
                    } else if excess > Z_DRIFT * m.se {
                        Verdict::Violated
                    } else {
                        Verdict::Consistent
                    },
                    note: "E H(t) <= H(u₀) + ½ hs01 t".into(),
                });
            }
            if let Some(ap) = &report.apriori {
                let m = stats.sup_mass;
                let lo = m.mean - Z_DRIFT * m.se;
                out.push(Comparison {
                    name: "expected_sup_mass".into(),
                    theoretical: Some(ap.e_sup_mass),
                    empirical: Some(m.mean),
                    interval: Some(Interval {
                        lo,
                        hi: m.mean + Z_DRIFT * m.se,
                    }),
                    z_score: None,
                    verdict: if report.t != stats.t_end {
                        Verdict::Inconclusive
                    } else if lo > ap.e_sup_mass {
                        Verdict::Violated
                    } else {
                        Verdict::Consistent
                    },
                    note: "sup over recorded samples; needs theory t = t_end".into(),
                });
            }
        }
        NoiseType::Multiplicative => {
            for c in &stats.checkpoints {
                out.push(drift_check("energy_drift", 0.0, &c.energy_residual, c.t));
                let m = &c.mass_increment;
                out.push(Comparison {
                    name: format!("mass_conservation@{}", c.t),
                    theoretical: Some(0.0),
                    empirical: Some(m.mean),
                    interval: None,
                    z_score: None,
                    verdict: if m.mean.abs() <= 1e-10 * c.mass.mean.max(1e-300) {
                        Verdict::Consistent
                    } else {
                        Verdict::Violated
                    },
                    note: "relative tolerance 1e-10".into(),
                });
            }
        }
        NoiseType::None => {}
    }
    Ok(out)
}
