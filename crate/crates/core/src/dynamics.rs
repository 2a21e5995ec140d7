//! Strang split-step integrator with Stratonovich multiplicative or additive noise.
//!
//! One step of size `h`: half nonlinear phase `u ← u e^{-i|u|^{2σ}h/2}`, linear
//! flow `û ← û e^{i|ξ|²h}` (dealiased), closing half nonlinear phase,
//! dealiasing, then the noise substep. Multiplicative noise applies the exact
//! phase `u ← u e^{-iΔW}`, which is the Stratonovich flow and preserves mass
//! pointwise; additive noise applies `u ← u - iΔW`.
//!
//! Each macro step `dt` draws its increment from a counter-based stream. A step
//! is refined by Brownian-bridge splitting, either uniformly (`refinement`) or
//! adaptively when `‖∇u‖²` grows too fast, so refined runs follow the same path.

use crate::grid::FieldState;
use crate::ground_state::GroundState;
use crate::noise::{NoiseField, NoiseType};
use crate::observables::{self, Light, Observables};
use crate::rng::{NoisePath, MAX_BRIDGE_DEPTH, MAX_STEPS};
use crate::{scaling_index, Complex64, Result, SnlsError};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Adaptivity {
    Fixed,
    /// Rejects and halves a step when `‖∇u‖²` grows by more than
    /// `growth_factor`, down to `dt_min`.
    Halving { growth_factor: f64, dt_min: f64 },
}

/// Levels of the tracked stopping times. Absent entries are not tracked.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `δ` for the energy, mass and gradient exit times.
    #[serde(default)]
    pub delta: Option<f64>,
    /// `A` for `τ_A = inf{H >= A H(Q)}`.
    #[serde(default)]
    pub a: Option<f64>,
    /// `γ` for `σ_γ = inf{H M(u₀)^α >= γ H(Q) M(Q)^α}`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// `N` for `τ̃_N = inf{‖∇u‖ >= N}`.
    #[serde(default)]
    pub gradient_cap: Option<f64>,
    /// `λ` of the additive gradient exit `λ^α‖∇u‖ <= δ‖∇Q‖`; without it the
    /// multiplicative form `‖∇u‖‖u₀‖^α <= δ‖∇Q‖‖Q‖^α` is used.
    #[serde(default)]
    pub lambda: Option<f64>,
}

fn default_tail() -> f64 {
    0.1
}

fn default_stride() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub sigma: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Blow-up is declared once `‖∇u‖ >= blowup_gradient`.
    pub blowup_gradient: f64,
    /// Blow-up is also declared when the spectral tail share exceeds this.
    #[serde(default = "default_tail")]
    pub spectral_tail_limit: f64,
    pub adaptivity: Adaptivity,
    /// Record every this many accepted steps.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// Each macro step is split uniformly into `2^refinement` bridged substeps.
    #[serde(default)]
    pub refinement: u32,
    /// Times at which a sample is always taken.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SnlsError::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if self.t_end / self.dt > MAX_STEPS as f64 {
            return bad(format!("t_end/dt exceeds {MAX_STEPS} steps"));
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.blowup_gradient > 0.0) {
            return bad("blowup_gradient must be positive".into());
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1".into());
        }
        if self.refinement > MAX_BRIDGE_DEPTH {
            return bad(format!("refinement must be at most {MAX_BRIDGE_DEPTH}"));
        }
        if let Adaptivity::Halving { growth_factor, dt_min } = self.adaptivity {
            if !(growth_factor > 1.0) || !(dt_min > 0.0) {
                return bad("halving needs growth_factor > 1 and dt_min > 0".into());
            }
        }
        if self.checkpoints.iter().any(|&c| !(c >= 0.0 && c <= self.t_end)) {
            return bad("checkpoints must lie in [0, t_end]".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupTrigger {
    Gradient,
    SpectralTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Survived,
    Blownup { t_b: f64, trigger: BlowupTrigger },
    Failed { t: f64, reason: String },
}

impl Status {
    pub fn is_failed(&self) -> bool {
        matches!(self, Status::Failed { .. })
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            Status::Blownup { t_b, .. } => Some(*t_b),
            _ => None,
        }
    }
}

/// First-crossing times, `None` if not reached (or not tracked).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HitTimes {
    pub tau_delta_energy: Option<f64>,
    pub tau_delta_mass: Option<f64>,
    pub tau_delta_gradient: Option<f64>,
    pub tau_a: Option<f64>,
    pub tau_tilde_n: Option<f64>,
    pub sigma_gamma: Option<f64>,
    pub sigma_0: Option<f64>,
}

impl HitTimes {
    pub const NAMES: [&'static str; 7] = [
        "tau_delta_energy",
        "tau_delta_mass",
        "tau_delta_gradient",
        "tau_a",
        "tau_tilde_n",
        "sigma_gamma",
        "sigma_0",
    ];

    pub fn as_array(&self) -> [Option<f64>; 7] {
        [
            self.tau_delta_energy,
            self.tau_delta_mass,
            self.tau_delta_gradient,
            self.tau_a,
            self.tau_tilde_n,
            self.sigma_gamma,
            self.sigma_0,
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub status: Status,
    pub initial: Observables,
    pub samples: Vec<Observables>,
    /// One entry per configured checkpoint; `None` if the run stopped earlier.
    pub checkpoint_samples: Vec<Option<Observables>>,
    pub hits: HitTimes,
    /// `sup_{s<=T} ‖u‖ <= δ‖Q‖` on a run that reached `t_end`; needs `δ` and `Q`.
    pub mass_contained: Option<bool>,
    pub final_time: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub min_step: f64,
}

struct Levels {
    energy: Option<f64>,
    mass: Option<f64>,
    gradient: Option<f64>,
    a: Option<f64>,
    cap: Option<f64>,
    gamma: Option<f64>,
}

impl Levels {
    fn new(th: &Thresholds, gs: Option<&GroundState>, m0: f64, alpha: Option<f64>) -> Self {
        let mut lv = Levels {
            energy: None,
            mass: None,
            gradient: None,
            a: None,
            cap: th.gradient_cap.map(|n| n * n),
            gamma: None,
        };
        let Some(q) = gs else { return lv };
        let ma = |m: f64| alpha.map_or(1.0, |a| m.powf(a));
        if let Some(d) = th.delta {
            lv.mass = Some(d * d * q.mass);
            if q.energy > 0.0 {
                lv.energy = Some(d * ma(q.mass) * q.energy / ma(m0));
            }
            // Downward exit of the gradient written as a bound on ‖∇u‖².
            let level = match (th.lambda, alpha) {
                (Some(l), Some(a)) => d * q.grad_sq.sqrt() / l.powf(a),
                _ => d * q.grad_sq.sqrt() * ma(q.mass).sqrt() / ma(m0).sqrt(),
            };
            lv.gradient = Some(level * level);
        }
        if let Some(a) = th.a {
            lv.a = Some(a * q.energy);
        }
        if let Some(g) = th.gamma {
            lv.gamma = Some(g * q.energy * ma(q.mass) / ma(m0));
        }
        lv
    }

    fn update(&self, hits: &mut HitTimes, t: f64, l: &Light, sup_energy: f64) {
        let set = |slot: &mut Option<f64>, hit: bool| {
            if hit && slot.is_none() {
                *slot = Some(t);
            }
        };
        if let Some(e) = self.energy {
            set(&mut hits.tau_delta_energy, sup_energy >= e);
        }
        if let Some(m) = self.mass {
            set(&mut hits.tau_delta_mass, l.mass >= m);
        }
        if let Some(g) = self.gradient {
            set(&mut hits.tau_delta_gradient, l.grad_sq <= g);
        }
        if let Some(a) = self.a {
            set(&mut hits.tau_a, l.energy >= a);
        }
        if let Some(c) = self.cap {
            set(&mut hits.tau_tilde_n, l.grad_sq >= c);
        }
        if let Some(g) = self.gamma {
            set(&mut hits.sigma_gamma, l.energy >= g);
        }
        set(&mut hits.sigma_0, l.energy <= 0.0);
    }
}

enum Flow {
    Continue,
    Stop,
}

struct Stepper<'a> {
    cfg: &'a SimConfig,
    noise: &'a NoiseField,
    path: NoisePath,
    u: FieldState,
    alpha: Option<f64>,
    m0: f64,
    levels: Levels,
    lin_cache: Vec<(f64, Vec<Complex64>)>,
    dw_real: Vec<f64>,
    dw_complex: Vec<Complex64>,
    backup: Vec<Complex64>,
    last: Light,
    noise_work: f64,
    noise_integral: f64,
    sup_energy: f64,
    result: TrajectoryResult,
    next_checkpoint: usize,
    checkpoint_order: Vec<usize>,
    macro_step: u64,
}

impl<'a> Stepper<'a> {
    fn linear_factor(&mut self, h: f64) -> usize {
        if let Some(i) = self.lin_cache.iter().position(|(k, _)| *k == h) {
            return i;
        }
        let grid = self.u.grid();
        let mask = grid.dealias_mask();
        let f = grid
            .k_sq()
            .iter()
            .zip(mask)
            .map(|(k, &keep)| if keep { Complex64::from_polar(1.0, k * h) } else { Complex64::new(0.0, 0.0) })
            .collect();
        if self.lin_cache.len() >= 8 {
            self.lin_cache.remove(0);
        }
        self.lin_cache.push((h, f));
        self.lin_cache.len() - 1
    }

    fn nonlinear_half(&mut self, h: f64) {
        let s = self.cfg.sigma;
        for v in self.u.values_mut() {
            let m = v.norm_sqr().max(1e-300);
            let w = (s * m.ln()).exp();
            *v *= Complex64::from_polar(1.0, -0.5 * h * w);
        }
    }

    fn deterministic_step(&mut self, h: f64) {
        self.nonlinear_half(h);
        let i = self.linear_factor(h);
        let factor = core::mem::take(&mut self.lin_cache[i].1);
        self.u.map_spectrum(|idx, c| *c *= factor[idx]);
        self.lin_cache[i].1 = factor;
        self.nonlinear_half(h);
        self.u.apply_dealias();
    }

    fn noise_step(&mut self, coeffs: &[f64]) {
        match self.noise.noise_type() {
            NoiseType::None => {}
            _ if self.noise.is_zero() => {}
            NoiseType::Multiplicative => {
                self.noise.synthesize_real(coeffs, &mut self.dw_real);
                for (v, w) in self.u.values_mut().iter_mut().zip(&self.dw_real) {
                    *v *= Complex64::from_polar(1.0, -w);
                }
            }
            NoiseType::Additive => {
                self.noise.synthesize_complex(coeffs, &mut self.dw_complex);
                for (v, w) in self.u.values_mut().iter_mut().zip(&self.dw_complex) {
                    *v -= Complex64::new(-w.im, w.re);
                }
            }
        }
    }

    fn split(&mut self, t: f64, h: f64, mut coeffs: Vec<f64>, node: u64, depth: u32) -> Flow {
        let mut first = Vec::with_capacity(coeffs.len());
        let mut rng = self.path.node_rng(self.macro_step, node);
        self.noise.bridge_split(&mut coeffs, h, &mut rng, &mut first);
        if let Flow::Stop = self.advance(t, 0.5 * h, first, 2 * node, depth + 1) {
            return Flow::Stop;
        }
        self.advance(t + 0.5 * h, 0.5 * h, coeffs, 2 * node + 1, depth + 1)
    }

    fn advance(&mut self, t: f64, h: f64, coeffs: Vec<f64>, node: u64, depth: u32) -> Flow {
        if depth < self.cfg.refinement {
            return self.split(t, h, coeffs, node, depth);
        }
        let adaptive = match self.cfg.adaptivity {
            Adaptivity::Halving { growth_factor, dt_min } => Some((growth_factor, dt_min)),
            Adaptivity::Fixed => None,
        };
        if adaptive.is_some() {
            self.backup.clear();
            self.backup.extend_from_slice(self.u.values());
        }
        self.deterministic_step(h);
        self.noise_step(&coeffs);
        let l = observables::light(&mut self.u, self.cfg.sigma);
        let finite = l.grad_sq.is_finite() && l.mass.is_finite() && l.lp_norm_pow.is_finite();
        let mut unresolved = false;
        if let Some((growth, dt_min)) = adaptive {
            if !finite || l.grad_sq > growth * self.last.grad_sq {
                if 0.5 * h >= dt_min && depth < MAX_BRIDGE_DEPTH {
                    self.u.values_mut().copy_from_slice(&self.backup);
                    self.result.rejected_steps += 1;
                    return self.split(t, h, coeffs, node, depth);
                }
                unresolved = true;
            }
        }
        self.accept(t + h, h, l, finite, unresolved)
    }

    fn accept(&mut self, t: f64, h: f64, l: Light, finite: bool, unresolved: bool) -> Flow {
        let r = &mut self.result;
        r.accepted_steps += 1;
        r.min_step = r.min_step.min(h);
        r.final_time = t;
        if !finite {
            r.status = Status::Failed {
                t,
                reason: "non-finite field".into(),
            };
            return Flow::Stop;
        }
        if !self.noise.f1_phi().is_empty() && self.noise.noise_type() == NoiseType::Multiplicative {
            let w = observables::weighted_mass(&self.u, self.noise.f1_phi());
            self.noise_integral += 0.25 * h * (w + self.noise_work);
            self.noise_work = w;
        }
        self.sup_energy = self.sup_energy.max(l.energy);
        self.levels.update(&mut self.result.hits, t, &l, self.sup_energy);
        self.last = l;
        let tail = self.u.spectral_tail_fraction();
        let blown = if l.grad_sq >= self.cfg.blowup_gradient * self.cfg.blowup_gradient {
            Some(BlowupTrigger::Gradient)
        } else if tail > self.cfg.spectral_tail_limit {
            Some(BlowupTrigger::SpectralTail)
        } else {
            None
        };
        let stop = if let Some(trigger) = blown {
            self.result.status = Status::Blownup { t_b: t, trigger };
            true
        } else if unresolved {
            self.result.status = Status::Failed {
                t,
                reason: "unresolved: step size underflow without threshold crossing".into(),
            };
            true
        } else {
            false
        };
        let on_stride = self.result.accepted_steps % self.cfg.record_stride as u64 == 0;
        let tol = 1e-9 * h;
        let mut due = Vec::new();
        while self.next_checkpoint < self.checkpoint_order.len() {
            let ci = self.checkpoint_order[self.next_checkpoint];
            if self.cfg.checkpoints[ci] <= t + tol {
                due.push(ci);
                self.next_checkpoint += 1;
            } else {
                break;
            }
        }
        if on_stride || stop || !due.is_empty() {
            let mut obs = observables::observe(&mut self.u, t, self.cfg.sigma, self.m0, self.alpha);
            obs.noise_energy_integral = self.noise_integral;
            for ci in due {
                self.result.checkpoint_samples[ci] = Some(obs);
            }
            if on_stride || stop {
                self.result.samples.push(obs);
            }
        }
        if stop {
            Flow::Stop
        } else {
            Flow::Continue
        }
    }
}

/// Integrates `u0` to `cfg.t_end` or until blow-up or failure.
///
/// `gs` supplies the reference levels of the stopping times; without it only
/// `σ_0` and `τ̃_N` are tracked.
pub fn run_trajectory(
    cfg: &SimConfig,
    u0: FieldState,
    noise: &NoiseField,
    gs: Option<&GroundState>,
    path: NoisePath,
) -> Result<TrajectoryResult> {
    integrate(cfg, u0, noise, gs, path).map(|(r, _)| r)
}

/// As [`run_trajectory`], also returning the field at the final time.
pub fn integrate(
    cfg: &SimConfig,
    u0: FieldState,
    noise: &NoiseField,
    gs: Option<&GroundState>,
    path: NoisePath,
) -> Result<(TrajectoryResult, FieldState)> {
    cfg.validate()?;
    if u0.grid().spec() != noise.grid().spec() {
        return Err(SnlsError::InvalidGrid("noise and field live on different grids".into()));
    }
    let dim = u0.grid().dim();
    let alpha = scaling_index(dim, cfg.sigma);
    let mut u = u0;
    let m0 = u.mass();
    let mut initial = observables::observe(&mut u, 0.0, cfg.sigma, m0, alpha);
    initial.noise_energy_integral = 0.0;
    let first = observables::light(&mut u, cfg.sigma);
    let noise_work = if noise.noise_type() == NoiseType::Multiplicative && !noise.is_zero() {
        observables::weighted_mass(&u, noise.f1_phi())
    } else {
        0.0
    };
    let n = u.grid().len();
    let mut checkpoint_order: Vec<usize> = (0..cfg.checkpoints.len()).collect();
    checkpoint_order.sort_by(|&a, &b| cfg.checkpoints[a].partial_cmp(&cfg.checkpoints[b]).unwrap());
    let mut checkpoint_samples = vec![None; cfg.checkpoints.len()];
    let mut next_checkpoint = 0;
    while next_checkpoint < checkpoint_order.len() && cfg.checkpoints[checkpoint_order[next_checkpoint]] <= 0.0 {
        checkpoint_samples[checkpoint_order[next_checkpoint]] = Some(initial);
        next_checkpoint += 1;
    }
    let mut hits = HitTimes::default();
    let levels = Levels::new(&cfg.thresholds, gs, m0, alpha);
    levels.update(&mut hits, 0.0, &first, first.energy);
    let mut st = Stepper {
        cfg,
        noise,
        path,
        u,
        alpha,
        m0,
        levels,
        lin_cache: Vec::new(),
        dw_real: vec![0.0; n],
        dw_complex: vec![Complex64::new(0.0, 0.0); n],
        backup: Vec::with_capacity(n),
        last: first,
        noise_work,
        noise_integral: 0.0,
        sup_energy: first.energy,
        result: TrajectoryResult {
            status: Status::Survived,
            initial,
            samples: vec![initial],
            checkpoint_samples,
            hits,
            mass_contained: None,
            final_time: 0.0,
            accepted_steps: 0,
            rejected_steps: 0,
            min_step: cfg.dt,
        },
        next_checkpoint,
        checkpoint_order,
        macro_step: 0,
    };
    let n_steps = (cfg.t_end / cfg.dt - 1e-9).ceil().max(1.0) as u64;
    let mut coeffs = Vec::with_capacity(noise.n_coefficients());
    for m in 0..n_steps {
        let t = m as f64 * cfg.dt;
        let h = if m + 1 == n_steps { cfg.t_end - t } else { cfg.dt };
        st.macro_step = m;
        let mut rng = path.node_rng(m, 1);
        noise.sample_coefficients(h, &mut rng, &mut coeffs);
        if let Flow::Stop = st.advance(t, h, core::mem::take(&mut coeffs), 1, 0) {
            break;
        }
        coeffs = Vec::with_capacity(noise.n_coefficients());
    }
    let mut result = st.result;
    if result.status == Status::Survived {
        if let Some(last) = result.samples.last() {
            if last.t < result.final_time {
                let mut obs = observables::observe(&mut st.u, result.final_time, cfg.sigma, m0, alpha);
                obs.noise_energy_integral = st.noise_integral;
                result.samples.push(obs);
            }
        }
    }
    if let (Some(_), Some(_)) = (cfg.thresholds.delta, gs) {
        result.mass_contained = Some(result.status == Status::Survived && result.hits.tau_delta_mass.is_none());
    }
    Ok((result, st.u))
}

/// Blow-up time at two resolutions of the same noise path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupBracket {
    pub t_coarse: f64,
    pub t_fine: f64,
    pub lower: f64,
    pub upper: f64,
}

impl BlowupBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn relative_width(&self) -> f64 {
        self.width() / self.t_fine
    }
}

/// Runs at `cfg.refinement` and one level finer. `None` if either run does not blow up.
pub fn blowup_bracket(
    cfg: &SimConfig,
    u0: &FieldState,
    noise: &NoiseField,
    gs: Option<&GroundState>,
    path: NoisePath,
) -> Result<Option<BlowupBracket>> {
    let coarse = run_trajectory(cfg, u0.clone(), noise, gs, path)?;
    let mut fine_cfg = cfg.clone();
    fine_cfg.refinement += 1;
    let fine = run_trajectory(&fine_cfg, u0.clone(), noise, gs, path)?;
    Ok(match (coarse.status.blowup_time(), fine.status.blowup_time()) {
        (Some(a), Some(b)) => Some(BlowupBracket {
            t_coarse: a,
            t_fine: b,
            lower: a.min(b),
            upper: a.max(b),
        }),
        _ => None,
    })
}
