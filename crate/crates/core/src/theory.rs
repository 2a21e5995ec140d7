//! Closed-form survival bounds, a-priori estimates and sufficient blow-up
//! conditions for a configuration `(u₀, φ, σ, n)`. Everything here is a pure
//! function of its inputs; expectations such as `E(t∧τ)` are parameters.

use crate::ground_state::GroundState;
use crate::noise::{NoiseConstants, NoiseType};
use crate::observables::{classify_dichotomy, Dichotomy, Observables, ThresholdPosition};
use crate::{critical_index, Result, SnlsError};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// A bound that may be infinite or inapplicable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Bound {
    Finite { value: f64 },
    Infinite,
    NotApplicable { reason: String },
}

impl Bound {
    pub fn finite(value: f64) -> Self {
        Bound::Finite { value }
    }

    pub fn na(reason: impl Into<String>) -> Self {
        Bound::NotApplicable { reason: reason.into() }
    }

    /// Finite value, `+∞` for `Infinite`, `None` if not applicable.
    pub fn value(&self) -> Option<f64> {
        match self {
            Bound::Finite { value } => Some(*value),
            Bound::Infinite => Some(f64::INFINITY),
            Bound::NotApplicable { .. } => None,
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(SnlsError::InvalidParameter(msg()))
    }
}

/// Survival horizon `T*` for multiplicative noise in the intercritical regime.
///
/// `mass_factor` is `(M(Q)/M(u₀))^{1/s_c}` for deterministic data, or
/// `M(Q)^{1/s_c}/E(M(u₀)^{1/s_c})` for random data.
fn t_star_mult_core(beta: f64, s_c: f64, n: usize, m_phi: f64, mass_factor: f64) -> Result<Bound> {
    check(beta > 0.0 && beta < 1.0, || format!("β must lie in (0,1), got {beta}"))?;
    check(s_c > 0.0 && s_c < 1.0, || format!("s_c must lie in (0,1), got {s_c}"))?;
    check(m_phi >= 0.0, || format!("M_φ must be non-negative, got {m_phi}"))?;
    check(mass_factor > 0.0, || format!("mass factor must be positive, got {mass_factor}"))?;
    if m_phi == 0.0 {
        return Ok(Bound::Infinite);
    }
    let nf = n as f64;
    let root = (nf + 2.0 * s_c * (1.0 - beta) / 9.0).sqrt() - nf.sqrt();
    Ok(Bound::finite(root * root / (2.0 * (1.0 - s_c)) * (9.0 / m_phi) * mass_factor))
}

/// `T* = [√(n + 2s_c(1-β)/9) - √n]² / (2(1-s_c)) · (9/M_φ) · (M(Q)/M(u₀))^{1/s_c}`.
/// `M_φ = 0` gives an infinite horizon.
pub fn t_star_multiplicative(beta: f64, s_c: f64, n: usize, m_phi: f64, mass_ratio: f64) -> Result<Bound> {
    check(mass_ratio > 0.0, || format!("mass ratio must be positive, got {mass_ratio}"))?;
    t_star_mult_core(beta, s_c, n, m_phi, mass_ratio.powf(1.0 / s_c))
}

/// Random-data variant: `(M(Q)/M(u₀))^{1/s_c}` becomes `M(Q)^{1/s_c} / E(M(u₀)^{1/s_c})`.
pub fn t_star_multiplicative_random(
    beta: f64,
    s_c: f64,
    n: usize,
    m_phi: f64,
    mass_q: f64,
    moment_inv_sc: f64,
) -> Result<Bound> {
    check(moment_inv_sc > 0.0, || "E(M(u₀)^{1/s_c}) must be positive".into())?;
    t_star_mult_core(beta, s_c, n, m_phi, mass_q.powf(1.0 / s_c) / moment_inv_sc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveCritical {
    pub eps_star: f64,
    pub t_star: Bound,
    /// Whether `ε* < (1-β²)/2`.
    pub eps_star_below_half_gap: bool,
}

/// Mass-critical additive bound: `ε* = 3√(10-β²) - 9`,
/// `T* = ε*(1-β²-ε*)/(9+ε*) · M(Q)/hs00`.
pub fn t_star_additive_critical(beta: f64, hs00: f64, mass_q: f64) -> Result<AdditiveCritical> {
    check((0.0..1.0).contains(&beta), || format!("β must lie in [0,1), got {beta}"))?;
    check(hs00 >= 0.0 && mass_q > 0.0, || "need hs00 >= 0 and M(Q) > 0".into())?;
    let b2 = beta * beta;
    let eps = 3.0 * (10.0 - b2).sqrt() - 9.0;
    let t_star = if hs00 == 0.0 {
        Bound::Infinite
    } else {
        Bound::finite(eps * (1.0 - b2 - eps) / (9.0 + eps) * mass_q / hs00)
    };
    Ok(AdditiveCritical {
        eps_star: eps,
        t_star,
        eps_star_below_half_gap: eps < (1.0 - b2) / 2.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditiveIntercritical {
    pub t_tilde: Bound,
    pub eps_tilde: f64,
    pub f: f64,
    pub g: f64,
    pub b_star: f64,
}

/// Constants of the intercritical additive survival bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntercriticalInputs {
    pub beta: f64,
    pub gamma: f64,
    pub hs01: f64,
    pub c_phi_interp: f64,
    pub mass_q: f64,
    pub energy_q: f64,
    pub s_c: f64,
    pub n: usize,
    pub sigma: f64,
    pub gn_k: f64,
}

/// `T̃ = (2F/(b* + √(b*² + GF)))²` with `ε̃ = (1-γ-β²)/(4(1-γ)-β²)`.
pub fn t_tilde_additive_intercritical(p: &IntercriticalInputs) -> Result<AdditiveIntercritical> {
    let b2 = p.beta * p.beta;
    if b2 + p.gamma >= 1.0 {
        return Err(SnlsError::AboveAdditiveThreshold(b2 + p.gamma));
    }
    check(p.s_c > 0.0 && p.s_c < 1.0, || format!("s_c must lie in (0,1), got {}", p.s_c))?;
    check(p.hs01 >= 0.0 && p.c_phi_interp >= 0.0, || "noise constants must be non-negative".into())?;
    check(p.mass_q > 0.0 && p.energy_q > 0.0, || "need M(Q) > 0 and H(Q) > 0".into())?;
    let eps = (1.0 - p.gamma - b2) / (4.0 * (1.0 - p.gamma) - b2);
    let f = 1.0 - p.gamma - b2 / (1.0 - eps);
    let g = 4.0 / p.mass_q * p.hs01 * ((9.0 + eps) / (eps * (1.0 - eps)) + (1.0 - p.s_c) / p.s_c);
    let nf = p.n as f64;
    let s = p.sigma;
    let ratio = nf / (2.0 * (1.0 - p.s_c));
    let b_star = 3.0 * p.mass_q.sqrt() / p.energy_q
        * (p.hs01.sqrt() * ratio.sqrt()
            + p.gn_k * p.c_phi_interp * ratio.powf(nf * s * (2.0 * s + 1.0) / (2.0 * (2.0 * s + 2.0))));
    let den = b_star + (b_star * b_star + g * f).sqrt();
    let t_tilde = if den == 0.0 {
        Bound::Infinite
    } else {
        let x = 2.0 * f / den;
        Bound::finite(x * x)
    };
    Ok(AdditiveIntercritical {
        t_tilde,
        eps_tilde: eps,
        f,
        g,
        b_star,
    })
}

/// `𝒞(p) = [m0_moment + hs00 p(2p-1+9p/ε̃) t] exp(hs00 p(2p-1+9p/ε̃) t) / (1-ε̃)`, a bound on
/// `E sup_{s<=t} M(u(s))^p` for `p >= 2`.
pub fn mass_moment_bound(p: f64, m0_moment: f64, t: f64, hs00: f64, eps_tilde: f64) -> Result<f64> {
    check(p >= 2.0, || format!("p must be at least 2, got {p}"))?;
    check(eps_tilde > 0.0 && eps_tilde < 1.0, || format!("ε̃ must lie in (0,1), got {eps_tilde}"))?;
    let rate = hs00 * p * (2.0 * p - 1.0 + 9.0 * p / eps_tilde) * t;
    Ok((m0_moment + rate) * rate.exp() / (1.0 - eps_tilde))
}

/// Bound on `E sup M^p` for any `p > 0`: the lemma for `p >= 2`, and
/// `(E sup M²)^{p/2}` by Lyapunov's inequality below that.
/// `m0_moment_of` returns `E(M(u₀)^q)`.
pub fn mass_moment_bound_any(p: f64, m0_moment_of: impl Fn(f64) -> f64, t: f64, hs00: f64, eps_tilde: f64) -> Result<f64> {
    if p >= 2.0 {
        mass_moment_bound(p, m0_moment_of(p), t, hs00, eps_tilde)
    } else {
        check(p > 0.0, || format!("p must be positive, got {p}"))?;
        Ok(mass_moment_bound(2.0, m0_moment_of(2.0), t, hs00, eps_tilde)?.powf(p / 2.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriBounds {
    /// `E sup_{s<=t} M <= [E M(u₀) + (9+ε)/ε · hs00 t]/(1-ε)`.
    pub e_sup_mass: f64,
    /// `E sup_{s<=t} (M - M(u₀)) <= ε/(1-ε) E M(u₀) + (9/ε + 1) t hs00/(1-ε)`.
    pub e_sup_mass_excess: f64,
    /// `n/(2(1-s_c)) M(Q)^{1+α} / M(u₀)^α`.
    pub grad_bound: Bound,
    /// `P(sup M > δ² M(Q)) <= [β² M(Q) + (9+ε)/ε hs00 t] / (δ² M(Q) (1-ε))`, clamped to 1.
    pub critical_add_containment: Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriInputs {
    pub n: usize,
    pub sigma: f64,
    pub mass0: f64,
    pub mass_q: f64,
    pub hs00: f64,
    pub t: f64,
    pub eps: f64,
    /// `β` with `M(u₀) <= β² M(Q)` and `δ` of the containment event.
    pub beta: f64,
    pub delta: f64,
}

pub fn apriori_bounds(p: &AprioriInputs) -> Result<AprioriBounds> {
    check(p.eps > 0.0 && p.eps < 1.0, || format!("ε must lie in (0,1), got {}", p.eps))?;
    let e = p.eps;
    let s_c = critical_index(p.n, p.sigma);
    let grad_bound = match crate::scaling_index(p.n, p.sigma) {
        Some(alpha) if s_c > 0.0 && s_c < 1.0 => Bound::finite(
            p.n as f64 / (2.0 * (1.0 - s_c)) * p.mass_q.powf(1.0 + alpha) / p.mass0.powf(alpha),
        ),
        _ => Bound::na("needs 0 < s_c < 1"),
    };
    let critical_add_containment = if p.delta > 0.0 {
        let v = (p.beta * p.beta * p.mass_q + (9.0 + e) / e * p.hs00 * p.t)
            / (p.delta * p.delta * p.mass_q * (1.0 - e));
        Bound::finite(v.min(1.0))
    } else {
        Bound::na("needs δ > 0")
    };
    Ok(AprioriBounds {
        e_sup_mass: (p.mass0 + (9.0 + e) / e * p.hs00 * p.t) / (1.0 - e),
        e_sup_mass_excess: e / (1.0 - e) * p.mass0 + (9.0 / e + 1.0) * p.t * p.hs00 / (1.0 - e),
        grad_bound,
        critical_add_containment,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs < rhs` when strict, `lhs <= rhs` otherwise.
    pub strict: bool,
    pub passed: bool,
}

impl Condition {
    fn new(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let passed = if strict { lhs < rhs } else { lhs <= rhs };
        Self {
            name: name.into(),
            lhs,
            rhs,
            strict,
            passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupLedger {
    pub name: String,
    pub hypotheses: Vec<Condition>,
    pub conditions: Vec<Condition>,
    /// All hypotheses and conditions pass.
    pub satisfied: bool,
}

impl BlowupLedger {
    fn new(name: &str, hypotheses: Vec<Condition>, conditions: Vec<Condition>) -> Self {
        let satisfied = hypotheses.iter().chain(&conditions).all(|c| c.passed);
        Self {
            name: name.into(),
            hypotheses,
            conditions,
            satisfied,
        }
    }
}

/// Inputs of the multiplicative blow-up ledger for deterministic data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultBlowupInputs {
    pub mass0: f64,
    pub variance0: f64,
    pub virial0: f64,
    pub m_phi: f64,
    pub t: f64,
    pub eps: f64,
    /// Gradient cap `N` of `τ̃_N`.
    pub gradient_cap: f64,
    pub delta: f64,
    pub beta: f64,
    pub delta0: f64,
    /// `E(t∧τ)`; the worst case is `t`.
    pub e_tau: f64,
    /// `E((t∧τ)²)`; the worst case is `t²`.
    pub e_tau_sq: f64,
}

fn intercritical(gs: &GroundState) -> Result<(f64, f64, f64)> {
    let s_c = critical_index(gs.dim, gs.sigma);
    match gs.alpha {
        Some(alpha) if s_c > 0.0 && s_c < 1.0 => Ok((s_c, alpha, gs.dim as f64 * gs.sigma)),
        _ => Err(SnlsError::NotApplicable(format!(
            "blow-up ledgers need 0 < s_c < 1, got {s_c}"
        ))),
    }
}

fn delta_hypotheses(delta: f64, delta0: f64, beta: f64) -> Vec<Condition> {
    vec![
        Condition::new("beta_below_one", beta, 1.0, true),
        Condition::new("delta_above_one", 1.0, delta, true),
        Condition::new("delta_below_delta0", delta, delta0, true),
    ]
}

/// Sufficient conditions for `P(τ* <= t) > 0` with multiplicative noise and deterministic data.
pub fn blowup_conditions_multiplicative(p: &MultBlowupInputs, gs: &GroundState) -> Result<BlowupLedger> {
    let (s_c, alpha, ns) = intercritical(gs)?;
    let s = gs.sigma;
    let m0a = p.mass0.powf(alpha);
    let c1 = 4.0 * p.mass0.powf(alpha + 1.0) * p.m_phi * p.t * p.t * (1.0 + p.t / 3.0);
    let c2 = 32.0 / 15.0 * ns * p.mass0.powf(alpha + 0.5) * p.m_phi.sqrt() * p.gradient_cap * p.t.powf(2.5);
    let c3 = p.variance0 * m0a + 2.0 * p.eps + 4.0 * p.virial0 * m0a * p.e_tau
        - 4.0 * s * s_c * (p.delta * p.delta - p.beta) * gs.grad_sq * gs.mass.powf(alpha) * p.e_tau_sq;
    Ok(BlowupLedger::new(
        "multiplicative_deterministic",
        delta_hypotheses(p.delta, p.delta0, p.beta),
        vec![
            Condition::new("cond_1", c1, p.eps, false),
            Condition::new("cond_2", c2, p.eps, false),
            Condition::new("cond_3", c3, 0.0, true),
        ],
    ))
}

/// Moments of random initial data entering the random-data ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomMoments {
    /// `E(M(u₀)^{α+1})`.
    pub mass_alpha_plus_one: f64,
    /// `E(M(u₀)^{α+1/2})`.
    pub mass_alpha_plus_half: f64,
    /// `E(V(u₀) M(u₀)^α)`.
    pub variance_mass_alpha: f64,
    /// `E(G(u₀)² M(u₀)^{2α})`.
    pub virial_sq_mass_2alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultBlowupRandomInputs {
    pub moments: RandomMoments,
    pub m_phi: f64,
    pub t: f64,
    pub eps: f64,
    pub gradient_cap: f64,
    pub delta: f64,
    pub beta: f64,
    pub e_tau_sq: f64,
}

/// Random-data variant of [`blowup_conditions_multiplicative`].
pub fn blowup_conditions_multiplicative_random(p: &MultBlowupRandomInputs, gs: &GroundState) -> Result<BlowupLedger> {
    let (s_c, alpha, ns) = intercritical(gs)?;
    let s = gs.sigma;
    let m = &p.moments;
    let c1 = m.mass_alpha_plus_one * p.m_phi * p.t.powi(3) * (4.0 / 3.0 + 18.0);
    let c2 = 32.0 / 15.0 * ns * m.mass_alpha_plus_half * p.m_phi.sqrt() * p.gradient_cap * p.t.powf(2.5);
    let c3 = m.variance_mass_alpha + 2.0 * p.eps + 4.0 * m.virial_sq_mass_2alpha.sqrt() * p.e_tau_sq.sqrt()
        - 4.0 * s * s_c * (p.delta * p.delta - p.beta) * gs.grad_sq * gs.mass.powf(alpha) * p.e_tau_sq;
    Ok(BlowupLedger::new(
        "multiplicative_random",
        vec![
            Condition::new("beta_below_one", p.beta, 1.0, true),
            Condition::new("delta_above_one", 1.0, p.delta, true),
        ],
        vec![
            Condition::new("cond_1_bis", c1, p.eps, false),
            Condition::new("cond_2_bis", c2, p.eps, false),
            Condition::new("cond_3_bis", c3, 0.0, true),
        ],
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AddBlowupInputs {
    pub mass0: f64,
    pub energy0: f64,
    pub variance0: f64,
    pub virial0: f64,
    pub t: f64,
    pub eps: f64,
    /// Gradient cap `𝔐` of `τ̃_𝔐`.
    pub frak_m: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub delta0: f64,
    /// `P(Ω_t)`; 1 in the worst case.
    pub p_omega: f64,
    /// `E(1_Ω (t∧τ))`.
    pub e_omega_tau: f64,
    /// `E(1_Ω (t∧τ)²)`.
    pub e_omega_tau_sq: f64,
}

/// Sufficient conditions for `P(τ* <= t) > 0` with additive noise.
///
/// The mass moments `𝒞(p)` use `ε̃ = 1/2`; exponents `p < 2` are bounded
/// through `𝒞(2)^{p/2}`.
pub fn blowup_conditions_additive(p: &AddBlowupInputs, gs: &GroundState, c: &NoiseConstants) -> Result<BlowupLedger> {
    let (s_c, alpha, ns) = intercritical(gs)?;
    let s = gs.sigma;
    let n = gs.dim as f64;
    let pre = (p.lambda * p.lambda * gs.mass).powf(alpha);
    let t = p.t;
    let lambda0 = (p.mass0 / gs.mass).sqrt();
    let moment = |q: f64| p.mass0.powf(q);
    let d = 2.0 - (n - 2.0) * s;
    let p3 = d * (2.0 * s + 1.0) / (2.0 * s + 2.0);
    let p4 = d * s / (s + 1.0);
    let cal3 = mass_moment_bound_any(p3, moment, t, c.hs00, 0.5)?;
    let cal4 = mass_moment_bound_any(p4, moment, t, c.hs00, 0.5)?;
    let c1 = pre
        * (c.c_phi_sigma
            + c.c_phi_sigma * t
            + 8.0 * 2f64.sqrt() / 3.0 * n * c.hs00.sqrt() * t.powf(1.5)
            + (2.0 * c.c_phi_2 + 32.0 * c.c_phi_1) * t * t
            + 4.0 / 3.0 * ns * c.c_phi_1 * t.powi(3));
    let c2 = 32.0 / 15.0 * ns * pre * p.frak_m * c.c_phi_1.sqrt() * t * t;
    let c3 = 32.0 / 15.0
        * ns
        * pre
        * gs.gn_constant.powf((2.0 * s + 1.0) / (2.0 * s + 2.0))
        * p.frak_m.powf(ns * (2.0 * s + 1.0) / (2.0 * s + 2.0))
        * cal3.sqrt()
        * c.c_rad_2s2.sqrt()
        * t.powf(2.5);
    let c4 = ns * (2.0 * s + 1.0) / 3.0
        * pre
        * gs.gn_constant.powf(s / (s + 1.0))
        * p.frak_m.powf(ns * s / (s + 1.0))
        * cal4
        * c.c_rad_2s2
        * t.powi(3);
    let c5 = p.p_omega * p.variance0 * pre + 4.0 * p.eps + 4.0 * p.virial0 * pre * p.e_omega_tau
        - 4.0 * s * s_c * (p.delta * p.delta - p.beta) * gs.grad_sq * gs.mass.powf(alpha) * p.e_omega_tau_sq;
    let mut hyp = delta_hypotheses(p.delta, p.delta0, p.beta);
    hyp.push(Condition::new("lambda_above_lambda0", lambda0, p.lambda, true));
    hyp.push(Condition::new(
        "energy_level",
        p.lambda.powf(2.0 * alpha) * p.energy0,
        p.beta * gs.energy,
        false,
    ));
    Ok(BlowupLedger::new(
        "additive",
        hyp,
        vec![
            Condition::new("cond_1_add", c1, p.eps, false),
            Condition::new("cond_2_add", c2, p.eps, false),
            Condition::new("cond_3_add", c3, p.eps, false),
            Condition::new("cond_4_add", c4, p.eps, false),
            Condition::new("cond_3_add_virial", c5, 0.0, true),
        ],
    ))
}

/// Tunable parameters of a theory evaluation. Absent values take the defaults
/// noted on each field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    /// Horizon `t` of the a-priori and blow-up bounds (default 1).
    #[serde(default)]
    pub t: Option<f64>,
    /// `ε` of the a-priori and blow-up bounds (default 0.1).
    #[serde(default)]
    pub eps: Option<f64>,
    /// `δ` (default: midpoint of `(1, δ₀)` for blow-up; `1` for containment).
    #[serde(default)]
    pub delta: Option<f64>,
    /// Gradient cap `N` / `𝔐` (default `2 ‖∇u₀‖`).
    #[serde(default)]
    pub gradient_cap: Option<f64>,
    /// `λ` of the additive blow-up ledger (default `1.01 ‖u₀‖/‖Q‖`).
    #[serde(default)]
    pub lambda: Option<f64>,
    /// `γ` of the additive intercritical bound (default `max(H(u₀)/H(Q), 0)`).
    #[serde(default)]
    pub gamma: Option<f64>,
    /// `β` override of the additive bounds (default `‖u₀‖/‖Q‖`).
    #[serde(default)]
    pub beta_additive: Option<f64>,
    /// `E(t∧τ)` (default `t`).
    #[serde(default)]
    pub e_tau: Option<f64>,
    /// `E((t∧τ)²)` (default `t²`).
    #[serde(default)]
    pub e_tau_sq: Option<f64>,
}

/// Everything a report is computed from.
#[derive(Clone)]
pub struct TheoryInputs<'a> {
    pub gs: &'a GroundState,
    pub noise_type: NoiseType,
    pub constants: NoiseConstants,
    /// Statistics of `u₀` (or of a representative draw for random data).
    pub initial: Observables,
    /// `q ↦ E(M(u₀)^q)` in closed form, for random data.
    pub mass_moment: Option<&'a dyn Fn(f64) -> f64>,
    pub params: TheoryParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub dim: usize,
    pub sigma: f64,
    pub s_c: f64,
    pub alpha: Option<f64>,
    pub noise_type: NoiseType,
    pub mass_q: f64,
    pub energy_q: f64,
    pub grad_sq_q: f64,
    pub gn_constant: f64,
    pub mass0: f64,
    pub energy0: f64,
    pub grad_sq0: f64,
    pub position: ThresholdPosition,
    /// `regime` label: `global_side`, `blowup_side`, `above_threshold` or `boundary`.
    pub regime: Dichotomy,
    pub noise_constants: NoiseConstants,
    pub t: f64,
    pub eps: f64,
    pub t_star_mult: Bound,
    pub t_star_mult_random: Bound,
    pub additive_critical: Option<AdditiveCritical>,
    pub additive_intercritical: Option<AdditiveIntercritical>,
    /// Set when `β² + γ >= 1` puts the data above the additive threshold.
    pub above_additive_threshold: Option<f64>,
    pub apriori: Option<AprioriBounds>,
    /// `𝒞(2, u₀, t, φ)` with `ε̃ = 1/2`.
    pub mass_moment_bound: Option<f64>,
    pub blowup_ledgers: Vec<BlowupLedger>,
}

pub fn theory_report(inp: &TheoryInputs<'_>) -> Result<TheoryReport> {
    let gs = inp.gs;
    let (n, s) = (gs.dim, gs.sigma);
    let s_c = critical_index(n, s);
    let u0 = &inp.initial;
    let c = &inp.constants;
    let prm = &inp.params;
    let t = prm.t.unwrap_or(1.0);
    let eps = prm.eps.unwrap_or(0.1);
    let position = classify_dichotomy(u0.mass, u0.grad_sq, u0.energy, gs, 1e-9);
    let intercrit = s_c > 0.0 && s_c < 1.0;
    let mult = inp.noise_type == NoiseType::Multiplicative;
    let add = inp.noise_type == NoiseType::Additive;
    let m_phi = if mult { c.m_phi } else { 0.0 };

    let t_star_mult = if !intercrit {
        Bound::na("needs 0 < s_c < 1")
    } else if position.class != Dichotomy::GlobalSide {
        Bound::na(format!("data not on the global side: {:?}", position.class))
    } else if !mult && inp.noise_type != NoiseType::None {
        Bound::na("multiplicative noise only")
    } else {
        t_star_multiplicative(position.beta, s_c, n, m_phi, gs.mass / u0.mass)?
    };
    let t_star_mult_random = match (inp.mass_moment, intercrit) {
        (Some(mm), true) if position.class == Dichotomy::GlobalSide && (mult || inp.noise_type == NoiseType::None) => {
            t_star_multiplicative_random(position.beta, s_c, n, m_phi, gs.mass, mm(1.0 / s_c))?
        }
        _ => Bound::na("needs random data on the global side with multiplicative noise"),
    };

    let beta_add = prm.beta_additive.unwrap_or_else(|| (u0.mass / gs.mass).sqrt());
    let hs00 = if add { c.hs00 } else { 0.0 };
    let additive_critical = if add && s_c == 0.0 && beta_add < 1.0 {
        Some(t_star_additive_critical(beta_add, hs00, gs.mass)?)
    } else {
        None
    };
    let mut above_additive_threshold = None;
    let additive_intercritical = if add && intercrit {
        let gamma = prm.gamma.unwrap_or_else(|| (u0.energy / gs.energy).max(0.0));
        let input = IntercriticalInputs {
            beta: beta_add,
            gamma,
            hs01: c.hs01,
            c_phi_interp: c.c_phi_interp,
            mass_q: gs.mass,
            energy_q: gs.energy,
            s_c,
            n,
            sigma: s,
            gn_k: gs.gn_k,
        };
        match t_tilde_additive_intercritical(&input) {
            Ok(r) => Some(r),
            Err(SnlsError::AboveAdditiveThreshold(v)) => {
                above_additive_threshold = Some(v);
                None
            }
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let mass_mean = inp.mass_moment.map_or(u0.mass, |mm| mm(1.0));
    let apriori = if eps > 0.0 && eps < 1.0 {
        Some(apriori_bounds(&AprioriInputs {
            n,
            sigma: s,
            mass0: mass_mean,
            mass_q: gs.mass,
            hs00,
            t,
            eps,
            beta: beta_add,
            delta: prm.delta.unwrap_or(1.0),
        })?)
    } else {
        None
    };
    let m2 = inp.mass_moment.map_or(u0.mass * u0.mass, |mm| mm(2.0));
    let mass_moment = Some(mass_moment_bound(2.0, m2, t, hs00, 0.5)?);

    let mut ledgers = Vec::new();
    if intercrit && position.class == Dichotomy::BlowupSide {
        let delta = prm.delta.unwrap_or(0.5 * (1.0 + position.delta0));
        let cap = prm.gradient_cap.unwrap_or(2.0 * u0.grad_sq.sqrt());
        let e_tau = prm.e_tau.unwrap_or(t);
        let e_tau_sq = prm.e_tau_sq.unwrap_or(t * t);
        if !add {
            ledgers.push(blowup_conditions_multiplicative(
                &MultBlowupInputs {
                    mass0: u0.mass,
                    variance0: u0.variance,
                    virial0: u0.virial_g,
                    m_phi,
                    t,
                    eps,
                    gradient_cap: cap,
                    delta,
                    beta: position.beta,
                    delta0: position.delta0,
                    e_tau,
                    e_tau_sq,
                },
                gs,
            )?);
            if let Some(mm) = inp.mass_moment {
                let alpha = gs.alpha.unwrap_or(0.0);
                let m0 = u0.mass;
                // Ground-state families scale as c·Q, so V M^α and G² M^{2α} follow the mass moments.
                let v_ratio = u0.variance / m0;
                let g_ratio = u0.virial_g / m0;
                ledgers.push(blowup_conditions_multiplicative_random(
                    &MultBlowupRandomInputs {
                        moments: RandomMoments {
                            mass_alpha_plus_one: mm(alpha + 1.0),
                            mass_alpha_plus_half: mm(alpha + 0.5),
                            variance_mass_alpha: v_ratio * mm(alpha + 1.0),
                            virial_sq_mass_2alpha: g_ratio * g_ratio * mm(2.0 * alpha + 2.0),
                        },
                        m_phi,
                        t,
                        eps,
                        gradient_cap: cap,
                        delta,
                        beta: position.beta,
                        e_tau_sq,
                    },
                    gs,
                )?);
            }
        } else {
            let lambda = prm.lambda.unwrap_or(1.01 * (u0.mass / gs.mass).sqrt());
            let alpha = gs.alpha.unwrap_or(0.0);
            let beta = (lambda.powf(2.0 * alpha) * u0.energy / gs.energy).max(position.beta.min(0.999_999));
            ledgers.push(blowup_conditions_additive(
                &AddBlowupInputs {
                    mass0: u0.mass,
                    energy0: u0.energy,
                    variance0: u0.variance,
                    virial0: u0.virial_g,
                    t,
                    eps,
                    frak_m: cap,
                    lambda,
                    beta,
                    delta,
                    delta0: position.delta0,
                    p_omega: 1.0,
                    e_omega_tau: e_tau,
                    e_omega_tau_sq: e_tau_sq,
                },
                gs,
                c,
            )?);
        }
    }

    Ok(TheoryReport {
        dim: n,
        sigma: s,
        s_c,
        alpha: gs.alpha,
        noise_type: inp.noise_type,
        mass_q: gs.mass,
        energy_q: gs.energy,
        grad_sq_q: gs.grad_sq,
        gn_constant: gs.gn_constant,
        mass0: u0.mass,
        energy0: u0.energy,
        grad_sq0: u0.grad_sq,
        position,
        regime: position.class,
        noise_constants: c.clone(),
        t,
        eps,
        t_star_mult,
        t_star_mult_random,
        additive_critical,
        additive_intercritical,
        above_additive_threshold,
        apriori,
        mass_moment_bound: mass_moment,
        blowup_ledgers: ledgers,
    })
}
