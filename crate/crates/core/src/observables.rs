//! Conserved and monitored functionals of a field.
//!
//! `M = ‖u‖²`, `H = ½‖∇u‖² - ‖u‖_{2σ+2}^{2σ+2}/(2σ+2)`, `V = ∫|x|²|u|²`,
//! `G = Im ∫ u x·∇ū`. Along deterministic flows `V' = 4G` and
//! `G' = 2nσH - 2σ s_c ‖∇u‖²`.

use crate::grid::FieldState;
use crate::ground_state::GroundState;
use crate::critical_index;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub grad_sq: f64,
    pub lp_norm_pow: f64,
    pub variance: f64,
    pub virial_g: f64,
    /// `‖∇u‖ ‖u₀‖^α`; plain `‖∇u‖` in the mass-critical case.
    pub scaled_gradient: f64,
    /// `H(u) M(u₀)^α`; plain `H` in the mass-critical case.
    pub mass_energy: f64,
    /// Share of the mass outside the central 80% of the box along some axis.
    pub boundary_mass_fraction: f64,
    /// Share of spectral energy in the outer fifth of the retained band.
    pub spectral_tail: f64,
    /// Running `½∫₀ᵗ ∫|u|² f1_φ`, the mean energy gain of multiplicative noise.
    pub noise_energy_integral: f64,
}

impl Observables {
    /// `M(t) - M(u₀)` given the initial mass.
    pub fn mass_increment(&self, m0: f64) -> f64 {
        self.mass - m0
    }
}

/// Cheap subset evaluated every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Light {
    pub mass: f64,
    pub grad_sq: f64,
    pub lp_norm_pow: f64,
    pub energy: f64,
}

pub fn energy(grad_sq: f64, lp_norm_pow: f64, sigma: f64) -> f64 {
    0.5 * grad_sq - lp_norm_pow / (2.0 * sigma + 2.0)
}

pub fn light(u: &mut FieldState, sigma: f64) -> Light {
    let mass = u.mass();
    let grad_sq = u.gradient_norm_sq();
    let lp_norm_pow = u.lp_norm_pow(2.0 * sigma + 2.0);
    Light {
        mass,
        grad_sq,
        lp_norm_pow,
        energy: energy(grad_sq, lp_norm_pow, sigma),
    }
}

/// `∫|x|²|u|²`.
pub fn variance(u: &FieldState) -> f64 {
    let grid = u.grid();
    grid.cell_volume()
        * u.values()
            .iter()
            .zip(grid.r_sq())
            .map(|(v, r)| r * v.norm_sqr())
            .sum::<f64>()
}

/// `Im ∫ u x·∇ū`.
pub fn virial_g(u: &mut FieldState) -> f64 {
    let grid = u.grid().clone();
    let mut acc = 0.0;
    for a in 0..grid.dim() {
        let du = u.derivative(a);
        for (idx, (v, d)) in u.values().iter().zip(&du).enumerate() {
            acc += grid.x(idx, a) * (v * d.conj()).im;
        }
    }
    grid.cell_volume() * acc
}

pub fn boundary_mass_fraction(u: &FieldState) -> f64 {
    let grid = u.grid();
    let spec = grid.spec();
    let (mut outer, mut total) = (0.0, 0.0);
    for (idx, v) in u.values().iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        if (0..grid.dim()).any(|a| grid.x(idx, a).abs() > 0.4 * spec.extents[a]) {
            outer += m;
        }
    }
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// `∫|u|² w` for a weight sampled on the grid.
pub fn weighted_mass(u: &FieldState, weight: &[f64]) -> f64 {
    u.grid().cell_volume()
        * u.values()
            .iter()
            .zip(weight)
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
}

/// Full observable set at time `t`. `m0` is the initial mass and `alpha` the
/// scaling index (absent in the mass-critical case).
pub fn observe(u: &mut FieldState, t: f64, sigma: f64, m0: f64, alpha: Option<f64>) -> Observables {
    let l = light(u, sigma);
    let (scaled_gradient, mass_energy) = match alpha {
        Some(a) => (l.grad_sq.sqrt() * m0.powf(a / 2.0), l.energy * m0.powf(a)),
        None => (l.grad_sq.sqrt(), l.energy),
    };
    Observables {
        t,
        mass: l.mass,
        energy: l.energy,
        grad_sq: l.grad_sq,
        lp_norm_pow: l.lp_norm_pow,
        variance: variance(u),
        virial_g: virial_g(u),
        scaled_gradient,
        mass_energy,
        boundary_mass_fraction: boundary_mass_fraction(u),
        spectral_tail: u.spectral_tail_fraction(),
        noise_energy_integral: 0.0,
    }
}

/// Side of the ground-state dichotomy an initial datum falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dichotomy {
    /// `β < 1` and `δ₀ < 1` (or `M < M(Q)` when critical).
    GlobalSide,
    /// `β < 1` and `δ₀ > 1` (or `M > M(Q)` when critical).
    BlowupSide,
    /// `β >= 1`: outside the threshold regime.
    AboveThreshold,
    /// Within tolerance of the threshold.
    Boundary,
    /// `s_c < 0`: every datum is global, no threshold.
    Subcritical,
}

/// `β = H(u₀)M(u₀)^α / (H(Q)M(Q)^α)` and `δ₀ = ‖∇u₀‖‖u₀‖^α / (‖∇Q‖‖Q‖^α)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPosition {
    pub beta: f64,
    pub delta0: f64,
    pub class: Dichotomy,
}

pub fn classify_dichotomy(mass: f64, grad_sq: f64, energy: f64, gs: &GroundState, tol: f64) -> ThresholdPosition {
    let s_c = critical_index(gs.dim, gs.sigma);
    match gs.alpha {
        None => {
            let ratio = mass / gs.mass;
            let class = if (ratio - 1.0).abs() <= tol {
                Dichotomy::Boundary
            } else if ratio < 1.0 {
                Dichotomy::GlobalSide
            } else {
                Dichotomy::BlowupSide
            };
            ThresholdPosition {
                beta: ratio,
                delta0: ratio,
                class,
            }
        }
        Some(alpha) => {
            let beta = energy * mass.powf(alpha) / (gs.energy * gs.mass.powf(alpha));
            let delta0 = grad_sq.sqrt() * mass.powf(alpha / 2.0) / (gs.grad_sq.sqrt() * gs.mass.powf(alpha / 2.0));
            let class = if s_c < 0.0 {
                Dichotomy::Subcritical
            } else if beta > 1.0 + tol {
                Dichotomy::AboveThreshold
            } else if (delta0 - 1.0).abs() <= tol || (beta - 1.0).abs() <= tol {
                Dichotomy::Boundary
            } else if delta0 < 1.0 {
                Dichotomy::GlobalSide
            } else {
                Dichotomy::BlowupSide
            };
            ThresholdPosition { beta, delta0, class }
        }
    }
}

/// Observables of a field given as samples, for initial-data statistics.
pub fn initial_stats(u: &mut FieldState, sigma: f64, alpha: Option<f64>) -> Observables {
    let m0 = u.mass();
    observe(u, 0.0, sigma, m0, alpha)
}

