//! Ground state `Q > 0` of `-Q + ΔQ + Q^{2σ+1} = 0` and the constants built on it.
//!
//! In one dimension `Q(x) = (1+σ)^{1/(2σ)} sech^{1/σ}(σx)`. For `n = 2, 3` the
//! radial ODE `Q'' + (n-1)/r Q' - Q + Q^{2σ+1} = 0` is shot from `Q(0)` with
//! adaptive Dormand–Prince steps and bisection, and the norms are integrated
//! alongside the profile.

use crate::{critical_index, scaling_index, validate_nonlinearity, Result, SnlsError};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Radial samples `(r, Q(r), Q'(r))` with `r` increasing from 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RadialProfile {
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub dim: usize,
    pub sigma: f64,
    /// `Q(0)`.
    pub peak: f64,
    /// `M(Q) = ‖Q‖²`.
    pub mass: f64,
    /// `‖∇Q‖²`.
    pub grad_sq: f64,
    /// `‖Q‖_{2σ+2}^{2σ+2}`.
    pub lp_norm_pow: f64,
    /// `H(Q)` from its definition.
    pub energy: f64,
    /// `s_c/(2(1-s_c)) M(Q)`.
    pub energy_from_mass: f64,
    /// `(s_c/n) ‖∇Q‖²`.
    pub energy_from_gradient: f64,
    pub s_c: f64,
    pub alpha: Option<f64>,
    /// Dimensionless part `K` of the sharp constant, `C_GN = K / M(Q)^σ`.
    pub gn_k: f64,
    pub gn_constant: f64,
    /// Maximiser `x*` of `f(x) = (x² - B x^{nσ})/2`, `B = C_GN/(σ+1)`.
    pub x_star: Option<f64>,
    /// `f(x*)`, which equals `H(Q) M(Q)^α`.
    pub f_x_star: Option<f64>,
    /// Relative residual of `‖∇Q‖² = nσ/(2-(n-2)σ) M(Q)`.
    pub pohozaev_gradient_residual: f64,
    /// Relative residual of `‖Q‖_{2σ+2}^{2σ+2} = 2(σ+1)/(2-(n-2)σ) M(Q)`.
    pub pohozaev_potential_residual: f64,
    #[serde(skip)]
    pub profile: RadialProfile,
}

/// Named residual exceeding its tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualFailure {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl GroundState {
    /// `‖Q‖`.
    pub fn norm(&self) -> f64 {
        self.mass.sqrt()
    }

    pub fn grad_norm(&self) -> f64 {
        self.grad_sq.sqrt()
    }

    /// `Q` at radius `r >= 0`, with an exponential tail past the last sample.
    pub fn radial_value(&self, r: f64) -> f64 {
        let r = r.abs();
        if self.dim == 1 {
            return profile_1d(self.sigma, r);
        }
        let p = &self.profile;
        let last = p.r.len() - 1;
        if r >= p.r[last] {
            let rc = p.r[last];
            return p.q[last] * (rc / r).powf((self.dim as f64 - 1.0) / 2.0) * (-(r - rc)).exp();
        }
        let i = match p.r.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => return p.q[i],
            Err(i) => i - 1,
        };
        let h = p.r[i + 1] - p.r[i];
        let t = (r - p.r[i]) / h;
        let (h00, h10) = (2.0 * t * t * t - 3.0 * t * t + 1.0, t * t * t - 2.0 * t * t + t);
        let (h01, h11) = (-2.0 * t * t * t + 3.0 * t * t, t * t * t - t * t);
        h00 * p.q[i] + h10 * h * p.dq[i] + h01 * p.q[i + 1] + h11 * h * p.dq[i + 1]
    }

    /// `Q(|x|)`.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.radial_value(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// Residuals with their names, for reporting.
    pub fn residuals(&self) -> [(&'static str, f64); 4] {
        let scale = self.energy.abs().max(self.energy_from_mass.abs()).max(1e-300);
        let h_mass = if self.s_c == 0.0 {
            self.energy.abs() / self.mass
        } else {
            (self.energy - self.energy_from_mass).abs() / scale
        };
        let h_grad = if self.s_c == 0.0 {
            self.energy.abs() / self.mass
        } else {
            (self.energy - self.energy_from_gradient).abs() / scale
        };
        [
            ("pohozaev_gradient", self.pohozaev_gradient_residual),
            ("pohozaev_potential", self.pohozaev_potential_residual),
            ("energy_vs_mass", h_mass),
            ("energy_vs_gradient", h_grad),
        ]
    }

    /// Recomputes the residuals from the stored scalars and returns the first
    /// one above `tol`.
    pub fn check(&self, tol: f64) -> core::result::Result<(), ResidualFailure> {
        let mut fresh = self.clone();
        fresh.fill_derived();
        for (name, value) in fresh.residuals() {
            if !(value <= tol) {
                return Err(ResidualFailure {
                    name: name.into(),
                    value,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }

    /// Default residual tolerance: `1e-8` in 1D, `1e-6` otherwise.
    pub fn default_tolerance(dim: usize) -> f64 {
        if dim == 1 {
            1e-8
        } else {
            1e-6
        }
    }

    fn fill_derived(&mut self) {
        let n = self.dim as f64;
        let s = self.sigma;
        let d = 2.0 - (n - 2.0) * s;
        self.s_c = critical_index(self.dim, s);
        self.alpha = scaling_index(self.dim, s);
        self.energy = 0.5 * self.grad_sq - self.lp_norm_pow / (2.0 * s + 2.0);
        self.energy_from_mass = self.s_c / (2.0 * (1.0 - self.s_c)) * self.mass;
        self.energy_from_gradient = self.s_c / n * self.grad_sq;
        let g_ref = n * s / d * self.mass;
        let l_ref = 2.0 * (s + 1.0) / d * self.mass;
        self.pohozaev_gradient_residual = (self.grad_sq - g_ref).abs() / g_ref;
        self.pohozaev_potential_residual = (self.lp_norm_pow - l_ref).abs() / l_ref;
        self.gn_k = gn_k(self.dim, s);
        self.gn_constant = self.gn_k / self.mass.powf(s);
        match self.alpha {
            Some(_) => {
                let b = self.gn_constant / (s + 1.0);
                let xs = (2.0 / (b * n * s)).powf(1.0 / (n * s - 2.0));
                self.x_star = Some(xs);
                self.f_x_star = Some(0.5 * (xs * xs - b * xs.powf(n * s)));
            }
            None => {
                self.x_star = None;
                self.f_x_star = None;
            }
        }
    }
}

/// `K = 2(σ+1)(2-(n-2)σ)^{(nσ-2)/2} / (nσ)^{nσ/2}`.
pub fn gn_k(dim: usize, sigma: f64) -> f64 {
    let n = dim as f64;
    let ns = n * sigma;
    2.0 * (sigma + 1.0) * (2.0 - (n - 2.0) * sigma).powf((ns - 2.0) / 2.0) / ns.powf(ns / 2.0)
}

/// Weinstein functional `J(u) = ‖∇u‖^{nσ} ‖u‖^{2-(n-2)σ} / ‖u‖_{2σ+2}^{2σ+2}`;
/// the sharp constant is `1/min J`.
pub fn weinstein_ratio(dim: usize, sigma: f64, mass: f64, grad_sq: f64, lp_norm_pow: f64) -> f64 {
    let n = dim as f64;
    grad_sq.powf(n * sigma / 2.0) * mass.powf((2.0 - (n - 2.0) * sigma) / 2.0) / lp_norm_pow
}

fn profile_1d(sigma: f64, x: f64) -> f64 {
    (1.0 + sigma).powf(0.5 / sigma) / (sigma * x).cosh().powf(1.0 / sigma)
}

fn profile_1d_derivative(sigma: f64, x: f64) -> f64 {
    -profile_1d(sigma, x) * (sigma * x).tanh()
}

pub fn solve_ground_state(dim: usize, sigma: f64) -> Result<GroundState> {
    validate_nonlinearity(dim, sigma)?;
    let (peak, mass, grad_sq, lp_norm_pow, profile) = match dim {
        1 => solve_1d(sigma),
        2 | 3 => solve_radial(dim, sigma)?,
        _ => return Err(SnlsError::UnsupportedDimension(dim)),
    };
    let mut gs = GroundState {
        dim,
        sigma,
        peak,
        mass,
        grad_sq,
        lp_norm_pow,
        energy: 0.0,
        energy_from_mass: 0.0,
        energy_from_gradient: 0.0,
        s_c: 0.0,
        alpha: None,
        gn_k: 0.0,
        gn_constant: 0.0,
        x_star: None,
        f_x_star: None,
        pohozaev_gradient_residual: 0.0,
        pohozaev_potential_residual: 0.0,
        profile,
    };
    gs.fill_derived();
    Ok(gs)
}

type Solved = (f64, f64, f64, f64, RadialProfile);

fn solve_1d(sigma: f64) -> Solved {
    // Q decays like e^{-|x|}; |x| <= 45 leaves tails below 1e-38.
    let (half, h) = (45.0, 2.5e-3);
    let steps = (half / h) as usize;
    let (mut m, mut g, mut l) = (0.0, 0.0, 0.0);
    let mut profile = RadialProfile::default();
    for j in 0..=steps {
        let x = j as f64 * h;
        let q = profile_1d(sigma, x);
        let dq = profile_1d_derivative(sigma, x);
        // Trapezoid weights over [-half, half] from the even half-line samples.
        let w = if j == 0 { h } else if j == steps { h } else { 2.0 * h };
        m += w * q * q;
        g += w * dq * dq;
        l += w * q.powf(2.0 * sigma + 2.0);
        if j % 4 == 0 {
            profile.r.push(x);
            profile.q.push(q);
            profile.dq.push(dq);
        }
    }
    (profile_1d(sigma, 0.0), m, g, l, profile)
}

// State: Q, Q', ∫r^{n-1}Q², ∫r^{n-1}Q'², ∫r^{n-1}Q^{2σ+2}.
type State = [f64; 5];

#[derive(Clone, Copy, PartialEq, Debug)]
enum Shot {
    Overshoot,
    Undershoot,
    Reached,
}

struct RadialOde {
    dim: f64,
    sigma: f64,
}

impl RadialOde {
    fn rhs(&self, r: f64, y: &State) -> State {
        let q = y[0];
        let p = y[1];
        let q2 = q * q;
        let qs = if q2 > 0.0 { q2.powf(self.sigma) } else { 0.0 };
        let w = r.powf(self.dim - 1.0);
        [
            p,
            -(self.dim - 1.0) / r * p + q - qs * q,
            w * q2,
            w * p * p,
            w * qs * q2,
        ]
    }

    fn start(&self, a: f64, r0: f64) -> State {
        let n = self.dim;
        let c = (a - a.powf(2.0 * self.sigma + 1.0)) / n;
        let q = a + 0.5 * c * r0 * r0;
        let vol = r0.powf(n) / n;
        [q, c * r0, a * a * vol, 0.0, a.powf(2.0 * self.sigma + 2.0) * vol]
    }

    /// Integrates from the origin until the trajectory overshoots, undershoots or reaches `r_max`.
    fn shoot(&self, a: f64, r_max: f64, h_max: f64, mut record: Option<&mut RadialProfile>) -> (Shot, f64, State) {
        let r0 = 1e-4;
        let mut r = r0;
        let mut y = self.start(a, r0);
        let mut h: f64 = 1e-3;
        let (rtol, atol) = (1e-12, 1e-14);
        if let Some(p) = record.as_deref_mut() {
            p.r.push(0.0);
            p.q.push(a);
            p.dq.push(0.0);
        }
        while r < r_max {
            h = h.min(h_max).min(r_max - r);
            let (y_new, err) = dopri5_step(self, r, &y, h);
            let mut e: f64 = 0.0;
            for i in 0..5 {
                let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                e = e.max((err[i] / sc).abs());
            }
            if e <= 1.0 || h < 1e-10 {
                r += h;
                y = y_new;
                if let Some(p) = record.as_deref_mut() {
                    p.r.push(r);
                    p.q.push(y[0]);
                    p.dq.push(y[1]);
                }
                if y[0] < 0.0 {
                    return (Shot::Overshoot, r, y);
                }
                if y[1] > 0.0 {
                    return (Shot::Undershoot, r, y);
                }
            }
            let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        }
        (Shot::Reached, r, y)
    }
}

fn dopri5_step(ode: &RadialOde, r: f64, y: &State, h: f64) -> (State, State) {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut k = [[0.0; 5]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..5 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = ode.rhs(r + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = [0.0; 5];
    for i in 0..5 {
        for s in 0..7 {
            y5[i] += h * B5[s] * k[s][i];
            err[i] += h * (B5[s] - B4[s]) * k[s][i];
        }
    }
    (y5, err)
}

fn solve_radial(dim: usize, sigma: f64) -> Result<Solved> {
    let ode = RadialOde {
        dim: dim as f64,
        sigma,
    };
    let r_max = 60.0;
    let coarse = 0.25;
    let mut lo = 1.0 + 1e-9;
    if ode.shoot(lo, r_max, coarse, None).0 != Shot::Undershoot {
        return Err(SnlsError::ShootingFailed(format!(
            "Q(0) = {lo} does not undershoot for n = {dim}, σ = {sigma}"
        )));
    }
    let mut hi = 2.0;
    while ode.shoot(hi, r_max, coarse, None).0 != Shot::Overshoot {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(SnlsError::ShootingFailed("no overshooting Q(0) below 1e8".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match ode.shoot(mid, r_max, coarse, None).0 {
            Shot::Overshoot => hi = mid,
            _ => lo = mid,
        }
    }
    // The undershooting trajectory tracks the decaying solution until its
    // turning point, where Q is at the square root of the bisection accuracy.
    let mut profile = RadialProfile::default();
    let (_, _, y) = ode.shoot(lo, r_max, 0.01, Some(&mut profile));
    let area = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
    Ok((lo, area * y[2], area * y[3], area * y[4], profile))
}
