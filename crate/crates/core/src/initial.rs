//! Initial-data families, deterministic or drawn per trajectory.

use crate::grid::{FieldState, Grid};
use crate::ground_state::GroundState;
use crate::rng::NoisePath;
use crate::{Complex64, Result, SnlsError};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    /// `c Q`.
    ScaledGroundState { scale: f64 },
    /// `√m Q`, so that `M(u₀) = m M(Q)`.
    GroundStateMassFraction { fraction: f64 },
    /// `c Q(x) e^{i ξ₀·x}`.
    BoostedGroundState { scale: f64, velocity: Vec<f64> },
    /// `A exp(-|x|²/w²) exp(i b |x|²)`.
    Gaussian { amplitude: f64, width: f64, chirp: f64 },
    /// `c Q` with `c ~ Uniform[lo, hi]` drawn independently per trajectory.
    RandomScaledGroundState { lo: f64, hi: f64 },
}

impl InitialData {
    pub fn is_random(&self) -> bool {
        matches!(self, InitialData::RandomScaledGroundState { .. })
    }

    pub fn needs_ground_state(&self) -> bool {
        !matches!(self, InitialData::Zero | InitialData::Gaussian { .. })
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: &str| Err(SnlsError::InvalidParameter(m.into()));
        match self {
            InitialData::GroundStateMassFraction { fraction } if *fraction < 0.0 => bad("mass fraction must be non-negative"),
            InitialData::BoostedGroundState { velocity, .. } if velocity.len() != dim => Err(SnlsError::InvalidParameter(format!(
                "velocity has {} components, dimension is {dim}",
                velocity.len()
            ))),
            InitialData::Gaussian { width, .. } if *width <= 0.0 => bad("gaussian width must be positive"),
            InitialData::RandomScaledGroundState { lo, hi } if !(0.0 <= *lo && lo <= hi) => bad("need 0 <= lo <= hi"),
            _ => Ok(()),
        }
    }

    /// Samples the datum on `grid`. Random families draw from a stream reserved
    /// for initial data inside `path`.
    pub fn sample(&self, grid: Arc<Grid>, gs: Option<&GroundState>, path: NoisePath) -> Result<FieldState> {
        let need_gs = || {
            gs.ok_or_else(|| SnlsError::InvalidParameter("this initial datum needs a ground state".into()))
        };
        Ok(match self {
            InitialData::Zero => FieldState::zeros(grid),
            InitialData::ScaledGroundState { scale } => {
                let q = need_gs()?;
                FieldState::from_fn(grid, |x| Complex64::new(scale * q.value_at(x), 0.0))
            }
            InitialData::GroundStateMassFraction { fraction } => {
                let q = need_gs()?;
                let c = fraction.sqrt();
                FieldState::from_fn(grid, |x| Complex64::new(c * q.value_at(x), 0.0))
            }
            InitialData::BoostedGroundState { scale, velocity } => {
                let q = need_gs()?;
                FieldState::from_fn(grid, |x| {
                    let phase: f64 = x.iter().zip(velocity).map(|(a, b)| a * b).sum();
                    Complex64::from_polar(scale * q.value_at(x), phase)
                })
            }
            InitialData::Gaussian { amplitude, width, chirp } => FieldState::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::from_polar(amplitude * (-r2 / (width * width)).exp(), chirp * r2)
            }),
            InitialData::RandomScaledGroundState { lo, hi } => {
                let q = need_gs()?;
                let c = self.draw_scale(*lo, *hi, path);
                FieldState::from_fn(grid, |x| Complex64::new(c * q.value_at(x), 0.0))
            }
        })
    }

    fn draw_scale(&self, lo: f64, hi: f64, path: NoisePath) -> f64 {
        if hi == lo {
            return lo;
        }
        let mut rng = path.node_rng(0, 0);
        Uniform::new(lo, hi).expect("lo < hi").sample(&mut rng)
    }

    /// `E[M(u₀)^q]` for ground-state families, in closed form.
    pub fn mass_moment(&self, q: f64, gs: &GroundState) -> Option<f64> {
        let mq = gs.mass.powf(q);
        match self {
            InitialData::ScaledGroundState { scale } | InitialData::BoostedGroundState { scale, .. } => {
                Some(mq * scale.abs().powf(2.0 * q))
            }
            InitialData::GroundStateMassFraction { fraction } => Some(mq * fraction.powf(q)),
            InitialData::RandomScaledGroundState { lo, hi } => {
                if hi == lo {
                    return Some(mq * lo.powf(2.0 * q));
                }
                let e = 2.0 * q + 1.0;
                Some(mq * (hi.powf(e) - lo.powf(e)) / (e * (hi - lo)))
            }
            _ => None,
        }
    }
}
