//! Core of the stochastic focusing NLS lab.
//!
//! The equation is `i u_t - (Δu + |u|^{2σ} u) = noise` on a periodic box, with
//! multiplicative (Stratonovich, real covariance) or additive (complex) noise.
//! This crate is `no_std` + `alloc` when built without the default `std`
//! feature; in that mode an FFT backend must be supplied through
//! [`grid::FftPlanner`].

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod initial;
pub mod noise;
pub mod observables;
pub mod rng;
pub mod theory;

pub use error::{Result, SnlsError};
pub use num_complex::Complex64;

/// Critical regularity `s_c = n/2 - 1/σ`.
pub fn critical_index(dim: usize, sigma: f64) -> f64 {
    dim as f64 / 2.0 - 1.0 / sigma
}

/// Scaling exponent `α = (1 - s_c)/s_c = (2 - (n-2)σ)/(nσ - 2)`.
///
/// Undefined (returns `None`) in the mass-critical case `s_c = 0`.
pub fn scaling_index(dim: usize, sigma: f64) -> Option<f64> {
    let n = dim as f64;
    let den = n * sigma - 2.0;
    if den.abs() < 1e-12 {
        None
    } else {
        Some((2.0 - (n - 2.0) * sigma) / den)
    }
}

/// Checks `σ > 0`, `1 <= n <= 5` and energy subcriticality `(n-2)σ < 2`.
pub fn validate_nonlinearity(dim: usize, sigma: f64) -> Result<()> {
    if !(1..=5).contains(&dim) {
        return Err(SnlsError::InvalidParameter(alloc::format!(
            "dimension must be in 1..=5, got {dim}"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(SnlsError::InvalidParameter(alloc::format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if dim > 2 && (dim as f64 - 2.0) * sigma >= 2.0 {
        return Err(SnlsError::EnergySupercritical {
            dim,
            sigma,
            limit: 2.0 / (dim as f64 - 2.0),
        });
    }
    Ok(())
}
