//! Spatially correlated Wiener noise `W = Σ_k β_k φe_k`.
//!
//! The covariance operator `φ` is diagonal in the periodic trigonometric basis
//! with amplitudes `λ_ξ = λ_{-ξ}`. The real orthonormal basis pairs
//! `√(2/V) cos(ξ·x)` with `√(2/V) sin(ξ·x)` (a single cosine with weight
//! `√(1/V)` for self-conjugate modes). Multiplicative noise is real. Additive
//! noise is `(W₁ + iW₂)/√2` with independent copies, so `E‖ΔW‖² = hs00·dt`.

use crate::grid::{mode_index, Grid, FieldState};
use crate::{Complex64, Result, SnlsError};
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use rand_chacha::rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseType {
    None,
    Multiplicative,
    Additive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeAmplitude {
    /// Integer mode per axis; the wavenumber is `2π k_a / L_a`.
    pub mode: Vec<i64>,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum KernelShape {
    /// `K(x) = amplitude · exp(-|x|²/(2 width²))`.
    Gaussian { amplitude: f64, width: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceSpec {
    /// Explicit amplitude table. A mode listed without its mirror `-k` is mirrored.
    FourierDiagonal { modes: Vec<ModeAmplitude> },
    /// `λ_ξ = strength · exp(-|ξ|²/(2 width²))` for `|ξ| <= cutoff`.
    GaussianSpectrum { width: f64, strength: f64, cutoff: f64 },
    /// Convolution `φu = K * u`; amplitudes are `|K̂(ξ)|` from quadrature.
    /// Modes below `1e-12` of the peak amplitude are dropped.
    PhysicalKernel { kernel: KernelShape },
}

impl CovarianceSpec {
    pub fn single_mode(mode: Vec<i64>, amplitude: f64) -> Self {
        Self::FourierDiagonal {
            modes: vec![ModeAmplitude { mode, amplitude }],
        }
    }
}

/// Summaries of the covariance operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConstants {
    /// `Σ‖φe_k‖²`.
    pub hs00: f64,
    /// `Σ‖φe_k‖²_{H¹}`.
    pub hs01: f64,
    /// `sup_x Σ|∇φe_k(x)|²`.
    pub m_phi: f64,
    /// `sup_x Σ(φe_k(x))²`.
    pub f_phi_sup: f64,
    /// `Σ‖x φe_k‖²`.
    pub c_phi_sigma: f64,
    /// `Σ‖∇φe_k‖²`.
    pub c_phi_1: f64,
    /// `Im Σ∫ φe_k x·∇(conj φe_k)`; zero for the real basis used here.
    pub c_phi_2: f64,
    /// `Σ‖φe_k‖²_{L^{2σ+2}}`.
    pub c_rad_2s2: f64,
    /// `hs01^{nσ/(2(2σ+2))} hs00^{(2-(n-2)σ)/(2(2σ+2))}`.
    pub c_phi_interp: f64,
}

impl NoiseConstants {
    pub fn zero() -> Self {
        Self {
            hs00: 0.0,
            hs01: 0.0,
            m_phi: 0.0,
            f_phi_sup: 0.0,
            c_phi_sigma: 0.0,
            c_phi_1: 0.0,
            c_phi_2: 0.0,
            c_rad_2s2: 0.0,
            c_phi_interp: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
struct BasisMode {
    /// Representative integer mode.
    mode: Vec<i64>,
    amplitude: f64,
    self_conjugate: bool,
}

/// Covariance prepared on a grid.
#[derive(Clone, Debug)]
pub struct NoiseField {
    noise_type: NoiseType,
    grid: Arc<Grid>,
    modes: Vec<BasisMode>,
    /// Samples of each real basis function `φe_k`.
    basis: Vec<Vec<f64>>,
    f_phi: Vec<f64>,
    f1_phi: Vec<f64>,
}

fn mode_key(grid: &Grid, mode: &[i64]) -> Vec<i64> {
    // Fold onto the FFT index range so that `-N/2` and `N/2` coincide.
    mode.iter()
        .enumerate()
        .map(|(a, &k)| {
            let n = grid.spec().points[a] as i64;
            let r = k.rem_euclid(n);
            if r >= n / 2 {
                r - n
            } else {
                r
            }
        })
        .collect()
}

fn negate(grid: &Grid, mode: &[i64]) -> Vec<i64> {
    let neg: Vec<i64> = mode.iter().map(|k| -k).collect();
    mode_key(grid, &neg)
}

fn in_band(grid: &Grid, mode: &[i64]) -> bool {
    let spec = grid.spec();
    mode.iter().enumerate().all(|(a, &k)| {
        let n = spec.points[a];
        (k.unsigned_abs() as f64) <= spec.dealias_fraction * (n / 2) as f64
    })
}

fn wavevector(grid: &Grid, mode: &[i64]) -> Vec<f64> {
    mode.iter()
        .enumerate()
        .map(|(a, &k)| 2.0 * core::f64::consts::PI * k as f64 / grid.spec().extents[a])
        .collect()
}

fn amplitude_table(grid: &Arc<Grid>, cov: &CovarianceSpec) -> Result<BTreeMap<Vec<i64>, f64>> {
    let dim = grid.dim();
    let mut table = BTreeMap::new();
    match cov {
        CovarianceSpec::FourierDiagonal { modes } => {
            for m in modes {
                if m.mode.len() != dim {
                    return Err(SnlsError::InvalidParameter(format!(
                        "mode {:?} has {} components, grid has dimension {dim}",
                        m.mode,
                        m.mode.len()
                    )));
                }
                if !m.amplitude.is_finite() || m.amplitude < 0.0 {
                    return Err(SnlsError::InvalidParameter(format!(
                        "amplitude of mode {:?} must be finite and non-negative",
                        m.mode
                    )));
                }
                let key = mode_key(grid, &m.mode);
                if let Some(old) = table.insert(key.clone(), m.amplitude) {
                    if old != m.amplitude {
                        return Err(SnlsError::InvalidParameter(format!(
                            "mode {:?} listed twice with different amplitudes",
                            m.mode
                        )));
                    }
                }
            }
            let given: Vec<(Vec<i64>, f64)> = table.iter().map(|(k, v)| (k.clone(), *v)).collect();
            for (key, amp) in given {
                let mirror = negate(grid, &key);
                match table.get(&mirror) {
                    Some(&other) if other != amp => {
                        return Err(SnlsError::AsymmetricAmplitudes(format!("{key:?}")));
                    }
                    Some(_) => {}
                    None => {
                        table.insert(mirror, amp);
                    }
                }
            }
        }
        CovarianceSpec::GaussianSpectrum {
            width,
            strength,
            cutoff,
        } => {
            if !(*width > 0.0 && *strength >= 0.0 && *cutoff >= 0.0) {
                return Err(SnlsError::InvalidParameter(
                    "gaussian spectrum needs width > 0, strength >= 0, cutoff >= 0".into(),
                ));
            }
            for idx in 0..grid.len() {
                let k2 = grid.k_sq()[idx];
                if k2.sqrt() <= *cutoff {
                    let key: Vec<i64> = (0..dim)
                        .map(|a| mode_index(grid.axis_index(idx, a), grid.spec().points[a]))
                        .collect();
                    table.insert(key, strength * (-k2 / (2.0 * width * width)).exp());
                }
            }
        }
        CovarianceSpec::PhysicalKernel { kernel } => {
            let KernelShape::Gaussian { amplitude, width } = *kernel;
            if !(width > 0.0 && amplitude.is_finite()) {
                return Err(SnlsError::InvalidParameter("kernel width must be positive".into()));
            }
            let mut field = FieldState::from_fn(grid.clone(), |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0)
            });
            let h = grid.cell_volume();
            let spectrum: Vec<f64> = field.spectrum().iter().map(|c| h * c.norm()).collect();
            let peak = spectrum.iter().cloned().fold(0.0, f64::max);
            for (idx, &lam) in spectrum.iter().enumerate() {
                if lam > 1e-12 * peak {
                    let key: Vec<i64> = (0..dim)
                        .map(|a| mode_index(grid.axis_index(idx, a), grid.spec().points[a]))
                        .collect();
                    table.insert(key, lam);
                }
            }
        }
    }
    table.retain(|_, v| *v > 0.0);
    for key in table.keys() {
        if !in_band(grid, key) {
            return Err(SnlsError::BandExceeded(format!(
                "mode {key:?} lies outside the retained band (fraction {})",
                grid.spec().dealias_fraction
            )));
        }
    }
    Ok(table)
}

impl NoiseField {
    pub fn new(grid: Arc<Grid>, noise_type: NoiseType, cov: &CovarianceSpec) -> Result<Self> {
        let table = if noise_type == NoiseType::None {
            BTreeMap::new()
        } else {
            amplitude_table(&grid, cov)?
        };
        let dim = grid.dim();
        let volume = grid.volume();
        let mut modes = Vec::new();
        for (key, &amp) in &table {
            let mirror = negate(&grid, key);
            let self_conjugate = mirror == *key;
            // Keep one representative per ±k pair: the lexicographically larger.
            if !self_conjugate && mirror > *key {
                continue;
            }
            modes.push(BasisMode {
                mode: key.clone(),
                amplitude: amp,
                self_conjugate,
            });
        }
        let n = grid.len();
        let mut basis = Vec::new();
        let mut f_phi = vec![0.0; n];
        let mut f1_phi = vec![0.0; n];
        for m in &modes {
            let xi = wavevector(&grid, &m.mode);
            let xi_sq: f64 = xi.iter().map(|v| v * v).sum();
            let weight = m.amplitude * if m.self_conjugate { (1.0 / volume).sqrt() } else { (2.0 / volume).sqrt() };
            let phase: Vec<f64> = (0..n)
                .map(|idx| (0..dim).map(|a| xi[a] * grid.x(idx, a)).sum())
                .collect();
            let cos: Vec<f64> = phase.iter().map(|p| weight * p.cos()).collect();
            for idx in 0..n {
                f_phi[idx] += cos[idx] * cos[idx];
                let s = weight * phase[idx].sin();
                f1_phi[idx] += xi_sq * s * s;
            }
            basis.push(cos);
            if !m.self_conjugate {
                let sin: Vec<f64> = phase.iter().map(|p| weight * p.sin()).collect();
                for idx in 0..n {
                    f_phi[idx] += sin[idx] * sin[idx];
                    let c = weight * phase[idx].cos();
                    f1_phi[idx] += xi_sq * c * c;
                }
                basis.push(sin);
            }
        }
        Ok(Self {
            noise_type,
            grid,
            modes,
            basis,
            f_phi,
            f1_phi,
        })
    }

    pub fn noise_type(&self) -> NoiseType {
        self.noise_type
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    /// Number of independent standard normals per increment.
    pub fn n_coefficients(&self) -> usize {
        match self.noise_type {
            NoiseType::None => 0,
            NoiseType::Multiplicative => self.basis.len(),
            NoiseType::Additive => 2 * self.basis.len(),
        }
    }

    /// Real basis functions `φe_k` sampled on the grid.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `F_φ(x) = Σ (φe_k(x))²`.
    pub fn f_phi(&self) -> &[f64] {
        &self.f_phi
    }

    /// `f1_φ(x) = Σ |∇φe_k(x)|²`.
    pub fn f1_phi(&self) -> &[f64] {
        &self.f1_phi
    }

    /// Fills `out` with independent `N(0, dt)` coefficients.
    pub fn sample_coefficients<G: RngCore>(
        &self,
        dt: f64,
        rng: &mut G,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        let s = dt.sqrt();
        for _ in 0..self.n_coefficients() {
            let z: f64 = StandardNormal.sample(rng);
            out.push(s * z);
        }
    }

    /// Splits the increment `coeffs` over an interval of length `dt` into two
    /// halves by Brownian-bridge sampling. Writes the first half into `first`
    /// and the second into `coeffs`.
    pub fn bridge_split<G: RngCore>(
        &self,
        coeffs: &mut [f64],
        dt: f64,
        rng: &mut G,
        first: &mut Vec<f64>,
    ) {
        first.clear();
        let s = 0.5 * dt.sqrt();
        for c in coeffs.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            let a = 0.5 * *c + s * z;
            first.push(a);
            *c -= a;
        }
    }

    /// Real increment `Σ_k c_k φe_k(x)` for multiplicative noise.
    pub fn synthesize_real(&self, coeffs: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (c, phi) in coeffs.iter().zip(&self.basis) {
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
    }

    /// Complex increment `Σ_k (c_k + i c'_k)/√2 φe_k(x)` for additive noise.
    pub fn synthesize_complex(&self, coeffs: &[f64], out: &mut [Complex64]) {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let k = self.basis.len();
        let r = core::f64::consts::FRAC_1_SQRT_2;
        for (j, phi) in self.basis.iter().enumerate() {
            let c = Complex64::new(r * coeffs[j], r * coeffs[k + j]);
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
    }

    /// Retained `(mode, λ)` pairs, one per `±k` pair.
    pub fn modes(&self) -> Vec<(Vec<i64>, f64)> {
        self.modes.iter().map(|m| (m.mode.clone(), m.amplitude)).collect()
    }

    pub fn constants(&self, dim: usize, sigma: f64) -> NoiseConstants {
        if self.basis.is_empty() {
            return NoiseConstants::zero();
        }
        let grid = &self.grid;
        let h = grid.cell_volume();
        let p = 2.0 * sigma + 2.0;
        let mut c = NoiseConstants::zero();
        let mut b = 0;
        for m in &self.modes {
            let xi = wavevector(grid, &m.mode);
            let xi_sq: f64 = xi.iter().map(|v| v * v).sum();
            let count = if m.self_conjugate { 1 } else { 2 };
            for phi in &self.basis[b..b + count] {
                let l2: f64 = h * phi.iter().map(|v| v * v).sum::<f64>();
                c.hs00 += l2;
                c.c_phi_1 += xi_sq * l2;
                c.hs01 += (1.0 + xi_sq) * l2;
                c.c_phi_sigma += h * phi.iter().zip(grid.r_sq()).map(|(v, r)| r * v * v).sum::<f64>();
                let lp: f64 = h * phi.iter().map(|v| v.abs().powf(p)).sum::<f64>();
                c.c_rad_2s2 += lp.powf(2.0 / p);
            }
            b += count;
        }
        c.m_phi = self.f1_phi.iter().cloned().fold(0.0, f64::max);
        c.f_phi_sup = self.f_phi.iter().cloned().fold(0.0, f64::max);
        let n = dim as f64;
        c.c_phi_interp = c.hs01.sqrt().powf(n * sigma / p) * c.hs00.sqrt().powf((2.0 - (n - 2.0) * sigma) / p);
        c
    }
}
