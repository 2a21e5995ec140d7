//! Periodic Cartesian grids, spectral transforms and the field container.
//!
//! Coordinates are centred: axis `a` samples `x_j = -L_a/2 + j L_a/N_a`.
//! Quadratures use the cell volume `h^d = Π L_a/N_a`. Spectra are the
//! unnormalized forward DFT, so Parseval reads
//! `h^d Σ|u_j|² = (h^d/N_tot) Σ|û_k|²`.

mod fft;

pub use fft::{Fft1d, FftPlanner, NaiveDft, NaivePlanner};
#[cfg(feature = "std")]
pub use fft::RustFftPlanner;

use crate::{Result, SnlsError};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

fn default_dealias() -> f64 {
    DEFAULT_DEALIAS_FRACTION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Box side `L_a` per axis; the number of entries is the dimension.
    pub extents: Vec<f64>,
    /// Even number of points `N_a` per axis.
    pub points: Vec<usize>,
    /// Modes with `|k_a| > fraction * N_a/2` on any axis are zeroed by dealiasing.
    #[serde(default = "default_dealias")]
    pub dealias_fraction: f64,
}

impl GridSpec {
    pub fn cube(dim: usize, extent: f64, points: usize) -> Self {
        Self {
            extents: vec![extent; dim],
            points: vec![points; dim],
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        }
    }

    pub fn with_dealias(mut self, fraction: f64) -> Self {
        self.dealias_fraction = fraction;
        self
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.extents.len();
        if dim == 0 || dim > 3 {
            return Err(SnlsError::InvalidGrid(format!(
                "grid dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if self.points.len() != dim {
            return Err(SnlsError::InvalidGrid(format!(
                "{} extents but {} point counts",
                dim,
                self.points.len()
            )));
        }
        for (a, (&l, &n)) in self.extents.iter().zip(&self.points).enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(SnlsError::InvalidGrid(format!("axis {a}: extent must be positive, got {l}")));
            }
            if n < 8 || n % 2 != 0 {
                return Err(SnlsError::InvalidGrid(format!(
                    "axis {a}: point count must be even and at least 8, got {n}"
                )));
            }
        }
        let f = self.dealias_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(SnlsError::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {f}"
            )));
        }
        Ok(())
    }
}

/// Integer mode index of FFT slot `j` on an axis with `n` points.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// FFT slot holding mode `k`, if it exists on an axis with `n` points.
pub fn mode_slot(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k >= -half && k < half {
        Some(if k >= 0 { k as usize } else { (k + n as i64) as usize })
    } else {
        None
    }
}

pub struct Grid {
    spec: GridSpec,
    coords: Vec<Vec<f64>>,
    wavenumbers: Vec<Vec<f64>>,
    strides: Vec<usize>,
    total: usize,
    cell_volume: f64,
    k_sq: Vec<f64>,
    r_sq: Vec<f64>,
    dealias_mask: Vec<bool>,
    plans: Vec<Arc<dyn Fft1d>>,
}

impl core::fmt::Debug for Grid {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec, planner: &mut dyn FftPlanner) -> Result<Arc<Self>> {
        spec.validate()?;
        let dim = spec.dim();
        let mut coords = Vec::with_capacity(dim);
        let mut wavenumbers = Vec::with_capacity(dim);
        let mut plans = Vec::with_capacity(dim);
        let mut cell_volume = 1.0;
        for a in 0..dim {
            let (l, n) = (spec.extents[a], spec.points[a]);
            let h = l / n as f64;
            cell_volume *= h;
            coords.push((0..n).map(|j| -l / 2.0 + j as f64 * h).collect::<Vec<_>>());
            wavenumbers.push(
                (0..n)
                    .map(|j| 2.0 * PI * mode_index(j, n) as f64 / l)
                    .collect::<Vec<_>>(),
            );
            plans.push(planner.plan(n));
        }
        let mut strides = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * spec.points[a + 1];
        }
        let total: usize = spec.points.iter().product();
        let mut k_sq = vec![0.0; total];
        let mut r_sq = vec![0.0; total];
        let mut dealias_mask = vec![true; total];
        for idx in 0..total {
            for a in 0..dim {
                let j = (idx / strides[a]) % spec.points[a];
                k_sq[idx] += wavenumbers[a][j] * wavenumbers[a][j];
                r_sq[idx] += coords[a][j] * coords[a][j];
                let k = mode_index(j, spec.points[a]).unsigned_abs() as f64;
                if k > spec.dealias_fraction * (spec.points[a] / 2) as f64 {
                    dealias_mask[idx] = false;
                }
            }
        }
        Ok(Arc::new(Self {
            spec,
            coords,
            wavenumbers,
            strides,
            total,
            cell_volume,
            k_sq,
            r_sq,
            dealias_mask,
            plans,
        }))
    }

    /// Grid with the rustfft backend.
    #[cfg(feature = "std")]
    pub fn with_default_backend(spec: GridSpec) -> Result<Arc<Self>> {
        Self::new(spec, &mut RustFftPlanner::default())
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// Box volume `Π L_a`.
    pub fn volume(&self) -> f64 {
        self.spec.extents.iter().product()
    }

    pub fn coords(&self, axis: usize) -> &[f64] {
        &self.coords[axis]
    }

    pub fn wavenumbers(&self, axis: usize) -> &[f64] {
        &self.wavenumbers[axis]
    }

    /// `|ξ|²` per flattened spectral slot.
    pub fn k_sq(&self) -> &[f64] {
        &self.k_sq
    }

    /// `|x|²` per flattened grid point.
    pub fn r_sq(&self) -> &[f64] {
        &self.r_sq
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.dealias_mask
    }

    /// Per-axis index of flattened slot `idx`.
    pub fn axis_index(&self, idx: usize, axis: usize) -> usize {
        (idx / self.strides[axis]) % self.spec.points[axis]
    }

    /// Flattened slot of the per-axis indices.
    pub fn flat_index(&self, indices: &[usize]) -> usize {
        indices.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinate of point `idx` along `axis`.
    pub fn x(&self, idx: usize, axis: usize) -> f64 {
        self.coords[axis][self.axis_index(idx, axis)]
    }

    /// Wavenumber of slot `idx` along `axis`.
    pub fn xi(&self, idx: usize, axis: usize) -> f64 {
        self.wavenumbers[axis][self.axis_index(idx, axis)]
    }

    /// Whether slot `idx` is the Nyquist mode of `axis`.
    pub fn is_nyquist(&self, idx: usize, axis: usize) -> bool {
        self.axis_index(idx, axis) == self.spec.points[axis] / 2
    }

    pub fn workspace(&self) -> Workspace {
        let line = self.spec.points.iter().copied().max().unwrap_or(0);
        let scratch = self.plans.iter().map(|p| p.scratch_len()).max().unwrap_or(0);
        Workspace {
            line: vec![Complex64::new(0.0, 0.0); line],
            scratch: vec![Complex64::new(0.0, 0.0); scratch.max(line)],
        }
    }

    /// In-place d-dimensional transform. The inverse includes the `1/N_tot` factor.
    pub fn transform(&self, data: &mut [Complex64], work: &mut Workspace, inverse: bool) {
        assert_eq!(data.len(), self.total, "field length does not match grid");
        for a in 0..self.dim() {
            let n = self.spec.points[a];
            let stride = self.strides[a];
            let plan = &self.plans[a];
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process(chunk, &mut work.scratch, inverse);
                }
                continue;
            }
            let block = n * stride;
            let line = &mut work.line[..n];
            for start in (0..self.total).step_by(block) {
                for i in 0..stride {
                    let base = start + i;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    plan.process(line, &mut work.scratch, inverse);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.total as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// Per-worker FFT scratch buffers.
#[derive(Clone, Debug)]
pub struct Workspace {
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Complex field on a grid with a lazily refreshed spectral cache.
#[derive(Clone, Debug)]
pub struct FieldState {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    spectrum: Vec<Complex64>,
    spectrum_valid: bool,
    work: Workspace,
}

impl FieldState {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SnlsError::InvalidGrid(format!(
                "field has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        let work = grid.workspace();
        Ok(Self {
            spectrum: vec![Complex64::new(0.0, 0.0); values.len()],
            values,
            spectrum_valid: false,
            work,
            grid,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self::new(grid, vec![Complex64::new(0.0, 0.0); n]).expect("length matches")
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let dim = grid.dim();
        let mut x = [0.0; 3];
        let values = (0..grid.len())
            .map(|idx| {
                for (a, xa) in x.iter_mut().enumerate().take(dim) {
                    *xa = grid.x(idx, a);
                }
                f(&x[..dim])
            })
            .collect();
        Self::new(grid, values).expect("length matches")
    }

    /// Builds a field from spectral coefficients (unnormalized forward DFT convention).
    pub fn from_spectrum(grid: Arc<Grid>, spectrum: Vec<Complex64>) -> Result<Self> {
        let mut state = Self::new(grid, spectrum.clone())?;
        state.spectrum = spectrum;
        state.values.copy_from_slice(&state.spectrum);
        state.grid.clone().transform(&mut state.values, &mut state.work, true);
        state.spectrum_valid = true;
        Ok(state)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Mutable access to the samples; invalidates the spectral cache.
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        self.spectrum_valid = false;
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn spectrum_is_valid(&self) -> bool {
        self.spectrum_valid
    }

    pub fn spectrum(&mut self) -> &[Complex64] {
        self.refresh_spectrum();
        &self.spectrum
    }

    fn refresh_spectrum(&mut self) {
        if !self.spectrum_valid {
            self.spectrum.copy_from_slice(&self.values);
            let grid = self.grid.clone();
            grid.transform(&mut self.spectrum, &mut self.work, false);
            self.spectrum_valid = true;
        }
    }

    /// Applies `f(slot, coefficient)` to the spectrum and resynthesizes the samples.
    /// The cache stays valid afterwards.
    pub fn map_spectrum(&mut self, mut f: impl FnMut(usize, &mut Complex64)) {
        self.refresh_spectrum();
        for (idx, c) in self.spectrum.iter_mut().enumerate() {
            f(idx, c);
        }
        self.values.copy_from_slice(&self.spectrum);
        let grid = self.grid.clone();
        grid.transform(&mut self.values, &mut self.work, true);
    }

    /// `h^d Σ |u|²`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Mass evaluated from the spectrum.
    pub fn spectral_mass(&mut self) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        scale * self.spectrum().iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `‖∇u‖² = (h^d/N_tot) Σ |ξ|² |û|²`.
    pub fn gradient_norm_sq(&mut self) -> f64 {
        self.refresh_spectrum();
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        scale
            * self
                .spectrum
                .iter()
                .zip(self.grid.k_sq())
                .map(|(v, k)| k * v.norm_sqr())
                .sum::<f64>()
    }

    /// `‖u‖_p^p = h^d Σ |u|^p`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        let half = p / 2.0;
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .map(|v| {
                    let m = v.norm_sqr();
                    if m > 0.0 {
                        m.powf(half)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `(h^d Σ |u|^p)^{1/p}` for `p >= 1`.
    pub fn quadrature_lp(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(SnlsError::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
        }
        if !self.is_finite() {
            return Err(SnlsError::InvalidParameter("non-finite field".into()));
        }
        Ok(self.lp_norm_pow(p).powf(1.0 / p))
    }

    /// Zeroes the modes outside the retained band.
    pub fn apply_dealias(&mut self) {
        if self.grid.dealias_mask().iter().all(|&keep| keep) {
            return;
        }
        let grid = self.grid.clone();
        let mask = grid.dealias_mask();
        self.map_spectrum(|idx, c| {
            if !mask[idx] {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    /// Spectral partial derivative `∂_a u`; the Nyquist mode is dropped.
    pub fn derivative(&mut self, axis: usize) -> Vec<Complex64> {
        self.refresh_spectrum();
        let grid = self.grid.clone();
        let mut out: Vec<Complex64> = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                if grid.is_nyquist(idx, axis) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, grid.xi(idx, axis))
                }
            })
            .collect();
        grid.transform(&mut out, &mut self.work, true);
        out
    }

    /// Fraction of spectral energy in the outer fifth of the retained band.
    pub fn spectral_tail_fraction(&mut self) -> f64 {
        self.refresh_spectrum();
        let grid = self.grid.clone();
        let spec = grid.spec();
        let (mut tail, mut total) = (0.0, 0.0);
        for (idx, c) in self.spectrum.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            let outer = (0..grid.dim()).any(|a| {
                let n = spec.points[a];
                let k = mode_index(grid.axis_index(idx, a), n).unsigned_abs() as f64;
                k > 0.8 * spec.dealias_fraction * (n / 2) as f64
            });
            if outer {
                tail += e;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }
}
