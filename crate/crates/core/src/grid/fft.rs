//! One-dimensional FFT backends.
//!
//! Transforms are unnormalized in both directions: `forward` computes
//! `Σ_j u_j e^{-2πi jk/N}` and `inverse` the same sum with `+`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

pub trait Fft1d: Send + Sync {
    fn len(&self) -> usize;

    /// Scratch length required by [`Fft1d::process`].
    fn scratch_len(&self) -> usize;

    fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64], inverse: bool);
}

pub trait FftPlanner {
    fn plan(&mut self, len: usize) -> Arc<dyn Fft1d>;
}

/// Direct `O(N²)` DFT. Slow, but dependency-free and exact up to rounding.
pub struct NaiveDft {
    twiddles: Vec<Complex64>,
}

impl NaiveDft {
    pub fn new(len: usize) -> Self {
        let twiddles = (0..len)
            .map(|j| {
                let theta = -2.0 * PI * j as f64 / len as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Self { twiddles }
    }
}

impl Fft1d for NaiveDft {
    fn len(&self) -> usize {
        self.twiddles.len()
    }

    fn scratch_len(&self) -> usize {
        self.twiddles.len()
    }

    fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
        let n = self.twiddles.len();
        for k in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in buf.iter().enumerate() {
                let w = self.twiddles[(j * k) % n];
                acc += v * if inverse { w.conj() } else { w };
            }
            scratch[k] = acc;
        }
        buf.copy_from_slice(&scratch[..n]);
    }
}

#[derive(Default)]
pub struct NaivePlanner;

impl FftPlanner for NaivePlanner {
    fn plan(&mut self, len: usize) -> Arc<dyn Fft1d> {
        Arc::new(NaiveDft::new(len))
    }
}

#[cfg(feature = "std")]
pub use self::rust_fft::RustFftPlanner;

#[cfg(feature = "std")]
mod rust_fft {
    use super::*;

    struct RustFft {
        forward: Arc<dyn rustfft::Fft<f64>>,
        inverse: Arc<dyn rustfft::Fft<f64>>,
    }

    impl Fft1d for RustFft {
        fn len(&self) -> usize {
            self.forward.len()
        }

        fn scratch_len(&self) -> usize {
            self.forward
                .get_inplace_scratch_len()
                .max(self.inverse.get_inplace_scratch_len())
        }

        fn process(&self, buf: &mut [Complex64], scratch: &mut [Complex64], inverse: bool) {
            let plan = if inverse { &self.inverse } else { &self.forward };
            let need = plan.get_inplace_scratch_len();
            plan.process_with_scratch(buf, &mut scratch[..need]);
        }
    }

    pub struct RustFftPlanner {
        inner: rustfft::FftPlanner<f64>,
    }

    impl Default for RustFftPlanner {
        fn default() -> Self {
            Self {
                inner: rustfft::FftPlanner::new(),
            }
        }
    }

    impl FftPlanner for RustFftPlanner {
        fn plan(&mut self, len: usize) -> Arc<dyn Fft1d> {
            Arc::new(RustFft {
                forward: self.inner.plan_fft_forward(len),
                inverse: self.inner.plan_fft_inverse(len),
            })
        }
    }
}
