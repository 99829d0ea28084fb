use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse DFT pair on `m` points.
///
/// Coefficients are normalized so that `û_j` is the amplitude of mode `j`:
/// `to_spectral` divides by `m`, `to_physical` does not.
#[derive(Clone)]
pub struct SpectralTransform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralTransform").field("m", &self.m).finish()
    }
}

impl SpectralTransform {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            m,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    pub fn to_physical_inplace(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
    }

    pub fn to_spectral_inplace(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
        let scale = 1.0 / self.m as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn to_physical(&self, uhat: &[Complex64]) -> Vec<Complex64> {
        let mut out = uhat.to_vec();
        self.to_physical_inplace(&mut out, &mut self.scratch());
        out
    }

    pub fn to_spectral(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = u.to_vec();
        self.to_spectral_inplace(&mut out, &mut self.scratch());
        out
    }
}
