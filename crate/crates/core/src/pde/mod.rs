//! Pseudospectral testbed: the periodic nonlinear Schrödinger equation
//! `i·u_t + u_xx + 2|u|²u = 0`, written as `u_t = i·u_xx + 2i|u|²u` and split
//! into an implicit linear part (diagonal in Fourier space) and an explicit
//! cubic nonlinearity evaluated in physical space.

mod parareal;
mod spectral;
mod stepper;

pub use parareal::{
    parareal_integrate, parareal_integrate_from, IterationPolicy, PararealRunConfig, RunStats,
};
pub use spectral::SpectralTransform;
pub use stepper::{imex_step, serial_integrate, serial_integrate_from, Propagator};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// States with `‖u‖∞` above this are treated as diverged.
pub const BLOW_UP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlsProblem {
    /// Number of grid points, a power of two.
    pub m: usize,
    /// Domain length; the grid is `x_j = −L/2 + j·L/M`.
    pub length: f64,
    pub t_final: f64,
    /// Coefficient `c` of the explicit term `c·i|u|²u`. Zero gives the linear
    /// Schrödinger equation.
    pub nonlinear_coeff: f64,
    /// Zero modes with `|j| > M/3` after each nonlinear evaluation.
    pub dealias: bool,
}

impl Default for NlsProblem {
    fn default() -> Self {
        Self {
            m: 1024,
            length: 8.0 * PI,
            t_final: 15.0,
            nonlinear_coeff: 2.0,
            dealias: false,
        }
    }
}

impl NlsProblem {
    pub fn validate(&self) -> Result<()> {
        if !self.m.is_power_of_two() || self.m < 2 {
            return Err(Error::InvalidConfig(format!("M = {} is not a power of two", self.m)));
        }
        if !(self.length > 0.0) || !(self.t_final > 0.0) {
            return Err(Error::InvalidConfig("domain length and final time must be positive".into()));
        }
        Ok(())
    }

    /// Signed wavenumber index of each coefficient, in DFT order.
    pub fn mode_indices(&self) -> Vec<i64> {
        let m = self.m as i64;
        (0..m).map(|j| if j < m / 2 { j } else { j - m }).collect()
    }

    /// `k_j = j·2π/L` in DFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let dk = 2.0 * PI / self.length;
        self.mode_indices().into_iter().map(|j| j as f64 * dk).collect()
    }

    /// Symbol of the implicit operator, `ℓ_j = −i·k_j²`.
    pub fn linear_symbol(&self) -> Vec<Complex64> {
        self.wavenumbers()
            .into_iter()
            .map(|k| Complex64::new(0.0, -k * k))
            .collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.length / self.m as f64;
        (0..self.m).map(|j| -self.length / 2.0 + j as f64 * dx).collect()
    }

    pub fn transform(&self) -> SpectralTransform {
        SpectralTransform::new(self.m)
    }

    /// `u(x, 0) = 1 + exp(i·x/4)/100`, a perturbed plane wave.
    pub fn initial_state(&self) -> SpectralState {
        let u: Vec<Complex64> = self
            .grid()
            .into_iter()
            .map(|x| Complex64::new(1.0, 0.0) + Complex64::from_polar(0.01, x / 4.0))
            .collect();
        self.state_from_physical(&u, 0.0)
    }

    pub fn state_from_physical(&self, u: &[Complex64], t: f64) -> SpectralState {
        SpectralState {
            uhat: self.transform().to_spectral(u),
            m: self.m,
            length: self.length,
            t,
        }
    }
}

/// Normalized Fourier coefficients of the solution, in DFT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    pub uhat: Vec<Complex64>,
    pub m: usize,
    pub length: f64,
    pub t: f64,
}

impl SpectralState {
    pub fn physical(&self) -> Vec<Complex64> {
        SpectralTransform::new(self.m).to_physical(&self.uhat)
    }
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖u_ref − u‖∞ / ‖u_ref‖∞` in physical space.
pub fn relative_error(a: &SpectralState, reference: &SpectralState) -> f64 {
    assert_eq!(a.m, reference.m, "grid sizes differ");
    let tr = SpectralTransform::new(a.m);
    let diff: Vec<Complex64> = reference
        .uhat
        .iter()
        .zip(&a.uhat)
        .map(|(r, v)| r - v)
        .collect();
    let num = sup_norm(&tr.to_physical(&diff));
    let den = sup_norm(&tr.to_physical(&reference.uhat));
    num / den
}

/// Relative change between two consecutive Parareal sweeps over the interval
/// endpoints of a block, measured in physical space:
/// `max_n ‖y_n^k − y_n^{k−1}‖∞ / max_n ‖y_n^k‖∞`.
///
/// Without a previous sweep (k = 0) the residual is `+∞`.
pub fn residual(
    transform: &SpectralTransform,
    current: &[Vec<Complex64>],
    previous: Option<&[Vec<Complex64>]>,
) -> f64 {
    let Some(previous) = previous else {
        return f64::INFINITY;
    };
    assert_eq!(current.len(), previous.len());
    let mut scratch = transform.scratch();
    let mut buf = vec![Complex64::new(0.0, 0.0); transform.len()];
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (cur, prev) in current.iter().zip(previous) {
        buf.iter_mut()
            .zip(cur.iter().zip(prev))
            .for_each(|(b, (c, p))| *b = c - p);
        transform.to_physical_inplace(&mut buf, &mut scratch);
        num = num.max(sup_norm(&buf));
        buf.copy_from_slice(cur);
        transform.to_physical_inplace(&mut buf, &mut scratch);
        den = den.max(sup_norm(&buf));
    }
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}
