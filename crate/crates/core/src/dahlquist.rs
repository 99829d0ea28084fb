//! Amplification factors on the non-diffusive partitioned Dahlquist problem
//! `y' = i·λ1·y + i·λ2·y`, with the `λ1` term implicit and `λ2` explicit.

use num_complex::{Complex, Complex64};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableaux::ImexTableau;

/// Scaled frequencies `z1 = h·λ1` (implicit) and `z2 = h·λ2` (explicit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DahlquistPoint {
    pub z1: f64,
    pub z2: f64,
}

impl DahlquistPoint {
    pub const ORIGIN: DahlquistPoint = DahlquistPoint { z1: 0.0, z2: 0.0 };

    pub fn new(z1: f64, z2: f64) -> Self {
        Self { z1, z2 }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            z1: self.z1 * factor,
            z2: self.z2 * factor,
        }
    }
}

/// Fine and coarse propagator amplifications over one processor interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorFactors {
    /// `R_f(iz1, iz2)^Nf`
    pub fine: Complex64,
    /// `R_c(iz1', iz2')^Ng` with the coarse step covering the same interval.
    pub coarse: Complex64,
    pub nf: usize,
    pub ng: usize,
}

impl PropagatorFactors {
    /// Factors given directly, e.g. for testing the matrix algebra on
    /// arbitrary complex pairs.
    pub fn from_values(fine: Complex64, coarse: Complex64) -> Self {
        Self {
            fine,
            coarse,
            nf: 1,
            ng: 1,
        }
    }
}

/// One-step amplification `R(iz1, iz2)`, obtained by running a single step of
/// the scheme on `y0 = 1`.
pub fn rk_amp(t: &ImexTableau, p: DahlquistPoint) -> Result<Complex64> {
    rk_amp_in(t, p.z1, p.z2)
}

/// [`rk_amp`] in any floating-point type. Tableau coefficients are converted
/// from `f64`.
pub fn rk_amp_in<T: Float>(t: &ImexTableau, z1: T, z2: T) -> Result<Complex<T>> {
    let zero = T::zero();
    let one = Complex::new(T::one(), zero);
    let iz1 = Complex::new(zero, z1);
    let iz2 = Complex::new(zero, z2);
    let c = |v: f64| T::from(v).expect("tableau coefficient representable");

    let mut stages: Vec<Complex<T>> = Vec::with_capacity(t.s);
    for j in 0..t.s {
        let mut r = one;
        for (k, y) in stages.iter().enumerate() {
            let ae = t.a_exp[j][k];
            let ai = t.a_imp[j][k];
            if ae != 0.0 {
                r = r + iz2 * *y * c(ae);
            }
            if ai != 0.0 {
                r = r + iz1 * *y * c(ai);
            }
        }
        let denom = one - iz1 * c(t.a_imp[j][j]);
        if denom.re == zero && denom.im == zero {
            return Err(Error::SingularStageSolve { stage: j });
        }
        stages.push(r / denom);
    }

    let mut y = one;
    for (j, stage) in stages.iter().enumerate() {
        if t.b_exp[j] != 0.0 {
            y = y + iz2 * *stage * c(t.b_exp[j]);
        }
        if t.b_imp[j] != 0.0 {
            y = y + iz1 * *stage * c(t.b_imp[j]);
        }
    }
    Ok(y)
}

/// Fine and coarse propagator factors for one processor interval.
///
/// `p` is the per-fine-step point. The fine propagator takes `nf` steps at
/// `p`; the coarse propagator covers the same interval with `ng` steps, each
/// `nf/ng` times longer.
pub fn propagator_factors(
    coarse: &ImexTableau,
    fine: &ImexTableau,
    nf: usize,
    ng: usize,
    p: DahlquistPoint,
) -> Result<PropagatorFactors> {
    if nf == 0 || ng == 0 {
        return Err(Error::InvalidConfig("Nf and Ng must be at least 1".into()));
    }
    let f = rk_amp(fine, p)?;
    let g = rk_amp(coarse, p.scaled(nf as f64 / ng as f64))?;
    Ok(PropagatorFactors {
        fine: powi(f, nf),
        coarse: powi(g, ng),
        nf,
        ng,
    })
}

pub(crate) fn powi(z: Complex64, n: usize) -> Complex64 {
    z.powu(n as u32)
}
