//! Stability, convergence and accuracy maps over the `(z1, z2)` plane.
//!
//! Parareal grids use the block-scaled stability function
//! `R̂(iz1, iz2) = R(i·NT·z1, i·NT·z2)`: `(z1, z2)` is the point seen by one
//! fine step, and the whole block spans `NT = Np·Nf` of them.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dahlquist::{powi, propagator_factors, rk_amp, DahlquistPoint};
use crate::error::{Error, Result};
use crate::parareal_matrix::{e_norm_inf_closed, parareal_amp};
use crate::tableaux::ImexTableau;

/// Payload values above this (or non-finite) are stored as this value.
pub const OVERFLOW_CLAMP: f64 = 1e12;

/// Overlay classification of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionClass {
    /// Contractive iteration, unstable one-step method.
    #[serde(rename = "CONV_UNSTABLE")]
    ConvUnstable,
    /// Contractive iteration, stable one-step method.
    #[serde(rename = "CONV_STABLE")]
    ConvStable,
    /// Non-contractive iteration, stable one-step method.
    #[serde(rename = "NOCONV_STABLE")]
    NoConvStable,
    #[serde(rename = "NOCONV_UNSTABLE")]
    NoConvUnstable,
}

impl RegionClass {
    pub fn classify(abs_r: f64, norm_e_inf: f64) -> Self {
        match (abs_r <= 1.0, norm_e_inf < 1.0) {
            (true, true) => RegionClass::ConvStable,
            (false, true) => RegionClass::ConvUnstable,
            (true, false) => RegionClass::NoConvStable,
            (false, false) => RegionClass::NoConvUnstable,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            RegionClass::ConvUnstable => "CONV_UNSTABLE",
            RegionClass::ConvStable => "CONV_STABLE",
            RegionClass::NoConvStable => "NOCONV_STABLE",
            RegionClass::NoConvUnstable => "NOCONV_UNSTABLE",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, RegionClass::ConvStable | RegionClass::NoConvStable)
    }

    pub fn is_contractive(self) -> bool {
        matches!(self, RegionClass::ConvStable | RegionClass::ConvUnstable)
    }
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub z1: f64,
    pub z2: f64,
    pub abs_r: f64,
    pub log10_abs_r: f64,
    pub norm_e_inf: f64,
    pub accuracy_err: f64,
    pub class: RegionClass,
}

impl RegionCell {
    fn new(z1: f64, z2: f64, r: Complex64, norm_e_inf: f64, exact: Complex64) -> Self {
        let abs_r = clamp(r.norm());
        let norm_e_inf = clamp(norm_e_inf);
        let accuracy_err = clamp((r - exact).norm());
        Self {
            z1,
            z2,
            abs_r,
            log10_abs_r: abs_r.max(f64::MIN_POSITIVE).log10(),
            norm_e_inf,
            accuracy_err,
            class: RegionClass::classify(abs_r, norm_e_inf),
        }
    }
}

fn clamp(v: f64) -> f64 {
    if v.is_finite() && v <= OVERFLOW_CLAMP {
        v
    } else {
        OVERFLOW_CLAMP
    }
}

/// Cells are stored with `z1` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub z1_axis: Vec<f64>,
    pub z2_axis: Vec<f64>,
    pub nt: usize,
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn cell(&self, i1: usize, i2: usize) -> &RegionCell {
        &self.cells[i2 * self.z1_axis.len() + i1]
    }

    pub fn count(&self, class: RegionClass) -> usize {
        self.cells.iter().filter(|c| c.class == class).count()
    }

    pub fn fraction(&self, class: RegionClass) -> f64 {
        self.count(class) as f64 / self.cells.len() as f64
    }
}

/// Coarse/fine pairing and block structure for a Parareal map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodPairSpec {
    pub coarse: ImexTableau,
    pub fine: ImexTableau,
    pub np: usize,
    pub nf: usize,
    pub ng: usize,
    pub k: usize,
}

impl MethodPairSpec {
    /// Build from a block size `NT` and `Nf`, with `Np = NT / Nf`.
    pub fn from_block_size(
        coarse: ImexTableau,
        fine: ImexTableau,
        nt: usize,
        nf: usize,
        ng: usize,
        k: usize,
    ) -> Result<Self> {
        if nf == 0 || nt % nf != 0 {
            return Err(Error::InvalidConfig(format!("NT = {nt} is not a multiple of Nf = {nf}")));
        }
        let spec = Self {
            coarse,
            fine,
            np: nt / nf,
            nf,
            ng,
            k,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn nt(&self) -> usize {
        self.np * self.nf
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.np == 0 || self.nf == 0 || self.ng == 0 {
            return Err(Error::InvalidConfig("Np, Nf and Ng must be at least 1".into()));
        }
        if self.k > self.np {
            return Err(Error::IterationsExceedProcessors { k: self.k, np: self.np });
        }
        for t in [&self.coarse, &self.fine] {
            let v = t.validate();
            if !v.is_empty() {
                return Err(Error::InvalidTableau {
                    id: t.id.clone(),
                    violations: v,
                });
            }
        }
        Ok(())
    }
}

/// Exact block propagator `exp(i·NT·(z1 + z2))`.
pub fn exact_block(nt: usize, z1: f64, z2: f64) -> Complex64 {
    Complex64::from_polar(1.0, nt as f64 * (z1 + z2))
}

pub fn scaled_parareal_amp(spec: &MethodPairSpec, z1: f64, z2: f64) -> Result<Complex64> {
    let f = propagator_factors(&spec.coarse, &spec.fine, spec.nf, spec.ng, DahlquistPoint::new(z1, z2))?;
    Ok(parareal_amp(&f, spec.np, spec.k)?.r)
}

fn cells_of<F>(z1_axis: &[f64], z2_axis: &[f64], eval: F) -> Result<Vec<RegionCell>>
where
    F: Fn(f64, f64) -> Result<RegionCell> + Sync,
{
    if z1_axis.is_empty() || z2_axis.is_empty() {
        return Err(Error::InvalidConfig("grid axes must be nonempty".into()));
    }
    let n1 = z1_axis.len();
    (0..n1 * z2_axis.len())
        .into_par_iter()
        .map(|idx| eval(z1_axis[idx % n1], z2_axis[idx / n1]))
        .collect()
}

/// Stability/convergence overlay for a Parareal configuration.
pub fn compute_grid(spec: &MethodPairSpec, z1_axis: &[f64], z2_axis: &[f64]) -> Result<RegionGrid> {
    spec.validate()?;
    let nt = spec.nt();
    let cells = cells_of(z1_axis, z2_axis, |z1, z2| {
        let f = propagator_factors(&spec.coarse, &spec.fine, spec.nf, spec.ng, DahlquistPoint::new(z1, z2))?;
        let r = parareal_amp(&f, spec.np, spec.k)?.r;
        Ok(RegionCell::new(z1, z2, r, e_norm_inf_closed(&f, spec.np), exact_block(nt, z1, z2)))
    })?;
    Ok(RegionGrid {
        z1_axis: z1_axis.to_vec(),
        z2_axis: z2_axis.to_vec(),
        nt,
        cells,
    })
}

/// One-step amplitude `|R(iz1, iz2)|` of a single IMEX-RK method. There is
/// no iteration, so `norm_e_inf` is zero and the class only reflects
/// stability.
pub fn imexrk_amplitude_grid(t: &ImexTableau, z1_axis: &[f64], z2_axis: &[f64]) -> Result<RegionGrid> {
    let cells = cells_of(z1_axis, z2_axis, |z1, z2| {
        let r = rk_amp(t, DahlquistPoint::new(z1, z2))?;
        Ok(RegionCell::new(z1, z2, r, 0.0, exact_block(1, z1, z2)))
    })?;
    Ok(RegionGrid {
        z1_axis: z1_axis.to_vec(),
        z2_axis: z2_axis.to_vec(),
        nt: 1,
        cells,
    })
}

/// Accuracy map `|R̂ − exp(i·NT·(z1+z2))|`. With `fine_only`, `R̂` is replaced
/// by `NT` serial fine steps (the fully converged Parareal limit).
pub fn accuracy_grid(
    spec: &MethodPairSpec,
    z1_axis: &[f64],
    z2_axis: &[f64],
    fine_only: bool,
) -> Result<RegionGrid> {
    spec.validate()?;
    let nt = spec.nt();
    let cells = cells_of(z1_axis, z2_axis, |z1, z2| {
        let p = DahlquistPoint::new(z1, z2);
        let f = propagator_factors(&spec.coarse, &spec.fine, spec.nf, spec.ng, p)?;
        let r = if fine_only {
            powi(rk_amp(&spec.fine, p)?, nt)
        } else {
            parareal_amp(&f, spec.np, spec.k)?.r
        };
        Ok(RegionCell::new(z1, z2, r, e_norm_inf_closed(&f, spec.np), exact_block(nt, z1, z2)))
    })?;
    Ok(RegionGrid {
        z1_axis: z1_axis.to_vec(),
        z2_axis: z2_axis.to_vec(),
        nt,
        cells,
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Inclusive axis limits for a map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub z1_min: f64,
    pub z1_max: f64,
    pub z2_min: f64,
    pub z2_max: f64,
}

impl Window {
    /// Near-origin window for a Parareal block of `nt` fine steps: the block
    /// sees `NT·z` up to about ±8 in each direction, with `z1 ≥ 0`.
    pub fn near_origin(nt: usize) -> Self {
        let span = 8.0 / nt as f64;
        Self {
            z1_min: 0.0,
            z1_max: span,
            z2_min: -span,
            z2_max: span,
        }
    }

    /// Default window for single-method amplitude surfaces.
    pub fn single_method() -> Self {
        Self {
            z1_min: 0.0,
            z1_max: 20.0,
            z2_min: -3.0,
            z2_max: 3.0,
        }
    }

    pub fn axes(&self, n1: usize, n2: usize) -> (Vec<f64>, Vec<f64>) {
        (
            linspace(self.z1_min, self.z1_max, n1),
            linspace(self.z2_min, self.z2_max, n2),
        )
    }
}

/// Default grid resolution per axis.
pub const DEFAULT_RESOLUTION: usize = 401;
