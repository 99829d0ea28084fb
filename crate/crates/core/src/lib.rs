//! Linear stability and convergence analysis of Parareal with IMEX
//! Runge-Kutta coarse and fine integrators on the partitioned Dahlquist
//! problem `y' = i·λ1·y + i·λ2·y`, where `λ1` is integrated implicitly and
//! `λ2` explicitly.
//!
//! The crate provides
//! - the built-in IMEX-RK schemes and user tableau import ([`tableaux`]),
//! - single-step amplification factors ([`dahlquist`]),
//! - the Parareal iteration matrix, its norms and amplification ([`parareal_matrix`]),
//! - stability, convergence and accuracy maps over a `(z1, z2)` grid ([`regions`]),
//! - the speedup and efficiency model ([`cost`]),
//! - a pseudospectral nonlinear Schrödinger testbed with serial and Parareal drivers ([`pde`]),
//! - CSV, JSON and binary output formats ([`artifacts`]).

pub mod artifacts;
pub mod cost;
pub mod dahlquist;
pub mod error;
pub mod parareal_matrix;
pub mod pde;
pub mod regions;
pub mod tableaux;

pub use num_complex::Complex64;

pub use cost::{CostModel, SpeedupRow};
pub use dahlquist::{rk_amp, DahlquistPoint, PropagatorFactors};
pub use error::{Error, Result};
pub use parareal_matrix::{parareal_amp, IterationMatrices, PararealAmplification};
pub use pde::{
    IterationPolicy, NlsProblem, PararealRunConfig, RunStats, SpectralState,
};
pub use regions::{MethodPairSpec, RegionCell, RegionClass, RegionGrid, Window};
pub use tableaux::{builtin_tableau, ImexTableau, MethodId};
