//! Communication-free cost, speedup and efficiency model for multi-block
//! Parareal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableaux::ImexTableau;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Cost of one fine-method step.
    pub cf: f64,
    /// Cost of one coarse-method step.
    pub cg: f64,
    /// Total number of fine steps, `Np·Nf·Nb`.
    pub ns: usize,
    pub np: usize,
    pub nf: usize,
    pub ng: usize,
    pub nb: usize,
    /// Mean iteration count over the blocks.
    pub kbar: f64,
}

impl CostModel {
    /// Model with per-step costs equal to the number of implicit stage solves
    /// of each method.
    pub fn with_stage_costs(
        coarse: &ImexTableau,
        fine: &ImexTableau,
        np: usize,
        nf: usize,
        ng: usize,
        nb: usize,
        kbar: f64,
    ) -> Result<Self> {
        let m = Self {
            cf: fine.implicit_solves() as f64,
            cg: coarse.implicit_solves() as f64,
            ns: np * nf * nb,
            np,
            nf,
            ng,
            nb,
            kbar,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.np == 0 || self.nf == 0 || self.ng == 0 || self.nb == 0 {
            return bad("Np, Nf, Ng and Nb must be at least 1".into());
        }
        if self.ns != self.np * self.nf * self.nb {
            return bad(format!(
                "Ns = {} differs from Np·Nf·Nb = {}",
                self.ns,
                self.np * self.nf * self.nb
            ));
        }
        // Zero coarse cost is allowed as the free-coarse limit.
        if !(self.cf > 0.0) || !(self.cg >= 0.0) {
            return bad("step costs must be positive".into());
        }
        if !(0.0..=self.np as f64).contains(&self.kbar) {
            return bad(format!("mean iteration count {} outside [0, Np]", self.kbar));
        }
        Ok(())
    }

    /// `C_F = Nf·cf`
    pub fn fine_cost(&self) -> f64 {
        self.nf as f64 * self.cf
    }

    /// `C_G = Ng·cg`
    pub fn coarse_cost(&self) -> f64 {
        self.ng as f64 * self.cg
    }

    /// `α = C_G / C_F`
    pub fn alpha(&self) -> f64 {
        self.coarse_cost() / self.fine_cost()
    }
}

pub fn serial_cost(m: &CostModel) -> f64 {
    m.ns as f64 * m.cf
}

/// Cost of `k` iterations on one block: predictor plus `k` correction sweeps.
pub fn block_cost(m: &CostModel, k: usize) -> f64 {
    m.np as f64 * m.coarse_cost() + k as f64 * (m.fine_cost() + m.coarse_cost())
}

/// Total Parareal cost summed over the blocks, using the mean iteration count.
pub fn parareal_cost(m: &CostModel) -> f64 {
    m.nb as f64 * (m.np as f64 * m.coarse_cost() + m.kbar * (m.fine_cost() + m.coarse_cost()))
}

fn speedup_for(np: f64, alpha: f64, k: f64) -> Result<f64> {
    let denom = np * alpha + k * (1.0 + alpha);
    if denom == 0.0 {
        return Err(Error::DegenerateCostModel);
    }
    Ok(np / denom)
}

/// `S = Np / (Np·α + K̄·(1 + α))`
pub fn speedup(m: &CostModel) -> Result<f64> {
    speedup_for(m.np as f64, m.alpha(), m.kbar)
}

/// `E = S / Np`
pub fn efficiency(m: &CostModel) -> Result<f64> {
    Ok(speedup(m)? / m.np as f64)
}

/// Overall speedup as the harmonic mean of per-block speedups `S_i`, one per
/// entry of `block_iterations`.
pub fn harmonic_speedup(m: &CostModel, block_iterations: &[usize]) -> Result<f64> {
    if block_iterations.is_empty() {
        return Err(Error::InvalidConfig("no block iteration counts".into()));
    }
    let mut inv_sum = 0.0;
    for &k in block_iterations {
        inv_sum += 1.0 / speedup_for(m.np as f64, m.alpha(), k as f64)?;
    }
    Ok(block_iterations.len() as f64 / inv_sum)
}

/// One line of a theoretical speedup table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub ns: usize,
    pub speedup: f64,
    pub efficiency: f64,
}

/// Theoretical speedup for each total step count; the number of blocks is
/// `Ns / (Np·Nf)`.
pub fn speedup_table(base: &CostModel, ns_values: &[usize]) -> Result<Vec<SpeedupRow>> {
    let nt = base.np * base.nf;
    ns_values
        .iter()
        .map(|&ns| {
            if ns == 0 || ns % nt != 0 {
                return Err(Error::InvalidConfig(format!(
                    "Ns = {ns} is not a positive multiple of NT = {nt}"
                )));
            }
            let m = CostModel {
                ns,
                nb: ns / nt,
                ..*base
            };
            m.validate()?;
            Ok(SpeedupRow {
                ns,
                speedup: speedup(&m)?,
                efficiency: efficiency(&m)?,
            })
        })
        .collect()
}
