use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stepper::Propagator;
use super::{residual, NlsProblem, SpectralState};
use crate::error::{Error, Result};
use crate::tableaux::ImexTableau;

/// How many correction sweeps each block receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationPolicy {
    Fixed(usize),
    /// Iterate until the sweep residual drops to `tol` or `kmax` sweeps are done.
    Adaptive { tol: f64, kmax: usize },
}

impl IterationPolicy {
    pub fn max_iterations(&self) -> usize {
        match *self {
            IterationPolicy::Fixed(k) => k,
            IterationPolicy::Adaptive { kmax, .. } => kmax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PararealRunConfig {
    pub coarse: ImexTableau,
    pub fine: ImexTableau,
    pub np: usize,
    pub nf: usize,
    pub ng: usize,
    pub nb: usize,
    pub policy: IterationPolicy,
}

impl PararealRunConfig {
    pub fn ns(&self) -> usize {
        self.np * self.nf * self.nb
    }

    pub fn nt(&self) -> usize {
        self.np * self.nf
    }

    /// Fine step `Δt = t_final / Ns`.
    pub fn dt(&self, problem: &NlsProblem) -> f64 {
        problem.t_final / self.ns() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.np == 0 || self.nf == 0 || self.ng == 0 || self.nb == 0 {
            return Err(Error::InvalidConfig("Np, Nf, Ng and Nb must be at least 1".into()));
        }
        let kmax = self.policy.max_iterations();
        if kmax > self.np {
            return Err(Error::IterationsExceedProcessors { k: kmax, np: self.np });
        }
        if let IterationPolicy::Adaptive { tol, .. } = self.policy {
            if !(tol >= 0.0) {
                return Err(Error::InvalidConfig(format!("residual tolerance {tol} must be non-negative")));
            }
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

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    /// Iterations performed on each block, `K_i`.
    pub block_iterations: Vec<usize>,
    /// Residual after each sweep, per block.
    pub residuals: Vec<Vec<f64>>,
}

impl RunStats {
    /// Mean iteration count `K̄`.
    pub fn kbar(&self) -> f64 {
        if self.block_iterations.is_empty() {
            return 0.0;
        }
        self.block_iterations.iter().sum::<usize>() as f64 / self.block_iterations.len() as f64
    }
}

/// Parareal over `[0, t_final]` from the problem's initial condition.
pub fn parareal_integrate(cfg: &PararealRunConfig, problem: &NlsProblem) -> Result<(SpectralState, RunStats)> {
    problem.validate()?;
    parareal_integrate_from(cfg, problem, &problem.initial_state())
}

/// Parareal from an arbitrary state over `Nb` blocks of `Np` intervals, each
/// interval being `Nf` fine steps of size `t_final/Ns`.
///
/// Blocks run one after another, each starting from the corrected end state of
/// the previous one. Within a sweep the `Np` fine propagations run in
/// parallel on independent copies, so results do not depend on the thread
/// count.
pub fn parareal_integrate_from(
    cfg: &PararealRunConfig,
    problem: &NlsProblem,
    start: &SpectralState,
) -> Result<(SpectralState, RunStats)> {
    cfg.validate()?;
    if start.uhat.len() != problem.m {
        return Err(Error::InvalidConfig(format!(
            "state has {} coefficients, problem has M = {}",
            start.uhat.len(),
            problem.m
        )));
    }
    let dt = cfg.dt(problem);
    let fine = Propagator::new(&cfg.fine, problem, dt);
    let coarse = Propagator::new(&cfg.coarse, problem, dt * cfg.nf as f64 / cfg.ng as f64);
    let transform = problem.transform();
    let mut ws = coarse.workspace();

    let mut stats = RunStats::default();
    let mut y0 = start.uhat.clone();
    for b in 0..cfg.nb {
        let step0 = b * cfg.np;
        let ctx = |k: usize| move |e: Error| e.with_context(format!("block {b}, iteration {k}"));

        // u[n] is the state at the start of interval n, u[np] the block end.
        let mut u = Vec::with_capacity(cfg.np + 1);
        let mut g_old = Vec::with_capacity(cfg.np);
        u.push(y0.clone());
        for n in 0..cfg.np {
            let mut y = u[n].clone();
            coarse.advance(&mut y, cfg.ng, &mut ws, (step0 + n) * cfg.ng).map_err(ctx(0))?;
            g_old.push(y.clone());
            u.push(y);
        }

        let mut history = Vec::new();
        let mut k = 0;
        while k < cfg.policy.max_iterations() {
            k += 1;
            let mut f: Vec<Vec<Complex64>> = u[..cfg.np].to_vec();
            f.par_iter_mut()
                .enumerate()
                .map_init(
                    || fine.workspace(),
                    |fws, (n, y)| fine.advance(y, cfg.nf, fws, (step0 + n) * cfg.nf),
                )
                .collect::<Result<()>>()
                .map_err(ctx(k))?;

            let mut next = Vec::with_capacity(cfg.np + 1);
            next.push(y0.clone());
            for n in 0..cfg.np {
                let mut g_new = next[n].clone();
                coarse.advance(&mut g_new, cfg.ng, &mut ws, (step0 + n) * cfg.ng).map_err(ctx(k))?;
                // F + (G_new − G_old): when G_new equals G_old bitwise the
                // correction vanishes exactly and the fine value is kept.
                let y: Vec<Complex64> = f[n]
                    .iter()
                    .zip(g_new.iter().zip(&g_old[n]))
                    .map(|(fv, (gn, go))| fv + (gn - go))
                    .collect();
                g_old[n] = g_new;
                next.push(y);
            }
            let r = residual(&transform, &next[1..], Some(&u[1..]));
            history.push(r);
            u = next;
            if let IterationPolicy::Adaptive { tol, .. } = cfg.policy {
                if r <= tol {
                    break;
                }
            }
        }
        stats.block_iterations.push(k);
        stats.residuals.push(history);
        y0 = u.pop().expect("block has at least one interval");
    }

    let state = SpectralState {
        uhat: y0,
        m: problem.m,
        length: problem.length,
        t: start.t + cfg.ns() as f64 * dt,
    };
    Ok((state, stats))
}
