use num_complex::Complex64;

use super::{NlsProblem, SpectralState, SpectralTransform, BLOW_UP_THRESHOLD};
use crate::error::{Error, Result};
use crate::tableaux::ImexTableau;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One IMEX-RK scheme bound to a problem and a fixed step size, with the
/// implicit stage denominators `1/(1 − h·a^I_jj·ℓ)` precomputed.
#[derive(Debug, Clone)]
pub struct Propagator {
    tableau: ImexTableau,
    h: f64,
    ell: Vec<Complex64>,
    /// `None` for stages with a zero implicit diagonal.
    inv_denoms: Vec<Option<Vec<Complex64>>>,
    explicit_used: Vec<bool>,
    nonlinear_coeff: f64,
    dealias_mask: Option<Vec<bool>>,
    transform: SpectralTransform,
}

/// Per-thread scratch storage for [`Propagator::step`].
#[derive(Debug, Clone)]
pub struct Workspace {
    ly: Vec<Vec<Complex64>>,
    nl: Vec<Vec<Complex64>>,
    stage: Vec<Complex64>,
    fft_scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(tableau: &ImexTableau, problem: &NlsProblem, h: f64) -> Self {
        let ell = problem.linear_symbol();
        let inv_denoms = (0..tableau.s)
            .map(|j| {
                let a = tableau.a_imp[j][j];
                (a != 0.0).then(|| ell.iter().map(|&l| 1.0 / (1.0 - h * a * l)).collect())
            })
            .collect();
        let explicit_used = (0..tableau.s)
            .map(|j| problem.nonlinear_coeff != 0.0 && tableau.explicit_stage_used(j))
            .collect();
        let dealias_mask = problem.dealias.then(|| {
            let cut = problem.m as i64 / 3;
            problem.mode_indices().into_iter().map(|j| j.abs() <= cut).collect()
        });
        Self {
            tableau: tableau.clone(),
            h,
            ell,
            inv_denoms,
            explicit_used,
            nonlinear_coeff: problem.nonlinear_coeff,
            dealias_mask,
            transform: problem.transform(),
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn tableau(&self) -> &ImexTableau {
        &self.tableau
    }

    pub fn workspace(&self) -> Workspace {
        let m = self.ell.len();
        let s = self.tableau.s;
        Workspace {
            ly: vec![vec![ZERO; m]; s],
            nl: vec![vec![ZERO; m]; s],
            stage: vec![ZERO; m],
            fft_scratch: self.transform.scratch(),
        }
    }

    /// `N̂ = FFT(c·i·|u|²·u)/M` for the stage `y`, written to `out`.
    fn nonlinear(&self, y: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        out.copy_from_slice(y);
        self.transform.to_physical_inplace(out, scratch);
        let ic = Complex64::new(0.0, self.nonlinear_coeff);
        out.iter_mut().for_each(|u| *u = ic * u.norm_sqr() * *u);
        self.transform.to_spectral_inplace(out, scratch);
        if let Some(mask) = &self.dealias_mask {
            out.iter_mut().zip(mask).filter(|(_, &keep)| !keep).for_each(|(v, _)| *v = ZERO);
        }
    }

    /// Advance `y` by one step in place.
    pub fn step(&self, y: &mut [Complex64], ws: &mut Workspace) {
        let t = &self.tableau;
        let h = self.h;
        for j in 0..t.s {
            ws.stage.copy_from_slice(y);
            for k in 0..j {
                let (ae, ai) = (h * t.a_exp[j][k], h * t.a_imp[j][k]);
                if ae != 0.0 && self.explicit_used[k] {
                    ws.stage.iter_mut().zip(&ws.nl[k]).for_each(|(r, n)| *r += ae * n);
                }
                if ai != 0.0 {
                    ws.stage.iter_mut().zip(&ws.ly[k]).for_each(|(r, l)| *r += ai * l);
                }
            }
            if let Some(inv) = &self.inv_denoms[j] {
                ws.stage.iter_mut().zip(inv).for_each(|(r, d)| *r *= d);
            }
            ws.ly[j].iter_mut()
                .zip(ws.stage.iter().zip(&self.ell))
                .for_each(|(o, (v, l))| *o = v * l);
            if self.explicit_used[j] {
                self.nonlinear(&ws.stage, &mut ws.nl[j], &mut ws.fft_scratch);
            }
        }
        for j in 0..t.s {
            let (be, bi) = (h * t.b_exp[j], h * t.b_imp[j]);
            if be != 0.0 && self.explicit_used[j] {
                y.iter_mut().zip(&ws.nl[j]).for_each(|(v, n)| *v += be * n);
            }
            if bi != 0.0 {
                y.iter_mut().zip(&ws.ly[j]).for_each(|(v, l)| *v += bi * l);
            }
        }
    }

    /// Whether `‖u‖∞` exceeds the blow-up threshold or the state is not
    /// finite. The coefficient sum bounds `‖u‖∞` from above, so the physical
    /// transform is only needed when that bound is exceeded.
    pub fn diverged(&self, y: &[Complex64], ws: &mut Workspace) -> bool {
        let bound: f64 = y.iter().map(|z| z.norm()).sum();
        if bound.is_nan() {
            return true;
        }
        if bound <= BLOW_UP_THRESHOLD {
            return false;
        }
        ws.stage.copy_from_slice(y);
        self.transform.to_physical_inplace(&mut ws.stage, &mut ws.fft_scratch);
        ws.stage
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite() || z.norm() > BLOW_UP_THRESHOLD)
    }

    /// Take `n` steps, checking for blow-up after each. `first_step` offsets
    /// the step index reported in errors.
    pub fn advance(&self, y: &mut [Complex64], n: usize, ws: &mut Workspace, first_step: usize) -> Result<()> {
        for i in 0..n {
            self.step(y, ws);
            if self.diverged(y, ws) {
                return Err(Error::BlowUp {
                    step: first_step + i + 1,
                    context: None,
                });
            }
        }
        Ok(())
    }
}

/// One step of size `h` from `s`.
pub fn imex_step(t: &ImexTableau, problem: &NlsProblem, s: &SpectralState, h: f64) -> Result<SpectralState> {
    serial_integrate_from(t, problem, s, 1, h)
}

/// `ns` uniform steps from the problem's initial condition to `t_final`.
pub fn serial_integrate(t: &ImexTableau, problem: &NlsProblem, ns: usize) -> Result<SpectralState> {
    problem.validate()?;
    if ns == 0 {
        return Err(Error::InvalidConfig("Ns must be at least 1".into()));
    }
    let h = problem.t_final / ns as f64;
    serial_integrate_from(t, problem, &problem.initial_state(), ns, h)
}

/// `n` steps of size `h` from an arbitrary state.
pub fn serial_integrate_from(
    t: &ImexTableau,
    problem: &NlsProblem,
    start: &SpectralState,
    n: usize,
    h: f64,
) -> Result<SpectralState> {
    if start.uhat.len() != problem.m {
        return Err(Error::InvalidConfig(format!(
            "state has {} coefficients, problem has M = {}",
            start.uhat.len(),
            problem.m
        )));
    }
    let prop = Propagator::new(t, problem, h);
    let mut ws = prop.workspace();
    let mut y = start.uhat.clone();
    prop.advance(&mut y, n, &mut ws, 0)?;
    Ok(SpectralState {
        uhat: y,
        m: problem.m,
        length: problem.length,
        t: start.t + n as f64 * h,
    })
}
