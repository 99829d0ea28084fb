//! Parareal on one block of the scalar Dahlquist problem, written as a
//! fixed-point iteration `M_G y^{k+1} = (M_G − M_F) y^k + b`.
//!
//! `M_F` and `M_G` are `(Np+1)×(Np+1)` unit lower-bidiagonal matrices with
//! subdiagonals `−F` and `−G`. The error propagates as `e^k = E e^{k−1}` with
//! `E = I − M_G⁻¹ M_F`, which is strictly lower triangular, Toeplitz, and
//! therefore nilpotent.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dahlquist::{powi, PropagatorFactors};
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Guard band around `|G| = 1` inside which the closed-form norm switches to
/// its limit `Np·|G − F|`.
pub const UNIT_MODULUS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationMatrices {
    pub np: usize,
    pub mf: DMatrix<Complex64>,
    pub mg: DMatrix<Complex64>,
    pub e: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PararealAmplification {
    pub r: Complex64,
    pub k: usize,
    pub factors: PropagatorFactors,
}

/// Solve `A(−g) x = rhs` in place, `A(−g)` unit lower-bidiagonal with
/// subdiagonal `−g`.
fn forward_solve(g: Complex64, x: &mut [Complex64]) {
    for i in 1..x.len() {
        let prev = x[i - 1];
        x[i] += g * prev;
    }
}

/// `w ↦ E·w` in O(Np): `E = M_G⁻¹ (M_G − M_F)` and `M_G − M_F` only has the
/// subdiagonal `F − G`.
fn apply_e(f: &PropagatorFactors, w: &[Complex64], out: &mut Vec<Complex64>) {
    let diff = f.fine - f.coarse;
    out.clear();
    out.push(ZERO);
    out.extend(w[..w.len() - 1].iter().map(|&v| diff * v));
    forward_solve(f.coarse, out);
}

fn check_np(np: usize) -> Result<()> {
    if np == 0 {
        return Err(Error::InvalidConfig("Np must be at least 1".into()));
    }
    // powu takes a u32 exponent
    if np > u32::MAX as usize {
        return Err(Error::InvalidConfig(format!("Np = {np} too large")));
    }
    Ok(())
}

fn bidiagonal(n: usize, sub: Complex64) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ONE
        } else if i == j + 1 {
            -sub
        } else {
            ZERO
        }
    })
}

pub fn build_matrices(f: &PropagatorFactors, np: usize) -> Result<IterationMatrices> {
    check_np(np)?;
    let n = np + 1;
    let mf = bidiagonal(n, f.fine);
    let mg = bidiagonal(n, f.coarse);

    let mut e = DMatrix::from_element(n, n, ZERO);
    let mut col = vec![ZERO; n];
    for j in 0..np {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[j + 1] = f.fine - f.coarse;
        forward_solve(f.coarse, &mut col[j + 1..]);
        e.column_mut(j).copy_from_slice(&col);
    }
    Ok(IterationMatrices { np, mf, mg, e })
}

/// Block stability function after `k` iterations,
/// `R = c2 · (Σ_{j=0..k} E^j) · M_G⁻¹ · c1`.
pub fn parareal_amp(f: &PropagatorFactors, np: usize, k: usize) -> Result<PararealAmplification> {
    check_np(np)?;
    if k > np {
        return Err(Error::IterationsExceedProcessors { k, np });
    }
    // M_G⁻¹ c1 is the serial coarse predictor [1, G, G², …, G^Np].
    let mut term = vec![ZERO; np + 1];
    term[0] = ONE;
    forward_solve(f.coarse, &mut term);

    let mut acc = term[np];
    let mut next = Vec::with_capacity(np + 1);
    for _ in 0..k {
        apply_e(f, &term, &mut next);
        std::mem::swap(&mut term, &mut next);
        acc += term[np];
    }
    Ok(PararealAmplification {
        r: acc,
        k,
        factors: *f,
    })
}

/// The literal scalar recursion `y_{n+1}^{k+1} = F y_n^k + G y_n^{k+1} − G y_n^k`
/// started from the serial coarse predictor.
pub fn parareal_amp_recursive(f: &PropagatorFactors, np: usize, k: usize) -> Result<Complex64> {
    check_np(np)?;
    if k > np {
        return Err(Error::IterationsExceedProcessors { k, np });
    }
    let (fine, coarse) = (f.fine, f.coarse);
    let mut y: Vec<Complex64> = std::iter::successors(Some(ONE), |&v| Some(coarse * v))
        .take(np + 1)
        .collect();
    let mut next = vec![ZERO; np + 1];
    for _ in 0..k {
        next[0] = ONE;
        for n in 0..np {
            next[n + 1] = fine * y[n] + (coarse * next[n] - coarse * y[n]);
        }
        std::mem::swap(&mut y, &mut next);
    }
    Ok(y[np])
}

/// Exact `‖E‖∞ = (1 − |G|^Np)/(1 − |G|) · |G − F|`.
pub fn e_norm_inf_closed(f: &PropagatorFactors, np: usize) -> f64 {
    geometric_sum(f.coarse.norm(), np) * (f.coarse - f.fine).norm()
}

/// `Σ_{j=0}^{n−1} g^j` for `g ≥ 0`, accurate near `g = 1`.
pub(crate) fn geometric_sum(g: f64, n: usize) -> f64 {
    let d = g - 1.0;
    if d.abs() < UNIT_MODULUS_GUARD {
        return n as f64;
    }
    // (g^n − 1)/(g − 1) with g^n − 1 = expm1(n·ln(1 + d)); avoids the
    // cancellation in 1 − g^n when g is close to one.
    (n as f64 * d.ln_1p()).exp_m1() / d
}

/// Largest singular value of `E` from the power sequence `v, Bv, B²v, …` of
/// `B = EᴴE`.
///
/// The estimate is the largest Rayleigh-Ritz value on the Krylov space spanned
/// by the power iterates (Lanczos with full reorthogonalization), which
/// converges where plain power iteration crawls because the top two singular
/// values are close. Each sweep applies `B` once. Iteration stops when the
/// Ritz residual bound, relative to the estimate of `σ²`, drops below `tol`,
/// or when the Krylov space becomes invariant.
pub fn e_norm_two(m: &IterationMatrices, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    if m.e.iter().all(|z| *z == ZERO) {
        return Ok(0.0);
    }
    let n = m.e.nrows();
    let max_sweeps = 10 * n;
    let eh = m.e.adjoint();
    let apply = |v: &DVector<Complex64>| &eh * (&m.e * v);

    // Deterministic start vector with no special alignment to E's structure.
    let mut v = DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + 0.37 * i as f64, 0.21 * ((i * 7) % 5) as f64)
    });
    v /= Complex64::from(v.norm());

    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut alpha: Vec<f64> = Vec::with_capacity(n);
    let mut beta: Vec<f64> = Vec::with_capacity(n);
    for _ in 0..max_sweeps {
        let mut w = apply(&v);
        let a = v.dotc(&w).re;
        basis.push(v.clone());
        alpha.push(a);
        // full reorthogonalization against every previous Lanczos vector
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let b = w.norm();

        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
            0 => alpha[i],
            1 => beta[i.min(j)],
            _ => 0.0,
        });
        let eig = nalgebra::SymmetricEigen::new(t);
        let (top, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .expect("nonempty tridiagonal");
        let residual = b * eig.eigenvectors[(k - 1, top)].abs();
        if theta > 0.0 && (residual <= tol * theta || b <= f64::EPSILON * theta) {
            return Ok(theta.sqrt());
        }
        if b == 0.0 || k == n {
            return Ok(theta.max(0.0).sqrt());
        }
        beta.push(b);
        v = w / Complex64::from(b);
    }
    Err(Error::PowerIterationStalled { sweeps: max_sweeps })
}

/// Maximum deviations found when checking the bidiagonal Toeplitz identities
/// numerically for `A(γ)` of size `(n+1)×(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub n: usize,
    /// `max |A⁻¹(γ)_{ij} − (−γ)^{i−j}|`
    pub inverse_dev: f64,
    /// `max |(A(ω)A⁻¹(γ))_{ij} − closed form|`
    pub product_dev: f64,
    /// `|‖I − A(ω)A⁻¹(γ)‖∞ − closed form| / max(1, closed form)`
    pub norm_dev: f64,
    pub norm_numeric: f64,
    pub norm_closed: f64,
}

impl LemmaReport {
    pub fn max_deviation(&self) -> f64 {
        self.inverse_dev.max(self.product_dev).max(self.norm_dev)
    }
}

/// `A(γ)`: unit lower-bidiagonal with subdiagonal `γ`.
pub fn toeplitz_bidiagonal(gamma: Complex64, n: usize) -> DMatrix<Complex64> {
    bidiagonal(n, -gamma)
}

/// Inverse of `A(γ)` by column-wise forward substitution.
pub fn toeplitz_bidiagonal_inverse(gamma: Complex64, n: usize) -> DMatrix<Complex64> {
    let mut inv = DMatrix::from_element(n, n, ZERO);
    let mut col = vec![ZERO; n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[j] = ONE;
        forward_solve(-gamma, &mut col[j..]);
        inv.column_mut(j).copy_from_slice(&col);
    }
    inv
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn max_column_sum(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn appendix_lemma_oracle(gamma: Complex64, omega: Complex64, n: usize) -> Result<LemmaReport> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidConfig(format!("lemma oracle needs 1 ≤ n ≤ 64, got {n}")));
    }
    let dim = n + 1;
    let inv = toeplitz_bidiagonal_inverse(gamma, dim);
    let neg = -gamma;

    let mut inverse_dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let expected = if j <= i { powi(neg, i - j) } else { ZERO };
            inverse_dev = inverse_dev.max((inv[(i, j)] - expected).norm());
        }
    }

    let product = toeplitz_bidiagonal(omega, dim) * &inv;
    let mut product_dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let expected = match i.cmp(&j) {
                std::cmp::Ordering::Less => ZERO,
                std::cmp::Ordering::Equal => ONE,
                std::cmp::Ordering::Greater => powi(neg, i - j - 1) * (omega - gamma),
            };
            product_dev = product_dev.max((product[(i, j)] - expected).norm());
        }
    }

    let m = DMatrix::identity(dim, dim) - product;
    let norm_numeric = inf_norm(&m);
    let norm_closed = geometric_sum(gamma.norm(), n) * (gamma - omega).norm();
    let norm_dev = (norm_numeric - norm_closed).abs() / norm_closed.max(1.0);

    Ok(LemmaReport {
        n,
        inverse_dev,
        product_dev,
        norm_dev,
        norm_numeric,
        norm_closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn equal_factors_give_zero_iteration_matrix() {
        let f = PropagatorFactors::from_values(c(0.3, 0.9), c(0.3, 0.9));
        let m = build_matrices(&f, 6).unwrap();
        assert!(m.e.iter().all(|z| *z == ZERO));
        assert_eq!(e_norm_inf_closed(&f, 6), 0.0);
        assert_eq!(e_norm_two(&m, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn single_processor_matrix() {
        let (fine, coarse) = (c(0.8, 0.1), c(0.5, -0.6));
        let f = PropagatorFactors::from_values(fine, coarse);
        let m = build_matrices(&f, 1).unwrap();
        // E = I − M_G⁻¹ M_F = [[0, 0], [F − G, 0]]
        assert_eq!(m.e[(0, 0)], ZERO);
        assert_eq!(m.e[(0, 1)], ZERO);
        assert_eq!(m.e[(1, 1)], ZERO);
        assert!((m.e[(1, 0)] - (fine - coarse)).norm() < 1e-15);
        let brute = DMatrix::identity(2, 2) - m.mg.clone().try_inverse().unwrap() * &m.mf;
        assert!((brute - &m.e).iter().all(|z| z.norm() < 1e-15));
        let s = e_norm_two(&m, 1e-12).unwrap();
        assert!((s - (coarse - fine).norm()).abs() < 1e-12);
    }

    #[test]
    fn nilpotent() {
        let f = PropagatorFactors::from_values(c(0.9, 0.5), c(1.1, -0.2));
        let m = build_matrices(&f, 8).unwrap();
        let pow = (0..8).fold(m.e.clone(), |acc, _| &acc * &m.e);
        let scale = inf_norm(&m.e).max(1.0).powi(9);
        assert!(pow.iter().all(|z| z.norm() < 1e-10 * scale));
    }

    #[test]
    fn degenerate_iteration_counts() {
        let f = PropagatorFactors::from_values(c(0.95, 0.2), c(0.7, 0.4));
        let np = 12;
        let k0 = parareal_amp(&f, np, 0).unwrap().r;
        assert!((k0 - f.coarse.powu(np as u32)).norm() < 1e-14);
        let kn = parareal_amp(&f, np, np).unwrap().r;
        assert!((kn - f.fine.powu(np as u32)).norm() < 1e-12);
        assert!(matches!(
            parareal_amp(&f, np, np + 1),
            Err(Error::IterationsExceedProcessors { .. })
        ));
        assert!(parareal_amp_recursive(&f, np, np + 1).is_err());
    }

    #[test]
    fn unit_modulus_coarse_limit() {
        let g = Complex64::from_polar(1.0, 0.7);
        let f = PropagatorFactors::from_values(c(0.2, 0.3), g);
        let norm = e_norm_inf_closed(&f, 17);
        assert!((norm - 17.0 * (g - f.fine).norm()).abs() < 1e-12);
    }

    #[test]
    fn geometric_sum_near_one_is_smooth() {
        for &d in &[1e-3, 1e-7, 1e-11, -1e-9] {
            let g: f64 = 1.0 + d;
            let direct: f64 = (0..40).map(|j| g.powi(j)).sum();
            assert!((geometric_sum(g, 40) - direct).abs() < 1e-12 * direct);
        }
        assert_eq!(geometric_sum(0.0, 5), 1.0);
    }

    #[test]
    fn lemma_trivial_cases() {
        let w = c(0.4, -0.3);
        let r = appendix_lemma_oracle(w, w, 10).unwrap();
        assert_eq!(r.norm_closed, 0.0);
        assert!(r.max_deviation() < 1e-15);

        let r = appendix_lemma_oracle(ZERO, w, 10).unwrap();
        assert!((r.norm_numeric - w.norm()).abs() < 1e-15);
        assert!(r.max_deviation() < 1e-15);
        assert!(appendix_lemma_oracle(w, w, 65).is_err());
    }
}
