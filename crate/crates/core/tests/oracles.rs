//! Independent brute-force oracles for the analysis engines.

use nalgebra::DMatrix;
use parareal_lab::dahlquist::{propagator_factors, rk_amp, DahlquistPoint, PropagatorFactors};
use parareal_lab::parareal_matrix::{build_matrices, e_norm_two, parareal_amp, parareal_amp_recursive};
use parareal_lab::tableaux::ImexTableau;
use parareal_lab::{Complex64, MethodId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Singular values by one-sided (Hestenes) Jacobi rotations on the columns.
fn jacobi_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut a = m.clone();
    let n = a.ncols();
    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = a.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = a.column(p).iter().zip(a.column(q).iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt());
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.nrows() {
                    let x = a[(i, p)];
                    let y = a[(i, q)] / phase;
                    a[(i, p)] = x * c - y * s;
                    a[(i, q)] = (x * s + y * c) * phase;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

#[test]
fn jacobi_oracle_on_known_matrix() {
    let m = DMatrix::from_row_slice(2, 2, &[
        Complex64::new(3.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(4.0, 0.0),
        Complex64::new(5.0, 0.0),
    ]);
    // singular values of [[3, 0], [4, 5]] are 3√5 and √5
    let sv = jacobi_singular_values(&m);
    assert!((sv[0] - 45f64.sqrt()).abs() < 1e-13);
    assert!((sv[1] - 5f64.sqrt()).abs() < 1e-13);
}

#[test]
fn two_norm_matches_jacobi_svd() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let np = r.gen_range(1..=8);
        let f = Complex64::from_polar(r.gen_range(0.0..1.5), r.gen_range(-3.2..3.2));
        let g = Complex64::from_polar(r.gen_range(0.0..1.5), r.gen_range(-3.2..3.2));
        let m = build_matrices(&PropagatorFactors::from_values(f, g), np).unwrap();
        let got = e_norm_two(&m, 1e-10).unwrap();
        let want = jacobi_singular_values(&m.e)[0];
        assert!((got - want).abs() <= 1e-8 * want.max(1.0), "Np={np}: {got} vs {want}");
    }
}

/// Step `y' = i·z1·y + i·z2·y` with the scheme, treating the two terms as
/// separate right-hand sides, starting from `y`.
fn scalar_steps(t: &ImexTableau, z1: f64, z2: f64, mut y: Complex64, m: usize) -> Complex64 {
    let i = Complex64::i();
    let fe = |v: Complex64| i * z2 * v;
    let fi = |v: Complex64| i * z1 * v;
    for _ in 0..m {
        let mut ke = Vec::with_capacity(t.s);
        let mut ki = Vec::with_capacity(t.s);
        for j in 0..t.s {
            let mut r = y;
            for k in 0..j {
                r += t.a_exp[j][k] * ke[k] + t.a_imp[j][k] * ki[k];
            }
            let yj = r / (1.0 - t.a_imp[j][j] * i * z1);
            ke.push(fe(yj));
            ki.push(fi(yj));
        }
        for j in 0..t.s {
            y += t.b_exp[j] * ke[j] + t.b_imp[j] * ki[j];
        }
    }
    y
}

#[test]
fn composition_matches_repeated_stepping() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    for id in MethodId::ALL {
        let t = id.tableau();
        for _ in 0..20 {
            let (z1, z2) = (r.gen_range(-3.0..3.0), r.gen_range(-0.5..0.5));
            let m = r.gen_range(1..=64);
            let composed = rk_amp(&t, DahlquistPoint::new(z1, z2)).unwrap().powu(m as u32);
            let stepped = scalar_steps(&t, z1, z2, Complex64::new(1.0, 0.0), m);
            assert!((composed - stepped).norm() <= 1e-12 * stepped.norm().max(1.0), "{id:?} m={m}");
        }
    }
}

#[test]
fn propagator_gap_matches_stepping_oracle() {
    let coarse = MethodId::ImexRk3.tableau();
    let fine = MethodId::ImexRk4.tableau();
    let (nf, ng) = (8, 1);
    let p = DahlquistPoint::new(0.037, -0.011);
    let fac = propagator_factors(&coarse, &fine, nf, ng, p).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let f = scalar_steps(&fine, p.z1, p.z2, one, nf);
    let scale = nf as f64 / ng as f64;
    let g = scalar_steps(&coarse, p.z1 * scale, p.z2 * scale, one, ng);
    assert!((fac.fine - f).norm() < 1e-14);
    assert!((fac.coarse - g).norm() < 1e-14);
    assert!(((fac.coarse - fac.fine).norm() - (g - f).norm()).abs() < 1e-14);
}

#[test]
fn matrix_amplification_matches_recursion_at_reference_pairing() {
    let coarse = MethodId::ImexRk3.tableau();
    let fine = MethodId::ImexRk4.tableau();
    let fac = propagator_factors(&coarse, &fine, 8, 1, DahlquistPoint::new(0.021, 0.013)).unwrap();
    let a = parareal_amp(&fac, 64, 2).unwrap().r;
    let b = parareal_amp_recursive(&fac, 64, 2).unwrap();
    assert!((a - b).norm() <= 1e-12 * b.norm(), "{a} vs {b}");
}

#[test]
fn matrix_amplification_matches_recursion_for_every_k() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let np = r.gen_range(1..=32);
        let f = Complex64::from_polar(r.gen_range(0.0..1.5), r.gen_range(-3.2..3.2));
        let g = Complex64::from_polar(r.gen_range(0.0..1.5), r.gen_range(-3.2..3.2));
        let fac = PropagatorFactors::from_values(f, g);
        // relative to the largest binomial term (|G| + |F − G|)^Np
        let scale = (g.norm() + (f - g).norm()).powi(np as i32);
        for k in 0..=np {
            let a = parareal_amp(&fac, np, k).unwrap().r;
            let b = parareal_amp_recursive(&fac, np, k).unwrap();
            assert!((a - b).norm() <= 1e-12 * scale.max(b.norm()), "Np={np} K={k}");
        }
    }
}
