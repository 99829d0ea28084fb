use nalgebra::{DMatrix, DVector};
use parareal_lab::dahlquist::{propagator_factors, rk_amp, DahlquistPoint, PropagatorFactors};
use parareal_lab::parareal_matrix::{
    build_matrices, e_norm_inf_closed, e_norm_two, inf_norm, parareal_amp, parareal_amp_recursive,
    toeplitz_bidiagonal, toeplitz_bidiagonal_inverse,
};
use parareal_lab::regions::RegionClass;
use parareal_lab::{Complex64, MethodId};
use proptest::prelude::*;

fn method() -> impl Strategy<Value = MethodId> {
    prop::sample::select(MethodId::ALL.to_vec())
}

fn complex(rmax: f64) -> impl Strategy<Value = Complex64> {
    (0.0..rmax, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn sup(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn conjugate_symmetry(id in method(), z1 in -50.0..50.0f64, z2 in -3.0..3.0f64) {
        let t = id.tableau();
        let a = rk_amp(&t, DahlquistPoint::new(z1, z2)).unwrap();
        let b = rk_amp(&t, DahlquistPoint::new(-z1, -z2)).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn matrix_form_equals_recursion(
        coarse in method(),
        fine in method(),
        z1 in 0.0..1.0f64,
        z2 in -0.3..0.3f64,
        nf in 1usize..=16,
        np in 1usize..=64,
        kfrac in 0.0..=1.0f64,
    ) {
        let f = propagator_factors(&coarse.tableau(), &fine.tableau(), nf, 1, DahlquistPoint::new(z1, z2)).unwrap();
        let k = (kfrac * np as f64).round() as usize;
        let a = parareal_amp(&f, np, k).unwrap().r;
        let b = parareal_amp_recursive(&f, np, k).unwrap();
        // Both orders sum Σ_j C(Np, j)(F − G)^j G^(Np−j); roundoff is relative
        // to the largest partial magnitude, not to the (possibly tiny) result.
        let scale = (f.coarse.norm() + (f.fine - f.coarse).norm()).powi(np as i32).max(1.0);
        prop_assert!((a - b).norm() <= 1e-12 * scale);
    }

    #[test]
    fn contraction_bound(f in complex(1.5), g in complex(1.5), np in 1usize..=32, seed in any::<u64>()) {
        let fac = PropagatorFactors::from_values(f, g);
        let e = build_matrices(&fac, np).unwrap().e;
        let bound = e_norm_inf_closed(&fac, np);
        let mut s = seed;
        let v = DVector::from_fn(np + 1, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            Complex64::from_polar((s >> 11) as f64 / (1u64 << 53) as f64, (s % 6283) as f64 / 1000.0)
        });
        prop_assert!(sup(&(&e * &v)) <= bound * sup(&v) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn closed_inf_norm_matches_matrix(f in complex(1.5), g in complex(1.5), np in 1usize..=64) {
        let fac = PropagatorFactors::from_values(f, g);
        let m = build_matrices(&fac, np).unwrap();
        let closed = e_norm_inf_closed(&fac, np);
        let brute = inf_norm(&m.e);
        prop_assert!((closed - brute).abs() <= 1e-12 * brute.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn monotone_convergence_remark(g in complex(1.0), dir in complex(1.0), np in 1usize..=64) {
        // |G| < 1 and |G − F| < 1/Np imply ‖E‖∞ < 1
        let f = g + dir / np as f64;
        prop_assume!((g - f).norm() < 1.0 / np as f64);
        prop_assert!(e_norm_inf_closed(&PropagatorFactors::from_values(f, g), np) < 1.0);
    }

    #[test]
    fn two_norm_within_norm_equivalence(f in complex(1.2), g in complex(1.2), np in 1usize..=16) {
        let fac = PropagatorFactors::from_values(f, g);
        let m = build_matrices(&fac, np).unwrap();
        let two = e_norm_two(&m, 1e-10).unwrap();
        let inf = e_norm_inf_closed(&fac, np);
        let n = ((np + 1) as f64).sqrt();
        prop_assert!(two <= n * inf * (1.0 + 1e-8) + 1e-300);
        prop_assert!(inf <= n * two * (1.0 + 1e-8) + 1e-300);
    }

    #[test]
    fn bidiagonal_toeplitz_commute(gamma in complex(1.0), omega in complex(1.0), n in 1usize..=32) {
        let dim = n + 1;
        let inv = toeplitz_bidiagonal_inverse(gamma, dim);
        let a = toeplitz_bidiagonal(omega, dim);
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let left = inf_norm(&(&id - &a * &inv));
        let right = inf_norm(&(&id - &inv * &a));
        prop_assert!((left - right).abs() <= 1e-12 * left.max(1.0));
    }

    #[test]
    fn classification_is_consistent(abs_r in 0.0..3.0f64, norm in 0.0..3.0f64) {
        let c = RegionClass::classify(abs_r, norm);
        prop_assert_eq!(c.is_stable(), abs_r <= 1.0);
        prop_assert_eq!(c.is_contractive(), norm < 1.0);
    }
}
