//! Order of accuracy on the partitioned Dahlquist problem, measured in
//! double-double so the smallest local errors sit well above roundoff.

use num_complex::Complex;
use parareal_lab::dahlquist::rk_amp_in;
use parareal_lab::MethodId;
use twofloat::TwoFloat;

fn cis(theta: TwoFloat) -> Complex<TwoFloat> {
    let zero = TwoFloat::from(0.0);
    let mut term = Complex::new(TwoFloat::from(1.0), zero);
    let mut sum = term;
    for n in 1..40 {
        term = term * Complex::new(zero, theta) / TwoFloat::from(n as f64);
        sum = sum + term;
    }
    sum
}

fn local_error(id: MethodId, z1: f64, z2: f64) -> f64 {
    let (a, b) = (TwoFloat::from(z1), TwoFloat::from(z2));
    let d = rk_amp_in(&id.tableau(), a, b).unwrap() - cis(a + b);
    f64::from((d.re * d.re + d.im * d.im).sqrt())
}

#[test]
fn design_order_along_rays() {
    // implicit only, explicit only, mixed, and counter-rotating
    let rays = [(1.0, 0.0), (0.0, 1.0), (1.0, 0.7), (1.0, -0.4)];
    let mixed = [(1.0, 0.7), (1.0, -0.4)];
    for id in MethodId::ALL {
        let p = id.tableau().order as f64;
        for (a, b) in rays {
            let h1 = 2f64.powi(-8);
            let h2 = 2f64.powi(-9);
            let slope = (local_error(id, h1 * a, h1 * b) / local_error(id, h2 * a, h2 * b)).log2() - 1.0;
            // a single part can be more accurate on the linear test problem
            // than the coupled scheme (the explicit part of imex-rk2 is third
            // order on the imaginary axis), so only the lower bound holds per ray
            assert!(slope > p - 0.25, "{id:?} ray ({a}, {b}): slope {slope}");
            if mixed.contains(&(a, b)) {
                assert!(slope < p + 0.25, "{id:?} ray ({a}, {b}): slope {slope}");
            }
        }
    }
}

#[test]
fn double_double_matches_f64_at_moderate_steps() {
    for id in MethodId::ALL {
        let t = id.tableau();
        let dd = rk_amp_in(&t, TwoFloat::from(0.3), TwoFloat::from(-0.2)).unwrap();
        let f = rk_amp_in(&t, 0.3, -0.2).unwrap();
        assert!((f64::from(dd.re) - f.re).abs() < 1e-15);
        assert!((f64::from(dd.im) - f.im).abs() < 1e-15);
    }
}
