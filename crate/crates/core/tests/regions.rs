//! Qualitative stability and accuracy claims checked on concrete grids.
//! Axes are per fine step, so the coarse step sees `Nf·z`.

use parareal_lab::dahlquist::{rk_amp, DahlquistPoint};
use parareal_lab::regions::{accuracy_grid, linspace, scaled_parareal_amp, Window};
use parareal_lab::{MethodId, MethodPairSpec, RegionClass};

fn rk3_rk4(nt: usize, k: usize) -> MethodPairSpec {
    MethodPairSpec::from_block_size(MethodId::ImexRk3.tableau(), MethodId::ImexRk4.tableau(), nt, 16, 1, k).unwrap()
}

fn max_amp_on_z2_axis(spec: &MethodPairSpec, lim: f64) -> f64 {
    linspace(-lim, lim, 2001)
        .into_iter()
        .map(|z2| scaled_parareal_amp(spec, 0.0, z2).unwrap().norm())
        .fold(0.0, f64::max)
}

#[test]
fn three_iterations_stay_stable_where_five_do_not() {
    // Near the origin of the z2 axis K = 3 keeps |R| at one up to roundoff,
    // while K = 5 already amplifies.
    let lim = 0.06;
    let k3 = max_amp_on_z2_axis(&rk3_rk4(512, 3), lim);
    let k5 = max_amp_on_z2_axis(&rk3_rk4(512, 5), lim);
    assert!(k3 <= 1.0 + 1e-12, "K=3: {k3}");
    assert!(k5 > 1.0 + 1e-8, "K=5: {k5}");
}

#[test]
fn three_iterations_lose_stability_far_along_z2() {
    // With Np = 32 the K = 3 method is not stable on the whole coarse-stable
    // part of the z2 axis.
    let coarse = MethodId::ImexRk3.tableau();
    let mut edge = 0.0;
    for z2 in linspace(0.0, 0.5, 5001) {
        if rk_amp(&coarse, DahlquistPoint::new(0.0, 16.0 * z2)).unwrap().norm() > 1.0 + 1e-14 {
            break;
        }
        edge = z2;
    }
    assert!(edge > 0.1, "coarse stability edge {edge}");
    assert!(max_amp_on_z2_axis(&rk3_rk4(512, 3), edge) > 10.0);
}

#[test]
fn implicit_part_is_l_stable() {
    for id in MethodId::ALL {
        let t = id.tableau();
        let amps: Vec<f64> = [1e1, 1e2, 1e3, 1e4, 1e6]
            .iter()
            .map(|&z1| rk_amp(&t, DahlquistPoint::new(z1, 0.0)).unwrap().norm())
            .collect();
        assert!(amps.windows(2).all(|w| w[1] < w[0]), "{id:?}: {amps:?}");
        assert!(amps[4] < 1e-4, "{id:?}: {amps:?}");
    }
}

#[test]
fn iterating_without_convergence_does_not_beat_the_coarse_solver() {
    let w = Window {
        z1_min: 0.0,
        z1_max: 0.05,
        z2_min: -0.05,
        z2_max: 0.05,
    };
    let (z1, z2) = w.axes(61, 61);
    let coarse = accuracy_grid(&rk3_rk4(2048, 0), &z1, &z2, false).unwrap();
    let mut cells = 0;
    for k in 1..=4 {
        let g = accuracy_grid(&rk3_rk4(2048, k), &z1, &z2, false).unwrap();
        for (c0, ck) in coarse.cells.iter().zip(&g.cells) {
            if ck.class == RegionClass::NoConvStable {
                cells += 1;
                assert!(ck.accuracy_err <= 10.0 * c0.accuracy_err, "K={k} at ({}, {})", ck.z1, ck.z2);
            }
        }
    }
    assert!(cells > 100, "only {cells} non-contractive stable cells");
}
