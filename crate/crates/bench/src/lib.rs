//! Shared inputs for the kernel benchmarks.

use parareal_lab::dahlquist::{propagator_factors, DahlquistPoint, PropagatorFactors};
use parareal_lab::pde::Propagator;
use parareal_lab::regions::Window;
use parareal_lab::{Complex64, MethodId, MethodPairSpec, NlsProblem};

/// The reference pairing: imex-rk3 coarse, imex-rk4 fine, NT = 512, Nf = 16, K = 3.
pub fn reference_spec() -> MethodPairSpec {
    MethodPairSpec::from_block_size(MethodId::ImexRk3.tableau(), MethodId::ImexRk4.tableau(), 512, 16, 1, 3)
        .expect("valid reference pairing")
}

/// Propagator factors of the reference pairing at a point inside its
/// convergence region.
pub fn reference_factors() -> PropagatorFactors {
    let s = reference_spec();
    propagator_factors(&s.coarse, &s.fine, s.nf, s.ng, DahlquistPoint::new(0.01, -0.004)).expect("nonsingular")
}

/// Axes of an `n × n` near-origin grid for the reference pairing.
pub fn reference_axes(n: usize) -> (Vec<f64>, Vec<f64>) {
    Window::near_origin(reference_spec().nt()).axes(n, n)
}

/// An imex-rk4 propagator on the NLS problem with `m` modes and the
/// initial state it acts on.
pub fn nls_fixture(m: usize) -> (Propagator, Vec<Complex64>) {
    let problem = NlsProblem {
        m,
        ..Default::default()
    };
    let h = problem.t_final / 4096.0;
    let y = problem.initial_state().uhat;
    (Propagator::new(&MethodId::ImexRk4.tableau(), &problem, h), y)
}
