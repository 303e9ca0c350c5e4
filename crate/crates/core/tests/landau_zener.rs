use std::f64::consts::PI;

use ftbench::quantum::evolve_driven;
use ftbench::IsingProblem;
use num_complex::Complex64;

/// Sweeping `H = −A σˣ − v t σᶻ` through the crossing leaves the system in its
/// starting diabatic state with probability `exp(−2π² A² / v)`.
#[test]
fn landau_zener_transition_probability() {
    let field = IsingProblem::new(1, [(vec![0], 1.0)]).unwrap();
    for (a, v) in [(0.1, 1.0), (0.2, 2.0), (0.05, 0.1)] {
        let half = 2000.0 * a / v;
        let mut psi = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        evolve_driven(&field, |_| a, |t| v * t, &mut psi, (-half, half), 0.05).unwrap();
        let stay = psi[0].norm_sqr();
        let expected = (-2.0 * PI * PI * a * a / v).exp();
        assert!((stay - expected).abs() < 1e-3, "A={a} v={v}: {stay} vs {expected}");
        assert!((psi[0].norm_sqr() + psi[1].norm_sqr() - 1.0).abs() < 1e-10);
    }
}
