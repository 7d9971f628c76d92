use triosc::dynamics::{
    gamma_at, integrate_direct, integrate_naive_decoupled, propagate, OscillatorSystem, TimeProfile,
};
use triosc::linalg3::{jacobi_default, SymMat3, Vec3};

fn example() -> SymMat3 {
    SymMat3::new(7.0, 6.0, 5.0, 1.0, 2.0, 3.0)
}

/// `x(t) = Q[cos(ωt)Qᵀx₀ + sin(ωt)/ω·Qᵀp₀]` for constant positive-definite Γ.
fn modal_solution(g: &SymMat3, x0: Vec3, p0: Vec3, t: f64) -> Vec3 {
    let j = jacobi_default(g).unwrap();
    let q = j.eigenvectors;
    let (a, b) = (q.transpose() * x0, q.transpose() * p0);
    let mut m = Vec3::ZERO;
    for i in 0..3 {
        let w = j.eigenvalues[i].sqrt();
        m[i] = a[i] * (w * t).cos() + b[i] * (w * t).sin() / w;
    }
    q * m
}

fn slow_system() -> OscillatorSystem {
    OscillatorSystem::new(
        [0.01, 0.0, -0.01].map(|gamma| TimeProfile::Exponential { a: 1.0, gamma }),
        [
            TimeProfile::Constant(4.0),
            TimeProfile::Constant(6.0),
            TimeProfile::Constant(9.0),
        ],
        [
            TimeProfile::Constant(1.0),
            TimeProfile::Constant(0.5),
            TimeProfile::Constant(0.8),
        ],
        0.0,
        10.0,
        1e-3,
        10,
    )
    .unwrap()
}

fn fast_system() -> OscillatorSystem {
    OscillatorSystem::new(
        [0, 1, 2].map(|_| TimeProfile::Constant(1.0)),
        [
            TimeProfile::Constant(4.0),
            TimeProfile::Constant(5.0),
            TimeProfile::Constant(6.0),
        ],
        [
            TimeProfile::Sinusoid {
                offset: 0.0,
                amplitude: 2.0,
                omega: 3.0,
                phase: 0.0,
            },
            TimeProfile::Constant(0.3),
            TimeProfile::Sinusoid {
                offset: 0.5,
                amplitude: 1.0,
                omega: 2.0,
                phase: 1.0,
            },
        ],
        0.0,
        10.0,
        1e-3,
        10,
    )
    .unwrap()
}

#[test]
fn direct_matches_modal_solution() {
    let g = example();
    let sys = OscillatorSystem::from_gamma(&g, 5.0, 1e-3).unwrap();
    let (x0, p0) = (Vec3::new(1.0, -0.5, 0.25), Vec3::new(0.0, 0.4, -0.1));
    let tr = integrate_direct(&sys, x0, p0).unwrap();
    for s in tr.states.iter().step_by(250) {
        let want = modal_solution(&g, x0, p0, s.t);
        assert!((s.x - want).norm() <= 1e-6, "t = {}", s.t);
    }
}

#[test]
fn energy_is_conserved_for_constant_gamma() {
    let sys = OscillatorSystem::from_gamma(&example(), 10.0, 1e-3).unwrap();
    let tr = integrate_direct(&sys, Vec3::new(1.0, 0.0, -1.0), Vec3::new(0.5, 0.5, 0.0)).unwrap();
    assert_eq!(tr.steps, 10_000);
    let e0 = tr.states[0].energy;
    let drift = tr
        .states
        .iter()
        .map(|s| (s.energy - e0).abs() / e0)
        .fold(0.0, f64::max);
    assert!(drift <= 1e-8, "drift {drift}");
}

#[test]
fn rk4_order_under_step_halving() {
    let g = example();
    let (x0, p0) = (Vec3::new(1.0, 0.2, -0.3), Vec3::ZERO);
    let err = |dt: f64| {
        let sys = OscillatorSystem::from_gamma(&g, 2.0, dt).unwrap();
        let tr = integrate_direct(&sys, x0, p0).unwrap();
        (tr.states.last().unwrap().x - modal_solution(&g, x0, p0, 2.0)).norm()
    };
    let factor = err(0.01) / err(0.005);
    assert!((12.0..=20.0).contains(&factor), "factor {factor}");
}

#[test]
fn time_reversal_returns_to_start() {
    let sys = slow_system();
    let (x0, p0) = (Vec3::new(0.5, -1.0, 0.3), Vec3::new(0.1, 0.0, 0.2));
    let n = 10_000;
    let (x1, p1) = propagate(&sys, x0, p0, sys.t0, sys.t1, n).unwrap();
    let (xb, pb) = propagate(&sys, x1, p1, sys.t1, sys.t0, n).unwrap();
    assert!((xb - x0).norm() <= 1e-7);
    assert!((pb - p0).norm() <= 1e-7);
}

#[test]
fn work_integral_tracks_energy_change() {
    let sys = slow_system();
    let tr = integrate_direct(&sys, Vec3::new(1.0, 0.0, 0.0), Vec3::ZERO).unwrap();
    let e0 = tr.states[0].energy;
    for (s, w) in tr.states.iter().zip(&tr.work) {
        assert!((s.energy - e0 - w).abs() <= 1e-6 * e0, "t = {}", s.t);
    }
}

#[test]
fn gamma_follows_profiles() {
    let sys = slow_system();
    let g = gamma_at(&sys, 2.0).unwrap();
    // m₁ = e^{0.02}, m₂ = 1, m₃ = e^{−0.02} at t = 2.
    assert!((g.d[0] - (4.0 * (-0.02f64).exp() - 0.25e-4)).abs() <= 1e-14);
    assert!((g.d[1] - 6.0).abs() <= 1e-15);
    assert!((g.o12 - 0.5 * (-0.01f64).exp()).abs() <= 1e-15);
    assert!((g.o13 - 0.25).abs() <= 1e-15);
}

fn check_curve(sys: &OscillatorSystem) -> f64 {
    let c = integrate_naive_decoupled(sys, Vec3::new(1.0, 0.5, -0.5), Vec3::ZERO).unwrap();
    assert!(c.stopped.is_none(), "{:?}", c.stopped);
    assert_eq!(c.discrepancy[0], 0.0);
    assert!(c.discrepancy.iter().all(|d| d.is_finite()));
    assert!(c.naive.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(c.naive.len(), c.direct.states.len());
    c.max_discrepancy
}

#[test]
fn slow_and_fast_discrepancy_curves() {
    let slow = check_curve(&slow_system());
    let fast = check_curve(&fast_system());
    assert!(slow > 0.0 && fast > 0.0);
    assert!(fast > slow, "slow {slow}, fast {fast}");
}

#[test]
fn naive_agrees_with_direct_for_constant_parameters() {
    let sys = OscillatorSystem::from_gamma(&example(), 10.0, 1e-3).unwrap();
    let c = integrate_naive_decoupled(&sys, Vec3::new(1.0, -1.0, 0.5), Vec3::new(0.0, 0.2, 0.0))
        .unwrap();
    assert_eq!(c.direct.steps, 10_000);
    assert!(c.max_discrepancy <= 1e-8, "{}", c.max_discrepancy);
    assert!(c
        .naive
        .iter()
        .zip(&c.direct.states)
        .all(|(a, b)| a.t == b.t));
}
