use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_core::connection::{solve_d, ZeroSearch};
use torus_core::flow::TorusFlow;
use torus_core::rotation::{
    circle_norm, convergents, e_phi_equiv, orbit_membership, rotation_number,
    rotation_number_checked, Decision, FnLift, MeridianReturn, RigidRotation, SampledLift,
};
use torus_core::Error;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn unit(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

#[test]
fn rigid_rotation_error_bound_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let alpha: f64 = rng.gen_range(0.0..1.0);
        for n in [10, 100, 1000] {
            let est = rotation_number(&RigidRotation(alpha), rng.gen_range(0.0..1.0), n).unwrap();
            assert!((est.value - alpha).abs() <= est.error_bound);
            assert_eq!(est.error_bound, 1.0 / n as f64);
        }
    }
}

#[test]
fn rotation_by_one_third_and_golden_mean() {
    let est = rotation_number(&RigidRotation(1.0 / 3.0), 0.1, 300).unwrap();
    assert!((est.value - 1.0 / 3.0).abs() <= 1.0 / 300.0);
    assert_eq!(est.convergent, (1, 3));
    let est = rotation_number(&RigidRotation(golden()), 0.0, 10_000).unwrap();
    assert!((est.value - golden()).abs() <= 1e-4);
}

#[test]
fn non_monotone_lifts_are_rejected() {
    let bumpy = FnLift(|x: f64| x + 0.2 + 0.3 * (std::f64::consts::TAU * x).sin());
    assert!(matches!(rotation_number(&bumpy, 0.0, 10), Err(Error::NotMonotone { .. })));
    let r = SampledLift::new(vec![0.0, 0.5], vec![0.3, 0.2]);
    assert!(matches!(r, Err(Error::NotMonotone { .. })));
}

#[test]
fn sampled_lift_of_a_rotation() {
    let xs: Vec<f64> = (0..16).map(|k| k as f64 / 16.0).collect();
    let fs: Vec<f64> = xs.iter().map(|x| x + 0.25).collect();
    let lift = SampledLift::new(xs, fs).unwrap();
    let est = rotation_number(&lift, 0.3, 200).unwrap();
    assert!((est.value - 0.25).abs() < 1e-12);
}

#[test]
fn meridian_return_on_the_connection_surface_rotates_by_phi() {
    let sol = solve_d(1.0 / 3.0, 2.0, 1.0, 1e-10, ZeroSearch::default()).unwrap();
    let flow = TorusFlow::compute(sol.params(), 64, 1e-12).unwrap();
    let est = rotation_number_checked(&MeridianReturn(&flow), 0.123, 30, 16).unwrap();
    assert!((est.value - 1.0 / 3.0).abs() < 1e-4, "{}", est.value);
}

#[test]
fn convergents_satisfy_the_dirichlet_bound() {
    let alpha = 0.345678;
    let cs = convergents(alpha, 6);
    assert!(!cs.is_empty());
    for (p, q) in cs {
        assert!((alpha - p as f64 / q as f64).abs() < 1.0 / (q * q) as f64);
    }
    let fib: Vec<(i64, i64)> = convergents(golden(), 5).into_iter().skip(1).collect();
    assert_eq!(fib, vec![(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]);
}

#[test]
fn spec_style_verdicts() {
    let phi = golden();
    assert_eq!(e_phi_equiv(0.2, 0.2, phi, 0, 1e-12).decision, Decision::Equivalent(0));
    assert_eq!(
        e_phi_equiv(0.2, unit(0.2 + 3.0 * phi), phi, 10, 1e-10).decision,
        Decision::Equivalent(3)
    );
    let rho2 = unit(0.2 + 3.0 * phi + 1e-3);
    let v = e_phi_equiv(0.2, rho2, phi, 50, 1e-6);
    assert_eq!(v.decision, Decision::NotEquivalentUpTo(50));
    let brute = (-50i64..=50)
        .map(|n| circle_norm(rho2 - 0.2 - n as f64 * phi))
        .fold(f64::INFINITY, f64::min);
    assert!(brute > 1e-6);
    assert_eq!(v.residual, brute);
}

#[test]
fn orbit_membership_examples() {
    let phi = golden();
    assert!(orbit_membership(0.0, phi, 1, 1e-12));
    assert!(orbit_membership(unit(5.0 * phi), phi, 10, 1e-10));
    assert!(!orbit_membership(phi / 2.0, phi, 100, 1e-8));
    let brute = (-100i64..=100)
        .map(|n| circle_norm(phi / 2.0 - n as f64 * phi))
        .fold(f64::INFINITY, f64::min);
    assert!(brute > 1e-8);
}

fn phi_strategy() -> impl Strategy<Value = f64> {
    // keep phi away from rationals with small denominators
    (0.05f64..0.95).prop_filter("badly approximable enough", |phi| {
        (1..=100).all(|k| circle_norm(k as f64 * phi) > 1e-6)
    })
}

proptest! {
    #[test]
    fn equivalence_is_reflexive(rho in 0.0f64..1.0, phi in phi_strategy()) {
        prop_assert_eq!(e_phi_equiv(rho, rho, phi, 20, 1e-9).decision, Decision::Equivalent(0));
    }

    #[test]
    fn equivalence_is_symmetric(rho in 0.0f64..1.0, phi in phi_strategy(), n in -20i64..=20) {
        let rho2 = unit(rho + n as f64 * phi);
        let ab = e_phi_equiv(rho, rho2, phi, 50, 1e-9);
        let ba = e_phi_equiv(rho2, rho, phi, 50, 1e-9);
        prop_assert_eq!(ab.decision, Decision::Equivalent(n));
        prop_assert_eq!(ba.decision, Decision::Equivalent(-n));
    }

    #[test]
    fn equivalence_is_transitive(
        a in 0.0f64..1.0,
        phi in phi_strategy(),
        n1 in -10i64..=10,
        n2 in -10i64..=10,
    ) {
        let b = unit(a + n1 as f64 * phi);
        let c = unit(b + n2 as f64 * phi);
        prop_assert_eq!(e_phi_equiv(a, b, phi, 30, 1e-9).decision, Decision::Equivalent(n1));
        prop_assert_eq!(e_phi_equiv(b, c, phi, 30, 1e-9).decision, Decision::Equivalent(n2));
        prop_assert_eq!(e_phi_equiv(a, c, phi, 30, 1e-9).decision, Decision::Equivalent(n1 + n2));
    }
}
