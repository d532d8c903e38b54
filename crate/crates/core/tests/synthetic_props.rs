use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_core::rotation::{circle_norm, Decision};
use torus_core::synthetic::{
    boundary_conjugacy, build, decomposition, equivalence_oracle, Footprint, Interior,
};
use torus_core::Error;

fn golden() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

fn unit(x: f64) -> f64 {
    x.rem_euclid(1.0)
}

#[test]
fn return_map_is_rotation_by_phi() {
    let phi = golden();
    let f = build(0.3, phi).unwrap();
    let y = f.return_map(0.11).unwrap();
    assert!(circle_norm(y - 0.11 - phi) < 1e-15);
    assert_eq!(f.return_map(0.0), None);
    assert_eq!(f.return_map(0.3), None);
    assert_eq!((f.u1, f.u2), (Interior::Nodes, Interior::LimitCycle));
}

#[test]
fn return_map_walks_the_gamma2_hits() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let f = build(rng.gen_range(0.0..1.0), rng.gen_range(0.05..0.95)).unwrap();
        let hits = f.gamma2_hits(50);
        for k in 1..hits.len() {
            let next = f.return_map(hits[k]).unwrap();
            assert!(circle_norm(next - hits[k - 1]) < 1e-14);
        }
        let hits = f.gamma1_hits(50);
        for k in 1..hits.len() {
            assert!(circle_norm(f.return_map(hits[k]).unwrap() - hits[k - 1]) < 1e-14);
        }
    }
}

#[test]
fn oracle_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..200 {
        let phi: f64 = rng.gen_range(0.05..0.95);
        if (1..=100).any(|k| circle_norm(k as f64 * phi) < 1e-6) {
            continue;
        }
        let rho: f64 = rng.gen_range(0.0..1.0);
        let n: i64 = rng.gen_range(-20..=20);
        let f1 = build(rho, phi).unwrap();
        let f2 = build(unit(rho + n as f64 * phi), phi).unwrap();
        match equivalence_oracle(&f1, &f2, 100, 1e-9) {
            Ok(v) => {
                let w = v.witness().expect("equivalent");
                assert!(circle_norm(f2.rho - f1.rho - w as f64 * phi) <= 1e-9);
            }
            Err(Error::PreconditionViolated(_)) => {
                assert!((-100i64..=100).any(|m| circle_norm(rho - m as f64 * phi) <= 1e-9));
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn phi_mismatch_is_never_equivalent() {
    let f1 = build(0.2, golden()).unwrap();
    let f2 = build(0.2, golden() + 0.01).unwrap();
    let v = equivalence_oracle(&f1, &f2, 100, 1e-9).unwrap();
    assert_eq!(v.decision, Decision::NotEquivalent);
}

#[test]
fn half_phi_shift_is_not_equivalent_within_horizon() {
    let phi = golden();
    let f1 = build(0.2, phi).unwrap();
    let f2 = build(0.2 + phi / 2.0, phi).unwrap();
    let v = equivalence_oracle(&f1, &f2, 100, 1e-9).unwrap();
    assert_eq!(v.decision, Decision::NotEquivalentUpTo(100));
    assert!((-100i64..=100).all(|n| circle_norm(f2.rho - f1.rho - n as f64 * phi) > 1e-9));
}

#[test]
fn oracle_rejects_rho_on_the_zero_orbit() {
    let phi = golden();
    let on_orbit = build(unit(3.0 * phi), phi).unwrap();
    let off = build(0.2, phi).unwrap();
    assert!(matches!(
        equivalence_oracle(&on_orbit, &off, 100, 1e-9),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn decomposition_arcs_are_disjoint_and_short() {
    let phi = golden();
    let d = decomposition(unit(0.2 + 3.0 * phi), 0.2, phi, 3).unwrap();
    let arcs = d.arcs();
    assert_eq!(arcs.len(), 5);
    for a in 0..arcs.len() {
        for b in a + 1..arcs.len() {
            assert!(circle_norm(arcs[a].center - arcs[b].center) > arcs[a].radius + arcs[b].radius);
        }
    }
    assert!((d.total_length() - 5.0 * 2.0 * d.eps).abs() < 1e-15);
    assert!(d.total_length() < 1.0);
    assert_eq!(d.eps, d.eps_max / 2.0);

    let two = decomposition(0.45, 0.45, phi, 0).unwrap();
    assert_eq!(two.arcs().len(), 2);
    assert!(two.pairwise_disjoint());
}

#[test]
fn decomposition_collides_on_the_zero_orbit() {
    let phi = golden();
    // rho2 + phi = 0, colliding with the centre of J
    let rho2 = unit(-phi);
    let r = decomposition(unit(rho2 + 2.0 * phi), rho2, phi, 2);
    assert!(matches!(r, Err(Error::DegenerateSpacing { .. })));
    assert!(matches!(
        decomposition(0.3, 0.2, phi, 1),
        Err(Error::PreconditionViolated(_))
    ));
    assert!(matches!(decomposition(0.2, 0.2, phi, -1), Err(Error::InvalidArgument(_))));
}

#[test]
fn boundary_conjugacy_footprint() {
    let phi = golden();
    let d = decomposition(unit(0.2 + 4.0 * phi), 0.2, phi, 4).unwrap();
    let h = boundary_conjugacy(&d);
    assert_eq!(h.free_arcs.len(), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..1000 {
        let x: f64 = rng.gen_range(0.0..1.0);
        match h.map(x) {
            Footprint::Identity(y) => {
                assert_eq!(y, x);
                // applying twice stays the identity
                assert_eq!(h.map(y), Footprint::Identity(x));
            }
            Footprint::Free(a) => assert!(h.free_arcs.contains(&a)),
        }
    }
    for a in &h.free_arcs {
        let s = a.start();
        let e = a.end();
        assert_eq!(h.map(s), Footprint::Identity(s));
        assert_eq!(h.map(e), Footprint::Identity(e));
    }
    // I_0 and I_n are not free
    assert!(matches!(h.map(d.i[0].center), Footprint::Identity(_)));
    assert!(matches!(h.map(d.i[4].center), Footprint::Identity(_)));
}
