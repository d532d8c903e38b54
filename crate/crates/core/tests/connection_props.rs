use torus_core::connection::{
    critical_value_separation, critical_values, delta, delta_derivative, saddle_triple, solve_d,
    solve_d_in, verify, VerifyConfig, ZeroSearch,
};
use torus_core::field::FieldParams;
use torus_core::singularity::find_zeros;
use torus_core::Error;

const PHI: f64 = 1.0 / 3.0;

fn search() -> ZeroSearch {
    ZeroSearch::default()
}

#[test]
fn connection_values_at_the_ends_of_the_c_range() {
    let lo = solve_d(PHI, 2.0, 0.7, 1e-10, search()).unwrap();
    assert!((lo.d_star - 1.23).abs() <= 0.01, "d_star {}", lo.d_star);
    assert!((lo.rho - 3.40).abs() <= 0.01, "rho {}", lo.rho);
    let hi = solve_d(PHI, 2.0, 1.1, 1e-10, search()).unwrap();
    assert!((hi.d_star - 0.92).abs() <= 0.01, "d_star {}", hi.d_star);
    assert!((hi.rho - 3.62).abs() <= 0.01, "rho {}", hi.rho);
    assert!((hi.rho - lo.rho).abs() > 0.1);
}

#[test]
fn saddle_levels_agree_at_d_star() {
    for c in [0.7, 0.85, 1.0, 1.1] {
        let sol = solve_d(PHI, 2.0, c, 1e-10, search()).unwrap();
        assert!(sol.residual.abs() <= 1e-10);
        let t = saddle_triple(&sol.params(), search()).unwrap();
        assert!((t.s3.level() - t.s2.level()).abs() <= 1e-10);
        assert!((0.9..=1.3).contains(&sol.d_star));
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let h = 1e-5;
    for (c, d) in [(0.7, 0.9), (0.8, 1.1), (1.0, 1.0016), (1.1, 1.3), (0.95, 1.2)] {
        let p = FieldParams::new(PHI, 2.0, c, d);
        let fd = (delta(&p.with_d(d + h), search()).unwrap() - delta(&p.with_d(d - h), search()).unwrap())
            / (2.0 * h);
        let exact = delta_derivative(&p, search()).unwrap();
        assert!((exact - fd).abs() <= 1e-6, "({c}, {d}): {exact} vs {fd}");
        assert!((2.05..=2.15).contains(&exact));
    }
}

#[test]
fn unbracketed_connection_is_reported() {
    let r = solve_d_in(PHI, 2.0, 1.1, (1.2, 1.3), 1e-10, search());
    assert!(matches!(r, Err(Error::NoSignChange { .. })));
}

#[test]
fn connection_surface_is_lipschitz_in_c() {
    let h = 1e-3;
    let mut k_d: f64 = 0.0;
    let mut k_rho: f64 = 0.0;
    for c in [0.7, 0.8, 0.9, 1.0, 1.099] {
        let a = solve_d(PHI, 2.0, c, 1e-10, search()).unwrap();
        let b = solve_d(PHI, 2.0, c + h, 1e-10, search()).unwrap();
        k_d = k_d.max((b.d_star - a.d_star).abs() / h);
        k_rho = k_rho.max((b.rho - a.rho).abs() / h);
    }
    println!("empirical Lipschitz constants: K_D = {k_d:.4}, K_rho = {k_rho:.4}");
    // the secant slope over the whole range is about 0.77 for D and 0.58 for rho
    assert!(k_d < 2.0 && k_rho < 2.0);
}

#[test]
fn separation_margins() {
    assert!(!critical_value_separation(&[1.0], &[1.0, 5.0], 0.05).separated);
    let shifted = critical_value_separation(&[1.0 + std::f64::consts::TAU], &[1.0], 0.05);
    assert!(!shifted.separated);

    let margin = |c: f64, d: f64| {
        let zeros = find_zeros(&FieldParams::new(PHI, 2.0, c, d), 64, 1e-12).unwrap();
        critical_value_separation(&critical_values(&zeros), &[1.0, 5.0], 0.05)
    };
    let a = margin(0.9, 1.1);
    let b = margin(0.9 + 1e-4, 1.1);
    assert!(a.separated && a.margin > 0.05);
    assert!((a.margin - b.margin).abs() < 1e-3);
}

fn small_config() -> VerifyConfig {
    VerifyConfig {
        grid_n: 3,
        ..VerifyConfig::default()
    }
}

#[test]
fn verification_passes_on_a_coarse_grid() {
    let report = verify(&small_config());
    for check in &report.checks {
        assert!(check.passed, "{}: {}", check.name, check.detail);
    }
    assert_eq!(report.cells.len(), 9);
    assert_eq!(report.rows.len(), 3);
}

#[test]
fn corrupted_field_fails_verification() {
    let report = verify(&VerifyConfig {
        b: 20.0,
        ..small_config()
    });
    assert!(!report.passed());
    assert!(report.render(&[]).contains("overall=fail"));
}

#[test]
fn report_is_deterministic() {
    let cfg = small_config();
    let a = verify(&cfg).render(&[("version".into(), "test".into())]);
    let b = verify(&cfg).render(&[("version".into(), "test".into())]);
    assert_eq!(a, b);
    assert!(a.starts_with("version=test\n"));
    assert_eq!(verify(&cfg).rows_csv(), verify(&cfg).rows_csv());
}
