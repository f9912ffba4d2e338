use hyperlab::catalog::ModelSpec;
use hyperlab::hypersurface::PointGeometry;
use hyperlab::verifier::*;
use hyperlab::Error;

fn suite(spec: &ModelSpec, grid: &[usize], checks: &[&str]) -> VerificationReport {
    let chart = spec.instantiate().unwrap();
    let config = SuiteConfig {
        checks: checks.iter().map(|c| CheckId::parse(c).unwrap()).collect(),
        ..SuiteConfig::default()
    };
    run_suite(&chart, &spec.id(), grid, &config)
}

fn status(r: &VerificationReport, check: &str) -> Status {
    r.get(check).unwrap_or_else(|| panic!("{check} missing")).status
}

#[test]
fn round_sphere_passes_everything() {
    let spec = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 };
    let r = suite(&spec, &[32, 32], &[]);
    assert_eq!(r.checks.len(), all_checks().len());
    for c in &r.checks {
        assert_eq!(c.status, Status::Pass, "{} {} {}", c.check, c.residual_max, c.note);
    }
}

#[test]
fn torus_statuses() {
    let spec = ModelSpec::Torus { major: 2.0, minor: 1.0 };
    let r = suite(&spec, &[32, 32], &["div_phi", "div_t3", "kato", "simons", "biconservativity", "int_master"]);
    assert_eq!(status(&r, "div_phi"), Status::Pass);
    assert_eq!(status(&r, "kato"), Status::Pass);
    assert_eq!(status(&r, "simons"), Status::Pass);
    assert_eq!(status(&r, "div_t3"), Status::Skip);
    let b = r.get("biconservativity").unwrap();
    assert_eq!(b.status, Status::Skip);
    assert!(b.residual_max > 1e-3);
    assert_eq!(status(&r, "int_master"), Status::Pass);
    assert!(!r.any_failed() && !r.any_error());
}

#[test]
fn product_and_three_sphere_integrals() {
    let product = ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 };
    let r = suite(&product, &[12, 12, 12], &["int_f2a_simons", "int_fA3", "div_t3", "biconservativity"]);
    for c in &r.checks {
        assert_eq!(c.status, Status::Pass, "{} {} {}", c.check, c.residual_max, c.note);
    }
    let s3 = ModelSpec::Sphere { curvature: 1.0, dim: 3, radius: 0.8 };
    let r = suite(&s3, &[12, 12, 12], &["int_master", "simons", "gauss"]);
    for c in &r.checks {
        assert_eq!(c.status, Status::Pass, "{} {} {}", c.check, c.residual_max, c.note);
    }
}

#[test]
fn precondition_is_enforced_and_negative_control_fails() {
    let chart = ModelSpec::Torus { major: 2.0, minor: 1.0 }.instantiate().unwrap();
    let u = [0.3, 1.0];
    let geom = PointGeometry::new(&chart, &u, 4).unwrap();
    let frame = geom.frame().unwrap();
    let enforced = pointwise_residual(&geom, &frame, &CheckId::PointwiseInt1, true);
    assert!(matches!(enforced, Err(Error::Precondition { .. })), "{enforced:?}");
    let free = pointwise_residual(&geom, &frame, &CheckId::PointwiseInt1, false).unwrap();
    assert!(free > 1e-3, "{free}");
}

#[test]
fn report_serializations() {
    let spec = ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] };
    let r = suite(&spec, &[16, 16], &["codazzi", "div_phi", "box_zero(t1,x0)"]);
    let json = r.to_json().unwrap();
    assert_eq!(VerificationReport::from_json(&json).unwrap(), r);
    let csv = r.to_csv().unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "check,model,grid,residual_max,residual_l2,tol,status,note");
    assert_eq!(lines.count(), 3);
    assert!(r.to_pretty().contains("div_phi"));
    assert_eq!(r.metadata.timestamp, None);
    assert!(r.all_passed(), "{}", r.to_pretty());
}

#[test]
fn invalid_configuration_marks_rows_as_errors() {
    let chart = ModelSpec::Torus { major: 2.0, minor: 1.0 }.instantiate().unwrap();
    let config = SuiteConfig { jet_order: 2, ..SuiteConfig::default() };
    let r = run_suite(&chart, "torus", &[16, 16], &config);
    assert!(r.checks.iter().all(|c| c.status == Status::Error));
    let r = run_suite(&chart, "torus", &[4, 4], &SuiteConfig::default());
    assert!(r.checks.iter().all(|c| c.status == Status::Error));
}

#[test]
fn plane_runs_pointwise_checks_only() {
    let spec = ModelSpec::Plane { dim: 2, half_width: 1.0 };
    let r = suite(&spec, &[8, 8], &["codazzi", "div_phi", "int_master"]);
    assert_eq!(status(&r, "codazzi"), Status::Pass);
    assert_eq!(status(&r, "div_phi"), Status::Pass);
    assert_eq!(status(&r, "int_master"), Status::Skip);
}

#[test]
fn tolerances_reject_nonpositive_values() {
    let mut t = Tolerances::default();
    assert!(t.validate().is_ok());
    t.pointwise = 0.0;
    assert!(t.validate().is_err());
    assert_eq!(Tolerances::default().integral_for(1.0), 3.0);
    assert_eq!(Tolerances::default().integral_for(0.0), 1e-5);
}
