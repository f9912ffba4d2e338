use std::f64::consts::PI;

use hyperlab::catalog::ModelSpec;
use hyperlab::quadrature::{area, integrate, integrate_field, integrate_many, QuadratureGrid};
use hyperlab::tensor_calculus::{inner, scalar_derivatives_at, ScalarFieldId};
use hyperlab::Error;

#[test]
fn areas_of_closed_form_models() {
    let sphere = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 }.instantiate().unwrap();
    let a = area(&sphere, &[64]).unwrap();
    assert!((a.value - 4.0 * PI).abs() < 1e-6 * 4.0 * PI);
    let torus = ModelSpec::Torus { major: 2.0, minor: 1.0 }.instantiate().unwrap();
    let a = area(&torus, &[32]).unwrap();
    assert!((a.value - 8.0 * PI * PI).abs() < 1e-8);
    // S³(0.8) inside S⁴ has volume 2π² r³
    let s3 = ModelSpec::Sphere { curvature: 1.0, dim: 3, radius: 0.8 }.instantiate().unwrap();
    let a = area(&s3, &[16]).unwrap();
    assert!((a.value - 2.0 * PI * PI * 0.512).abs() < 1e-6 * a.value);
}

#[test]
fn weights_are_positive_and_count_matches() {
    let chart = ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 }.instantiate().unwrap();
    let grid = QuadratureGrid::new(&chart, &[8, 10, 12]).unwrap();
    assert_eq!(grid.len(), 960);
    assert!(grid.weights.iter().all(|w| *w > 0.0));
    assert!(QuadratureGrid::new(&chart, &[7]).is_err());
}

#[test]
fn doubling_reduces_gauss_legendre_error() {
    // ∫ x₂² over the unit sphere = 4π/3; x₂ = cos θ lives on the Gauss–Legendre axis
    let sphere = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 }.instantiate().unwrap();
    let exact = 4.0 * PI / 3.0;
    let err = |n: usize| {
        let v = integrate(&sphere, &[n, 8], |g| Ok(g.position()[2].value().powi(2))).unwrap();
        (v.value - exact).abs()
    };
    let (e8, e16) = (err(8), err(16));
    assert!(e16 * 4.0 <= e8, "{e8} -> {e16}");
}

#[test]
fn integration_by_parts_with_repo_laplacian() {
    // ∫⟨grad f², grad|A|²⟩ = −∫ f² Δ|A|² with Δ = +trace Hess
    let chart = ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }.instantiate().unwrap();
    let both = integrate_many(&chart, &[64], 2, |g| {
        let f2 = scalar_derivatives_at(g, &ScalarFieldId::FSquared)?;
        let a2 = scalar_derivatives_at(g, &ScalarFieldId::NormA2)?;
        Ok(vec![inner(g, &f2.grad, &a2.grad), f2.value * a2.laplacian])
    })
    .unwrap();
    let tol = 1e-5f64.max(3.0 * (both[0].error_estimate + both[1].error_estimate));
    assert!((both[0].value + both[1].value).abs() <= tol, "{} vs {}", both[0].value, -both[1].value);
    assert!(both[0].value.abs() > 1e-3);
}

#[test]
fn torus_integrals_of_curvature() {
    let torus = ModelSpec::Torus { major: 2.0, minor: 1.0 }.instantiate().unwrap();
    // total mean curvature 4π² for R = 2, r = 1; total Gauss curvature 0
    let f = integrate_field(&torus, &[32], &ScalarFieldId::F).unwrap();
    assert!((f.value - 4.0 * PI * PI).abs() < 1e-10);
    let gauss = integrate(&torus, &[32], |g| Ok(g.f().value().powi(2) * 4.0 - g.norm_a2().value())).unwrap();
    // 2 det A = (tr A)² − |A|², tr A = 2f
    assert!(gauss.value.abs() < 1e-10);
}

#[test]
fn plane_is_not_integrable() {
    let plane = ModelSpec::Plane { dim: 2, half_width: 1.0 }.instantiate().unwrap();
    assert!(matches!(area(&plane, &[8]), Err(Error::Unsupported(_))));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let chart = ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }.instantiate().unwrap();
    let run = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
            .install(|| integrate_field(&chart, &[24], &ScalarFieldId::NormA2).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}
