use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use hyperlab::catalog::ModelSpec;
use hyperlab::hypersurface::{frame_at, principal_decomposition, sectional_principal, ChartMap, PointGeometry};
use hyperlab::space_form::{AmbientSpace, Curvature};
use hyperlab::tensor_calculus::{
    cheng_yau_apply, contract_11_02, divergence_11, norm, scalar_derivatives, ScalarFieldId,
};
use hyperlab::tensors::{biconservativity_residual, build_tensor, stress_equivalence_residual, TensorFieldId};
use hyperlab::verifier::{run_suite, Status, SuiteConfig};
use hyperlab::Error;
use nalgebra::{DMatrix, Matrix2, Vector3};

/// Plain-f64 torus, independent of the jet pipeline.
fn torus_point(u: f64, v: f64) -> Vector3<f64> {
    let ring = 2.0 + v.cos();
    Vector3::new(ring * u.cos(), ring * u.sin(), v.sin())
}

fn central<F: Fn(f64) -> Vector3<f64>>(f: F, h: f64) -> Vector3<f64> {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

/// First and second fundamental forms of the torus by finite differences.
fn torus_forms_fd(u: f64, v: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let h = 1e-3;
    let xu = central(|t| torus_point(u + t, v), h);
    let xv = central(|t| torus_point(u, v + t), h);
    let xuu = central(|t| central(|s| torus_point(u + t + s, v), h), h);
    let xuv = central(|t| central(|s| torus_point(u + s, v + t), h), h);
    let xvv = central(|t| central(|s| torus_point(u, v + t + s), h), h);
    let n = xu.cross(&xv).normalize();
    let g = Matrix2::new(xu.dot(&xu), xu.dot(&xv), xv.dot(&xu), xv.dot(&xv));
    let b = Matrix2::new(xuu.dot(&n), xuv.dot(&n), xuv.dot(&n), xvv.dot(&n));
    (g, b)
}

fn sorted_eigs(g: &Matrix2<f64>, b: &Matrix2<f64>) -> Vec<f64> {
    let a = g.try_inverse().unwrap() * b;
    let tr = a.trace();
    let det = a.determinant();
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    vec![tr / 2.0 - disc, tr / 2.0 + disc]
}

fn torus() -> ChartMap {
    ModelSpec::Torus { major: 2.0, minor: 1.0 }.instantiate().unwrap()
}

#[test]
fn torus_principal_curvatures_match_finite_differences() {
    let chart = torus();
    for &(u, v) in &[(0.3, 0.2), (1.0, FRAC_PI_2), (2.5, 2.0), (4.0, 3.5), (5.5, 5.9)] {
        let fr = frame_at(&chart, &[u, v], 4).unwrap();
        let (g, b) = torus_forms_fd(u, v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((fr.g[(i, j)] - g[(i, j)]).abs() < 1e-8, "g at {u},{v}");
            }
        }
        // the FD normal has its own sign; compare up to joint sign
        let fd = sorted_eigs(&g, &b);
        let neg: Vec<f64> = {
            let mut x: Vec<f64> = fd.iter().map(|l| -l).collect();
            x.sort_by(f64::total_cmp);
            x
        };
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-6);
        assert!(close(&fr.lambda, &fd) || close(&fr.lambda, &neg), "{:?} vs {:?}", fr.lambda, fd);
        // closed form {cos v/(2 + cos v), 1}
        let mut exact = vec![v.cos() / (2.0 + v.cos()), 1.0];
        exact.sort_by(f64::total_cmp);
        assert!(close(&fr.lambda, &exact), "{:?} vs {:?}", fr.lambda, exact);
    }
    let fr = frame_at(&chart, &[1.0, FRAC_PI_2], 4).unwrap();
    assert!((fr.f - 0.5).abs() < 1e-12);
    assert!(fr.lambda[0].abs() < 1e-12 && (fr.lambda[1] - 1.0).abs() < 1e-12);
}

#[test]
fn christoffel_symbols_match_metric_differences() {
    for spec in [ModelSpec::Torus { major: 2.0, minor: 1.0 }, ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }] {
        let chart = spec.instantiate().unwrap();
        let u = [0.9, 1.7];
        let fr = frame_at(&chart, &u, 3).unwrap();
        let h = 1e-4;
        let dg: Vec<DMatrix<f64>> = (0..2)
            .map(|k| {
                let mut p = u;
                let mut q = u;
                p[k] += h;
                q[k] -= h;
                (frame_at(&chart, &p, 3).unwrap().g - frame_at(&chart, &q, 3).unwrap().g) / (2.0 * h)
            })
            .collect();
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    // Γ^k_ij = ½ g^{kl}(∂i g_jl + ∂j g_il − ∂l g_ij)
                    let mut want = 0.0;
                    for l in 0..2 {
                        want += 0.5 * fr.g_inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    assert!((fr.gamma[k][(i, j)] - want).abs() < 1e-7, "{} Γ^{k}_{i}{j}", spec.id());
                }
            }
        }
    }
}

#[test]
fn torus_hessian_of_f_matches_richardson_differences() {
    let chart = torus();
    let u = [0.7, FRAC_PI_3];
    let d = scalar_derivatives(&chart, &u, &ScalarFieldId::F).unwrap();
    let fr = frame_at(&chart, &u, 4).unwrap();
    let f_at = |p: [f64; 2]| frame_at(&chart, &p, 3).unwrap().f;
    let h = 1e-3;
    let second = |i: usize, j: usize, h: f64| {
        let shift = |si: f64, sj: f64| {
            let mut p = u;
            p[i] += si;
            p[j] += sj;
            f_at(p)
        };
        (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h)
    };
    let first = |k: usize, h: f64| {
        let mut p = u;
        let mut q = u;
        p[k] += h;
        q[k] -= h;
        (f_at(p) - f_at(q)) / (2.0 * h)
    };
    let rich = |a: f64, b: f64| (4.0 * b - a) / 3.0;
    for i in 0..2 {
        for j in 0..2 {
            let dij = rich(second(i, j, h), second(i, j, h / 2.0));
            let mut want = dij;
            for k in 0..2 {
                want -= fr.gamma[k][(i, j)] * rich(first(k, h), first(k, h / 2.0));
            }
            assert!((d.hess[(i, j)] - want).abs() < 1e-6, "Hess f [{i}{j}]: {} vs {want}", d.hess[(i, j)]);
        }
    }
    // f depends on v only: ∂_u f = 0
    assert!(d.differential[0].abs() < 1e-14);
}

#[test]
fn nabla_a_matches_differences_of_a() {
    let chart = ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }.instantiate().unwrap();
    let u = [1.1, 0.4];
    let fr = frame_at(&chart, &u, 4).unwrap();
    let h = 1e-4;
    for k in 0..2 {
        let mut p = u;
        let mut q = u;
        p[k] += h;
        q[k] -= h;
        let da = (frame_at(&chart, &p, 3).unwrap().a - frame_at(&chart, &q, 3).unwrap().a) / (2.0 * h);
        for i in 0..2 {
            for j in 0..2 {
                let mut want = da[(i, j)];
                for l in 0..2 {
                    want += fr.gamma[i][(k, l)] * fr.a[(l, j)] - fr.gamma[l][(k, j)] * fr.a[(i, l)];
                }
                assert!((fr.nabla_a.get(i, k, j) - want).abs() < 1e-7);
            }
        }
    }
}

#[test]
fn torus_intrinsic_curvature_is_gaussian_curvature() {
    let chart = torus();
    for &v in &[0.3, 1.5, 2.9, 4.4] {
        let geom = PointGeometry::new(&chart, &[0.2, v], 4).unwrap();
        let r = geom.riemann().unwrap();
        let g = geom.g();
        // R_{0101} = g_{0l} R^l_{101}
        let idx = |l: usize, k: usize, i: usize, j: usize| ((l * 2 + k) * 2 + i) * 2 + j;
        let r0101: f64 = (0..2).map(|l| g[(0, l)] * r[idx(l, 1, 0, 1)]).sum();
        let k = r0101 / g.determinant();
        let exact = v.cos() / (2.0 + v.cos());
        assert!((k - exact).abs() < 1e-9, "K({v}) = {k} vs {exact}");
    }
}

#[test]
fn principal_clusters_of_products() {
    let chart = ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 }.instantiate().unwrap();
    let fr = frame_at(&chart, &[0.4, 1.2, 2.0], 4).unwrap();
    let cl = principal_decomposition(&fr, 1e-6);
    assert_eq!(cl.len(), 2);
    assert!((cl[0].0 + 4.0 / 3.0).abs() < 1e-10 && cl[0].1 == 1);
    assert!((cl[1].0 - 0.75).abs() < 1e-10 && cl[1].1 == 2);

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let clifford = ModelSpec::ProductSpheres { m1: 1, m2: 1, r1: s, r2: s }.instantiate().unwrap();
    let fr = frame_at(&clifford, &[0.4, 1.2], 4).unwrap();
    let cl = principal_decomposition(&fr, 1e-6);
    assert_eq!(cl.len(), 2);
    assert!((cl[0].0 + 1.0).abs() < 1e-10 && (cl[1].0 - 1.0).abs() < 1e-10);
    assert!(fr.f.abs() < 1e-12);
    let (l1, l2) = (cl[0].0, cl[1].0);
    assert!(((l1 - l2).powi(2) * sectional_principal(1.0, l1, l2)).abs() < 1e-12);

    let sphere = ModelSpec::Sphere { curvature: 0.0, dim: 3, radius: 2.0 }.instantiate().unwrap();
    let fr = frame_at(&sphere, &[0.5, 1.0, 2.0], 4).unwrap();
    let cl = principal_decomposition(&fr, 1e-6);
    assert_eq!(cl.len(), 1);
    assert!((cl[0].0 - 0.5).abs() < 1e-10 && cl[0].1 == 3);
}

#[test]
fn normal_is_unit_and_orthogonal_in_every_space_form() {
    for spec in [
        ModelSpec::Sphere { curvature: 1.0, dim: 3, radius: 0.8 },
        ModelSpec::Sphere { curvature: -1.0, dim: 2, radius: 0.7 },
        ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 },
        ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] },
    ] {
        let chart = spec.instantiate().unwrap();
        let space = *chart.space();
        let u: Vec<f64> = (0..chart.dim()).map(|i| 0.8 + 0.5 * i as f64).collect();
        let geom = PointGeometry::new(&chart, &u, 3).unwrap();
        let fr = geom.frame().unwrap();
        let dot = |a: &[f64], b: &[f64]| space.ambient_inner(a, b).unwrap();
        assert!((dot(&fr.eta, &fr.eta) - 1.0).abs() < 1e-10);
        for t in geom.tangents() {
            let t: Vec<f64> = t.iter().map(|j| j.value()).collect();
            assert!(dot(&fr.eta, &t).abs() < 1e-10);
        }
        if space.c() != 0.0 {
            let p = chart.position(&u).unwrap();
            assert!(dot(&fr.eta, &p).abs() < 1e-10);
            assert!(space.validate_point(&p));
        }
        // gA symmetric
        let ga = &fr.g * &fr.a;
        assert!((&ga - ga.transpose()).amax() < 1e-9 * (1.0 + ga.amax()));
    }
}

#[test]
fn cheng_yau_recomposes_from_scalar_derivatives() {
    let chart = torus();
    let u = [0.5, 2.2];
    let fr = frame_at(&chart, &u, 4).unwrap();
    let geom = PointGeometry::new(&chart, &u, 4).unwrap();
    let d = scalar_derivatives(&chart, &u, &ScalarFieldId::Coordinate(0)).unwrap();
    let phi = DMatrix::identity(2, 2) * (2.0 * fr.f) - &fr.a;
    let want = contract_11_02(&geom, &phi, &d.hess);
    let got = cheng_yau_apply(&chart, &u, &TensorFieldId::T2, &ScalarFieldId::Coordinate(0)).unwrap();
    assert!((got - want).abs() < 1e-9);
    // Φ = Id gives the Laplacian
    let lap = cheng_yau_apply(&chart, &u, &TensorFieldId::Identity, &ScalarFieldId::Coordinate(0)).unwrap();
    assert!((lap - d.laplacian).abs() < 1e-12);
}

#[test]
fn laplacian_sign_and_flat_examples() {
    let plane = ModelSpec::Plane { dim: 2, half_width: 1.0 }.instantiate().unwrap();
    let d = scalar_derivatives(&plane, &[0.2, -0.3], &ScalarFieldId::Coordinate(0)).unwrap();
    assert_eq!(d.grad, vec![1.0, 0.0]);
    assert!(d.hess.amax() < 1e-15 && d.laplacian.abs() < 1e-15);
    let sphere = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 }.instantiate().unwrap();
    let d = scalar_derivatives(&sphere, &[1.0, 2.0], &ScalarFieldId::F).unwrap();
    assert!(d.grad.iter().all(|x| x.abs() < 1e-12) && d.hess.amax() < 1e-12);
    // coordinate functions on the unit sphere satisfy Δx = −m x
    let u = [1.0, 2.0];
    let p = sphere.position(&u).unwrap();
    for (k, x) in p.iter().enumerate() {
        let d = scalar_derivatives(&sphere, &u, &ScalarFieldId::Coordinate(k)).unwrap();
        assert!((d.laplacian + 2.0 * x).abs() < 1e-10);
    }
}

#[test]
fn divergence_examples() {
    let chart = torus();
    for u in [[0.1, 0.2], [2.0, 3.0], [4.0, 5.5]] {
        let id = divergence_11(&chart, &u, &TensorFieldId::Identity).unwrap();
        assert!(id.iter().all(|x| x.abs() < 1e-12));
        let t1 = divergence_11(&chart, &u, &TensorFieldId::T1).unwrap();
        assert!(t1.iter().all(|x| x.abs() < 1e-6));
        let phi = divergence_11(&chart, &u, &TensorFieldId::Phi).unwrap();
        assert!(phi.iter().all(|x| x.abs() < 1e-6));
    }
    let sphere = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.5 }.instantiate().unwrap();
    let a = divergence_11(&sphere, &[1.0, 1.0], &TensorFieldId::A).unwrap();
    assert!(a.iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn div_f2a_expands_by_the_product_rule() {
    for spec in [ModelSpec::Torus { major: 2.0, minor: 1.0 }, ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }] {
        let chart = spec.instantiate().unwrap();
        let u = [1.3, 0.6];
        let geom = PointGeometry::new(&chart, &u, 4).unwrap();
        let fr = geom.frame().unwrap();
        let d = scalar_derivatives(&chart, &u, &ScalarFieldId::F).unwrap();
        let div = divergence_11(&chart, &u, &TensorFieldId::T3).unwrap();
        let agf = &fr.a * nalgebra::DVector::from_vec(d.grad.clone());
        let want: Vec<f64> = (0..2).map(|i| 2.0 * fr.f * agf[i] + 2.0 * fr.f * fr.f * d.grad[i]).collect();
        let diff: Vec<f64> = div.iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(norm(&geom, &diff) < 1e-6, "{}", spec.id());
    }
}

#[test]
fn named_tensor_examples() {
    let unit = ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 }.instantiate().unwrap();
    let fr = frame_at(&unit, &[1.0, 1.0], 4).unwrap();
    let s2 = build_tensor(&fr, 0.0, &TensorFieldId::S2);
    assert!((s2 - DMatrix::identity(2, 2) * 2.0).amax() < 1e-12);
    assert!(build_tensor(&fr, 0.0, &TensorFieldId::Phi).amax() < 1e-12);
    // umbilical m = 4: φ = (m−1)(m−2)(m−3)λ³/6 · Id = λ³ Id
    let s4 = ModelSpec::Sphere { curvature: 0.0, dim: 4, radius: 2.0 }.instantiate().unwrap();
    let fr = frame_at(&s4, &[0.9, 1.1, 1.3, 0.5], 4).unwrap();
    let phi = build_tensor(&fr, 0.0, &TensorFieldId::Phi);
    assert!((phi - DMatrix::identity(4, 4) * 0.125).amax() < 1e-12);
}

#[test]
fn biconservativity_and_stress_examples() {
    let chart = torus();
    let r = biconservativity_residual(&chart, &[0.0, FRAC_PI_3]).unwrap();
    let geom = PointGeometry::new(&chart, &[0.0, FRAC_PI_3], 4).unwrap();
    assert!(norm(&geom, &r) > 1e-3);
    let plane = ModelSpec::Plane { dim: 2, half_width: 1.0 }.instantiate().unwrap();
    assert!(biconservativity_residual(&plane, &[0.1, 0.1]).unwrap().iter().all(|x| *x == 0.0));
    let product = ModelSpec::ProductSpheres { m1: 1, m2: 2, r1: 0.6, r2: 0.8 }.instantiate().unwrap();
    assert!(biconservativity_residual(&product, &[0.3, 1.0, 2.0]).unwrap().iter().all(|x| x.abs() < 1e-12));
    for (spec, u) in [
        (ModelSpec::Torus { major: 2.0, minor: 1.0 }, vec![0.4, 2.1]),
        (ModelSpec::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }, vec![0.7, 4.0]),
        (ModelSpec::Sphere { curvature: 0.0, dim: 2, radius: 1.0 }, vec![1.0, 1.0]),
    ] {
        let chart = spec.instantiate().unwrap();
        assert!(stress_equivalence_residual(&chart, &u).unwrap() < 1e-6);
    }
}

#[test]
fn degenerate_chart_is_reported() {
    let space = AmbientSpace::new(Curvature::Flat, 2).unwrap();
    let axes = vec![
        hyperlab::hypersurface::Axis::periodic(0.0, 2.0 * PI),
        hyperlab::hypersurface::Axis::periodic(0.0, 2.0 * PI),
    ];
    // both tangents parallel everywhere
    let chart = ChartMap::new(space, axes, |v| {
        let s = &v[0] + &v[1];
        Ok(vec![s.cos(), s.sin(), s.scale(0.0)])
    })
    .unwrap();
    assert!(matches!(frame_at(&chart, &[0.1, 0.2], 4), Err(Error::Immersion { .. })));
    let report = run_suite(&chart, "degenerate", &[8], &SuiteConfig::default());
    assert!(report.checks.iter().all(|c| c.status == Status::Error));
    assert!(report.checks[0].note.contains("immersion"));
}
