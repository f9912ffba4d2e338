use hyperlab::catalog::ModelSpec;
use hyperlab::hypersurface::frame_at;
use hyperlab::theorem_lab::*;
use proptest::prelude::*;

fn lambdas(max_m: usize) -> impl Strategy<Value = Vec<f64>> {
    (2..=max_m).prop_flat_map(|m| prop::collection::vec(-3.0f64..3.0, m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn sigma_sum_has_a_trace_form(lambda in lambdas(8), c in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let m = lambda.len() as f64;
        let (f, a2) = invariants(&lambda);
        let a3: f64 = lambda.iter().map(|l| l.powi(3)).sum();
        let lhs = okumura_conclusion_sample(c, &lambda);
        let rhs = 2.0 * c * (m * a2 - m * m * f * f) + 2.0 * m * f * a3 - 2.0 * a2 * a2;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn okumura_bound_at_zero_curvature_is_the_second_hypothesis(
        f in -3.0f64..3.0,
        m in 2usize..13,
        t in 0.0f64..2.0,
    ) {
        let mf = m as f64;
        let reduced = mf * mf * f * f / (mf - 1.0);
        let bound = okumura_bound(0.0, f, m).unwrap();
        prop_assert_eq!(bound, reduced);
        let a2 = t * reduced;
        let direct = a2 <= reduced + SLACK;
        prop_assert_eq!(okumura_bound_holds(0.0, f, a2, m).unwrap(), direct);
        if m >= 7 {
            prop_assert_eq!(flat_okumura_hypothesis(f, a2, m), direct);
        }
    }

    #[test]
    fn okumura_bound_matches_its_unrationalized_form(
        f in -3.0f64..3.0,
        m in 2usize..13,
        c in prop::sample::select(vec![-1.0, 1.0, 0.5]),
    ) {
        prop_assume!(c + f * f >= 0.0);
        let mf = m as f64;
        let raw = mf * c + mf.powi(3) * f * f / (2.0 * (mf - 1.0))
            - mf * (mf - 2.0) / (2.0 * (mf - 1.0)) * f.abs() * (mf * mf * f * f + 4.0 * (mf - 1.0) * c).sqrt();
        let bound = okumura_bound(c, f, m).unwrap();
        prop_assert!((bound - raw).abs() <= 1e-12 * (1.0 + raw.abs()), "{} vs {}", bound, raw);
    }

    #[test]
    fn sixth_bound_hypothesis_makes_gradient_coefficient_nonnegative(lambda in lambdas(10)) {
        let m = lambda.len() as f64;
        let (f, a2) = invariants(&lambda);
        if sixth_bound_hypothesis(f, a2, lambda.len()) {
            let coef2 = m * f * f / 4.0 - 1.5 * a2 / m;
            prop_assert!(coef2 >= -1e-12);
        }
    }

    #[test]
    fn hyperbolic_precondition_is_enforced(f in -0.99f64..0.99, m in 2usize..9) {
        let hyperbolic_precondition_failed = matches!(
            okumura_bound(-1.0, f, m),
            Err(hyperlab::Error::Precondition { .. })
        );
        prop_assert!(hyperbolic_precondition_failed);
    }
}

#[test]
fn umbilical_small_sphere_satisfies_the_bound() {
    let b = okumura_bound(1.0, 1.0, 3).unwrap();
    assert!((b - (3.0 + 13.5 / 2.0 - 0.75 * 17f64.sqrt())).abs() < 1e-12);
    assert!(okumura_bound_holds(1.0, 1.0, 3.0, 3).unwrap());
}

#[test]
fn hypothesis_chain_for_products() {
    for m in 2..=12usize {
        let rows = scan_products(m, 1, 1e-3, 0.999, 1e-3).unwrap();
        let holding: Vec<&ScanRow> = rows.iter().filter(|r| r.hypothesis).collect();
        if m <= 7 {
            assert!(holding.is_empty(), "m={m} has {} rows", holding.len());
        }
        for r in &holding {
            assert!(r.chain_full.unwrap() <= 1e-9, "m={m} r1={}", r.r1);
            assert!(r.chain_partial.unwrap() <= 0.0);
            assert_eq!(r.admissible, Verdict::True);
        }
        if m >= 9 {
            assert!(!holding.is_empty(), "m={m}");
        }
    }
}

#[test]
fn two_curvature_relation_on_unit_sphere_products() {
    for (m1, m2, r1) in [(1usize, 1usize, 0.3), (1, 2, 0.6), (2, 3, 0.45)] {
        let r2 = (1.0f64 - r1 * r1).sqrt();
        let spec = ModelSpec::ProductSpheres { m1, m2, r1, r2 };
        let chart = spec.instantiate().unwrap();
        let u: Vec<f64> = (0..m1 + m2).map(|i| 0.5 + 0.4 * i as f64).collect();
        let fr = frame_at(&chart, &u, 3).unwrap();
        let (l1, l2) = (fr.lambda[0], fr.lambda[m1 + m2 - 1]);
        assert!(two_curvature_relation(1.0, l1, l2).abs() < 1e-12);
        let t = master_inequality_integrand(&fr, 1.0);
        assert!(t.term1.abs() < 1e-18 && t.term2.abs() < 1e-18 && t.term3.abs() < 1e-12);
    }
}

#[test]
fn master_terms_on_umbilical_data() {
    let chart = ModelSpec::Sphere { curvature: 1.0, dim: 3, radius: 0.8 }.instantiate().unwrap();
    let fr = frame_at(&chart, &[0.7, 1.3, 2.0], 3).unwrap();
    let t = master_inequality_integrand(&fr, 1.0);
    assert!(t.term1.abs() < 1e-20 && t.term3.abs() < 1e-12);
    assert!((t.coef2 - (3.0 * 0.5625 / 4.0 - 1.5 * 3.0 * 0.5625 / 3.0)).abs() < 1e-12);
    // m = 8, λ = 1 gives coefficient 1/2
    let m = 8.0;
    assert_eq!(m / 4.0 - 1.5 * 8.0 / m, 0.5);
}

#[test]
fn product_hypothesis_matches_closed_form_at_large_m() {
    let (ok, d) = product_admissible(&ProductQuery { m: 8, m1: 1, r1: 0.85 }).unwrap();
    assert!(ok && d.hypothesis);
    let r2 = (1.0f64 - 0.85 * 0.85).sqrt();
    let x = (r2 / 0.85).powi(2);
    assert!((d.norm_a2 - (x + 7.0 / x)).abs() < 1e-12);
    assert!((d.m2f2_over_6 - (x - 14.0 + 49.0 / x) / 6.0).abs() < 1e-12);
}
