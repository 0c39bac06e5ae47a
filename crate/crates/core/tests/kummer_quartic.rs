mod common;

use common::c64 as cx;
use kummer_core::kummer::*;
use kummer_core::lattice::SiegelPoint;
use kummer_core::projective::abs_cosine;
use kummer_core::scalar::Cx;
use kummer_core::symmetry::*;
use kummer_core::theta::ThetaConfig;
use kummer_core::Error;

fn cfg() -> ThetaConfig {
    ThetaConfig::default()
}

fn lambda_vec(q: &KummerQuartic<f64>) -> Vec<Cx<f64>> {
    q.invariant.lambda.to_vec()
}

#[test]
fn generic_image_is_a_single_invariant_quartic() {
    for tau in common::generic_taus() {
        let q = fit_kummer_quartic(&tau, 80, 7, &cfg()).unwrap();
        assert_eq!(q.fit.nullity, 1);
        assert!(q.fit.gap_ratio() > 1e6);
        assert!(q.fit.residual < 1e-8);
        assert!(q.inv_residual < 1e-7);
        for (_, c) in invariance_cosines(&q.fit.form()) {
            assert!(c > 1.0 - 1e-8);
        }
    }
}

#[test]
fn quartic_is_stable_under_seed_doubling_and_symmetry() {
    let tau = SiegelPoint::new(cx(0.0, 1.1), cx(0.23, 0.31), cx(0.0, 2.7)).unwrap();
    let base = fit_kummer_quartic(&tau, 80, 7, &cfg()).unwrap();
    let other = fit_kummer_quartic(&tau, 80, 1234, &cfg()).unwrap();
    let doubled = fit_kummer_quartic(&tau, 160, 7, &cfg()).unwrap();
    assert!(abs_cosine(&base.fit.coefficients, &other.fit.coefficients) > 1.0 - 1e-6);
    assert!(abs_cosine(&base.fit.coefficients, &doubled.fit.coefficients) > 1.0 - 1e-6);
    let pts = KummerMap::new(&tau, &cfg()).unwrap().sample_image(80, 7).unwrap();
    for name in H22Name::ALL {
        let m = generator_matrix(name);
        let rows: Vec<Vec<Cx<f64>>> = pts.iter().map(|p| p.transform(&m).coords().to_vec()).collect();
        let q = quartic_from_points(&rows).unwrap();
        assert!(abs_cosine(&lambda_vec(&q), &lambda_vec(&base)) > 1.0 - 1e-6, "{name}");
    }
}

#[test]
fn map_factors_through_the_involution_and_respects_translations() {
    let tau = common::generic_taus()[0];
    let map = KummerMap::new(&tau, &cfg()).unwrap();
    let p = &map.eval.period;
    for z in common::torus_points(&tau, 15, 21) {
        let a = map.map(&z).unwrap();
        assert!(a.dist(&map.map(&p.involution(&z)).unwrap()) < 1e-8);
        let h = p.half_period(2);
        let b = map.map(&[z[0] + h[0], z[1] + h[1]]).unwrap();
        assert!(b.dist(&a.transform(&generator_matrix(H22Name::Sigma2))) < 1e-8);
    }
    let fixed = [p.omega[0], p.omega[1]];
    assert!(matches!(map.map(&fixed), Err(Error::Indeterminate)));
}

#[test]
fn equivariance_report_is_tight() {
    for tau in common::generic_taus() {
        let r = verify_equivariance(&tau, 20, 7, &cfg()).unwrap();
        assert!(r.max_residual() < 1e-8);
        assert!(r.full_period < 1e-10);
        assert!(r.involution < 1e-8);
        for (t, g, _) in r.half_periods {
            assert_eq!(expected_translation_action(t).name, g);
        }
    }
}

#[test]
fn product_period_gives_a_smooth_quadric() {
    let tau = SiegelPoint::new(cx(0.0, 1.3), cx(0.0, 0.0), cx(0.0, 2.1)).unwrap();
    let pq = product_case_quadric(&tau, 80, 7, &cfg()).unwrap();
    assert_eq!(pq.fit.nullity, 1);
    assert_eq!(pq.rank, 4);
    let sv = &pq.matrix_singular_values;
    assert!(sv[3] > 1e-6 * sv[0]);
    for (_, c) in invariance_cosines(&pq.fit.form()) {
        assert!(c > 1.0 - 1e-8);
    }
    let generic = fit_image_form(&common::generic_taus()[0], 2, 80, 7, &cfg()).unwrap();
    assert_eq!(generic.nullity, 0);
    assert!(product_case_quadric(&common::generic_taus()[0], 80, 7, &cfg()).is_err());
}

#[test]
fn too_few_quartic_samples() {
    let err = fit_kummer_quartic(&common::generic_taus()[0], 5, 7, &cfg()).unwrap_err();
    assert!(matches!(err, Error::InsufficientSamples { need: 70, got: 5 }));
    assert_eq!(err.to_string(), "insufficient samples (need ≥ 70, got 5)");
}

/// Max-normalized λ along `τ₂ + t`.
fn lambda_at(t: f64) -> Vec<Cx<f64>> {
    let tau = SiegelPoint::new(cx(0.1, 1.2), cx(0.25 + t, 0.3), cx(-0.1, 2.4)).unwrap();
    lambda_vec(&fit_kummer_quartic(&tau, 80, 7, &cfg()).unwrap())
}

#[test]
fn lambda_depends_smoothly_on_tau() {
    let centre = |h: f64| -> Vec<Cx<f64>> {
        let (a, b) = (lambda_at(h), lambda_at(-h));
        a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let (d1, d2) = (centre(2e-3), centre(1e-3));
    let norm = |v: &[Cx<f64>]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let diff: Vec<Cx<f64>> = d1.iter().zip(&d2).map(|(a, b)| a - b).collect();
    assert!(norm(&d2) > 1e-3);
    let ratio = norm(&d1) / norm(&d2);
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
    assert!(norm(&diff) < 1e-3 * norm(&d2));
}

#[test]
fn cache_returns_identical_fits() {
    let cache = QuarticCache::new();
    let tau = common::generic_taus()[1];
    let a = cache.get_or_fit(&tau, 80, 3, &cfg()).unwrap();
    let b = cache.get_or_fit(&tau, 80, 3, &cfg()).unwrap();
    assert_eq!(a, b);
    assert_eq!(cache.len(), 1);
}

#[test]
fn quintic_needs_enough_training_points() {
    let taus = random_generic_taus(20, 1);
    let err = discover_coefficient_quintic(&taus, &taus[..2], &QuinticParams::default(), &QuarticCache::new(), &cfg()).unwrap_err();
    assert!(matches!(err, Error::InsufficientSamples { need: 150, .. }));
}

#[test]
fn nieto_residual_examples() {
    let u = |v: [f64; 6]| v.map(|x| cx(x, 0.0));
    let (a, b) = nieto_residuals(&u([1.0, -1.0, 1.0, -1.0, 1.0, -1.0]));
    assert!(a.norm() < 1e-15 && b.norm() < 1e-15);
    let (a, b) = nieto_residuals(&u([1.0; 6]));
    assert_eq!((a, b), (cx(6.0, 0.0), cx(6.0, 0.0)));
    let (a, b) = nieto_residuals(&u([1.0, -1.0, 2.0, -2.0, 3.0, -3.0]));
    assert!(a.norm() < 1e-15 && b.norm() < 1e-12);
}
