mod common;

use common::c64 as cx;
use kummer_core::lattice::SiegelPoint;
use kummer_core::scalar::{max_modulus, Cx};
use kummer_core::sections::*;
use kummer_core::theta::{ThetaConfig, DEFAULT_CONTOUR_STEPS};
use rand::Rng;

fn evaluator(tau: &SiegelPoint<f64>) -> SectionEvaluator<f64> {
    SectionEvaluator::new(tau, &ThetaConfig::default()).unwrap()
}

fn rel(a: &[Cx<f64>], b: &[Cx<f64>]) -> f64 {
    let d: Vec<Cx<f64>> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    max_modulus(&d) / max_modulus(b)
}

#[test]
fn involution_negates_indices() {
    for tau in common::generic_taus() {
        let ev = evaluator(&tau);
        for z in common::torus_points(&tau, 20, 11) {
            let s = ev.values(&z).unwrap();
            let t = ev.values(&ev.period.involution(&z)).unwrap();
            let neg: Vec<Cx<f64>> = (0..12).map(|k| s[SectionIndex::from_flat(k).neg().flat()]).collect();
            assert!(rel(&t, &neg) < 1e-10);
            let g = to_g_basis(&s).g;
            let gi = to_g_basis(&t).g;
            let minus: Vec<Cx<f64>> = g.iter().map(|x| -x).collect();
            assert!(rel(&gi, &minus) < 1e-10);
        }
    }
}

#[test]
fn twelve_sections_are_independent() {
    let tau = common::generic_taus()[0];
    let ev = evaluator(&tau);
    let rows: Vec<Vec<Cx<f64>>> = common::torus_points(&tau, 60, 12)
        .iter()
        .map(|z| ev.values(z).unwrap().to_vec())
        .collect();
    let sv = normalized_row_singular_values(&rows);
    assert_eq!(sv.len(), 12);
    assert!(sv[11] / sv[0] > 1e-6, "{sv:?}");
}

#[test]
fn eigenspaces_have_dimensions_eight_and_four() {
    for tau in common::generic_taus() {
        let ev = evaluator(&tau);
        let split = eigen_split(&ev, &common::torus_points(&tau, 60, 13)).unwrap();
        assert_eq!((split.plus_rank, split.minus_rank), (8, 4));
        assert_eq!(split.plus_rank + split.minus_rank, 12);
        assert!(split.plus_gap > 1e6 && split.minus_gap > 1e6);
    }
    let tau = common::generic_taus()[1];
    let few = common::torus_points(&tau, 10, 1);
    assert!(matches!(
        eigen_split(&evaluator(&tau), &few),
        Err(kummer_core::Error::InsufficientSamples { need: 40, got: 10 })
    ));
}

#[test]
fn heisenberg_actions_on_sections() {
    for tau in common::generic_taus() {
        let ev = evaluator(&tau);
        let r = verify_heisenberg_sections(&ev, &common::torus_points(&tau, 20, 14)).unwrap();
        assert!(r.max() < 1e-9, "{r:?}");
    }
}

#[test]
fn lattice_translations() {
    let tau = common::generic_taus()[2];
    let ev = evaluator(&tau);
    let p = &ev.period;
    let ones = [cx(1.0, 0.0); 12];
    for z in common::torus_points(&tau, 10, 15) {
        let s = ev.values(&z).unwrap();
        // Real periods act trivially.
        for n in [[0, 0, 1, 0], [0, 0, 0, 1], [0, 0, -2, 3]] {
            let v = p.lattice_vector(n);
            let t = ev.values(&[z[0] + v[0], z[1] + v[1]]).unwrap();
            assert!(rel(&t, &s) < 1e-11);
        }
        // Complex periods act by a factor common to all twelve sections.
        for n in [[1, 0, 0, 0], [0, 1, 0, 0], [1, -1, 0, 0]] {
            let v = p.lattice_vector(n);
            let t = ev.values(&[z[0] + v[0], z[1] + v[1]]).unwrap();
            assert!(common_factor_residual(&t, &s, &ones) < 1e-9);
        }
    }
}

#[test]
fn odd_sections_vanish_at_the_sixteen_fixed_points() {
    for tau in common::generic_taus() {
        let ev = evaluator(&tau);
        let p = &ev.period;
        for k in 0..16 {
            let eps: [f64; 4] = std::array::from_fn(|i| 0.5 * ((k >> i) & 1) as f64);
            let off = p.from_coords(&eps);
            let z = [p.omega[0] + off[0], p.omega[1] + off[1]];
            let s = ev.values(&z).unwrap();
            let g = to_g_basis(&s).g;
            assert!(max_modulus(&g) < 1e-9 * max_modulus(&s), "fixed point {k}");
            let back = kummer_core::lattice::reduce_mod_lattice(&p.involution(&z), p).unwrap();
            let here = kummer_core::lattice::reduce_mod_lattice(&z, p).unwrap();
            assert!(back.same_point(&here, 1e-9));
        }
    }
}

fn limit_and_finite(tau2: Cx<f64>, tau3: Cx<f64>, y: f64, w1: Cx<f64>, z2: Cx<f64>) -> ([Cx<f64>; 12], [Cx<f64>; 12]) {
    let cfg = ThetaConfig::default();
    let lim = limit_section_vector(tau2, tau3, w1, z2, Branch::One, &cfg).unwrap().values;
    let tau = SiegelPoint::new(cx(0.0, y), tau2, tau3).unwrap();
    let z1 = w1.ln() / cx(0.0, std::f64::consts::PI);
    let fin = evaluator(&tau).values(&[z1, z2]).unwrap();
    (lim, fin)
}

#[test]
fn limit_sections_agree_with_large_imaginary_tau1() {
    let mut rng = common::rng(16);
    for (tau2, tau3) in [(cx(0.7, 0.4), cx(0.1, 2.3)), (cx(1.5, 0.0), cx(-0.2, 1.9)), (cx(0.0, 0.0), cx(0.3, 1.4))] {
        for _ in 0..20 {
            let w1 = Cx::from_polar(rng.gen_range(-1.5f64..1.5).exp(), rng.gen_range(0.0..6.3));
            let z2 = (tau2 + tau3) / 2.0 + cx(rng.gen_range(-3.0..3.0), 0.0) + tau3 * rng.gen_range(-1.0..1.0);
            let (lim, fin) = limit_and_finite(tau2, tau3, 40.0, w1, z2);
            let d: Vec<Cx<f64>> = lim.iter().zip(&fin).map(|(a, b)| a - b).collect();
            assert!(max_modulus(&d) < 1e-10, "{:e}", max_modulus(&d));
        }
    }
}

#[test]
fn limit_alpha_flip_negates_the_w1_term() {
    let cfg = ThetaConfig::default();
    let (tau2, tau3) = (cx(0.35, 0.9), cx(0.1, 2.0));
    let z2 = cx(0.4, 0.3);
    let parts = limit_parts(tau2, tau3, z2, &cfg).unwrap();
    for w1 in [cx(0.3, 0.2), cx(-1.7, 0.5)] {
        for beta in 0..6 {
            let a = eval_limit_sections(tau2, tau3, w1, z2, SectionIndex::new(0, beta), &cfg).unwrap();
            let b = eval_limit_sections(tau2, tau3, w1, z2, SectionIndex::new(1, beta), &cfg).unwrap();
            let k = SectionIndex::new(0, beta).flat();
            assert!((a - b - parts.tail[k] * w1 * 2.0).norm() < 1e-13 * a.norm().max(1.0));
            let c = eval_limit_sections(tau2, tau3, w1, z2, SectionIndex::new(0, beta + 6), &cfg).unwrap();
            assert_eq!(a, c);
        }
    }
}

#[test]
fn branch_two_is_the_involution_image() {
    let cfg = ThetaConfig::default();
    let (tau2, tau3) = (cx(0.7, 0.4), cx(0.1, 2.3));
    let (w1, z2) = (cx(0.8, -0.4), cx(0.9, 0.5));
    let b2 = limit_section_vector(tau2, tau3, w1, z2, Branch::Two, &cfg).unwrap().values;
    let partner_w1 = (tau2 * cx(0.0, std::f64::consts::PI)).exp() / w1;
    let b1 = limit_section_vector(tau2, tau3, partner_w1, tau3 - z2, Branch::One, &cfg).unwrap().values;
    let neg: Vec<Cx<f64>> = (0..12).map(|k| b1[SectionIndex::from_flat(k).neg().flat()]).collect();
    assert!(rel(&b2, &neg) < 1e-13);
    // And it agrees with the finite sections at the shifted point.
    let tau = SiegelPoint::new(cx(0.0, 40.0), tau2, tau3).unwrap();
    let z1 = w1.ln() / cx(0.0, std::f64::consts::PI);
    let fin = evaluator(&tau).values(&[z1 + tau.tau1(), z2 + tau2]).unwrap();
    let lim_scaled: Vec<Cx<f64>> = b2.to_vec();
    let common = fin[0] / lim_scaled[0];
    let scaled: Vec<Cx<f64>> = lim_scaled.iter().map(|x| x * common).collect();
    assert!(rel(&fin, &scaled) < 1e-10);
}

#[test]
fn product_period_polarization_degrees() {
    let tau = SiegelPoint::new(cx(0.2, 1.1), cx(0.0, 0.0), cx(-0.1, 1.7)).unwrap();
    let ev = evaluator(&tau);
    for idx in [SectionIndex::new(0, 0), SectionIndex::new(1, 3), SectionIndex::new(0, 5)] {
        assert_eq!(polarization_degrees(&ev, idx, DEFAULT_CONTOUR_STEPS).unwrap(), (2, 6));
    }
    let generic = evaluator(&common::generic_taus()[0]);
    assert!(polarization_degrees(&generic, SectionIndex::new(0, 0), 64).is_err());
}

#[test]
fn evaluator_rejects_bad_input() {
    let tau = common::generic_taus()[0];
    let ev = evaluator(&tau);
    assert!(ev.values(&[cx(f64::NAN, 0.0), cx(0.0, 0.0)]).is_err());
    assert!(eval_limit_sections(cx(0.1, 0.0), cx(0.0, 1.0), cx(0.0, 0.0), cx(0.0, 0.0), SectionIndex::new(0, 1), &ThetaConfig::default()).is_err());
}
