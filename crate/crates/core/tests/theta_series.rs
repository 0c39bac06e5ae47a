mod common;

use common::c64 as cx;
use kummer_core::scalar::{cis2pi, Cx};
use kummer_core::theta::*;
use num_rational::Rational64;
use rand::Rng;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn to_f(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Plain double sum over a fixed box, no centring and no adaptive radius.
fn naive_theta2(ch: &Characteristic, tau: &CMat2<f64>, z: &[Cx<f64>; 2], n: i64) -> Cx<f64> {
    let a = ch.m_prime.map(to_f);
    let b = ch.m_dprime.map(to_f);
    let mut acc = cx(0.0, 0.0);
    for i in -n..=n {
        for j in -n..=n {
            let x = [i as f64 + a[0], j as f64 + a[1]];
            let quad = (tau[0][0] * x[0] * x[0] + tau[0][1] * 2.0 * x[0] * x[1] + tau[1][1] * x[1] * x[1]) * 0.5;
            acc += cis2pi(quad + (z[0] + b[0]) * x[0] + (z[1] + b[1]) * x[1]);
        }
    }
    acc
}

fn naive_theta1(a: f64, b: f64, tau: Cx<f64>, z: Cx<f64>, n: i64) -> Cx<f64> {
    (-n..=n)
        .map(|k| {
            let x = k as f64 + a;
            cis2pi(tau * (0.5 * x * x) + (z + b) * x)
        })
        .sum()
}

fn random_char(rng: &mut impl Rng) -> Characteristic {
    let d = [1, 2, 3, 6];
    let mut q = || {
        let den = d[rng.gen_range(0..4)];
        r(rng.gen_range(0..den), den)
    };
    Characteristic::new([q(), q()], [q(), q()]).unwrap()
}

fn random_z(rng: &mut impl Rng, tau: &CMat2<f64>) -> [Cx<f64>; 2] {
    // z = x + τy with x, y in the unit cube keeps every term of moderate size.
    let x: [f64; 2] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    let y: [f64; 2] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    [
        tau[0][0] * y[0] + tau[0][1] * y[1] + x[0],
        tau[1][0] * y[0] + tau[1][1] * y[1] + x[1],
    ]
}

#[test]
fn series_matches_brute_force_box_sum() {
    let mut rng = common::rng(1);
    let cfg = ThetaConfig::default();
    for _ in 0..40 {
        let tau = common::random_tau(&mut rng, 0.6, 2.0).matrix();
        let ch = random_char(&mut rng);
        let z = random_z(&mut rng, &tau);
        let fast = theta2(&ch, &tau, &z, &cfg).unwrap();
        let slow = naive_theta2(&ch, &tau, &z, 25);
        assert!((fast - slow).norm() <= 1e-11 * slow.norm().max(1.0), "{fast} vs {slow}");
    }
}

#[test]
fn one_variable_series_matches_brute_force() {
    let mut rng = common::rng(2);
    let cfg = ThetaConfig::default();
    for _ in 0..60 {
        let tau = cx(rng.gen_range(-0.5..0.5), rng.gen_range(0.3..3.0));
        let z = cx(rng.gen_range(-0.5..0.5), 0.0) + tau * rng.gen_range(-0.5..0.5);
        let (a, b) = (r(rng.gen_range(0..6), 6), r(rng.gen_range(0..6), 6));
        let fast = theta1(a, b, tau, z, &cfg).unwrap();
        let slow = naive_theta1(to_f(a), to_f(b), tau, z, 60);
        assert!((fast - slow).norm() <= 1e-11 * slow.norm().max(1.0));
    }
}

#[test]
fn widening_the_window_changes_nothing() {
    let mut rng = common::rng(3);
    let cfg = ThetaConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let tau = common::random_tau(&mut rng, 0.5, 2.5).matrix();
        let ch = random_char(&mut rng);
        let z = random_z(&mut rng, &tau);
        let a = theta2_detailed(&ch, &tau, &z, &cfg).unwrap();
        let b = theta2_widened(&ch, &tau, &z, &cfg, 3).unwrap();
        assert_eq!(b.radius, a.radius + 3);
        worst = worst.max((a.value - b.value).norm());
    }
    assert!(worst < 2e-12, "{worst:e}");
}

#[test]
fn parity_under_negation() {
    let mut rng = common::rng(4);
    let cfg = ThetaConfig::default();
    for _ in 0..50 {
        let tau = common::random_tau(&mut rng, 0.6, 2.0).matrix();
        let ch = random_char(&mut rng);
        let z = random_z(&mut rng, &tau);
        let minus = [-z[0], -z[1]];
        let lhs = theta2(&ch, &tau, &minus, &cfg).unwrap();
        let rhs = theta2(&ch.neg(), &tau, &z, &cfg).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }
    // Half-integral characteristics: Θ(−z) = (−1)^{4m′ᵀm″} Θ(z).
    for bits in 0..16i64 {
        let h = |k: i64| r((bits >> k) & 1, 2);
        let ch = Characteristic::new([h(0), h(1)], [h(2), h(3)]).unwrap();
        let tau = common::random_tau(&mut rng, 0.6, 2.0).matrix();
        let z = random_z(&mut rng, &tau);
        let sign = if ch.is_odd() { -1.0 } else { 1.0 };
        let lhs = theta2(&ch, &tau, &[-z[0], -z[1]], &cfg).unwrap();
        let rhs = theta2(&ch, &tau, &z, &cfg).unwrap() * sign;
        assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }
}

#[test]
fn diagonal_period_factorizes() {
    let mut rng = common::rng(5);
    let cfg = ThetaConfig::default();
    for _ in 0..50 {
        let t1 = cx(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.5));
        let t3 = cx(rng.gen_range(-0.5..0.5), rng.gen_range(0.5..2.5));
        let tau = [[t1, cx(0.0, 0.0)], [cx(0.0, 0.0), t3]];
        let ch = random_char(&mut rng);
        let z = random_z(&mut rng, &tau);
        let full = theta2(&ch, &tau, &z, &cfg).unwrap();
        let f1 = theta1(ch.m_prime[0], ch.m_dprime[0], t1, z[0], &cfg).unwrap();
        let f2 = theta1(ch.m_prime[1], ch.m_dprime[1], t3, z[1], &cfg).unwrap();
        assert!((full - f1 * f2).norm() <= 1e-10 * full.norm().max(1.0));
    }
}

#[test]
fn quasi_periodicity() {
    let mut rng = common::rng(6);
    let cfg = ThetaConfig::default();
    for _ in 0..30 {
        let tau = common::random_tau(&mut rng, 0.6, 2.0).matrix();
        let ch = random_char(&mut rng);
        let z = random_z(&mut rng, &tau);
        let a = ch.m_prime.map(to_f);
        let b = ch.m_dprime.map(to_f);
        let base = theta2(&ch, &tau, &z, &cfg).unwrap();
        let n = [rng.gen_range(-2i64..=2) as f64, rng.gen_range(-2i64..=2) as f64];
        // Integer shift: factor e^{2πi m′ᵀn}.
        let zi = [z[0] + n[0], z[1] + n[1]];
        let got = theta2(&ch, &tau, &zi, &cfg).unwrap();
        let want = base * cis2pi(cx(a[0] * n[0] + a[1] * n[1], 0.0));
        assert!((got - want).norm() <= 1e-10 * want.norm().max(1.0));
        // Shift by τm: factor e^{−πi mᵀτm − 2πi mᵀ(z+m″)}.
        let m = [1.0, 0.0];
        let tm = [tau[0][0] * m[0] + tau[0][1] * m[1], tau[1][0] * m[0] + tau[1][1] * m[1]];
        let zt = [z[0] + tm[0], z[1] + tm[1]];
        let got = theta2(&ch, &tau, &zt, &cfg).unwrap();
        let expo = -(tm[0] * m[0] + tm[1] * m[1]) * 0.5 - (z[0] + b[0]) * m[0] - (z[1] + b[1]) * m[1];
        let want = base * cis2pi(expo);
        assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn one_variable_theta_has_one_zero_per_period_cell() {
    let cfg = ThetaConfig::default();
    let tau = cx(0.17, 1.3);
    for (a, b) in [(r(0, 1), r(0, 1)), (r(1, 2), r(1, 2)), (r(0, 1), r(1, 6)), (r(1, 3), r(5, 6))] {
        let corners = parallelogram(cx(-0.31, 0.0) + tau * -0.27, cx(1.0, 0.0), tau);
        let n = count_zeros_on_loop(|z| theta1(a, b, tau, z, &cfg).unwrap(), &corners, DEFAULT_CONTOUR_STEPS).unwrap();
        assert_eq!(n, 1);
    }
}

#[test]
fn contour_through_a_zero_is_reported() {
    let cfg = ThetaConfig::default();
    let tau = cx(0.0, 1.0);
    // ϑ_{½,½} vanishes at 0, a corner of this loop.
    let corners = parallelogram(cx(0.0, 0.0), cx(1.0, 0.0), tau);
    let res = try_count_zeros_on_loop(|z| theta1(r(1, 2), r(1, 2), tau, z, &cfg), &corners, 64);
    assert!(matches!(res, Err(kummer_core::Error::ContourHitsZero)));
}

#[test]
fn tighter_tolerance_never_shrinks_the_window() {
    let mut rng = common::rng(7);
    for _ in 0..50 {
        let tau = common::random_tau(&mut rng, 0.3, 3.0);
        let y = tau.im_matrix();
        let s = [rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5)];
        let mut last = 0;
        for tol in [1e-6, 1e-8, 1e-10, 1e-12, 1e-14] {
            let rad = truncation_radius(&y, &s, tol).unwrap();
            assert!(rad >= last);
            last = rad;
        }
    }
}

#[test]
fn section_batch_agrees_with_characteristic_series() {
    let cfg = ThetaConfig::default();
    for tau in common::generic_taus() {
        let tp = [
            [tau.tau1() / 2.0, tau.tau2() / 6.0],
            [tau.tau2() / 6.0, tau.tau3() / 18.0],
        ];
        let mut rng = common::rng(8);
        let z = random_z(&mut rng, &tp);
        let (all, _) = theta2_sections(&tp, &z, &cfg).unwrap();
        for k in 0..12 {
            let ch = Characteristic::section((k / 6) as i64, (k % 6) as i64);
            let one = naive_theta2(&ch, &tp, &z, 30);
            assert!((all[k] - one).norm() <= 1e-10 * one.norm().max(1.0));
        }
    }
}
