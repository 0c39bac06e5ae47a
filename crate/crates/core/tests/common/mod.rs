#![allow(dead_code)]

use kummer_core::lattice::{PeriodData, SiegelPoint};
use kummer_core::sampling::TorusSampler;
use kummer_core::scalar::{cx, Cx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn generic_taus() -> Vec<SiegelPoint<f64>> {
    vec![
        SiegelPoint::new(cx(0.11, 1.3), cx(0.31, 0.17), cx(-0.2, 2.1)).unwrap(),
        SiegelPoint::new(cx(-0.27, 0.9), cx(0.05, -0.21), cx(0.4, 1.6)).unwrap(),
        SiegelPoint::new(cx(0.42, 1.7), cx(-0.36, 0.4), cx(0.13, 1.2)).unwrap(),
    ]
}

pub fn torus_points(tau: &SiegelPoint<f64>, n: usize, seed: u64) -> Vec<[Cx<f64>; 2]> {
    let p = PeriodData::new(tau).unwrap();
    let mut s = TorusSampler::new(&p, seed);
    (0..n).map(|_| s.next_z()).collect()
}

/// Random point of Siegel space with `Im τ` eigenvalues in `[lo, hi]`.
pub fn random_tau(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> SiegelPoint<f64> {
    loop {
        let re: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let a = rng.gen_range(lo..hi);
        let c = rng.gen_range(lo..hi);
        let b = rng.gen_range(-0.4..0.4) * (a * c).sqrt();
        let mean = 0.5 * (a + c);
        let disc = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        if mean - disc >= lo * 0.5 {
            return SiegelPoint::new(cx(re[0], a), cx(re[1], b), cx(re[2], c)).unwrap();
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c64(re: f64, im: f64) -> Cx<f64> {
    Cx::new(re, im)
}
