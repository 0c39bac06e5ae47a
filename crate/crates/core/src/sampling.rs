//! Seeded point samplers on the complex torus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lattice::PeriodData;
use crate::scalar::{Cx, Real};

/// Samples within this lattice-fraction (sup norm) of a point of
/// `ω + ½L_τ` are rejected.
pub const FIXED_POINT_EXCLUSION: f64 = 0.05;

/// Draws `z = ω + Σ xₖ eₖ` with `x` uniform in `[−½, ½)⁴`.
#[derive(Debug, Clone)]
pub struct TorusSampler<T> {
    period: PeriodData<T>,
    rng: ChaCha8Rng,
    pub exclusion: f64,
}

impl<T: Real> TorusSampler<T> {
    pub fn new(period: &PeriodData<T>, seed: u64) -> Self {
        Self {
            period: period.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            exclusion: FIXED_POINT_EXCLUSION,
        }
    }

    /// Fractional offsets from `ω`, away from the half-lattice.
    pub fn next_coords(&mut self) -> [f64; 4] {
        loop {
            let x: [f64; 4] = std::array::from_fn(|_| self.rng.gen_range(-0.5..0.5));
            if !near_half_lattice(&x, self.exclusion) {
                return x;
            }
        }
    }

    pub fn next_z(&mut self) -> [Cx<T>; 2] {
        let x = self.next_coords().map(T::lit);
        let off = self.period.from_coords(&x);
        [self.period.omega[0] + off[0], self.period.omega[1] + off[1]]
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Whether every coordinate lies within `eps` of `½Z`.
pub fn near_half_lattice(x: &[f64; 4], eps: f64) -> bool {
    x.iter().all(|v| {
        let d = v * 2.0;
        (d - d.round()).abs() / 2.0 < eps
    })
}
