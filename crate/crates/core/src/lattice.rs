//! Siegel points, the period lattice `L_τ = Z⁴Ω_τ`, and elliptic curves
//! `E(τ₃) = C/(Z·2τ₃ + Z·6)` as complex tori.

use crate::error::{Error, Result};
use crate::linalg::{invert4, singular_values, CMatrix};
use crate::scalar::{creal, is_finite_cx, Cx, Real};

/// Default absolute tolerance for equality of reduced points.
pub const DEFAULT_POINT_TOL: f64 = 1e-9;

/// Gram matrices with a larger condition number are rejected.
pub const MAX_GRAM_CONDITION: f64 = 1e10;

// Fractional coordinates within this distance of 1 are snapped to 0 so that
// reduction stays idempotent under rounding.
const FRAC_SNAP: f64 = 1e-11;

/// A point of the Siegel upper half space `H₂`, stored as the three
/// independent entries of the symmetric matrix `[[τ₁, τ₂], [τ₂, τ₃]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiegelPoint<T> {
    tau1: Cx<T>,
    tau2: Cx<T>,
    tau3: Cx<T>,
}

impl<T: Real> SiegelPoint<T> {
    pub fn new(tau1: Cx<T>, tau2: Cx<T>, tau3: Cx<T>) -> Result<Self> {
        if ![tau1, tau2, tau3].iter().all(|z| is_finite_cx(*z)) {
            return Err(Error::InvalidCoordinate);
        }
        let det = tau1.im * tau3.im - tau2.im * tau2.im;
        if tau1.im <= T::zero() || det <= T::zero() {
            return Err(Error::NotInSiegel);
        }
        Ok(Self { tau1, tau2, tau3 })
    }

    pub fn tau1(&self) -> Cx<T> {
        self.tau1
    }

    pub fn tau2(&self) -> Cx<T> {
        self.tau2
    }

    pub fn tau3(&self) -> Cx<T> {
        self.tau3
    }

    pub fn matrix(&self) -> [[Cx<T>; 2]; 2] {
        [[self.tau1, self.tau2], [self.tau2, self.tau3]]
    }

    pub fn im_matrix(&self) -> [[T; 2]; 2] {
        [[self.tau1.im, self.tau2.im], [self.tau2.im, self.tau3.im]]
    }

    /// Same point with `τ₁` replaced.
    pub fn with_tau1(&self, tau1: Cx<T>) -> Result<Self> {
        Self::new(tau1, self.tau2, self.tau3)
    }

    /// `τ₂ = 0`, where `A_τ = E(τ₁) × E(τ₃)`.
    pub fn is_diagonal(&self) -> bool {
        self.tau2.norm() == T::zero()
    }
}

/// Period matrix, lattice generators and the derived quantities used by the
/// theta sections.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodData<T> {
    tau: SiegelPoint<T>,
    /// `Ω_τ = [[2τ₁, 2τ₂, 2, 0], [2τ₂, 2τ₃, 0, 6]]`.
    pub omega_matrix: [[Cx<T>; 4]; 2],
    /// Columns `e₁..e₄` of `Ω_τ`.
    pub generators: [[Cx<T>; 2]; 4],
    /// `τ′ = [[τ₁/2, τ₂/6], [τ₂/6, τ₃/18]]`.
    pub tau_prime: [[Cx<T>; 2]; 2],
    /// Origin shift `ω = ½(τ₁+τ₂, τ₂+τ₃)`.
    pub omega: [Cx<T>; 2],
    /// Condition number of the real Gram matrix of the lattice basis.
    pub gram_condition: T,
    basis_inv: [[T; 4]; 4],
}

impl<T: Real> PeriodData<T> {
    pub fn new(tau: &SiegelPoint<T>) -> Result<Self> {
        let two = T::lit(2.0);
        let (t1, t2, t3) = (tau.tau1, tau.tau2, tau.tau3);
        let zero = creal(T::zero());
        let omega_matrix = [
            [t1 * two, t2 * two, creal(two), zero],
            [t2 * two, t3 * two, zero, creal(T::lit(6.0))],
        ];
        let generators = [0, 1, 2, 3].map(|k| [omega_matrix[0][k], omega_matrix[1][k]]);
        let tau_prime = [
            [t1 / two, t2 / T::lit(6.0)],
            [t2 / T::lit(6.0), t3 / T::lit(18.0)],
        ];
        let omega = [(t1 + t2) / two, (t2 + t3) / two];

        let mut basis = [[T::zero(); 4]; 4];
        for (k, e) in generators.iter().enumerate() {
            let r = realify(e);
            for i in 0..4 {
                basis[i][k] = r[i];
            }
        }
        let as_complex: Vec<Vec<Cx<T>>> = basis
            .iter()
            .map(|row| row.iter().map(|x| creal(*x)).collect())
            .collect();
        let sv = singular_values(&CMatrix::from_rows(&as_complex));
        let smin = sv[3];
        let gram_condition = if smin > T::zero() {
            let r = sv[0] / smin;
            r * r
        } else {
            T::infinity()
        };
        if !(gram_condition.as_f64() <= MAX_GRAM_CONDITION) {
            return Err(Error::IllConditioned(gram_condition.as_f64()));
        }
        let basis_inv = invert4(basis).ok_or(Error::IllConditioned(f64::INFINITY))?;
        Ok(Self {
            tau: *tau,
            omega_matrix,
            generators,
            tau_prime,
            omega,
            gram_condition,
            basis_inv,
        })
    }

    pub fn tau(&self) -> &SiegelPoint<T> {
        &self.tau
    }

    /// Real coordinates `x` with `z = Σ x_k e_k`.
    pub fn fractional_coords(&self, z: &[Cx<T>; 2]) -> [T; 4] {
        let r = realify(z);
        let mut x = [T::zero(); 4];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..4).fold(T::zero(), |acc, k| acc + self.basis_inv[i][k] * r[k]);
        }
        x
    }

    /// `Σ x_k e_k`.
    pub fn from_coords(&self, x: &[T; 4]) -> [Cx<T>; 2] {
        let mut z = [creal(T::zero()); 2];
        for (k, e) in self.generators.iter().enumerate() {
            z[0] = z[0] + e[0] * x[k];
            z[1] = z[1] + e[1] * x[k];
        }
        z
    }

    /// Lattice vector `Σ n_k e_k`.
    pub fn lattice_vector(&self, n: [i64; 4]) -> [Cx<T>; 2] {
        self.from_coords(&n.map(|v| T::lit(v as f64)))
    }

    /// Half period `e_k/2`, `k ∈ {1,2,3,4}`.
    pub fn half_period(&self, k: usize) -> [Cx<T>; 2] {
        let e = self.generators[k - 1];
        let h = T::lit(0.5);
        [e[0] * h, e[1] * h]
    }

    /// `ι_ω(z) = −z + 2ω`.
    pub fn involution(&self, z: &[Cx<T>; 2]) -> [Cx<T>; 2] {
        let two = T::lit(2.0);
        [self.omega[0] * two - z[0], self.omega[1] * two - z[1]]
    }

    /// Distance from `z` to the nearest lattice point found by rounding
    /// fractional coordinates.
    pub fn lattice_distance(&self, z: &[Cx<T>; 2]) -> T {
        let x = self.fractional_coords(z);
        let r = x.map(|v| v - v.round());
        let d = self.from_coords(&r);
        (d[0].norm_sqr() + d[1].norm_sqr()).sqrt()
    }
}

fn realify<T: Real>(z: &[Cx<T>; 2]) -> [T; 4] {
    [z[0].re, z[0].im, z[1].re, z[1].im]
}

fn snap_frac<T: Real>(x: T) -> T {
    let f = x - x.floor();
    if T::one() - f < T::lit(FRAC_SNAP) {
        T::zero()
    } else {
        f
    }
}

/// A point of `A_τ = C²/L_τ` with its reduced representative.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTorusPoint<T> {
    /// Representative with fractional lattice coordinates in `[0, 1)`.
    pub z: [Cx<T>; 2],
    pub frac: [T; 4],
    pub ambient: PeriodData<T>,
}

impl<T: Real> ComplexTorusPoint<T> {
    pub fn same_point(&self, other: &Self, tol: T) -> bool {
        let d = [self.z[0] - other.z[0], self.z[1] - other.z[1]];
        self.ambient.lattice_distance(&d) <= tol
    }
}

/// Reduces `z` into the fundamental parallelepiped of `L_τ`.
pub fn reduce_mod_lattice<T: Real>(z: &[Cx<T>; 2], period: &PeriodData<T>) -> Result<ComplexTorusPoint<T>> {
    if !z.iter().all(|v| is_finite_cx(*v)) {
        return Err(Error::InvalidCoordinate);
    }
    let frac = period.fractional_coords(z).map(snap_frac);
    Ok(ComplexTorusPoint {
        z: period.from_coords(&frac),
        frac,
        ambient: period.clone(),
    })
}

/// A point of `E(τ₃) = C/(Z·2τ₃ + Z·6)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPoint<T> {
    pub curve_modulus: Cx<T>,
    /// Representative `a·2τ₃ + b·6` with `0 ≤ a, b < 1`.
    pub rep: Cx<T>,
    pub tol: T,
}

/// `(a, b)` with `w = a·2τ₃ + b·6`.
fn elliptic_coords<T: Real>(w: Cx<T>, tau3: Cx<T>) -> (T, T) {
    let two = T::lit(2.0);
    let a = w.im / (two * tau3.im);
    let b = (w.re - a * two * tau3.re) / T::lit(6.0);
    (a, b)
}

fn elliptic_lattice_distance<T: Real>(w: Cx<T>, tau3: Cx<T>) -> T {
    let (a, b) = elliptic_coords(w, tau3);
    let (ra, rb) = (a - a.round(), b - b.round());
    (tau3 * (T::lit(2.0) * ra) + creal(T::lit(6.0) * rb)).norm()
}

pub fn elliptic_reduce<T: Real>(w: Cx<T>, tau3: Cx<T>) -> Result<EllipticPoint<T>> {
    elliptic_reduce_with_tol(w, tau3, T::lit(DEFAULT_POINT_TOL))
}

pub fn elliptic_reduce_with_tol<T: Real>(w: Cx<T>, tau3: Cx<T>, tol: T) -> Result<EllipticPoint<T>> {
    if !is_finite_cx(w) || !is_finite_cx(tau3) {
        return Err(Error::InvalidCoordinate);
    }
    if tau3.im <= T::zero() {
        return Err(Error::NotUpperHalfPlane);
    }
    let (a, b) = elliptic_coords(w, tau3);
    let (a, b) = (snap_frac(a), snap_frac(b));
    Ok(EllipticPoint {
        curve_modulus: tau3,
        rep: tau3 * (T::lit(2.0) * a) + creal(T::lit(6.0) * b),
        tol,
    })
}

impl<T: Real> EllipticPoint<T> {
    /// `p − q ∈ Z·2τ₃ + Z·6` within `self.tol`.
    pub fn same_point(&self, other: &Self) -> bool {
        elliptic_lattice_distance(self.rep - other.rep, self.curve_modulus) <= self.tol
    }

    pub fn is_zero(&self) -> bool {
        elliptic_lattice_distance(self.rep, self.curve_modulus) <= self.tol
    }

    /// `k·p` reduced.
    pub fn scale(&self, k: i64) -> Self {
        let w = self.rep * T::lit(k as f64);
        elliptic_reduce_with_tol(w, self.curve_modulus, self.tol).expect("valid curve")
    }

    pub fn add(&self, other: &Self) -> Self {
        elliptic_reduce_with_tol(self.rep + other.rep, self.curve_modulus, self.tol).expect("valid curve")
    }

    /// Smallest `k ∈ 1..=max` with `k·p = 0`.
    pub fn order_up_to(&self, max: i64) -> Option<i64> {
        (1..=max).find(|&k| self.scale(k).is_zero())
    }
}

pub fn is_two_torsion<T: Real>(p: &EllipticPoint<T>) -> bool {
    p.scale(2).is_zero()
}

/// Whether the two multisets of points agree as subsets of the curve.
pub fn same_point_set<T: Real>(a: &[EllipticPoint<T>], b: &[EllipticPoint<T>]) -> bool {
    a.iter().all(|p| b.iter().any(|q| p.same_point(q))) && b.iter().all(|q| a.iter().any(|p| p.same_point(q)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn generic_tau() -> SiegelPoint<f64> {
        SiegelPoint::new(cx(0.2, 1.1), cx(0.23, 0.31), cx(-0.4, 2.7)).unwrap()
    }

    #[test]
    fn rejects_points_outside_siegel_space() {
        assert_eq!(
            SiegelPoint::new(cx::<f64>(0.0, 1.0), cx(0.0, 2.0), cx(0.0, 1.0)),
            Err(Error::NotInSiegel)
        );
        assert_eq!(
            SiegelPoint::new(cx::<f64>(0.0, -1.0), cx(0.0, 0.0), cx(0.0, 1.0)),
            Err(Error::NotInSiegel)
        );
        assert_eq!(
            SiegelPoint::new(cx::<f64>(f64::NAN, 1.0), cx(0.0, 0.0), cx(0.0, 1.0)),
            Err(Error::InvalidCoordinate)
        );
    }

    #[test]
    fn period_matrix_layout() {
        let tau = generic_tau();
        let p = PeriodData::new(&tau).unwrap();
        assert_eq!(p.omega_matrix[0][0], tau.tau1() * 2.0);
        assert_eq!(p.omega_matrix[1][1], tau.tau3() * 2.0);
        assert_eq!(p.omega_matrix[0][2], cx(2.0, 0.0));
        assert_eq!(p.omega_matrix[1][3], cx(6.0, 0.0));
        assert_eq!(p.omega_matrix[0][3], cx(0.0, 0.0));
        assert_eq!(p.generators[1], [tau.tau2() * 2.0, tau.tau3() * 2.0]);
        assert_eq!(p.tau_prime[1][1], tau.tau3() / 18.0);
        assert_eq!(p.omega[0], (tau.tau1() + tau.tau2()) * 0.5);
    }

    #[test]
    fn lattice_vectors_reduce_to_origin() {
        let p = PeriodData::new(&generic_tau()).unwrap();
        let z = [p.generators[0][0] + p.generators[2][0], p.generators[0][1] + p.generators[2][1]];
        let r = reduce_mod_lattice(&z, &p).unwrap();
        assert!(r.z[0].norm() < 1e-12 && r.z[1].norm() < 1e-12);
    }

    #[test]
    fn omega_reduces_to_half_diagonal_when_tau2_vanishes() {
        let tau = SiegelPoint::new(cx(0.0, 1.3), cx(0.0, 0.0), cx(0.0, 2.1)).unwrap();
        let p = PeriodData::new(&tau).unwrap();
        let r = reduce_mod_lattice(&p.omega, &p).unwrap();
        let expected = reduce_mod_lattice(&[tau.tau1() * 0.5, tau.tau3() * 0.5], &p).unwrap();
        assert!(r.same_point(&expected, 1e-12));
    }

    #[test]
    fn omega_is_four_torsion() {
        let p = PeriodData::new(&generic_tau()).unwrap();
        let four = [p.omega[0] * 4.0, p.omega[1] * 4.0];
        let r = reduce_mod_lattice(&four, &p).unwrap();
        assert!(r.z[0].norm() < 1e-12 && r.z[1].norm() < 1e-12);
        let two = [p.omega[0] * 2.0, p.omega[1] * 2.0];
        assert!(p.lattice_distance(&two) > 0.1);
    }

    #[test]
    fn reduction_is_idempotent_and_periodic() {
        let p = PeriodData::new(&generic_tau()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = [
                cx(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)),
                cx(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)),
            ];
            let r1 = reduce_mod_lattice(&z, &p).unwrap();
            let r2 = reduce_mod_lattice(&r1.z, &p).unwrap();
            let scale = 1.0 + r1.z[0].norm() + r1.z[1].norm();
            assert!((r1.z[0] - r2.z[0]).norm() <= 1e-12 * scale);
            assert!((r1.z[1] - r2.z[1]).norm() <= 1e-12 * scale);
            assert!(r1.frac.iter().all(|f| (0.0..1.0).contains(f)));

            let n = [0, 1, 2, 3].map(|_| rng.gen_range(-3i64..=3));
            let shift = p.lattice_vector(n);
            let r3 = reduce_mod_lattice(&[z[0] + shift[0], z[1] + shift[1]], &p).unwrap();
            assert!(r1.same_point(&r3, 1e-9));
        }
    }

    #[test]
    fn non_finite_coordinates_are_rejected() {
        let p = PeriodData::new(&generic_tau()).unwrap();
        let bad = [cx(f64::INFINITY, 0.0), cx(0.0, 0.0)];
        assert_eq!(reduce_mod_lattice(&bad, &p), Err(Error::InvalidCoordinate));
    }

    #[test]
    fn ill_conditioned_lattice_is_flagged() {
        let tau = SiegelPoint::new(cx::<f64>(0.0, 1e6), cx(0.0, 0.0), cx(0.0, 1e-3)).unwrap();
        assert!(matches!(PeriodData::new(&tau), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn elliptic_reduction_examples() {
        let tau3 = cx::<f64>(0.3, 1.7);
        assert!(elliptic_reduce(cx(6.0, 0.0), tau3).unwrap().is_zero());
        let p = elliptic_reduce(tau3 * 2.0 + cx(3.0, 0.0), tau3).unwrap();
        assert!((p.rep - cx(3.0, 0.0)).norm() < 1e-12);
        let three = elliptic_reduce(cx(3.0, 0.0), tau3).unwrap();
        assert_eq!(three.order_up_to(12), Some(2));
        assert!(is_two_torsion(&three));
        assert!(is_two_torsion(&elliptic_reduce(tau3, tau3).unwrap()));
        assert!(!is_two_torsion(&elliptic_reduce(cx(1.0, 0.0), tau3).unwrap()));
        assert_eq!(elliptic_reduce(cx::<f64>(1.0, 0.0), cx(0.0, -1.0)), Err(Error::NotUpperHalfPlane));
    }

    #[test]
    fn elliptic_same_point_is_lattice_invariant() {
        let tau3 = cx::<f64>(-0.2, 2.3);
        let w = cx(1.234, 0.567);
        let p = elliptic_reduce(w, tau3).unwrap();
        let q = elliptic_reduce(w + tau3 * 6.0 - cx(12.0, 0.0), tau3).unwrap();
        assert!(p.same_point(&q));
        let r = elliptic_reduce(w + cx(0.01, 0.0), tau3).unwrap();
        assert!(!p.same_point(&r));
    }

    #[test]
    fn works_in_single_precision() {
        let tau = SiegelPoint::new(cx::<f32>(0.0, 1.0), cx(0.1, 0.2), cx(0.0, 1.5)).unwrap();
        let p = PeriodData::new(&tau).unwrap();
        let r = reduce_mod_lattice(&p.lattice_vector([1, -1, 2, 0]), &p).unwrap();
        assert!(p.lattice_distance(&r.z) < 1e-4);
    }
}
