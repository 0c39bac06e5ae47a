//! Scalar abstraction shared by every numerical kernel in the crate.
//!
//! All algorithms are written against [`Real`], which is implemented for
//! `f32` and `f64`. Complex values use [`num_complex::Complex`].

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by the theta, fitting and geometry kernels.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn two_pi() -> Self {
        Self::TAU()
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cx<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn creal<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// `exp(2πi·x)`, reducing `Re x` modulo 1 before the trigonometric call.
#[inline]
pub fn cis2pi<T: Real>(x: Cx<T>) -> Cx<T> {
    let frac = x.re - x.re.floor();
    let mag = (-T::two_pi() * x.im).exp();
    let (s, c) = (T::two_pi() * frac).sin_cos();
    Complex::new(mag * c, mag * s)
}

/// `exp(2πi·x)` for real `x`.
#[inline]
pub fn phase2pi<T: Real>(x: T) -> Cx<T> {
    let frac = x - x.floor();
    let (s, c) = (T::two_pi() * frac).sin_cos();
    Complex::new(c, s)
}

#[inline]
pub fn is_finite_cx<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn hdot<T: Real>(a: &[Cx<T>], b: &[Cx<T>]) -> Cx<T> {
    a.iter()
        .zip(b)
        .fold(czero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm2<T: Real>(a: &[Cx<T>]) -> T {
    a.iter()
        .fold(T::zero(), |acc, x| acc + x.norm_sqr())
        .sqrt()
}

pub fn max_modulus<T: Real>(a: &[Cx<T>]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc.max(x.norm()))
}
