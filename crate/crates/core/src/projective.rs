//! Points of projective space and the projective distance.

use crate::error::{Error, Result};
use crate::scalar::{czero, hdot, is_finite_cx, norm2, Cx, Real};

/// Divides by the first coordinate of maximal modulus, so that coordinate
/// becomes exactly 1.
pub fn normalize_max<T: Real>(v: &[Cx<T>]) -> Result<Vec<Cx<T>>> {
    if !v.iter().all(|c| is_finite_cx(*c)) {
        return Err(Error::InvalidCoordinate);
    }
    let mut k = 0;
    let mut best = T::zero();
    for (i, c) in v.iter().enumerate() {
        let m = c.norm();
        if m > best {
            best = m;
            k = i;
        }
    }
    if best == T::zero() {
        return Err(Error::ZeroVector);
    }
    let pivot = v[k];
    Ok(v.iter()
        .enumerate()
        .map(|(i, c)| if i == k { Cx::new(T::one(), T::zero()) } else { c / pivot })
        .collect())
}

/// A point of `P³`, stored max-modulus normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjPoint3<T> {
    coords: [Cx<T>; 4],
}

impl<T: Real> ProjPoint3<T> {
    pub fn new(coords: [Cx<T>; 4]) -> Result<Self> {
        let n = normalize_max(&coords)?;
        Ok(Self {
            coords: [n[0], n[1], n[2], n[3]],
        })
    }

    pub fn coords(&self) -> &[Cx<T>; 4] {
        &self.coords
    }

    /// Image under a 4×4 matrix acting on coordinate columns.
    pub fn transform(&self, m: &[[i8; 4]; 4]) -> Self {
        let mut out = [czero::<T>(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..4 {
                *o = *o + self.coords[j] * T::lit(m[i][j] as f64);
            }
        }
        Self::new(out).expect("signed permutation preserves nonzero vectors")
    }

    pub fn dist(&self, other: &Self) -> T {
        proj_dist(&self.coords, &other.coords)
    }
}

/// Sine of the angle between the complex lines spanned by `p` and `q`.
///
/// Evaluated as `‖q̂ − ⟨p̂, q̂⟩ p̂‖`, which keeps full relative accuracy when
/// the two lines nearly coincide.
pub fn proj_dist<T: Real>(p: &[Cx<T>], q: &[Cx<T>]) -> T {
    let (np, nq) = (norm2(p), norm2(q));
    let ph: Vec<Cx<T>> = p.iter().map(|x| x / np).collect();
    let qh: Vec<Cx<T>> = q.iter().map(|x| x / nq).collect();
    let c = hdot(&ph, &qh);
    let r: Vec<Cx<T>> = qh.iter().zip(&ph).map(|(y, x)| y - x * c).collect();
    norm2(&r).min(T::one())
}

/// `|⟨p, q⟩| / (‖p‖‖q‖)`.
pub fn abs_cosine<T: Real>(p: &[Cx<T>], q: &[Cx<T>]) -> T {
    (hdot(p, q).norm() / (norm2(p) * norm2(q))).min(T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn normalization_is_idempotent() {
        let p = ProjPoint3::new([cx(0.1, 0.2), cx(-3.0, 1.0), cx(0.0, 0.0), cx(1.0, 1.0)]).unwrap();
        assert_eq!(p.coords()[1], cx::<f64>(1.0, 0.0));
        let q = ProjPoint3::new(*p.coords()).unwrap();
        assert_eq!(p, q);
        assert_eq!(ProjPoint3::<f64>::new([czero(); 4]), Err(Error::ZeroVector));
    }

    #[test]
    fn distance_ignores_scalars() {
        let p = [cx::<f64>(0.3, 0.1), cx(1.0, -2.0), cx(0.5, 0.0), cx(-1.0, 0.25)];
        let q: Vec<_> = p.iter().map(|x| x * cx(-2.0, 7.0)).collect();
        assert!(proj_dist(&p, &q) < 1e-15);
        let r = [cx::<f64>(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        let s = [cx::<f64>(0.0, 0.0), cx(0.0, 3.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        assert!((proj_dist(&r, &s) - 1.0).abs() < 1e-15);
        let t = [cx::<f64>(1.0, 0.0), cx(1e-9, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        assert!((proj_dist(&r, &t) - 1e-9).abs() < 1e-18);
    }
}
