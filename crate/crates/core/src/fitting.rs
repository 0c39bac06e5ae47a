//! Numerical implicitization: monomial evaluation on projective samples and
//! nullspace extraction with singular-value diagnostics.

use crate::error::{Error, Result};
use crate::linalg::{svd, CMatrix};
use crate::projective::{normalize_max, proj_dist};
use crate::scalar::{cone, czero, Cx, Real};

/// Default ratio to the largest singular value below which a singular value
/// counts toward the nullity.
pub const DEFAULT_REL_THRESHOLD: f64 = 1e-8;

// Two normalized samples closer than this are treated as the same point.
const DUPLICATE_DIST: f64 = 1e-12;

/// Exponent vectors of all monomials of `degree` in `nvars` variables, in
/// graded-lex order: lexicographically descending, so `x₀^d` comes first.
pub fn monomial_exponents(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// `C(degree + nvars − 1, nvars − 1)`.
pub fn monomial_count(nvars: usize, degree: u32) -> usize {
    let (n, k) = (degree as usize + nvars - 1, nvars - 1);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn pow<T: Real>(x: Cx<T>, e: u32) -> Cx<T> {
    (0..e).fold(cone(), |acc, _| acc * x)
}

fn eval_monomials<T: Real>(p: &[Cx<T>], exps: &[Vec<u32>]) -> Vec<Cx<T>> {
    exps.iter()
        .map(|a| a.iter().zip(p).fold(cone(), |acc, (e, x)| acc * pow(*x, *e)))
        .collect()
}

/// All monomials of `degree` evaluated at `p`, in graded-lex order.
pub fn monomial_row<T: Real>(p: &[Cx<T>], degree: u32) -> Result<Vec<Cx<T>>> {
    if p.iter().all(|x| x.norm() == T::zero()) {
        return Err(Error::ZeroVector);
    }
    Ok(eval_monomials(p, &monomial_exponents(p.len(), degree)))
}

/// A homogeneous polynomial with coefficients on the graded-lex monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousForm<T> {
    pub nvars: usize,
    pub degree: u32,
    pub coefficients: Vec<Cx<T>>,
}

impl<T: Real> HomogeneousForm<T> {
    pub fn new(nvars: usize, degree: u32, coefficients: Vec<Cx<T>>) -> Result<Self> {
        if coefficients.len() != monomial_count(nvars, degree) {
            return Err(Error::Precondition(format!(
                "expected {} coefficients, got {}",
                monomial_count(nvars, degree),
                coefficients.len()
            )));
        }
        Ok(Self {
            nvars,
            degree,
            coefficients,
        })
    }

    pub fn exponents(&self) -> Vec<Vec<u32>> {
        monomial_exponents(self.nvars, self.degree)
    }

    pub fn eval(&self, x: &[Cx<T>]) -> Cx<T> {
        eval_monomials(x, &self.exponents())
            .iter()
            .zip(&self.coefficients)
            .fold(czero(), |acc, (m, c)| acc + m * c)
    }

    /// Analytic gradient `(∂F/∂x₀, …)`.
    pub fn gradient(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        let exps = self.exponents();
        let mut g = vec![czero(); self.nvars];
        for (a, c) in exps.iter().zip(&self.coefficients) {
            for (i, gi) in g.iter_mut().enumerate() {
                if a[i] == 0 {
                    continue;
                }
                let mut term = *c * T::lit(a[i] as f64);
                for (j, (e, xj)) in a.iter().zip(x).enumerate() {
                    let e = if j == i { e - 1 } else { *e };
                    term = term * pow(*xj, e);
                }
                *gi = *gi + term;
            }
        }
        g
    }
}

/// Result of a nullspace fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFit<T> {
    pub degree: u32,
    pub nvars: usize,
    /// Unit-norm singular vector of the smallest singular value, rotated so
    /// its largest-modulus entry is real and positive.
    pub coefficients: Vec<Cx<T>>,
    /// Descending; one per monomial.
    pub singular_values: Vec<T>,
    pub nullity: usize,
    /// Max `|F(p)|` over the held-out normalized points.
    pub residual: T,
    /// Unit singular vectors spanning the numerical nullspace, smallest last.
    pub null_basis: Vec<Vec<Cx<T>>>,
    pub n_train: usize,
    pub n_holdout: usize,
}

impl<T: Real> FormFit<T> {
    pub fn form(&self) -> HomogeneousForm<T> {
        HomogeneousForm {
            nvars: self.nvars,
            degree: self.degree,
            coefficients: self.coefficients.clone(),
        }
    }

    /// Ratio of the smallest non-null singular value to the largest null one.
    /// Infinite when the nullspace is empty or exact.
    pub fn gap_ratio(&self) -> f64 {
        let n = self.singular_values.len();
        if self.nullity == 0 || self.nullity >= n {
            return f64::INFINITY;
        }
        let lo = self.singular_values[n - self.nullity].as_f64();
        let hi = self.singular_values[n - self.nullity - 1].as_f64();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    /// Singular values relative to the largest.
    pub fn relative_singular_values(&self) -> Vec<f64> {
        let top = self.singular_values.first().map_or(1.0, |s| s.as_f64());
        self.singular_values.iter().map(|s| s.as_f64() / top).collect()
    }

    /// The `k` smallest relative singular values, smallest last.
    pub fn smallest_relative(&self, k: usize) -> Vec<f64> {
        let r = self.relative_singular_values();
        r[r.len().saturating_sub(k)..].to_vec()
    }
}

/// Rotates `v` so that its largest-modulus entry is real and positive.
pub fn align_phase<T: Real>(v: &[Cx<T>]) -> Vec<Cx<T>> {
    let k = (0..v.len())
        .max_by(|&i, &j| v[i].norm().partial_cmp(&v[j].norm()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    let m = v[k].norm();
    if m == T::zero() {
        return v.to_vec();
    }
    let ph = v[k].conj() / m;
    v.iter().map(|x| x * ph).collect()
}

/// Minimal sample count accepted by [`fit_null`] for `cols` monomials.
pub fn min_points_for(cols: usize) -> usize {
    let mut n = cols + 10;
    while n - n / 5 < cols {
        n += 1;
    }
    n
}

fn normalized<T: Real, P: AsRef<[Cx<T>]>>(points: &[P]) -> Result<Vec<Vec<Cx<T>>>> {
    points.iter().map(|p| normalize_max(p.as_ref())).collect()
}

fn check_duplicates<T: Real>(pts: &[Vec<Cx<T>>]) -> Result<()> {
    for i in 0..pts.len() {
        for j in 0..i {
            if proj_dist(&pts[i], &pts[j]).as_f64() < DUPLICATE_DIST {
                return Err(Error::DegenerateSample);
            }
        }
    }
    Ok(())
}

/// Fits the nullspace of the monomial matrix of `points`; every fifth point
/// (indices 4, 9, 14, …) is held out and only used for the residual.
pub fn fit_null<T: Real, P: AsRef<[Cx<T>]>>(points: &[P], degree: u32, rel_threshold: f64) -> Result<FormFit<T>> {
    let nvars = points.first().map_or(0, |p| p.as_ref().len());
    let cols = monomial_count(nvars.max(1), degree);
    let need = min_points_for(cols);
    if points.len() < need {
        return Err(Error::InsufficientSamples {
            need,
            got: points.len(),
        });
    }
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if i % 5 == 4 {
            holdout.push(p.as_ref().to_vec());
        } else {
            train.push(p.as_ref().to_vec());
        }
    }
    fit_null_split(&train, &holdout, degree, rel_threshold)
}

/// Nullspace fit on `train` with the residual measured on `holdout`.
pub fn fit_null_split<T: Real, P: AsRef<[Cx<T>]>>(train: &[P], holdout: &[P], degree: u32, rel_threshold: f64) -> Result<FormFit<T>> {
    let nvars = train.first().map_or(0, |p| p.as_ref().len());
    if nvars == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    if train.iter().chain(holdout).any(|p| p.as_ref().len() != nvars) {
        return Err(Error::Precondition("points of mixed dimension".into()));
    }
    let cols = monomial_count(nvars, degree);
    if train.len() < cols {
        return Err(Error::InsufficientSamples {
            need: cols,
            got: train.len(),
        });
    }
    let train = normalized(train)?;
    let holdout = normalized(holdout)?;
    check_duplicates(&train)?;
    let exps = monomial_exponents(nvars, degree);
    let rows: Vec<Vec<Cx<T>>> = train.iter().map(|p| eval_monomials(p, &exps)).collect();
    let dec = svd(&CMatrix::from_rows(&rows));
    let top = dec.singular_values[0];
    let nullity = dec
        .singular_values
        .iter()
        .filter(|s| s.as_f64() < rel_threshold * top.as_f64())
        .count();
    let coefficients = align_phase(dec.right_vectors.last().expect("at least one column"));
    let null_basis = dec.right_vectors[cols - nullity..].to_vec();
    let form = HomogeneousForm {
        nvars,
        degree,
        coefficients: coefficients.clone(),
    };
    let residual = holdout.iter().fold(T::zero(), |m, p| m.max(form.eval(p).norm()));
    Ok(FormFit {
        degree,
        nvars,
        coefficients,
        singular_values: dec.singular_values,
        nullity,
        residual,
        null_basis,
        n_train: train.len(),
        n_holdout: holdout.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn monomial_counts_and_order() {
        assert_eq!(monomial_exponents(4, 4).len(), 35);
        assert_eq!(monomial_exponents(4, 2).len(), 10);
        assert_eq!(monomial_exponents(5, 5).len(), 126);
        assert_eq!(monomial_count(5, 5), 126);
        let e = monomial_exponents(4, 2);
        assert_eq!(e[0], vec![2, 0, 0, 0]);
        assert_eq!(e[1], vec![1, 1, 0, 0]);
        assert_eq!(e[9], vec![0, 0, 0, 2]);
    }

    #[test]
    fn row_at_coordinate_point_is_indicator() {
        let p = [cx::<f64>(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        let r = monomial_row(&p, 4).unwrap();
        assert_eq!(r[0], cx(1.0, 0.0));
        assert!(r[1..].iter().all(|v| v.norm() == 0.0));
        assert_eq!(monomial_row(&[cx::<f64>(0.0, 0.0); 4], 2), Err(Error::ZeroVector));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let coeffs: Vec<Cx<f64>> = (0..35).map(|k| cx((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let f = HomogeneousForm::new(4, 4, coeffs).unwrap();
        let x = [cx(0.3, 0.1), cx(-0.7, 0.2), cx(1.0, 0.0), cx(0.2, -0.4)];
        let g = f.gradient(&x);
        let h = 1e-6;
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.eval(&xp) - f.eval(&xm)) / (2.0 * h);
            assert!((fd - g[i]).norm() < 1e-7);
        }
        // Euler: Σ xᵢ ∂ᵢF = d·F
        let euler: Cx<f64> = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        assert!((euler - f.eval(&x) * 4.0).norm() < 1e-12);
    }

    #[test]
    fn insufficient_samples_reported() {
        let pts = vec![vec![cx::<f64>(1.0, 0.0), cx(0.5, 0.0), cx(0.2, 0.0), cx(0.1, 0.0)]; 5];
        assert_eq!(
            fit_null::<f64, _>(&pts, 2, DEFAULT_REL_THRESHOLD),
            Err(Error::InsufficientSamples { need: 20, got: 5 })
        );
        assert_eq!(min_points_for(35), 45);
        assert_eq!(min_points_for(126), 157);
    }
}
