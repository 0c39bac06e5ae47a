//! Small dense linear algebra: a complex one-sided Jacobi SVD and a real
//! 4×4 inverse. Sizes in this crate stay below a few hundred rows, so the
//! Jacobi method's cubic cost per sweep is not a concern and its high
//! relative accuracy on tiny singular values is what the nullspace fits need.

use crate::scalar::{czero, Cx, Real};

/// Dense complex matrix stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[Cx<T>]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), n_cols, "ragged rows");
            for (j, v) in r.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Cx<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn mul_vec(&self, x: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![czero(); self.rows];
        for (j, xj) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o = *o + *a * xj;
            }
        }
        out
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[j * self.rows + i]
    }
}

/// Singular values and right singular vectors of a complex matrix.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// Descending. Length equals the column count.
    pub singular_values: Vec<T>,
    /// `right_vectors[k]` is the right singular vector for `singular_values[k]`.
    pub right_vectors: Vec<Vec<Cx<T>>>,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of `a` are rotated pairwise until mutually orthogonal; the
/// accumulated rotations form `V`, and the final column norms are the
/// singular values. Matrices with fewer rows than columns are handled by
/// implicit zero padding.
pub fn svd<T: Real>(a: &CMatrix<T>) -> Svd<T> {
    let m = a.rows.max(a.cols);
    let n = a.cols;
    let mut cols: Vec<Vec<Cx<T>>> = (0..n)
        .map(|j| {
            let mut c = a.column(j).to_vec();
            c.resize(m, czero());
            c
        })
        .collect();
    let mut v: Vec<Vec<Cx<T>>> = (0..n)
        .map(|j| {
            let mut e = vec![czero(); n];
            e[j] = Cx::new(T::one(), T::zero());
            e
        })
        .collect();

    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = czero::<T>();
                    for (x, y) in cp.iter().zip(cq) {
                        alpha = alpha + x.norm_sqr();
                        beta = beta + y.norm_sqr();
                        gamma = gamma + x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if alpha == T::zero() || beta == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // e^{iφ}
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let conj_phase = phase.conj();
                rotate_pair(&mut cols, p, q, c, s, conj_phase);
                rotate_pair(&mut v, p, q, c, s, conj_phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(T, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt(), j))
        .collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));

    let singular_values = order.iter().map(|(s, _)| *s).collect();
    let right_vectors = order.iter().map(|(_, j)| v[*j].clone()).collect();
    Svd {
        singular_values,
        right_vectors,
    }
}

// col_p' = c col_p − s e^{−iφ} col_q ; col_q' = s col_p + c e^{−iφ} col_q
fn rotate_pair<T: Real>(cols: &mut [Vec<Cx<T>>], p: usize, q: usize, c: T, s: T, conj_phase: Cx<T>) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * conj_phase;
        let nx = *x * c - yq * s;
        let ny = *x * s + yq * c;
        *x = nx;
        *y = ny;
    }
}

/// Singular values only, descending.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Vec<T> {
    svd(a).singular_values
}

/// Inverse of a real 4×4 matrix by Gauss–Jordan elimination with partial
/// pivoting. Returns `None` when a pivot vanishes.
pub fn invert4<T: Real>(m: [[T; 4]; 4]) -> Option<[[T; 4]; 4]> {
    let mut a = m;
    let mut inv = [[T::zero(); 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = T::one();
    }
    for col in 0..4 {
        let pivot = (col..4).max_by(|&x, &y| {
            a[x][col]
                .abs()
                .partial_cmp(&a[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col] == T::zero() || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..4 {
            a[col][k] = a[col][k] / d;
            inv[col][k] = inv[col][k] / d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != T::zero() {
                    for k in 0..4 {
                        a[r][k] = a[r][k] - f * a[col][k];
                        inv[r][k] = inv[r][k] - f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}
