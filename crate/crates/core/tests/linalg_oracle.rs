//! The local SVD and the symmetry rank claims checked against nalgebra.

mod common;

use common::c64 as cx;
use kummer_core::linalg::{singular_values, svd, CMatrix};
use kummer_core::scalar::Cx;
use kummer_core::symmetry::{fixed_subspace_dimension, invariant_expansion, linear_group};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

fn reference_singular_values(rows: &[Vec<Cx<f64>>]) -> Vec<f64> {
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

fn random_rows(seed: u64, r: usize, c: usize) -> Vec<Vec<Cx<f64>>> {
    let mut rng = common::rng(seed);
    (0..r)
        .map(|_| (0..c).map(|_| cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn singular_values_match_reference(seed in any::<u64>(), r in 1usize..30, c in 1usize..12) {
        let rows = random_rows(seed, r, c);
        let ours = singular_values(&CMatrix::from_rows(&rows));
        let theirs = reference_singular_values(&rows);
        for (k, t) in theirs.iter().enumerate() {
            prop_assert!((ours[k] - t).abs() <= 1e-12 * theirs[0].max(1.0), "{} vs {}", ours[k], t);
        }
        for extra in &ours[theirs.len()..] {
            prop_assert!(extra.abs() <= 1e-12 * theirs[0].max(1.0));
        }
    }

    #[test]
    fn right_vectors_are_orthonormal_and_annihilate(seed in any::<u64>()) {
        // A 10×6 matrix of rank 4: the last two right vectors span its kernel.
        let a = random_rows(seed, 10, 4);
        let b = random_rows(seed ^ 1, 4, 6);
        let rows: Vec<Vec<Cx<f64>>> = a
            .iter()
            .map(|ar| (0..6).map(|j| (0..4).map(|k| ar[k] * b[k][j]).sum()).collect())
            .collect();
        let m = CMatrix::from_rows(&rows);
        let s = svd(&m);
        prop_assert!(s.singular_values[4] < 1e-12 * s.singular_values[0]);
        for k in 4..6 {
            let v = &s.right_vectors[k];
            let mv = m.mul_vec(v);
            prop_assert!(mv.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() < 1e-12 * s.singular_values[0]);
        }
        for i in 0..6 {
            for j in 0..6 {
                let d: Cx<f64> = s.right_vectors[i].iter().zip(&s.right_vectors[j]).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - cx(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn invariant_expansion_has_rank_five() {
    let e = invariant_expansion();
    let m = DMatrix::from_fn(e.len(), 5, |i, j| e[i][j] as f64);
    assert_eq!(m.rank(1e-10), 5);
}

#[test]
fn averaged_group_action_fixes_five_quartics() {
    // Averaging the 32 signed permutations over monomials gives a projector
    // onto the invariant forms; its trace is their dimension.
    let exps = kummer_core::fitting::monomial_exponents(4, 4);
    let n = exps.len();
    let mut p = DMatrix::<f64>::zeros(n, n);
    let group = linear_group();
    assert_eq!(group.len(), 32);
    for g in &group {
        for (j, e) in exps.iter().enumerate() {
            // x ↦ Mx sends the monomial xᵉ to ±x^{e∘perm}.
            let mut img = [0u32; 4];
            let mut sign = 1.0;
            for (i, row) in g.iter().enumerate() {
                let k = row.iter().position(|v| *v != 0).unwrap();
                img[k] += e[i];
                if row[k] < 0 && e[i] % 2 == 1 {
                    sign = -sign;
                }
            }
            let i = exps.iter().position(|x| x.as_slice() == img).unwrap();
            p[(i, j)] += sign / group.len() as f64;
        }
    }
    assert!((&p * &p - &p).norm() < 1e-12);
    assert!((p.trace() - 5.0).abs() < 1e-12);
    assert_eq!(p.rank(1e-10), fixed_subspace_dimension(4));
}
