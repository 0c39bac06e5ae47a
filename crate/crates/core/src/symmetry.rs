//! The level-(2,2) Heisenberg group acting on `P³` and the invariant
//! quartics.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fitting::{monomial_exponents, HomogeneousForm};
use crate::lattice::SiegelPoint;
use crate::linalg::{singular_values, CMatrix};
use crate::projective::{proj_dist, ProjPoint3};
use crate::sampling::TorusSampler;
use crate::scalar::{creal, czero, max_modulus, Cx, Real};
use crate::sections::{to_g_basis, SectionEvaluator};
use crate::theta::ThetaConfig;

pub type SignedPerm = [[i8; 4]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum H22Name {
    Sigma1,
    Sigma2,
    Tau1,
    Tau2,
}

impl H22Name {
    pub const ALL: [H22Name; 4] = [H22Name::Sigma1, H22Name::Sigma2, H22Name::Tau1, H22Name::Tau2];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Sigma1 => "sigma1",
            Self::Sigma2 => "sigma2",
            Self::Tau1 => "tau1",
            Self::Tau2 => "tau2",
        }
    }
}

impl fmt::Display for H22Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for H22Name {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma1" => Ok(Self::Sigma1),
            "sigma2" => Ok(Self::Sigma2),
            "tau1" => Ok(Self::Tau1),
            "tau2" => Ok(Self::Tau2),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct H22Generator {
    pub name: H22Name,
    /// Row `i` gives the new coordinate `yᵢ` in terms of the old ones.
    pub matrix: SignedPerm,
}

/// Matrix of the coordinate substitution named `name`.
pub fn generator_matrix(name: H22Name) -> SignedPerm {
    match name {
        // (z₀:z₁:z₂:z₃) ↦ (z₂:z₃:z₀:z₁)
        H22Name::Sigma1 => [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]],
        // ↦ (z₁:z₀:z₃:z₂)
        H22Name::Sigma2 => [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        // ↦ (z₀:z₁:−z₂:−z₃)
        H22Name::Tau1 => [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]],
        // ↦ (z₀:−z₁:z₂:−z₃)
        H22Name::Tau2 => [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]],
    }
}

pub fn generator(name: H22Name) -> H22Generator {
    H22Generator {
        name,
        matrix: generator_matrix(name),
    }
}

pub fn parse_generator(name: &str) -> Result<H22Generator> {
    name.parse().map(generator)
}

pub fn mat_mul(a: &SignedPerm, b: &SignedPerm) -> SignedPerm {
    let mut c = [[0i8; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub const IDENTITY: SignedPerm = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];

fn neg(a: &SignedPerm) -> SignedPerm {
    a.map(|r| r.map(|v| -v))
}

/// `a = ±b`.
pub fn equal_up_to_sign(a: &SignedPerm, b: &SignedPerm) -> bool {
    a == b || *a == neg(b)
}

/// Closure of the four generators under multiplication, as linear maps.
pub fn linear_group() -> Vec<SignedPerm> {
    let gens = H22Name::ALL.map(generator_matrix);
    let mut seen: BTreeSet<SignedPerm> = BTreeSet::new();
    seen.insert(IDENTITY);
    let mut frontier = vec![IDENTITY];
    while let Some(g) = frontier.pop() {
        for h in &gens {
            let p = mat_mul(h, &g);
            if seen.insert(p) {
                frontier.push(p);
            }
        }
    }
    seen.into_iter().collect()
}

/// Translations by half periods `e_k/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfPeriod {
    E1,
    E2,
    E3,
    E4,
}

impl HalfPeriod {
    pub const ALL: [HalfPeriod; 4] = [HalfPeriod::E1, HalfPeriod::E2, HalfPeriod::E3, HalfPeriod::E4];

    /// Generator index `k` of `e_k`.
    pub fn index(&self) -> usize {
        match self {
            Self::E1 => 1,
            Self::E2 => 2,
            Self::E3 => 3,
            Self::E4 => 4,
        }
    }
}

/// Projective action of `z ↦ z + e_k/2` on `(ĝ₀:ĝ₁:ĝ₂:ĝ₃)`.
pub fn expected_translation_action(t: HalfPeriod) -> H22Generator {
    generator(match t {
        HalfPeriod::E1 => H22Name::Sigma1,
        HalfPeriod::E2 => H22Name::Sigma2,
        HalfPeriod::E3 => H22Name::Tau1,
        HalfPeriod::E4 => H22Name::Tau2,
    })
}

/// Worst projective residuals found by [`verify_equivariance`].
#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    /// `proj_dist(φ(z + e_k/2), M_k φ(z))` per half period, `k = 1..4`.
    pub half_periods: [(HalfPeriod, H22Name, f64); 4],
    /// `proj_dist(φ(z + e₁), φ(z))`.
    pub full_period: f64,
    /// `proj_dist(φ(ι_ω z), φ(z))`.
    pub involution: f64,
    pub trials: usize,
}

impl EquivarianceReport {
    pub fn max_residual(&self) -> f64 {
        self.half_periods
            .iter()
            .map(|h| h.2)
            .fold(self.full_period.max(self.involution), f64::max)
    }
}

/// Relative size below which all four `ĝ` count as vanishing.
pub const BASE_LOCUS_REL: f64 = 1e-8;

/// `ĝ(z)` normalized, or `None` on the base locus.
fn phi_or_base<T: Real>(eval: &SectionEvaluator<T>, z: &[Cx<T>; 2]) -> Result<Option<ProjPoint3<T>>> {
    let s = eval.values(z)?;
    let g = to_g_basis(&s).g;
    if max_modulus(&g) < T::lit(BASE_LOCUS_REL) * max_modulus(&s) {
        return Ok(None);
    }
    Ok(Some(ProjPoint3::new(g)?))
}

/// Max projective residual of the half-period, full-period and involution
/// actions over `trials` sampled points.
pub fn verify_equivariance<T: Real>(tau: &SiegelPoint<T>, trials: usize, seed: u64, cfg: &ThetaConfig) -> Result<EquivarianceReport> {
    let eval = SectionEvaluator::new(tau, cfg)?;
    let mut sampler = TorusSampler::new(&eval.period, seed);
    let mut half = HalfPeriod::ALL.map(|h| (h, expected_translation_action(h).name, 0.0f64));
    let mut full = 0.0f64;
    let mut invol = 0.0f64;
    let mut done = 0;
    let budget = 100 * trials.max(1);
    let mut draws = 0;
    while done < trials {
        draws += 1;
        if draws > budget {
            return Err(Error::SamplingExhausted(budget));
        }
        let z = sampler.next_z();
        let Some(p) = phi_or_base(&eval, &z)? else { continue };
        let mut images = Vec::with_capacity(6);
        for h in HalfPeriod::ALL {
            let t = eval.period.half_period(h.index());
            images.push(phi_or_base(&eval, &[z[0] + t[0], z[1] + t[1]])?);
        }
        let e1 = eval.period.generators[0];
        images.push(phi_or_base(&eval, &[z[0] + e1[0], z[1] + e1[1]])?);
        images.push(phi_or_base(&eval, &eval.period.involution(&z))?);
        if images.iter().any(Option::is_none) {
            continue;
        }
        let images: Vec<ProjPoint3<T>> = images.into_iter().flatten().collect();
        for (k, h) in HalfPeriod::ALL.iter().enumerate() {
            let m = expected_translation_action(*h).matrix;
            let d = images[k].dist(&p.transform(&m)).as_f64();
            half[k].2 = half[k].2.max(d);
        }
        full = full.max(images[4].dist(&p).as_f64());
        invol = invol.max(images[5].dist(&p).as_f64());
        done += 1;
    }
    Ok(EquivarianceReport {
        half_periods: half,
        full_period: full,
        involution: invol,
        trials,
    })
}

/// Monomial supports of the invariant basis `q₀ … q₄`.
pub fn invariant_supports() -> [Vec<[u32; 4]>; 5] {
    [
        vec![[4, 0, 0, 0], [0, 4, 0, 0], [0, 0, 4, 0], [0, 0, 0, 4]],
        vec![[2, 2, 0, 0], [0, 0, 2, 2]],
        vec![[2, 0, 2, 0], [0, 2, 0, 2]],
        vec![[2, 0, 0, 2], [0, 2, 2, 0]],
        vec![[1, 1, 1, 1]],
    ]
}

/// Coefficients `λ` on `q₀ … q₄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantQuartic<T> {
    pub lambda: [Cx<T>; 5],
}

fn monomial_index(exps: &[Vec<u32>], a: &[u32]) -> usize {
    exps.iter().position(|e| e.as_slice() == a).expect("monomial of matching degree")
}

/// 35×5 expansion matrix; column `i` is `qᵢ` on the graded-lex monomials.
pub fn invariant_expansion() -> Vec<[u8; 5]> {
    let exps = monomial_exponents(4, 4);
    let mut m = vec![[0u8; 5]; exps.len()];
    for (i, sup) in invariant_supports().iter().enumerate() {
        for a in sup {
            m[monomial_index(&exps, a)][i] = 1;
        }
    }
    m
}

pub fn invariant_to_full<T: Real>(q: &InvariantQuartic<T>) -> HomogeneousForm<T> {
    let e = invariant_expansion();
    let coefficients = e
        .iter()
        .map(|row| {
            row.iter()
                .zip(&q.lambda)
                .fold(czero(), |acc, (w, l)| acc + l * T::lit(*w as f64))
        })
        .collect();
    HomogeneousForm {
        nvars: 4,
        degree: 4,
        coefficients,
    }
}

/// Orthogonal projection of a quartic onto `span(q₀ … q₄)`, returning `λ`
/// and the norm of the discarded component.
pub fn project_to_invariant<T: Real>(coefficients: &[Cx<T>]) -> (InvariantQuartic<T>, T) {
    let e = invariant_expansion();
    let mut lambda = [czero::<T>(); 5];
    for (i, l) in lambda.iter_mut().enumerate() {
        let mut sum = czero();
        let mut count = 0;
        for (row, c) in e.iter().zip(coefficients) {
            if row[i] == 1 {
                sum = sum + c;
                count += 1;
            }
        }
        *l = sum / T::lit(count as f64);
    }
    let q = InvariantQuartic { lambda };
    let full = invariant_to_full(&q);
    let resid = coefficients
        .iter()
        .zip(&full.coefficients)
        .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr())
        .sqrt();
    (q, resid)
}

/// `F ∘ M`, the form pulled back along a signed permutation.
pub fn substitute<T: Real>(f: &HomogeneousForm<T>, m: &SignedPerm) -> HomogeneousForm<T> {
    let exps = f.exponents();
    let mut out = vec![czero::<T>(); exps.len()];
    for (a, c) in exps.iter().zip(&f.coefficients) {
        // (Mx)ᵢ = sᵢ x_{π(i)}
        let mut b = vec![0u32; f.nvars];
        let mut sign = 1i32;
        for (i, row) in m.iter().enumerate().take(f.nvars) {
            let j = row.iter().position(|v| *v != 0).expect("signed permutation row");
            b[j] += a[i];
            if row[j] < 0 && a[i] % 2 == 1 {
                sign = -sign;
            }
        }
        let k = monomial_index(&exps, &b);
        out[k] = out[k] + c * T::lit(sign as f64);
    }
    HomogeneousForm {
        nvars: f.nvars,
        degree: f.degree,
        coefficients: out,
    }
}

/// Dimension of the space of degree-`d` forms fixed by every element of the
/// linear group, computed as the rank of the group average.
pub fn fixed_subspace_dimension(degree: u32) -> usize {
    let group = linear_group();
    let exps = monomial_exponents(4, degree);
    let n = exps.len();
    let mut avg = CMatrix::<f64>::zeros(n, n);
    for g in &group {
        for (j, _) in exps.iter().enumerate() {
            let mut basis = vec![czero::<f64>(); n];
            basis[j] = creal(1.0);
            let img = substitute(
                &HomogeneousForm {
                    nvars: 4,
                    degree,
                    coefficients: basis,
                },
                g,
            );
            for (i, v) in img.coefficients.iter().enumerate() {
                avg[(i, j)] += v / group.len() as f64;
            }
        }
    }
    let sv = singular_values(&avg);
    sv.iter().filter(|s| **s > 0.5).count()
}

/// Cosine between a form and its pullback along each generator.
pub fn invariance_cosines<T: Real>(f: &HomogeneousForm<T>) -> [(H22Name, T); 4] {
    H22Name::ALL.map(|n| {
        let g = substitute(f, &generator_matrix(n));
        (n, T::one() - proj_dist(&f.coefficients, &g.coefficients))
    })
}
