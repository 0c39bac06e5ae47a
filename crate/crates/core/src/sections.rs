//! The twelve sections `ŝ_αβ`, `(α, β) ∈ Z/2 × Z/6`, their odd combinations
//! and the limit sections on the corank-1 boundary.
//!
//! `ŝ_αβ(τ, z) = Θ_{0,0; α/2, β/6}(τ′, z′ − ω′)` with
//! `τ′ = [[τ₁/2, τ₂/6], [τ₂/6, τ₃/18]]`, `z′ = (z₁/2, z₂/6)` and
//! `ω′ = (ω₁/2, ω₂/6)`. Values are stored at index `6α + β`.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::lattice::{reduce_mod_lattice, ComplexTorusPoint, PeriodData, SiegelPoint};
use crate::linalg::{svd, CMatrix};
use crate::scalar::{cis2pi, is_finite_cx, max_modulus, norm2, Cx, Real};
use crate::theta::{sixth_roots, theta1, theta2_sections, CMat2, ThetaConfig};

/// Index `(α, β)` reduced into `Z/2 × Z/6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectionIndex {
    pub alpha: u8,
    pub beta: u8,
}

impl SectionIndex {
    pub fn new(alpha: i64, beta: i64) -> Self {
        Self {
            alpha: alpha.rem_euclid(2) as u8,
            beta: beta.rem_euclid(6) as u8,
        }
    }

    pub fn from_flat(k: usize) -> Self {
        Self::new((k / 6) as i64, (k % 6) as i64)
    }

    pub fn flat(&self) -> usize {
        6 * self.alpha as usize + self.beta as usize
    }

    pub fn neg(&self) -> Self {
        Self::new(-(self.alpha as i64), -(self.beta as i64))
    }

    pub fn shift(&self, da: i64, db: i64) -> Self {
        Self::new(self.alpha as i64 + da, self.beta as i64 + db)
    }

    pub fn all() -> impl Iterator<Item = SectionIndex> {
        (0..12).map(Self::from_flat)
    }
}

/// Indices `(0,1), (0,2), (1,1), (1,2)` of the odd basis `t̂`.
pub const ODD_INDICES: [SectionIndex; 4] = [
    SectionIndex { alpha: 0, beta: 1 },
    SectionIndex { alpha: 0, beta: 2 },
    SectionIndex { alpha: 1, beta: 1 },
    SectionIndex { alpha: 1, beta: 2 },
];

/// Representatives of the eight classes `{(α,β), (−α,−β)}` spanning the even part.
pub const EVEN_INDICES: [SectionIndex; 8] = [
    SectionIndex { alpha: 0, beta: 0 },
    SectionIndex { alpha: 0, beta: 1 },
    SectionIndex { alpha: 0, beta: 2 },
    SectionIndex { alpha: 0, beta: 3 },
    SectionIndex { alpha: 1, beta: 0 },
    SectionIndex { alpha: 1, beta: 1 },
    SectionIndex { alpha: 1, beta: 2 },
    SectionIndex { alpha: 1, beta: 3 },
];

/// Section values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionVector<T> {
    pub values: [Cx<T>; 12],
    /// Evaluation point as given, before any reduction.
    pub z: [Cx<T>; 2],
    pub at: ComplexTorusPoint<T>,
    pub tau: SiegelPoint<T>,
}

impl<T: Real> SectionVector<T> {
    pub fn get(&self, alpha: i64, beta: i64) -> Cx<T> {
        self.values[SectionIndex::new(alpha, beta).flat()]
    }

    pub fn scale(&self) -> T {
        max_modulus(&self.values)
    }
}

/// Precomputed data for repeated evaluation at a fixed `τ`.
#[derive(Debug, Clone)]
pub struct SectionEvaluator<T> {
    pub tau: SiegelPoint<T>,
    pub period: PeriodData<T>,
    pub tau_prime: CMat2<T>,
    pub omega_prime: [Cx<T>; 2],
    pub cfg: ThetaConfig,
}

impl<T: Real> SectionEvaluator<T> {
    pub fn new(tau: &SiegelPoint<T>, cfg: &ThetaConfig) -> Result<Self> {
        cfg.validate()?;
        let period = PeriodData::new(tau)?;
        let omega_prime = [period.omega[0] / T::lit(2.0), period.omega[1] / T::lit(6.0)];
        Ok(Self {
            tau: *tau,
            tau_prime: period.tau_prime,
            omega_prime,
            period,
            cfg: *cfg,
        })
    }

    /// Raw values, index `6α + β`.
    pub fn values(&self, z: &[Cx<T>; 2]) -> Result<[Cx<T>; 12]> {
        if !z.iter().all(|v| is_finite_cx(*v)) {
            return Err(Error::InvalidCoordinate);
        }
        let w = [
            z[0] / T::lit(2.0) - self.omega_prime[0],
            z[1] / T::lit(6.0) - self.omega_prime[1],
        ];
        theta2_sections(&self.tau_prime, &w, &self.cfg).map(|(v, _)| v)
    }

    pub fn eval(&self, z: &[Cx<T>; 2]) -> Result<SectionVector<T>> {
        let values = self.values(z)?;
        Ok(SectionVector {
            values,
            z: *z,
            at: reduce_mod_lattice(z, &self.period)?,
            tau: self.tau,
        })
    }

    /// `ĝ(z)`.
    pub fn g(&self, z: &[Cx<T>; 2]) -> Result<GVector<T>> {
        self.values(z).map(|v| to_g_basis(&v))
    }
}

pub fn eval_sections<T: Real>(tau: &SiegelPoint<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<SectionVector<T>> {
    SectionEvaluator::new(tau, cfg)?.eval(z)
}

/// `(ĝ₀, ĝ₁, ĝ₂, ĝ₃)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GVector<T> {
    pub g: [Cx<T>; 4],
}

/// Rows of the `ĝ`-from-`t̂` matrix, columns ordered `t̂₀₁, t̂₀₂, t̂₁₁, t̂₁₂`.
pub const G_FROM_T: [[i8; 4]; 4] = [
    [1, -1, 1, -1],
    [-1, -1, -1, -1],
    [1, -1, -1, 1],
    [-1, -1, 1, 1],
];

/// `t̂_αβ = ŝ_αβ − ŝ_{−α,−β}` for the four odd indices.
pub fn odd_part<T: Real>(s: &[Cx<T>; 12]) -> [Cx<T>; 4] {
    ODD_INDICES.map(|i| s[i.flat()] - s[i.neg().flat()])
}

/// `û_αβ = ŝ_αβ + ŝ_{−α,−β}` for the eight even representatives.
pub fn even_part<T: Real>(s: &[Cx<T>; 12]) -> [Cx<T>; 8] {
    EVEN_INDICES.map(|i| s[i.flat()] + s[i.neg().flat()])
}

pub fn to_g_basis<T: Real>(s: &[Cx<T>; 12]) -> GVector<T> {
    let t = odd_part(s);
    let g = G_FROM_T.map(|row| {
        row.iter()
            .zip(&t)
            .fold(Cx::new(T::zero(), T::zero()), |acc, (c, v)| acc + v * T::lit(*c as f64))
    });
    GVector { g }
}

/// Numerical ranks of the two `ι_ω`-eigenspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSplit {
    pub plus_rank: usize,
    pub minus_rank: usize,
    pub plus_singular_values: Vec<f64>,
    pub minus_singular_values: Vec<f64>,
    /// `σ₈/σ₉` of the even matrix.
    pub plus_gap: f64,
    /// `σ₄/σ₅` of the odd matrix.
    pub minus_gap: f64,
}

/// Relative threshold for numerical rank.
pub const RANK_REL_THRESHOLD: f64 = 1e-8;

pub const MIN_EIGEN_SPLIT_POINTS: usize = 40;

fn numerical_rank<T: Real>(sv: &[T], rel: f64) -> usize {
    let top = sv.first().copied().unwrap_or(T::zero());
    sv.iter().filter(|s| s.as_f64() > rel * top.as_f64()).count()
}

fn gap(sv: &[f64], k: usize) -> f64 {
    if k == 0 || k >= sv.len() {
        return f64::INFINITY;
    }
    if sv[k] == 0.0 {
        f64::INFINITY
    } else {
        sv[k - 1] / sv[k]
    }
}

/// Singular values of the matrix whose rows are the given vectors scaled to
/// unit norm. Row scaling leaves the rank unchanged and removes the large
/// dynamic range of theta values across a fundamental domain.
pub fn normalized_row_singular_values<T: Real>(rows: &[Vec<Cx<T>>]) -> Vec<T> {
    let scaled: Vec<Vec<Cx<T>>> = rows
        .iter()
        .map(|r| {
            let n = norm2(r);
            r.iter().map(|v| v / n).collect()
        })
        .collect();
    svd(&CMatrix::from_rows(&scaled)).singular_values
}

/// Ranks of the `ι_ω`-even and odd parts of the section space.
///
/// For each sample `z` the rows `ŝ(z) ± ŝ(ι_ω z)` are evaluations of the
/// symmetrized and antisymmetrized sections; their spans have dimension 8
/// and 4 for generic `τ`.
pub fn eigen_split<T: Real>(eval: &SectionEvaluator<T>, zs: &[[Cx<T>; 2]]) -> Result<EigenSplit> {
    if zs.len() < MIN_EIGEN_SPLIT_POINTS {
        return Err(Error::InsufficientSamples {
            need: MIN_EIGEN_SPLIT_POINTS,
            got: zs.len(),
        });
    }
    let mut plus = Vec::with_capacity(zs.len());
    let mut minus = Vec::with_capacity(zs.len());
    for z in zs {
        let a = eval.values(z)?;
        let b = eval.values(&eval.period.involution(z))?;
        plus.push(a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>());
        minus.push(a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>());
    }
    let sp: Vec<f64> = normalized_row_singular_values(&plus).iter().map(|s| s.as_f64()).collect();
    let sm: Vec<f64> = normalized_row_singular_values(&minus).iter().map(|s| s.as_f64()).collect();
    let plus_rank = numerical_rank(&sp, RANK_REL_THRESHOLD);
    let minus_rank = numerical_rank(&sm, RANK_REL_THRESHOLD);
    if (plus_rank, minus_rank) != (8, 4) {
        let mut singular_values = sp.clone();
        singular_values.extend(&sm);
        return Err(Error::RankDeficiency {
            plus: plus_rank,
            minus: minus_rank,
            singular_values,
        });
    }
    Ok(EigenSplit {
        plus_rank,
        minus_rank,
        plus_gap: gap(&sp, 8),
        minus_gap: gap(&sm, 4),
        plus_singular_values: sp,
        minus_singular_values: sm,
    })
}

/// Maximal deviation of the ratios `a_k / (m_k b_k)` from a common value.
///
/// The pivot is the entry of largest `|b_k|`; entries with
/// `|b_k| < 1e-8·max|b|` are skipped.
pub fn common_factor_residual<T: Real>(a: &[Cx<T>], b: &[Cx<T>], m: &[Cx<T>]) -> T {
    let bmax = max_modulus(b);
    let floor = T::lit(1e-8) * bmax;
    let pivot = (0..b.len())
        .max_by(|&i, &j| b[i].norm().partial_cmp(&b[j].norm()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty");
    let ratio = |k: usize| a[k] / (m[k] * b[k]);
    let rp = ratio(pivot);
    let mut worst = T::zero();
    for k in 0..b.len() {
        if b[k].norm() < floor {
            continue;
        }
        worst = worst.max((ratio(k) - rp).norm() / rp.norm());
    }
    worst
}

/// Residuals of the four generating Heisenberg actions on the sections.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeisenbergResiduals {
    /// `ŝ_αβ(z + e₁/2) ∝ (−1)^α ŝ_αβ(z)`.
    pub e1_half: f64,
    /// `ŝ_αβ(z + e₂/6) ∝ ρ₆^{−β} ŝ_αβ(z)`.
    pub e2_sixth: f64,
    /// `ŝ_αβ(z + e₃/2) ∝ ŝ_{α+1,β}(z)`.
    pub e3_half: f64,
    /// `ŝ_αβ(z + e₄/6) ∝ ŝ_{α,β+1}(z)`.
    pub e4_sixth: f64,
}

impl HeisenbergResiduals {
    pub fn max(&self) -> f64 {
        self.e1_half.max(self.e2_sixth).max(self.e3_half).max(self.e4_sixth)
    }

    fn merge(self, o: Self) -> Self {
        Self {
            e1_half: self.e1_half.max(o.e1_half),
            e2_sixth: self.e2_sixth.max(o.e2_sixth),
            e3_half: self.e3_half.max(o.e3_half),
            e4_sixth: self.e4_sixth.max(o.e4_sixth),
        }
    }
}

/// Checks the Heisenberg actions at every sample point and returns the
/// worst residual per generator.
pub fn verify_heisenberg_sections<T: Real>(eval: &SectionEvaluator<T>, zs: &[[Cx<T>; 2]]) -> Result<HeisenbergResiduals> {
    let e = &eval.period.generators;
    let frac = |k: usize, d: f64| [e[k][0] / T::lit(d), e[k][1] / T::lit(d)];
    let add = |z: &[Cx<T>; 2], t: [Cx<T>; 2]| [z[0] + t[0], z[1] + t[1]];
    let roots = sixth_roots::<T>();
    let ones = [Cx::new(T::one(), T::zero()); 12];
    let sign_alpha: [Cx<T>; 12] =
        std::array::from_fn(|k| if k >= 6 { Cx::new(-T::one(), T::zero()) } else { Cx::new(T::one(), T::zero()) });
    let rho_neg_beta: [Cx<T>; 12] = std::array::from_fn(|k| roots[(6 - k % 6) % 6]);
    let mut out = HeisenbergResiduals::default();
    for z in zs {
        let s = eval.values(z)?;
        let s1 = eval.values(&add(z, frac(0, 2.0)))?;
        let s2 = eval.values(&add(z, frac(1, 6.0)))?;
        let s3 = eval.values(&add(z, frac(2, 2.0)))?;
        let s4 = eval.values(&add(z, frac(3, 6.0)))?;
        let shifted_a: [Cx<T>; 12] = std::array::from_fn(|k| s[SectionIndex::from_flat(k).shift(1, 0).flat()]);
        let shifted_b: [Cx<T>; 12] = std::array::from_fn(|k| s[SectionIndex::from_flat(k).shift(0, 1).flat()]);
        out = out.merge(HeisenbergResiduals {
            e1_half: common_factor_residual(&s1, &s, &sign_alpha).as_f64(),
            e2_sixth: common_factor_residual(&s2, &s, &rho_neg_beta).as_f64(),
            e3_half: common_factor_residual(&s3, &shifted_a, &ones).as_f64(),
            e4_sixth: common_factor_residual(&s4, &shifted_b, &ones).as_f64(),
        });
    }
    Ok(out)
}

/// The two `w₁`-coefficients of the limit sections: `lim ŝ = head + w₁·tail`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParts<T> {
    pub head: [Cx<T>; 12],
    pub tail: [Cx<T>; 12],
}

/// Coefficients of the limit sections at `z₂`, branch 1.
///
/// `head_αβ = ϑ_{0,β/6}(τ₃/18, (z₂ − τ₃/2 − τ₂/2)/6)` and
/// `tail_αβ = (−1)^α e^{−2πiτ₂/4} ϑ_{0,β/6}(τ₃/18, (z₂ − τ₃/2 + τ₂/2)/6)`.
pub fn limit_parts<T: Real>(tau2: Cx<T>, tau3: Cx<T>, z2: Cx<T>, cfg: &ThetaConfig) -> Result<LimitParts<T>> {
    if !is_finite_cx(tau2) || !is_finite_cx(tau3) || !is_finite_cx(z2) {
        return Err(Error::InvalidCoordinate);
    }
    if tau3.im <= T::zero() {
        return Err(Error::NotUpperHalfPlane);
    }
    let h = T::lit(0.5);
    let six = T::lit(6.0);
    let t = tau3 / T::lit(18.0);
    let za = (z2 - tau3 * h - tau2 * h) / six;
    let zb = (z2 - tau3 * h + tau2 * h) / six;
    let c = cis2pi(-tau2 / T::lit(4.0));
    let zero = Rational64::new(0, 1);
    let mut head = [Cx::new(T::zero(), T::zero()); 12];
    let mut tail = head;
    for beta in 0..6i64 {
        let b = Rational64::new(beta, 6);
        let a = theta1(zero, b, t, za, cfg)?;
        let bb = theta1(zero, b, t, zb, cfg)? * c;
        for alpha in 0..2usize {
            let k = 6 * alpha + beta as usize;
            head[k] = a;
            tail[k] = if alpha == 1 { -bb } else { bb };
        }
    }
    Ok(LimitParts { head, tail })
}

/// Which component of the degenerate surface a chart point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            _ => Err(Error::Precondition(format!("branch must be 1 or 2, got {i}"))),
        }
    }

    pub fn index(&self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
        }
    }
}

/// Limit section values at a chart point of the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSectionVector<T> {
    pub values: [Cx<T>; 12],
    pub tau2: Cx<T>,
    pub tau3: Cx<T>,
    pub w1: Cx<T>,
    pub z2: Cx<T>,
    pub branch: Branch,
}

fn check_w1<T: Real>(w1: Cx<T>) -> Result<()> {
    if !is_finite_cx(w1) {
        return Err(Error::InvalidCoordinate);
    }
    if w1.norm() == T::zero() {
        return Err(Error::PointNotOnTorus);
    }
    Ok(())
}

/// Branch-1 limit of `ŝ_αβ` as `Im τ₁ → ∞` with `w₁ = e^{πiz₁}` and `z₂` fixed.
pub fn eval_limit_sections<T: Real>(
    tau2: Cx<T>,
    tau3: Cx<T>,
    w1: Cx<T>,
    z2: Cx<T>,
    idx: SectionIndex,
    cfg: &ThetaConfig,
) -> Result<Cx<T>> {
    check_w1(w1)?;
    let p = limit_parts(tau2, tau3, z2, cfg)?;
    Ok(p.head[idx.flat()] + p.tail[idx.flat()] * w1)
}

/// All twelve limit values at a chart point on the given branch.
///
/// The branch-2 chart point `(w₁, z₂)` stands for the point
/// `(z₁ + τ₁, z₂ + τ₂)`; its `ι_ω`-image is the branch-1 point
/// `(e^{πiτ₂}/w₁, τ₃ − z₂)`, and `ŝ_αβ(p) = ŝ_{−α,−β}(ι_ω p)`.
pub fn limit_section_vector<T: Real>(
    tau2: Cx<T>,
    tau3: Cx<T>,
    w1: Cx<T>,
    z2: Cx<T>,
    branch: Branch,
    cfg: &ThetaConfig,
) -> Result<LimitSectionVector<T>> {
    check_w1(w1)?;
    let values = match branch {
        Branch::One => {
            let p = limit_parts(tau2, tau3, z2, cfg)?;
            std::array::from_fn(|k| p.head[k] + p.tail[k] * w1)
        }
        Branch::Two => {
            let w1p = cis2pi(tau2 / T::lit(2.0)) / w1;
            let p = limit_parts(tau2, tau3, tau3 - z2, cfg)?;
            let b1: [Cx<T>; 12] = std::array::from_fn(|k| p.head[k] + p.tail[k] * w1p);
            std::array::from_fn(|k| b1[SectionIndex::from_flat(k).neg().flat()])
        }
    };
    Ok(LimitSectionVector {
        values,
        tau2,
        tau3,
        w1,
        z2,
        branch,
    })
}

/// Offsets tried for contour base points, as fractions of the two periods.
const CONTOUR_OFFSETS: [(f64, f64); 6] = [(0.137, 0.291), (0.413, 0.071), (0.377, 0.223), (0.059, 0.461), (0.311, 0.389), (0.193, 0.017)];

/// Zero counts of `z₁ ↦ ŝ_αβ(z₁, z₂⁰)` over `C/(2τ₁, 2)` and of
/// `z₂ ↦ ŝ_αβ(z₁⁰, z₂)` over `C/(2τ₃, 6)`, for a product period `τ₂ = 0`.
pub fn polarization_degrees<T: Real>(eval: &SectionEvaluator<T>, idx: SectionIndex, n_steps: usize) -> Result<(i64, i64)> {
    let tau = eval.tau;
    if !tau.is_diagonal() {
        return Err(Error::Precondition("polarization degrees need tau2 = 0".into()));
    }
    let k = idx.flat();
    let lit = |x: f64| Cx::new(T::lit(x), T::zero());
    let count = |dir: usize| -> Result<i64> {
        let (p, q) = if dir == 0 { (lit(2.0), tau.tau1() * T::lit(2.0)) } else { (lit(6.0), tau.tau3() * T::lit(2.0)) };
        let mut last = Error::ContourHitsZero;
        for (a, b) in CONTOUR_OFFSETS {
            // The fixed coordinate avoids the other factor's zeros generically.
            let fixed = if dir == 0 { tau.tau3() * T::lit(2.0 * b) + lit(6.0 * a) } else { tau.tau1() * T::lit(2.0 * b) + lit(2.0 * a) };
            let base = p * T::lit(a) + q * T::lit(b);
            let f = |w: Cx<T>| -> Result<Cx<T>> {
                let z = if dir == 0 { [w, fixed] } else { [fixed, w] };
                Ok(eval.values(&z)?[k])
            };
            match crate::theta::try_count_zeros_on_loop(f, &crate::theta::parallelogram(base, p, q), n_steps) {
                Ok(n) => return Ok(n),
                Err(e @ (Error::ContourHitsZero | Error::ContourUnresolved(_))) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    };
    Ok((count(0)?, count(1)?))
}
