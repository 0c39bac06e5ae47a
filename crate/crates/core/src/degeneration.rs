//! Corank-1 boundary: coordinates, the degenerate-surface descriptor, the
//! limit Kummer map and the classification of its image.
//!
//! Chart conventions: on branch 1 the chart point `(w₁, z₂)` stands for
//! `z = (z₁, z₂)` with `w₁ = e^{πiz₁}`; on branch 2 it stands for
//! `(z₁ + τ₁, z₂ + τ₂)`. The involution `ι_ω` exchanges the branches via
//! `(w₁, z₂) ↦ (e^{πiτ₂}/w₁, τ₃ − z₂)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fitting::{fit_null, FormFit, DEFAULT_REL_THRESHOLD};
use crate::kummer::{quadric_rank, quadric_singular_values, quartic_from_points, KummerMap, KummerQuartic};
use crate::lattice::{elliptic_reduce, elliptic_reduce_with_tol, same_point_set, EllipticPoint, SiegelPoint};
use crate::linalg::{singular_values, CMatrix};
use crate::projective::{normalize_max, proj_dist, ProjPoint3};
use crate::scalar::{cis2pi, cx, is_finite_cx, max_modulus, norm2, Cx};
use crate::sections::{limit_parts, limit_section_vector, normalized_row_singular_values, odd_part, to_g_basis, Branch};
use crate::symmetry::BASE_LOCUS_REL;
use crate::theta::{try_count_zeros_on_loop, ThetaConfig, DEFAULT_CONTOUR_STEPS};

/// A point `u′ = (0, τ₂, τ₃)` of the boundary chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub tau2: Cx<f64>,
    pub tau3: Cx<f64>,
}

impl BoundaryPoint {
    pub fn new(tau2: Cx<f64>, tau3: Cx<f64>) -> Result<Self> {
        if !is_finite_cx(tau2) || !is_finite_cx(tau3) {
            return Err(Error::InvalidCoordinate);
        }
        if tau3.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane);
        }
        Ok(Self { tau2, tau3 })
    }

    /// `(T₁, T₂, T₃) = (0, t₂t₃, t₂⁻¹)`.
    pub fn big_t(&self) -> [Cx<f64>; 3] {
        let t2 = cis2pi(self.tau2 / 6.0);
        let t3 = cis2pi(self.tau3 / 18.0);
        [cx(0.0, 0.0), t2 * t3, t2.inv()]
    }

    /// The nearby smooth point with `τ₁ = iY`.
    pub fn finite_tau(&self, y: f64) -> Result<SiegelPoint<f64>> {
        SiegelPoint::new(cx(0.0, y), self.tau2, self.tau3)
    }
}

/// `t = (e^{πiτ₁}, e^{2πiτ₂/6}, e^{2πiτ₃/18})` and `T = (t₁t₂, t₂t₃, t₂⁻¹)`.
pub fn boundary_coords(tau: &SiegelPoint<f64>) -> ([Cx<f64>; 3], [Cx<f64>; 3]) {
    let t = [
        cis2pi(tau.tau1() / 2.0),
        cis2pi(tau.tau2() / 6.0),
        cis2pi(tau.tau3() / 18.0),
    ];
    (t, [t[0] * t[1], t[1] * t[2], t[1].inv()])
}

/// Data of the degenerate surface over a boundary point.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenDescriptor {
    pub base_modulus: Cx<f64>,
    /// `[6τ₂]`, the Abel point of the bundle class `6[τ₂] − 6[0]`.
    pub m_u_point: EllipticPoint<f64>,
    /// `e = [2τ₂]`.
    pub gluing_e: EllipticPoint<f64>,
    /// Four points on each double curve: `ε₁ = 0` then `ε₁ = 1`.
    pub fixed_points: [Vec<EllipticPoint<f64>>; 2],
    pub m_u_trivial: bool,
    pub e_is_zero: bool,
    pub two_e_is_zero: bool,
}

pub fn descriptor(u: &BoundaryPoint) -> Result<DegenDescriptor> {
    let (t2, t3) = (u.tau2, u.tau3);
    let m_u_point = elliptic_reduce(t2 * 6.0, t3)?;
    let gluing_e = elliptic_reduce(t2 * 2.0, t3)?;
    let centre = (t2 + t3) / 2.0;
    let mut lists = [Vec::with_capacity(4), Vec::with_capacity(4)];
    for (eps1, list) in lists.iter_mut().enumerate() {
        for eps2 in 0..2 {
            for eps4 in 0..2 {
                let w = centre + t2 * eps1 as f64 + t3 * eps2 as f64 + cx(3.0 * eps4 as f64, 0.0);
                list.push(elliptic_reduce(w, t3)?);
            }
        }
    }
    Ok(DegenDescriptor {
        base_modulus: t3,
        m_u_trivial: m_u_point.is_zero(),
        e_is_zero: gluing_e.is_zero(),
        two_e_is_zero: gluing_e.scale(2).is_zero(),
        m_u_point,
        gluing_e,
        fixed_points: lists,
    })
}

/// Base-curve coordinate of a descriptor point in the chart of its branch.
/// Points of the `ε₁ = 1` list sit on branch 2 at `z₂ = p − τ₂`.
pub fn descriptor_chart_z2(u: &BoundaryPoint, list: usize, p: &EllipticPoint<f64>) -> Cx<f64> {
    if list == 0 {
        p.rep
    } else {
        p.rep - u.tau2
    }
}

fn check_chart(w1: Cx<f64>, z2: Cx<f64>) -> Result<()> {
    if !is_finite_cx(w1) || !is_finite_cx(z2) {
        return Err(Error::InvalidCoordinate);
    }
    if w1.norm() == 0.0 {
        return Err(Error::PointNotOnTorus);
    }
    Ok(())
}

/// Normalized `ĝ` of the limit sections at a chart point.
pub fn limit_kummer_map(u: &BoundaryPoint, branch: Branch, w1: Cx<f64>, z2: Cx<f64>, cfg: &ThetaConfig) -> Result<ProjPoint3<f64>> {
    check_chart(w1, z2)?;
    let v = limit_section_vector(u.tau2, u.tau3, w1, z2, branch, cfg)?;
    let g = to_g_basis(&v.values).g;
    if max_modulus(&g) < BASE_LOCUS_REL * max_modulus(&v.values) {
        return Err(Error::Indeterminate);
    }
    ProjPoint3::new(g)
}

/// End of a fibre of the ruled component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FibreEnd {
    /// `w₁ → 0`.
    Head,
    /// `w₁ → ∞`.
    Tail,
}

/// `ĝ` of the limit section restricted to the section curve at one end of
/// the fibres, as an unnormalized vector, together with the section scale.
pub fn section_curve_g(u: &BoundaryPoint, branch: Branch, end: FibreEnd, z2: Cx<f64>, cfg: &ThetaConfig) -> Result<([Cx<f64>; 4], f64)> {
    // Branch 2 at (w₁, z₂) is branch 1 at (e^{πiτ₂}/w₁, τ₃ − z₂) with
    // indices negated, which flips the sign of every ĝ and swaps the ends.
    let (z, end, sign) = match branch {
        Branch::One => (z2, end, 1.0),
        Branch::Two => (
            u.tau3 - z2,
            match end {
                FibreEnd::Head => FibreEnd::Tail,
                FibreEnd::Tail => FibreEnd::Head,
            },
            -1.0,
        ),
    };
    let p = limit_parts(u.tau2, u.tau3, z, cfg)?;
    let v = match end {
        FibreEnd::Head => p.head,
        FibreEnd::Tail => p.tail,
    };
    let g = to_g_basis(&v).g.map(|x| x * sign);
    Ok((g, max_modulus(&v)))
}

/// Normalized image of a section-curve point, or `Indeterminate` at a base point.
pub fn section_curve_image(u: &BoundaryPoint, branch: Branch, end: FibreEnd, z2: Cx<f64>, cfg: &ThetaConfig) -> Result<ProjPoint3<f64>> {
    let (g, scale) = section_curve_g(u, branch, end, z2, cfg)?;
    if max_modulus(&g) < BASE_LOCUS_REL * scale {
        return Err(Error::Indeterminate);
    }
    ProjPoint3::new(g)
}

/// Centre of the involution on the head (`τ₂+τ₃`) or tail (`τ₃−τ₂`) curve of
/// branch 1: `z₂ ↦ centre − z₂`.
pub fn section_involution_centre(u: &BoundaryPoint, end: FibreEnd) -> Cx<f64> {
    match end {
        FibreEnd::Head => u.tau3 + u.tau2,
        FibreEnd::Tail => u.tau3 - u.tau2,
    }
}

/// Seeded chart samples: `w₁ = e^{r + iθ}`, `|r| ≤ 1.5`, and `z₂` uniform in
/// a fundamental parallelogram of `E(τ₃)` centred at `(τ₂+τ₃)/2`.
#[derive(Debug, Clone)]
pub struct ChartSampler {
    u: BoundaryPoint,
    rng: ChaCha8Rng,
}

impl ChartSampler {
    pub fn new(u: &BoundaryPoint, seed: u64) -> Self {
        Self {
            u: *u,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_w1(&mut self) -> Cx<f64> {
        let r = self.rng.gen_range(-1.5..1.5);
        let th = self.rng.gen_range(0.0..std::f64::consts::TAU);
        Cx::from_polar(f64::exp(r), th)
    }

    pub fn next_z2(&mut self) -> Cx<f64> {
        let x = self.rng.gen_range(-0.5..0.5);
        let y = self.rng.gen_range(-0.5..0.5);
        (self.u.tau2 + self.u.tau3) / 2.0 + cx(6.0 * x, 0.0) + self.u.tau3 * (2.0 * y)
    }

    pub fn next_point(&mut self) -> (Cx<f64>, Cx<f64>) {
        let w1 = self.next_w1();
        (w1, self.next_z2())
    }
}

/// `n` image points of the limit map on `branch`, skipping base points.
pub fn sample_limit_image(u: &BoundaryPoint, branch: Branch, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<Vec<ProjPoint3<f64>>> {
    let mut s = ChartSampler::new(u, seed);
    let mut out = Vec::with_capacity(n);
    let budget = 100 * n.max(1);
    let mut draws = 0;
    while out.len() < n {
        draws += 1;
        if draws > budget {
            return Err(Error::SamplingExhausted(budget));
        }
        let (w1, z2) = s.next_point();
        match limit_kummer_map(u, branch, w1, z2, cfg) {
            Ok(p) => out.push(p),
            Err(Error::Indeterminate) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn rows(pts: &[ProjPoint3<f64>]) -> Vec<Vec<Cx<f64>>> {
    pts.iter().map(|p| p.coords().to_vec()).collect()
}

/// Quartic fitted to limit-map images, projected onto the invariant quartics.
pub fn limit_quartic(u: &BoundaryPoint, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<KummerQuartic<f64>> {
    let pts = sample_limit_image(u, Branch::One, n, seed, cfg)?;
    quartic_from_points(&rows(&pts))
}

/// Finite-versus-limit comparison of the Kummer map.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCheck {
    pub y: f64,
    /// `(branch, w₁, z₂, proj_dist)` per chart point.
    pub samples: Vec<(Branch, Cx<f64>, Cx<f64>, f64)>,
    pub max_dist: f64,
}

/// Absolute point of `A_τ` represented by a chart point.
pub fn chart_to_absolute(tau: &SiegelPoint<f64>, branch: Branch, w1: Cx<f64>, z2: Cx<f64>) -> [Cx<f64>; 2] {
    let z1 = w1.ln() / cx(0.0, std::f64::consts::PI);
    match branch {
        Branch::One => [z1, z2],
        Branch::Two => [z1 + tau.tau1(), z2 + tau.tau2()],
    }
}

/// `proj_dist(φ_{τ₁=iY}, φ_limit)` at `n` seeded chart points on each branch.
pub fn limit_check(u: &BoundaryPoint, y: f64, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<LimitCheck> {
    let tau = u.finite_tau(y)?;
    let finite = KummerMap::new(&tau, cfg)?;
    let mut s = ChartSampler::new(u, seed);
    let mut samples = Vec::with_capacity(2 * n);
    for branch in [Branch::One, Branch::Two] {
        let mut got = 0;
        let mut draws = 0;
        while got < n {
            draws += 1;
            if draws > 100 * n.max(1) {
                return Err(Error::SamplingExhausted(100 * n));
            }
            let (w1, z2) = s.next_point();
            let lim = match limit_kummer_map(u, branch, w1, z2, cfg) {
                Ok(p) => p,
                Err(Error::Indeterminate) => continue,
                Err(e) => return Err(e),
            };
            let fin = match finite.map(&chart_to_absolute(&tau, branch, w1, z2)) {
                Ok(p) => p,
                Err(Error::Indeterminate) => continue,
                Err(e) => return Err(e),
            };
            samples.push((branch, w1, z2, fin.dist(&lim)));
            got += 1;
        }
    }
    let max_dist = samples.iter().fold(0.0f64, |m, s| m.max(s.3));
    Ok(LimitCheck { y, samples, max_dist })
}

/// Where a fixed point `ω + ½Σεᵢeᵢ` of the smooth surface sits in the chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointChart {
    pub eps: [u8; 4],
    pub branch: Branch,
    pub w1: Cx<f64>,
    pub z2: Cx<f64>,
}

/// Chart coordinates of the 16 fixed points at `τ₁ = iY`. Points with
/// `ε₁ = 1` are represented on branch 2.
pub fn finite_fixed_points(u: &BoundaryPoint, y: f64) -> Result<Vec<FixedPointChart>> {
    let tau = u.finite_tau(y)?;
    let period = crate::lattice::PeriodData::new(&tau)?;
    let mut out = Vec::with_capacity(16);
    for k in 0..16u8 {
        let eps = [k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1];
        let off = period.from_coords(&eps.map(|e| 0.5 * e as f64));
        let z = [period.omega[0] + off[0], period.omega[1] + off[1]];
        let (branch, z1, z2) = if eps[0] == 0 {
            (Branch::One, z[0], z[1])
        } else {
            (Branch::Two, z[0] - tau.tau1(), z[1] - tau.tau2())
        };
        let w1 = (z1 * cx(0.0, std::f64::consts::PI)).exp();
        out.push(FixedPointChart { eps, branch, w1, z2 });
    }
    Ok(out)
}

/// Convergence of the 16 fixed points to the 8 descriptor points.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointConvergence {
    /// Max `|w₁|` over the 16 points.
    pub max_w1: f64,
    /// Max distance in `E(τ₃)` from each point to its descriptor point.
    pub max_descriptor_dist: f64,
    /// Every descriptor point is hit by exactly one `ε₃`-pair.
    pub pairs_match: bool,
}

fn elliptic_dist(a: Cx<f64>, b: Cx<f64>, tau3: Cx<f64>) -> f64 {
    let d = elliptic_reduce_with_tol(a - b, tau3, 0.0).expect("valid modulus").rep;
    // Nearest lattice point among the four corners of the reduced cell.
    [cx(0.0, 0.0), cx(6.0, 0.0), tau3 * 2.0, tau3 * 2.0 + cx(6.0, 0.0)]
        .iter()
        .map(|c| (d - c).norm())
        .fold(f64::INFINITY, f64::min)
}

pub fn fixed_point_convergence(u: &BoundaryPoint, y: f64) -> Result<FixedPointConvergence> {
    let d = descriptor(u)?;
    let pts = finite_fixed_points(u, y)?;
    let mut max_w1 = 0.0f64;
    let mut max_dist = 0.0f64;
    let mut hits = [[0usize; 4]; 2];
    let mut pairs_match = true;
    for p in &pts {
        max_w1 = max_w1.max(p.w1.norm());
        let list = p.eps[0] as usize;
        let dists: Vec<f64> = d.fixed_points[list]
            .iter()
            .map(|q| elliptic_dist(p.z2, descriptor_chart_z2(u, list, q), u.tau3))
            .collect();
        let (k, best) = dists
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
        max_dist = max_dist.max(best);
        hits[list][k] += 1;
    }
    for list in hits {
        pairs_match &= list.iter().all(|h| *h == 2);
    }
    // ε₃-partners differ only in the sign of w₁.
    for p in &pts {
        if p.eps[2] == 0 {
            let q = pts
                .iter()
                .find(|q| q.eps[0] == p.eps[0] && q.eps[1] == p.eps[1] && q.eps[3] == p.eps[3] && q.eps[2] == 1)
                .expect("partner exists");
            pairs_match &= (p.z2 - q.z2).norm() < 1e-9 && (p.w1 + q.w1).norm() <= 1e-9 * p.w1.norm().max(1e-300);
        }
    }
    Ok(FixedPointConvergence {
        max_w1,
        max_descriptor_dist: max_dist,
        pairs_match,
    })
}

/// Max relative size of the limit `ĝ` at the eight descriptor points.
pub fn descriptor_base_residual(u: &BoundaryPoint, cfg: &ThetaConfig) -> Result<f64> {
    let d = descriptor(u)?;
    let mut worst = 0.0f64;
    for (list, pts) in d.fixed_points.iter().enumerate() {
        let branch = if list == 0 { Branch::One } else { Branch::Two };
        for p in pts {
            let (g, scale) = section_curve_g(u, branch, FibreEnd::Head, descriptor_chart_z2(u, list, p), cfg)?;
            worst = worst.max(max_modulus(&g) / scale);
        }
    }
    Ok(worst)
}

/// Numerical ranks of the 12 limit sections and of their odd part, sampled
/// over both branches.
pub fn limit_value_ranks(u: &BoundaryPoint, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<(usize, usize)> {
    let mut s = ChartSampler::new(u, seed);
    let mut all = Vec::with_capacity(2 * n);
    let mut odd = Vec::with_capacity(2 * n);
    for branch in [Branch::One, Branch::Two] {
        for _ in 0..n {
            let (w1, z2) = s.next_point();
            let v = limit_section_vector(u.tau2, u.tau3, w1, z2, branch, cfg)?.values;
            all.push(v.to_vec());
            odd.push(odd_part(&v).to_vec());
        }
    }
    let rank = |sv: Vec<f64>| sv.iter().filter(|x| **x > 1e-8 * sv[0]).count();
    Ok((rank(normalized_row_singular_values(&all)), rank(normalized_row_singular_values(&odd))))
}

/// Tag of the limit image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    ProductQuadric,
    SingularQuartic,
}

impl LimitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ProductQuadric => "ProductQuadric",
            Self::SingularQuartic => "SingularQuartic",
        }
    }
}

/// Fitted image of one section curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageLine {
    pub end: FibreEnd,
    pub fit: FormFit<f64>,
    /// The two sample images farthest apart.
    pub span: [ProjPoint3<f64>; 2],
    /// Max `proj_dist(φ(z₂), φ(z₂*))` over involution partners.
    pub partner_residual: f64,
    /// Degree of the map from the section curve onto the line.
    pub cover_degree: i64,
    /// Max `‖∇F‖` of the unit quartic at sampled line points.
    pub max_gradient: f64,
    pub samples: Vec<ProjPoint3<f64>>,
}

/// Outcome of [`classify_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitClassification {
    pub kind: LimitKind,
    pub descriptor: DegenDescriptor,
    pub quadric_fit: FormFit<f64>,
    pub quadric_rank: Option<usize>,
    pub quadric_singular_values: Option<Vec<f64>>,
    pub quartic: Option<KummerQuartic<f64>>,
    pub lines: Vec<ImageLine>,
    /// `|det|` of the four unit spanning vectors of the two lines.
    pub skew_determinant: Option<f64>,
}

/// Number of points sampled along each section curve.
const LINE_SAMPLES: usize = 30;
const GRADIENT_SAMPLES: usize = 10;

fn det4(m: [[Cx<f64>; 4]; 4]) -> Cx<f64> {
    // Laplace expansion along the first row via 3×3 minors.
    let minor = |c: usize| -> Cx<f64> {
        let cols: Vec<usize> = (0..4).filter(|j| *j != c).collect();
        let a = |i: usize, j: usize| m[i][cols[j]];
        a(1, 0) * (a(2, 1) * a(3, 2) - a(2, 2) * a(3, 1)) - a(1, 1) * (a(2, 0) * a(3, 2) - a(2, 2) * a(3, 0))
            + a(1, 2) * (a(2, 0) * a(3, 1) - a(2, 1) * a(3, 0))
    };
    (0..4).fold(cx(0.0, 0.0), |acc, c| {
        let s = if c % 2 == 0 { 1.0 } else { -1.0 };
        acc + m[0][c] * minor(c) * s
    })
}

fn farthest_pair(pts: &[ProjPoint3<f64>]) -> [ProjPoint3<f64>; 2] {
    let mut best = (0, 0, -1.0);
    for i in 0..pts.len() {
        for j in 0..i {
            let d = pts[i].dist(&pts[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    [pts[best.0], pts[best.1]]
}

/// Degree of `z₂ ↦ φ(z₂)` from the section curve at `end` of branch 1 onto
/// its image line, by counting zeros of `⟨φ(z₂), target⟩⊥` over a
/// fundamental parallelogram and subtracting the four base points.
pub fn section_cover_degree(u: &BoundaryPoint, end: FibreEnd, seed: u64, cfg: &ThetaConfig) -> Result<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = ChartSampler::new(u, seed ^ 0x5eed);
    let (i0, i1) = match end {
        FibreEnd::Head => (0, 1),
        FibreEnd::Tail => (2, 3),
    };
    for _ in 0..8 {
        let target = loop {
            match section_curve_image(u, Branch::One, end, s.next_z2(), cfg) {
                Ok(p) => break p,
                Err(Error::Indeterminate) => continue,
                Err(e) => return Err(e),
            }
        };
        let (y0, y1) = (target.coords()[i0], target.coords()[i1]);
        let f = |z2: Cx<f64>| -> Result<Cx<f64>> {
            let (g, _) = section_curve_g(u, Branch::One, end, z2, cfg)?;
            Ok(g[i0] * y1 - g[i1] * y0)
        };
        let base = cx::<f64>(rng.gen_range(-3.0..3.0), 0.0) + u.tau3 * rng.gen_range(-1.0f64..1.0);
        let corners = crate::theta::parallelogram(base, cx(6.0, 0.0), u.tau3 * 2.0);
        match try_count_zeros_on_loop(f, &corners, DEFAULT_CONTOUR_STEPS) {
            Ok(zeros) => return Ok(zeros - 4),
            Err(Error::ContourHitsZero) | Err(Error::ContourUnresolved(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ContourHitsZero)
}

fn image_line(u: &BoundaryPoint, end: FibreEnd, quartic: Option<&KummerQuartic<f64>>, seed: u64, cfg: &ThetaConfig) -> Result<ImageLine> {
    let mut s = ChartSampler::new(u, seed);
    let centre = section_involution_centre(u, end);
    let mut samples = Vec::with_capacity(LINE_SAMPLES);
    let mut partner_residual = 0.0f64;
    while samples.len() < LINE_SAMPLES {
        let z2 = s.next_z2();
        let (p, q) = match (
            section_curve_image(u, Branch::One, end, z2, cfg),
            section_curve_image(u, Branch::One, end, centre - z2, cfg),
        ) {
            (Ok(p), Ok(q)) => (p, q),
            (Err(Error::Indeterminate), _) | (_, Err(Error::Indeterminate)) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        partner_residual = partner_residual.max(p.dist(&q));
        samples.push(p);
    }
    let fit = fit_null(&rows(&samples), 1, DEFAULT_REL_THRESHOLD)?;
    let span = farthest_pair(&samples);
    let max_gradient = match quartic {
        Some(q) => {
            let f = q.fit.form();
            samples[..GRADIENT_SAMPLES]
                .iter()
                .map(|p| norm2(&f.gradient(p.coords())))
                .fold(0.0f64, f64::max)
        }
        None => f64::NAN,
    };
    let cover_degree = section_cover_degree(u, end, seed.wrapping_add(1), cfg)?;
    Ok(ImageLine {
        end,
        fit,
        span,
        partner_residual,
        cover_degree,
        max_gradient,
        samples,
    })
}

/// Thresholds of the classification certificates.
pub const SKEW_MIN: f64 = 1e-6;
pub const GRADIENT_MAX: f64 = 1e-6;

/// Classifies the limit image as a smooth quadric (`e = 0`) or a quartic
/// singular along two skew lines (`e ≠ 0`), with certificates.
pub fn classify_limit(u: &BoundaryPoint, n_samples: usize, seed: u64, cfg: &ThetaConfig) -> Result<LimitClassification> {
    let d = descriptor(u)?;
    let pts = sample_limit_image(u, Branch::One, n_samples, seed, cfg)?;
    let quadric_fit = fit_null(&rows(&pts), 2, DEFAULT_REL_THRESHOLD)?;
    let dump = |fits: &[&FormFit<f64>]| -> Vec<Vec<f64>> { fits.iter().map(|f| f.relative_singular_values()).collect() };
    if d.e_is_zero {
        if quadric_fit.nullity == 0 {
            return Err(Error::ClassificationFailed {
                reason: "e = 0 but the image lies on no quadric".into(),
                singular_values: dump(&[&quadric_fit]),
            });
        }
        let rank = quadric_rank(&quadric_fit.coefficients);
        if rank != 4 {
            return Err(Error::ClassificationFailed {
                reason: format!("e = 0 but the quadric has rank {rank}"),
                singular_values: dump(&[&quadric_fit]),
            });
        }
        let sv = quadric_singular_values(&quadric_fit.coefficients);
        return Ok(LimitClassification {
            kind: LimitKind::ProductQuadric,
            descriptor: d,
            quadric_fit,
            quadric_rank: Some(rank),
            quadric_singular_values: Some(sv),
            quartic: None,
            lines: Vec::new(),
            skew_determinant: None,
        });
    }
    if quadric_fit.nullity != 0 {
        return Err(Error::ClassificationFailed {
            reason: format!("e != 0 but the degree-2 nullity is {}", quadric_fit.nullity),
            singular_values: dump(&[&quadric_fit]),
        });
    }
    let quartic = match quartic_from_points(&rows(&pts)) {
        Ok(q) => q,
        Err(e) => {
            let quartic_fit = fit_null(&rows(&pts), 4, DEFAULT_REL_THRESHOLD)?;
            return Err(Error::ClassificationFailed {
                reason: format!("degree-4 fit: {e}"),
                singular_values: dump(&[&quadric_fit, &quartic_fit]),
            });
        }
    };
    let lines = vec![
        image_line(u, FibreEnd::Head, Some(&quartic), seed.wrapping_add(101), cfg)?,
        image_line(u, FibreEnd::Tail, Some(&quartic), seed.wrapping_add(202), cfg)?,
    ];
    let unit = |p: &ProjPoint3<f64>| -> Vec<Cx<f64>> {
        let n = norm2(p.coords());
        p.coords().iter().map(|x| x / n).collect()
    };
    let vecs: Vec<Vec<Cx<f64>>> = lines.iter().flat_map(|l| l.span.iter().map(unit)).collect();
    let m: [[Cx<f64>; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| vecs[i][j]));
    let skew = det4(m).norm();
    let mut problems = Vec::new();
    for l in &lines {
        if l.fit.nullity != 2 {
            problems.push(format!("{:?} line fit has nullity {}", l.end, l.fit.nullity));
        }
        if !(l.max_gradient < GRADIENT_MAX) {
            problems.push(format!("{:?} line gradient {:.3e}", l.end, l.max_gradient));
        }
        if l.cover_degree != 2 {
            problems.push(format!("{:?} line covered with degree {}", l.end, l.cover_degree));
        }
        if !(l.partner_residual < 1e-8) {
            problems.push(format!("{:?} line partner residual {:.3e}", l.end, l.partner_residual));
        }
    }
    if !(skew > SKEW_MIN) {
        problems.push(format!("skew determinant {skew:.3e}"));
    }
    if !problems.is_empty() {
        let mut fits = vec![&quadric_fit, &quartic.fit];
        fits.extend(lines.iter().map(|l| &l.fit));
        return Err(Error::ClassificationFailed {
            reason: problems.join("; "),
            singular_values: dump(&fits),
        });
    }
    Ok(LimitClassification {
        kind: LimitKind::SingularQuartic,
        descriptor: d,
        quadric_fit,
        quadric_rank: None,
        quadric_singular_values: None,
        quartic: Some(quartic),
        lines,
        skew_determinant: Some(skew),
    })
}

/// Length of the cycle of rulings through fixed points closed by the gluing.
///
/// Starting at a fixed point `p` on the first double curve, the ruling over
/// `p` reaches the second double curve, whose gluing returns to the first
/// curve at `p + e`. Returns `Some(number of rulings)` when every vertex is
/// a fixed point and the chain closes within 12 steps.
pub fn ruling_cycle_length(d: &DegenDescriptor, start: &EllipticPoint<f64>) -> Option<usize> {
    let mut p = *start;
    for step in 1..=12 {
        p = p.add(&d.gluing_e);
        if !d.fixed_points[0].iter().any(|q| q.same_point(&p)) {
            return None;
        }
        if p.same_point(start) {
            return Some(2 * step);
        }
    }
    None
}

/// Whether the fixed points on the limit surface are linked by closed cycles
/// of exactly four rulings.
pub fn verify_twotorsion_limit_rulings(u: &BoundaryPoint) -> Result<bool> {
    let d = descriptor(u)?;
    if d.e_is_zero {
        return Err(Error::Precondition("gluing parameter e = 0 (product case)".into()));
    }
    Ok(d.fixed_points[0].iter().all(|p| ruling_cycle_length(&d, p) == Some(4)))
}

/// Both branches' image points for export.
pub fn emit_limit_cloud(u: &BoundaryPoint, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<Vec<ProjPoint3<f64>>> {
    let half = n / 2;
    let mut pts = sample_limit_image(u, Branch::One, n - half, seed, cfg)?;
    pts.extend(sample_limit_image(u, Branch::Two, half, seed.wrapping_add(1), cfg)?);
    Ok(pts)
}

/// Equality of two descriptors' gluing data and fixed-point sets.
pub fn same_descriptor_data(a: &DegenDescriptor, b: &DegenDescriptor) -> bool {
    a.gluing_e.same_point(&b.gluing_e)
        && same_point_set(&a.fixed_points[0], &b.fixed_points[0])
        && same_point_set(&a.fixed_points[1], &b.fixed_points[1])
}

/// Smallest singular values of the stacked limit images at degree `d`.
pub fn limit_image_singular_values(u: &BoundaryPoint, degree: u32, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<Vec<f64>> {
    let pts = sample_limit_image(u, Branch::One, n, seed, cfg)?;
    let r: Vec<Vec<Cx<f64>>> = pts
        .iter()
        .map(|p| crate::fitting::monomial_row(p.coords(), degree))
        .collect::<Result<_>>()?;
    Ok(singular_values(&CMatrix::from_rows(&r)))
}

/// Normalized `λ` helper re-exported for callers comparing limit quartics.
pub fn normalized_lambda(q: &KummerQuartic<f64>) -> Result<Vec<Cx<f64>>> {
    normalize_max(&q.invariant.lambda)
}

/// `proj_dist` between two limit images; convenience for tests.
pub fn image_dist(a: &ProjPoint3<f64>, b: &ProjPoint3<f64>) -> f64 {
    proj_dist(a.coords(), b.coords())
}
