//! Theta functions with rational characteristics in one and two variables.
//!
//! The two-variable series is
//!
//! ```text
//! Θ_{m′m″}(τ, z) = Σ_{q ∈ Z²} exp 2πi [ ½ (q+m′)ᵀ τ (q+m′) + (q+m′)ᵀ (z+m″) ]
//! ```
//!
//! Terms are summed over a square window centred at the lattice point closest
//! to the minimum of the real quadratic form governing the term moduli, so the
//! window size depends only on `Im τ`, the centring offset and the tolerance.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{cis2pi, czero, is_finite_cx, Cx, Real};

/// Complex symmetric 2×2 matrix as nested arrays.
pub type CMat2<T> = [[Cx<T>; 2]; 2];

/// Rational characteristic `(m′, m″)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Characteristic {
    pub m_prime: [Rational64; 2],
    pub m_dprime: [Rational64; 2],
}

impl Characteristic {
    /// Every denominator must divide 6.
    pub fn new(m_prime: [Rational64; 2], m_dprime: [Rational64; 2]) -> Result<Self> {
        for r in m_prime.iter().chain(m_dprime.iter()) {
            if 6 % r.denom() != 0 {
                return Err(Error::UnsupportedCharacteristic(*r.denom()));
            }
        }
        Ok(Self { m_prime, m_dprime })
    }

    /// `(0, 0; α/2, β/6)`, the characteristic of the section with index `(α, β)`.
    pub fn section(alpha: i64, beta: i64) -> Self {
        Self {
            m_prime: [Rational64::zero(), Rational64::zero()],
            m_dprime: [Rational64::new(alpha, 2), Rational64::new(beta, 6)],
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            m_prime: self.m_prime.map(|r| -r),
            m_dprime: self.m_dprime.map(|r| -r),
        }
    }

    /// `4 m′ᵀ m″` is odd.
    pub fn is_odd(&self) -> bool {
        let v = (self.m_prime[0] * self.m_dprime[0] + self.m_prime[1] * self.m_dprime[1]) * 4;
        v.is_integer() && (v.to_integer() % 2).abs() == 1
    }

    fn as_real<T: Real>(&self) -> ([T; 2], [T; 2]) {
        (self.m_prime.map(rat_to_real), self.m_dprime.map(rat_to_real))
    }
}

fn rat_to_real<T: Real>(r: Rational64) -> T {
    T::lit(r.to_f64().expect("finite rational"))
}

/// Truncation control shared by every series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    /// Target absolute truncation error.
    pub tol: f64,
    /// Largest admissible window radius.
    pub max_radius: usize,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_radius: 60,
        }
    }
}

impl ThetaConfig {
    pub fn new(tol: f64, max_radius: usize) -> Result<Self> {
        let cfg = Self { tol, max_radius };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return Err(Error::InvalidConfig(format!("tol must lie in (0, 1e-6], got {}", self.tol)));
        }
        if self.max_radius < 1 {
            return Err(Error::InvalidConfig("max_radius must be at least 1".into()));
        }
        Ok(())
    }
}

/// A series value together with the window radius used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue<T> {
    pub value: Cx<T>,
    pub radius: usize,
}

/// Smallest eigenvalue of a real symmetric 2×2 matrix.
pub fn lambda_min<T: Real>(m: &[[T; 2]; 2]) -> T {
    let (a, b, c) = (m[0][0], m[0][1], m[1][1]);
    let h = T::lit(0.5);
    let mean = (a + c) * h;
    let d = (a - c) * h;
    mean - (d * d + b * b).sqrt()
}

// Hard stop for the radius search; anything near this is far beyond any cap.
const RADIUS_SEARCH_LIMIT: usize = 100_000;

/// Smallest `R` with `Σ_{k>R} mult(k) e^{−πλ(k−s)²} < e^{log_tol}`, where
/// `mult(k) = 8k` in two variables and `2` in one.
fn radius_for_log_tol(lambda: f64, s: f64, log_tol: f64, dim: usize) -> usize {
    let log_term = |k: usize| -> f64 {
        let d = (k as f64 - s).max(0.0);
        let mult = if dim == 2 { 8.0 * k as f64 } else { 2.0 };
        mult.ln() - std::f64::consts::PI * lambda * d * d
    };
    let log_tail = |r: usize| -> f64 {
        let mut k = r + 1;
        let first = log_term(k);
        let mut acc = 1.0;
        loop {
            k += 1;
            let t = log_term(k) - first;
            // Terms are eventually decreasing faster than geometrically.
            if t < -40.0 && k > r + 2 + s.ceil() as usize {
                break;
            }
            acc += t.exp();
            if k > r + RADIUS_SEARCH_LIMIT {
                break;
            }
        }
        first + acc.ln()
    };
    let mut r = 0;
    while r < RADIUS_SEARCH_LIMIT && log_tail(r) >= log_tol {
        r += 1;
    }
    r
}

/// Smallest window radius `R` such that the majorant
/// `Σ_{|q|∞>R} e^{−π λ_min |q+shift|²}` is below `tol`.
pub fn truncation_radius<T: Real>(im_tau: &[[T; 2]; 2], shift: &[T; 2], tol: T) -> Result<usize> {
    let lam = lambda_min(im_tau);
    if !(lam > T::zero()) || im_tau[0][1] != im_tau[1][0] {
        return Err(Error::NotSpd);
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig("tol must be positive".into()));
    }
    let s = shift[0].abs().max(shift[1].abs()).as_f64();
    Ok(radius_for_log_tol(lam.as_f64(), s, tol.as_f64().ln(), 2))
}

/// Validated imaginary part of a point of `H₂`.
fn siegel_im<T: Real>(tau: &CMat2<T>) -> Result<[[T; 2]; 2]> {
    if !tau.iter().flatten().all(|v| is_finite_cx(*v)) || tau[0][1] != tau[1][0] {
        return Err(Error::InvalidCoordinate);
    }
    let y = [[tau[0][0].im, tau[0][1].im], [tau[1][0].im, tau[1][1].im]];
    if !(y[0][0] > T::zero() && y[0][0] * y[1][1] - y[0][1] * y[0][1] > T::zero()) {
        return Err(Error::NotInSiegel);
    }
    Ok(y)
}

/// Window geometry for one two-variable evaluation.
struct Window2<T> {
    /// Centre `q₀ + m′` of the summation window.
    centre: [T; 2],
    radius: usize,
}

fn window2<T: Real>(y: &[[T; 2]; 2], m_prime: &[T; 2], z: &[Cx<T>; 2], cfg: &ThetaConfig, extra: usize) -> Result<Window2<T>> {
    let det = y[0][0] * y[1][1] - y[0][1] * y[0][1];
    let (b0, b1) = (z[0].im, z[1].im);
    // c = −Y⁻¹ Im z
    let c = [
        -(y[1][1] * b0 - y[0][1] * b1) / det,
        -(-y[0][1] * b0 + y[0][0] * b1) / det,
    ];
    let q0 = [(c[0] - m_prime[0]).round(), (c[1] - m_prime[1]).round()];
    let centre = [q0[0] + m_prime[0], q0[1] + m_prime[1]];
    let delta = [c[0] - centre[0], c[1] - centre[1]];
    let cyc = c[0] * (y[0][0] * c[0] + y[0][1] * c[1]) + c[1] * (y[0][1] * c[0] + y[1][1] * c[1]);
    let log_tol = cfg.tol.ln() - std::f64::consts::PI * cyc.as_f64();
    let s = delta[0].abs().max(delta[1].abs()).as_f64();
    let needed = radius_for_log_tol(lambda_min(y).as_f64(), s, log_tol, 2);
    if needed > cfg.max_radius {
        return Err(Error::TruncationCapExceeded {
            needed,
            cap: cfg.max_radius,
        });
    }
    Ok(Window2 {
        centre,
        radius: needed + extra,
    })
}

/// Lexicographic sum of `exp 2πi[½xᵀτx + xᵀ(z+m″)]` over the window,
/// `x = centre + (i, j)`, `|i|, |j| ≤ radius`.
fn sum_window2<T: Real>(tau: &CMat2<T>, z: &[Cx<T>; 2], m_dprime: &[T; 2], w: &Window2<T>) -> Cx<T> {
    let r = w.radius as i64;
    let h = T::lit(0.5);
    let zz = [z[0] + m_dprime[0], z[1] + m_dprime[1]];
    let mut acc = czero();
    for i in -r..=r {
        let x0 = w.centre[0] + T::lit(i as f64);
        for j in -r..=r {
            let x1 = w.centre[1] + T::lit(j as f64);
            let quad = (tau[0][0] * (x0 * x0) + tau[0][1] * (T::lit(2.0) * x0 * x1) + tau[1][1] * (x1 * x1)) * h;
            acc = acc + cis2pi(quad + zz[0] * x0 + zz[1] * x1);
        }
    }
    acc
}

/// Two-variable theta value and the window radius used.
pub fn theta2_detailed<T: Real>(ch: &Characteristic, tau: &CMat2<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<ThetaValue<T>> {
    cfg.validate()?;
    let y = siegel_im(tau)?;
    if !z.iter().all(|v| is_finite_cx(*v)) {
        return Err(Error::InvalidCoordinate);
    }
    let (mp, mpp) = ch.as_real::<T>();
    let w = window2(&y, &mp, z, cfg, 0)?;
    Ok(ThetaValue {
        value: sum_window2(tau, z, &mpp, &w),
        radius: w.radius,
    })
}

pub fn theta2<T: Real>(ch: &Characteristic, tau: &CMat2<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<Cx<T>> {
    theta2_detailed(ch, tau, z, cfg).map(|v| v.value)
}

/// Same series summed over a window `extra` units wider than required.
pub fn theta2_widened<T: Real>(
    ch: &Characteristic,
    tau: &CMat2<T>,
    z: &[Cx<T>; 2],
    cfg: &ThetaConfig,
    extra: usize,
) -> Result<ThetaValue<T>> {
    cfg.validate()?;
    let y = siegel_im(tau)?;
    let (mp, mpp) = ch.as_real::<T>();
    let w = window2(&y, &mp, z, cfg, extra)?;
    Ok(ThetaValue {
        value: sum_window2(tau, z, &mpp, &w),
        radius: w.radius,
    })
}

/// The twelve section characteristics `(0,0; α/2, β/6)` share every term
/// modulus, so one pass accumulates partial sums per residue class of
/// `(x₀ mod 2, x₁ mod 6)` and a finite Fourier transform finishes the job.
///
/// Output index is `6α + β`.
pub fn theta2_sections<T: Real>(tau: &CMat2<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<([Cx<T>; 12], usize)> {
    cfg.validate()?;
    let y = siegel_im(tau)?;
    if !z.iter().all(|v| is_finite_cx(*v)) {
        return Err(Error::InvalidCoordinate);
    }
    let zero = [T::zero(); 2];
    let w = window2(&y, &zero, z, cfg, 0)?;
    let r = w.radius as i64;
    let h = T::lit(0.5);
    let mut classes = [czero::<T>(); 12];
    let c0 = w.centre[0].to_i64().expect("finite centre");
    let c1 = w.centre[1].to_i64().expect("finite centre");
    for i in -r..=r {
        let n0 = c0 + i;
        let x0 = T::lit(n0 as f64);
        let p = n0.rem_euclid(2) as usize;
        for j in -r..=r {
            let n1 = c1 + j;
            let x1 = T::lit(n1 as f64);
            let quad = (tau[0][0] * (x0 * x0) + tau[0][1] * (T::lit(2.0) * x0 * x1) + tau[1][1] * (x1 * x1)) * h;
            let k = 6 * p + n1.rem_euclid(6) as usize;
            classes[k] = classes[k] + cis2pi(quad + z[0] * x0 + z[1] * x1);
        }
    }
    let roots = sixth_roots::<T>();
    let mut out = [czero::<T>(); 12];
    for alpha in 0..2 {
        for beta in 0..6 {
            let mut acc = czero();
            for p in 0..2 {
                let sign = if alpha * p % 2 == 1 { -T::one() } else { T::one() };
                for rr in 0..6 {
                    acc = acc + classes[6 * p + rr] * roots[(beta * rr) % 6] * sign;
                }
            }
            out[6 * alpha + beta] = acc;
        }
    }
    Ok((out, w.radius))
}

/// `ρ₆^k = e^{2πik/6}` with exact values for `k ∈ {0, 3}`.
pub fn sixth_roots<T: Real>() -> [Cx<T>; 6] {
    let h = T::lit(0.5);
    let s = T::lit(3.0).sqrt() * h;
    [
        Cx::new(T::one(), T::zero()),
        Cx::new(h, s),
        Cx::new(-h, s),
        Cx::new(-T::one(), T::zero()),
        Cx::new(-h, -s),
        Cx::new(h, -s),
    ]
}

/// Values for several characteristics at the same `(τ, z)`.
pub fn theta2_batch<T: Real>(chars: &[Characteristic], tau: &CMat2<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<Vec<Cx<T>>> {
    chars.iter().map(|ch| theta2(ch, tau, z, cfg)).collect()
}

struct Window1<T> {
    centre: T,
    radius: usize,
}

fn window1<T: Real>(tau: Cx<T>, a: T, z: Cx<T>, cfg: &ThetaConfig, extra: usize) -> Result<Window1<T>> {
    let yv = tau.im;
    let c = -z.im / yv;
    let centre = (c - a).round() + a;
    let s = (c - centre).abs().as_f64();
    let log_tol = cfg.tol.ln() - std::f64::consts::PI * (yv * c * c).as_f64();
    let needed = radius_for_log_tol(yv.as_f64(), s, log_tol, 1);
    if needed > cfg.max_radius {
        return Err(Error::TruncationCapExceeded {
            needed,
            cap: cfg.max_radius,
        });
    }
    Ok(Window1 {
        centre,
        radius: needed + extra,
    })
}

fn sum_window1<T: Real>(tau: Cx<T>, z: Cx<T>, b: T, w: &Window1<T>) -> Cx<T> {
    let r = w.radius as i64;
    let zz = z + b;
    let h = T::lit(0.5);
    let mut acc = czero();
    for i in -r..=r {
        let x = w.centre + T::lit(i as f64);
        acc = acc + cis2pi(tau * (h * x * x) + zz * x);
    }
    acc
}

/// One-variable theta `ϑ_{a,b}(τ, z) = Σ_n exp 2πi[½(n+a)²τ + (n+a)(z+b)]`.
pub fn theta1_detailed<T: Real>(a: Rational64, b: Rational64, tau: Cx<T>, z: Cx<T>, cfg: &ThetaConfig) -> Result<ThetaValue<T>> {
    theta1_widened(a, b, tau, z, cfg, 0)
}

pub fn theta1<T: Real>(a: Rational64, b: Rational64, tau: Cx<T>, z: Cx<T>, cfg: &ThetaConfig) -> Result<Cx<T>> {
    theta1_detailed(a, b, tau, z, cfg).map(|v| v.value)
}

pub fn theta1_widened<T: Real>(
    a: Rational64,
    b: Rational64,
    tau: Cx<T>,
    z: Cx<T>,
    cfg: &ThetaConfig,
    extra: usize,
) -> Result<ThetaValue<T>> {
    cfg.validate()?;
    for r in [a, b] {
        if 6 % r.denom() != 0 {
            return Err(Error::UnsupportedCharacteristic(*r.denom()));
        }
    }
    if !is_finite_cx(tau) || !is_finite_cx(z) {
        return Err(Error::InvalidCoordinate);
    }
    if tau.im <= T::zero() {
        return Err(Error::NotUpperHalfPlane);
    }
    let w = window1(tau, rat_to_real(a), z, cfg, extra)?;
    Ok(ThetaValue {
        value: sum_window1(tau, z, rat_to_real(b), &w),
        radius: w.radius,
    })
}

// Initial total sample count on a contour.
pub const DEFAULT_CONTOUR_STEPS: usize = 4096;
const MAX_CONTOUR_STEPS: usize = 1 << 20;
const ROUNDING_RESIDUAL: f64 = 0.01;

/// Winding number of `f` around the closed polygon through `corners`.
///
/// Sampling starts at `n_steps` points in total and doubles until every
/// phase step is below `π/3` and the accumulated turn is within 0.01 of an
/// integer.
pub fn count_zeros_on_loop<T: Real, F>(f: F, corners: &[Cx<T>; 4], n_steps: usize) -> Result<i64>
where
    F: Fn(Cx<T>) -> Cx<T>,
{
    try_count_zeros_on_loop(|w| Ok(f(w)), corners, n_steps)
}

/// Fallible variant of [`count_zeros_on_loop`].
pub fn try_count_zeros_on_loop<T: Real, F>(f: F, corners: &[Cx<T>; 4], n_steps: usize) -> Result<i64>
where
    F: Fn(Cx<T>) -> Result<Cx<T>>,
{
    if !corners.iter().all(|c| is_finite_cx(*c)) {
        return Err(Error::InvalidCoordinate);
    }
    let mut per_edge = n_steps.max(4).div_ceil(4);
    loop {
        let mut values = Vec::with_capacity(4 * per_edge + 1);
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            for k in 0..per_edge {
                let t = T::lit(k as f64 / per_edge as f64);
                values.push(f(a + (b - a) * t)?);
            }
        }
        values.push(values[0]);
        if !values.iter().all(|v| is_finite_cx(*v)) {
            return Err(Error::InvalidCoordinate);
        }
        let fmax = values.iter().fold(0.0f64, |m, v| m.max(v.norm().as_f64()));
        let fmin = values.iter().fold(f64::INFINITY, |m, v| m.min(v.norm().as_f64()));
        if fmin <= 1e-8 * fmax.max(1.0) {
            return Err(Error::ContourHitsZero);
        }
        let mut total = 0.0f64;
        let mut max_step = 0.0f64;
        for pair in values.windows(2) {
            let step = (pair[1] / pair[0]).arg().as_f64();
            max_step = max_step.max(step.abs());
            total += step;
        }
        let turns = total / std::f64::consts::TAU;
        let rounded = turns.round();
        if max_step < std::f64::consts::FRAC_PI_3 && (turns - rounded).abs() < ROUNDING_RESIDUAL {
            return Ok(rounded as i64);
        }
        if 4 * per_edge >= MAX_CONTOUR_STEPS {
            return Err(Error::ContourUnresolved(4 * per_edge));
        }
        per_edge *= 2;
    }
}

/// Corners `b, b+p, b+p+q, b+q` of the parallelogram spanned by `p`, `q`.
pub fn parallelogram<T: Real>(base: Cx<T>, p: Cx<T>, q: Cx<T>) -> [Cx<T>; 4] {
    [base, base + p, base + p + q, base + q]
}
