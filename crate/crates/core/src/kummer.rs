//! The Kummer map `φ = (ĝ₀:ĝ₁:ĝ₂:ĝ₃)`, recovery of its image quartic, the
//! product-case quadric and the relation satisfied by the invariant
//! coefficients of the quartics.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fitting::{fit_null, fit_null_split, monomial_count, monomial_exponents, FormFit, DEFAULT_REL_THRESHOLD};
use crate::lattice::SiegelPoint;
use crate::linalg::{singular_values, CMatrix};
use crate::projective::{normalize_max, ProjPoint3};
use crate::sampling::TorusSampler;
use crate::scalar::{cx, czero, max_modulus, Cx, Real};
use crate::sections::{to_g_basis, SectionEvaluator};
use crate::symmetry::{project_to_invariant, InvariantQuartic};
use crate::theta::ThetaConfig;

/// Samples whose section values are all below this modulus are rejected.
pub const MIN_SECTION_SCALE: f64 = 1e-6;

pub use crate::symmetry::BASE_LOCUS_REL;

/// Minimal sample count for a quartic fit: twice the number of monomials.
pub const MIN_QUARTIC_SAMPLES: usize = 70;

/// The map `A_τ ⇢ P³` at a fixed `τ`.
#[derive(Debug, Clone)]
pub struct KummerMap<T> {
    pub eval: SectionEvaluator<T>,
}

impl<T: Real> KummerMap<T> {
    pub fn new(tau: &SiegelPoint<T>, cfg: &ThetaConfig) -> Result<Self> {
        Ok(Self {
            eval: SectionEvaluator::new(tau, cfg)?,
        })
    }

    /// Normalized `ĝ(z)` and the section scale `max|ŝ(z)|`.
    pub fn map_with_scale(&self, z: &[Cx<T>; 2]) -> Result<(ProjPoint3<T>, T)> {
        let s = self.eval.values(z)?;
        let scale = max_modulus(&s);
        let g = to_g_basis(&s).g;
        if max_modulus(&g) < T::lit(BASE_LOCUS_REL) * scale || scale == T::zero() {
            return Err(Error::Indeterminate);
        }
        Ok((ProjPoint3::new(g)?, scale))
    }

    pub fn map(&self, z: &[Cx<T>; 2]) -> Result<ProjPoint3<T>> {
        self.map_with_scale(z).map(|p| p.0)
    }

    /// `n` image points of seeded torus samples, skipping samples with tiny
    /// section values or on the base locus.
    pub fn sample_image(&self, n: usize, seed: u64) -> Result<Vec<ProjPoint3<T>>> {
        let mut sampler = TorusSampler::new(&self.eval.period, seed);
        let budget = 100 * n.max(1);
        let mut out = Vec::with_capacity(n);
        let mut draws = 0;
        while out.len() < n {
            draws += 1;
            if draws > budget {
                return Err(Error::SamplingExhausted(budget));
            }
            let z = sampler.next_z();
            match self.map_with_scale(&z) {
                Ok((p, scale)) if scale.as_f64() >= MIN_SECTION_SCALE => out.push(p),
                Ok(_) | Err(Error::Indeterminate) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

pub fn kummer_map<T: Real>(tau: &SiegelPoint<T>, z: &[Cx<T>; 2], cfg: &ThetaConfig) -> Result<ProjPoint3<T>> {
    KummerMap::new(tau, cfg)?.map(z)
}

fn as_rows<T: Real>(pts: &[ProjPoint3<T>]) -> Vec<Vec<Cx<T>>> {
    pts.iter().map(|p| p.coords().to_vec()).collect()
}

/// Nullspace fit of degree `degree` to `n` image points; no nullity contract.
pub fn fit_image_form<T: Real>(tau: &SiegelPoint<T>, degree: u32, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<FormFit<T>> {
    let pts = KummerMap::new(tau, cfg)?.sample_image(n, seed)?;
    fit_null(&as_rows(&pts), degree, DEFAULT_REL_THRESHOLD)
}

/// Image quartic of a smooth Kummer surface.
#[derive(Debug, Clone, PartialEq)]
pub struct KummerQuartic<T> {
    pub fit: FormFit<T>,
    /// Max-normalized coefficients on `q₀ … q₄`.
    pub invariant: InvariantQuartic<T>,
    /// Norm of the unit coefficient vector outside `span(q₀ … q₄)`.
    pub inv_residual: T,
}

/// `λ` of a unit quartic coefficient vector, max-normalized.
pub fn lambda_of<T: Real>(coefficients: &[Cx<T>]) -> Result<(InvariantQuartic<T>, T)> {
    let (q, r) = project_to_invariant(coefficients);
    let n = normalize_max(&q.lambda)?;
    Ok((
        InvariantQuartic {
            lambda: [n[0], n[1], n[2], n[3], n[4]],
        },
        r,
    ))
}

/// Fits the image quartic from `n_samples` image points and projects it onto
/// the invariant quartics.
pub fn fit_kummer_quartic<T: Real>(tau: &SiegelPoint<T>, n_samples: usize, seed: u64, cfg: &ThetaConfig) -> Result<KummerQuartic<T>> {
    if n_samples < MIN_QUARTIC_SAMPLES {
        return Err(Error::InsufficientSamples {
            need: MIN_QUARTIC_SAMPLES,
            got: n_samples,
        });
    }
    let pts = KummerMap::new(tau, cfg)?.sample_image(n_samples, seed)?;
    quartic_from_points(&as_rows(&pts))
}

/// Quartic fit plus invariant projection for an arbitrary point set.
pub fn quartic_from_points<T: Real>(rows: &[Vec<Cx<T>>]) -> Result<KummerQuartic<T>> {
    let fit = fit_null(rows, 4, DEFAULT_REL_THRESHOLD)?;
    match fit.nullity {
        0 => return Err(Error::NonSurfaceImage(fit.smallest_relative(3))),
        1 => {}
        k => {
            return Err(Error::DegenerateLocus {
                nullity: k,
                singular_values: fit.smallest_relative(k + 2),
            })
        }
    }
    let (invariant, inv_residual) = lambda_of(&fit.coefficients)?;
    Ok(KummerQuartic {
        fit,
        invariant,
        inv_residual,
    })
}

/// Symmetric 4×4 matrix of a quadratic form in graded-lex coefficients.
pub fn quadric_matrix<T: Real>(coefficients: &[Cx<T>]) -> [[Cx<T>; 4]; 4] {
    let exps = monomial_exponents(4, 2);
    let mut m = [[czero::<T>(); 4]; 4];
    for (a, c) in exps.iter().zip(coefficients) {
        let idx: Vec<usize> = (0..4).flat_map(|i| std::iter::repeat_n(i, a[i] as usize)).collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            m[i][i] = *c;
        } else {
            let h = *c * T::lit(0.5);
            m[i][j] = h;
            m[j][i] = h;
        }
    }
    m
}

/// Singular values of the symmetric matrix of a quadratic form, descending.
pub fn quadric_singular_values<T: Real>(coefficients: &[Cx<T>]) -> Vec<T> {
    let m = quadric_matrix(coefficients);
    let rows: Vec<Vec<Cx<T>>> = m.iter().map(|r| r.to_vec()).collect();
    singular_values(&CMatrix::from_rows(&rows))
}

/// Numerical rank with relative threshold `1e-6`.
pub fn quadric_rank<T: Real>(coefficients: &[Cx<T>]) -> usize {
    let sv = quadric_singular_values(coefficients);
    let top = sv[0].as_f64();
    sv.iter().filter(|s| s.as_f64() > 1e-6 * top).count()
}

/// Quadric containing the image in the product case.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductQuadric<T> {
    pub fit: FormFit<T>,
    pub matrix_singular_values: Vec<T>,
    pub rank: usize,
}

pub fn product_case_quadric<T: Real>(tau: &SiegelPoint<T>, n_samples: usize, seed: u64, cfg: &ThetaConfig) -> Result<ProductQuadric<T>> {
    if !tau.is_diagonal() {
        return Err(Error::Precondition("product case requires tau2 = 0".into()));
    }
    let fit = fit_image_form(tau, 2, n_samples, seed, cfg)?;
    match fit.nullity {
        0 => return Err(Error::NonSurfaceImage(fit.smallest_relative(3))),
        1 => {}
        k => {
            return Err(Error::DegenerateLocus {
                nullity: k,
                singular_values: fit.smallest_relative(k + 2),
            })
        }
    }
    let sv = quadric_singular_values(&fit.coefficients);
    let rank = quadric_rank(&fit.coefficients);
    Ok(ProductQuadric {
        fit,
        matrix_singular_values: sv,
        rank,
    })
}

/// Key of a cached per-`τ` quartic fit: bit patterns of `τ`, seed, sample
/// count and configuration.
type CacheKey = ([u64; 6], u64, usize, u64, usize);

fn cache_key(tau: &SiegelPoint<f64>, seed: u64, n: usize, cfg: &ThetaConfig) -> CacheKey {
    let t = [tau.tau1(), tau.tau2(), tau.tau3()];
    (
        [
            t[0].re.to_bits(),
            t[0].im.to_bits(),
            t[1].re.to_bits(),
            t[1].im.to_bits(),
            t[2].re.to_bits(),
            t[2].im.to_bits(),
        ],
        seed,
        n,
        cfg.tol.to_bits(),
        cfg.max_radius,
    )
}

/// Run-level cache of quartic fits, safe for concurrent use.
#[derive(Debug, Default)]
pub struct QuarticCache {
    inner: Mutex<HashMap<CacheKey, KummerQuartic<f64>>>,
}

impl QuarticCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached fit, computing it on a miss. Concurrent misses on the same key
    /// compute identical values, so the insertion race is benign.
    pub fn get_or_fit(&self, tau: &SiegelPoint<f64>, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<KummerQuartic<f64>> {
        let key = cache_key(tau, seed, n, cfg);
        if let Some(v) = self.inner.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = fit_kummer_quartic(tau, n, seed, cfg)?;
        self.inner
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| v.clone());
        Ok(v)
    }
}

/// Parameters of the quintic discovery run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticParams {
    pub samples_per_tau: usize,
    pub seed: u64,
    pub rel_threshold: f64,
}

impl Default for QuinticParams {
    fn default() -> Self {
        Self {
            samples_per_tau: 80,
            seed: 7,
            rel_threshold: DEFAULT_REL_THRESHOLD,
        }
    }
}

pub const MIN_QUINTIC_TRAINING: usize = 150;

/// The quintic relation among the invariant coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QuinticDiscovery {
    pub fit: FormFit<f64>,
    pub train_lambdas: Vec<[Cx<f64>; 5]>,
    pub holdout_lambdas: Vec<[Cx<f64>; 5]>,
    /// Max `|Q(λ)|` over held-out `λ`, each max-normalized.
    pub holdout_residual: f64,
    /// Max over the training set of the invariant-projection residual.
    pub max_inv_residual: f64,
}

impl QuinticDiscovery {
    pub fn eval(&self, lambda: &[Cx<f64>; 5]) -> Result<Cx<f64>> {
        let n = normalize_max(lambda)?;
        Ok(self.fit.form().eval(&n))
    }
}

/// Per-`τ` seed derived from the run seed and the sample position.
pub fn derived_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64)
}

/// `λ` for each `τ`, computed in parallel and returned in input order.
pub fn lambdas_for(taus: &[SiegelPoint<f64>], params: &QuinticParams, cache: &QuarticCache, cfg: &ThetaConfig, offset: usize) -> Result<Vec<(usize, KummerQuartic<f64>)>> {
    taus.par_iter()
        .enumerate()
        .map(|(i, t)| {
            cache
                .get_or_fit(t, params.samples_per_tau, derived_seed(params.seed, offset + i), cfg)
                .map(|q| (offset + i, q))
        })
        .collect()
}

/// Degree-5 fit over the training `λ` and residual on the held-out `λ`.
pub fn discover_coefficient_quintic(
    train: &[SiegelPoint<f64>],
    holdout: &[SiegelPoint<f64>],
    params: &QuinticParams,
    cache: &QuarticCache,
    cfg: &ThetaConfig,
) -> Result<QuinticDiscovery> {
    if train.len() < MIN_QUINTIC_TRAINING {
        return Err(Error::InsufficientSamples {
            need: MIN_QUINTIC_TRAINING,
            got: train.len(),
        });
    }
    let tr = lambdas_for(train, params, cache, cfg, 0)?;
    let ho = lambdas_for(holdout, params, cache, cfg, train.len())?;
    let train_lambdas: Vec<[Cx<f64>; 5]> = tr.iter().map(|(_, q)| q.invariant.lambda).collect();
    let holdout_lambdas: Vec<[Cx<f64>; 5]> = ho.iter().map(|(_, q)| q.invariant.lambda).collect();
    let max_inv_residual = tr.iter().fold(0.0f64, |m, (_, q)| m.max(q.inv_residual));
    let fit = fit_null_split(&train_lambdas, &holdout_lambdas, 5, params.rel_threshold)?;
    if fit.nullity == 0 {
        return Err(Error::CoordinateInconsistency(fit.smallest_relative(4)));
    }
    let holdout_residual = fit.residual;
    Ok(QuinticDiscovery {
        fit,
        train_lambdas,
        holdout_lambdas,
        holdout_residual,
        max_inv_residual,
    })
}

/// Generic `τ` spread widely enough that the invariant coefficients cover
/// their moduli: `Im τ₁ ∈ [0.3, 1]`, `Im τ₃ ∈ [2.5, 9]`, `|Re τ₂| ≤ 3`,
/// `|Im τ₂| ≤ 1.5`, and `det Im τ > 0.2 · Im τ₁ · Im τ₃`.
pub fn random_generic_taus(n: usize, seed: u64) -> Vec<SiegelPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let t1 = cx(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..1.0));
        let t3 = cx(rng.gen_range(-9.0..9.0), rng.gen_range(2.5..9.0));
        let t2: Cx<f64> = cx(rng.gen_range(-3.0..3.0), rng.gen_range(-1.5..1.5));
        let det = t1.im * t3.im - t2.im * t2.im;
        if det > 0.2 * t1.im * t3.im {
            if let Ok(t) = SiegelPoint::new(t1, t2, t3) {
                out.push(t);
            }
        }
    }
    out
}

/// A point of `P⁵` on the hyperplane `Σuᵢ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NietoPoint<T> {
    pub u: [Cx<T>; 6],
}

impl<T: Real> NietoPoint<T> {
    pub fn new(u: [Cx<T>; 6]) -> Result<Self> {
        let n = normalize_max(&u)?;
        let s = n.iter().fold(czero::<T>(), |a, b| a + b);
        if s.norm().as_f64() > 1e-9 {
            return Err(Error::Precondition(format!("coordinate sum {:.3e} is not zero", s.norm().as_f64())));
        }
        Ok(Self { u })
    }
}

/// `(Σuᵢ, Σᵢ ∏_{j≠i} uⱼ)`.
pub fn nieto_residuals<T: Real>(u: &[Cx<T>; 6]) -> (Cx<T>, Cx<T>) {
    let r1 = u.iter().fold(czero::<T>(), |a, b| a + b);
    let r2 = (0..6).fold(czero::<T>(), |acc, i| {
        acc + (0..6)
            .filter(|j| *j != i)
            .fold(Cx::new(T::one(), T::zero()), |p, j| p * u[j])
    });
    (r1, r2)
}

/// Image points for export.
pub fn emit_cloud<T: Real>(tau: &SiegelPoint<T>, n: usize, seed: u64, cfg: &ThetaConfig) -> Result<Vec<ProjPoint3<T>>> {
    KummerMap::new(tau, cfg)?.sample_image(n, seed)
}

/// Number of monomials in the quintic fit.
pub fn quintic_columns() -> usize {
    monomial_count(5, 5)
}
