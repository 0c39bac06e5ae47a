use thiserror::Error;

/// Errors raised by the numerical kernels.
///
/// Diagnostic payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid coordinate")]
    InvalidCoordinate,
    #[error("not in upper half plane")]
    NotUpperHalfPlane,
    #[error("not in H₂: imaginary part is not positive definite")]
    NotInSiegel,
    #[error("not SPD")]
    NotSpd,
    #[error("ill-conditioned period lattice: Gram condition number {0:.3e} exceeds 1e10")]
    IllConditioned(f64),
    #[error("truncation cap exceeded: radius {needed} required, cap is {cap}")]
    TruncationCapExceeded { needed: usize, cap: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported characteristic denominator {0} (must divide 6)")]
    UnsupportedCharacteristic(i64),
    #[error("contour hits zero: perturb base point")]
    ContourHitsZero,
    #[error("contour phase did not resolve after {0} samples")]
    ContourUnresolved(usize),
    #[error("point not on the torus part")]
    PointNotOnTorus,
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("indeterminate point: z is a 2-torsion-type fixed point")]
    Indeterminate,
    #[error("zero vector")]
    ZeroVector,
    #[error("degenerate sample")]
    DegenerateSample,
    #[error("insufficient samples (need ≥ {need}, got {got})")]
    InsufficientSamples { need: usize, got: usize },
    #[error("sampling error or non-surface image: nullity 0 (smallest singular values {0:?})")]
    NonSurfaceImage(Vec<f64>),
    #[error("degenerate: product/bielliptic/degeneration locus (nullity {nullity}, smallest singular values {singular_values:?})")]
    DegenerateLocus {
        nullity: usize,
        singular_values: Vec<f64>,
    },
    #[error("coordinate/normalization inconsistency across samples (smallest singular values {0:?})")]
    CoordinateInconsistency(Vec<f64>),
    #[error("rank deficiency: even rank {plus}, odd rank {minus}; singular values {singular_values:?}")]
    RankDeficiency {
        plus: usize,
        minus: usize,
        singular_values: Vec<f64>,
    },
    #[error("classification failed: {reason}; singular values {singular_values:?}")]
    ClassificationFailed {
        reason: String,
        singular_values: Vec<Vec<f64>>,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sampler exhausted its rejection budget after {0} draws")]
    SamplingExhausted(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
