//! Genus-2 theta functions of level (2,6), the associated Kummer quartics,
//! their Heisenberg symmetry and their corank-1 degenerations.
//!
//! Numerical types are generic over [`scalar::Real`]; the aliases below fix
//! them to `f64`.

pub mod degeneration;
pub mod error;
pub mod fitting;
pub mod kummer;
pub mod lattice;
pub mod linalg;
pub mod projective;
pub mod sampling;
pub mod scalar;
pub mod sections;
pub mod symmetry;
pub mod theta;

pub use error::{Error, Result};

pub type Complex = scalar::Cx<f64>;
pub type SiegelPoint = lattice::SiegelPoint<f64>;
pub type PeriodData = lattice::PeriodData<f64>;
pub type EllipticPoint = lattice::EllipticPoint<f64>;
pub type ProjPoint3 = projective::ProjPoint3<f64>;
pub type SectionVector = sections::SectionVector<f64>;
pub type SectionEvaluator = sections::SectionEvaluator<f64>;
pub type FormFit = fitting::FormFit<f64>;
pub type KummerMap = kummer::KummerMap<f64>;
pub type KummerQuartic = kummer::KummerQuartic<f64>;
