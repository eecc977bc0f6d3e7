//! Exact certification of `b_v(s)`-metric spaces and fixed-point analysis of
//! self-maps on finite truncations.
//!
//! * [`space`]: finite spaces with a materialized distance table, self-maps.
//! * [`verifier`]: exhaustive polygon-inequality certification and least `s`.
//! * [`analysis`]: contractivity, the ε-δ conditions (A) and (B), orbit bounds.
//! * [`picard`]: Picard iteration with cycle detection and diagnostics.
//! * [`gallery`]: the example spaces, a halving witness, random instances.
//! * [`document`]: JSON input documents.
//! * [`cli`]: the `bvmetric` command-line driver.
//!
//! Everything is generic over an exact [`Scalar`]; [`Rational`] is the
//! default instantiation and [`BigRational`] removes any overflow ceiling.

pub mod analysis;
pub mod cli;
pub mod document;
pub mod gallery;
pub mod picard;
pub mod scalar;
pub mod space;
pub mod verifier;

pub use scalar::{parse_scalar, Scalar};
pub use space::{make_space, scale_space, ClassStatus, FiniteSpace, MetricClass, PointId, SelfMap};

/// Fixed-width exact rational, reduced with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;
/// Arbitrary-precision exact rational.
pub type BigRational = num_rational::BigRational;

pub type Space = FiniteSpace<Rational>;
pub type BigSpace = FiniteSpace<BigRational>;
pub type Trace = picard::OrbitTrace<Rational>;
pub type Certification = verifier::CertificationResult<Rational>;
pub type Instance = gallery::GalleryInstance<Rational>;
