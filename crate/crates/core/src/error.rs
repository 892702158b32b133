use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("manifold dimension must be at least 1")]
    ZeroDimension,

    #[error("point is not on the manifold (|x| - 1 = {deviation:e})")]
    PointOffManifold { deviation: f64 },

    #[error("direction must be a unit vector (|u| = {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("vector is not tangent at the base point (<v,x> = {normal:e})")]
    NotTangent { normal: f64 },

    #[error("section `{section}` is not defined on {manifold}")]
    IncompatibleSection { section: String, manifold: String },

    #[error("conformal gradient axis must be nonzero")]
    ZeroAxis,

    #[error("finite-difference step must be positive (got {0})")]
    InvalidStep(f64),

    #[error("quadrature set is empty")]
    EmptyQuadrature,

    #[error("quadrature scheme {scheme} is not available on {manifold}")]
    UnsupportedScheme { scheme: String, manifold: String },

    #[error("section does not have constant length {expected} (max deviation {deviation:e})")]
    NotConstantLength { expected: f64, deviation: f64 },

    #[error("section does not have unit length (max deviation {deviation:e})")]
    NotUnitLength { deviation: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("cannot form the variation {0} inside the closed-form families")]
    VariationUnsupported(String),

    #[error("could not parse {what}: {message}")]
    Parse { what: &'static str, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
