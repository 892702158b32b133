//! Vertical (p,q)-energy and (p,q)-harmonic section residuals for vector
//! fields on round spheres and flat tori.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the scalar type for the common cases.

pub mod energy;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod output;
pub mod regions;
pub mod scalar;
pub mod sections;
pub mod solver;
pub mod variational;
pub mod verify;

pub use energy::MetricParams;
pub use error::{Error, Result};
pub use geometry::{Manifold, ManifoldKind, Point, QuadratureScheme, QuadratureSet, TangentVector};
pub use scalar::Scalar;
pub use sections::{ScalarFieldSpec, SectionSpec};

pub type PointF64 = Point<f64>;
pub type TangentVectorF64 = TangentVector<f64>;
pub type SectionSpecF64 = SectionSpec<f64>;
pub type QuadratureSetF64 = QuadratureSet<f64>;
pub type MetricParamsF64 = MetricParams<f64>;

pub type PointF32 = Point<f32>;
pub type TangentVectorF32 = TangentVector<f32>;
pub type SectionSpecF32 = SectionSpec<f32>;
pub type QuadratureSetF32 = QuadratureSet<f32>;
pub type MetricParamsF32 = MetricParams<f32>;
