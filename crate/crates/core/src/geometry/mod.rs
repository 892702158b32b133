//! Embedded geometry of the round sphere `Sⁿ ⊂ ℝⁿ⁺¹` and the flat torus `Tⁿ = ℝⁿ/ℤⁿ`.
//!
//! Spheres are handled extrinsically: tangent vectors are ambient vectors
//! orthogonal to the base point, and the Levi-Civita connection is the
//! tangential projection of the ambient directional derivative. The torus uses
//! the period-1 lattice in every coordinate, so its geometry is flat and every
//! operation reduces to ordinary vector arithmetic modulo 1.
//!
//! The `*_raw` functions operate on coordinate slices without validation and are
//! what the section and energy code uses in its inner loops. The checked
//! counterparts take [`Point`] and [`TangentVector`] and enforce the invariants.

mod quadrature;

pub use quadrature::{gauss_legendre, QuadratureScheme, QuadratureSet};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, lincomb, norm, scale};
use crate::scalar::Scalar;

const POINT_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Sphere,
    Torus,
}

/// Base manifold: the unit sphere `Sⁿ` or the flat torus `Tⁿ`, `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Manifold {
    kind: ManifoldKind,
    dim: usize,
}

impl Manifold {
    pub fn new(kind: ManifoldKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { kind, dim })
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(ManifoldKind::Sphere, dim)
    }

    pub fn torus(dim: usize) -> Result<Self> {
        Self::new(ManifoldKind::Torus, dim)
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_sphere(&self) -> bool {
        self.kind == ManifoldKind::Sphere
    }

    pub fn is_odd_sphere(&self) -> bool {
        self.is_sphere() && self.dim % 2 == 1
    }

    /// Length of coordinate vectors: `n + 1` on the sphere, `n` on the torus.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Sphere => self.dim + 1,
            ManifoldKind::Torus => self.dim,
        }
    }

    /// `vol(Sⁿ) = 2π^{(n+1)/2} / Γ((n+1)/2)`, `vol(Tⁿ) = 1`.
    ///
    /// Evaluated through `vol(Sⁿ) = 2π/(n-1) · vol(Sⁿ⁻²)` starting from
    /// `vol(S⁰) = 2`, `vol(S¹) = 2π`.
    pub fn volume<T: Scalar>(&self) -> T {
        match self.kind {
            ManifoldKind::Torus => T::one(),
            ManifoldKind::Sphere => {
                let two_pi = T::TAU();
                let (mut vol, mut k) = if self.dim % 2 == 0 {
                    (T::lit(2.0), 0)
                } else {
                    (two_pi, 1)
                };
                while k < self.dim {
                    k += 2;
                    vol = vol * two_pi / T::from_count(k - 1);
                }
                vol
            }
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: len });
        }
        Ok(())
    }

    /// Validates coordinates as a point of the manifold.
    ///
    /// Sphere points must have unit norm within `1e-12` and are renormalized;
    /// torus coordinates are reduced modulo 1.
    pub fn point<T: Scalar>(&self, coords: Vec<T>) -> Result<Point<T>> {
        self.check_len(coords.len())?;
        match self.kind {
            ManifoldKind::Sphere => {
                let r = norm(&coords);
                let deviation = (r - T::one()).abs();
                if !(deviation <= T::tolerance(POINT_TOL)) {
                    return Err(Error::PointOffManifold { deviation: deviation.as_f64() });
                }
                Ok(Point { coords: scale(T::one() / r, &coords) })
            }
            ManifoldKind::Torus => Ok(Point { coords: coords.into_iter().map(wrap_unit).collect() }),
        }
    }

    /// Normalizes an arbitrary nonzero ambient vector onto the sphere, or wraps onto the torus.
    pub fn point_from_ambient<T: Scalar>(&self, coords: Vec<T>) -> Result<Point<T>> {
        self.check_len(coords.len())?;
        match self.kind {
            ManifoldKind::Sphere => {
                let r = norm(&coords);
                if r == T::zero() {
                    return Err(Error::PointOffManifold { deviation: 1.0 });
                }
                Ok(Point { coords: scale(T::one() / r, &coords) })
            }
            ManifoldKind::Torus => Ok(Point { coords: coords.into_iter().map(wrap_unit).collect() }),
        }
    }

    /// Orthogonal projection `Pₓ` onto the tangent space.
    pub fn tangent_project<T: Scalar>(&self, x: &Point<T>, v: &[T]) -> Result<TangentVector<T>> {
        self.check_len(x.coords.len())?;
        self.check_len(v.len())?;
        Ok(TangentVector { at: x.clone(), vec: self.project_raw(&x.coords, v) })
    }

    /// Builds a tangent vector, checking tangency within `1e-10`.
    pub fn tangent<T: Scalar>(&self, x: &Point<T>, v: Vec<T>) -> Result<TangentVector<T>> {
        self.check_len(v.len())?;
        if self.is_sphere() {
            let normal = dot(&x.coords, &v);
            if !(normal.abs() <= T::tolerance(TANGENT_TOL) * (T::one() + norm(&v))) {
                return Err(Error::NotTangent { normal: normal.as_f64() });
            }
        }
        Ok(TangentVector { at: x.clone(), vec: v })
    }

    pub fn project_raw<T: Scalar>(&self, x: &[T], v: &[T]) -> Vec<T> {
        match self.kind {
            ManifoldKind::Sphere => {
                let s = dot(v, x);
                let mut out = v.to_vec();
                axpy(-s, x, &mut out);
                out
            }
            ManifoldKind::Torus => v.to_vec(),
        }
    }

    /// Deterministic orthonormal frame of `TₓM`.
    ///
    /// On the sphere the standard basis vectors are projected, the index
    /// maximizing `|⟨eᵢ, x⟩|` is dropped (lowest index on ties), and the rest are
    /// Gram–Schmidt orthonormalized in ascending index order.
    pub fn orthonormal_frame<T: Scalar>(&self, x: &Point<T>) -> Vec<TangentVector<T>> {
        self.frame_raw(&x.coords)
            .into_iter()
            .map(|vec| TangentVector { at: x.clone(), vec })
            .collect()
    }

    pub fn frame_raw<T: Scalar>(&self, x: &[T]) -> Vec<Vec<T>> {
        let n = self.ambient_dim();
        match self.kind {
            ManifoldKind::Torus => (0..n)
                .map(|i| {
                    let mut e = vec![T::zero(); n];
                    e[i] = T::one();
                    e
                })
                .collect(),
            ManifoldKind::Sphere => {
                let mut drop = 0;
                for i in 1..n {
                    if x[i].abs() > x[drop].abs() {
                        drop = i;
                    }
                }
                let mut frame: Vec<Vec<T>> = Vec::with_capacity(n - 1);
                for i in (0..n).filter(|&i| i != drop) {
                    // Pₓ eᵢ = eᵢ - xᵢ x
                    let mut v = scale(-x[i], x);
                    v[i] += T::one();
                    // two passes of modified Gram–Schmidt
                    for _ in 0..2 {
                        for e in &frame {
                            let c = dot(&v, e);
                            axpy(-c, e, &mut v);
                        }
                        let c = dot(&v, x);
                        axpy(-c, x, &mut v);
                    }
                    let r = norm(&v);
                    v.iter_mut().for_each(|vi| *vi /= r);
                    frame.push(v);
                }
                frame
            }
        }
    }

    /// `γ(t)` for the unit-speed geodesic with `γ(0) = x`, `γ'(0) = u`.
    pub fn geodesic<T: Scalar>(&self, x: &Point<T>, u: &TangentVector<T>, t: T) -> Result<Point<T>> {
        self.check_unit(x, u)?;
        Ok(Point { coords: self.geodesic_raw(&x.coords, &u.vec, t) })
    }

    pub fn geodesic_raw<T: Scalar>(&self, x: &[T], u: &[T], t: T) -> Vec<T> {
        match self.kind {
            ManifoldKind::Sphere => {
                let mut y = lincomb(t.cos(), x, t.sin(), u);
                let r = norm(&y);
                y.iter_mut().for_each(|yi| *yi /= r);
                y
            }
            ManifoldKind::Torus => x.iter().zip(u).map(|(&xi, &ui)| wrap_unit(xi + t * ui)).collect(),
        }
    }

    /// Velocity `γ'(t)` of the geodesic with `γ(0) = x`, `γ'(0) = u`.
    pub fn geodesic_velocity_raw<T: Scalar>(&self, x: &[T], u: &[T], t: T) -> Vec<T> {
        match self.kind {
            ManifoldKind::Sphere => lincomb(-t.sin(), x, t.cos(), u),
            ManifoldKind::Torus => u.to_vec(),
        }
    }

    /// Parallel transport of `v ∈ TₓM` along the geodesic `γ(s) = exp_x(s u)` to `s = t`.
    pub fn parallel_transport<T: Scalar>(
        &self,
        x: &Point<T>,
        u: &TangentVector<T>,
        t: T,
        v: &TangentVector<T>,
    ) -> Result<TangentVector<T>> {
        self.check_unit(x, u)?;
        self.check_len(v.vec.len())?;
        if self.is_sphere() {
            self.tangent(x, v.vec.clone())?;
        }
        Ok(TangentVector {
            at: Point { coords: self.geodesic_raw(&x.coords, &u.vec, t) },
            vec: self.transport_raw(&x.coords, &u.vec, t, &v.vec),
        })
    }

    /// `v = αu + w` with `w ⊥ u` goes to `α γ'(t) + w`.
    pub fn transport_raw<T: Scalar>(&self, x: &[T], u: &[T], t: T, v: &[T]) -> Vec<T> {
        match self.kind {
            ManifoldKind::Sphere => {
                let alpha = dot(v, u);
                let mut out = v.to_vec();
                axpy(-alpha, u, &mut out);
                let vel = self.geodesic_velocity_raw(x, u, t);
                axpy(alpha, &vel, &mut out);
                out
            }
            ManifoldKind::Torus => v.to_vec(),
        }
    }

    /// Brings `v ∈ T_{γ(t)}M` back to `TₓM` along the same geodesic.
    pub fn transport_back_raw<T: Scalar>(&self, x: &[T], u: &[T], t: T, v: &[T]) -> Vec<T> {
        match self.kind {
            ManifoldKind::Sphere => {
                let y = self.geodesic_raw(x, u, t);
                let vel = self.geodesic_velocity_raw(x, u, t);
                self.transport_raw(&y, &vel, -t, v)
            }
            ManifoldKind::Torus => v.to_vec(),
        }
    }

    fn check_unit<T: Scalar>(&self, x: &Point<T>, u: &TangentVector<T>) -> Result<()> {
        self.check_len(x.coords.len())?;
        self.check_len(u.vec.len())?;
        let r = norm(&u.vec);
        if !((r - T::one()).abs() <= T::tolerance(UNIT_TOL)) {
            return Err(Error::NonUnitDirection { norm: r.as_f64() });
        }
        Ok(())
    }

    /// Central-difference Riemannian gradient of a scalar function of the ambient coordinates.
    pub fn gradient_fd<T: Scalar, F>(&self, x: &[T], f: F, h: T) -> Result<Vec<T>>
    where
        F: Fn(&[T]) -> T,
    {
        check_step(h)?;
        let mut grad = vec![T::zero(); x.len()];
        for e in self.frame_raw(x) {
            let fp = f(&self.geodesic_raw(x, &e, h));
            let fm = f(&self.geodesic_raw(x, &e, -h));
            axpy((fp - fm) / (h + h), &e, &mut grad);
        }
        Ok(grad)
    }

    /// Central-difference Laplace–Beltrami operator, sign convention `Δ = -Trace ∇d`.
    ///
    /// Second derivatives are taken along the geodesics through `x` in the frame
    /// directions, so the connection correction of the Hessian trace vanishes.
    pub fn laplacian_fd<T: Scalar, F>(&self, x: &[T], f: F, h: T) -> Result<T>
    where
        F: Fn(&[T]) -> T,
    {
        check_step(h)?;
        let f0 = f(x);
        let mut acc = T::zero();
        for e in self.frame_raw(x) {
            let fp = f(&self.geodesic_raw(x, &e, h));
            let fm = f(&self.geodesic_raw(x, &e, -h));
            acc += (fp - f0 - f0 + fm) / (h * h);
        }
        Ok(-acc)
    }
}

pub(crate) fn check_step<T: Scalar>(h: T) -> Result<()> {
    if !(h > T::zero()) {
        return Err(Error::InvalidStep(h.as_f64()));
    }
    Ok(())
}

fn wrap_unit<T: Scalar>(x: T) -> T {
    let r = x - x.floor();
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ManifoldKind::Sphere => write!(f, "sphere:{}", self.dim),
            ManifoldKind::Torus => write!(f, "torus:{}", self.dim),
        }
    }
}

impl FromStr for Manifold {
    type Err = Error;

    /// Parses `sphere:<n>` or `torus:<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse { what: "manifold", message };
        let (kind, dim) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| parse_err(format!("expected `sphere:<n>` or `torus:<n>`, got `{s}`")))?;
        let dim: usize = dim.trim().parse().map_err(|_| parse_err(format!("bad dimension `{dim}`")))?;
        let kind = match kind.trim() {
            "sphere" => ManifoldKind::Sphere,
            "torus" => ManifoldKind::Torus,
            other => return Err(parse_err(format!("unknown manifold kind `{other}`"))),
        };
        Manifold::new(kind, dim).map_err(|e| parse_err(e.to_string()))
    }
}

/// A point of the base manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub(crate) fn from_raw(coords: Vec<T>) -> Self {
        Self { coords }
    }
}

/// An ambient vector tangent to the manifold at `at`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangentVector<T> {
    pub at: Point<T>,
    pub vec: Vec<T>,
}

impl<T: Scalar> TangentVector<T> {
    pub fn norm(&self) -> T {
        norm(&self.vec)
    }
}
