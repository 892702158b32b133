//! Closed-form vector-field families and their covariant derivatives.
//!
//! Every family is an ambient-defined field whose Levi-Civita derivative is the
//! tangential part of the ambient derivative. First derivatives are closed form
//! for every family. Second-order data (rough Laplacian) is closed form for all
//! families except `LinearAmbient`, where it is assembled from the closed-form
//! first derivative by one nested central difference (see [`jet`]).

mod fd;
mod jet;
mod text;

pub use fd::{codifferential_phi_fd, covariant_derivative_fd, covariant_derivative_fd_richardson, rough_laplacian_fd, FdOptions};
pub use jet::{FirstJet, JetData, JetKind};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, QuadratureSet, TangentVector};
use crate::linalg::{add, axpy, dot, norm, norm_sq, scale, SquareMatrix};
use crate::scalar::Scalar;

/// Real-valued function on the base manifold, used as a rescaling factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFieldSpec<T> {
    Constant { k: T },
    /// `λ(x) = ⟨a, x⟩` restricted to the sphere.
    AxisLinear { a: Vec<T> },
}

impl<T: Scalar> ScalarFieldSpec<T> {
    pub fn value(&self, x: &[T]) -> T {
        match self {
            Self::Constant { k } => *k,
            Self::AxisLinear { a } => dot(a, x),
        }
    }

    /// Riemannian gradient: `0` or `a - ⟨a,x⟩x`.
    pub fn gradient(&self, m: &Manifold, x: &[T]) -> Vec<T> {
        match self {
            Self::Constant { .. } => vec![T::zero(); x.len()],
            Self::AxisLinear { a } => m.project_raw(x, a),
        }
    }

    /// `Δf` with `Δ = -Trace ∇d`; `λ` is an eigenfunction: `Δλ = nλ`.
    pub fn laplacian(&self, m: &Manifold, x: &[T]) -> T {
        match self {
            Self::Constant { .. } => T::zero(),
            Self::AxisLinear { a } => T::from_count(m.dim()) * dot(a, x),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant { .. })
    }

    fn scaled(&self, t: T) -> Self {
        match self {
            Self::Constant { k } => Self::Constant { k: t * *k },
            Self::AxisLinear { a } => Self::AxisLinear { a: scale(t, a) },
        }
    }
}

/// A vector field on the base manifold from one of the closed-form families.
#[derive(Debug, Clone, PartialEq)]
pub enum SectionSpec<T> {
    /// `σ(x) = a - ⟨a,x⟩x`, the gradient of the height function `λ = ⟨a,·⟩`.
    ConformalGradient { axis: Vec<T> },
    /// `ξ(x) = Jx` with `J(x₁,x₂,…) = (-x₂,x₁,…,-x₂ₘ₊₂,x₂ₘ₊₁)`; odd spheres only.
    Hopf,
    /// `σ(x) = Pₓ(Ax + b)`.
    LinearAmbient { matrix: SquareMatrix<T>, offset: Vec<T> },
    /// `σ = f · base`.
    Rescaled { base: Box<SectionSpec<T>>, factor: ScalarFieldSpec<T> },
    /// Constant (parallel) field on the flat torus.
    ConstantTorus { c: Vec<T> },
    Zero,
}

impl<T: Scalar> SectionSpec<T> {
    pub fn conformal(axis: Vec<T>) -> Self {
        Self::ConformalGradient { axis }
    }

    pub fn scaled_by(base: SectionSpec<T>, k: T) -> Self {
        Self::Rescaled { base: Box::new(base), factor: ScalarFieldSpec::Constant { k } }
    }

    /// Short family name, used in diagnostics.
    pub fn family(&self) -> &'static str {
        match self {
            Self::ConformalGradient { .. } => "conformal",
            Self::Hopf => "hopf",
            Self::LinearAmbient { .. } => "linear",
            Self::Rescaled { .. } => "scaled",
            Self::ConstantTorus { .. } => "constant",
            Self::Zero => "zero",
        }
    }

    /// Checks that the section is defined on `m` with matching dimensions.
    pub fn validate(&self, m: &Manifold) -> Result<()> {
        let incompatible = || Error::IncompatibleSection { section: self.to_string(), manifold: m.to_string() };
        let check_len = |len: usize| {
            if len != m.ambient_dim() {
                Err(Error::DimensionMismatch { expected: m.ambient_dim(), got: len })
            } else {
                Ok(())
            }
        };
        match self {
            Self::ConformalGradient { axis } => {
                if !m.is_sphere() {
                    return Err(incompatible());
                }
                check_len(axis.len())?;
                if axis.iter().all(|&a| a == T::zero()) {
                    return Err(Error::ZeroAxis);
                }
                Ok(())
            }
            Self::Hopf => {
                if m.is_odd_sphere() {
                    Ok(())
                } else {
                    Err(incompatible())
                }
            }
            Self::LinearAmbient { matrix, offset } => {
                if !m.is_sphere() {
                    return Err(incompatible());
                }
                check_len(matrix.dim())?;
                check_len(offset.len())
            }
            Self::Rescaled { base, factor } => {
                base.validate(m)?;
                match factor {
                    ScalarFieldSpec::Constant { .. } => Ok(()),
                    ScalarFieldSpec::AxisLinear { a } => {
                        if !m.is_sphere() {
                            return Err(incompatible());
                        }
                        check_len(a.len())
                    }
                }
            }
            Self::ConstantTorus { c } => {
                if m.is_sphere() {
                    return Err(incompatible());
                }
                check_len(c.len())
            }
            Self::Zero => Ok(()),
        }
    }

    /// `true` when the whole jet, including the rough Laplacian, is closed form.
    pub fn is_analytic(&self) -> bool {
        match self {
            Self::LinearAmbient { .. } => false,
            Self::Rescaled { base, .. } => base.is_analytic(),
            _ => true,
        }
    }

    /// Whether `|σ|` is constant by construction (unit or scaled unit families).
    pub fn has_constant_length(&self) -> bool {
        match self {
            Self::Hopf | Self::ConstantTorus { .. } | Self::Zero => true,
            Self::Rescaled { base, factor } => factor.is_constant() && base.has_constant_length(),
            _ => false,
        }
    }

    /// Value `σ(x)` at a validated point.
    pub fn eval(&self, m: &Manifold, x: &Point<T>) -> Result<TangentVector<T>> {
        self.validate(m)?;
        Ok(TangentVector { at: x.clone(), vec: self.value_raw(m, x.coords()) })
    }

    /// `∇_X σ` from the closed-form family formula.
    pub fn covariant_derivative(&self, m: &Manifold, x: &Point<T>, dir: &TangentVector<T>) -> Result<TangentVector<T>> {
        self.validate(m)?;
        let dir = m.tangent(x, dir.vec.clone())?;
        Ok(TangentVector { at: x.clone(), vec: self.derivative_raw(m, x.coords(), &dir.vec) })
    }

    pub fn value_raw(&self, m: &Manifold, x: &[T]) -> Vec<T> {
        match self {
            Self::ConformalGradient { axis } => m.project_raw(x, axis),
            Self::Hopf => hopf_j(x),
            Self::LinearAmbient { matrix, offset } => m.project_raw(x, &add(&matrix.mul_vec(x), offset)),
            Self::Rescaled { base, factor } => scale(factor.value(x), &base.value_raw(m, x)),
            Self::ConstantTorus { c } => c.clone(),
            Self::Zero => vec![T::zero(); x.len()],
        }
    }

    /// Closed-form `∇_X σ` for tangent `X` at `x` (no validation).
    pub fn derivative_raw(&self, m: &Manifold, x: &[T], dir: &[T]) -> Vec<T> {
        match self {
            Self::ConformalGradient { axis } => scale(-dot(axis, x), dir),
            // Pₓ(JX) = JX + ⟨X, Jx⟩x, which is iX for X ⊥ ξ and 0 for X ∥ ξ
            Self::Hopf => m.project_raw(x, &hopf_j(dir)),
            Self::LinearAmbient { matrix, offset } => {
                let s = dot(&add(&matrix.mul_vec(x), offset), x);
                let mut out = m.project_raw(x, &matrix.mul_vec(dir));
                axpy(-s, dir, &mut out);
                out
            }
            Self::Rescaled { base, factor } => {
                let df = dot(&factor.gradient(m, x), dir);
                let mut out = scale(factor.value(x), &base.derivative_raw(m, x, dir));
                axpy(df, &base.value_raw(m, x), &mut out);
                out
            }
            Self::ConstantTorus { .. } | Self::Zero => vec![T::zero(); x.len()],
        }
    }

    /// `∇F = Σᵢ ⟨∇_{Eᵢ}σ, σ⟩ Eᵢ` with `F = ½|σ|²`.
    pub fn grad_f_raw(&self, m: &Manifold, x: &[T]) -> Vec<T> {
        let value = self.value_raw(m, x);
        let mut grad = vec![T::zero(); x.len()];
        for e in m.frame_raw(x) {
            let c = dot(&self.derivative_raw(m, x, &e), &value);
            axpy(c, &e, &mut grad);
        }
        grad
    }

    /// Closed-form `ΔF` for `F = ½|σ|²`.
    pub fn laplacian_f_raw(&self, m: &Manifold, x: &[T]) -> T {
        let n = T::from_count(m.dim());
        match self {
            Self::ConformalGradient { axis } => {
                let lambda = dot(axis, x);
                norm_sq(axis) - (n + T::one()) * lambda * lambda
            }
            Self::Hopf | Self::ConstantTorus { .. } | Self::Zero => T::zero(),
            Self::LinearAmbient { matrix, offset } => linear_ambient_laplacian_f(m, matrix, offset, x),
            Self::Rescaled { base, factor } => {
                // Δ(f² F_b) = f² ΔF_b + F_b Δ(f²) - 2⟨∇f², ∇F_b⟩,  Δ(f²) = 2fΔf - 2|∇f|²
                let f = factor.value(x);
                let grad_f = factor.gradient(m, x);
                let lap_f = factor.laplacian(m, x);
                let two = T::lit(2.0);
                let f_base = norm_sq(&base.value_raw(m, x)) / two;
                let grad_fb = base.grad_f_raw(m, x);
                f * f * base.laplacian_f_raw(m, x) + f_base * (two * f * lap_f - two * norm_sq(&grad_f))
                    - two * two * f * dot(&grad_f, &grad_fb)
            }
        }
    }

    /// `∇*∇σ`; closed form except for `LinearAmbient`, which uses `fd`.
    pub fn rough_laplacian_raw(&self, m: &Manifold, x: &[T], fd: &FdOptions<T>) -> Vec<T> {
        let n = T::from_count(m.dim());
        match self {
            Self::ConformalGradient { .. } => self.value_raw(m, x),
            // ∇*∇ξ = |∇ξ|² ξ = (n - 1) ξ on S^{2m+1}
            Self::Hopf => scale(n - T::one(), &hopf_j(x)),
            Self::LinearAmbient { .. } => fd::rough_laplacian_raw(self, m, x, fd),
            Self::Rescaled { base, factor } => {
                // ∇*∇(fσ) = f ∇*∇σ + (Δf)σ - 2∇_{∇f}σ
                let grad_f = factor.gradient(m, x);
                let mut out = scale(factor.value(x), &base.rough_laplacian_raw(m, x, fd));
                axpy(factor.laplacian(m, x), &base.value_raw(m, x), &mut out);
                axpy(-T::lit(2.0), &base.derivative_raw(m, x, &grad_f), &mut out);
                out
            }
            Self::ConstantTorus { .. } | Self::Zero => vec![T::zero(); x.len()],
        }
    }

    /// Height `λ(x) = ⟨a, x⟩` for families carrying an axis.
    pub fn axis_height(&self, x: &[T]) -> Option<T> {
        match self {
            Self::ConformalGradient { axis } => Some(dot(axis, x)),
            Self::Rescaled { factor: ScalarFieldSpec::AxisLinear { a }, .. } => Some(dot(a, x)),
            Self::Rescaled { base, .. } => base.axis_height(x),
            _ => None,
        }
    }

    /// `t · σ` inside the closed-form families.
    pub fn scaled(&self, t: T) -> Self {
        if t == T::zero() {
            return Self::Zero;
        }
        match self {
            Self::ConformalGradient { axis } => Self::ConformalGradient { axis: scale(t, axis) },
            Self::LinearAmbient { matrix, offset } => Self::LinearAmbient { matrix: matrix.scaled(t), offset: scale(t, offset) },
            Self::Rescaled { base, factor } => Self::Rescaled { base: base.clone(), factor: factor.scaled(t) },
            Self::ConstantTorus { c } => Self::ConstantTorus { c: scale(t, c) },
            Self::Zero => Self::Zero,
            Self::Hopf => Self::scaled_by(Self::Hopf, t),
        }
    }

    /// `(A, b)` with `σ(x) = Pₓ(Ax + b)` when the field is linear-ambient.
    pub fn as_linear_ambient(&self, m: &Manifold) -> Option<(SquareMatrix<T>, Vec<T>)> {
        if !m.is_sphere() {
            return None;
        }
        let d = m.ambient_dim();
        match self {
            Self::ConformalGradient { axis } => Some((SquareMatrix::zeros(d), axis.clone())),
            Self::Hopf => Some((hopf_matrix(d), vec![T::zero(); d])),
            Self::LinearAmbient { matrix, offset } => Some((matrix.clone(), offset.clone())),
            Self::Zero => Some((SquareMatrix::zeros(d), vec![T::zero(); d])),
            Self::Rescaled { base, factor: ScalarFieldSpec::Constant { k } } => {
                base.as_linear_ambient(m).map(|(a, b)| (a.scaled(*k), scale(*k, &b)))
            }
            _ => None,
        }
    }

    /// `σ + t ρ`, kept in the most specific closed-form family available.
    ///
    /// Returns `None` when the sum leaves the families (for example a
    /// non-constant rescaling plus another field).
    pub fn add_scaled(&self, t: T, other: &Self, m: &Manifold) -> Option<Self> {
        if t == T::zero() {
            return Some(self.clone());
        }
        match (self, other) {
            (_, Self::Zero) => Some(self.clone()),
            (Self::Zero, _) => Some(other.scaled(t)),
            (Self::ConformalGradient { axis: a }, Self::ConformalGradient { axis: b }) => {
                let sum: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x + t * y).collect();
                Some(if sum.iter().all(|&v| v == T::zero()) { Self::Zero } else { Self::ConformalGradient { axis: sum } })
            }
            (Self::ConstantTorus { c: a }, Self::ConstantTorus { c: b }) => {
                Some(Self::ConstantTorus { c: a.iter().zip(b).map(|(&x, &y)| x + t * y).collect() })
            }
            (Self::Rescaled { base: b1, factor: f1 }, Self::Rescaled { base: b2, factor: f2 }) if b1 == b2 => {
                let factor = match (f1, f2) {
                    (ScalarFieldSpec::Constant { k: k1 }, ScalarFieldSpec::Constant { k: k2 }) => {
                        ScalarFieldSpec::Constant { k: *k1 + t * *k2 }
                    }
                    (ScalarFieldSpec::AxisLinear { a: a1 }, ScalarFieldSpec::AxisLinear { a: a2 }) => {
                        ScalarFieldSpec::AxisLinear { a: a1.iter().zip(a2).map(|(&x, &y)| x + t * y).collect() }
                    }
                    _ => return None,
                };
                Some(Self::Rescaled { base: b1.clone(), factor })
            }
            _ => {
                let (a1, b1) = self.as_linear_ambient(m)?;
                let (a2, b2) = other.as_linear_ambient(m)?;
                Some(Self::LinearAmbient {
                    matrix: a1.plus(&a2.scaled(t)),
                    offset: b1.iter().zip(&b2).map(|(&x, &y)| x + t * y).collect(),
                })
            }
        }
    }
}

/// Standard interleaved complex structure `J`.
pub fn hopf_j<T: Scalar>(x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); x.len()];
    for i in (0..x.len() - 1).step_by(2) {
        out[i] = -x[i + 1];
        out[i + 1] = x[i];
    }
    out
}

fn hopf_matrix<T: Scalar>(d: usize) -> SquareMatrix<T> {
    let mut data = vec![T::zero(); d * d];
    for i in (0..d - 1).step_by(2) {
        data[i * d + i + 1] = -T::one();
        data[(i + 1) * d + i] = T::one();
    }
    SquareMatrix::from_row_major(d, data).expect("square")
}

/// `ΔF` for `σ = Pₓ(Ax+b)` through the ambient extension `F̃ = ½(|v|² - ⟨v,x⟩²)`,
/// `v = Ax + b`, using `Hess F(X,X) = D²F̃(X,X) - ⟨DF̃, x⟩|X|²` on the unit sphere.
fn linear_ambient_laplacian_f<T: Scalar>(m: &Manifold, a: &SquareMatrix<T>, b: &[T], x: &[T]) -> T {
    let v = add(&a.mul_vec(x), b);
    let s = dot(&v, x);
    // Ds = (A + Aᵀ)x + b
    let ds = add(&add(&a.mul_vec(x), &a.transpose_mul_vec(x)), b);
    let mut df = a.transpose_mul_vec(&v);
    axpy(-s, &ds, &mut df);
    let mut trace = T::zero();
    for e in m.frame_raw(x) {
        let ae = a.mul_vec(&e);
        let de = dot(&ds, &e);
        trace += norm_sq(&ae) - de * de - T::lit(2.0) * s * dot(&ae, &e);
    }
    -trace + T::from_count(m.dim()) * dot(&df, x)
}

/// Sampled `max |σ(x)|` over the quadrature points (a lower bound of `‖σ‖∞`).
pub fn sup_norm<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, quad: &QuadratureSet<T>) -> Result<T> {
    if quad.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    s.validate(m)?;
    Ok(quad
        .map(|p| norm(&s.value_raw(m, p.coords())))
        .into_iter()
        .fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests;
