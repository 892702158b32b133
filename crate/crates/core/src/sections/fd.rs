//! Finite-difference oracles for covariant derivatives.
//!
//! Second-order stencils difference vectors that have been parallel-transported
//! back to the base point along the frame geodesics. Those geodesic frames
//! satisfy `∇_{Eᵢ}Eᵢ = 0` at the base point, so no connection correction term
//! appears.

use super::SectionSpec;
use crate::error::Result;
use crate::geometry::{check_step, Manifold, Point, TangentVector};
use crate::linalg::{axpy, dot, norm, scale, sub};
use crate::scalar::Scalar;

/// Step sizes for the finite-difference routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions<T> {
    /// Step for first derivatives of values.
    pub first_step: T,
    /// Step for differences of closed-form first derivatives.
    pub second_step: T,
    /// Apply one Richardson step `(4D(h/2) - D(h))/3`.
    pub richardson: bool,
}

impl<T: Scalar> Default for FdOptions<T> {
    fn default() -> Self {
        Self { first_step: T::lit(T::FIRST_STEP), second_step: T::lit(T::SECOND_STEP), richardson: true }
    }
}

impl<T: Scalar> FdOptions<T> {
    pub fn plain(second_step: T) -> Self {
        Self { second_step, richardson: false, ..Self::default() }
    }
}

fn richardson<T: Scalar>(coarse: Vec<T>, fine: Vec<T>) -> Vec<T> {
    let three = T::lit(3.0);
    fine.iter()
        .zip(&coarse)
        .map(|(&f, &c)| (T::lit(4.0) * f - c) / three)
        .collect()
}

fn derivative_fd_raw<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &[T], dir: &[T], h: T) -> Vec<T> {
    let len = norm(dir);
    if len == T::zero() {
        return vec![T::zero(); x.len()];
    }
    let u = scale(T::one() / len, dir);
    let plus = s.value_raw(m, &m.geodesic_raw(x, &u, h));
    let minus = s.value_raw(m, &m.geodesic_raw(x, &u, -h));
    let diff = scale(len / (h + h), &sub(&plus, &minus));
    m.project_raw(x, &diff)
}

/// `Pₓ[(σ(γ(h)) - σ(γ(-h)))/2h] · |X|` along the geodesic with `γ'(0) = X/|X|`.
pub fn covariant_derivative_fd<T: Scalar>(
    s: &SectionSpec<T>,
    m: &Manifold,
    x: &Point<T>,
    dir: &TangentVector<T>,
    h: T,
) -> Result<TangentVector<T>> {
    check_step(h)?;
    s.validate(m)?;
    Ok(TangentVector { at: x.clone(), vec: derivative_fd_raw(s, m, x.coords(), &dir.vec, h) })
}

/// Richardson-extrapolated variant of [`covariant_derivative_fd`] using `h` and `h/2`.
pub fn covariant_derivative_fd_richardson<T: Scalar>(
    s: &SectionSpec<T>,
    m: &Manifold,
    x: &Point<T>,
    dir: &TangentVector<T>,
    h: T,
) -> Result<TangentVector<T>> {
    check_step(h)?;
    s.validate(m)?;
    let coarse = derivative_fd_raw(s, m, x.coords(), &dir.vec, h);
    let fine = derivative_fd_raw(s, m, x.coords(), &dir.vec, h / T::lit(2.0));
    Ok(TangentVector { at: x.clone(), vec: richardson(coarse, fine) })
}

/// Central difference along each frame geodesic of a vector field `g(y, γ'(t))`
/// transported back to `x`, summed and negated.
fn transported_divergence<T, G>(m: &Manifold, x: &[T], h: T, g: G) -> Vec<T>
where
    T: Scalar,
    G: Fn(&[T], &[T]) -> Vec<T>,
{
    let mut acc = vec![T::zero(); x.len()];
    for e in m.frame_raw(x) {
        let sample = |t: T| {
            let y = m.geodesic_raw(x, &e, t);
            let vel = m.geodesic_velocity_raw(x, &e, t);
            m.transport_back_raw(x, &e, t, &g(&y, &vel))
        };
        let d = sub(&sample(h), &sample(-h));
        axpy(-T::one() / (h + h), &d, &mut acc);
    }
    acc
}

pub(super) fn rough_laplacian_raw<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &[T], fd: &FdOptions<T>) -> Vec<T> {
    let stencil = |h: T| transported_divergence(m, x, h, |y, vel| s.derivative_raw(m, y, vel));
    let coarse = stencil(fd.second_step);
    if fd.richardson {
        richardson(coarse, stencil(fd.second_step / T::lit(2.0)))
    } else {
        coarse
    }
}

/// `∇*∇σ = -Σᵢ ∇²σ(Eᵢ,Eᵢ)` from transported differences of the closed-form `∇σ`.
pub fn rough_laplacian_fd<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, h: T) -> Result<TangentVector<T>> {
    check_step(h)?;
    s.validate(m)?;
    let fd = FdOptions::plain(h);
    Ok(TangentVector { at: x.clone(), vec: rough_laplacian_raw(s, m, x.coords(), &fd) })
}

/// `∇*φ = -Σᵢ ∇_{Eᵢ}(⟨∇F, Eᵢ⟩σ)` for the 1-form `φ(Y) = ⟨∇F, Y⟩σ`, by transported differences.
pub fn codifferential_phi_fd<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, fd: &FdOptions<T>) -> Result<TangentVector<T>> {
    check_step(fd.second_step)?;
    s.validate(m)?;
    let stencil = |h: T| {
        transported_divergence(m, x.coords(), h, |y, vel| {
            let c = dot(&s.grad_f_raw(m, y), vel);
            scale(c, &s.value_raw(m, y))
        })
    };
    let coarse = stencil(fd.second_step);
    let vec = if fd.richardson {
        richardson(coarse, stencil(fd.second_step / T::lit(2.0)))
    } else {
        coarse
    };
    Ok(TangentVector { at: x.clone(), vec })
}
