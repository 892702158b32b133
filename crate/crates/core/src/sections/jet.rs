use serde::Serialize;

use super::{FdOptions, SectionSpec};
use crate::error::Result;
use crate::geometry::{Manifold, Point};
use crate::linalg::{dot, norm_sq, scale};
use crate::scalar::Scalar;

/// How the second-order part of a jet was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JetKind {
    Analytic,
    /// Rough Laplacian from a nested finite difference of the closed-form first derivative.
    SemiAnalytic,
}

/// Value and first covariant derivatives of a section at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJet<T> {
    /// Orthonormal frame `Eᵢ` used for `covariant_derivatives`.
    pub frame: Vec<Vec<T>>,
    pub value: Vec<T>,
    /// `∇_{Eᵢ}σ`
    pub covariant_derivatives: Vec<Vec<T>>,
    /// `F = ½|σ|²`
    pub f: T,
    pub grad_f: Vec<T>,
}

impl<T: Scalar> FirstJet<T> {
    /// `|∇σ|² = Σᵢ |∇_{Eᵢ}σ|²`
    pub fn grad_sigma_sq(&self) -> T {
        self.covariant_derivatives.iter().map(|d| norm_sq(d)).fold(T::zero(), |a, b| a + b)
    }

    pub fn grad_f_sq(&self) -> T {
        norm_sq(&self.grad_f)
    }

    /// `∇_Y σ` for any tangent `Y`, by linearity in the frame.
    pub fn derivative_along(&self, dir: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.value.len()];
        for (e, d) in self.frame.iter().zip(&self.covariant_derivatives) {
            let c = dot(dir, e);
            crate::linalg::axpy(c, d, &mut out);
        }
        out
    }

    /// Jet of `k·σ`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            frame: self.frame.clone(),
            value: scale(k, &self.value),
            covariant_derivatives: self.covariant_derivatives.iter().map(|d| scale(k, d)).collect(),
            f: k * k * self.f,
            grad_f: scale(k * k, &self.grad_f),
        }
    }
}

/// Full second-order data needed by the energy and the Euler–Lagrange operators.
#[derive(Debug, Clone, PartialEq)]
pub struct JetData<T> {
    pub first: FirstJet<T>,
    /// `∇*∇σ`
    pub rough_laplacian: Vec<T>,
    /// `ΔF`, sign convention `Δ = -Trace ∇d`
    pub laplacian_f: T,
    /// `∇_{∇F}σ`
    pub derivative_along_grad_f: Vec<T>,
    pub kind: JetKind,
}

impl<T: Scalar> JetData<T> {
    pub fn value(&self) -> &[T] {
        &self.first.value
    }

    pub fn f(&self) -> T {
        self.first.f
    }

    pub fn grad_f(&self) -> &[T] {
        &self.first.grad_f
    }

    pub fn grad_sigma_sq(&self) -> T {
        self.first.grad_sigma_sq()
    }

    pub fn grad_f_sq(&self) -> T {
        self.first.grad_f_sq()
    }

    /// Jet of `k·σ`; every entry is homogeneous in `σ`, so this is exact.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            first: self.first.scaled(k),
            rough_laplacian: scale(k, &self.rough_laplacian),
            laplacian_f: k * k * self.laplacian_f,
            derivative_along_grad_f: scale(k * k * k, &self.derivative_along_grad_f),
            kind: self.kind,
        }
    }
}

impl<T: Scalar> SectionSpec<T> {
    pub fn first_jet_raw(&self, m: &Manifold, x: &[T]) -> FirstJet<T> {
        let frame = m.frame_raw(x);
        let value = self.value_raw(m, x);
        let covariant_derivatives: Vec<Vec<T>> = frame.iter().map(|e| self.derivative_raw(m, x, e)).collect();
        let mut grad_f = vec![T::zero(); x.len()];
        for (e, d) in frame.iter().zip(&covariant_derivatives) {
            crate::linalg::axpy(dot(d, &value), e, &mut grad_f);
        }
        let f = norm_sq(&value) / T::lit(2.0);
        FirstJet { frame, value, covariant_derivatives, f, grad_f }
    }

    pub fn jet_raw(&self, m: &Manifold, x: &[T], fd: &FdOptions<T>) -> JetData<T> {
        let first = self.first_jet_raw(m, x);
        let derivative_along_grad_f = self.derivative_raw(m, x, &first.grad_f);
        JetData {
            rough_laplacian: self.rough_laplacian_raw(m, x, fd),
            laplacian_f: self.laplacian_f_raw(m, x),
            derivative_along_grad_f,
            first,
            kind: if self.is_analytic() { JetKind::Analytic } else { JetKind::SemiAnalytic },
        }
    }

    /// Jet at a validated point with the default finite-difference options.
    pub fn jet(&self, m: &Manifold, x: &Point<T>) -> Result<JetData<T>> {
        self.validate(m)?;
        Ok(self.jet_raw(m, x.coords(), &FdOptions::default()))
    }
}
