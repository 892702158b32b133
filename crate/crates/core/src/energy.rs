//! Weight, vertical (p,q)-energy density and integral, Kato margin and the
//! q-Riemannian classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, QuadratureSet};
use crate::linalg::norm_sq;
use crate::scalar::Scalar;
use crate::sections::{FirstJet, SectionSpec};

/// Tolerance on `q|σ|² = -1` used by the classifier.
pub const TUBE_TOL: f64 = 1e-9;

/// The parameters `(p, q)` of the bundle metric. Every real pair is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricParams<T> {
    pub p: T,
    pub q: T,
}

impl<T: Scalar> MetricParams<T> {
    pub fn new(p: T, q: T) -> Self {
        Self { p, q }
    }
}

/// `w = 1/(1 + |e|²)`.
pub fn weight<T: Scalar>(e_norm_sq: T) -> Result<T> {
    if !(e_norm_sq >= T::zero()) {
        return Err(Error::Domain(format!("weight needs |e|² ≥ 0, got {e_norm_sq}")));
    }
    Ok(weight_raw(e_norm_sq))
}

#[inline]
pub(crate) fn weight_raw<T: Scalar>(e_norm_sq: T) -> T {
    T::one() / (T::one() + e_norm_sq)
}

/// `wᵖ(σ)(|∇σ|² + q|∇F|²)` from first-order data.
pub fn density_from_jet<T: Scalar>(jet: &FirstJet<T>, mp: MetricParams<T>) -> T {
    let w = weight_raw(norm_sq(&jet.value));
    w.powf(mp.p) * kato_from_jet(jet, mp.q)
}

fn kato_from_jet<T: Scalar>(jet: &FirstJet<T>, q: T) -> T {
    jet.grad_sigma_sq() + q * jet.grad_f_sq()
}

pub fn density<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, mp: MetricParams<T>) -> Result<T> {
    s.validate(m)?;
    Ok(density_from_jet(&s.first_jet_raw(m, x.coords()), mp))
}

/// `|∇σ|² + q|∇F|²`, nonnegative for q-Riemannian sections.
pub fn kato_margin<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, q: T) -> Result<T> {
    s.validate(m)?;
    Ok(kato_from_jet(&s.first_jet_raw(m, x.coords()), q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QRiemannian {
    /// `q|σ|² ≥ -1` everywhere sampled and `> -1` somewhere.
    Strict,
    /// `q|σ|² = -1` at every sample.
    Boundary,
    /// `q|σ|² < -1` somewhere.
    Not,
}

impl QRiemannian {
    /// Strict and boundary sections are both q-Riemannian.
    pub fn is_q_riemannian(self) -> bool {
        !matches!(self, Self::Not)
    }
}

/// Sampled verdict, with the sample count and the observed range of `q|σ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification<T> {
    pub verdict: QRiemannian,
    pub samples: usize,
    pub min_q_norm_sq: T,
    pub max_q_norm_sq: T,
}

pub fn classify_q_riemannian<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, q: T, quad: &QuadratureSet<T>) -> Result<Classification<T>> {
    if quad.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    s.validate(m)?;
    let values = quad.map(|x| q * norm_sq(&s.value_raw(m, x.coords())));
    let min = values.iter().copied().fold(T::infinity(), T::min);
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    let tol = T::lit(TUBE_TOL);
    let verdict = if min < -T::one() - tol {
        QRiemannian::Not
    } else if max <= -T::one() + tol {
        QRiemannian::Boundary
    } else {
        QRiemannian::Strict
    };
    Ok(Classification { verdict, samples: values.len(), min_q_norm_sq: min, max_q_norm_sq: max })
}

/// Quadrature estimate of the vertical energy with the sampled density range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport<T> {
    pub total: T,
    pub density_min: T,
    pub density_max: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub p: T,
    pub q: T,
}

/// Densities at every quadrature point, in point order.
pub fn densities<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, mp: MetricParams<T>, quad: &QuadratureSet<T>) -> Result<Vec<T>> {
    if quad.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    s.validate(m)?;
    Ok(quad.map(|x| density_from_jet(&s.first_jet_raw(m, x.coords()), mp)))
}

/// `½ Σₖ wₖ density(xₖ)`.
pub fn energy<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, mp: MetricParams<T>, quad: &QuadratureSet<T>) -> Result<EnergyReport<T>> {
    let d = densities(s, m, mp, quad)?;
    Ok(EnergyReport {
        total: quad.weighted_sum(&d) / T::lit(2.0),
        density_min: d.iter().copied().fold(T::infinity(), T::min),
        density_max: d.iter().copied().fold(T::neg_infinity(), T::max),
        n: quad.len(),
        seed: quad.seed(),
        p: mp.p,
        q: mp.q,
    })
}

/// Energy total only.
pub fn energy_total<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, mp: MetricParams<T>, quad: &QuadratureSet<T>) -> Result<T> {
    Ok(energy(s, m, mp, quad)?.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::QuadratureScheme;
    use std::f64::consts::PI;

    fn mc(m: Manifold, n: usize) -> QuadratureSet<f64> {
        QuadratureSet::new(m, QuadratureScheme::MonteCarlo, n, 42).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(0.0).unwrap(), 1.0);
        assert_eq!(weight(1.0).unwrap(), 0.5);
        assert_eq!(weight(3.0).unwrap(), 0.25);
        assert!(weight(-1e-3).is_err());
        assert!(weight(f64::NAN).is_err());
    }

    #[test]
    fn density_examples() {
        let m = Manifold::sphere(3).unwrap();
        let x = m.point_from_ambient(vec![0.3, 0.1, -0.7, 0.2]).unwrap();
        let d: f64 = density(&SectionSpec::Hopf, &m, &x, MetricParams::new(0.0, 0.0)).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
        assert_eq!(density(&SectionSpec::Zero, &m, &x, MetricParams::new(3.0, 2.0)).unwrap(), 0.0);
        for mm in 1..=3usize {
            let m = Manifold::sphere(2 * mm + 1).unwrap();
            let mut c = vec![0.1; 2 * mm + 2];
            c[0] = 0.8;
            let x = m.point_from_ambient(c).unwrap();
            for k in [0.5f64, 1.0, 2.0] {
                for (p, q) in [(0.0, 0.0), (2.0, -1.0), (-1.0, 3.0)] {
                    let s = SectionSpec::scaled_by(SectionSpec::Hopf, k);
                    let d = density(&s, &m, &x, MetricParams::new(p, q)).unwrap();
                    let expect = (1.0 + k * k).powf(-p) * 2.0 * mm as f64 * k * k;
                    assert!((d - expect).abs() < 1e-13 * expect.max(1.0));
                }
            }
        }
    }

    #[test]
    fn kato_margin_examples() {
        // the closed-form conformal solution on S⁵: margin (n-1)λ² + (n-2)λ⁴ with λ measured against a unit axis
        let n = 5usize;
        let m = Manifold::sphere(n).unwrap();
        let c = 1.0 / ((n - 2) as f64).sqrt();
        let s = SectionSpec::conformal(vec![c, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let x = m.point_from_ambient(vec![0.4, 0.3, -0.2, 0.5, 0.1, 0.6]).unwrap();
        let lam = c * x.coords()[0];
        let margin = kato_margin(&s, &m, &x, 2.0 - n as f64).unwrap();
        // |∇σ|² = nλ², |∇F|² = λ²(c² - λ²)
        let expect = n as f64 * lam * lam + (2.0 - n as f64) * lam * lam * (c * c - lam * lam);
        assert!((margin - expect).abs() < 1e-14);
        assert!((expect - ((n - 1) as f64 * lam * lam + (n - 2) as f64 * lam.powi(4))).abs() < 1e-14);
        let eq = m.point(vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(kato_margin(&s, &m, &eq, -3.0).unwrap(), 0.0);

        let h = kato_margin(&SectionSpec::conformal(vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &m, &x, 0.0).unwrap();
        assert!(h >= 0.0);
        let t = Manifold::torus(2).unwrap();
        let y = t.point(vec![0.2, 0.9]).unwrap();
        assert_eq!(kato_margin(&SectionSpec::ConstantTorus { c: vec![1.0, 3.0] }, &t, &y, -5.0).unwrap(), 0.0);
    }

    #[test]
    fn classification_examples() {
        let m = Manifold::sphere(3).unwrap();
        let q = mc(m, 500);
        assert_eq!(classify_q_riemannian(&SectionSpec::Hopf, &m, -1.0, &q).unwrap().verdict, QRiemannian::Boundary);
        assert_eq!(classify_q_riemannian(&SectionSpec::Hopf, &m, -0.5, &q).unwrap().verdict, QRiemannian::Strict);
        let c = classify_q_riemannian(&SectionSpec::Hopf, &m, -2.0, &q).unwrap();
        assert_eq!(c.verdict, QRiemannian::Not);
        assert_eq!(c.samples, 500);
        assert!(!c.verdict.is_q_riemannian());
        let empty = QuadratureSet::<f64>::from_parts(m, vec![], vec![], 0, QuadratureScheme::MonteCarlo);
        assert!(empty.is_err());
    }

    #[test]
    fn energy_examples() {
        let m = Manifold::sphere(3).unwrap();
        let q = mc(m, 100_000);
        let e = energy(&SectionSpec::Hopf, &m, MetricParams::new(0.0, 0.0), &q).unwrap();
        assert!((e.total - 2.0 * PI * PI).abs() < 1e-12, "{}", e.total - 2.0 * PI * PI);
        assert_eq!(e.n, 100_000);
        assert_eq!(e.seed, 42);
        assert_eq!(energy(&SectionSpec::Zero, &m, MetricParams::new(3.0, -2.0), &q).unwrap().total, 0.0);

        let s2 = Manifold::sphere(2).unwrap();
        let s = SectionSpec::conformal(vec![1.0, 0.0, 0.0]);
        let exact = 4.0 * PI / 3.0;
        let e = energy(&s, &s2, MetricParams::new(0.0, 0.0), &mc(s2, 100_000)).unwrap();
        assert!((e.total - exact).abs() / exact < 0.02);
        let g = QuadratureSet::new(s2, QuadratureScheme::GaussProduct, 400, 0).unwrap();
        let e = energy(&s, &s2, MetricParams::new(0.0, 0.0), &g).unwrap();
        assert!((e.total - exact).abs() < 1e-12);
    }

    #[test]
    fn energy_report_json_fields() {
        let m = Manifold::sphere(3).unwrap();
        let e = energy(&SectionSpec::Hopf, &m, MetricParams::new(0.0, 0.0), &mc(m, 10)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&crate::output::to_json(&e)).unwrap();
        for key in ["total", "density_min", "density_max", "N", "seed", "p", "q"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn constant_length_scaling_law() {
        let m = Manifold::sphere(3).unwrap();
        let q = mc(m, 2000);
        for k in [0.5, 1.0, 2.0] {
            let s = SectionSpec::scaled_by(SectionSpec::Hopf, k);
            let base = energy_total(&s, &m, MetricParams::new(0.0, 0.0), &q).unwrap();
            for p in [-1.0, 0.0, 2.0, 4.0] {
                for qq in [-1.0, 0.0, 3.0] {
                    let e = energy_total(&s, &m, MetricParams::new(p, qq), &q).unwrap();
                    let expect = (1.0f64 + k * k).powf(-p) * base;
                    assert!((e - expect).abs() <= 1e-12 * expect.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn f32_path_runs() {
        let m = Manifold::sphere(3).unwrap();
        let q = QuadratureSet::<f32>::new(m, QuadratureScheme::MonteCarlo, 1000, 1).unwrap();
        let e = energy(&SectionSpec::<f32>::Hopf, &m, MetricParams::new(0.0, 0.0), &q).unwrap();
        let exact = 2.0 * std::f32::consts::PI.powi(2);
        assert!((e.total - exact).abs() < 1e-4 * exact);
    }
}
