//! Euler–Lagrange operators of the vertical energy: `T_p`, `φ_{p,q}`, the
//! residual `T_p(σ) - φ_{p,q}(σ)σ`, the first variation and the sphere-bundle
//! equation `∇*∇σ = k⁻²|∇σ|²σ`.

use serde::Serialize;

use crate::energy::{energy_total, weight_raw, MetricParams};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, Point, QuadratureSet, TangentVector};
use crate::linalg::{axpy, dot, norm, norm_sq, scale};
use crate::output::format_f64;
use crate::scalar::Scalar;
use crate::sections::{FdOptions, JetData, JetKind, SectionSpec};

/// Residual sup below which an analytic jet counts as an exact solution.
pub const ANALYTIC_ZERO: f64 = 1e-10;
/// Same threshold for jets with a finite-difference rough Laplacian.
pub const FD_ZERO: f64 = 1e-5;

/// `(1+2F)∇*∇σ + 2p∇_{∇F}σ`
pub fn tension_from_jet<T: Scalar>(jet: &JetData<T>, p: T) -> Vec<T> {
    let mut out = scale(T::one() + T::lit(2.0) * jet.f(), &jet.rough_laplacian);
    axpy(T::lit(2.0) * p, &jet.derivative_along_grad_f, &mut out);
    out
}

/// `p|∇σ|² - pq|∇F|² - q(1+2F)ΔF`
pub fn phi_from_jet<T: Scalar>(jet: &JetData<T>, mp: MetricParams<T>) -> T {
    let MetricParams { p, q } = mp;
    p * jet.grad_sigma_sq() - p * q * jet.grad_f_sq() - q * (T::one() + T::lit(2.0) * jet.f()) * jet.laplacian_f
}

/// `T_p(σ) - φ_{p,q}(σ)σ`
pub fn residual_from_jet<T: Scalar>(jet: &JetData<T>, mp: MetricParams<T>) -> Vec<T> {
    let mut r = tension_from_jet(jet, mp.p);
    axpy(-phi_from_jet(jet, mp), jet.value(), &mut r);
    r
}

pub fn tension<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, p: T) -> Result<TangentVector<T>> {
    let jet = s.jet(m, x)?;
    Ok(TangentVector { at: x.clone(), vec: tension_from_jet(&jet, p) })
}

pub fn phi<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, mp: MetricParams<T>) -> Result<T> {
    Ok(phi_from_jet(&s.jet(m, x)?, mp))
}

/// Jets at every quadrature point, in point order.
pub fn jets<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, quad: &QuadratureSet<T>, fd: &FdOptions<T>) -> Result<Vec<JetData<T>>> {
    if quad.is_empty() {
        return Err(Error::EmptyQuadrature);
    }
    s.validate(m)?;
    Ok(quad.map(|x| s.jet_raw(m, x.coords(), fd)))
}

/// Pointwise breakdown of the residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualPoint<T> {
    pub point: Vec<T>,
    /// Height `⟨a, x⟩` for sections that carry an axis.
    pub lambda: Option<T>,
    pub tension_norm: T,
    pub phi_abs: T,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport<T> {
    pub sup_residual: T,
    /// `(Σₖ wₖ |rₖ|²)^{1/2}`
    pub l2_residual: T,
    pub sup_tension: T,
    pub sup_phi: T,
    pub params: MetricParams<T>,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub jet_kind: JetKind,
    /// Zero threshold matching `jet_kind`.
    pub zero_threshold: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_point: Option<Vec<ResidualPoint<T>>>,
}

impl<T: Scalar> ResidualReport<T> {
    /// `true` when the sampled residual is below the threshold for its jet kind.
    pub fn is_zero(&self) -> bool {
        self.sup_residual < self.zero_threshold
    }

    /// CSV with columns `x0,…,lambda,tension,phi,residual` (`lambda` empty when undefined).
    pub fn per_point_csv(&self) -> Option<String> {
        let rows = self.per_point.as_ref()?;
        let d = rows.first().map_or(0, |r| r.point.len());
        let mut out: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
        out.extend(["lambda", "tension", "phi", "residual"].map(String::from));
        let mut csv = out.join(",") + "\n";
        for r in rows {
            let mut cells: Vec<String> = r.point.iter().map(|v| format_f64(v.as_f64())).collect();
            cells.push(r.lambda.map(|l| format_f64(l.as_f64())).unwrap_or_default());
            for v in [r.tension_norm, r.phi_abs, r.residual] {
                cells.push(format_f64(v.as_f64()));
            }
            csv += &cells.join(",");
            csv.push('\n');
        }
        Some(csv)
    }

    /// Smallest pointwise residual over samples with `|λ| > min_abs_lambda`.
    pub fn floor_where_lambda_exceeds(&self, min_abs_lambda: T) -> Option<T> {
        self.per_point
            .as_ref()?
            .iter()
            .filter(|r| r.lambda.is_some_and(|l| l.abs() > min_abs_lambda))
            .map(|r| r.residual)
            .reduce(T::min)
    }
}

fn aggregate<T: Scalar>(
    vectors: Vec<(Vec<T>, T, T)>,
    quad: &QuadratureSet<T>,
    s: Option<&SectionSpec<T>>,
    mp: MetricParams<T>,
    kind: JetKind,
    with_per_point: bool,
) -> ResidualReport<T> {
    let norms: Vec<T> = vectors.iter().map(|(r, _, _)| norm(r)).collect();
    let sq: Vec<T> = norms.iter().map(|&r| r * r).collect();
    let max = |it: &mut dyn Iterator<Item = T>| it.fold(T::zero(), T::max);
    let per_point = with_per_point.then(|| {
        quad.points()
            .iter()
            .zip(&vectors)
            .zip(&norms)
            .map(|((x, (_, t, phi)), &r)| ResidualPoint {
                point: x.coords().to_vec(),
                lambda: s.and_then(|s| s.axis_height(x.coords())),
                tension_norm: *t,
                phi_abs: phi.abs(),
                residual: r,
            })
            .collect()
    });
    ResidualReport {
        sup_residual: max(&mut norms.iter().copied()),
        l2_residual: quad.weighted_sum(&sq).sqrt(),
        sup_tension: max(&mut vectors.iter().map(|v| v.1)),
        sup_phi: max(&mut vectors.iter().map(|v| v.2.abs())),
        params: mp,
        n: quad.len(),
        seed: quad.seed(),
        jet_kind: kind,
        zero_threshold: T::tolerance(match kind {
            JetKind::Analytic => ANALYTIC_ZERO,
            JetKind::SemiAnalytic => FD_ZERO,
        }),
        per_point,
    }
}

/// Residual report from precomputed jets (for sweeps that vary only `(p, q)`).
pub fn residual_from_jets<T: Scalar>(
    s: &SectionSpec<T>,
    jets: &[JetData<T>],
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
    with_per_point: bool,
) -> ResidualReport<T> {
    let vectors: Vec<(Vec<T>, T, T)> = jets
        .iter()
        .map(|j| {
            let t = tension_from_jet(j, mp.p);
            let phi = phi_from_jet(j, mp);
            let mut r = t.clone();
            axpy(-phi, j.value(), &mut r);
            (r, norm(&t), phi)
        })
        .collect();
    let kind = if s.is_analytic() { JetKind::Analytic } else { JetKind::SemiAnalytic };
    aggregate(vectors, quad, Some(s), mp, kind, with_per_point)
}

/// Pointwise `|T_p(σ) - φ_{p,q}(σ)σ|` aggregated over the quadrature set.
pub fn residual<T: Scalar>(
    s: &SectionSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
    with_per_point: bool,
) -> Result<ResidualReport<T>> {
    let jets = jets(s, m, quad, &FdOptions::default())?;
    Ok(residual_from_jets(s, &jets, mp, quad, with_per_point))
}

/// `|∇*∇σ - k⁻²|∇σ|²σ|` for a section of constant length `k`.
pub fn sphere_bundle_residual<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, k: T, quad: &QuadratureSet<T>) -> Result<ResidualReport<T>> {
    if !(k > T::zero()) {
        return Err(Error::Domain(format!("sphere-bundle radius must be positive, got {k}")));
    }
    let jets = jets(s, m, quad, &FdOptions::default())?;
    let deviation = jets.iter().map(|j| (norm(j.value()) - k).abs()).fold(T::zero(), T::max);
    if deviation > T::tolerance(1e-8) {
        return Err(Error::NotConstantLength { expected: k.as_f64(), deviation: deviation.as_f64() });
    }
    let vectors = jets
        .iter()
        .map(|j| {
            let mut r = j.rough_laplacian.clone();
            let coeff = j.grad_sigma_sq() / (k * k);
            axpy(-coeff, j.value(), &mut r);
            (r, norm(&j.rough_laplacian), coeff)
        })
        .collect();
    let kind = if s.is_analytic() { JetKind::Analytic } else { JetKind::SemiAnalytic };
    Ok(aggregate(vectors, quad, Some(s), MetricParams::new(T::zero(), T::zero()), kind, false))
}

/// A variation field `ρ`; the varied sections are `σ + tρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSpec<T> {
    pub direction: SectionSpec<T>,
}

impl<T: Scalar> VariationSpec<T> {
    pub fn new(direction: SectionSpec<T>) -> Self {
        Self { direction }
    }

    /// `σ + tρ` inside the closed-form families.
    pub fn vary(&self, s: &SectionSpec<T>, t: T, m: &Manifold) -> Result<SectionSpec<T>> {
        s.add_scaled(t, &self.direction, m)
            .ok_or_else(|| Error::VariationUnsupported(format!("{s} + t·({})", self.direction)))
    }
}

/// First-variation integrand at one point:
/// `wᵖ⟨∇*∇σ + qΔFσ, ρ⟩ + p w^{p+1}⟨2∇_{∇F}σ + q|∇F|²σ - |∇σ|²σ, ρ⟩`.
pub fn first_variation_integrand<T: Scalar>(jet: &JetData<T>, rho: &[T], mp: MetricParams<T>) -> T {
    let (a, b) = integrand_terms(jet, rho, mp);
    a + b
}

/// The `wᵖ` and `p w^{p+1}` terms of the integrand, before they are added.
fn integrand_terms<T: Scalar>(jet: &JetData<T>, rho: &[T], mp: MetricParams<T>) -> (T, T) {
    let MetricParams { p, q } = mp;
    let w = weight_raw(norm_sq(jet.value()));
    let mut a = jet.rough_laplacian.clone();
    axpy(q * jet.laplacian_f, jet.value(), &mut a);
    let mut b = scale(T::lit(2.0), &jet.derivative_along_grad_f);
    axpy(q * jet.grad_f_sq() - jet.grad_sigma_sq(), jet.value(), &mut b);
    (w.powf(p) * dot(&a, rho), p * w.powf(p + T::one()) * dot(&b, rho))
}

fn variation_terms<T: Scalar>(
    s: &SectionSpec<T>,
    variation: &VariationSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
) -> Result<Vec<(T, T)>> {
    let rho = &variation.direction;
    rho.validate(m)?;
    let jets = jets(s, m, quad, &FdOptions::default())?;
    Ok(quad
        .points()
        .iter()
        .zip(&jets)
        .map(|(x, j)| integrand_terms(j, &rho.value_raw(m, x.coords()), mp))
        .collect())
}

/// `d/dt E^v_{p,q}(σ + tρ)` at `t = 0` from the first-variation formula.
pub fn first_variation<T: Scalar>(
    s: &SectionSpec<T>,
    variation: &VariationSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
) -> Result<T> {
    let v: Vec<T> = variation_terms(s, variation, m, mp, quad)?.into_iter().map(|(a, b)| a + b).collect();
    Ok(quad.weighted_sum(&v))
}

/// `[E(σ+tρ) - E(σ-tρ)] / 2t` on the same quadrature set.
pub fn energy_derivative_fd<T: Scalar>(
    s: &SectionSpec<T>,
    variation: &VariationSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
    t: T,
) -> Result<T> {
    crate::geometry::check_step(t)?;
    let plus = variation.vary(s, t, m)?;
    let minus = variation.vary(s, -t, m)?;
    Ok((energy_total(&plus, m, mp, quad)? - energy_total(&minus, m, mp, quad)?) / (t + t))
}

/// Formula value against the finite-difference derivative of the energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationCheck<T> {
    pub formula: T,
    pub finite_difference: T,
    /// `Σₖ wₖ (|A(xₖ)| + |B(xₖ)|)` for the two terms `A`, `B` of the integrand.
    ///
    /// At a critical section the terms cancel pointwise, so the size of the
    /// integrand itself is no measure of the size of the integral.
    pub scale: T,
    /// `|formula - fd| / max(|formula|, |fd|, scale)`
    pub relative_error: T,
}

pub fn check_first_variation<T: Scalar>(
    s: &SectionSpec<T>,
    variation: &VariationSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    quad: &QuadratureSet<T>,
    t: T,
) -> Result<VariationCheck<T>> {
    let terms = variation_terms(s, variation, m, mp, quad)?;
    let v: Vec<T> = terms.iter().map(|&(a, b)| a + b).collect();
    let formula = quad.weighted_sum(&v);
    let abs: Vec<T> = terms.iter().map(|&(a, b)| a.abs() + b.abs()).collect();
    let scale = quad.weighted_sum(&abs);
    let finite_difference = energy_derivative_fd(s, variation, m, mp, quad, t)?;
    let denom = formula.abs().max(finite_difference.abs()).max(scale);
    let relative_error = if denom == T::zero() { T::zero() } else { (formula - finite_difference).abs() / denom };
    Ok(VariationCheck { formula, finite_difference, scale, relative_error })
}

/// `φ_{p,r}(σ) - φ_{p,q}(σ)` in factored and direct form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiDifference<T> {
    /// `(q - r)(p|∇F|² + (1+2F)ΔF)`
    pub factored: T,
    pub direct: T,
}

pub fn phi_difference_from_jet<T: Scalar>(jet: &JetData<T>, p: T, q: T, r: T) -> PhiDifference<T> {
    let factored = (q - r) * (p * jet.grad_f_sq() + (T::one() + T::lit(2.0) * jet.f()) * jet.laplacian_f);
    let direct = phi_from_jet(jet, MetricParams::new(p, r)) - phi_from_jet(jet, MetricParams::new(p, q));
    PhiDifference { factored, direct }
}

pub fn phi_difference<T: Scalar>(s: &SectionSpec<T>, m: &Manifold, x: &Point<T>, p: T, q: T, r: T) -> Result<PhiDifference<T>> {
    Ok(phi_difference_from_jet(&s.jet(m, x)?, p, q, r))
}

/// `⟨T_p(σ) - φ_{p,q}(σ)σ, σ⟩` and its expansion `C₁|∇σ|² + C₂ΔF + C₃|∇F|²`.
pub fn sigma_component_expansion<T: Scalar>(jet: &JetData<T>, mp: MetricParams<T>) -> (T, T) {
    let MetricParams { p, q } = mp;
    let one = T::one();
    let two = T::lit(2.0);
    let f = jet.f();
    let lhs = dot(&residual_from_jet(jet, mp), jet.value());
    let c1 = one + two * (one - p) * f;
    let c2 = (one + two * q * f) * (one + two * f);
    let c3 = two * p * (one + q * f);
    (lhs, c1 * jet.grad_sigma_sq() + c2 * jet.laplacian_f + c3 * jet.grad_f_sq())
}
