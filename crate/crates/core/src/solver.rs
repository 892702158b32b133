//! Rescaling searches for `(p,q)`-harmonic sections and the closed-form
//! conformal-gradient solution.
//!
//! A sweep fixes one quadrature set and one set of base jets, then evaluates
//! `k·σ` for every grid value of `k` by scaling the jets (exact, since every jet
//! entry is homogeneous in `σ`). Zeros of the `L²` residual are located as local
//! minima of `l2²` on the grid and refined by bisection on the sign of its slope.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

use crate::energy::{density_from_jet, MetricParams};
use crate::error::{Error, Result};
use crate::geometry::{Manifold, QuadratureSet};
use crate::linalg::{axpy, norm, norm_sq, scale, sub};
use crate::output::format_f64;
use crate::regions::linspace;
use crate::scalar::Scalar;
use crate::sections::{FdOptions, JetData, ScalarFieldSpec, SectionSpec};
use crate::variational::{jets, phi_from_jet, residual, residual_from_jet, tension_from_jet, ResidualReport};

/// Unit-length tolerance for the base of a scale sweep.
pub const UNIT_LENGTH_TOL: f64 = 1e-8;

/// Thresholds used to classify grid minima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions<T> {
    /// A refined minimum counts as a root when its `l2` residual is below this.
    pub root_tol: T,
    /// "No root" when the grid minimum of `l2` exceeds this.
    pub no_root_threshold: T,
    /// Bracket width at which bisection stops.
    pub x_tol: T,
}

impl<T: Scalar> Default for SweepOptions<T> {
    fn default() -> Self {
        Self { root_tol: T::tolerance(1e-8), no_root_threshold: T::lit(1e-4), x_tol: T::tolerance(1e-10) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint<T> {
    pub k: T,
    pub l2_residual: T,
    pub energy: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSweepResult<T> {
    /// Name of the swept parameter (`k` or `c`).
    pub parameter: &'static str,
    pub params: MetricParams<T>,
    pub grid: Vec<SweepPoint<T>>,
    pub roots: Vec<T>,
    pub critical_points: Vec<T>,
    pub min_l2_residual: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

/// The sweep without its grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary<T> {
    pub parameter: &'static str,
    pub params: MetricParams<T>,
    pub steps: usize,
    pub range: (T, T),
    pub roots: Vec<T>,
    pub critical_points: Vec<T>,
    pub min_l2_residual: T,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
}

impl<T: Scalar> ScaleSweepResult<T> {
    /// CSV with header `<parameter>,residual,energy`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},residual,energy\n", self.parameter);
        for g in &self.grid {
            let _ = writeln!(out, "{},{},{}", format_f64(g.k.as_f64()), format_f64(g.l2_residual.as_f64()), format_f64(g.energy.as_f64()));
        }
        out
    }

    pub fn summary(&self) -> SweepSummary<T> {
        SweepSummary {
            parameter: self.parameter,
            params: self.params,
            steps: self.grid.len(),
            range: (self.grid[0].k, self.grid[self.grid.len() - 1].k),
            roots: self.roots.clone(),
            critical_points: self.critical_points.clone(),
            min_l2_residual: self.min_l2_residual,
            n: self.n,
            seed: self.seed,
        }
    }

    /// True when the grid minimum is above the no-root threshold and no root was found.
    pub fn no_root(&self, opts: &SweepOptions<T>) -> bool {
        self.roots.is_empty() && self.min_l2_residual > opts.no_root_threshold
    }
}

/// `Σₖ wₖ |rₖ|²` for `k·σ`.
fn l2_sq_scaled<T: Scalar>(jets: &[JetData<T>], k: T, mp: MetricParams<T>, quad: &QuadratureSet<T>) -> T {
    let sq: Vec<T> = jets.par_iter().map(|j| norm_sq(&residual_from_jet(&j.scaled(k), mp))).collect();
    quad.weighted_sum(&sq)
}

fn energy_scaled<T: Scalar>(jets: &[JetData<T>], k: T, mp: MetricParams<T>, quad: &QuadratureSet<T>) -> T {
    let d: Vec<T> = jets.par_iter().map(|j| density_from_jet(&j.first.scaled(k), mp)).collect();
    quad.weighted_sum(&d) / T::lit(2.0)
}

/// Bisects `[lo, hi]` on the sign of `g(x+δ) - g(x-δ)`, converging to a stationary point.
fn bisect_slope<T: Scalar>(g: &dyn Fn(T) -> T, mut lo: T, mut hi: T, x_tol: T, step: &dyn Fn(T, T) -> T) -> T {
    while hi - lo > x_tol {
        let mid = (lo + hi) / T::lit(2.0);
        let d = step(hi - lo, mid);
        if g(mid + d) - g(mid - d) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) / T::lit(2.0)
}

fn dedup_sorted<T: Scalar>(mut v: Vec<T>, tol: T) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

/// Zeros of a nonnegative `l2` profile: refined local minima of `g = l2²` whose `l2` is below `root_tol`.
pub fn refine_zeros<T: Scalar>(xs: &[T], l2: &[T], g: &dyn Fn(T) -> T, opts: &SweepOptions<T>) -> Vec<T> {
    let n = xs.len();
    let mut roots = Vec::new();
    let slope_step = |width: T, x: T| (width * T::lit(1e-2)).max(T::epsilon() * T::lit(64.0) * x.abs().max(T::one()));
    for i in 0..n {
        let left = i == 0 || l2[i] <= l2[i - 1];
        let right = i + 1 == n || l2[i] <= l2[i + 1];
        if !(left && right) {
            continue;
        }
        let lo = xs[i.saturating_sub(1)];
        let hi = xs[(i + 1).min(n - 1)];
        let x = bisect_slope(g, lo, hi, opts.x_tol, &slope_step);
        if g(x).max(T::zero()).sqrt() < opts.root_tol {
            roots.push(x);
        }
    }
    dedup_sorted(roots, opts.x_tol * T::lit(10.0))
}

/// Stationary points of `e`, from sign changes of consecutive grid differences.
pub fn refine_critical_points<T: Scalar>(xs: &[T], values: &[T], e: &dyn Fn(T) -> T, x_tol: T) -> Vec<T> {
    let diffs: Vec<T> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // a fixed relative step keeps the central difference above roundoff
    let step = |_: T, x: T| T::lit(1e-5) * x.abs().max(T::one());
    let mut out = Vec::new();
    for i in 1..diffs.len() {
        let (a, b) = (diffs[i - 1], diffs[i]);
        if a == T::zero() || (a > T::zero()) == (b > T::zero()) {
            continue;
        }
        // minima and maxima both: bisect on the slope of ±e so that it rises through the point
        let sign = if a < T::zero() { T::one() } else { -T::one() };
        let f = |x: T| sign * e(x);
        out.push(bisect_slope(&f, xs[i - 1], xs[i + 1], x_tol, &step));
    }
    dedup_sorted(out, x_tol * T::lit(10.0))
}

fn check_range<T: Scalar>(range: (T, T), steps: usize) -> Result<()> {
    if steps < 3 {
        return Err(Error::Domain(format!("a sweep needs at least 3 steps, got {steps}")));
    }
    if !(range.0 < range.1) || !range.1.is_finite() || !range.0.is_finite() {
        return Err(Error::Domain(format!("empty sweep range {}:{}", range.0, range.1)));
    }
    Ok(())
}

fn sweep_jets<T: Scalar>(
    parameter: &'static str,
    jets: &[JetData<T>],
    mp: MetricParams<T>,
    range: (T, T),
    steps: usize,
    quad: &QuadratureSet<T>,
    opts: &SweepOptions<T>,
) -> ScaleSweepResult<T> {
    let ks = linspace(range.0, range.1, steps);
    let grid: Vec<SweepPoint<T>> = ks
        .par_iter()
        .map(|&k| SweepPoint { k, l2_residual: l2_sq_scaled(jets, k, mp, quad).sqrt(), energy: energy_scaled(jets, k, mp, quad) })
        .collect();
    let l2: Vec<T> = grid.iter().map(|g| g.l2_residual).collect();
    let e: Vec<T> = grid.iter().map(|g| g.energy).collect();
    let roots = refine_zeros(&ks, &l2, &|k| l2_sq_scaled(jets, k, mp, quad), opts);
    let critical_points = refine_critical_points(&ks, &e, &|k| energy_scaled(jets, k, mp, quad), opts.x_tol);
    ScaleSweepResult {
        parameter,
        params: mp,
        min_l2_residual: l2.iter().copied().fold(T::infinity(), T::min),
        grid,
        roots,
        critical_points,
        n: quad.len(),
        seed: quad.seed(),
    }
}

/// Residual and energy of `k·base` across `k_range`.
pub fn scale_sweep<T: Scalar>(
    base: &SectionSpec<T>,
    m: &Manifold,
    mp: MetricParams<T>,
    k_range: (T, T),
    steps: usize,
    quad: &QuadratureSet<T>,
    opts: &SweepOptions<T>,
) -> Result<ScaleSweepResult<T>> {
    check_range(k_range, steps)?;
    let jets = jets(base, m, quad, &FdOptions::default())?;
    let deviation = jets.iter().map(|j| (norm(j.value()) - T::one()).abs()).fold(T::zero(), T::max);
    if !(deviation <= T::tolerance(UNIT_LENGTH_TOL)) {
        return Err(Error::NotUnitLength { deviation: deviation.as_f64() });
    }
    Ok(sweep_jets("k", &jets, mp, k_range, steps, quad, opts))
}

/// Sweep of the axial length `c` of the conformal gradient along `e₀`.
pub fn conformal_axis_sweep<T: Scalar>(
    m: &Manifold,
    mp: MetricParams<T>,
    c_range: (T, T),
    steps: usize,
    quad: &QuadratureSet<T>,
    opts: &SweepOptions<T>,
) -> Result<ScaleSweepResult<T>> {
    if !m.is_sphere() {
        return Err(Error::Domain(format!("conformal gradient sweeps need a sphere, got {m}")));
    }
    check_range(c_range, steps)?;
    let mut axis = vec![T::zero(); m.ambient_dim()];
    axis[0] = T::one();
    let jets = jets(&SectionSpec::conformal(axis), m, quad, &FdOptions::default())?;
    Ok(sweep_jets("c", &jets, mp, c_range, steps, quad, opts))
}

/// `l2` residual of a fixed section as `q` varies, with `p` held.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QSweepResult<T> {
    pub p: T,
    pub grid: Vec<(T, T)>,
    pub zeros: Vec<T>,
    pub min_l2_residual: T,
}

pub fn q_sweep<T: Scalar>(
    s: &SectionSpec<T>,
    m: &Manifold,
    p: T,
    qs: &[T],
    quad: &QuadratureSet<T>,
    opts: &SweepOptions<T>,
) -> Result<QSweepResult<T>> {
    let jets = jets(s, m, quad, &FdOptions::default())?;
    // the residual is affine in q, so evaluate the two parts once
    let parts: Vec<(Vec<T>, T)> = jets
        .par_iter()
        .map(|j| {
            let t = tension_from_jet(j, p);
            let phi0 = phi_from_jet(j, MetricParams::new(p, T::zero()));
            let phi1 = phi_from_jet(j, MetricParams::new(p, T::one())) - phi0;
            (sub(&t, &scale(phi0, j.value())), phi1)
        })
        .collect();
    let values: Vec<&[T]> = jets.iter().map(|j| j.value()).collect();
    let g = |q: T| {
        let sq: Vec<T> = parts
            .iter()
            .zip(&values)
            .map(|((a, phi1), v)| {
                let mut r = a.clone();
                axpy(-q * *phi1, v, &mut r);
                norm_sq(&r)
            })
            .collect();
        quad.weighted_sum(&sq)
    };
    let l2: Vec<T> = qs.iter().map(|&q| g(q).sqrt()).collect();
    let zeros = refine_zeros(qs, &l2, &g, opts);
    Ok(QSweepResult {
        p,
        min_l2_residual: l2.iter().copied().fold(T::infinity(), T::min),
        grid: qs.iter().copied().zip(l2).collect(),
        zeros,
    })
}

/// Conformal-gradient solution on `Sⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm52Solution<T> {
    pub n: usize,
    pub p: T,
    pub q: T,
    /// Axial length `|a|`.
    pub c: T,
    /// Defect of the `λ²` relation after substitution.
    pub lambda_sq_defect: T,
}

/// Solves the zeroth-order, `λ²` and `λ⁴` coefficient conditions for the conformal gradient on `Sⁿ`.
pub fn solve_thm52<T: Scalar>(n: usize) -> Result<Thm52Solution<T>> {
    let no_solution = || Error::Domain(format!("no conformal-gradient solution on S^{n}: requires n >= 3"));
    if n < 3 {
        return Err(no_solution());
    }
    let one = T::one();
    let nn = T::from_count(n);
    // λ⁴ coefficient: n - p + 1 = 0
    let p = nn + one;
    // with q c² = -1 the λ² relation 2p-1 = p(n+q) + qc² + q(1+c²)(n-p+1) is linear in q
    let q = (p * (one - nn) + nn + one) / (nn + one);
    if !(q < T::zero()) {
        return Err(no_solution());
    }
    let c2 = -one / q;
    let c = c2.sqrt();
    let defect = (T::lit(2.0) * p - one - (p * (nn + q) + q * c2 + q * (one + c2) * (nn - p + one))).abs();
    if !(defect <= T::tolerance(1e-12)) {
        return Err(Error::Domain(format!("λ² relation fails after substitution (defect {defect})")));
    }
    Ok(Thm52Solution { n, p, q, c, lambda_sq_defect: defect })
}

/// Residual of `f·ξ` on an odd sphere, with per-point data.
pub fn functional_rescale_check<T: Scalar>(
    m: &Manifold,
    mp: MetricParams<T>,
    f: ScalarFieldSpec<T>,
    quad: &QuadratureSet<T>,
) -> Result<ResidualReport<T>> {
    if !m.is_sphere() || m.dim() % 2 == 0 {
        return Err(Error::Domain(format!("rescaled Hopf fields need an odd-dimensional sphere, got {m}")));
    }
    let s = SectionSpec::Rescaled { base: Box::new(SectionSpec::Hopf), factor: f };
    residual(&s, m, mp, quad, true)
}
