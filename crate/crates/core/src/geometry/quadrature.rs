//! Weighted point sets realizing `∫_M · vol(g)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Manifold, ManifoldKind, Point};
use crate::error::{Error, Result};
use crate::output::format_f64;
use crate::scalar::{pairwise_sum, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureScheme {
    /// Independent samples of the uniform measure, equal weights `vol/N`.
    MonteCarlo,
    /// Golden-angle spiral on `S²`, equal weights `4π/N`.
    Fibonacci2Sphere,
    /// Cell-centred tensor grid on `Tⁿ`, `m` points per axis with `mⁿ ≤ N`.
    TorusGrid,
    /// Tensor Gauss–Legendre rule in nested polar angles on `Sⁿ`, trapezoidal in the last angle.
    GaussProduct,
}

impl fmt::Display for QuadratureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::MonteCarlo => "monte-carlo",
            Self::Fibonacci2Sphere => "fibonacci",
            Self::TorusGrid => "torus-grid",
            Self::GaussProduct => "gauss-product",
        })
    }
}

impl FromStr for QuadratureScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "monte-carlo" | "mc" => Ok(Self::MonteCarlo),
            "fibonacci" => Ok(Self::Fibonacci2Sphere),
            "torus-grid" | "grid" => Ok(Self::TorusGrid),
            "gauss-product" | "gauss" => Ok(Self::GaussProduct),
            other => Err(Error::Parse { what: "quadrature scheme", message: format!("unknown scheme `{other}`") }),
        }
    }
}

/// Sample points with positive weights (units of volume).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSet<T> {
    manifold: Manifold,
    points: Vec<Point<T>>,
    weights: Vec<T>,
    seed: u64,
    scheme: QuadratureScheme,
}

impl<T: Scalar> QuadratureSet<T> {
    /// Builds a quadrature set for `scheme` with (about) `n` points.
    ///
    /// Monte-Carlo samples are generated per point index from `seed` with a
    /// counter-style stream, so the result does not depend on thread count.
    pub fn new(manifold: Manifold, scheme: QuadratureScheme, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyQuadrature);
        }
        let unsupported = || Error::UnsupportedScheme { scheme: scheme.to_string(), manifold: manifold.to_string() };
        let (coords, weights): (Vec<Vec<f64>>, Vec<f64>) = match (scheme, manifold.kind()) {
            (QuadratureScheme::MonteCarlo, kind) => {
                let w = manifold.volume::<f64>() / n as f64;
                let d = manifold.ambient_dim();
                let coords = (0..n)
                    .into_par_iter()
                    .map(|i| sample_point(kind, d, seed, i as u64))
                    .collect();
                (coords, vec![w; n])
            }
            (QuadratureScheme::Fibonacci2Sphere, ManifoldKind::Sphere) if manifold.dim() == 2 => {
                (fibonacci_sphere(n), vec![4.0 * std::f64::consts::PI / n as f64; n])
            }
            (QuadratureScheme::TorusGrid, ManifoldKind::Torus) => torus_grid(manifold.dim(), n),
            (QuadratureScheme::GaussProduct, ManifoldKind::Sphere) => gauss_product_sphere(manifold.dim(), n),
            _ => return Err(unsupported()),
        };
        let points = coords
            .into_iter()
            .map(|c| Point::from_raw(c.into_iter().map(T::lit).collect()))
            .collect();
        let weights = weights.into_iter().map(T::lit).collect();
        Ok(Self { manifold, points, weights, seed, scheme })
    }

    /// Builds a set from explicit points and weights.
    pub fn from_parts(manifold: Manifold, points: Vec<Point<T>>, weights: Vec<T>, seed: u64, scheme: QuadratureScheme) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyQuadrature);
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
        }
        for p in &points {
            if p.coords().len() != manifold.ambient_dim() {
                return Err(Error::DimensionMismatch { expected: manifold.ambient_dim(), got: p.coords().len() });
            }
        }
        Ok(Self { manifold, points, weights, seed, scheme })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> T {
        pairwise_sum(&self.weights)
    }

    /// Evaluates `f` at every point in parallel, preserving point order.
    pub fn map<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(&Point<T>) -> R + Sync + Send,
    {
        self.points.par_iter().map(f).collect()
    }

    pub fn try_map<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Point<T>) -> Result<R> + Sync + Send,
    {
        self.points.par_iter().map(f).collect()
    }

    /// `Σₖ wₖ f(xₖ)` with a deterministic reduction order.
    pub fn integrate<F>(&self, f: F) -> T
    where
        F: Fn(&Point<T>) -> T + Sync + Send,
    {
        self.weighted_sum(&self.map(f))
    }

    /// `Σₖ wₖ vₖ` for values already evaluated at the points.
    pub fn weighted_sum(&self, values: &[T]) -> T {
        let terms: Vec<T> = self.weights.iter().zip(values).map(|(&w, &v)| w * v).collect();
        pairwise_sum(&terms)
    }

    /// CSV with one row per point: `x0,…,x{d-1},weight`.
    pub fn to_csv(&self) -> String {
        let d = self.manifold.ambient_dim();
        let mut out = String::new();
        let header: Vec<String> = (0..d).map(|i| format!("x{i}")).chain(["weight".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let row: Vec<String> = p.coords().iter().chain([&w]).map(|v| format_f64(v.as_f64())).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn sample_point(kind: ManifoldKind, d: usize, seed: u64, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    match kind {
        ManifoldKind::Sphere => loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > 1e-12 {
                break v.into_iter().map(|x| x / r).collect();
            }
        },
        ManifoldKind::Torus => {
            let unit = Uniform::new(0.0, 1.0).expect("valid range");
            (0..d).map(|_| unit.sample(&mut rng)).collect()
        }
    }
}

fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn torus_grid(dim: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut m = (n as f64).powf(1.0 / dim as f64).floor().max(1.0) as usize;
    while (m + 1).checked_pow(dim as u32).is_some_and(|t| t <= n) {
        m += 1;
    }
    while m > 1 && m.pow(dim as u32) > n {
        m -= 1;
    }
    let total = m.pow(dim as u32);
    let coords = (0..total)
        .map(|mut idx| {
            let mut c = vec![0.0; dim];
            for axis in (0..dim).rev() {
                c[axis] = ((idx % m) as f64 + 0.5) / m as f64;
                idx /= m;
            }
            c
        })
        .collect();
    (coords, vec![1.0 / total as f64; total])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and unnormalized weights of the Gauss rule for the weight `(1-u²)^{λ-1/2}` on `[-1, 1]`.
///
/// Roots of the Gegenbauer polynomial `C_m^{(λ)}` are bracketed on a fine grid in
/// `θ = acos u`, then polished by Newton steps. The weights are proportional to
/// `1/((1-u²) C_m'(u)²)`; callers normalize them.
fn gauss_gegenbauer(m: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let eval = |x: f64| -> (f64, f64) {
        let (mut c0, mut c1) = (1.0, 2.0 * lambda * x);
        if m == 0 {
            return (1.0, 0.0);
        }
        for k in 2..=m {
            let kf = k as f64;
            let c2 = (2.0 * x * (kf + lambda - 1.0) * c1 - (kf + 2.0 * lambda - 2.0) * c0) / kf;
            c0 = c1;
            c1 = c2;
        }
        let mf = m as f64;
        let d = (-mf * x * c1 + (mf + 2.0 * lambda - 1.0) * c0) / (1.0 - x * x);
        (c1, d)
    };
    let samples = 64 * (m + 1);
    let mut nodes = Vec::with_capacity(m);
    let mut prev_x = 1.0;
    let mut prev_v = eval(1.0).0;
    // grid offset so that no sample lands on a root of a Chebyshev-like case
    for j in 1..=samples {
        let x = if j == samples {
            -1.0
        } else {
            (std::f64::consts::PI * (j as f64 - 0.381966) / samples as f64).cos()
        };
        let v = eval(x).0;
        if v == 0.0 || (v < 0.0) != (prev_v < 0.0) {
            let (mut lo, mut hi) = (x, prev_x);
            let neg_lo = eval(lo).0 < 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if (eval(mid).0 < 0.0) == neg_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let mut r = 0.5 * (lo + hi);
            for _ in 0..3 {
                let (p, d) = eval(r);
                let step = p / d;
                if step.is_finite() && (r - step) > x && (r - step) < prev_x {
                    r -= step;
                }
            }
            nodes.push(r);
        }
        prev_x = x;
        prev_v = v;
    }
    assert_eq!(nodes.len(), m, "Gegenbauer root bracketing");
    nodes.reverse();
    let weights = nodes
        .iter()
        .map(|&u| {
            let (_, d) = eval(u);
            1.0 / ((1.0 - u * u) * d * d)
        })
        .collect();
    (nodes, weights)
}

/// Product rule on `Sⁿ` with `2m · m^{n-1} ≥ N` points.
///
/// Uses `x = (√(1-u²) · y, u)` with `y ∈ Sᵏ⁻¹`, `dV = (1-u²)^{(k-2)/2} du dV'`,
/// a Gauss–Gegenbauer rule in `u` and equispaced angles on `S¹`. The rule
/// integrates polynomials of degree below `2m` exactly.
fn gauss_product_sphere(dim: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut m = 1usize;
    while 2 * m.pow(dim as u32) < n {
        m += 1;
    }
    let circle = 2 * m;
    let mut pts: Vec<(Vec<f64>, f64)> = (0..circle)
        .map(|j| {
            let phi = (j as f64 + 0.5) * std::f64::consts::TAU / circle as f64;
            (vec![phi.cos(), phi.sin()], std::f64::consts::TAU / circle as f64)
        })
        .collect();
    for k in 2..=dim {
        let (nodes, raw) = gauss_gegenbauer(m, (k as f64 - 1.0) / 2.0);
        // ∫(1-u²)^{(k-2)/2} du = vol(Sᵏ)/vol(Sᵏ⁻¹)
        let target = Manifold { kind: ManifoldKind::Sphere, dim: k }.volume::<f64>()
            / Manifold { kind: ManifoldKind::Sphere, dim: k - 1 }.volume::<f64>();
        let total: f64 = raw.iter().sum();
        let mut next = Vec::with_capacity(pts.len() * m);
        for (&u, &wu) in nodes.iter().zip(&raw) {
            let c = (1.0 - u * u).sqrt();
            let w = wu * target / total;
            for (y, wy) in &pts {
                let mut coords: Vec<f64> = y.iter().map(|v| c * v).collect();
                coords.push(u);
                next.push((coords, w * wy));
            }
        }
        pts = next;
    }
    pts.into_iter().unzip()
}
