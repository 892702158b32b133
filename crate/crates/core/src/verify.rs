//! The acceptance suite: twelve numbered criteria, each a list of numeric checks.
//!
//! Reports serialize without timings so two runs with the same seed give
//! byte-identical JSON; timings and their budgets are kept on the side.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{classify_q_riemannian, density, energy_total, kato_margin, MetricParams, QRiemannian};
use crate::error::Result;
use crate::geometry::{gauss_legendre, Manifold, QuadratureScheme, QuadratureSet};
use crate::linalg::{dot, max_abs_diff, scale, sub, SquareMatrix};
use crate::output::{format_f64, to_json};
use crate::regions::{self, AllowedQ, CorollaryCheck, RegionName, RegionSpec};
use crate::sections::{codifferential_phi_fd, FdOptions, JetKind, ScalarFieldSpec, SectionSpec};
use crate::solver::{functional_rescale_check, q_sweep, solve_thm52, SweepOptions};
use crate::variational::{check_first_variation, first_variation, jets, phi_difference_from_jet, residual, residual_from_jets, VariationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Sample sizes at the stated minimum instead of the larger default.
    pub fast: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 42, fast: false }
    }
}

/// One numeric comparison inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub label: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Timing {
    pub fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    /// All numeric checks passed.
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl CriterionResult {
    pub fn within_budget(&self) -> bool {
        self.timings.iter().all(Timing::within_budget)
    }

    pub fn ok(&self) -> bool {
        self.passed && self.within_budget()
    }

    pub fn elapsed(&self) -> Duration {
        self.timings.iter().map(|t| t.elapsed).sum()
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub fast: bool,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    /// Numeric checks and time budgets all passed.
    pub fn ok(&self) -> bool {
        self.criteria.iter().all(CriterionResult::ok)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    /// Human-readable pass/fail table with timings.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            let status = if c.ok() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:>2}  {:>8.3}s  {}", c.id, c.elapsed().as_secs_f64(), c.name);
            for k in c.failed_checks() {
                let _ = writeln!(out, "          check failed: {} = {} (want {} {})", k.label, format_f64(k.value), k.relation, format_f64(k.bound));
            }
            for t in c.timings.iter().filter(|t| !t.within_budget()) {
                let budget = t.budget.map_or(0.0, |b| b.as_secs_f64());
                let _ = writeln!(out, "          over budget: {} took {:.3}s (budget {budget}s)", t.label, t.elapsed.as_secs_f64());
            }
        }
        let passed = self.criteria.iter().filter(|c| c.ok()).count();
        let _ = writeln!(out, "{passed}/{} criteria passed", self.criteria.len());
        out
    }
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, label: impl Into<String>, value: f64, relation: &'static str, bound: f64) {
        let passed = match relation {
            "<" => value < bound,
            "<=" => value <= bound,
            ">" => value > bound,
            ">=" => value >= bound,
            "==" => value == bound,
            _ => unreachable!("unknown relation {relation}"),
        };
        self.0.push(Check { label: label.into(), value, relation, bound, passed });
    }

    fn below(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, "<", bound);
    }

    fn above(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value, ">", bound);
    }

    fn holds(&mut self, label: impl Into<String>, ok: bool) {
        self.push(label, if ok { 1.0 } else { 0.0 }, "==", 1.0);
    }
}

struct Sizes {
    residual_points: usize,
    identity_points: usize,
    variation_points: usize,
    kato_points: usize,
    energy_mc_points: usize,
    scaling_points: usize,
    q_sweep_points: usize,
    rescale_points: usize,
}

impl Sizes {
    fn new(fast: bool) -> Self {
        if fast {
            Self {
                residual_points: 1000,
                identity_points: 1000,
                variation_points: 100_000,
                kato_points: 10_000,
                energy_mc_points: 100_000,
                scaling_points: 1000,
                q_sweep_points: 1000,
                rescale_points: 1000,
            }
        } else {
            Self {
                residual_points: 10_000,
                identity_points: 2000,
                variation_points: 200_000,
                kato_points: 50_000,
                energy_mc_points: 200_000,
                scaling_points: 10_000,
                q_sweep_points: 5000,
                rescale_points: 10_000,
            }
        }
    }
}

struct Ctx {
    seed: u64,
    sizes: Sizes,
}

impl Ctx {
    fn mc(&self, m: Manifold, n: usize, stream: u64) -> Result<QuadratureSet<f64>> {
        QuadratureSet::new(m, QuadratureScheme::MonteCarlo, n, self.seed.wrapping_add(stream))
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

fn unit_axis(d: usize, c: f64) -> Vec<f64> {
    let mut a = vec![0.0; d];
    a[0] = c;
    a
}

type CriterionFn = fn(&Ctx, &mut Checks, &mut Vec<Timing>) -> Result<()>;

const CRITERIA: [(&str, CriterionFn); 11] = [
    ("conformal gradient solutions on S^3, S^5, S^7", c01_conformal_solutions),
    ("scaled Hopf fields k xi with p = 1 + 1/k^2", c02_scaled_hopf),
    ("Laplacian-of-length and codifferential identities", c03_length_identities),
    ("first variation against finite-difference energy", c04_first_variation),
    ("Kato margin and q-Riemannian classification", c05_kato),
    ("energy closed forms", c06_energy_closed_forms),
    ("constant-length scaling law", c07_scaling_law),
    ("uniqueness of q for the conformal gradient on S^5", c08_uniqueness),
    ("regions of the (p,q)-plane", c09_regions),
    ("functional rescalings of the Hopf field", c10_functional_rescale),
    ("parallel sections on the torus", c11_parallel_torus),
];

fn timed<R>(label: impl Into<String>, budget: Option<f64>, timings: &mut Vec<Timing>, f: impl FnOnce() -> R) -> R {
    let start = Instant::now();
    let r = f();
    timings.push(Timing { label: label.into(), elapsed: start.elapsed(), budget: budget.map(Duration::from_secs_f64) });
    r
}

fn run_one(id: usize, name: &'static str, f: CriterionFn, ctx: &Ctx) -> CriterionResult {
    let mut checks = Checks::default();
    let mut timings = Vec::new();
    let start = Instant::now();
    if let Err(e) = f(ctx, &mut checks, &mut timings) {
        checks.holds(format!("error: {e}"), false);
    }
    if timings.is_empty() {
        timings.push(Timing { label: name.to_string(), elapsed: start.elapsed(), budget: None });
    }
    let passed = !checks.0.is_empty() && checks.0.iter().all(|c| c.passed);
    CriterionResult { id, name, passed, checks: checks.0, timings }
}

/// Criteria 1 to 11.
fn run_numeric(opts: VerifyOptions) -> Vec<CriterionResult> {
    let ctx = Ctx { seed: opts.seed, sizes: Sizes::new(opts.fast) };
    CRITERIA.iter().enumerate().map(|(i, &(name, f))| run_one(i + 1, name, f, &ctx)).collect()
}

/// Runs the whole suite; the last criterion repeats the first eleven and compares bytes.
pub fn run(opts: VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let mut criteria = run_numeric(opts);
    let first_pass = start.elapsed();
    let second_start = Instant::now();
    let repeat = run_numeric(opts);
    let second_pass = second_start.elapsed();
    let mut checks = Checks::default();
    checks.holds("second run JSON is byte-identical", to_json(&criteria) == to_json(&repeat));
    let timings = vec![
        Timing { label: "full suite".into(), elapsed: first_pass, budget: Some(Duration::from_secs(60)) },
        Timing { label: "repeat run".into(), elapsed: second_pass, budget: None },
    ];
    criteria.push(CriterionResult {
        id: 12,
        name: "determinism and runtime",
        passed: checks.0.iter().all(|c| c.passed),
        checks: checks.0,
        timings,
    });
    VerifyReport { seed: opts.seed, fast: opts.fast, passed: criteria.iter().all(|c| c.passed), criteria }
}

fn c01_conformal_solutions(ctx: &Ctx, ch: &mut Checks, timings: &mut Vec<Timing>) -> Result<()> {
    for n in [3usize, 5, 7] {
        timed(format!("S^{n}"), Some(5.0), timings, || -> Result<()> {
            let sol = solve_thm52::<f64>(n)?;
            ch.holds(format!("S^{n}: (p,q,c) = (n+1, 2-n, 1/sqrt(n-2))"), sol.p == (n + 1) as f64 && sol.q == 2.0 - n as f64 && (sol.c - 1.0 / ((n - 2) as f64).sqrt()).abs() < 1e-15);
            let m = Manifold::sphere(n)?;
            let quad = ctx.mc(m, ctx.sizes.residual_points, n as u64)?;
            let sigma = |c: f64| SectionSpec::conformal(unit_axis(n + 1, c));
            let sup = |c: f64, p: f64, q: f64| residual(&sigma(c), &m, MetricParams::new(p, q), &quad, false).map(|r| r.sup_residual);
            ch.below(format!("S^{n}: sup residual"), sup(sol.c, sol.p, sol.q)?, 1e-10);
            ch.above(format!("S^{n}: sup residual with p + 0.01"), sup(sol.c, sol.p + 1e-2, sol.q)?, 1e-4);
            ch.above(format!("S^{n}: sup residual with q + 0.01"), sup(sol.c, sol.p, sol.q + 1e-2)?, 1e-4);
            ch.above(format!("S^{n}: sup residual with |a| + 0.01"), sup(sol.c + 1e-2, sol.p, sol.q)?, 1e-4);
            Ok(())
        })?;
    }
    Ok(())
}

fn c02_scaled_hopf(ctx: &Ctx, ch: &mut Checks, timings: &mut Vec<Timing>) -> Result<()> {
    timed("all cases", Some(5.0), timings, || -> Result<()> {
        for n in [3usize, 5] {
            let m = Manifold::sphere(n)?;
            let quad = ctx.mc(m, ctx.sizes.residual_points, 100 + n as u64)?;
            for k in [0.5, 1.0, 2.0] {
                let s = SectionSpec::scaled_by(SectionSpec::Hopf, k);
                let jets = jets(&s, &m, &quad, &FdOptions::default())?;
                let p = 1.0 + 1.0 / (k * k);
                let (mut on, mut off) = (0.0f64, f64::INFINITY);
                for q in [-1.0, 0.0, 1.0, 2.0] {
                    on = on.max(residual_from_jets(&s, &jets, MetricParams::new(p, q), &quad, false).sup_residual);
                    for dp in [-0.1, 0.1] {
                        off = off.min(residual_from_jets(&s, &jets, MetricParams::new(p + dp, q), &quad, false).sup_residual);
                    }
                }
                ch.below(format!("S^{n}, k = {k}: max sup residual over q"), on, 1e-10);
                ch.above(format!("S^{n}, k = {k}: min sup residual with p off by 0.1"), off, 1e-4);
            }
        }
        Ok(())
    })
}

fn c03_length_identities(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let mut rng = ctx.rng(3);
    for n in [3usize, 5] {
        let d = n + 1;
        let m = Manifold::sphere(n)?;
        let quad = ctx.mc(m, ctx.sizes.identity_points, 200 + n as u64)?;
        let mut random = |len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let families = [
            ("conformal", SectionSpec::conformal(random(d))),
            ("hopf", SectionSpec::Hopf),
            (
                "linear",
                SectionSpec::LinearAmbient {
                    matrix: SquareMatrix::from_row_major(d, random(d * d)).expect("square"),
                    offset: random(d),
                },
            ),
        ];
        let fd = FdOptions::default();
        for (name, s) in &families {
            let js = jets(s, &m, &quad, &fd)?;
            let mut length_err = 0.0f64;
            let mut codiff_err = 0.0f64;
            for (x, j) in quad.points().iter().zip(&js) {
                // ⟨∇*∇σ, σ⟩ = |∇σ|² + ΔF
                length_err = length_err.max((dot(&j.rough_laplacian, j.value()) - j.grad_sigma_sq() - j.laplacian_f).abs());
                // -Σᵢ ∇_{Eᵢ}(⟨∇F,Eᵢ⟩σ) = (ΔF)σ - ∇_{∇F}σ
                let lhs = codifferential_phi_fd(s, &m, x, &fd)?;
                let rhs = sub(&scale(j.laplacian_f, j.value()), &j.derivative_along_grad_f);
                codiff_err = codiff_err.max(max_abs_diff(&lhs.vec, &rhs));
            }
            let tol = if js[0].kind == JetKind::Analytic { 1e-8 } else { 1e-5 };
            ch.below(format!("S^{n} {name}: Laplacian of length identity"), length_err, tol);
            ch.below(format!("S^{n} {name}: codifferential identity (finite differences)"), codiff_err, 1e-5);
        }
    }
    Ok(())
}

fn c04_first_variation(ctx: &Ctx, ch: &mut Checks, timings: &mut Vec<Timing>) -> Result<()> {
    timed("both parameter pairs", Some(10.0), timings, || -> Result<()> {
        let m = Manifold::sphere(3)?;
        // integration by parts needs an accurate rule; Monte-Carlo noise would swamp 1e-6
        let quad = QuadratureSet::new(m, QuadratureScheme::GaussProduct, ctx.sizes.variation_points, ctx.seed)?;
        let s = SectionSpec::conformal(unit_axis(4, 1.0));
        let rho = VariationSpec::new(SectionSpec::conformal(vec![0.0, 1.0, 0.0, 0.0]));
        for (p, q) in [(4.0, -1.0), (0.0, 0.0)] {
            let c = check_first_variation(&s, &rho, &m, MetricParams::new(p, q), &quad, 1e-4)?;
            ch.below(format!("(p,q) = ({p},{q}): relative error"), c.relative_error, 1e-6);
        }
        // both values above vanish by symmetry; a tilted axis gives a nonzero derivative
        let tilted = VariationSpec::new(SectionSpec::conformal(vec![1.0, 1.0, 0.0, 0.0]));
        let c = check_first_variation(&s, &tilted, &m, MetricParams::new(0.0, 0.0), &quad, 1e-4)?;
        ch.above("tilted direction at (0,0): |formula| / scale", c.formula.abs() / c.scale, 1e-2);
        ch.below("tilted direction at (0,0): relative error", c.relative_error, 1e-6);
        Ok(())
    })
}

fn c05_kato(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let n = 5usize;
    let sol = solve_thm52::<f64>(n)?;
    let m = Manifold::sphere(n)?;
    let s = SectionSpec::conformal(unit_axis(n + 1, sol.c));
    let quad = ctx.mc(m, ctx.sizes.kato_points, 500)?;
    let (mut min_margin, mut min_off_equator, mut max_on_equator) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for x in quad.points() {
        let margin = kato_margin(&s, &m, x, sol.q)?;
        min_margin = min_margin.min(margin);
        if x.coords()[0].abs() > 1e-3 {
            min_off_equator = min_off_equator.min(margin);
        }
        // the nearest point with λ = 0
        let mut e = x.coords().to_vec();
        e[0] = 0.0;
        let y = m.point_from_ambient(e)?;
        max_on_equator = max_on_equator.max(kato_margin(&s, &m, &y, sol.q)?.abs());
    }
    ch.push("minimum Kato margin", min_margin, ">=", -1e-12);
    ch.above("minimum Kato margin where |x0| > 1e-3", min_off_equator, 0.0);
    ch.push("max |Kato margin| where lambda = 0", max_on_equator, "<=", 1e-12);
    let at = classify_q_riemannian(&s, &m, sol.q, &quad)?;
    ch.holds("q-Riemannian at q = 2-n", at.verdict.is_q_riemannian());
    let below = classify_q_riemannian(&s, &m, sol.q - 0.01, &quad)?;
    ch.holds("not q-Riemannian at q = 2-n-0.01", below.verdict == QRiemannian::Not);
    Ok(())
}

fn c06_energy_closed_forms(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let zero = MetricParams::new(0.0, 0.0);
    let s3 = Manifold::sphere(3)?;
    let hopf = energy_total(&SectionSpec::Hopf, &s3, zero, &ctx.mc(s3, 1000, 600)?)?;
    ch.below("Hopf on S^3: |E - 2 pi^2|", (hopf - 2.0 * PI * PI).abs(), 1e-12);

    let s2 = Manifold::sphere(2)?;
    let s = SectionSpec::conformal(unit_axis(3, 1.0));
    let exact = 4.0 * PI / 3.0;
    let mc = energy_total(&s, &s2, zero, &ctx.mc(s2, ctx.sizes.energy_mc_points, 601)?)?;
    ch.below("conformal on S^2, Monte-Carlo: relative error", (mc - exact).abs() / exact, 0.02);
    // the density depends on the polar angle only
    let (nodes, weights) = gauss_legendre(64);
    let mut polar = 0.0;
    for (t, w) in nodes.iter().zip(&weights) {
        let theta = PI * (t + 1.0) / 2.0;
        let x = s2.point_from_ambient(vec![theta.cos(), theta.sin(), 0.0])?;
        polar += w * PI / 2.0 * density(&s, &s2, &x, zero)? * theta.sin();
    }
    let polar = PI * polar;
    ch.below("conformal on S^2, polar-angle Gauss rule: |E - 4 pi/3|", (polar - exact).abs(), 1e-6);
    Ok(())
}

fn c07_scaling_law(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let m = Manifold::sphere(3)?;
    let quad = ctx.mc(m, ctx.sizes.scaling_points, 700)?;
    let mut worst = 0.0f64;
    for k in [0.5, 1.0, 2.0] {
        let s = SectionSpec::scaled_by(SectionSpec::Hopf, k);
        let base = energy_total(&s, &m, MetricParams::new(0.0, 0.0), &quad)?;
        for p in [-1.0, 0.0, 2.0, 4.0] {
            for q in [-1.0, 0.0, 3.0] {
                let e = energy_total(&s, &m, MetricParams::new(p, q), &quad)?;
                let law = (1.0 + k * k).powf(-p) * base;
                worst = worst.max((e - law).abs() / law.abs().max(f64::MIN_POSITIVE));
            }
        }
    }
    ch.below("max relative deviation from (1+k^2)^-p E_00", worst, 1e-12);
    Ok(())
}

fn c08_uniqueness(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let n = 5usize;
    let m = Manifold::sphere(n)?;
    let sol = solve_thm52::<f64>(n)?;
    let s = SectionSpec::conformal(unit_axis(n + 1, sol.c));
    let quad = ctx.mc(m, ctx.sizes.q_sweep_points, 800)?;
    let qs = regions::linspace(-10.0, 10.0, 400);
    let spacing = qs[1] - qs[0];
    let sweep = q_sweep(&s, &m, sol.p, &qs, &quad, &SweepOptions::default())?;
    ch.push("number of zeros of the l2 residual", sweep.zeros.len() as f64, "==", 1.0);
    let nearest = sweep.zeros.iter().map(|z| (z + 3.0).abs()).fold(f64::INFINITY, f64::min);
    ch.push("|zero + 3|", nearest, "<=", spacing);
    let js = jets(&s, &m, &quad, &FdOptions::default())?;
    let mut worst = 0.0f64;
    for &r in &qs {
        for j in &js {
            let d = phi_difference_from_jet(j, sol.p, -3.0, r);
            worst = worst.max((d.factored - d.direct).abs());
        }
    }
    ch.below("max |factored - direct| phi difference", worst, 1e-10);
    Ok(())
}

fn c09_regions(_: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    // definitions restated independently of the module
    let f_minus = |mu: f64, p: f64, q: f64| p < 0.0 && mu * q <= 2.0 * p;
    let f_0 = |p: f64| (0.0..=1.0).contains(&p);
    let f_1 = |mu: f64, p: f64, q: f64| p > 1.0 && mu * q < 1.0 - p;
    let g_1 = |nu: f64, p: f64, q: f64| p > 1.0 && q >= 2.0 * nu * (1.0 - p);
    let w = |mu: f64, nu: f64, p: f64, q: f64| p > 1.0 && 2.0 * mu * nu * (1.0 - p) <= mu * q && mu * q < 1.0 - p;
    let rho = |nu: f64, p: f64| match p {
        p if p <= -1.0 => -1.0 - p,
        p if p <= 2.0 => 0.0,
        p => nu * (2.0 - p) / 2.0,
    };

    let mut mismatches = 0usize;
    let mut partition_failures = 0usize;
    let mut cells = 0usize;
    for (mu, nu) in [(0.5, 1.0), (1.0, 1.0), (0.75, 2.0)] {
        let spec = RegionSpec::new(mu, nu)?;
        let rows = regions::export_region_grid(spec, (-6.0, 10.0), (-20.0, 10.0), 200)?;
        cells += rows.len();
        for r in &rows {
            let (p, q) = (r.p, r.q);
            let mut expect = Vec::new();
            for (ok, name) in [
                (f_minus(mu, p, q), RegionName::FMinus),
                (f_0(p), RegionName::F0),
                (f_1(mu, p, q), RegionName::F1),
                (g_1(nu, p, q), RegionName::G1),
                (w(mu, nu, p, q), RegionName::W),
                (p >= -4.0 && q < rho(nu, p), RegionName::RhoBelow),
            ] {
                if ok {
                    expect.push(name);
                }
            }
            mismatches += usize::from(expect != r.labels);
            let verdict = regions::in_f(mu, p, q)?;
            mismatches += usize::from(verdict.member != (f_minus(mu, p, q) || f_0(p) || f_1(mu, p, q)));
            if (mu, nu) == (0.5, 1.0) && p > 1.0 {
                let a = regions::in_f(0.5, p, q)?.region_name == Some(RegionName::F1);
                let b = regions::in_g1(1.0, p, q)?.member;
                partition_failures += usize::from(a == b);
            }
        }
    }
    ch.push("grid cells checked", cells as f64, "==", 3.0 * 40_000.0);
    ch.push("label mismatches against the definitions", mismatches as f64, "==", 0.0);
    ch.push("cells with p > 1 not in exactly one of F_1(1/2), G_1(1)", partition_failures as f64, "==", 0.0);

    let cut = |nu: f64, p: f64| regions::cutoff_rho(nu, p);
    ch.holds("rho_1(-2) = 1", cut(1.0, -2.0)? == 1.0);
    ch.holds("rho_1(0) = 0", cut(1.0, 0.0)? == 0.0);
    ch.holds("rho_2(4) = -2", cut(2.0, 4.0)? == -2.0);
    ch.holds("rho undefined below p = -4", cut(1.0, -4.5).is_err());
    ch.holds("F: (0.5, 7) via F_0", regions::in_f(0.5, 0.5, 7.0)?.region_name == Some(RegionName::F0));
    ch.holds("F: (-1, -4) via F_minus", regions::in_f(0.5, -1.0, -4.0)?.region_name == Some(RegionName::FMinus));
    ch.holds("F: (2, -1.9) not a member", !regions::in_f(0.5, 2.0, -1.9)?.member);
    ch.holds("F: (2, -2.1) via F_1", regions::in_f(0.5, 2.0, -2.1)?.region_name == Some(RegionName::F1));
    ch.holds("G_1: (2, -2) member", regions::in_g1(1.0, 2.0, -2.0)?.member);
    ch.holds("G_1: (2, -2.01) not a member", !regions::in_g1(1.0, 2.0, -2.01)?.member);
    ch.holds("G_1: p = 1 never a member", [-50.0, -1.0, 0.0, 3.0].iter().all(|&q| !regions::in_g1(1.0, 1.0, q).is_ok_and(|v| v.member)));
    ch.holds("W: (3, -3) member for mu = nu = 1", regions::in_w(1.0, 1.0, 3.0, -3.0)?.member);
    ch.holds("W: (3, -1) not a member for mu = nu = 1", !regions::in_w(1.0, 1.0, 3.0, -1.0)?.member);
    ch.holds("allowed q at p = 0: q < 0", regions::theorem_b_allowed_q(0.0, 3.0) == AllowedQ::Below { bound: 0.0, case: 'b' });
    ch.holds("allowed q at p = 4, sup 0.5: q < -1", regions::theorem_b_allowed_q(4.0, 0.5) == AllowedQ::Below { bound: -1.0, case: 'd' });
    ch.holds("allowed q at p = -5: unconstrained", regions::theorem_b_allowed_q(-5.0, 0.5) == AllowedQ::Unconstrained);
    ch.holds("corollary (0.5, -1, 3) passes case b", regions::corollary410_check(0.5, -1.0, 3.0) == CorollaryCheck::Pass { case: 'b' });
    ch.holds("corollary (2, -3, 0.5) fails case c", regions::corollary410_check(2.0, -3.0, 0.5) == CorollaryCheck::Fail { case: 'c' });
    ch.holds("corollary (2, 0, 2) passes case d", regions::corollary410_check(2.0, 0.0, 2.0) == CorollaryCheck::Pass { case: 'd' });
    let spec = RegionSpec::new(1.0, 1.0)?;
    ch.holds("grid cell (4, -1) is not below the cut-off", !regions::labels_at(spec, 4.0, -1.0).contains(&RegionName::RhoBelow));
    Ok(())
}

fn c10_functional_rescale(ctx: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let m = Manifold::sphere(3)?;
    let quad = ctx.mc(m, ctx.sizes.rescale_points, 1000)?;
    for p in [2.0f64, 5.0] {
        let k = 1.0 / (p - 1.0).sqrt();
        for q in [-1.0, 0.0, 2.0] {
            let r = functional_rescale_check(&m, MetricParams::new(p, q), ScalarFieldSpec::Constant { k }, &quad)?;
            ch.below(format!("f = 1/sqrt(p-1), (p,q) = ({p},{q}): sup residual"), r.sup_residual, 1e-10);
        }
    }
    let r = functional_rescale_check(&m, MetricParams::new(3.0, 0.0), ScalarFieldSpec::Constant { k: 1.0 }, &quad)?;
    ch.above("f = 1, (p,q) = (3,0): sup residual", r.sup_residual, 1e-4);
    let r = functional_rescale_check(&m, MetricParams::new(2.0, 0.0), ScalarFieldSpec::AxisLinear { a: unit_axis(4, 1.0) }, &quad)?;
    let floor = r.floor_where_lambda_exceeds(0.1).unwrap_or(f64::NAN);
    ch.above("f = lambda, (p,q) = (2,0): residual floor over |lambda| > 0.1", floor, 1e-6);
    Ok(())
}

fn c11_parallel_torus(_: &Ctx, ch: &mut Checks, _: &mut Vec<Timing>) -> Result<()> {
    let m = Manifold::torus(2)?;
    let quad = QuadratureSet::new(m, QuadratureScheme::TorusGrid, 1024, 0)?;
    let s = SectionSpec::ConstantTorus { c: vec![0.3, -0.7] };
    let rho = VariationSpec::new(SectionSpec::ConstantTorus { c: vec![0.5, 0.2] });
    for (p, q) in [(0.0f64, 0.0f64), (1.0, 1.0), (4.0, -1.0), (-3.0, 2.0)] {
        let mp = MetricParams::new(p, q);
        ch.push(format!("({p},{q}): |energy|"), energy_total(&s, &m, mp, &quad)?.abs(), "<=", 1e-12);
        ch.push(format!("({p},{q}): sup residual"), residual(&s, &m, mp, &quad, false)?.sup_residual, "<=", 1e-12);
        ch.push(format!("({p},{q}): |first variation|"), first_variation(&s, &rho, &m, mp, &quad)?.abs(), "<=", 1e-12);
    }
    Ok(())
}
