//! Regions of the `(p,q)`-plane, the cut-off `ϱ_ν`, and the hypothesis and
//! conclusion checks of the Bernstein-type results.
//!
//! Every comparison is an exact floating-point comparison with the operator the
//! definitions use (`<`, `≤`, `≥`); no tolerance is applied at boundaries.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::format_f64;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionName {
    #[serde(rename = "F_minus")]
    FMinus,
    #[serde(rename = "F_0")]
    F0,
    #[serde(rename = "F_1")]
    F1,
    #[serde(rename = "G_1")]
    G1,
    W,
    #[serde(rename = "rho_below")]
    RhoBelow,
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FMinus => "F_minus",
            Self::F0 => "F_0",
            Self::F1 => "F_1",
            Self::G1 => "G_1",
            Self::W => "W",
            Self::RhoBelow => "rho_below",
        })
    }
}

/// The positive parameters `μ` and `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionSpec<T> {
    pub mu: T,
    pub nu: T,
}

impl<T: Scalar> RegionSpec<T> {
    pub fn new(mu: T, nu: T) -> Result<Self> {
        positive("mu", mu)?;
        positive("nu", nu)?;
        Ok(Self { mu, nu })
    }

    /// Notes on the theorem-level hypotheses `μ ≥ 1/2` and `ν ≥ 1`.
    pub fn hypothesis_notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.mu < T::lit(0.5) {
            notes.push(format!("mu = {} < 1/2: the union F_1 ∪ G_1 need not cover p > 1", self.mu));
        }
        if self.nu < T::one() {
            notes.push(format!("nu = {} < 1: the Bernstein results for G_1 do not apply", self.nu));
        }
        notes
    }
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if !(v > T::zero()) {
        return Err(Error::Domain(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub member: bool,
    /// Subregion that contains the point, if any.
    pub region_name: Option<RegionName>,
    pub constraint_notes: String,
}

impl RegionVerdict {
    fn new(region: Option<RegionName>, notes: Vec<String>) -> Self {
        Self { member: region.is_some(), region_name: region, constraint_notes: notes.join("; ") }
    }
}

/// `ϱ_ν(p)`: `-1-p` on `[-4,-1]`, `0` on `[-1,2]`, `ν(2-p)/2` for `p ≥ 2`.
pub fn cutoff_rho<T: Scalar>(nu: T, p: T) -> Result<T> {
    positive("nu", nu)?;
    if !(p >= T::lit(-4.0)) {
        return Err(Error::Domain(format!("cut-off is defined for p ≥ -4, got {p}")));
    }
    Ok(if p <= -T::one() {
        -T::one() - p
    } else if p <= T::lit(2.0) {
        T::zero()
    } else {
        nu * (T::lit(2.0) - p) / T::lit(2.0)
    })
}

fn raw_f_minus<T: Scalar>(mu: T, p: T, q: T) -> bool {
    p < T::zero() && mu * q <= T::lit(2.0) * p
}

fn raw_f0<T: Scalar>(p: T) -> bool {
    T::zero() <= p && p <= T::one()
}

fn raw_f1<T: Scalar>(mu: T, p: T, q: T) -> bool {
    p > T::one() && mu * q < T::one() - p
}

fn raw_g1<T: Scalar>(nu: T, p: T, q: T) -> bool {
    p > T::one() && q >= T::lit(2.0) * nu * (T::one() - p)
}

fn raw_w<T: Scalar>(mu: T, nu: T, p: T, q: T) -> bool {
    p > T::one() && T::lit(2.0) * mu * nu * (T::one() - p) <= mu * q && mu * q < T::one() - p
}

/// Membership of `F(μ) = F_-(μ) ∪ F_0 ∪ F_1(μ)`.
pub fn in_f<T: Scalar>(mu: T, p: T, q: T) -> Result<RegionVerdict> {
    positive("mu", mu)?;
    let region = if raw_f_minus(mu, p, q) {
        Some(RegionName::FMinus)
    } else if raw_f0(p) {
        Some(RegionName::F0)
    } else if raw_f1(mu, p, q) {
        Some(RegionName::F1)
    } else {
        None
    };
    let mut notes = Vec::new();
    if p == T::zero() {
        notes.push("seam p = 0: F_0 contains the whole line, F_minus requires p < 0".to_string());
    }
    if p == T::one() {
        notes.push("seam p = 1: F_0 contains the whole line, F_1 requires p > 1".to_string());
    }
    if mu < T::lit(0.5) {
        notes.push(format!("mu = {mu} < 1/2"));
    }
    Ok(RegionVerdict::new(region, notes))
}

/// Membership of `G_1(ν) = {p > 1, q ≥ 2ν(1-p)}`.
pub fn in_g1<T: Scalar>(nu: T, p: T, q: T) -> Result<RegionVerdict> {
    positive("nu", nu)?;
    let mut notes = Vec::new();
    if nu < T::one() {
        notes.push(format!("nu = {nu} < 1"));
    }
    Ok(RegionVerdict::new(raw_g1(nu, p, q).then_some(RegionName::G1), notes))
}

/// Membership of `W(μ,ν) = {p > 1, 2μν(1-p) ≤ μq < 1-p}`.
pub fn in_w<T: Scalar>(mu: T, nu: T, p: T, q: T) -> Result<RegionVerdict> {
    let spec = RegionSpec::new(mu, nu)?;
    Ok(RegionVerdict::new(raw_w(mu, nu, p, q).then_some(RegionName::W), spec.hypothesis_notes()))
}

/// The constraint on `q` that the compact-case theorem places on a non-trivial harmonic section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AllowedQ<T> {
    /// `q < bound`, with the case letter that applies.
    Below { bound: T, case: char },
    /// The theorem is silent for this `p` and sup-norm.
    Unconstrained,
}

impl<T: Scalar> AllowedQ<T> {
    pub fn allows(&self, q: T) -> bool {
        match *self {
            Self::Below { bound, .. } => q < bound,
            Self::Unconstrained => true,
        }
    }
}

impl<T: Scalar> fmt::Display for AllowedQ<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Below { bound, case } => write!(f, "q < {bound} (case {case})"),
            Self::Unconstrained => f.write_str("unconstrained (theorem silent)"),
        }
    }
}

/// Allowed `q` for parameter `p` and sampled `‖σ‖∞`.
pub fn theorem_b_allowed_q<T: Scalar>(p: T, sup_norm_sigma: T) -> AllowedQ<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let bounded = |p: T| p > one && sup_norm_sigma <= one / (p - one).sqrt();
    if T::lit(-4.0) <= p && p <= -one {
        AllowedQ::Below { bound: -one - p, case: 'a' }
    } else if -one <= p && p <= one {
        AllowedQ::Below { bound: T::zero(), case: 'b' }
    } else if p > one && p <= two && bounded(p) {
        AllowedQ::Below { bound: T::zero(), case: 'c' }
    } else if p >= two && bounded(p) {
        AllowedQ::Below { bound: one - p / two, case: 'd' }
    } else {
        AllowedQ::Unconstrained
    }
}

/// Outcome of checking the non-compact corollary's conclusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum CorollaryCheck {
    Pass { case: char },
    Fail { case: char },
    /// `p < 0` and `q > 4p`: no case applies.
    NotCovered,
}

impl CorollaryCheck {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass { .. })
    }
}

/// Does the sampled `sup |σ|²` satisfy the lower bound the corollary requires at `(p, q)`?
pub fn corollary410_check<T: Scalar>(p: T, q: T, sampled_sup_sq: T) -> CorollaryCheck {
    let one = T::one();
    let two = T::lit(2.0);
    let verdict = |case: char, ok: bool| if ok { CorollaryCheck::Pass { case } } else { CorollaryCheck::Fail { case } };
    if p < T::zero() {
        if q <= T::lit(4.0) * p {
            verdict('a', sampled_sup_sq > -two / q)
        } else {
            CorollaryCheck::NotCovered
        }
    } else if p <= one {
        verdict('b', q < T::zero() && sampled_sup_sq > -two / q)
    } else if q < two * (one - p) {
        verdict('c', sampled_sup_sq > -two / q)
    } else {
        verdict('d', sampled_sup_sq > one / (p - one))
    }
}

/// One grid cell of the region map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow<T> {
    pub p: T,
    pub q: T,
    pub labels: Vec<RegionName>,
}

/// Every label that holds at `(p, q)`.
pub fn labels_at<T: Scalar>(spec: RegionSpec<T>, p: T, q: T) -> Vec<RegionName> {
    let RegionSpec { mu, nu } = spec;
    let mut labels = Vec::new();
    if raw_f_minus(mu, p, q) {
        labels.push(RegionName::FMinus);
    }
    if raw_f0(p) {
        labels.push(RegionName::F0);
    }
    if raw_f1(mu, p, q) {
        labels.push(RegionName::F1);
    }
    if raw_g1(nu, p, q) {
        labels.push(RegionName::G1);
    }
    if raw_w(mu, nu, p, q) {
        labels.push(RegionName::W);
    }
    if let Ok(rho) = cutoff_rho(nu, p) {
        if q < rho {
            labels.push(RegionName::RhoBelow);
        }
    }
    labels
}

/// `resolution` equispaced values from `lo` to `hi` inclusive.
pub fn linspace<T: Scalar>(lo: T, hi: T, resolution: usize) -> Vec<T> {
    let last = T::from_count(resolution - 1);
    (0..resolution)
        .map(|i| if i + 1 == resolution { hi } else { lo + (hi - lo) * T::from_count(i) / last })
        .collect()
}

/// Region labels on a `resolution × resolution` grid, `p`-major.
pub fn export_region_grid<T: Scalar>(spec: RegionSpec<T>, p_range: (T, T), q_range: (T, T), resolution: usize) -> Result<Vec<GridRow<T>>> {
    if resolution < 2 {
        return Err(Error::Domain(format!("grid resolution must be at least 2, got {resolution}")));
    }
    for (name, (lo, hi)) in [("p", p_range), ("q", q_range)] {
        if !(lo < hi) || !hi.is_finite() || !lo.is_finite() {
            return Err(Error::Domain(format!("empty {name} range {lo}:{hi}")));
        }
    }
    let qs = linspace(q_range.0, q_range.1, resolution);
    Ok(linspace(p_range.0, p_range.1, resolution)
        .into_iter()
        .flat_map(|p| qs.iter().map(move |&q| GridRow { p, q, labels: labels_at(spec, p, q) }))
        .collect())
}

/// CSV with header `p,q,labels`; labels are joined with `;`.
pub fn grid_csv<T: Scalar>(rows: &[GridRow<T>]) -> String {
    let mut out = String::from("p,q,labels\n");
    for r in rows {
        let labels: Vec<String> = r.labels.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{},{},{}", format_f64(r.p.as_f64()), format_f64(r.q.as_f64()), labels.join(";"));
    }
    out
}

fn fill(label: RegionName) -> &'static str {
    match label {
        RegionName::W => "#8e44ad",
        RegionName::F1 => "#2e86c1",
        RegionName::G1 => "#27ae60",
        RegionName::F0 => "#f4d03f",
        RegionName::FMinus => "#e67e22",
        RegionName::RhoBelow => "#d5d8dc",
    }
}

/// Colour class of a cell: the most specific region label, else `rho_below`.
fn cell_class(labels: &[RegionName]) -> Option<RegionName> {
    [RegionName::W, RegionName::F1, RegionName::G1, RegionName::F0, RegionName::FMinus, RegionName::RhoBelow]
        .into_iter()
        .find(|l| labels.contains(l))
}

/// Static SVG of the grid: filled regions, the cut-off curve and integer ticks.
pub fn grid_svg<T: Scalar>(rows: &[GridRow<T>], spec: RegionSpec<T>, p_range: (T, T), q_range: (T, T), resolution: usize) -> String {
    const SIZE: f64 = 600.0;
    const MARGIN: f64 = 40.0;
    let (p0, p1) = (p_range.0.as_f64(), p_range.1.as_f64());
    let (q0, q1) = (q_range.0.as_f64(), q_range.1.as_f64());
    let sx = |p: f64| MARGIN + (p - p0) / (p1 - p0) * SIZE;
    let sy = |q: f64| MARGIN + (q1 - q) / (q1 - q0) * SIZE;
    let cw = SIZE / resolution as f64;
    let mut svg = String::new();
    let total = SIZE + 2.0 * MARGIN;
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#);
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{total}" height="{total}" fill="white"/>"#);
    // one rectangle per run of equal cells in each p column
    for (i, column) in rows.chunks(resolution).enumerate() {
        let x = MARGIN + i as f64 * cw;
        let mut j = 0;
        while j < column.len() {
            let class = cell_class(&column[j].labels);
            let start = j;
            while j < column.len() && cell_class(&column[j].labels) == class {
                j += 1;
            }
            if let Some(c) = class {
                let y = MARGIN + SIZE - j as f64 * cw;
                let h = (j - start) as f64 * cw;
                let _ = writeln!(svg, r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{h:.3}" fill="{}"><title>{c}</title></rect>"#, fill(c));
            }
        }
    }
    let mut pts = Vec::new();
    for k in 0..=400 {
        let p = p0 + (p1 - p0) * k as f64 / 400.0;
        if let Ok(r) = cutoff_rho(spec.nu.as_f64(), p) {
            if r >= q0 && r <= q1 {
                pts.push(format!("{:.3},{:.3}", sx(p), sy(r)));
            }
        }
    }
    if !pts.is_empty() {
        let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#, pts.join(" "));
    }
    let _ = writeln!(svg, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#);
    for t in (p0.ceil() as i64)..=(p1.floor() as i64) {
        let x = sx(t as f64);
        let _ = writeln!(svg, r#"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="black"/>"#, MARGIN + SIZE, MARGIN + SIZE + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.3}" y="{:.3}" font-size="10" text-anchor="middle">{t}</text>"#, MARGIN + SIZE + 17.0);
    }
    for t in (q0.ceil() as i64)..=(q1.floor() as i64) {
        let y = sy(t as f64);
        let _ = writeln!(svg, r#"<line x1="{:.3}" y1="{y:.3}" x2="{MARGIN}" y2="{y:.3}" stroke="black"/>"#, MARGIN - 5.0);
        let _ = writeln!(svg, r#"<text x="{:.3}" y="{:.3}" font-size="10" text-anchor="end">{t}</text>"#, MARGIN - 8.0, y + 3.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.3}" y="{:.3}" font-size="12" text-anchor="middle">p</text>"#, MARGIN + SIZE / 2.0, total - 4.0);
    let _ = writeln!(svg, r#"<text x="12" y="{:.3}" font-size="12" text-anchor="middle">q</text>"#, MARGIN + SIZE / 2.0);
    svg.push_str("</svg>\n");
    svg
}
