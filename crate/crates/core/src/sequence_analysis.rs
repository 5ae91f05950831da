//! Post-processing of slates: sandwich inequalities, case classification,
//! the Riesz-basis criterion ratios and decay diagnostics in weighted spaces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::Weight;
use crate::spectral_pairing::{SlateRow, SpectralSlate};

pub const NEU_SANDWICH: (f64, f64) = (1.0 / 80.0, 19.0);
pub const DIR_SANDWICH: (f64, f64) = (1.0 / 72.0, 58.0);
pub const XI_SANDWICH: (f64, f64) = (1.0 / 5.0, 9.0);

/// Relative threshold below which γ and friends are treated as eigensolver noise.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Absolute resolution floor τ_n = tol·r_n for a row.
pub fn resolution_floor(row: &SlateRow, tol: f64) -> f64 {
    tol * row.radius
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl Bracket {
    fn new(consts: (f64, f64), beta_sum: f64, middle: f64, slack: f64) -> Bracket {
        let lower = consts.0 * beta_sum;
        let upper = consts.1 * beta_sum;
        Bracket {
            lower,
            middle,
            upper,
            lower_ok: lower <= middle + slack,
            upper_ok: middle <= upper + slack,
        }
    }

    pub fn pass(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub n: i64,
    pub beta_sum: f64,
    pub slack: f64,
    pub neu: Bracket,
    pub dir: Bracket,
    /// None when no invariant pair (hence no ξ) is available for the row.
    pub xi: Option<Bracket>,
}

impl SandwichRow {
    pub fn all_pass(&self) -> bool {
        self.neu.pass() && self.dir.pass() && self.xi.is_some_and(|b| b.pass())
    }

    /// Exactly one of the Dirichlet and Neumann sandwiches fails.
    pub fn split(&self) -> bool {
        self.neu.pass() != self.dir.pass()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub rows: Vec<SandwichRow>,
    /// Smallest n₀ such that every row with n ≥ n₀ passes all three brackets.
    pub first_all_pass: Option<i64>,
    pub split_rows: Vec<i64>,
}

impl SandwichReport {
    pub fn rows_in(&self, lo: i64, hi: i64) -> impl Iterator<Item = &SandwichRow> {
        self.rows.iter().filter(move |r| r.n >= lo && r.n <= hi)
    }
}

pub fn sandwich_row(row: &SlateRow, tol: f64) -> SandwichRow {
    let slack = resolution_floor(row, tol);
    let beta_sum = row.beta_plus.norm() + row.beta_minus.norm();
    let g = row.gamma.norm();
    SandwichRow {
        n: row.n,
        beta_sum,
        slack,
        neu: Bracket::new(NEU_SANDWICH, beta_sum, g + row.delta_neu.norm(), slack),
        dir: Bracket::new(DIR_SANDWICH, beta_sum, g + row.delta_dir.norm(), slack),
        xi: row.xi_abs().map(|xi| Bracket::new(XI_SANDWICH, beta_sum, xi + g, slack)),
    }
}

pub fn sandwich_report(slate: &SpectralSlate, tol: f64) -> SandwichReport {
    let mut rows: Vec<SandwichRow> = slate.rows.iter().map(|r| sandwich_row(r, tol)).collect();
    rows.sort_by_key(|r| r.n);
    let mut first_all_pass = None;
    for r in rows.iter().rev() {
        if !r.all_pass() {
            break;
        }
        first_all_pass = Some(r.n);
    }
    let split_rows = rows.iter().filter(|r| r.split()).map(|r| r.n).collect();
    SandwichReport { rows, first_all_pass, split_rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    Case1,
    Case2a,
    Case2b,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Case1 => "1",
            Case::Case2a => "2a",
            Case::Case2b => "2b",
        }
    }

    pub fn is_case2(self) -> bool {
        self != Case::Case1
    }
}

/// Classification by β± at z⁺; the inequalities are applied literally, so a
/// 0/0 row is Case 1.
pub fn classify_case(row: &SlateRow) -> Case {
    let bp = row.beta_plus_zp.norm();
    let bm = row.beta_minus_zp.norm();
    if 4.0 * bp < bm {
        Case::Case2a
    } else if 4.0 * bm < bp {
        Case::Case2b
    } else {
        Case::Case1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseRow {
    pub n: i64,
    pub case: Case,
    /// Case 1 only: |β⁺(z*)| + |β⁻(z*)| ≤ 2|γ| up to the resolution floor.
    pub case1_bound: Option<bool>,
    /// Case 2 only: |w(0)|/|u(0)|.
    pub boundary_ratio: Option<f64>,
    pub boundary_ok: Option<bool>,
}

pub fn case_row(row: &SlateRow, tol: f64) -> CaseRow {
    let case = classify_case(row);
    let slack = resolution_floor(row, tol);
    let case1_bound = (case == Case::Case1)
        .then(|| row.beta_plus.norm() + row.beta_minus.norm() <= 2.0 * row.gamma.norm() + slack);
    let boundary_ratio = if case.is_case2() {
        row.pair.as_ref().map(|p| p.boundary_ratio)
    } else {
        None
    };
    let boundary_ok = if case.is_case2() {
        Some(boundary_ratio.is_some_and(|r| (0.25..=4.0).contains(&r)))
    } else {
        None
    };
    CaseRow { n: row.n, case, case1_bound, boundary_ratio, boundary_ok }
}

pub fn case_table(slate: &SpectralSlate, tol: f64) -> Vec<CaseRow> {
    slate.rows.iter().map(|r| case_row(r, tol)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trend {
    Bounded,
    UnboundedTrend,
    Vacuous,
}

impl Trend {
    pub fn name(self) -> &'static str {
        match self {
            Trend::Bounded => "bounded",
            Trend::UnboundedTrend => "unbounded trend",
            Trend::Vacuous => "vacuous",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioSummary {
    pub running_sup: Vec<(i64, f64)>,
    pub sup_half: f64,
    pub sup: f64,
    pub trend: Trend,
    /// Log-log slope of the ratio against n, reported when the running sup keeps growing.
    pub exponent: Option<f64>,
}

fn summarize(points: &[(i64, f64)]) -> RatioSummary {
    if points.is_empty() {
        return RatioSummary { running_sup: vec![], sup_half: 0.0, sup: 0.0, trend: Trend::Vacuous, exponent: None };
    }
    let mut running_sup = Vec::with_capacity(points.len());
    let mut m = 0.0f64;
    for &(n, r) in points {
        m = m.max(r);
        running_sup.push((n, m));
    }
    let n_max = points.last().unwrap().0;
    let half: Vec<f64> = points.iter().filter(|p| 2 * p.0 <= n_max).map(|p| p.1).collect();
    let half = if half.is_empty() {
        points[..points.len().div_ceil(2)].iter().map(|p| p.1).collect()
    } else {
        half
    };
    let sup_half = half.iter().copied().fold(0.0, f64::max);
    let sup = m;
    let bounded = sup.is_finite() && (sup <= sup_half * 1.05 || sup == 0.0);
    if bounded {
        return RatioSummary { running_sup, sup_half, sup, trend: Trend::Bounded, exponent: None };
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0 && p.1.is_finite())
        .map(|p| ((p.0 as f64).ln(), p.1.ln()))
        .collect();
    let exponent = linear_fit(&logs).map(|(_, slope, _)| slope);
    RatioSummary { running_sup, sup_half, sup, trend: Trend::UnboundedTrend, exponent }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RatioPoint {
    pub n: i64,
    pub neu: f64,
    pub dir: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub tol: f64,
    pub points: Vec<RatioPoint>,
    pub neu: RatioSummary,
    pub dir: RatioSummary,
    /// inf |β⁻(z*)|/|β⁺(z*)|; over γ ≠ 0 rows when there are any, else over rows with resolved β.
    pub beta_inf: Option<f64>,
    pub beta_inf_over_gamma: bool,
    /// Rows with γ = 0 but δ^Neu ≠ 0 (above the floor).
    pub neu_without_gap: Vec<i64>,
    pub vacuous: bool,
    pub basis_failure: bool,
    pub notes: Vec<String>,
}

fn beta_ratio(row: &SlateRow) -> f64 {
    let bp = row.beta_plus.norm();
    let bm = row.beta_minus.norm();
    if bp == 0.0 {
        if bm == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        bm / bp
    }
}

pub fn riesz_criterion(slate: &SpectralSlate, tol: f64) -> CriterionReport {
    let mut rows: Vec<&SlateRow> = slate.rows.iter().collect();
    rows.sort_by_key(|r| r.n);
    let nonzero: Vec<&SlateRow> = rows.iter().copied().filter(|r| r.gamma.norm() > resolution_floor(r, tol)).collect();
    let points: Vec<RatioPoint> = nonzero
        .iter()
        .map(|r| {
            let g = r.gamma.norm();
            let floor = resolution_floor(r, tol);
            let resolved = |d: f64| if d <= floor { 0.0 } else { d };
            RatioPoint {
                n: r.n,
                neu: resolved(r.delta_neu.norm()) / g,
                dir: resolved(r.delta_dir.norm()) / g,
                beta: beta_ratio(r),
            }
        })
        .collect();
    let neu = summarize(&points.iter().map(|p| (p.n, p.neu)).collect::<Vec<_>>());
    let dir = summarize(&points.iter().map(|p| (p.n, p.dir)).collect::<Vec<_>>());
    let mut notes = Vec::new();
    let beta_over_gamma = !points.is_empty();
    let beta_inf = if beta_over_gamma {
        Some(points.iter().map(|p| p.beta).fold(f64::INFINITY, f64::min))
    } else {
        let resolved: Vec<f64> = rows
            .iter()
            .filter(|r| r.beta_plus.norm().max(r.beta_minus.norm()) > resolution_floor(r, tol))
            .map(|r| beta_ratio(r))
            .collect();
        (!resolved.is_empty()).then(|| resolved.iter().copied().fold(f64::INFINITY, f64::min))
    };
    let neu_without_gap: Vec<i64> = rows
        .iter()
        .filter(|r| r.gamma.norm() <= resolution_floor(r, tol) && r.delta_neu.norm() > resolution_floor(r, tol))
        .map(|r| r.n)
        .collect();
    let vacuous = points.is_empty();
    let beta_fails = beta_inf.is_some_and(|v| v <= tol);
    let basis_failure = beta_fails || neu.trend == Trend::UnboundedTrend;
    if vacuous {
        notes.push("criterion vacuous: no gap above the resolution floor".into());
    }
    if beta_fails {
        notes.push(format!(
            "basis property fails via the beta ratio: inf |beta-|/|beta+| = {:.3e}",
            beta_inf.unwrap()
        ));
    }
    if !neu_without_gap.is_empty() {
        notes.push(format!("delta_neu nonzero with zero gap at {} indices", neu_without_gap.len()));
    }
    if neu.trend == Trend::UnboundedTrend {
        notes.push(format!("|delta_neu|/|gamma| keeps growing (slope {:?})", neu.exponent));
    }
    CriterionReport {
        tol,
        points,
        neu,
        dir,
        beta_inf,
        beta_inf_over_gamma: beta_over_gamma,
        neu_without_gap,
        vacuous,
        basis_failure,
        notes,
    }
}

/// Least squares y = b + s·x; returns (b, s, residual sum of squares).
fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let m = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let mx = sx / m;
    let my = sy / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let s = sxy / sxx;
    let b = my - s * mx;
    let rss = pts.iter().map(|p| (p.1 - b - s * p.0).powi(2)).sum();
    Some((b, s, rss))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayClass {
    Zero,
    Exponential,
    Power,
    NoDecay,
}

impl DecayClass {
    pub fn name(self) -> &'static str {
        match self {
            DecayClass::Zero => "superexponential/zero",
            DecayClass::Exponential => "exponential",
            DecayClass::Power => "power",
            DecayClass::NoDecay => "no decay",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub model: &'static str,
    /// a for n^{−a}, c for e^{−c n} and e^{−c n^g}.
    pub rate: f64,
    pub g: Option<f64>,
    pub rss: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub weight: Weight,
    pub partial_sums: Vec<(i64, f64)>,
    pub converges: bool,
    /// Weighted mass of the last quarter of indices over that of the third quarter.
    pub tail_ratio: f64,
    pub class: DecayClass,
    pub fits: Vec<Fit>,
    pub points_used: usize,
}

const MIN_POINTS: usize = 8;
const MIN_FIT_POINTS: usize = 3;

pub fn decay_classify(seq: &[(i64, f64)], w: Weight) -> Result<DecayReport> {
    decay_classify_with_floor(seq, w, |_| 0.0)
}

/// Like [`decay_classify`], but points at or below `floor(n)` are left out of
/// the model fit (they still enter the partial sums).
pub fn decay_classify_with_floor(seq: &[(i64, f64)], w: Weight, floor: impl Fn(i64) -> f64) -> Result<DecayReport> {
    w.validate()?;
    let mut seq: Vec<(i64, f64)> = seq.iter().copied().filter(|p| p.0 != 0).collect();
    seq.sort_by_key(|p| p.0);
    if seq.len() < MIN_POINTS {
        return Err(Error::InsufficientData { needed: MIN_POINTS, got: seq.len() });
    }
    let mut acc = 0.0;
    let mut partial_sums = Vec::with_capacity(seq.len());
    let mut terms = Vec::with_capacity(seq.len());
    for &(n, s) in &seq {
        let t = (s * w.big_omega(n)).powi(2);
        acc += t;
        terms.push(t);
        partial_sums.push((n, acc));
    }
    let q = seq.len() / 4;
    let third: f64 = terms[seq.len() - 2 * q..seq.len() - q].iter().sum();
    let last: f64 = terms[seq.len() - q..].iter().sum();
    let tail_ratio = if third > 0.0 { last / third } else if last > 0.0 { f64::INFINITY } else { 0.0 };
    let converges = acc == 0.0 || last <= 0.5 * third || last <= 1e-12 * acc;

    let pts: Vec<(f64, f64)> = seq
        .iter()
        .filter(|p| p.1 > floor(p.0) && p.1 > 0.0)
        .map(|p| (p.0 as f64, p.1.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        let class = if pts.is_empty() {
            DecayClass::Zero
        } else {
            return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, got: pts.len() });
        };
        return Ok(DecayReport { weight: w, partial_sums, converges, tail_ratio, class, fits: vec![], points_used: 0 });
    }
    let mut fits = Vec::new();
    let logn: Vec<(f64, f64)> = pts.iter().map(|p| (p.0.ln(), p.1)).collect();
    let power = linear_fit(&logn).map(|(_, s, rss)| Fit { model: "power", rate: -s, g: None, rss });
    if let Some((_, s, rss)) = linear_fit(&pts) {
        fits.push(Fit { model: "exponential", rate: -s, g: None, rss });
    }
    let mut best_stretched: Option<Fit> = None;
    for i in 3..10 {
        let g = i as f64 / 10.0;
        let xs: Vec<(f64, f64)> = pts.iter().map(|p| (p.0.powf(g), p.1)).collect();
        if let Some((_, s, rss)) = linear_fit(&xs) {
            if best_stretched.as_ref().is_none_or(|b| rss < b.rss) {
                best_stretched = Some(Fit { model: "stretched", rate: -s, g: Some(g), rss });
            }
        }
    }
    fits.extend(best_stretched);
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    fits.push(Fit { model: "constant", rate: 0.0, g: None, rss: pts.iter().map(|p| (p.1 - mean).powi(2)).sum() });
    let power_rate = power.as_ref().map_or(0.0, |f| f.rate);
    fits.extend(power);
    let winner = fits
        .iter()
        .filter(|f| f.model != "constant")
        .min_by(|a, b| a.rss.total_cmp(&b.rss))
        .map(|f| f.model);
    let class = if power_rate.abs() < 0.25 {
        DecayClass::NoDecay
    } else {
        match winner {
            Some("power") => DecayClass::Power,
            _ => DecayClass::Exponential,
        }
    };
    Ok(DecayReport { weight: w, partial_sums, converges, tail_ratio, class, fits, points_used: pts.len() })
}
