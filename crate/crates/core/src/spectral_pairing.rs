//! Eigenvalues of the four truncated operators, their localization into R_N
//! and the discs D_n, and the per-n slate of gaps and deviations.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operator_matrix::{build_matrix, Bc, TruncatedOperator};
use crate::potential::PotentialSpec;
use crate::riesz_projection::{
    deviation_identity_residual, invariant_pair_from, neumann_eigvec, neumann_matched_vector, projection,
    RadiusPolicy,
};
use crate::schmidt_reduction::reduce_2x2;

pub fn eigenvalues(op: &TruncatedOperator) -> Result<Vec<C64>> {
    Ok(op.spectrum()?.to_vec())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    #[serde(rename = "R_N")]
    Central,
    #[serde(rename = "disc")]
    Disc(i64),
    #[serde(rename = "unassigned")]
    Unassigned,
}

#[derive(Clone, Debug, Serialize)]
pub struct Localization {
    pub bc: Bc,
    pub n_floor: i64,
    pub policy: RadiusPolicy,
    /// Largest n whose disc lies inside the truncation window.
    pub top: i64,
    pub regions: Vec<(C64, Region)>,
    pub counts: BTreeMap<i64, usize>,
    pub central: usize,
    pub unassigned: Vec<C64>,
}

impl Localization {
    pub fn count(&self, n: i64) -> usize {
        self.counts.get(&n).copied().unwrap_or(0)
    }

    pub fn in_disc(&self, n: i64) -> Vec<C64> {
        self.regions
            .iter()
            .filter(|(_, r)| *r == Region::Disc(n))
            .map(|(z, _)| *z)
            .collect()
    }

    /// (n, found, expected) for every disc in `range` whose count is off.
    pub fn mismatches(&self, range: RangeInclusive<i64>) -> Vec<(i64, usize, usize)> {
        let expected = self.bc.multiplicity();
        range
            .filter(|&n| n > self.n_floor && n <= self.top && self.bc.has_level(n))
            .map(|n| (n, self.count(n), expected))
            .filter(|&(_, f, e)| f != e)
            .collect()
    }
}

pub fn in_central_region(z: C64, n_floor: i64) -> bool {
    let nf = n_floor as f64;
    z.re >= -nf && z.re <= nf * nf + nf && z.im.abs() < nf
}

/// Assign each eigenvalue to R_N, a unique disc D_n (n > N), or neither.
pub fn localize(eigs: &[C64], bc: Bc, k: usize, n_floor: i64, policy: RadiusPolicy) -> Result<Localization> {
    if n_floor < 1 {
        return Err(Error::BadParam(format!("N must be at least 1, got {n_floor}")));
    }
    let top = bc.indices(k).iter().map(|j| j.abs()).max().unwrap_or(0);
    for n in (n_floor + 1)..=top {
        let r = policy.radius(n);
        if r >= n as f64 - 0.5 {
            return Err(Error::OverlappingDiscs { n, radius: r });
        }
    }
    let mut regions = Vec::with_capacity(eigs.len());
    let mut counts = BTreeMap::new();
    let mut central = 0;
    let mut unassigned = Vec::new();
    for &z in eigs {
        let region = if in_central_region(z, n_floor) {
            Region::Central
        } else {
            let guess = z.re.max(0.0).sqrt().round() as i64;
            (guess - 1..=guess + 1)
                .find(|&n| n > n_floor && bc.has_level(n) && (z - (n * n) as f64).norm() < policy.radius(n))
                .map_or(Region::Unassigned, Region::Disc)
        };
        match region {
            Region::Central => central += 1,
            Region::Disc(n) => *counts.entry(n).or_insert(0) += 1,
            Region::Unassigned => unassigned.push(z),
        }
        regions.push((z, region));
    }
    Ok(Localization { bc, n_floor, policy, top, regions, counts, central, unassigned })
}

/// Order a pair by larger real part, then larger imaginary part.
pub fn label_pair(a: C64, b: C64) -> (C64, C64) {
    if a.re > b.re || (a.re == b.re && a.im >= b.im) {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
    Both,
}

impl Parity {
    pub fn admits(self, n: i64) -> bool {
        match self {
            Parity::Even => n % 2 == 0,
            Parity::Odd => n % 2 != 0,
            Parity::Both => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlateOptions {
    pub policy: RadiusPolicy,
    /// N; defaults to n_min − 1.
    pub n_floor: Option<i64>,
    pub parity: Parity,
    /// Compute the invariant pair, ξ and the Neumann identity per row.
    pub pairs: bool,
}

impl Default for SlateOptions {
    fn default() -> Self {
        SlateOptions { policy: RadiusPolicy::FixedQuarter, n_floor: None, parity: Parity::Both, pairs: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSummary {
    pub xi: C64,
    pub pair_gamma: C64,
    pub w0: C64,
    pub u0: C64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub boundary_ratio: f64,
    pub degenerate: bool,
    pub f_residual: f64,
    pub phi_residual: f64,
    pub a: C64,
    pub b: C64,
    pub quasi_at_0: f64,
    pub quasi_at_pi: f64,
    pub g_dot: f64,
    pub identity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlateRow {
    pub n: i64,
    pub bc: Bc,
    pub radius: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub mu: C64,
    pub nu: C64,
    pub gamma: C64,
    pub delta_dir: C64,
    pub delta_neu: C64,
    pub z_star: C64,
    pub alpha11: C64,
    pub alpha22: C64,
    pub beta_plus: C64,
    pub beta_minus: C64,
    /// β± at z⁺ = λ⁺ − n².
    pub beta_plus_zp: C64,
    pub beta_minus_zp: C64,
    /// Largest |det(S(z) − (n²+z)I)| at z = λ± − n².
    pub char_residual: f64,
    pub pair: Option<PairSummary>,
    pub pair_error: Option<String>,
}

impl SlateRow {
    pub fn xi_abs(&self) -> Option<f64> {
        self.pair.as_ref().map(|p| p.xi.norm())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkippedRow {
    pub n: i64,
    pub kind: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSlate {
    pub family: String,
    pub k: usize,
    pub band_limit: usize,
    pub policy: RadiusPolicy,
    pub n_floor: i64,
    pub rows: Vec<SlateRow>,
    pub skipped: Vec<SkippedRow>,
    /// Smallest n from which every disc up to n_max holds the expected count
    /// when localized with N = 1.
    pub observed_onset: Option<i64>,
    pub unassigned: BTreeMap<String, usize>,
}

impl SpectralSlate {
    pub fn row(&self, n: i64) -> Option<&SlateRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

struct Frames {
    per_plus: TruncatedOperator,
    per_minus: TruncatedOperator,
    dir: TruncatedOperator,
    neu: TruncatedOperator,
}

impl Frames {
    fn per(&self, n: i64) -> &TruncatedOperator {
        if n % 2 == 0 {
            &self.per_plus
        } else {
            &self.per_minus
        }
    }
}

enum RowOutcome {
    Row(Box<SlateRow>),
    Skip(SkippedRow),
}

fn skip(n: i64, e: Error) -> RowOutcome {
    RowOutcome::Skip(SkippedRow { n, kind: e.kind().into(), reason: e.to_string() })
}

pub fn build_slate(p: &PotentialSpec, k: usize, range: RangeInclusive<i64>, opts: &SlateOptions) -> Result<SpectralSlate> {
    let (n_min, n_max) = (*range.start(), *range.end());
    if n_min < 1 || n_max < n_min {
        return Err(Error::BadParam(format!("invalid n range {n_min}..{n_max}")));
    }
    let n_floor = opts.n_floor.unwrap_or(n_min - 1).max(1);
    let f = p.band_limit() as i64;
    if n_max > k as i64 - f {
        log::warn!("n_max = {n_max} exceeds K − F = {}; rows near the window edge feel the truncation", k as i64 - f);
    }
    let build = |bc| build_matrix(p, bc, k);
    let frames = Frames { per_plus: build(Bc::PerPlus)?, per_minus: build(Bc::PerMinus)?, dir: build(Bc::Dir)?, neu: build(Bc::Neu)? };
    let need_odd = range.clone().any(|n| n % 2 != 0 && opts.parity.admits(n));
    let need_even = range.clone().any(|n| n % 2 == 0 && opts.parity.admits(n));
    let mut ops: Vec<&TruncatedOperator> = vec![&frames.dir, &frames.neu];
    if need_even {
        ops.push(&frames.per_plus);
    }
    if need_odd {
        ops.push(&frames.per_minus);
    }
    ops.par_iter().map(|op| op.spectrum().map(|_| ())).collect::<Result<Vec<_>>>()?;
    if opts.pairs {
        ops.par_iter().for_each(|op| {
            op.hessenberg();
        });
    }

    let mut locs = BTreeMap::new();
    let mut onset_locs = Vec::new();
    for op in &ops {
        let eigs = op.spectrum()?;
        locs.insert(op.bc, localize(eigs, op.bc, k, n_floor, opts.policy)?);
        onset_locs.push(localize(eigs, op.bc, k, 1, RadiusPolicy::FixedQuarter)?);
    }
    let observed_onset = {
        let ok = |n: i64| {
            onset_locs
                .iter()
                .all(|l| !l.bc.has_level(n) || (l.bc.is_periodic() && !opts.parity.admits(n)) || l.count(n) == l.bc.multiplicity())
        };
        let mut start = None;
        for n in (2..=n_max).rev() {
            if ok(n) {
                start = Some(n);
            } else {
                break;
            }
        }
        start
    };

    let ns: Vec<i64> = range.filter(|&n| opts.parity.admits(n)).collect();
    let outcomes: Vec<RowOutcome> = ns
        .par_iter()
        .map(|&n| slate_row(p, &frames, &locs, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            RowOutcome::Row(r) => rows.push(*r),
            RowOutcome::Skip(s) => skipped.push(s),
        }
    }
    let unassigned = locs.iter().map(|(bc, l)| (bc.name().to_string(), l.unassigned.len())).collect();
    Ok(SpectralSlate {
        family: p.family().tag().to_string(),
        k,
        band_limit: p.band_limit(),
        policy: opts.policy,
        n_floor,
        rows,
        skipped,
        observed_onset,
        unassigned,
    })
}

fn slate_row(
    p: &PotentialSpec,
    frames: &Frames,
    locs: &BTreeMap<Bc, Localization>,
    n: i64,
    opts: &SlateOptions,
) -> Result<RowOutcome> {
    let per = frames.per(n);
    let radius = opts.policy.radius(n);
    let disc = |bc: Bc| -> std::result::Result<Vec<C64>, Error> {
        let loc = &locs[&bc];
        let found = loc.in_disc(n);
        if found.len() != bc.multiplicity() {
            return Err(Error::CountMismatch { n, bc: bc.name().into(), found: found.len(), expected: bc.multiplicity() });
        }
        Ok(found)
    };
    let (pp, dd, nn) = match (disc(per.bc), disc(Bc::Dir), disc(Bc::Neu)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
            log::info!("skipping n = {n}: {e}");
            return Ok(skip(n, e));
        }
    };
    let (lp, lm) = label_pair(pp[0], pp[1]);
    let (mu, nu) = (dd[0], nn[0]);
    let n2 = (n * n) as f64;
    let z_star = (lp + lm) / 2.0 - n2;
    let at_star = reduce_2x2(per, n, z_star)?;
    let at_plus = reduce_2x2(per, n, lp - n2)?;
    let at_minus = reduce_2x2(per, n, lm - n2)?;
    let char_residual = at_plus.char_det().norm().max(at_minus.char_det().norm());

    let mut pair = None;
    let mut pair_error = None;
    if opts.pairs {
        match pair_summary(p, frames, n, radius, lp - nu, lp - lm) {
            Ok(s) => pair = Some(s),
            Err(e @ (Error::NullMatch(_) | Error::DegeneratePair(_) | Error::CountMismatch { .. })) => {
                log::info!("n = {n}: no pair data ({e})");
                pair_error = Some(e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    Ok(RowOutcome::Row(Box::new(SlateRow {
        n,
        bc: per.bc,
        radius,
        lambda_plus: lp,
        lambda_minus: lm,
        mu,
        nu,
        gamma: lp - lm,
        delta_dir: lp - mu,
        delta_neu: lp - nu,
        z_star,
        alpha11: at_star.alpha11,
        alpha22: at_star.alpha22,
        beta_plus: at_star.beta_plus,
        beta_minus: at_star.beta_minus,
        beta_plus_zp: at_plus.beta_plus,
        beta_minus_zp: at_plus.beta_minus,
        char_residual,
        pair,
        pair_error,
    })))
}

fn pair_summary(p: &PotentialSpec, frames: &Frames, n: i64, radius: f64, delta_neu: C64, gamma: C64) -> Result<PairSummary> {
    let per = frames.per(n);
    let proj = projection(per, n, radius, 64)?;
    let pair = invariant_pair_from(per, p, n, &proj)?;
    let matched = neumann_matched_vector(&pair)?;
    let g = neumann_eigvec(&frames.neu, n, radius)?;
    let id = deviation_identity_residual(&pair, &matched, delta_neu, gamma, &g)?;
    Ok(PairSummary {
        xi: pair.xi,
        pair_gamma: pair.gamma,
        w0: pair.w0,
        u0: pair.u0,
        kappa0: pair.kappa0(),
        kappa1: pair.kappa1(),
        boundary_ratio: pair.boundary_ratio(),
        degenerate: pair.degenerate,
        f_residual: pair.f_residual,
        phi_residual: pair.phi_residual,
        a: matched.a,
        b: matched.b,
        quasi_at_0: matched.quasi_at_0.norm(),
        quasi_at_pi: matched.quasi_at_pi.norm(),
        g_dot: id.g_dot,
        identity_residual: id.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    #[test]
    fn free_spectra() {
        let z = PotentialSpec::zero();
        let ev = eigenvalues(&build_matrix(&z, Bc::PerPlus, 8).unwrap()).unwrap();
        assert_eq!(ev.len(), 17);
        assert_eq!(ev[0], ZERO);
        for (j, pair) in ev[1..].chunks(2).enumerate() {
            let want = ((2 * j + 2) * (2 * j + 2)) as f64;
            assert_eq!(pair, &[C64::new(want, 0.0); 2]);
        }
        let ev = eigenvalues(&build_matrix(&z, Bc::Neu, 8).unwrap()).unwrap();
        for (j, e) in ev.iter().enumerate() {
            assert_eq!(*e, C64::new((j * j) as f64, 0.0));
        }
    }

    #[test]
    fn localization_counts() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let op = build_matrix(&p, Bc::PerPlus, 64).unwrap();
        let loc = localize(op.spectrum().unwrap(), Bc::PerPlus, 64, 4, RadiusPolicy::FixedQuarter).unwrap();
        assert!(loc.mismatches(6..=40).is_empty());
        assert!(loc.unassigned.is_empty());
        let z = PotentialSpec::zero();
        for bc in Bc::ALL {
            let op = build_matrix(&z, bc, 16).unwrap();
            let loc = localize(op.spectrum().unwrap(), bc, 16, 1, RadiusPolicy::FixedQuarter).unwrap();
            assert!(loc.mismatches(2..=loc.top).is_empty(), "{bc}");
        }
        let err = localize(&[], Bc::Neu, 16, 1, RadiusPolicy::Shrinking).unwrap_err();
        assert!(matches!(err, Error::OverlappingDiscs { n: 2, .. }));
    }

    #[test]
    fn zero_slate_vanishes() {
        let slate = build_slate(&PotentialSpec::zero(), 16, 2..=8, &SlateOptions::default()).unwrap();
        assert_eq!(slate.rows.len(), 7);
        for r in &slate.rows {
            assert_eq!([r.gamma, r.delta_dir, r.delta_neu, r.z_star], [ZERO; 4]);
        }
    }

    #[test]
    fn gasymov_gaps_close_but_neumann_deviations_do_not() {
        let p = PotentialSpec::gasymov(1.0, 0.5, 32).unwrap();
        let opts = SlateOptions { pairs: false, ..SlateOptions::default() };
        let slate = build_slate(&p, 64, 6..=30, &opts).unwrap();
        assert!(slate.skipped.is_empty(), "{:?}", slate.skipped);
        assert!(slate.rows.iter().all(|r| r.gamma.norm() <= 1e-8));
        assert!(slate.rows.iter().filter(|r| r.delta_neu.norm() > 1e-8).count() >= 10);
    }

    #[test]
    fn labeling_covariance() {
        let (a, b) = (C64::new(1.0, 2.0), C64::new(1.0, -1.0));
        assert_eq!(label_pair(a, b), label_pair(b, a));
        let (lp, lm) = label_pair(a, b);
        assert_eq!(lp, a);
        assert_eq!(((lp - lm).norm(), (lp + lm) / 2.0), ((lm - lp).norm(), (lm + lp) / 2.0));
    }

    #[test]
    fn mathieu_rows_carry_pairs() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let opts = SlateOptions { parity: Parity::Even, ..SlateOptions::default() };
        let slate = build_slate(&p, 64, 6..=12, &opts).unwrap();
        assert_eq!(slate.rows.len(), 4);
        for r in &slate.rows {
            assert!(r.z_star.norm() < r.radius);
            assert!(r.char_residual <= 1e-8);
            let pair = r.pair.as_ref().unwrap();
            assert!(pair.g_dot >= 71.0 / 72.0);
            assert!(pair.identity_residual <= 1e-7 * (1.0 + r.delta_neu.norm()));
        }
    }
}
