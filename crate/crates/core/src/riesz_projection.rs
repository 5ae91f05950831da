//! Riesz projections by trapezoidal contour quadrature, the invariant pair
//! {f, φ} spanning Ran P_n, and the boundary-value constructions built on it.

use std::f64::consts::PI;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, I, ONE, ZERO};
use crate::operator_matrix::{build_matrix, Bc, TruncatedOperator};
use crate::potential::{exp_mean, PotentialSpec};

const MAX_NODES: usize = 1024;
const CHANGE_TOL: f64 = 1e-9;
const CONTOUR_GAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum RadiusPolicy {
    #[serde(rename = "fixed_quarter")]
    FixedQuarter,
    #[serde(rename = "shrinking")]
    Shrinking,
}

impl RadiusPolicy {
    pub fn radius(self, n: i64) -> f64 {
        let nf = n as f64;
        match self {
            RadiusPolicy::FixedQuarter => nf / 4.0,
            RadiusPolicy::Shrinking => nf / nf.ln(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed_quarter" | "quarter" | "fixed" => Ok(RadiusPolicy::FixedQuarter),
            "shrinking" | "log" => Ok(RadiusPolicy::Shrinking),
            other => Err(Error::Config(format!("unknown radius policy '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RadiusPolicy::FixedQuarter => "fixed_quarter",
            RadiusPolicy::Shrinking => "shrinking",
        }
    }
}

/// A Riesz projection stored in factored form P = Y Cᴴ with Y orthonormal.
#[derive(Clone, Debug)]
pub struct Projector {
    pub n: i64,
    pub bc: Bc,
    pub k: usize,
    pub center: f64,
    pub radius: f64,
    pub rank: usize,
    pub y: Mat<C64>,
    pub c: Mat<C64>,
    pub nodes: usize,
    /// Frobenius change between the last two node counts.
    pub change: f64,
}

impl Projector {
    pub fn to_dense(&self) -> Mat<C64> {
        &self.y * self.c.adjoint()
    }

    pub fn trace(&self) -> C64 {
        let g = self.c.adjoint() * &self.y;
        (0..self.rank).map(|i| g[(i, i)]).sum()
    }

    /// ‖P² − P‖_F.
    pub fn idempotency_defect(&self) -> f64 {
        let p = self.to_dense();
        let p2 = &p * &p;
        linalg::frobenius_norm((p2 - &p).as_ref())
    }

    pub fn converged(&self) -> bool {
        self.change <= CHANGE_TOL
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.y.nrows()).map(|i| self.y[(i, j)]).collect()
    }
}

fn check_enclosure(op: &TruncatedOperator, n: i64, center: f64, radius: f64) -> Result<usize> {
    let mut inside = 0;
    for z in op.spectrum()? {
        let d = (z - center).norm();
        if (d - radius).abs() <= CONTOUR_GAP {
            return Err(Error::EnclosureViolation { n, distance: (d - radius).abs() });
        }
        if d < radius {
            inside += 1;
        }
    }
    Ok(inside)
}

/// P_M X (or P_Mᴴ X when `adjoint`) for the M-node trapezoid rule.
fn apply_projection(op: &TruncatedOperator, center: f64, radius: f64, m: usize, x: &Mat<C64>, adjoint: bool) -> Mat<C64> {
    let hess = op.hessenberg();
    let q = hess.q();
    let xt: Mat<C64> = q.adjoint() * x;
    let (dim, cols) = (x.nrows(), x.ncols());
    let mut acc = Mat::<C64>::zeros(dim, cols);
    let mut buf = vec![ZERO; dim];
    for j in 0..m {
        let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
        let lam = C64::new(center, 0.0) + e * radius;
        let w = e * (radius / m as f64);
        let lu = hess.shifted(lam);
        for c in 0..cols {
            for (i, b) in buf.iter_mut().enumerate() {
                *b = xt[(i, c)];
            }
            if adjoint {
                lu.solve_adjoint_in_place(&mut buf);
                let wc = w.conj();
                for (i, b) in buf.iter().enumerate() {
                    acc[(i, c)] += wc * b;
                }
            } else {
                lu.solve_in_place(&mut buf);
                for (i, b) in buf.iter().enumerate() {
                    acc[(i, c)] += w * b;
                }
            }
        }
    }
    q * &acc
}

/// Orthonormal basis of the span of the first columns of `z`, taking columns
/// in order so that coordinate probes fix the basis whenever they can.
fn range_basis(z: &Mat<C64>, r: usize) -> Result<Mat<C64>> {
    let dim = z.nrows();
    for thresh in [1e-2, 1e-8] {
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(r);
        for c in 0..z.ncols() {
            if basis.len() == r {
                break;
            }
            let mut v: Vec<C64> = (0..dim).map(|i| z[(i, c)]).collect();
            let n0 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n0 == 0.0 {
                continue;
            }
            for _ in 0..2 {
                for u in &basis {
                    let d: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= d * ui;
                    }
                }
            }
            let nv = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if nv > thresh * n0 {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v);
            }
        }
        if basis.len() == r {
            return Ok(Mat::from_fn(dim, r, |i, j| basis[j][i]));
        }
    }
    linalg::leading_left_singular_vectors(z, r)
}

fn free_modes(op: &TruncatedOperator, n: i64) -> Vec<usize> {
    let mut out = Vec::new();
    if let Some(p) = op.position(n) {
        out.push(p);
    }
    if op.bc.is_periodic() && n != 0 {
        if let Some(p) = op.position(-n) {
            out.push(p);
        }
    }
    out
}

fn probe_block(op: &TruncatedOperator, n: i64, rank: usize) -> Mat<C64> {
    let dim = op.dim();
    let coords = free_modes(op, n);
    let extra = (rank + 2).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
    let mut x = Mat::<C64>::zeros(dim, coords.len() + extra);
    for (c, &p) in coords.iter().enumerate() {
        x[(p, c)] = ONE;
    }
    for c in coords.len()..x.ncols() {
        for i in 0..dim {
            x[(i, c)] = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        }
    }
    x
}

fn projector_at(op: &TruncatedOperator, n: i64, center: f64, radius: f64, rank: usize, m: usize, probes: &Mat<C64>) -> Result<Projector> {
    let dim = op.dim();
    let (y, c) = if rank == 0 {
        (Mat::zeros(dim, 0), Mat::zeros(dim, 0))
    } else {
        let z = apply_projection(op, center, radius, m, probes, false);
        let y = range_basis(&z, rank)?;
        let c = apply_projection(op, center, radius, m, &y, true);
        (y, c)
    };
    Ok(Projector { n, bc: op.bc, k: op.k, center, radius, rank, y, c, nodes: m, change: f64::INFINITY })
}

/// Riesz projection onto the eigenvalues inside |λ − n²| < r, starting from
/// `m` nodes and doubling until the projection stops changing.
pub fn projection(op: &TruncatedOperator, n: i64, r: f64, m: usize) -> Result<Projector> {
    if m < 16 {
        return Err(Error::BadParam(format!("quadrature needs at least 16 nodes, got {m}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParam(format!("contour radius must be positive, got {r}")));
    }
    let center = (n * n) as f64;
    let rank = check_enclosure(op, n, center, r)?;
    let probes = probe_block(op, n, rank);
    let mut prev = projector_at(op, n, center, r, rank, m, &probes)?;
    let mut nodes = m;
    loop {
        nodes *= 2;
        let mut next = projector_at(op, n, center, r, rank, nodes, &probes)?;
        let change = linalg::frobenius_norm((next.to_dense() - prev.to_dense()).as_ref());
        next.change = change;
        if change <= CHANGE_TOL {
            return Ok(next);
        }
        if nodes >= MAX_NODES {
            return Err(Error::NotConverged(change));
        }
        prev = next;
    }
}

/// Coordinate projection onto the free eigenspace of n².
pub fn free_projection(op: &TruncatedOperator, n: i64) -> Mat<C64> {
    let dim = op.dim();
    let mut p = Mat::<C64>::zeros(dim, dim);
    for i in free_modes(op, n) {
        p[(i, i)] = ONE;
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub n: i64,
    pub bc: Bc,
    pub norm_p_diff: f64,
    pub norm_dp_diff: f64,
    pub nodes: usize,
    pub converged: bool,
    pub change: f64,
    pub trace: C64,
    pub idempotency: f64,
}

pub fn projection_report(op: &TruncatedOperator, n: i64, radius: f64) -> Result<ProjectionReport> {
    let proj = projection(op, n, radius, 64)?;
    let diff = proj.to_dense() - free_projection(op, n);
    let scaled = Mat::from_fn(diff.nrows(), diff.ncols(), |i, j| diff[(i, j)] * op.indices[i].abs() as f64);
    Ok(ProjectionReport {
        n,
        bc: op.bc,
        norm_p_diff: linalg::spectral_norm(diff.as_ref()),
        norm_dp_diff: linalg::spectral_norm(scaled.as_ref()),
        nodes: proj.nodes,
        converged: proj.converged(),
        change: proj.change,
        trace: proj.trace(),
        idempotency: proj.idempotency_defect(),
    })
}

/// ‖P_n − P⁰_n‖ and ‖D(P_n − P⁰_n)‖. D maps each frame to its derivative
/// frame, so in coefficients it is multiplication by |k| up to unimodular
/// factors.
pub fn projection_norms(p: &PotentialSpec, bc: Bc, k: usize, n: i64, policy: RadiusPolicy) -> Result<ProjectionReport> {
    let op = build_matrix(p, bc, k)?;
    projection_report(&op, n, policy.radius(n))
}

pub fn value_at(a: &[C64], idx: &[i64], x: f64) -> C64 {
    a.iter().zip(idx).map(|(c, &k)| c * C64::from_polar(1.0, k as f64 * x)).sum()
}

pub fn derivative_at(a: &[C64], idx: &[i64], x: f64) -> C64 {
    a.iter().zip(idx).map(|(c, &k)| c * I * k as f64 * C64::from_polar(1.0, k as f64 * x)).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantPair {
    pub n: i64,
    pub bc: Bc,
    pub k: usize,
    #[serde(skip)]
    pub indices: Vec<i64>,
    #[serde(skip)]
    pub f: Vec<C64>,
    #[serde(skip)]
    pub phi: Vec<C64>,
    pub xi: C64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub gamma: C64,
    /// Fejér value of Q at 0 used in the quasi-derivatives.
    pub q0: C64,
    pub q_pi: C64,
    pub f_at_0: C64,
    pub phi_at_0: C64,
    pub w0: C64,
    pub u0: C64,
    pub f0_at_0: C64,
    pub phi0_at_0: C64,
    pub df0_at_0: C64,
    pub dphi0_at_0: C64,
    pub degenerate: bool,
    pub f_residual: f64,
    pub phi_residual: f64,
}

impl InvariantPair {
    /// sup over unit G ∈ E_n of |G(0) − G⁰(0)|.
    pub fn kappa0(&self) -> f64 {
        ((self.f_at_0 - self.f0_at_0).norm_sqr() + (self.phi_at_0 - self.phi0_at_0).norm_sqr()).sqrt()
    }

    /// sup over unit G ∈ E_n of |G^{[1]}(0) − G⁰′(0)| / n.
    pub fn kappa1(&self) -> f64 {
        ((self.w0 - self.df0_at_0).norm_sqr() + (self.u0 - self.dphi0_at_0).norm_sqr()).sqrt() / self.n as f64
    }

    pub fn boundary_ratio(&self) -> f64 {
        self.w0.norm() / self.u0.norm()
    }
}

fn residual(op: &TruncatedOperator, x: &[C64], terms: &[(C64, &[C64])]) -> f64 {
    let mut r = op.apply(x);
    for (c, v) in terms {
        for (ri, vi) in r.iter_mut().zip(v.iter()) {
            *ri -= c * vi;
        }
    }
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn null_vector(b: [[C64; 2]; 2], scale: f64) -> [C64; 2] {
    let r0 = b[0][0].norm_sqr() + b[0][1].norm_sqr();
    let r1 = b[1][0].norm_sqr() + b[1][1].norm_sqr();
    let (row, rn) = if r0 >= r1 { (b[0], r0) } else { (b[1], r1) };
    if rn.sqrt() <= 1e-14 * scale {
        return [ONE, ZERO];
    }
    let v = [-row[1], row[0]];
    let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / nv, v[1] / nv]
}

pub fn invariant_pair(op: &TruncatedOperator, p: &PotentialSpec, n: i64) -> Result<InvariantPair> {
    let proj = projection(op, n, RadiusPolicy::FixedQuarter.radius(n), 64)?;
    invariant_pair_from(op, p, n, &proj)
}

/// The pair {f, φ} from a rank-2 projector: f an eigenvector for λ⁺ and φ
/// its orthogonal complement in Ran P.
pub fn invariant_pair_from(op: &TruncatedOperator, p: &PotentialSpec, n: i64, proj: &Projector) -> Result<InvariantPair> {
    if !op.bc.is_periodic() {
        return Err(Error::BadParam(format!("invariant pairs live on periodic frames, got {}", op.bc)));
    }
    if proj.rank != 2 {
        return Err(Error::CountMismatch { n, bc: op.bc.name().into(), found: proj.rank, expected: 2 });
    }
    let dim = op.dim();
    let y0 = proj.column(0);
    let y1 = proj.column(1);
    let ly = [op.apply(&y0), op.apply(&y1)];
    let ys = [&y0, &y1];
    let n2 = C64::new((n * n) as f64, 0.0);
    let mut b = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            b[i][j] = ys[i].iter().zip(&ly[j]).map(|(a, c)| a.conj() * c).sum();
        }
        b[i][i] -= n2;
    }
    let tr = b[0][0] + b[1][1];
    let disc = (((b[0][0] - b[1][1]) / 2.0).powi(2) + b[0][1] * b[1][0]).sqrt();
    let (e1, e2) = (tr / 2.0 + disc, tr / 2.0 - disc);
    let first = e1.re > e2.re || (e1.re == e2.re && e1.im >= e2.im);
    let (zp, zm) = if first { (e1, e2) } else { (e2, e1) };
    let scale = 1.0 + b.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let bs = [[b[0][0] - zp, b[0][1]], [b[1][0], b[1][1] - zp]];
    let mut x = null_vector(bs, scale);
    let mut f: Vec<C64> = (0..dim).map(|i| x[0] * y0[i] + x[1] * y1[i]).collect();
    let lead = f.iter().copied().fold(ZERO, |m, z| if z.norm() > m.norm() + 1e-12 { z } else { m });
    if lead != ZERO {
        let ph = lead.conj() / lead.norm();
        f.iter_mut().for_each(|z| *z *= ph);
        x = [x[0] * ph, x[1] * ph];
    }
    let xp = [-x[1].conj(), x[0].conj()];
    let phi: Vec<C64> = (0..dim).map(|i| xp[0] * y0[i] + xp[1] * y1[i]).collect();
    let bxp = [b[0][0] * xp[0] + b[0][1] * xp[1], b[1][0] * xp[0] + b[1][1] * xp[1]];
    let xi = x[0].conj() * bxp[0] + x[1].conj() * bxp[1];
    let gamma = zp - zm;
    let (lp, lm) = (zp + n2, zm + n2);
    let idx = &op.indices;
    let q0 = p.fejer_value(0.0);
    let q_pi = p.fejer_value(PI);
    let f_at_0 = value_at(&f, idx, 0.0);
    let phi_at_0 = value_at(&phi, idx, 0.0);
    let w0 = derivative_at(&f, idx, 0.0) - q0 * f_at_0;
    let u0 = derivative_at(&phi, idx, 0.0) - q0 * phi_at_0;
    let modes = free_modes(op, n);
    let pick = |v: &[C64]| -> (C64, C64) {
        modes.iter().fold((ZERO, ZERO), |(s, d), &i| (s + v[i], d + v[i] * I * idx[i] as f64))
    };
    let (f0_at_0, df0_at_0) = pick(&f);
    let (phi0_at_0, dphi0_at_0) = pick(&phi);
    let f_residual = residual(op, &f, &[(lp, &f)]);
    let phi_residual = residual(op, &phi, &[(lm, &phi), (xi, &f)]);
    let degenerate = gamma.norm() <= 1e-10 * (n as f64).max(1.0) / 4.0;
    if degenerate {
        log::debug!("n = {n}: numerically degenerate pair, |γ| = {:e}", gamma.norm());
    }
    Ok(InvariantPair {
        n,
        bc: op.bc,
        k: op.k,
        indices: idx.clone(),
        f,
        phi,
        xi,
        lambda_plus: lp,
        lambda_minus: lm,
        gamma,
        q0,
        q_pi,
        f_at_0,
        phi_at_0,
        w0,
        u0,
        f0_at_0,
        phi0_at_0,
        df0_at_0,
        dphi0_at_0,
        degenerate,
        f_residual,
        phi_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NeumannMatch {
    #[serde(skip)]
    pub g: Vec<C64>,
    pub a: C64,
    pub b: C64,
    /// (G′ − QG)(0).
    pub quasi_at_0: C64,
    /// (G′ − QG)(π).
    pub quasi_at_pi: C64,
}

/// G = a f + b φ with vanishing quasi-derivative at 0, built from
/// G̃ = u(0) f − w(0) φ.
pub fn neumann_matched_vector(pair: &InvariantPair) -> Result<NeumannMatch> {
    let (a, b) = if pair.w0.norm() <= 1e-12 {
        (ONE, ZERO)
    } else {
        let nrm = (pair.u0.norm_sqr() + pair.w0.norm_sqr()).sqrt();
        if nrm <= 1e-12 {
            return Err(Error::NullMatch(pair.n));
        }
        (pair.u0 / nrm, -pair.w0 / nrm)
    };
    let g: Vec<C64> = pair.f.iter().zip(&pair.phi).map(|(f, p)| a * f + b * p).collect();
    let idx = &pair.indices;
    let quasi = |x: f64, q: C64| derivative_at(&g, idx, x) - q * value_at(&g, idx, x);
    Ok(NeumannMatch {
        quasi_at_0: quasi(0.0, pair.q0),
        quasi_at_pi: quasi(PI, pair.q_pi),
        g,
        a,
        b,
    })
}

/// Unit Neumann eigenvector for the eigenvalue in the disc around n².
#[derive(Clone, Debug)]
pub struct NeumannVector {
    pub n: i64,
    pub k: usize,
    pub g: Vec<C64>,
    pub nu: C64,
}

pub fn neumann_eigvec(op: &TruncatedOperator, n: i64, radius: f64) -> Result<NeumannVector> {
    if op.bc != Bc::Neu {
        return Err(Error::FrameMismatch(format!("expected a Neumann operator, got {}", op.bc)));
    }
    let proj = projection(op, n, radius, 64)?;
    if proj.rank != 1 {
        return Err(Error::CountMismatch { n, bc: "neu".into(), found: proj.rank, expected: 1 });
    }
    let g = proj.column(0);
    let lg = op.apply(&g);
    let nu = g.iter().zip(&lg).map(|(a, b)| a.conj() * b).sum();
    Ok(NeumannVector { n, k: op.k, g, nu })
}

/// (1/π)∫₀^π X(x) g(x) dx for X in an exponential frame and g in the cosine
/// frame {1, √2 cos mx}.
pub fn cosine_pairing(x: &[C64], x_idx: &[i64], g: &[C64]) -> C64 {
    let mut acc = ZERO;
    for (m, gm) in g.iter().enumerate() {
        if *gm == ZERO {
            continue;
        }
        let m = m as i64;
        let s = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
        let col: C64 = x
            .iter()
            .zip(x_idx)
            .map(|(xk, &k)| xk * (exp_mean(k + m) + exp_mean(k - m)) * 0.5)
            .sum();
        acc += col * gm * s;
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub residual: f64,
    /// ⟨G, ḡ⟩ after phase fixing, real and nonnegative.
    pub g_dot: f64,
    pub phi_dot: C64,
    pub f_dot: C64,
}

/// |⟨G,ḡ⟩δ^Neu − b⟨φ,ḡ⟩γ + b⟨f,ḡ⟩ξ| with g phase-fixed so ⟨G,ḡ⟩ ≥ 0.
pub fn deviation_identity_residual(
    pair: &InvariantPair,
    matched: &NeumannMatch,
    delta_neu: C64,
    gamma: C64,
    g: &NeumannVector,
) -> Result<IdentityReport> {
    if pair.k != g.k || g.g.len() != 2 * g.k + 1 || matched.g.len() != pair.indices.len() {
        return Err(Error::FrameMismatch(format!(
            "periodic frame K = {} against Neumann frame K = {}",
            pair.k, g.k
        )));
    }
    let idx = &pair.indices;
    let raw = cosine_pairing(&matched.g, idx, &g.g);
    let phase = if raw.norm() > 0.0 { raw.conj() / raw.norm() } else { ONE };
    let g_dot = raw.norm();
    let phi_dot = cosine_pairing(&pair.phi, idx, &g.g) * phase;
    let f_dot = cosine_pairing(&pair.f, idx, &g.g) * phase;
    let b = matched.b;
    let residual = (delta_neu * g_dot - b * phi_dot * gamma + b * f_dot * pair.xi).norm();
    Ok(IdentityReport { residual, g_dot, phi_dot, f_dot })
}
