//! Truncated Fourier matrices of L_bc = L⁰ + V and the square-root
//! resolvent factors K_λ.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::io::Write;
use std::sync::OnceLock;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Hessenberg, C64, ONE, ZERO};
use crate::potential::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Bc {
    #[serde(rename = "per+")]
    PerPlus,
    #[serde(rename = "per-")]
    PerMinus,
    #[serde(rename = "dir")]
    Dir,
    #[serde(rename = "neu")]
    Neu,
}

impl Bc {
    pub const ALL: [Bc; 4] = [Bc::PerPlus, Bc::PerMinus, Bc::Dir, Bc::Neu];

    pub fn name(self) -> &'static str {
        match self {
            Bc::PerPlus => "per+",
            Bc::PerMinus => "per-",
            Bc::Dir => "dir",
            Bc::Neu => "neu",
        }
    }

    pub fn parse(s: &str) -> Result<Bc> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per+" | "perplus" | "periodic" => Ok(Bc::PerPlus),
            "per-" | "perminus" | "antiperiodic" => Ok(Bc::PerMinus),
            "dir" | "dirichlet" => Ok(Bc::Dir),
            "neu" | "neumann" => Ok(Bc::Neu),
            other => Err(Error::Config(format!("unknown boundary condition '{other}'"))),
        }
    }

    /// Periodic for even n, antiperiodic for odd n.
    pub fn periodic_for(n: i64) -> Bc {
        if n.rem_euclid(2) == 0 {
            Bc::PerPlus
        } else {
            Bc::PerMinus
        }
    }

    pub fn is_periodic(self) -> bool {
        matches!(self, Bc::PerPlus | Bc::PerMinus)
    }

    /// Number of eigenvalues the free operator has at n² for n > 0.
    pub fn multiplicity(self) -> usize {
        if self.is_periodic() {
            2
        } else {
            1
        }
    }

    /// Whether n² (n ≥ 0) is a free eigenvalue for this boundary condition.
    pub fn has_level(self, n: i64) -> bool {
        match self {
            Bc::PerPlus => n >= 0 && n % 2 == 0,
            Bc::PerMinus => n > 0 && n % 2 == 1,
            Bc::Dir => n >= 1,
            Bc::Neu => n >= 0,
        }
    }

    pub fn indices(self, k: usize) -> Vec<i64> {
        let k = k as i64;
        match self {
            Bc::PerPlus => (-k..=k).map(|j| 2 * j).collect(),
            Bc::PerMinus => (-k - 1..=k).map(|j| 2 * j + 1).collect(),
            Bc::Dir => (1..=2 * k).collect(),
            Bc::Neu => (0..=2 * k).collect(),
        }
    }
}

impl fmt::Display for Bc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone)]
pub struct TruncatedOperator {
    pub bc: Bc,
    pub k: usize,
    pub indices: Vec<i64>,
    pub matrix: Mat<C64>,
    eig: OnceLock<Result<Vec<C64>>>,
    hess: OnceLock<Hessenberg>,
}

impl fmt::Debug for TruncatedOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TruncatedOperator")
            .field("bc", &self.bc)
            .field("k", &self.k)
            .field("dim", &self.dim())
            .finish()
    }
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, k: i64) -> Option<usize> {
        let first = *self.indices.first()?;
        let step = if self.bc.is_periodic() { 2 } else { 1 };
        let off = k - first;
        if off < 0 || off % step != 0 {
            return None;
        }
        let p = (off / step) as usize;
        (p < self.indices.len()).then_some(p)
    }

    /// Full spectrum, computed once.
    pub fn spectrum(&self) -> Result<&[C64]> {
        match self.eig.get_or_init(|| linalg::eigenvalues(&self.matrix)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    pub fn hessenberg(&self) -> &Hessenberg {
        self.hess.get_or_init(|| Hessenberg::new(&self.matrix))
    }

    /// The potential part V = L − L⁰.
    pub fn potential_part(&self) -> Mat<C64> {
        let mut v = self.matrix.clone();
        for (i, k) in self.indices.iter().enumerate() {
            v[(i, i)] -= C64::new((k * k) as f64, 0.0);
        }
        v
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.dim();
        let mut y = vec![ZERO; n];
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj == ZERO {
                continue;
            }
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += self.matrix[(i, j)] * xj;
            }
        }
        y
    }
}

pub fn build_matrix(p: &PotentialSpec, bc: Bc, k: usize) -> Result<TruncatedOperator> {
    if k < 4 {
        return Err(Error::TruncationTooSmall(k));
    }
    if k < 2 * p.band_limit() {
        log::warn!(
            "truncation K = {k} is below 2F = {}; the window cuts through the potential's band",
            2 * p.band_limit()
        );
    }
    let indices = bc.indices(k);
    let n = indices.len();
    let mut m = Mat::<C64>::zeros(n, n);
    match bc {
        Bc::PerPlus | Bc::PerMinus => {
            for (i, &a) in indices.iter().enumerate() {
                for (j, &b) in indices.iter().enumerate() {
                    m[(i, j)] = p.v_plus(a - b);
                }
            }
        }
        Bc::Dir | Bc::Neu => {
            let vt = p.v_tilde_table(4 * k + 1);
            let sign = if bc == Bc::Dir { -1.0 } else { 1.0 };
            let s = |j: i64| if j == 0 { 1.0 } else { SQRT_2 };
            for (i, &a) in indices.iter().enumerate() {
                for (j, &b) in indices.iter().enumerate() {
                    let w = s(a) * s(b) / (2.0 * SQRT_2);
                    let d = vt[(a - b).unsigned_abs() as usize];
                    let e = vt[(a + b) as usize];
                    m[(i, j)] = (d + e * sign) * w;
                }
            }
        }
    }
    for (i, &a) in indices.iter().enumerate() {
        m[(i, i)] += C64::new((a * a) as f64, 0.0);
    }
    Ok(TruncatedOperator {
        bc,
        k,
        indices,
        matrix: m,
        eig: OnceLock::new(),
        hess: OnceLock::new(),
    })
}

/// z^{1/2} = |z|^{1/2} e^{iθ/2} with θ = arg z taken in [0, 2π).
pub fn sqrt_branch(z: C64) -> C64 {
    let mut theta = z.im.atan2(z.re);
    if theta < 0.0 {
        theta += 2.0 * PI;
    }
    C64::from_polar(z.norm().sqrt(), theta / 2.0)
}

/// Diagonal of K_λ: 1/(λ − m²)^{1/2} over the retained indices.
pub fn k_lambda(bc: Bc, k: usize, lambda: C64) -> Result<Vec<C64>> {
    bc.indices(k)
        .into_iter()
        .map(|m| {
            let z = lambda - C64::new((m * m) as f64, 0.0);
            if z.norm() <= 1e-13 * (1.0 + lambda.norm()) {
                Err(Error::OnSpectrumOfFree(format!("{lambda}")))
            } else {
                Ok(ONE / sqrt_branch(z))
            }
        })
        .collect()
}

pub fn kvk(p: &PotentialSpec, bc: Bc, k: usize, lambda: C64) -> Result<Mat<C64>> {
    let kl = k_lambda(bc, k, lambda)?;
    let v = build_matrix(p, bc, k)?.potential_part();
    Ok(Mat::from_fn(v.nrows(), v.ncols(), |i, j| kl[i] * v[(i, j)] * kl[j]))
}

/// Spectral and Hilbert–Schmidt norms of K_λ V K_λ.
pub fn kvk_norm(p: &PotentialSpec, bc: Bc, k: usize, lambda: C64) -> Result<(f64, f64)> {
    let a = kvk(p, bc, k, lambda)?;
    Ok((linalg::spectral_norm(a.as_ref()), linalg::frobenius_norm(a.as_ref())))
}

/// Right-hand side of the Hilbert–Schmidt estimate
/// Σ_{k,m ∈ ℤ, |k|,|m| ≤ 2K} (k−m)²|Q̂^Dir_{|k−m|}|² / (|λ−k²||λ−m²|).
pub fn hs_bound(p: &PotentialSpec, k: usize, lambda: C64) -> f64 {
    let w = 2 * k as i64;
    let (dir, _) = p.sine_cosine_coeffs(4 * k + 1);
    let mut s = 0.0;
    for a in -w..=w {
        let da = (lambda - C64::new((a * a) as f64, 0.0)).norm();
        for b in -w..=w {
            let d = (a - b).unsigned_abs() as usize;
            if d == 0 {
                continue;
            }
            let db = (lambda - C64::new((b * b) as f64, 0.0)).norm();
            s += (d * d) as f64 * dir[d].norm_sqr() / (da * db);
        }
    }
    s
}

/// (λ I − L)⁻¹ by dense solve.
pub fn resolvent(op: &TruncatedOperator, lambda: C64) -> Result<Mat<C64>> {
    let n = op.dim();
    let a = Mat::from_fn(n, n, |i, j| if i == j { lambda } else { ZERO } - op.matrix[(i, j)]);
    let (inv, cond) = linalg::inverse_with_condition(&a);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::NearSingular(cond));
    }
    Ok(inv)
}

/// R⁰_λ + Σ_{s=1}^{terms} K_λ (K_λ V K_λ)^s K_λ.
pub fn resolvent_series(p: &PotentialSpec, bc: Bc, k: usize, lambda: C64, terms: usize) -> Result<Mat<C64>> {
    let kl = k_lambda(bc, k, lambda)?;
    let a = kvk(p, bc, k, lambda)?;
    let n = kl.len();
    let mut power = Mat::<C64>::identity(n, n);
    let mut sum = Mat::<C64>::identity(n, n);
    for _ in 0..terms {
        power = &power * &a;
        sum += &power;
    }
    Ok(Mat::from_fn(n, n, |i, j| kl[i] * sum[(i, j)] * kl[j]))
}

/// One CSV row per matrix row, entries as `re,im` pairs.
pub fn dump_matrix_csv<W: Write>(op: &TruncatedOperator, mut w: W) -> std::io::Result<()> {
    let n = op.dim();
    let header: Vec<String> = op
        .indices
        .iter()
        .flat_map(|k| [format!("re_{k}"), format!("im_{k}")])
        .collect();
    writeln!(w, "row,{}", header.join(","))?;
    for i in 0..n {
        let cells: Vec<String> = (0..n)
            .flat_map(|j| {
                let z = op.matrix[(i, j)];
                [format!("{:?}", z.re), format!("{:?}", z.im)]
            })
            .collect();
        writeln!(w, "{},{}", op.indices[i], cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_gauss;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn index_windows() {
        assert_eq!(Bc::PerPlus.indices(4), vec![-8, -6, -4, -2, 0, 2, 4, 6, 8]);
        assert_eq!(Bc::PerMinus.indices(4), vec![-9, -7, -5, -3, -1, 1, 3, 5, 7, 9]);
        assert_eq!(Bc::Dir.indices(4), (1..=8).collect::<Vec<_>>());
        assert_eq!(Bc::Neu.indices(4), (0..=8).collect::<Vec<_>>());
    }

    #[test]
    fn zero_potential_is_diagonal() {
        let z = PotentialSpec::zero();
        for bc in Bc::ALL {
            let op = build_matrix(&z, bc, 6).unwrap();
            assert_eq!(op.matrix.nrows(), op.indices.len());
            for i in 0..op.dim() {
                for j in 0..op.dim() {
                    let want = if i == j { (op.indices[i] * op.indices[i]) as f64 } else { 0.0 };
                    assert_eq!(op.matrix[(i, j)], c(want, 0.0));
                }
            }
            assert_eq!(op.position(op.indices[3]), Some(3));
        }
    }

    #[test]
    fn small_truncation_rejected() {
        assert_eq!(
            build_matrix(&PotentialSpec::zero(), Bc::Dir, 3).unwrap_err(),
            Error::TruncationTooSmall(3)
        );
    }

    #[test]
    fn mathieu_periodic_entries() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let op = build_matrix(&p, Bc::PerPlus, 8).unwrap();
        let (i0, i2) = (op.position(0).unwrap(), op.position(2).unwrap());
        assert_eq!(op.matrix[(i0, i2)], p.v_plus(-2));
        assert_eq!(op.matrix[(i0, i2)], c(1.0, 0.0));
        assert_eq!(op.matrix[(i2, i0)], c(1.0, 0.0));
        for i in 0..op.dim() {
            let k = op.indices[i];
            assert_eq!(op.matrix[(i, i)], c((k * k) as f64, 0.0));
        }
    }

    #[test]
    fn mathieu_neumann_column_zero_uses_dirichlet_coefficient() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let op = build_matrix(&p, Bc::Neu, 8).unwrap();
        let q2: C64 = composite_gauss(|x| p.eval(x) * (SQRT_2 * (2.0 * x).sin()), 0.0, PI, 64, 16) / PI;
        let vt2 = q2 * 2.0;
        assert!((op.matrix[(2, 0)] - vt2).norm() < 1e-13);
        assert!((op.matrix[(0, 2)] - vt2).norm() < 1e-13);
    }

    #[test]
    fn adjoint_symmetry_all_bcs() {
        let ps = [
            PotentialSpec::gasymov(1.0, 0.5, 8).unwrap(),
            PotentialSpec::delta_comb(0.8, 1.0, 8).unwrap().scaled(c(0.3, 1.1)),
        ];
        for p in &ps {
            let pc = p.conjugate();
            for bc in Bc::ALL {
                let a = build_matrix(p, bc, 8).unwrap();
                let b = build_matrix(&pc, bc, 8).unwrap();
                for i in 0..a.dim() {
                    for j in 0..a.dim() {
                        assert!((a.matrix[(i, j)] - b.matrix[(j, i)].conj()).norm() <= 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn real_even_potentials_give_real_symmetric_dir_neu() {
        for p in [
            PotentialSpec::mathieu(1.0).unwrap(),
            PotentialSpec::delta_comb(1.0, FRAC_PI_2, 8).unwrap(),
        ] {
            assert!(p.is_real());
            for bc in [Bc::Dir, Bc::Neu] {
                let a = build_matrix(&p, bc, 8).unwrap();
                for i in 0..a.dim() {
                    for j in 0..a.dim() {
                        assert!(a.matrix[(i, j)].im.abs() <= 1e-13);
                        assert!((a.matrix[(i, j)] - a.matrix[(j, i)]).norm() <= 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn branch_values() {
        let kd = k_lambda(Bc::Dir, 4, c(-1.0, 0.0)).unwrap();
        assert!((kd[0] - c(0.0, -1.0 / SQRT_2)).norm() < 1e-15);
        let n = 5i64;
        let kp = k_lambda(Bc::PerMinus, 4, c((n * n) as f64, 0.3)).unwrap();
        let idx = Bc::PerMinus.indices(4).iter().position(|&m| m == n).unwrap();
        assert!((kp[idx].norm() - 0.3f64.powf(-0.5)).abs() < 1e-12);
        let k10 = k_lambda(Bc::PerPlus, 4, c(10.0, 0.0)).unwrap();
        for (m, v) in Bc::PerPlus.indices(4).iter().zip(&k10) {
            assert_eq!(*v, ONE / sqrt_branch(c(10.0 - (m * m) as f64, 0.0)));
        }
        assert!(matches!(k_lambda(Bc::Dir, 4, c(9.0, 0.0)), Err(Error::OnSpectrumOfFree(_))));
    }

    #[test]
    fn kvk_norms() {
        let z = PotentialSpec::zero();
        assert_eq!(kvk_norm(&z, Bc::Dir, 8, c(2.5, 0.5)).unwrap(), (0.0, 0.0));
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let (n2, hs) = kvk_norm(&p, Bc::PerPlus, 32, c(64.0, 8.0)).unwrap();
        assert!(n2 < 0.5, "{n2}");
        assert!(n2 <= hs + 1e-12);
    }

    #[test]
    fn hs_estimate_holds_for_dir_and_neu() {
        let p = PotentialSpec::delta_comb(1.0, FRAC_PI_2, 8).unwrap();
        for lam in [c(30.0, 3.0), c(100.0, 5.0), c(-7.0, 0.0)] {
            for bc in [Bc::Dir, Bc::Neu] {
                let (_, hs) = kvk_norm(&p, bc, 16, lam).unwrap();
                assert!(hs * hs <= hs_bound(&p, 16, lam) * (1.0 + 1e-12), "{bc} {lam}");
            }
        }
    }

    #[test]
    fn free_resolvent_is_diagonal() {
        let op = build_matrix(&PotentialSpec::zero(), Bc::Neu, 6).unwrap();
        let r = resolvent(&op, c(0.5, 0.0)).unwrap();
        for (i, m) in op.indices.iter().enumerate() {
            assert!((r[(i, i)] - c(1.0 / (0.5 - (m * m) as f64), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn resolvent_against_series_and_residual() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let lam = c(64.0, 8.0);
        let op = build_matrix(&p, Bc::PerPlus, 32).unwrap();
        let direct = resolvent(&op, lam).unwrap();
        let series = resolvent_series(&p, Bc::PerPlus, 32, lam, 20).unwrap();
        let kl = k_lambda(Bc::PerPlus, 32, lam).unwrap();
        let kmax = kl.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (q, _) = kvk_norm(&p, Bc::PerPlus, 32, lam).unwrap();
        let tail = 2.0 * kmax * kmax * q.powi(21) + 1e-14;
        let diff = linalg::frobenius_norm((&direct - &series).as_ref());
        assert!(diff <= tail, "{diff} > {tail}");

        let d = PotentialSpec::delta_comb(1.0, FRAC_PI_2, 64).unwrap();
        let op = build_matrix(&d, Bc::PerPlus, 128).unwrap();
        let n = op.dim();
        for t in 0..8 {
            let lam = c(100.0, 0.0) + C64::from_polar(5.0, t as f64 * PI / 4.0 + 0.1);
            let r = resolvent(&op, lam).unwrap();
            let a = Mat::from_fn(n, n, |i, j| if i == j { lam } else { ZERO } - op.matrix[(i, j)]);
            let res = &a * &r - Mat::<C64>::identity(n, n);
            assert!(linalg::spectral_norm(res.as_ref()) <= 1e-10);
        }
    }

    #[test]
    fn near_singular_resolvent_is_reported() {
        let op = build_matrix(&PotentialSpec::zero(), Bc::Dir, 4).unwrap();
        assert!(matches!(resolvent(&op, c(4.0, 1e-14)), Err(Error::NearSingular(_))));
    }

    #[test]
    fn matrix_dump_has_one_line_per_row() {
        let op = build_matrix(&PotentialSpec::mathieu(1.0).unwrap(), Bc::Dir, 4).unwrap();
        let mut buf = Vec::new();
        dump_matrix_csv(&op, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), op.dim() + 1);
    }
}
