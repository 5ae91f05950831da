//! Dense complex helpers on top of faer: eigenvalues with exact isolation of
//! decoupled rows/columns, norms, and shifted Hessenberg solves used by the
//! contour quadrature.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn sort_spectrum(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn swap_sym(m: &mut Mat<C64>, i: usize, j: usize) {
    if i == j {
        return;
    }
    let n = m.nrows();
    for c in 0..n {
        let t = m[(i, c)];
        m[(i, c)] = m[(j, c)];
        m[(j, c)] = t;
    }
    for r in 0..n {
        let t = m[(r, i)];
        m[(r, i)] = m[(r, j)];
        m[(r, j)] = t;
    }
}

/// Eigenvalues of a square matrix, sorted by (Re, Im).
///
/// Rows and columns that decouple exactly (zero off-diagonal entries inside
/// the active block) are peeled off by symmetric permutation before the
/// dense solve, so triangular and diagonal structure yields exact diagonal
/// eigenvalues instead of rounding-level splittings.
pub fn eigenvalues(a: &Mat<C64>) -> Result<Vec<C64>> {
    let n = a.nrows();
    let mut m = a.clone();
    let (mut lo, mut hi) = (0usize, n);
    loop {
        if let Some(i) = (lo..hi).rev().find(|&i| (lo..hi).all(|j| j == i || m[(i, j)] == ZERO)) {
            swap_sym(&mut m, i, hi - 1);
            hi -= 1;
        } else if let Some(j) = (lo..hi).find(|&j| (lo..hi).all(|i| i == j || m[(i, j)] == ZERO)) {
            swap_sym(&mut m, j, lo);
            lo += 1;
        } else {
            break;
        }
    }
    let mut out: Vec<C64> = (0..lo).chain(hi..n).map(|i| m[(i, i)]).collect();
    if hi > lo {
        let core = m.as_ref().submatrix(lo, lo, hi - lo, hi - lo).to_owned();
        let ev = core
            .eigenvalues()
            .map_err(|e| Error::EigensolveFailure(format!("{e:?}")))?;
        out.extend(ev);
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigensolveFailure("non-finite eigenvalue".into()));
    }
    sort_spectrum(&mut out);
    Ok(out)
}

pub fn spectral_norm(a: MatRef<'_, C64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    match a.singular_values() {
        Ok(s) => s.first().copied().unwrap_or(0.0),
        Err(_) => f64::NAN,
    }
}

pub fn frobenius_norm(a: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// Solve `a x = b` by partial-pivoting LU.
pub fn solve(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    a.partial_piv_lu().solve(b)
}

/// Inverse together with the 1-norm condition estimate ‖a‖₁‖a⁻¹‖₁.
pub fn inverse_with_condition(a: &Mat<C64>) -> (Mat<C64>, f64) {
    let n = a.nrows();
    let inv = solve(a, &Mat::<C64>::identity(n, n));
    (inv.clone(), norm_1(a.as_ref()) * norm_1(inv.as_ref()))
}

pub fn norm_1(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Leading `r` left singular vectors of `z` as an orthonormal column block.
pub fn leading_left_singular_vectors(z: &Mat<C64>, r: usize) -> Result<Mat<C64>> {
    let svd = z
        .thin_svd()
        .map_err(|e| Error::EigensolveFailure(format!("svd: {e:?}")))?;
    Ok(svd.U().subcols(0, r).to_owned())
}

/// Unitary Hessenberg reduction `a = Q H Qᴴ`, reused across many shifts.
#[derive(Clone, Debug)]
pub struct Hessenberg {
    n: usize,
    h: Vec<C64>,
    q: Mat<C64>,
}

impl Hessenberg {
    pub fn new(a: &Mat<C64>) -> Self {
        let n = a.nrows();
        let mut h = vec![ZERO; n * n];
        for j in 0..n {
            for i in 0..n {
                h[i + j * n] = a[(i, j)];
            }
        }
        let mut q = vec![ZERO; n * n];
        for i in 0..n {
            q[i + i * n] = ONE;
        }
        let mut v = vec![ZERO; n];
        for k in 0..n.saturating_sub(2) {
            let len = n - k - 1;
            let x = &h[(k + 1) + k * n..(k + 1) + k * n + len];
            let nx = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nx == 0.0 {
                continue;
            }
            let x0 = x[0];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
            v[..len].copy_from_slice(x);
            v[0] += phase * nx;
            let nv = v[..len].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in v[..len].iter_mut() {
                *z /= nv;
            }
            let vv = &v[..len];
            for j in k..n {
                let col = &mut h[(k + 1) + j * n..(k + 1) + j * n + len];
                let w: C64 = vv.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                let w2 = w * 2.0;
                for (c, a) in col.iter_mut().zip(vv) {
                    *c -= a * w2;
                }
            }
            for mat in [&mut h, &mut q] {
                let mut s = vec![ZERO; n];
                for (jj, a) in vv.iter().enumerate() {
                    let col = &mat[(k + 1 + jj) * n..(k + 2 + jj) * n];
                    for (si, c) in s.iter_mut().zip(col) {
                        *si += c * a;
                    }
                }
                for (jj, a) in vv.iter().enumerate() {
                    let f = a.conj() * 2.0;
                    let col = &mut mat[(k + 1 + jj) * n..(k + 2 + jj) * n];
                    for (c, si) in col.iter_mut().zip(&s) {
                        *c -= si * f;
                    }
                }
            }
            for i in (k + 2)..n {
                h[i + k * n] = ZERO;
            }
        }
        let qm = Mat::from_fn(n, n, |i, j| q[i + j * n]);
        Hessenberg { n, h, q: qm }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> MatRef<'_, C64> {
        self.q.as_ref()
    }

    pub fn h_entry(&self, i: usize, j: usize) -> C64 {
        self.h[i + j * self.n]
    }

    /// LU factors of `z I − H`.
    pub fn shifted(&self, z: C64) -> ShiftedLu {
        let n = self.n;
        let mut u: Vec<C64> = self.h.iter().map(|x| -x).collect();
        for i in 0..n {
            u[i + i * n] += z;
        }
        let mut swaps = vec![false; n.saturating_sub(1)];
        let mut mult = vec![ZERO; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            let d = u[k + k * n];
            let s = u[(k + 1) + k * n];
            if s.norm() > d.norm() {
                swaps[k] = true;
                for j in k..n {
                    u.swap(k + j * n, (k + 1) + j * n);
                }
            }
            let mut piv = u[k + k * n];
            if piv == ZERO {
                piv = C64::new(f64::MIN_POSITIVE, 0.0);
                u[k + k * n] = piv;
            }
            let m = u[(k + 1) + k * n] / piv;
            mult[k] = m;
            u[(k + 1) + k * n] = ZERO;
            for j in (k + 1)..n {
                let t = u[k + j * n];
                u[(k + 1) + j * n] -= m * t;
            }
        }
        ShiftedLu { n, u, swaps, mult }
    }
}

pub struct ShiftedLu {
    n: usize,
    u: Vec<C64>,
    swaps: Vec<bool>,
    mult: Vec<C64>,
}

impl ShiftedLu {
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        for k in 0..n.saturating_sub(1) {
            if self.swaps[k] {
                b.swap(k, k + 1);
            }
            let t = b[k];
            b[k + 1] -= self.mult[k] * t;
        }
        for j in (0..n).rev() {
            let xj = b[j] / self.u[j + j * n];
            b[j] = xj;
            let col = &self.u[j * n..j * n + j];
            for (bi, uij) in b[..j].iter_mut().zip(col) {
                *bi -= uij * xj;
            }
        }
    }

    /// Solve `(z I − H)ᴴ x = b`.
    pub fn solve_adjoint_in_place(&self, b: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let col = &self.u[i * n..i * n + i];
            let s: C64 = col.iter().zip(&b[..i]).map(|(u, y)| u.conj() * y).sum();
            b[i] = (b[i] - s) / self.u[i + i * n].conj();
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let t = b[k + 1];
            b[k] -= self.mult[k].conj() * t;
            if self.swaps[k] {
                b.swap(k, k + 1);
            }
        }
    }

    pub fn min_abs_pivot(&self) -> f64 {
        (0..self.n)
            .map(|i| self.u[i + i * self.n].norm())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> Mat<C64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        Mat::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn hessenberg_reconstructs_input() {
        let a = sample(9, 3);
        let hs = Hessenberg::new(&a);
        let h = Mat::from_fn(9, 9, |i, j| hs.h_entry(i, j));
        for j in 0..9 {
            for i in (j + 2)..9 {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
        let back = hs.q() * &h * hs.q().adjoint();
        assert!(max_abs_diff(back.as_ref(), a.as_ref()) < 1e-13);
    }

    #[test]
    fn shifted_solves_match_dense() {
        let a = sample(12, 7);
        let hs = Hessenberg::new(&a);
        let z = C64::new(0.3, -0.2);
        let lu = hs.shifted(z);
        let h = Mat::from_fn(12, 12, |i, j| hs.h_entry(i, j));
        let shifted = Mat::from_fn(12, 12, |i, j| if i == j { z } else { ZERO } - h[(i, j)]);
        let b: Vec<C64> = (0..12).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        let mut y = b.clone();
        lu.solve_adjoint_in_place(&mut y);
        for i in 0..12 {
            let r: C64 = (0..12).map(|j| shifted[(i, j)] * x[j]).sum::<C64>() - b[i];
            let ra: C64 = (0..12).map(|j| shifted[(j, i)].conj() * y[j]).sum::<C64>() - b[i];
            assert!(r.norm() < 1e-12, "{r}");
            assert!(ra.norm() < 1e-12, "{ra}");
        }
    }

    #[test]
    fn triangular_eigenvalues_are_exact() {
        let n = 7;
        let a = Mat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new((i * i) as f64, 0.0)
            } else if i > j {
                C64::new(0.0, 0.5f64.powi((i - j) as i32))
            } else {
                ZERO
            }
        });
        let ev = eigenvalues(&a).unwrap();
        for (k, z) in ev.iter().enumerate() {
            assert_eq!(*z, C64::new((k * k) as f64, 0.0));
        }
    }

    #[test]
    fn eigenvalues_of_block_with_coupled_core() {
        let a = Mat::from_fn(3, 3, |i, j| match (i, j) {
            (0, 0) => C64::new(2.0, 0.0),
            (0, 1) | (1, 0) => ONE,
            (1, 1) => C64::new(2.0, 0.0),
            (2, 2) => C64::new(-1.0, 0.0),
            (2, 0) => C64::new(0.0, 5.0),
            _ => ZERO,
        });
        let ev = eigenvalues(&a).unwrap();
        let want = [-1.0, 1.0, 3.0];
        for (z, w) in ev.iter().zip(want) {
            assert!((z - C64::new(w, 0.0)).norm() < 1e-13);
        }
    }
}
