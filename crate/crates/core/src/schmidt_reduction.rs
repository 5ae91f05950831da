//! 2×2 Lyapunov–Schmidt reduction onto the resonant modes {n, −n},
//! realized as a Schur complement of the truncated periodic matrix.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, ZERO};
use crate::operator_matrix::TruncatedOperator;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedMatrix {
    pub n: i64,
    pub z: C64,
    pub alpha11: C64,
    pub alpha22: C64,
    /// Row n, column −n.
    pub beta_plus: C64,
    /// Row −n, column n.
    pub beta_minus: C64,
    /// |z| ≥ n/4: outside the disc where the reduction is meant to be used.
    pub outside_disc: bool,
}

impl ReducedMatrix {
    /// det(S(z) − (n² + z) I₂).
    pub fn char_det(&self) -> C64 {
        (self.alpha11 - self.z) * (self.alpha22 - self.z) - self.beta_plus * self.beta_minus
    }

    pub fn alpha_asymmetry(&self) -> f64 {
        (self.alpha11 - self.alpha22).norm()
    }
}

pub fn reduce_2x2(op: &TruncatedOperator, n: i64, z: C64) -> Result<ReducedMatrix> {
    if !op.bc.is_periodic() {
        return Err(Error::BadParam(format!(
            "the 2x2 reduction needs a periodic or antiperiodic operator, got {}",
            op.bc
        )));
    }
    if n <= 0 {
        return Err(Error::ModeOutsideWindow(n));
    }
    let ip = op.position(n).ok_or(Error::ModeOutsideWindow(n))?;
    let im = op.position(-n).ok_or(Error::ModeOutsideWindow(-n))?;
    let dim = op.dim();
    let rest: Vec<usize> = (0..dim).filter(|&i| i != ip && i != im).collect();
    let lam = C64::new((n * n) as f64, 0.0) + z;
    let l = &op.matrix;
    let nr = rest.len();
    let a = Mat::from_fn(nr, nr, |i, j| {
        let v = -l[(rest[i], rest[j])];
        if i == j {
            v + lam
        } else {
            v
        }
    });
    let modes = [ip, im];
    let b = Mat::from_fn(nr, 2, |i, j| l[(rest[i], modes[j])]);
    let x = linalg::solve(&a, &b);
    let finite = (0..nr).all(|i| (0..2).all(|j| x[(i, j)].re.is_finite() && x[(i, j)].im.is_finite()));
    let singular = || Error::ComplementSingular { n, z: format!("{z}") };
    if !finite {
        return Err(singular());
    }
    let res = &a * &x - &b;
    let scale = linalg::norm_1(a.as_ref()) * linalg::norm_1(x.as_ref()) + linalg::norm_1(b.as_ref());
    if linalg::norm_1(res.as_ref()) > 1e-8 * scale {
        return Err(singular());
    }
    let mut s = [[ZERO; 2]; 2];
    for (r, &pr) in modes.iter().enumerate() {
        for c in 0..2 {
            let mut acc = l[(pr, modes[c])];
            for (i, &q) in rest.iter().enumerate() {
                acc += l[(pr, q)] * x[(i, c)];
            }
            s[r][c] = acc;
        }
    }
    let n2 = C64::new((n * n) as f64, 0.0);
    let outside_disc = z.norm() >= n as f64 / 4.0;
    if outside_disc {
        log::debug!("reduction at n = {n} probed outside |z| < n/4 (z = {z})");
    }
    Ok(ReducedMatrix {
        n,
        z,
        alpha11: s[0][0] - n2,
        alpha22: s[1][1] - n2,
        beta_plus: s[0][1],
        beta_minus: s[1][0],
        outside_disc,
    })
}

pub fn characteristic_residual(op: &TruncatedOperator, n: i64, z: C64) -> Result<f64> {
    Ok(reduce_2x2(op, n, z)?.char_det().norm())
}

/// Newton iteration on z ↦ det(S(z) − (n² + z) I₂) from each seed, with a
/// central-difference derivative of step 1e−6·(1 + |z|).
pub fn reduced_roots(op: &TruncatedOperator, n: i64, seeds: [C64; 2]) -> Result<[C64; 2]> {
    let f = |z: C64| -> Result<C64> { Ok(reduce_2x2(op, n, z)?.char_det()) };
    let mut out = seeds;
    for z in out.iter_mut() {
        let mut fz = f(*z)?;
        for _ in 0..80 {
            if fz == ZERO {
                break;
            }
            let h = 1e-6 * (1.0 + z.norm());
            let hc = C64::new(h, 0.0);
            let d = (f(*z + hc)? - f(*z - hc)?) / (2.0 * h);
            if d == ZERO || !d.re.is_finite() {
                break;
            }
            let step = fz / d;
            let trial = *z - step;
            let ft = f(trial)?;
            if ft.norm() > fz.norm() && step.norm() < 1e-12 * (1.0 + z.norm()) {
                break;
            }
            *z = trial;
            fz = ft;
            if step.norm() <= 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_matrix::{build_matrix, Bc};
    use crate::potential::PotentialSpec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_potential_reduces_to_zero() {
        let op = build_matrix(&PotentialSpec::zero(), Bc::PerPlus, 8).unwrap();
        for n in [2, 4, 6] {
            for z in [c(0.3, 0.1), c(-0.2, 0.0)] {
                let r = reduce_2x2(&op, n, z).unwrap();
                assert_eq!([r.alpha11, r.alpha22, r.beta_plus, r.beta_minus], [ZERO; 4]);
            }
        }
        assert_eq!(characteristic_residual(&op, 4, ZERO).unwrap(), 0.0);
        assert!(matches!(
            reduce_2x2(&op, 4, c(20.0, 0.0)),
            Err(Error::ComplementSingular { n: 4, .. })
        ));
    }

    #[test]
    fn first_order_law_for_small_mathieu_coupling() {
        let cpl = 0.05;
        let p = PotentialSpec::mathieu(cpl).unwrap();
        let op = build_matrix(&p, Bc::PerMinus, 64).unwrap();
        let r = reduce_2x2(&op, 1, ZERO).unwrap();
        assert!((r.beta_plus - p.v_plus(2)).norm() <= 0.1 * cpl);
        assert!((r.beta_minus - p.v_plus(-2)).norm() <= 0.1 * cpl);
        let op = build_matrix(&p, Bc::PerPlus, 64).unwrap();
        let r = reduce_2x2(&op, 4, ZERO).unwrap();
        assert!(r.beta_plus.norm() <= cpl * cpl);
    }

    #[test]
    fn gasymov_beta_minus_vanishes() {
        let p = PotentialSpec::gasymov(1.0, 0.5, 32).unwrap();
        let op = build_matrix(&p, Bc::PerPlus, 64).unwrap();
        for n in [6, 10, 20] {
            let r = reduce_2x2(&op, n, c(0.01, 0.0)).unwrap();
            assert!(r.beta_minus.norm() <= 1e-12);
            assert!(r.beta_plus.norm() > 0.0);
        }
    }

    #[test]
    fn residual_vanishes_at_eigenvalues_only() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let op = build_matrix(&p, Bc::PerPlus, 64).unwrap();
        let ev = op.spectrum().unwrap().to_vec();
        let near: Vec<C64> = ev.iter().copied().filter(|z| (z - 16.0).norm() < 1.0).collect();
        assert_eq!(near.len(), 2);
        for lam in &near {
            assert!(characteristic_residual(&op, 4, lam - 16.0).unwrap() <= 1e-8);
        }
        assert!(characteristic_residual(&op, 4, c(0.5, 0.0)).unwrap() > 1e-3);
        let roots = reduced_roots(&op, 4, [near[0] - 16.0, near[1] - 16.0]).unwrap();
        for (r, lam) in roots.iter().zip(&near) {
            assert!((r + 16.0 - lam).norm() <= 1e-8);
        }
    }

    #[test]
    fn outside_window_and_wrong_bc() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let op = build_matrix(&p, Bc::PerPlus, 8).unwrap();
        assert_eq!(reduce_2x2(&op, 40, ZERO).unwrap_err(), Error::ModeOutsideWindow(40));
        let dir = build_matrix(&p, Bc::Dir, 8).unwrap();
        assert!(matches!(reduce_2x2(&dir, 2, ZERO), Err(Error::BadParam(_))));
        assert!(reduce_2x2(&op, 4, c(3.0, 0.0)).unwrap().outside_disc);
    }
}
