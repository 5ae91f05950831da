use std::f64::consts::FRAC_PI_2;

use hill_spectra::floquet_oracle::{monodromy, oracle_spectrum, OracleSource, Window};
use hill_spectra::linalg::sort_spectrum;
use hill_spectra::operator_matrix::{build_matrix, Bc};
use hill_spectra::potential::PotentialSpec;
use hill_spectra::C64;

fn matrix_roots(p: &PotentialSpec, bc: Bc, k: usize, c: f64, r: f64) -> Vec<C64> {
    let op = build_matrix(p, bc, k).unwrap();
    let mut v: Vec<C64> = op.spectrum().unwrap().iter().copied().filter(|z| (z - c).norm() < r).collect();
    sort_spectrum(&mut v);
    v
}

fn gap(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn mathieu_periodic_pair_at_sixteen() {
    let p = PotentialSpec::mathieu(1.0).unwrap();
    let src = OracleSource::smooth(&p, 2048).unwrap();
    let roots = oracle_spectrum(&src, Bc::PerPlus, Window::around(16.0, 1.0, true), 1e-8).unwrap();
    assert_eq!(roots.len(), 2);
    assert!(gap(&roots, &matrix_roots(&p, Bc::PerPlus, 64, 16.0, 1.0)) <= 1e-7);
}

#[test]
fn gasymov_complex_window() {
    let p = PotentialSpec::gasymov(1.0, 0.5, 32).unwrap();
    let src = OracleSource::smooth(&p, 2048).unwrap();
    let roots = oracle_spectrum(&src, Bc::Dir, Window::around(36.0, 1.5, false), 1e-8).unwrap();
    assert!(gap(&roots, &matrix_roots(&p, Bc::Dir, 64, 36.0, 1.5)) <= 1e-7);
}

#[test]
fn gasymov_neumann_matrix_error_shrinks_like_one_over_k() {
    // Q(0) ≠ 0 here, so an eigenfunction obeys y′(0) = Q(0)y(0) and its cosine
    // expansion converges slowly.
    let p = PotentialSpec::gasymov(1.0, 0.5, 32).unwrap();
    let src = OracleSource::smooth(&p, 2048).unwrap();
    let truth = oracle_spectrum(&src, Bc::Neu, Window::around(100.0, 2.5, false), 1e-8).unwrap();
    let errs: Vec<f64> = [64, 128, 256].iter().map(|&k| gap(&truth, &matrix_roots(&p, Bc::Neu, k, 100.0, 2.5))).collect();
    assert!(errs[0] > 1.8 * errs[1] && errs[1] > 1.8 * errs[2], "{errs:?}");
}

#[test]
fn delta_comb_agreement_improves_with_band_limit() {
    let src = OracleSource::exact_for(&PotentialSpec::delta_comb(1.0, FRAC_PI_2, 64).unwrap()).unwrap();
    let truth = oracle_spectrum(&src, Bc::Neu, Window::around(100.0, 2.5, true), 1e-9).unwrap();
    assert_eq!(truth.len(), 1);
    let mut last = f64::INFINITY;
    for band in [32, 64, 128] {
        let p = PotentialSpec::delta_comb(1.0, FRAC_PI_2, band).unwrap();
        let e = gap(&truth, &matrix_roots(&p, Bc::Neu, 128, 100.0, 2.5));
        assert!(e < last && e < 1e-2, "F = {band}: {e}");
        last = e;
    }
}

#[test]
fn smooth_integrator_is_fourth_order() {
    let p = PotentialSpec::mathieu(1.0).unwrap();
    let lam = C64::new(25.0, 0.0);
    let reference = monodromy(&p, lam, 8192).unwrap().discriminant;
    let e1 = (monodromy(&p, lam, 128).unwrap().discriminant - reference).norm();
    let e2 = (monodromy(&p, lam, 256).unwrap().discriminant - reference).norm();
    assert!((e1 / e2).log2() >= 3.8, "order {}", (e1 / e2).log2());
}

#[test]
fn discriminant_is_analytic() {
    let p = PotentialSpec::gasymov(1.0, 0.5, 8).unwrap();
    let h = 1e-4;
    for z0 in [C64::new(20.0, 0.5), C64::new(50.0, -1.0), C64::new(7.0, 2.0)] {
        let d = |z: C64| monodromy(&p, z, 512).unwrap().discriminant;
        let dx = (d(z0 + h) - d(z0 - h)) / (2.0 * h);
        let dy = (d(z0 + C64::new(0.0, h)) - d(z0 - C64::new(0.0, h))) / (2.0 * h);
        // Cauchy–Riemann: ∂_y Δ = i ∂_x Δ
        assert!((dy - C64::new(0.0, 1.0) * dx).norm() <= 1e-6 * (1.0 + dx.norm()));
    }
}
