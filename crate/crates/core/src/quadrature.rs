//! Reference quadrature rules used to cross-check closed-form coefficients.

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule over `panels` equal panels of [a, b].
pub fn composite_gauss<F, T>(f: F, a: f64, b: f64, panels: usize, order: usize) -> T
where
    F: Fn(f64) -> T,
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = T::default();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in xs.iter().zip(&ws) {
            acc = acc + f(mid + 0.5 * h * x) * (0.5 * h * w);
        }
    }
    acc
}

/// Composite Simpson rule with `n` (rounded up to even) subintervals.
pub fn simpson<F, T>(f: F, a: f64, b: f64, n: usize) -> T
where
    F: Fn(f64) -> T,
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc = acc + f(a + i as f64 * h) * c;
    }
    acc * (h / 3.0)
}
