//! Monodromy of the quasi-derivative system y′ = Qy + u, u′ = −(λ + Q²)y − Qu
//! over one period, and root finding on the Floquet characteristic functions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};
use crate::operator_matrix::Bc;
use crate::potential::{Family, PotentialSpec};

pub type M2 = [[C64; 2]; 2];

const ID: M2 = [[ONE, ZERO], [ZERO, ONE]];

fn mul(a: &M2, b: &M2) -> M2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

fn add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn scale(a: &M2, s: C64) -> M2 {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

fn commutator(a: &M2, b: &M2) -> M2 {
    add(&mul(a, b), &scale(&mul(b, a), -ONE))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonodromyResult {
    pub lambda: C64,
    pub m: M2,
    /// dM/dλ.
    pub dm: M2,
    pub discriminant: C64,
}

impl MonodromyResult {
    pub fn det(&self) -> C64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Characteristic function of `bc` and its λ-derivative.
    pub fn characteristic(&self, bc: Bc) -> (C64, C64) {
        let (m, d) = (&self.m, &self.dm);
        match bc {
            Bc::PerPlus | Bc::PerMinus => {
                let s = if bc == Bc::PerPlus { ONE } else { -ONE };
                let f = (m[0][0] - s) * (m[1][1] - s) - m[0][1] * m[1][0];
                let df = d[0][0] * (m[1][1] - s) + (m[0][0] - s) * d[1][1] - d[0][1] * m[1][0] - m[0][1] * d[1][0];
                (f, df)
            }
            Bc::Dir => (m[0][1], d[0][1]),
            Bc::Neu => (m[1][0], d[1][0]),
        }
    }
}

#[derive(Clone, Debug)]
pub enum OracleSource {
    /// Band-limited Q sampled at two Gauss points per step.
    Smooth { steps: usize, q: Vec<[C64; 2]> },
    /// Sawtooth Q with a jump s at x0 ∈ (0, π), i.e. v = s·δ(x − x0) − s/π.
    Step { s: f64, x0: f64 },
}

const G1: f64 = 0.5 - 0.288_675_134_594_812_9;
const G2: f64 = 0.5 + 0.288_675_134_594_812_9;

impl OracleSource {
    pub fn smooth(p: &PotentialSpec, steps: usize) -> Result<Self> {
        if steps < 64 {
            return Err(Error::BadParam(format!("smooth integration needs at least 64 steps, got {steps}")));
        }
        let h = PI / steps as f64;
        let q = (0..steps)
            .into_par_iter()
            .map(|j| {
                let x = j as f64 * h;
                [p.eval(x + G1 * h), p.eval(x + G2 * h)]
            })
            .collect();
        Ok(OracleSource::Smooth { steps, q })
    }

    pub fn exact_step(s: f64, x0: f64) -> Result<Self> {
        if !(s.is_finite() && x0 > 0.0 && x0 < PI) {
            return Err(Error::BadParam(format!("exact step needs finite s and 0 < x0 < π, got s = {s}, x0 = {x0}")));
        }
        Ok(OracleSource::Step { s, x0 })
    }

    /// The exact piecewise representation of a delta-comb potential.
    pub fn exact_for(p: &PotentialSpec) -> Result<Self> {
        match p.family() {
            Family::DeltaComb { s, x0 } => OracleSource::exact_step(*s, *x0),
            other => Err(Error::BadParam(format!("no exact oracle for family '{}'", other.tag()))),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, OracleSource::Step { .. })
    }

    fn steps(&self) -> usize {
        match self {
            OracleSource::Smooth { steps, .. } => *steps,
            OracleSource::Step { .. } => 1,
        }
    }

    pub fn monodromy(&self, lambda: C64) -> Result<MonodromyResult> {
        let (m, dm) = match self {
            OracleSource::Smooth { steps, q } => magnus(q, PI / *steps as f64, lambda),
            OracleSource::Step { s, x0 } => step_product(*s, *x0, lambda),
        };
        let finite = m.iter().chain(dm.iter()).flatten().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::StepFailure(format!("non-finite propagator at λ = {lambda}")));
        }
        Ok(MonodromyResult { lambda, m, dm, discriminant: m[0][0] + m[1][1] })
    }

    pub fn characteristic(&self, bc: Bc, lambda: C64) -> Result<(C64, C64)> {
        Ok(self.monodromy(lambda)?.characteristic(bc))
    }
}

/// Monodromy of the band-limited potential with `steps` fourth-order Magnus steps.
pub fn monodromy(p: &PotentialSpec, lambda: C64, steps: usize) -> Result<MonodromyResult> {
    OracleSource::smooth(p, steps)?.monodromy(lambda)
}

fn system(q: C64, lambda: C64) -> M2 {
    [[q, ONE], [-(lambda + q * q), -q]]
}

/// Series coefficients of cosh√w, sinh√w/√w and d/dw of the latter.
fn hyperbolic(w: C64) -> (C64, C64, C64) {
    if w.norm() < 1e-2 {
        let (mut c, mut s, mut ds) = (ZERO, ZERO, ZERO);
        let mut pw = ONE;
        let mut fact_even = 1.0;
        let mut fact_odd = 1.0;
        for k in 0..10 {
            if k > 0 {
                fact_even *= ((2 * k - 1) * (2 * k)) as f64;
                fact_odd *= ((2 * k) * (2 * k + 1)) as f64;
            }
            c += pw / fact_even;
            s += pw / fact_odd;
            if k + 1 < 10 {
                let f_next = fact_odd * ((2 * k + 2) * (2 * k + 3)) as f64;
                ds += pw * ((k + 1) as f64 / f_next);
            }
            pw *= w;
        }
        (c, s, ds)
    } else {
        let mu = w.sqrt();
        let c = mu.cosh();
        let s = mu.sinh() / mu;
        (c, s, (c - s) / (2.0 * w))
    }
}

fn magnus(q: &[[C64; 2]], h: f64, lambda: C64) -> (M2, M2) {
    let e: M2 = [[ZERO, ZERO], [-ONE, ZERO]];
    let k3 = C64::new(3f64.sqrt() / 12.0 * h * h, 0.0);
    let hh = C64::new(h / 2.0, 0.0);
    let mut m = ID;
    let mut dm = [[ZERO; 2]; 2];
    for qs in q {
        let a1 = system(qs[0], lambda);
        let a2 = system(qs[1], lambda);
        let om = add(&scale(&add(&a1, &a2), hh), &scale(&commutator(&a2, &a1), k3));
        let dom = add(&scale(&e, C64::new(h, 0.0)), &scale(&add(&commutator(&e, &a1), &commutator(&a2, &e)), k3));
        let a = (om[0][0] - om[1][1]) / 2.0;
        let da = (dom[0][0] - dom[1][1]) / 2.0;
        let oms: M2 = [[a, om[0][1]], [om[1][0], -a]];
        let doms: M2 = [[da, dom[0][1]], [dom[1][0], -da]];
        let w = a * a + om[0][1] * om[1][0];
        let dw = 2.0 * a * da + dom[0][1] * om[1][0] + om[0][1] * dom[1][0];
        let (c, s, ds) = hyperbolic(w);
        let ex = add(&scale(&ID, c), &scale(&oms, s));
        let dex = add(&add(&scale(&ID, s * dw / 2.0), &scale(&oms, ds * dw)), &scale(&doms, s));
        dm = add(&mul(&dex, &m), &mul(&ex, &dm));
        m = mul(&ex, &m);
    }
    (m, dm)
}

/// Propagator of y″ = −w y over length h in (y, y′) and its w-derivative.
fn free_block(w: C64, h: f64) -> (M2, M2) {
    let z = w * h * h;
    let (c, s, ds) = if z.norm() < 1e-2 {
        let (mut c, mut s, mut ds) = (ZERO, ZERO, ZERO);
        let mut pz = ONE;
        let (mut fe, mut fo) = (1.0, 1.0);
        for k in 0..10i32 {
            if k > 0 {
                fe *= ((2 * k - 1) * (2 * k)) as f64;
                fo *= ((2 * k) * (2 * k + 1)) as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            c += pz * (sign / fe);
            s += pz * (sign * h / fo);
            if k > 0 {
                ds += pz / w * (sign * k as f64 * h / fo);
            }
            pz *= z;
        }
        if z == ZERO {
            ds = C64::new(-h * h * h / 6.0, 0.0);
        }
        (c, s, ds)
    } else {
        let om = w.sqrt();
        let c = (om * h).cos();
        let s = (om * h).sin() / om;
        (c, s, (c * h - s) / (2.0 * w))
    };
    let dc = -s * h / 2.0;
    let blk = [[c, s], [-w * s, c]];
    let dblk = [[dc, ds], [-s - w * ds, dc]];
    (blk, dblk)
}

fn step_product(s: f64, x0: f64, lambda: C64) -> (M2, M2) {
    let w = lambda + s / PI;
    let q0 = C64::new(s * (x0 / PI - 0.5), 0.0);
    let c0: M2 = [[ONE, ZERO], [-q0, ONE]];
    let c0i: M2 = [[ONE, ZERO], [q0, ONE]];
    let j: M2 = [[ONE, ZERO], [C64::new(s, 0.0), ONE]];
    let (e1, de1) = free_block(w, x0);
    let (e2, de2) = free_block(w, PI - x0);
    let inner = mul(&j, &e1);
    let m = mul(&c0, &mul(&mul(&e2, &inner), &c0i));
    let dinner = add(&mul(&de2, &inner), &mul(&e2, &mul(&j, &de1)));
    let dm = mul(&c0, &mul(&dinner, &c0i));
    (m, dm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Window {
    Real { lo: f64, hi: f64 },
    Rect { re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64 },
}

impl Window {
    /// The square (or interval, for real problems) of half-width r around c.
    pub fn around(c: f64, r: f64, real: bool) -> Self {
        if real {
            Window::Real { lo: c - r, hi: c + r }
        } else {
            Window::Rect { re_lo: c - r, re_hi: c + r, im_lo: -r, im_hi: r }
        }
    }
}

/// Roots of the characteristic function of `bc` inside `window`, sorted by
/// (Re, Im). Double roots are listed twice.
pub fn oracle_spectrum(src: &OracleSource, bc: Bc, window: Window, tol: f64) -> Result<Vec<C64>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadParam(format!("tolerance must be positive, got {tol}")));
    }
    let mut roots = match window {
        Window::Real { lo, hi } => real_roots(src, bc, lo, hi, tol)?.into_iter().map(|x| C64::new(x, 0.0)).collect(),
        Window::Rect { re_lo, re_hi, im_lo, im_hi } => {
            rect_roots(src, bc, C64::new(re_lo, im_lo), C64::new(re_hi, im_hi), tol)?
        }
    };
    crate::linalg::sort_spectrum(&mut roots);
    Ok(roots)
}

/// Rounding floor of the characteristic function at λ. For Per± the value
/// is a product of entries of M − σI, each carrying an absolute error of
/// order ε_M, so near coexistence the floor shrinks with those entries.
fn noise_floor(src: &OracleSource, bc: Bc, r: &MonodromyResult) -> f64 {
    let big = r.m.iter().flatten().map(|z| z.norm()).fold(1.0, f64::max);
    let eps_m = 16.0 * f64::EPSILON * (src.steps() as f64).sqrt() * big;
    match bc {
        Bc::PerPlus | Bc::PerMinus => {
            let s = if bc == Bc::PerPlus { 1.0 } else { -1.0 };
            let size = (r.m[0][0] - s).norm() + (r.m[1][1] - s).norm() + r.m[0][1].norm() + r.m[1][0].norm();
            eps_m * (size + eps_m)
        }
        Bc::Dir | Bc::Neu => eps_m,
    }
}

fn real_roots(src: &OracleSource, bc: Bc, lo: f64, hi: f64, tol: f64) -> Result<Vec<f64>> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::BadParam(format!("empty window [{lo}, {hi}]")));
    }
    let eval = |x: f64| -> Result<(f64, f64)> {
        let (f, d) = src.characteristic(bc, C64::new(x, 0.0))?;
        Ok((f.re, d.re))
    };
    let mut grid = vec![lo];
    while let Some(&x) = grid.last() {
        if x >= hi {
            break;
        }
        grid.push((x + 0.05 * x.abs().sqrt().max(1.0)).min(hi));
    }
    let vals: Vec<(f64, f64)> = grid.par_iter().map(|&x| eval(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (a, b) = (grid[i], grid[i + 1]);
        let ((fa, da), (fb, db)) = (vals[i], vals[i + 1]);
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb < 0.0 {
            roots.push(refine(&eval, a, b, fa)?);
        } else if da * db < 0.0 && fb != 0.0 {
            let x = refine_derivative(&eval, a, b, da)?;
            let mono = src.monodromy(C64::new(x, 0.0))?;
            let f0 = mono.characteristic(bc).0.re;
            if f0.abs() <= noise_floor(src, bc, &mono) {
                roots.push(x);
                roots.push(x);
            } else if f0 * fa < 0.0 {
                roots.push(refine(&eval, a, x, fa)?);
                roots.push(refine(&eval, x, b, f0)?);
            }
        }
    }
    if let Some(&(fl, _)) = vals.last() {
        if fl == 0.0 {
            roots.push(hi);
        }
    }
    roots.sort_by(f64::total_cmp);
    for &r in &roots {
        let (f, _) = eval(r)?;
        if f.abs() > tol {
            log::warn!("oracle root {r} for {bc} has |f| = {:e} above tolerance {tol:e}", f.abs());
        }
    }
    Ok(roots)
}

/// Safeguarded Newton on [a, b] where f(a) has sign of `fa` and f(b) the opposite.
fn refine<F>(eval: &F, mut a: f64, mut b: f64, fa: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let sa = fa.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (f, d) = eval(x)?;
        if f == 0.0 {
            return Ok(x);
        }
        if f.signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let newton = x - f / d;
        let next = if d != 0.0 && newton > a.min(b) && newton < a.max(b) { newton } else { 0.5 * (a + b) };
        let done = (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || (b - a).abs() <= 1e-15 * (1.0 + x.abs());
        x = next;
        if done {
            break;
        }
    }
    Ok(x)
}

/// Zero of f′ on [a, b] given the sign of f′(a), using secant steps on f′
/// safeguarded by bisection.
fn refine_derivative<F>(eval: &F, mut a: f64, mut b: f64, da: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let sa = da.signum();
    let (mut ya, mut yb) = (da, eval(b)?.1);
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let secant = a - ya * (b - a) / (yb - ya);
        x = if secant.is_finite() && secant > a && secant < b { secant } else { 0.5 * (a + b) };
        let (_, d) = eval(x)?;
        if d == 0.0 {
            return Ok(x);
        }
        if d.signum() == sa {
            a = x;
            ya = d;
            yb *= 0.5;
        } else {
            b = x;
            yb = d;
            ya *= 0.5;
        }
        if (b - a).abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(x)
}

fn winding<F>(f: &F, corners: [C64; 4]) -> Result<Option<i64>>
where
    F: Fn(C64) -> Result<C64>,
{
    let mut total = 0.0;
    for i in 0..4 {
        let (a, b) = (corners[i], corners[(i + 1) % 4]);
        match segment_arg(f, a, b, f(a)?, f(b)?, 0)? {
            Some(d) => total += d,
            None => return Ok(None),
        }
    }
    let w = total / (2.0 * PI);
    if (w - w.round()).abs() > 0.2 {
        return Ok(None);
    }
    Ok(Some(w.round() as i64))
}

fn segment_arg<F>(f: &F, a: C64, b: C64, fa: C64, fb: C64, depth: usize) -> Result<Option<f64>>
where
    F: Fn(C64) -> Result<C64>,
{
    if fa == ZERO || fb == ZERO {
        return Ok(None);
    }
    let d = (fb / fa).arg();
    if (d.abs() < 0.5 && depth >= 4) || depth > 30 {
        return Ok((depth <= 30).then_some(d));
    }
    let m = (a + b) / 2.0;
    let fm = f(m)?;
    let left = segment_arg(f, a, m, fa, fm, depth + 1)?;
    let right = segment_arg(f, m, b, fm, fb, depth + 1)?;
    Ok(match (left, right) {
        (Some(l), Some(r)) => Some(l + r),
        _ => None,
    })
}

fn rect_roots(src: &OracleSource, bc: Bc, lo: C64, hi: C64, tol: f64) -> Result<Vec<C64>> {
    if !(lo.re < hi.re && lo.im < hi.im) {
        return Err(Error::BadParam(format!("empty rectangle {lo} .. {hi}")));
    }
    let f = |z: C64| -> Result<C64> { Ok(src.characteristic(bc, z)?.0) };
    let fd = |z: C64| -> Result<(C64, C64)> { src.characteristic(bc, z) };
    let (lo, hi, counted) = counted_rect(&f, lo, hi)?;
    let mut out = Vec::new();
    search(&f, &fd, lo, hi, counted, tol, 0, &mut out)?;
    if out.len() as i64 != counted {
        return Err(Error::RootCountUnstable { counted: counted as usize, found: out.len() });
    }
    Ok(out)
}

/// Winding number of the rectangle, nudging its edges outward when a root
/// sits too close to the boundary.
fn counted_rect<F>(f: &F, lo: C64, hi: C64) -> Result<(C64, C64, i64)>
where
    F: Fn(C64) -> Result<C64>,
{
    let size = (hi - lo).norm();
    for attempt in 0..8 {
        let e = size * 1e-3 * attempt as f64 * 0.618;
        let (l, h) = (lo - C64::new(e, e), hi + C64::new(e, e));
        if let Some(c) = winding(f, [l, C64::new(h.re, l.im), h, C64::new(l.re, h.im)])? {
            return Ok((l, h, c));
        }
    }
    Err(Error::RootCountUnstable { counted: 0, found: 0 })
}

#[allow(clippy::too_many_arguments)]
fn search<F, D>(f: &F, fd: &D, lo: C64, hi: C64, count: i64, tol: f64, depth: usize, out: &mut Vec<C64>) -> Result<()>
where
    F: Fn(C64) -> Result<C64>,
    D: Fn(C64) -> Result<(C64, C64)>,
{
    if count <= 0 {
        return Ok(());
    }
    let center = (lo + hi) / 2.0;
    let size = (hi - lo).norm();
    let inside = |z: C64| z.re >= lo.re && z.re <= hi.re && z.im >= lo.im && z.im <= hi.im;
    if count == 1 || size <= 1e-7 * (1.0 + center.norm()) || depth > 40 {
        let mult = count as f64;
        let mut z = center;
        let mut ok = false;
        for _ in 0..100 {
            let (v, d) = fd(z)?;
            if v == ZERO {
                ok = true;
                break;
            }
            if d == ZERO {
                break;
            }
            let step = v / d * mult;
            z -= step;
            if step.norm() <= 1e-14 * (1.0 + z.norm()) {
                ok = true;
                break;
            }
        }
        let polished = ok && inside(z) && f(z)?.norm() <= tol.max(1e-300);
        if polished {
            if count == 1 {
                out.push(z);
                return Ok(());
            }
            let d = C64::new(1e-5 * (1.0 + z.norm()), 1e-5 * (1.0 + z.norm()));
            let (l, h) = (z - d, z + d);
            if winding(f, [l, C64::new(h.re, l.im), h, C64::new(l.re, h.im)])? == Some(count) {
                for _ in 0..count {
                    out.push(z);
                }
                return Ok(());
            }
        }
        if depth > 40 {
            return Err(Error::RootCountUnstable { counted: count as usize, found: 0 });
        }
    }
    let mid = lo + C64::new((hi.re - lo.re) * 0.5137, (hi.im - lo.im) * 0.4871);
    let quads = [
        (lo, mid),
        (C64::new(mid.re, lo.im), C64::new(hi.re, mid.im)),
        (C64::new(lo.re, mid.im), C64::new(mid.re, hi.im)),
        (mid, hi),
    ];
    let mut counts = Vec::with_capacity(4);
    for (l, h) in quads {
        let c = counted_rect(f, l, h)?;
        counts.push(c);
    }
    let sum: i64 = counts.iter().map(|c| c.2).sum();
    if sum != count {
        return Err(Error::RootCountUnstable { counted: count as usize, found: sum.max(0) as usize });
    }
    for (l, h, c) in counts {
        search(f, fd, l, h, c, tol, depth + 1, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn free_monodromy_closed_form() {
        let src = OracleSource::smooth(&PotentialSpec::zero(), 64).unwrap();
        for lam in [c(0.3), c(7.5), C64::new(2.0, 1.5)] {
            let r = src.monodromy(lam).unwrap();
            let s = lam.sqrt();
            let want = [[(s * PI).cos(), (s * PI).sin() / s], [-s * (s * PI).sin(), (s * PI).cos()]];
            for (got, want) in r.m.iter().flatten().zip(want.iter().flatten()) {
                assert!((got - want).norm() <= 1e-12);
            }
        }
        for n in 1..6 {
            let d = src.monodromy(c((n * n) as f64)).unwrap().discriminant;
            assert!((d - 2.0 * (-1f64).powi(n)).norm() <= 1e-12);
        }
    }

    #[test]
    fn exact_step_determinant_and_two_piece_product() {
        let src = OracleSource::exact_step(1.0, PI / 2.0).unwrap();
        let r = src.monodromy(c(25.0)).unwrap();
        assert!((r.det() - 1.0).norm() <= 1e-12);
        let w: f64 = 25.0 + 1.0 / PI;
        let om = w.sqrt();
        let h = PI / 2.0;
        let (cs, sn) = ((om * h).cos(), (om * h).sin());
        let delta = 2.0 * (cs * cs - sn * sn) + 2.0 * sn * cs / om;
        assert!((r.discriminant.re - delta).abs() <= 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let srcs = [OracleSource::smooth(&p, 256).unwrap(), OracleSource::exact_step(1.0, 1.1).unwrap()];
        for src in &srcs {
            for lam in [C64::new(10.3, 0.2), c(0.004), c(-3.0)] {
                let r = src.monodromy(lam).unwrap();
                let h = 1e-6;
                let rp = src.monodromy(lam + h).unwrap();
                let rm = src.monodromy(lam - h).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        let fd = (rp.m[i][j] - rm.m[i][j]) / (2.0 * h);
                        assert!((fd - r.dm[i][j]).norm() <= 1e-6 * (1.0 + fd.norm()), "{lam} {i}{j}");
                    }
                }
            }
        }
    }

    #[test]
    fn free_dirichlet_roots() {
        let src = OracleSource::smooth(&PotentialSpec::zero(), 64).unwrap();
        let roots = oracle_spectrum(&src, Bc::Dir, Window::Real { lo: 0.5, hi: 100.5 }, 1e-8).unwrap();
        assert_eq!(roots.len(), 10);
        for (j, r) in roots.iter().enumerate() {
            assert!((r - c(((j + 1) * (j + 1)) as f64)).norm() <= 1e-10);
        }
        let per = oracle_spectrum(&src, Bc::PerPlus, Window::Real { lo: 15.0, hi: 17.0 }, 1e-8).unwrap();
        assert_eq!(per.len(), 2);
    }

    #[test]
    fn complex_rectangle_roots() {
        let src = OracleSource::smooth(&PotentialSpec::zero(), 64).unwrap();
        let w = Window::Rect { re_lo: 3.3, re_hi: 20.1, im_lo: -1.0, im_hi: 1.3 };
        let roots = oracle_spectrum(&src, Bc::Dir, w, 1e-8).unwrap();
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([4.0, 9.0, 16.0]) {
            assert!((r - want).norm() <= 1e-9);
        }
        let per = oracle_spectrum(&src, Bc::PerPlus, Window::around(16.0, 2.0, false), 1e-8).unwrap();
        assert_eq!(per.len(), 2);
        assert!(per.iter().all(|z| (z - 16.0).norm() <= 1e-6));
    }
}
