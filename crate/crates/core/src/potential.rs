//! Singular π-periodic potentials v = Q′ stored through the Fourier
//! coefficients of Q on the even lattice 2ℤ.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{C64, I, ZERO};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Zero,
    Mathieu { c: f64 },
    DeltaComb { s: f64, x0: f64 },
    Gasymov { s: f64, r: f64 },
    Sawtooth { s: f64 },
    RandomWeighted { weight: Weight, seed: u64, target: f64 },
    Custom,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Zero => "zero",
            Family::Mathieu { .. } => "mathieu",
            Family::DeltaComb { .. } => "delta_comb",
            Family::Gasymov { .. } => "gasymov",
            Family::Sawtooth { .. } => "sawtooth",
            Family::RandomWeighted { .. } => "random_weighted",
            Family::Custom => "custom",
        }
    }

    /// Jump strength and location when Q is an exact sawtooth with one jump
    /// per period (slope −s/π, mean zero).
    pub fn step_data(&self) -> Option<(f64, f64)> {
        match *self {
            Family::DeltaComb { s, x0 } => Some((s, x0)),
            Family::Sawtooth { s } => Some((s, 0.0)),
            _ => None,
        }
    }
}

/// Sub-multiplicative weight ω on ℕ ∪ {0}; Ω(m) = ω(m)/|m|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// ω(m) = (1 + m)^a
    Sobolev { a: f64 },
    /// ω(m) = e^{c m}
    Exponential { c: f64 },
    /// ω(m) = e^{c m^g}, 0 < g < 1
    Gevrey { c: f64, g: f64 },
}

impl Weight {
    pub fn omega(&self, m: u64) -> f64 {
        let m = m as f64;
        match *self {
            Weight::Sobolev { a } => (1.0 + m).powf(a),
            Weight::Exponential { c } => (c * m).exp(),
            Weight::Gevrey { c, g } => (c * m.powf(g)).exp(),
        }
    }

    pub fn big_omega(&self, m: i64) -> f64 {
        assert!(m != 0, "Ω(0) is undefined");
        self.omega(m.unsigned_abs()) / m.unsigned_abs() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Weight::Sobolev { a } => a.is_finite() && a >= 0.0,
            Weight::Exponential { c } => c.is_finite() && c >= 0.0,
            Weight::Gevrey { c, g } => c.is_finite() && c >= 0.0 && g > 0.0 && g < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadParam(format!("invalid weight {self:?}")))
        }
    }

    /// Parses `sobolev:A`, `exp:C` or `gevrey:C,G`.
    pub fn parse(s: &str) -> Result<Weight> {
        let bad = || Error::BadParam(format!("cannot parse weight '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = rest
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let w = match (kind.trim(), nums.as_slice()) {
            ("sobolev", [a]) => Weight::Sobolev { a: *a },
            ("exp" | "exponential", [c]) => Weight::Exponential { c: *c },
            ("gevrey", [c, g]) => Weight::Gevrey { c: *c, g: *g },
            _ => return Err(bad()),
        };
        w.validate()?;
        Ok(w)
    }
}

/// (1/π)∫₀^π e^{ipx} dx.
pub fn exp_mean(p: i64) -> C64 {
    if p == 0 {
        C64::new(1.0, 0.0)
    } else if p % 2 == 0 {
        ZERO
    } else {
        C64::new(0.0, 2.0 / (PI * p as f64))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    coeffs: BTreeMap<i64, C64>,
    band_limit: usize,
    family: Family,
}

/// Build a custom potential from Fourier coefficients of Q.
pub fn make_potential<It>(coeffs: It) -> Result<PotentialSpec>
where
    It: IntoIterator<Item = (i64, C64)>,
{
    let mut map = BTreeMap::new();
    for (k, q) in coeffs {
        if k % 2 != 0 {
            return Err(Error::OddIndex(k));
        }
        if !(q.re.is_finite() && q.im.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        if k != 0 && q != ZERO {
            *map.entry(k).or_insert(ZERO) += q;
        }
    }
    Ok(PotentialSpec::from_map(map, Family::Custom))
}

impl PotentialSpec {
    fn from_map(mut coeffs: BTreeMap<i64, C64>, family: Family) -> Self {
        coeffs.retain(|k, q| *k != 0 && *q != ZERO);
        let band_limit = coeffs.keys().map(|k| k.unsigned_abs() as usize / 2).max().unwrap_or(0);
        PotentialSpec { coeffs, band_limit, family }
    }

    pub fn zero() -> Self {
        Self::from_map(BTreeMap::new(), Family::Zero)
    }

    /// Q = c·sin 2x, so v = 2c·cos 2x.
    pub fn mathieu(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::BadParam("mathieu: c must be finite".into()));
        }
        let mut m = BTreeMap::new();
        m.insert(2, C64::new(0.0, -c / 2.0));
        m.insert(-2, C64::new(0.0, c / 2.0));
        Ok(Self::from_map(m, Family::Mathieu { c }))
    }

    /// Band-limited sawtooth Q with jump s at x0, i.e. v = s·Σδ(x − x0 − jπ) − s/π.
    pub fn delta_comb(s: f64, x0: f64, band: usize) -> Result<Self> {
        if !(s.is_finite() && s != 0.0) {
            return Err(Error::BadParam("delta_comb: s must be finite and nonzero".into()));
        }
        if !x0.is_finite() {
            return Err(Error::BadParam("delta_comb: x0 must be finite".into()));
        }
        if band == 0 {
            return Err(Error::BadParam("delta_comb: band limit must be positive".into()));
        }
        let mut m = BTreeMap::new();
        for j in 1..=band as i64 {
            for k in [2 * j, -2 * j] {
                let kf = k as f64;
                let phase = C64::from_polar(1.0, -kf * x0);
                m.insert(k, C64::new(0.0, -s / (PI * kf)) * phase);
            }
        }
        Ok(Self::from_map(m, Family::DeltaComb { s, x0 }))
    }

    pub fn sawtooth(s: f64, band: usize) -> Result<Self> {
        let mut p = Self::delta_comb(s, 0.0, band)
            .map_err(|e| Error::BadParam(e.to_string().replace("delta_comb", "sawtooth")))?;
        p.family = Family::Sawtooth { s };
        Ok(p)
    }

    /// One-sided spectrum: q_k = s·r^k for k = 2, 4, …, 2F.
    pub fn gasymov(s: f64, r: f64, band: usize) -> Result<Self> {
        if !(s.is_finite() && s != 0.0) {
            return Err(Error::BadParam("gasymov: s must be finite and nonzero".into()));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::BadParam("gasymov: need 0 < r < 1".into()));
        }
        if band == 0 {
            return Err(Error::BadParam("gasymov: band limit must be positive".into()));
        }
        let mut m = BTreeMap::new();
        for j in 1..=band as i32 {
            let q = s * r.powi(2 * j);
            if q != 0.0 {
                m.insert(2 * j as i64, C64::new(q, 0.0));
            }
        }
        Ok(Self::from_map(m, Family::Gasymov { s, r }))
    }

    /// Random coefficients with |v_j| ~ 1/(Ω(j)·√j·(1 + ln j)), rescaled so the
    /// H(Ω) norm equals `target`.
    pub fn random_weighted(weight: Weight, seed: u64, band: usize, target: f64) -> Result<Self> {
        weight.validate()?;
        if band == 0 {
            return Err(Error::BadParam("random_weighted: band limit must be positive".into()));
        }
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::BadParam("random_weighted: target must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BTreeMap::new();
        for j in 1..=band as i64 {
            let jf = j as f64;
            let envelope = 1.0 / (weight.big_omega(j) * jf.sqrt() * (1.0 + jf.ln()));
            for k in [2 * j, -2 * j] {
                let amp = envelope * rng.random_range(0.5..1.5);
                let phase = rng.random_range(0.0..2.0 * PI);
                let v = C64::from_polar(amp, phase);
                let q = v / (I * k as f64);
                if q.norm() > 0.0 && q.re.is_finite() && q.im.is_finite() {
                    m.insert(k, q);
                }
            }
        }
        let mut p = Self::from_map(m, Family::Custom);
        let norm = p.weighted_norm(&weight);
        if norm > 0.0 && norm.is_finite() {
            for q in p.coeffs.values_mut() {
                *q *= target / norm;
            }
        }
        p.family = Family::RandomWeighted { weight, seed, target };
        Ok(p)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs.iter().map(|(k, q)| (*k, *q))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn q(&self, k: i64) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or(ZERO)
    }

    /// V₊(k) = i·k·q_k.
    pub fn v_plus(&self, k: i64) -> C64 {
        I * (k as f64) * self.q(k)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.values().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// True when q_{−k} = conj(q_k), i.e. Q and v are real-valued.
    pub fn is_real(&self) -> bool {
        let tol = 1e-14 * self.max_abs_coeff().max(1e-300);
        self.coeffs.iter().all(|(k, q)| (self.q(-k) - q.conj()).norm() <= tol)
    }

    /// The representation of v̄: coefficients q̄_{−k}.
    pub fn conjugate(&self) -> Self {
        let m = self.coeffs.iter().map(|(k, q)| (-k, q.conj())).collect();
        Self::from_map(m, Family::Custom)
    }

    /// Q(x + θ): coefficients q_k·e^{ikθ}.
    pub fn translated(&self, theta: f64) -> Self {
        let m = self
            .coeffs
            .iter()
            .map(|(k, q)| (*k, q * C64::from_polar(1.0, *k as f64 * theta)))
            .collect();
        Self::from_map(m, Family::Custom)
    }

    pub fn sum(&self, other: &PotentialSpec) -> Self {
        let mut m = self.coeffs.clone();
        for (k, q) in &other.coeffs {
            *m.entry(*k).or_insert(ZERO) += q;
        }
        Self::from_map(m, Family::Custom)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let m = self.coeffs.iter().map(|(k, q)| (*k, q * s)).collect();
        Self::from_map(m, Family::Custom)
    }

    /// Partial sum Σ q_k e^{ikx}.
    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs.iter().map(|(k, q)| q * C64::from_polar(1.0, *k as f64 * x)).sum()
    }

    /// Fejér (Cesàro) mean of the partial sums S_0, …, S_F at x.
    pub fn fejer_value(&self, x: f64) -> C64 {
        let f = self.band_limit as f64 + 1.0;
        self.coeffs
            .iter()
            .map(|(k, q)| {
                let j = (k.unsigned_abs() / 2) as f64;
                q * (1.0 - j / f) * C64::from_polar(1.0, *k as f64 * x)
            })
            .sum()
    }

    /// Coefficients of Q against √2·sin kx and {1, √2·cos kx} on [0, π]
    /// for 0 ≤ k ≤ kmax, with the convention Q̂^Dir_0 = 0.
    pub fn sine_cosine_coeffs(&self, kmax: usize) -> (Vec<C64>, Vec<C64>) {
        let mut dir = vec![ZERO; kmax + 1];
        let mut neu = vec![ZERO; kmax + 1];
        for (k, (d, c)) in dir.iter_mut().zip(neu.iter_mut()).enumerate() {
            let k = k as i64;
            if k == 0 {
                *c = self.coeffs().map(|(j, q)| q * exp_mean(j)).sum();
                continue;
            }
            let (mut sd, mut sc) = (ZERO, ZERO);
            if k % 2 == 0 {
                let (qm, qp) = (self.q(-k), self.q(k));
                sd = (qm - qp) / (2.0 * I);
                sc = (qm + qp) / 2.0;
            } else {
                for (j, q) in self.coeffs() {
                    let (a, b) = (exp_mean(j + k), exp_mean(j - k));
                    sd += q * (a - b);
                    sc += q * (a + b);
                }
                sd /= 2.0 * I;
                sc /= 2.0;
            }
            *d = sd * SQRT_2;
            *c = sc * SQRT_2;
        }
        (dir, neu)
    }

    /// Ṽ(k) = k·Q̂^Dir_k for 0 ≤ k ≤ kmax (Ṽ(0) = 0).
    pub fn v_tilde_table(&self, kmax: usize) -> Vec<C64> {
        let (dir, _) = self.sine_cosine_coeffs(kmax);
        dir.into_iter().enumerate().map(|(k, d)| d * k as f64).collect()
    }

    /// (Σ_j |v_j|² Ω(j)²)^{1/2}, v_j = i·k·q_k the coefficient of e^{2ijx}, j = k/2.
    pub fn weighted_norm(&self, w: &Weight) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, q)| {
                let v = (*k as f64) * q.norm();
                let om = w.big_omega(k / 2);
                v * v * om * om
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Exact sawtooth Q(x) = s/2 − s·((x − x0) mod π)/π with jump +s at x0.
pub fn exact_step(s: f64, x0: f64, x: f64) -> f64 {
    s / 2.0 - s * (x - x0).rem_euclid(PI) / PI
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuiltinParams {
    pub c: f64,
    pub s: f64,
    pub x0: f64,
    pub r: f64,
    pub band: usize,
    pub seed: u64,
    pub weight: Weight,
    pub target: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams {
            c: 1.0,
            s: 1.0,
            x0: FRAC_PI_2,
            r: 0.5,
            band: 64,
            seed: 0,
            weight: Weight::Sobolev { a: 1.0 },
            target: 1.0,
        }
    }
}

pub fn builtin(family: &str, p: &BuiltinParams) -> Result<PotentialSpec> {
    match family {
        "zero" => Ok(PotentialSpec::zero()),
        "mathieu" => PotentialSpec::mathieu(p.c),
        "delta_comb" => PotentialSpec::delta_comb(p.s, p.x0, p.band),
        "gasymov" => PotentialSpec::gasymov(p.s, p.r, p.band),
        "sawtooth" => PotentialSpec::sawtooth(p.s, p.band),
        "random_weighted" => PotentialSpec::random_weighted(p.weight, p.seed, p.band, p.target),
        other => Err(Error::BadParam(format!("unknown family '{other}'"))),
    }
}

/// Parse a potential file: `{"family": tag, "params": {...}}` or
/// `{"coeffs": [[k, re, im], ...]}`.
pub fn potential_from_json(text: &str, defaults: &BuiltinParams) -> Result<PotentialSpec> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("potential file: {e}")))?;
    if let Some(list) = v.get("coeffs") {
        let arr = list
            .as_array()
            .ok_or_else(|| Error::Config("'coeffs' must be an array".into()))?;
        let mut out = Vec::with_capacity(arr.len());
        for item in arr {
            let t = item.as_array().filter(|t| t.len() == 3).ok_or_else(|| {
                Error::Config("each coefficient must be [k, re, im]".into())
            })?;
            let k = t[0]
                .as_i64()
                .or_else(|| t[0].as_f64().filter(|x| x.fract() == 0.0).map(|x| x as i64))
                .ok_or_else(|| Error::Config("coefficient index must be an integer".into()))?;
            let re = t[1].as_f64().ok_or_else(|| Error::Config("re must be a number".into()))?;
            let im = t[2].as_f64().ok_or_else(|| Error::Config("im must be a number".into()))?;
            out.push((k, C64::new(re, im)));
        }
        return make_potential(out);
    }
    let family = v
        .get("family")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Config("potential file needs 'family' or 'coeffs'".into()))?;
    let mut p = defaults.clone();
    if let Some(params) = v.get("params") {
        let num = |key: &str| params.get(key).and_then(Value::as_f64);
        if let Some(x) = num("c") {
            p.c = x;
        }
        if let Some(x) = num("s") {
            p.s = x;
        }
        if let Some(x) = num("x0") {
            p.x0 = x;
        }
        if let Some(x) = num("r") {
            p.r = x;
        }
        if let Some(x) = num("target") {
            p.target = x;
        }
        if let Some(x) = params.get("F").or_else(|| params.get("band")).and_then(Value::as_u64) {
            p.band = x as usize;
        }
        if let Some(x) = params.get("seed").and_then(Value::as_u64) {
            p.seed = x;
        }
        if let Some(w) = params.get("weight").and_then(Value::as_str) {
            p.weight = Weight::parse(w)?;
        }
    }
    builtin(family, &p)
}

pub fn load_potential_file(path: &Path, defaults: &BuiltinParams) -> Result<PotentialSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    potential_from_json(&text, defaults)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{composite_gauss, simpson};

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn empty_map_is_zero_potential() {
        let p = make_potential(Vec::new()).unwrap();
        assert_eq!(p.support_len(), 0);
        for k in -10..=10 {
            assert_eq!(p.v_plus(2 * k), ZERO);
        }
    }

    #[test]
    fn mean_is_forced_to_zero() {
        let p = make_potential(vec![(0, C64::new(5.0, 0.0))]).unwrap();
        assert_eq!(p, make_potential(Vec::new()).unwrap());
        assert_eq!(p.family(), &Family::Custom);
    }

    #[test]
    fn odd_and_nonfinite_keys_are_rejected() {
        assert_eq!(make_potential(vec![(3, C64::new(1.0, 0.0))]), Err(Error::OddIndex(3)));
        assert_eq!(make_potential(vec![(2, C64::new(f64::NAN, 0.0))]), Err(Error::NonFinite(2)));
    }

    #[test]
    fn mathieu_coefficients() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let custom = make_potential(vec![(2, C64::new(0.0, -0.5)), (-2, C64::new(0.0, 0.5))]).unwrap();
        assert_eq!(p.coeffs().collect::<Vec<_>>(), custom.coeffs().collect::<Vec<_>>());
        assert_eq!(p.v_plus(2), C64::new(1.0, 0.0));
        assert_eq!(p.v_plus(-2), C64::new(1.0, 0.0));
        assert_eq!(p.v_plus(0), ZERO);
        for x in [0.1, 0.7, 2.0] {
            let v = (p.eval(x + 1e-6) - p.eval(x - 1e-6)) / 2e-6;
            assert!(close(v, C64::new(2.0 * (2.0 * x).cos(), 0.0), 1e-8));
        }
        assert_eq!(p.band_limit(), 1);
    }

    #[test]
    fn delta_comb_v_plus_matches_step_quadrature() {
        let p = PotentialSpec::delta_comb(1.0, FRAC_PI_2, 64).unwrap();
        let f = |x: f64| C64::new(exact_step(1.0, FRAC_PI_2, x), 0.0) * C64::from_polar(1.0, -2.0 * x);
        let left: C64 = composite_gauss(f, 0.0, FRAC_PI_2, 64, 16);
        let right: C64 = composite_gauss(f, FRAC_PI_2, PI, 64, 16);
        let quad = (left + right) / PI * (2.0 * I);
        assert!(close(p.v_plus(2), quad, 1e-12), "{} vs {}", p.v_plus(2), quad);
        let val = exact_step(1.0, FRAC_PI_2, PI / 4.0);
        assert!((p.eval(PI / 4.0).re - val).abs() <= 0.01);
        assert!(p.eval(PI / 4.0).im.abs() < 1e-12);
        assert!(p.eval(0.0).norm() < 1e-12);
    }

    #[test]
    fn gasymov_is_one_sided() {
        let p = PotentialSpec::gasymov(1.0, 0.5, 32).unwrap();
        for k in 1..=80 {
            assert_eq!(p.v_plus(-2 * k), ZERO);
        }
        assert!(p.v_plus(2).norm() > 0.0);
        assert!(PotentialSpec::gasymov(1.0, 1.0, 32).is_err());
        assert!(PotentialSpec::gasymov(0.0, 0.5, 32).is_err());
    }

    #[test]
    fn bad_builtin_parameters() {
        assert!(matches!(PotentialSpec::delta_comb(0.0, 1.0, 8), Err(Error::BadParam(_))));
        assert!(matches!(PotentialSpec::delta_comb(1.0, 1.0, 0), Err(Error::BadParam(_))));
        assert!(matches!(builtin("nope", &BuiltinParams::default()), Err(Error::BadParam(_))));
    }

    #[test]
    fn closed_form_neumann_coefficient_matches_simpson() {
        let p = PotentialSpec::mathieu(1.0).unwrap();
        let (_, neu) = p.sine_cosine_coeffs(4);
        let quad: C64 = simpson(|x| p.eval(x) * (SQRT_2 * (2.0 * x).cos()), 0.0, PI, 20000);
        assert!(close(neu[2], quad / PI, 1e-12));
    }

    fn quad_coeffs(p: &PotentialSpec, k: usize) -> (C64, C64) {
        let kf = k as f64;
        let panels = 64 + 4 * (k + 2 * p.band_limit());
        let d: C64 = composite_gauss(|x| p.eval(x) * (SQRT_2 * (kf * x).sin()), 0.0, PI, panels, 16);
        let c: C64 = composite_gauss(|x| p.eval(x) * (SQRT_2 * (kf * x).cos()), 0.0, PI, panels, 16);
        (d / PI, if k == 0 { c / (SQRT_2 * PI) } else { c / PI })
    }

    #[test]
    fn closed_forms_match_quadrature_on_builtins() {
        let fams = [
            PotentialSpec::mathieu(1.0).unwrap(),
            PotentialSpec::delta_comb(1.0, FRAC_PI_2, 8).unwrap(),
            PotentialSpec::sawtooth(1.0, 8).unwrap(),
            PotentialSpec::gasymov(1.0, 0.5, 8).unwrap(),
            PotentialSpec::random_weighted(Weight::Sobolev { a: 1.0 }, 3, 8, 1.0).unwrap(),
        ];
        for p in &fams {
            let kmax = 4 * p.band_limit().max(1);
            let (dir, neu) = p.sine_cosine_coeffs(kmax);
            assert_eq!(dir[0], ZERO);
            for k in 0..=kmax {
                let (qd, qn) = quad_coeffs(p, k);
                if k > 0 {
                    assert!(close(dir[k], qd, 1e-10), "{:?} dir k={k}", p.family());
                }
                assert!(close(neu[k], qn, 1e-10), "{:?} neu k={k}", p.family());
            }
        }
    }

    #[test]
    fn real_potentials_have_real_trig_coefficients() {
        for p in [
            PotentialSpec::mathieu(0.7).unwrap(),
            PotentialSpec::delta_comb(1.3, 1.1, 16).unwrap(),
        ] {
            assert!(p.is_real());
            let (dir, neu) = p.sine_cosine_coeffs(64);
            assert!(dir.iter().chain(&neu).all(|z| z.im.abs() <= 1e-12));
        }
        assert!(!PotentialSpec::gasymov(1.0, 0.5, 4).unwrap().is_real());
    }

    #[test]
    fn weighted_norms() {
        let w = Weight::Sobolev { a: 2.0 };
        assert_eq!(PotentialSpec::zero().weighted_norm(&w), 0.0);
        let m = PotentialSpec::mathieu(1.0).unwrap();
        assert!((m.weighted_norm(&w) - (2.0f64 * 16.0).sqrt()).abs() < 1e-12);
        let r = PotentialSpec::random_weighted(w, 11, 32, 1.0).unwrap();
        let n = r.weighted_norm(&w);
        assert!(n > 0.5 && n < 2.0);
    }

    #[test]
    fn weights_are_submultiplicative() {
        let ws = [
            Weight::Sobolev { a: 1.5 },
            Weight::Exponential { c: 0.3 },
            Weight::Gevrey { c: 0.5, g: 0.5 },
        ];
        for w in ws {
            for k in 0..40u64 {
                for m in 0..40u64 {
                    assert!(w.omega(k + m) <= w.omega(k) * w.omega(m) * (1.0 + 1e-12));
                }
            }
        }
        assert_eq!(Weight::parse("gevrey:0.5,0.5").unwrap(), ws[2]);
        assert!(Weight::parse("gevrey:0.5,1.5").is_err());
    }

    #[test]
    fn json_loader() {
        let d = BuiltinParams::default();
        let p = potential_from_json(r#"{"coeffs": [[2, 0, -0.5], [-2, 0, 0.5]]}"#, &d).unwrap();
        assert_eq!(p.v_plus(2), C64::new(1.0, 0.0));
        let q = potential_from_json(r#"{"family": "gasymov", "params": {"r": 0.25, "F": 4}}"#, &d)
            .unwrap();
        assert_eq!(q.family(), &Family::Gasymov { s: 1.0, r: 0.25 });
        assert_eq!(q.band_limit(), 4);
        assert_eq!(
            potential_from_json(r#"{"coeffs": [[1, 0, 1]]}"#, &d),
            Err(Error::OddIndex(1))
        );
        assert!(matches!(potential_from_json("{}", &d), Err(Error::Config(_))));
    }
}
