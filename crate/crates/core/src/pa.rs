//! Power-amplifier behavioral models and output-backoff calibration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalehParams {
    pub g0: f64,
    pub a_sat: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SalehParams {
    /// Gain 2, saturation 1, phase parameters (2, 1).
    pub const REFERENCE: SalehParams = SalehParams {
        g0: 2.0,
        a_sat: 1.0,
        alpha: 2.0,
        beta: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.g0 > 0.0 && self.a_sat > 0.0 && self.beta >= 0.0 && self.alpha.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "Saleh parameters need g0 > 0, a_sat > 0, beta >= 0 (got {self:?})"
            )))
        }
    }

    pub fn am_am(&self, r: f64) -> f64 {
        let u = r / self.a_sat;
        self.g0 * r / (1.0 + u * u)
    }

    /// Added phase in radians.
    pub fn am_pm(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.alpha * r2 / (1.0 + self.beta * r2)
    }

    pub fn apply_sample(&self, x: C64) -> C64 {
        let r = x.norm();
        if r == 0.0 {
            return C64::default();
        }
        x * (self.am_am(r) / r) * C64::from_polar(1.0, self.am_pm(r))
    }

    /// Peak of the AM/AM curve, reached at `|x| = a_sat`.
    pub fn peak_output(&self) -> f64 {
        self.g0 * self.a_sat / 2.0
    }
}

/// Largest envelope power count `k_b` a memory polynomial may carry.
pub const MAX_ENVELOPE_ORDER: usize = 16;
/// Largest lag bound `p_b` or `p_c`.
pub const MAX_LAG: usize = 64;

/// Memory polynomial
/// `y_n = sum_{k,l,m} c_{k,l,m} x_{n-l} |x_{n-l-m}|^{2k}` with
/// `k in 0..k_b`, `|l| < p_b`, `|m| < p_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MemoryPolySpec", into = "MemoryPolySpec")]
pub struct MemoryPolyParams {
    k_b: usize,
    p_b: usize,
    p_c: usize,
    coeffs: Vec<C64>,
}

impl MemoryPolyParams {
    pub fn zeros(k_b: usize, p_b: usize, p_c: usize) -> Result<Self> {
        if !(1..=MAX_ENVELOPE_ORDER).contains(&k_b) || !(1..=MAX_LAG).contains(&p_b) || !(1..=MAX_LAG).contains(&p_c) {
            return Err(Error::invalid(format!(
                "memory polynomial orders must lie in k_b 1..={MAX_ENVELOPE_ORDER}, p_b and p_c 1..={MAX_LAG}"
            )));
        }
        Ok(Self {
            k_b,
            p_b,
            p_c,
            coeffs: vec![C64::default(); k_b * (2 * p_b - 1) * (2 * p_c - 1)],
        })
    }

    /// Synthetic GaN-like amplifier: third- and fifth-order compression with
    /// one-sample linear and envelope memory.
    pub fn synthetic_gan() -> Self {
        let mut p = Self::zeros(3, 2, 2).expect("valid orders");
        p.set(0, 0, 0, C64::new(1.0, 0.0));
        p.set(0, 1, 0, C64::new(0.06, -0.03));
        p.set(0, -1, 0, C64::new(0.02, 0.01));
        p.set(1, 0, 0, C64::new(-0.12, 0.05));
        p.set(1, 0, 1, C64::new(-0.04, 0.02));
        p.set(1, 1, 0, C64::new(-0.02, -0.01));
        p.set(2, 0, 0, C64::new(-0.005, 0.002));
        p
    }

    pub fn k_b(&self) -> usize {
        self.k_b
    }

    pub fn p_b(&self) -> usize {
        self.p_b
    }

    pub fn p_c(&self) -> usize {
        self.p_c
    }

    fn index(&self, k: usize, l: i64, m: i64) -> usize {
        let pb = self.p_b as i64;
        let pc = self.p_c as i64;
        assert!(k < self.k_b && l.abs() < pb && m.abs() < pc, "coefficient index out of range");
        let lw = (2 * pc - 1) as usize;
        (k * (2 * pb - 1) as usize + (l + pb - 1) as usize) * lw + (m + pc - 1) as usize
    }

    pub fn get(&self, k: usize, l: i64, m: i64) -> C64 {
        self.coeffs[self.index(k, l, m)]
    }

    pub fn set(&mut self, k: usize, l: i64, m: i64, c: C64) {
        let i = self.index(k, l, m);
        self.coeffs[i] = c;
    }

    /// All `(k, l, m, c)` entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, i64, i64, C64)> + '_ {
        let pb = self.p_b as i64;
        let pc = self.p_c as i64;
        (0..self.k_b).flat_map(move |k| {
            (-pb + 1..pb).flat_map(move |l| (-pc + 1..pc).map(move |m| (k, l, m, self.get(k, l, m))))
        })
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = x.len() as i64;
        let pb = self.p_b as i64;
        let pc = self.p_c as i64;
        let env: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
        let mut out = vec![C64::default(); x.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let i = idx as i64;
            let mut acc = C64::default();
            for l in -pb + 1..pb {
                let j = i - l;
                if j < 0 || j >= n {
                    continue;
                }
                let xj = x[j as usize];
                for m in -pc + 1..pc {
                    let q = j - m;
                    let e = if (0..n).contains(&q) { env[q as usize] } else { 0.0 };
                    // Horner over envelope orders.
                    let mut poly = C64::default();
                    for k in (0..self.k_b).rev() {
                        poly = poly * e + self.get(k, l, m);
                    }
                    acc += xj * poly;
                }
            }
            *o = acc;
        }
        out
    }

    /// Magnitude of the response to a constant envelope `r`.
    pub fn static_am_am(&self, r: f64) -> f64 {
        let e = r * r;
        let mut sum = C64::default();
        for (k, _, _, c) in self.entries() {
            sum += c * e.powi(k as i32);
        }
        r * sum.norm()
    }

    /// First local maximum of the constant-envelope AM/AM curve on a dense
    /// grid, or `None` if the curve rises monotonically over the grid.
    pub fn peak_output(&self) -> Option<f64> {
        const STEP: f64 = 1e-4;
        const LIMIT: f64 = 20.0;
        let mut prev = 0.0;
        let mut r = STEP;
        while r <= LIMIT {
            let v = self.static_am_am(r);
            if v < prev {
                return Some(prev);
            }
            prev = v;
            r += STEP;
        }
        None
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MemoryPolySpec {
    k_b: usize,
    p_b: usize,
    p_c: usize,
    /// Sparse list; absent entries are zero.
    coefficients: Vec<CoefficientEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoefficientEntry {
    k: usize,
    l: i64,
    m: i64,
    re: f64,
    #[serde(default)]
    im: f64,
}

impl TryFrom<MemoryPolySpec> for MemoryPolyParams {
    type Error = Error;

    fn try_from(spec: MemoryPolySpec) -> Result<Self> {
        let mut p = MemoryPolyParams::zeros(spec.k_b, spec.p_b, spec.p_c)?;
        for e in spec.coefficients {
            if e.k >= spec.k_b || e.l.unsigned_abs() as usize >= spec.p_b || e.m.unsigned_abs() as usize >= spec.p_c
            {
                return Err(Error::invalid(format!(
                    "coefficient ({}, {}, {}) outside orders ({}, {}, {})",
                    e.k, e.l, e.m, spec.k_b, spec.p_b, spec.p_c
                )));
            }
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::invalid("memory polynomial coefficients must be finite"));
            }
            p.set(e.k, e.l, e.m, C64::new(e.re, e.im));
        }
        Ok(p)
    }
}

impl From<MemoryPolyParams> for MemoryPolySpec {
    fn from(p: MemoryPolyParams) -> Self {
        let coefficients = p
            .entries()
            .filter(|e| e.3 != C64::default())
            .map(|(k, l, m, c)| CoefficientEntry {
                k,
                l,
                m,
                re: c.re,
                im: c.im,
            })
            .collect();
        MemoryPolySpec {
            k_b: p.k_b,
            p_b: p.p_b,
            p_c: p.p_c,
            coefficients,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PaModel {
    Linear {},
    Saleh(SalehParams),
    MemoryPoly(MemoryPolyParams),
}

impl PaModel {
    pub fn label(&self) -> &'static str {
        match self {
            PaModel::Linear {} => "linear",
            PaModel::Saleh(_) => "saleh",
            PaModel::MemoryPoly(_) => "memory_poly",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PaModel::Saleh(p) => p.validate(),
            _ => Ok(()),
        }
    }

    pub fn apply_samples(&self, x: &[C64]) -> Vec<C64> {
        match self {
            PaModel::Linear {} => x.to_vec(),
            PaModel::Saleh(p) => x.iter().map(|&v| p.apply_sample(v)).collect(),
            PaModel::MemoryPoly(p) => p.apply(x),
        }
    }

    pub fn apply(&self, signal: &ComplexSignal) -> ComplexSignal {
        ComplexSignal {
            samples: self.apply_samples(&signal.samples),
            sps: signal.sps,
            delay: signal.delay,
        }
    }

    /// PA with its input scaled by `scale`.
    pub fn apply_scaled(&self, signal: &ComplexSignal, scale: f64) -> ComplexSignal {
        self.apply(&signal.scaled(scale))
    }

    pub fn peak_output(&self) -> Option<f64> {
        match self {
            PaModel::Linear {} => None,
            PaModel::Saleh(p) => Some(p.peak_output()),
            PaModel::MemoryPoly(p) => p.peak_output(),
        }
    }

    /// Output backoff in dB (peak over mean output power) at input `scale`.
    pub fn output_backoff_db(&self, signal: &[C64], scale: f64) -> Option<f64> {
        let peak = self.peak_output()?;
        let x: Vec<C64> = signal.iter().map(|v| v * scale).collect();
        let y = self.apply_samples(&x);
        let mean = crate::signal::mean_power(&y);
        Some(10.0 * (peak * peak / mean).log10())
    }

    /// Parses a PA model from a structured text document holding a `[pa]`
    /// table, the same layout the scenario configs use.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            pa: PaModel,
        }
        let doc: Doc = toml::from_str(text).map_err(|e| Error::config("pa", e.to_string()))?;
        doc.pa.validate()?;
        Ok(doc.pa)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InputScaling {
    pub scale: f64,
    pub backoff_db: f64,
}

/// Finds the input scale giving `target_db` of output backoff on `signal`.
///
/// Backoff is large for tiny inputs and falls as the PA is driven harder, so
/// the first crossing of the target on a logarithmic scale sweep brackets
/// the answer, which bisection then refines to 0.001 dB.
pub fn set_backoff(signal: &ComplexSignal, model: &PaModel, target_db: f64) -> Result<InputScaling> {
    if model.peak_output().is_none() {
        return Err(Error::UnreachableBackoff {
            target_db,
            reason: format!("the {} model has no finite maximum output", model.label()),
        });
    }
    let rms = signal.mean_power().sqrt();
    if rms == 0.0 {
        return Err(Error::ZeroPower);
    }
    let x = &signal.samples;
    let backoff = |s: f64| model.output_backoff_db(x, s).expect("finite peak");
    let base = 1.0 / rms;
    let scale_at = |i: i32| base * 10f64.powf(f64::from(i) / 40.0);

    let lo_index = -160;
    if backoff(scale_at(lo_index)) < target_db {
        return Err(Error::UnreachableBackoff {
            target_db,
            reason: "target exceeds the backoff of the smallest probed drive".into(),
        });
    }
    let mut lo = scale_at(lo_index);
    let mut hi = None;
    let mut best = f64::INFINITY;
    for i in lo_index + 1..=120 {
        let s = scale_at(i);
        let b = backoff(s);
        best = best.min(b);
        if b <= target_db {
            hi = Some(s);
            break;
        }
        lo = s;
    }
    let Some(mut hi) = hi else {
        return Err(Error::UnreachableBackoff {
            target_db,
            reason: format!("smallest reachable backoff is {best:.2} dB"),
        });
    };
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        let b = backoff(mid);
        if (b - target_db).abs() < 1e-3 {
            return Ok(InputScaling {
                scale: mid,
                backoff_db: b,
            });
        }
        if b > target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = backoff(hi);
    Ok(InputScaling {
        scale: hi,
        backoff_db: b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn synthetic_gan_distortion_level_at_six_db() {
        use crate::analysis::bussgang_decompose;
        use crate::txchain::{design_rrc, shape, QamAlphabet};
        let alphabet = QamAlphabet::new(256).unwrap();
        let mut r = rng::stream(3, &[]);
        let idx: Vec<usize> = (0..1 << 14).map(|_| r.random_range(0..256)).collect();
        let x = shape(&alphabet.map_indices(&idx), &design_rrc(0.3, 20, 4).unwrap());
        let pa = PaModel::MemoryPoly(MemoryPolyParams::synthetic_gan());
        let s = set_backoff(&x, &pa, 6.0).unwrap();
        let xs = x.scaled(s.scale);
        let split = bussgang_decompose(&xs, &pa.apply(&xs)).unwrap();
        let carrier = split.alpha.norm_sqr() * xs.mean_power();
        let dbc = 10.0 * (split.residual.mean_power() / carrier).log10();
        // In-band distortion sits near -28 dBc; linear memory counts toward it.
        assert!((-31.0..-25.0).contains(&dbc), "{dbc}");
    }

    #[test]
    fn saleh_reference_point() {
        let p = SalehParams::REFERENCE;
        let y = p.apply_sample(C64::new(1.0, 0.0));
        assert!((y.norm() - 1.0).abs() < 1e-15);
        assert!((y.arg() - 1.0).abs() < 1e-15);
        assert_eq!(p.apply_sample(C64::default()), C64::default());
        let tiny = 1e-6;
        let y = p.apply_sample(C64::new(tiny, 0.0));
        assert!((y.norm() / tiny - 2.0).abs() < 1e-9);
        assert!(y.arg().abs() < 1e-9);
        assert_eq!(p.peak_output(), 1.0);
    }

    #[test]
    fn saleh_am_am_shape() {
        let p = SalehParams::REFERENCE;
        let grid: Vec<f64> = (1..=400).map(|i| i as f64 * 0.01).collect();
        let v: Vec<f64> = grid.iter().map(|&r| p.am_am(r)).collect();
        for i in 1..grid.len() {
            if grid[i] <= 1.0 {
                assert!(v[i] > v[i - 1]);
            } else if grid[i - 1] >= 1.0 {
                assert!(v[i] < v[i - 1]);
            }
        }
        let max = v.iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saleh_commutes_with_rotation() {
        let p = SalehParams::REFERENCE;
        let mut r = rng::stream(2, &[]);
        for _ in 0..100 {
            let x = rng::complex_gaussian(&mut r, 1.0);
            let rot = C64::from_polar(1.0, r.random_range(-3.0..3.0));
            let d = p.apply_sample(rot * x) - rot * p.apply_sample(x);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn memory_poly_identity_and_cubic() {
        let mut r = rng::stream(4, &[]);
        let x: Vec<C64> = (0..32).map(|_| rng::complex_gaussian(&mut r, 1.0)).collect();
        let mut id = MemoryPolyParams::zeros(1, 1, 1).unwrap();
        id.set(0, 0, 0, C64::new(1.0, 0.0));
        assert_eq!(id.apply(&x), x);
        let mut cubic = MemoryPolyParams::zeros(2, 1, 1).unwrap();
        cubic.set(1, 0, 0, C64::new(1.0, 0.0));
        for (y, v) in cubic.apply(&x).iter().zip(&x) {
            assert!((y - v * v.norm_sqr()).norm() < 1e-15);
        }
    }

    /// Literal triple sum with explicit bounds checks.
    fn naive(p: &MemoryPolyParams, x: &[C64]) -> Vec<C64> {
        let n = x.len() as i64;
        let at = |i: i64| if (0..n).contains(&i) { x[i as usize] } else { C64::default() };
        (0..n)
            .map(|i| {
                let mut acc = C64::default();
                for (k, l, m, c) in p.entries() {
                    acc += c * at(i - l) * at(i - l - m).norm().powi(2 * k as i32);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn memory_poly_matches_naive_loop() {
        let mut r = rng::stream(6, &[]);
        for _ in 0..20 {
            let mut p = MemoryPolyParams::zeros(3, 3, 2).unwrap();
            for k in 0..3 {
                for l in -2..=2 {
                    for m in -1..=1 {
                        p.set(k, l, m, rng::complex_gaussian(&mut r, 0.1));
                    }
                }
            }
            let x: Vec<C64> = (0..32).map(|_| rng::complex_gaussian(&mut r, 1.0)).collect();
            let fast = p.apply(&x);
            let slow = naive(&p, &x);
            let worst = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "{worst}");
        }
    }

    #[test]
    fn memory_poly_linear_in_coefficients() {
        let mut r = rng::stream(8, &[]);
        let x: Vec<C64> = (0..40).map(|_| rng::complex_gaussian(&mut r, 1.0)).collect();
        let mut a = MemoryPolyParams::zeros(2, 2, 2).unwrap();
        let mut b = a.clone();
        let mut sum = a.clone();
        for (k, l, m, _) in a.clone().entries() {
            let ca = rng::complex_gaussian(&mut r, 1.0);
            let cb = rng::complex_gaussian(&mut r, 1.0);
            a.set(k, l, m, ca);
            b.set(k, l, m, cb);
            sum.set(k, l, m, ca * 2.0 + cb * C64::new(0.0, -1.5));
        }
        let ya = a.apply(&x);
        let yb = b.apply(&x);
        for ((s, u), v) in sum.apply(&x).iter().zip(&ya).zip(&yb) {
            assert!((s - (u * 2.0 + v * C64::new(0.0, -1.5))).norm() < 1e-12);
        }
    }

    #[test]
    fn synthetic_gan_has_a_peak() {
        let p = MemoryPolyParams::synthetic_gan();
        let peak = p.peak_output().unwrap();
        assert!(peak.is_finite() && peak > 0.0);
    }

    fn gaussian_signal(n: usize, seed: u64) -> ComplexSignal {
        let mut r = rng::stream(seed, &[]);
        ComplexSignal::new((0..n).map(|_| rng::complex_gaussian(&mut r, 1.0)).collect(), 1)
    }

    #[test]
    fn backoff_bisection_reproduces_target() {
        let x = gaussian_signal(20_000, 9);
        let model = PaModel::Saleh(SalehParams::REFERENCE);
        let s = set_backoff(&x, &model, 9.44).unwrap();
        let measured = model.output_backoff_db(&x.samples, s.scale).unwrap();
        assert!((measured - 9.44).abs() < 0.01, "{measured}");
        assert!((s.backoff_db - measured).abs() < 1e-12);
        assert!(s.scale > 0.0);
    }

    #[test]
    fn backoff_on_memory_polynomial() {
        let x = gaussian_signal(8_000, 10);
        let model = PaModel::MemoryPoly(MemoryPolyParams::synthetic_gan());
        let s = set_backoff(&x, &model, 6.0).unwrap();
        assert!((model.output_backoff_db(&x.samples, s.scale).unwrap() - 6.0).abs() < 0.01);
    }

    #[test]
    fn unreachable_targets() {
        let x = gaussian_signal(4_000, 11);
        assert!(matches!(
            set_backoff(&x, &PaModel::Linear {}, 6.0),
            Err(Error::UnreachableBackoff { .. })
        ));
        // Gaussian drive through Saleh cannot get close to 0 dB backoff.
        assert!(matches!(
            set_backoff(&x, &PaModel::Saleh(SalehParams::REFERENCE), 0.5),
            Err(Error::UnreachableBackoff { .. })
        ));
    }

    #[test]
    fn parses_pa_tables() {
        let saleh = PaModel::from_toml_str(
            "[pa]\nmodel = \"saleh\"\ng0 = 2.0\na_sat = 1.0\nalpha = 2.0\nbeta = 1.0\n",
        )
        .unwrap();
        assert_eq!(saleh, PaModel::Saleh(SalehParams::REFERENCE));
        let mp = PaModel::from_toml_str(
            "[pa]\nmodel = \"memory_poly\"\nk_b = 2\np_b = 1\np_c = 1\n\
             coefficients = [{ k = 0, l = 0, m = 0, re = 1.0 }, { k = 1, l = 0, m = 0, re = -0.1, im = 0.02 }]\n",
        )
        .unwrap();
        let PaModel::MemoryPoly(p) = mp else { panic!() };
        assert_eq!(p.get(1, 0, 0), C64::new(-0.1, 0.02));
        assert!(PaModel::from_toml_str("[pa]\nmodel = \"saleh\"\ng0 = -1.0\na_sat = 1.0\nalpha = 0.0\nbeta = 0.0\n").is_err());
        assert!(PaModel::from_toml_str("[pa]\nmodel = \"linear\"\nextra = 1\n").is_err());
        for orders in ["k_b = 1000000000\np_b = 1\np_c = 1", "k_b = 1\np_b = 9223372036854775807\np_c = 1"] {
            let doc = format!("[pa]\nmodel = \"memory_poly\"\n{orders}\ncoefficients = []\n");
            assert!(PaModel::from_toml_str(&doc).is_err(), "{orders}");
        }
        let round = toml::to_string(&MemoryPolyParams::synthetic_gan()).unwrap();
        let back: MemoryPolyParams = toml::from_str(&round).unwrap();
        assert_eq!(back, MemoryPolyParams::synthetic_gan());
    }
}
