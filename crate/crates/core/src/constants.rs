//! Embedding and lattice constants with provenance tracking.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{CoreError, Result};
use crate::grid::Grid;
use crate::modes::ModeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    CertifiedUpper,
    UserSupplied,
    Estimated,
}

impl Provenance {
    /// Weakest of two provenances (estimated dominates).
    pub fn combine(self, other: Self) -> Self {
        self.max(other)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub symbol: String,
    /// Value before the safety factor.
    pub raw: f64,
    /// Value used in bounds.
    pub value: f64,
    pub provenance: Provenance,
    pub safety_factor: f64,
}

/// A derived constant together with the weakest provenance of its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub symbol: String,
    pub value: f64,
    pub provenance: Provenance,
    pub inputs: Vec<String>,
}

impl ConstantValue {
    fn leaf(e: &ConstantEntry) -> Self {
        Self {
            symbol: e.symbol.clone(),
            value: e.value,
            provenance: e.provenance,
            inputs: vec![e.symbol.clone()],
        }
    }

    pub fn exact(symbol: String, value: f64) -> Self {
        Self {
            symbol,
            value,
            provenance: Provenance::Exact,
            inputs: Vec::new(),
        }
    }

    /// Product `self^a * other^b` under a new symbol.
    pub fn combine(symbol: String, parts: &[(&ConstantValue, f64)], scale: f64) -> Self {
        let mut value = scale;
        let mut prov = Provenance::Exact;
        let mut inputs = Vec::new();
        for (c, p) in parts {
            value *= c.value.powf(*p);
            prov = prov.combine(c.provenance);
            for s in &c.inputs {
                if !inputs.contains(s) {
                    inputs.push(s.clone());
                }
            }
        }
        Self {
            symbol,
            value,
            provenance: prov,
            inputs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    /// Collocation grid points per dimension for `L^q` quadrature.
    pub resolution: usize,
    pub trials: usize,
    pub seed: u64,
    /// Trial fields use modes `|n| <= cutoff`.
    pub cutoff: u32,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            resolution: 16,
            trials: 48,
            seed: 20_240_611,
            cutoff: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    pub safety_factor: f64,
    pub estimator: EstimatorSettings,
    pub entries: BTreeMap<String, ConstantEntry>,
}

impl Default for ConstantsTable {
    fn default() -> Self {
        Self::new(2.0, EstimatorSettings::default())
    }
}

fn key_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn embedding_symbol(s: f64) -> String {
    format!("C_{}", key_num(s))
}

pub fn sup_symbol(p: f64) -> String {
    format!("c_{}", key_num(p))
}

pub fn lattice_symbol(p: f64, a: f64) -> String {
    format!("C_{},{}", key_num(p), key_num(a))
}

impl ConstantsTable {
    pub fn new(safety_factor: f64, estimator: EstimatorSettings) -> Self {
        Self {
            safety_factor,
            estimator,
            entries: BTreeMap::new(),
        }
    }

    /// Makes sure `C_s` is present, estimating it if needed.
    pub fn ensure_embedding(&mut self, s: f64) -> Result<()> {
        let sym = embedding_symbol(s);
        if self.entries.contains_key(&sym) {
            return Ok(());
        }
        let entry = if key_num(s) == "0" {
            ConstantEntry {
                symbol: sym.clone(),
                raw: 1.0,
                value: 1.0,
                provenance: Provenance::Exact,
                safety_factor: 1.0,
            }
        } else {
            let e = &self.estimator;
            let est = estimate_cs(s, e.resolution, e.trials, e.seed, e.cutoff)?;
            ConstantEntry {
                symbol: sym.clone(),
                raw: est.raw,
                value: est.raw * self.safety_factor,
                provenance: Provenance::Estimated,
                safety_factor: self.safety_factor,
            }
        };
        self.entries.insert(sym, entry);
        Ok(())
    }

    pub fn ensure_sup(&mut self, p: f64) -> Result<()> {
        let sym = sup_symbol(p);
        if !self.entries.contains_key(&sym) {
            let v = certified_cp(p)?;
            self.entries.insert(
                sym.clone(),
                ConstantEntry {
                    symbol: sym,
                    raw: v,
                    value: v,
                    provenance: Provenance::CertifiedUpper,
                    safety_factor: 1.0,
                },
            );
        }
        Ok(())
    }

    pub fn ensure_lattice(&mut self, p: f64, a: f64) -> Result<()> {
        let sym = lattice_symbol(p, a);
        if !self.entries.contains_key(&sym) {
            let v = lattice_constant(p, a)?;
            self.entries.insert(
                sym.clone(),
                ConstantEntry {
                    symbol: sym,
                    raw: v,
                    value: v,
                    provenance: Provenance::Exact,
                    safety_factor: 1.0,
                },
            );
        }
        Ok(())
    }

    /// Inserts or replaces a user-supplied value under `symbol`.
    pub fn set_user(&mut self, symbol: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("constant {symbol} must be positive")));
        }
        self.entries.insert(
            symbol.to_string(),
            ConstantEntry {
                symbol: symbol.to_string(),
                raw: value,
                value,
                provenance: Provenance::UserSupplied,
                safety_factor: 1.0,
            },
        );
        Ok(())
    }

    fn get(&self, sym: &str) -> Result<ConstantValue> {
        self.entries
            .get(sym)
            .map(ConstantValue::leaf)
            .ok_or_else(|| CoreError::MissingConstant(sym.to_string()))
    }

    /// `C_s` of the embedding `|f|_{6/(3-2s)} <= C_s ||f||_s`.
    pub fn embedding(&self, s: f64) -> Result<ConstantValue> {
        self.get(&embedding_symbol(s))
    }

    /// `c_p` of `max |f| <= c_p ||f||_p`.
    pub fn sup(&self, p: f64) -> Result<ConstantValue> {
        self.get(&sup_symbol(p))
    }

    /// `C_{p,a}` bounding the weighted lattice sums.
    pub fn lattice(&self, p: f64, a: f64) -> Result<ConstantValue> {
        self.get(&lattice_symbol(p, a))
    }

    /// `C'_s = C_s C_{3/2-s}`.
    pub fn c_prime(&self, s: f64) -> Result<ConstantValue> {
        let a = self.embedding(s)?;
        let b = self.embedding(1.5 - s)?;
        Ok(ConstantValue::combine(format!("C'_{}", key_num(s)), &[(&a, 1.0), (&b, 1.0)], 1.0))
    }

    /// `C'_{1/2} = C_{1/2} C_1`.
    pub fn c_prime_half(&self) -> Result<ConstantValue> {
        self.c_prime(0.5)
    }

    /// `C''_s = C'_s gamma^{-(5-2s)/(2s-1)}`.
    pub fn c_double_prime(&self, s: f64, gamma: f64) -> Result<ConstantValue> {
        let c = self.c_prime(s)?;
        let g = ConstantValue::exact("gamma".into(), gamma);
        Ok(ConstantValue::combine(
            format!("C''_{}", key_num(s)),
            &[(&c, 1.0), (&g, -(5.0 - 2.0 * s) / (2.0 * s - 1.0))],
            1.0,
        ))
    }

    /// `C~_s`: 1 on `[-1, 0]`, `2^{s+1}` for `s > 0`.
    pub fn c_tilde(&self, s: f64) -> Result<ConstantValue> {
        if s < -1.0 {
            return Err(CoreError::InvalidParameter(format!("C~_s defined for s >= -1, got {s}")));
        }
        let v = if s <= 0.0 { 1.0 } else { 2f64.powf(s + 1.0) };
        Ok(ConstantValue::exact(format!("C~_{}", key_num(s)), v))
    }

    /// `C'''_s = (2 C'_{1/2} C~_s)^2`.
    pub fn c_triple_prime(&self, s: f64) -> Result<ConstantValue> {
        let c = self.c_prime_half()?;
        let t = self.c_tilde(s)?;
        Ok(ConstantValue::combine(
            format!("C'''_{}", key_num(s)),
            &[(&c, 2.0), (&t, 2.0)],
            4.0,
        ))
    }

    /// `C~'_s`: `C_{(1-2s)/4} C_{(2s+5)/4}` on `(-1, -1/2]`,
    /// `C_{-1-s} C_{(2s+5)/4}^2` on `(-5/2, -1]`.
    pub fn c_tilde_prime(&self, s: f64) -> Result<ConstantValue> {
        let sym = format!("C~'_{}", key_num(s));
        if s > -1.0 && s <= -0.5 {
            let a = self.embedding((1.0 - 2.0 * s) / 4.0)?;
            let b = self.embedding((2.0 * s + 5.0) / 4.0)?;
            Ok(ConstantValue::combine(sym, &[(&a, 1.0), (&b, 1.0)], 1.0))
        } else if s > -2.5 && s <= -1.0 {
            let a = self.embedding(-1.0 - s)?;
            let b = self.embedding((2.0 * s + 5.0) / 4.0)?;
            Ok(ConstantValue::combine(sym, &[(&a, 1.0), (&b, 2.0)], 1.0))
        } else {
            Err(CoreError::InvalidParameter(format!("C~'_s defined for -5/2 < s <= -1/2, got {s}")))
        }
    }

    /// Embedding indices needed by [`ConstantsTable::c_tilde_prime`].
    pub fn c_tilde_prime_inputs(s: f64) -> Vec<f64> {
        if s > -1.0 {
            vec![(1.0 - 2.0 * s) / 4.0, (2.0 * s + 5.0) / 4.0]
        } else {
            vec![-1.0 - s, (2.0 * s + 5.0) / 4.0]
        }
    }

    /// Symbols of estimated entries.
    pub fn estimated_symbols(&self) -> Vec<String> {
        self.entries
            .values()
            .filter(|e| e.provenance == Provenance::Estimated)
            .map(|e| e.symbol.clone())
            .collect()
    }

    /// Re-estimates every estimated entry with `factor` times the trials.
    pub fn reestimate(&self, factor: usize) -> Result<Self> {
        let mut out = self.clone();
        out.estimator.trials *= factor.max(1);
        for sym in self.estimated_symbols() {
            out.entries.remove(&sym);
            let s: f64 = sym[2..]
                .parse()
                .map_err(|_| CoreError::InvalidParameter(format!("bad symbol {sym}")))?;
            out.ensure_embedding(s)?;
        }
        Ok(out)
    }
}

/// `C_{p,a} = (4 pi e^{a sqrt(3)/2} 2^{|p|} a^{-(p+3)} Gamma(p+3))^{1/2}`.
pub fn lattice_constant(p: f64, a: f64) -> Result<f64> {
    if !(p > -3.0) || !(a > 0.0) || !p.is_finite() || !a.is_finite() {
        return Err(CoreError::InvalidParameter(format!(
            "lattice constant needs p > -3 and a > 0 (p={p}, a={a})"
        )));
    }
    let ln_c2 = (4.0 * PI).ln() + a * 3f64.sqrt() / 2.0 + p.abs() * 2f64.ln() - (p + 3.0) * a.ln() + ln_gamma(p + 3.0);
    let v = (0.5 * ln_c2).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CoreError::InvalidParameter(format!("lattice constant overflows for p={p}, a={a}")))
    }
}

/// Radius of the exact part of the lattice sum in [`certified_cp`].
pub const CP_RADIUS: usize = 1000;

/// `r3[k] = #{n in Z^3 : |n|^2 = k}` for `k <= CP_RADIUS^2`.
fn lattice_counts() -> &'static [u32] {
    static COUNTS: OnceLock<Vec<u32>> = OnceLock::new();
    COUNTS.get_or_init(|| {
        let r = CP_RADIUS as i64;
        let kmax = (r * r) as usize;
        let mut r2 = vec![0u32; kmax + 1];
        for a in 0..=r {
            let a2 = (a * a) as usize;
            let ma = if a == 0 { 1 } else { 2 };
            for b in 0..=r {
                let q = a2 + (b * b) as usize;
                if q > kmax {
                    break;
                }
                r2[q] += ma * if b == 0 { 1 } else { 2 };
            }
        }
        let mut r3 = vec![0u32; kmax + 1];
        for c in -r..=r {
            let c2 = (c * c) as usize;
            let (dst, src) = (&mut r3[c2..], &r2[..=kmax - c2]);
            for (d, s) in dst.iter_mut().zip(src) {
                *d += *s;
            }
        }
        r3
    })
}

/// Certified upper bound `c_p <= (sum_{n != 0} |n|^{-2p})^{1/2}`: exact
/// lattice sum over `|n| <= 1000` plus an integral overestimate of the tail.
pub fn certified_cp(p: f64) -> Result<f64> {
    if !(p > 1.5) || !p.is_finite() {
        return Err(CoreError::InvalidParameter(format!("c_p needs p > 3/2, got {p}")));
    }
    let counts = lattice_counts();
    let mut acc = crate::scalar::Compensated::<f64>::new();
    for k in (1..counts.len()).rev() {
        if counts[k] != 0 {
            acc.add(counts[k] as f64 * (k as f64).powf(-p));
        }
    }
    let r = CP_RADIUS as f64;
    let h = 3f64.sqrt() / 2.0;
    let tail = (1.0 + h / r).powf(2.0 * p) * 4.0 * PI * (r - h).powf(3.0 - 2.0 * p) / (2.0 * p - 3.0);
    Ok((acc.value() + tail).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsEstimate {
    /// Largest ratio `|f|_q / ||f||_s` found, before any safety factor.
    pub raw: f64,
    /// Index of the trial that attained it.
    pub best_trial: usize,
}

struct ScalarProbe {
    modes: std::sync::Arc<ModeSet>,
    grid: Grid<f64>,
    buf: Vec<Complex<f64>>,
    weights: Vec<f64>,
    q: f64,
}

impl ScalarProbe {
    /// Ratio for a real scalar field given on the positive half.
    fn ratio(&mut self, half: &[Complex<f64>]) -> f64 {
        let m = &self.modes;
        let off = m.len() / 2;
        let mut hs = 0.0;
        for (j, c) in half.iter().enumerate() {
            hs += 2.0 * self.weights[off + j] * c.norm_sqr();
        }
        if hs == 0.0 {
            return 0.0;
        }
        self.grid.scatter(&mut self.buf, |i| {
            if i >= off {
                half[i - off]
            } else {
                half[m.conj(i) - off].conj()
            }
        });
        self.grid.to_physical(&mut self.buf);
        let np = self.buf.len() as f64;
        let lq = (self.buf.iter().map(|z| z.re.abs().powf(self.q)).sum::<f64>() / np).powf(1.0 / self.q);
        lq / hs.sqrt()
    }
}

/// Empirical `C_s`: maximises `|f|_{6/(3-2s)} / ||f||_s` over real scalar
/// zero-mean trial fields with modes `|n| <= cutoff`, starting from
/// `cos(x_3)` and seeded random fields refined by stochastic ascent.
/// Trial `i` depends only on `(seed, i)`, so more trials never lower the
/// result.
pub fn estimate_cs(s: f64, resolution: usize, trials: usize, seed: u64, cutoff: u32) -> Result<CsEstimate> {
    if !(s > 0.0 && s < 1.5) {
        return Err(CoreError::InvalidParameter(format!("C_s estimation needs 0 < s < 3/2, got {s}")));
    }
    if cutoff == 0 || resolution <= 2 * cutoff as usize || trials == 0 {
        return Err(CoreError::InvalidParameter(
            "estimator needs cutoff >= 1, resolution > 2 cutoff and at least one trial".into(),
        ));
    }
    let modes = ModeSet::shared(cutoff);
    let grid = Grid::new(&modes, resolution);
    let buf = grid.buffer();
    let weights = (0..modes.len()).map(|i| (modes.norm2(i) as f64).powf(s)).collect();
    let mut probe = ScalarProbe {
        modes: modes.clone(),
        grid,
        buf,
        weights,
        q: 6.0 / (3.0 - 2.0 * s),
    };
    let half_len = modes.len() - modes.len() / 2;
    let off = modes.len() / 2;
    let mut best = CsEstimate {
        raw: 0.0,
        best_trial: 0,
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut c: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); half_len];
        if trial == 0 {
            let j = modes.index_of(crate::modes::WaveVector::new(0, 0, 1)).expect("unit mode") - off;
            c[j] = Complex::new(0.5, 0.0);
        } else {
            // peaked (positive real) and random-phase families
            let decay = s + rng.gen_range(0.5..3.0);
            let peaked = trial % 2 == 1;
            for (j, z) in c.iter_mut().enumerate() {
                let r = modes.vector(off + j).norm();
                let g: f64 = StandardNormal.sample(&mut rng);
                let amp = r.powf(-decay);
                *z = if peaked {
                    Complex::new(amp * (1.0 + 0.3 * g), 0.0)
                } else {
                    let h: f64 = StandardNormal.sample(&mut rng);
                    Complex::new(amp * g, amp * h)
                };
            }
        }
        let mut cur = probe.ratio(&c);
        let mut step = 0.3;
        for _ in 0..60 {
            let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
            let trial_c: Vec<Complex<f64>> = c
                .iter()
                .map(|z| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    let h: f64 = StandardNormal.sample(&mut rng);
                    z + Complex::new(g, h) * (step * scale / (half_len as f64).sqrt())
                })
                .collect();
            let r = probe.ratio(&trial_c);
            if r > cur {
                cur = r;
                c = trial_c;
            } else {
                step *= 0.9;
            }
        }
        if cur > best.raw {
            best = CsEstimate {
                raw: cur,
                best_trial: trial,
            };
        }
    }
    Ok(best)
}
