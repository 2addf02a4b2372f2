//! Constant chains turning `Q` into right-hand sides of the integral bounds.
//!
//! Every quantity here is evaluated exactly as printed, including the
//! Hölder exponents in `D^{(1)}` and `D^{(4)}`.

use std::f64::consts::{E, SQRT_2};

use amhd_core::constants::{lattice_constant, lattice_symbol, ConstantValue, ConstantsTable, Provenance};
use serde::{Deserialize, Serialize};

use crate::error::{BoundsError, Result};
use crate::ids::BoundId;

/// `alpha_s = 2/(2s - 1)`.
pub fn alpha(s: f64) -> f64 {
    2.0 / (2.0 * s - 1.0)
}

/// `gamma_s = 2/s`.
pub fn gamma(s: f64) -> f64 {
    2.0 / s
}

/// `alpha_{p,s} = p/(p(s+1) - 3)`.
pub fn alpha_ps(p: f64, s: f64) -> f64 {
    p / (p * (s + 1.0) - 3.0)
}

/// Time-independent inputs of the chains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainInputs {
    #[serde(rename = "Q")]
    pub q: f64,
    pub delta: f64,
    pub nu: f64,
    pub eta: f64,
    pub t0: f64,
    pub t_end: f64,
}

impl ChainInputs {
    pub fn new(q: f64, delta: f64, nu: f64, eta: f64, t0: f64, t_end: f64) -> Result<Self> {
        if !(q >= 0.0) {
            return Err(invalid(format!("Q must be non-negative, got {q}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid(format!("delta must be positive, got {delta}")));
        }
        if !(t_end > t0) {
            return Err(invalid(format!("need T > t0, got T={t_end}, t0={t0}")));
        }
        if !(nu > 0.0 && eta > 0.0) {
            return Err(invalid("nu and eta must be positive".into()));
        }
        Ok(Self {
            q,
            delta,
            nu,
            eta,
            t0,
            t_end,
        })
    }

    fn tau(&self) -> f64 {
        self.t_end - self.t0
    }

    fn min(&self) -> f64 {
        self.nu.min(self.eta)
    }

    fn max(&self) -> f64 {
        self.nu.max(self.eta)
    }
}

fn invalid(msg: String) -> BoundsError {
    BoundsError::Core(amhd_core::CoreError::InvalidParameter(msg))
}

/// `Q' = delta^{-1} max(9Q/(sqrt 2 min), (9Q(T - t0)/(2 min))^{1/2})`.
pub fn q_prime(c: &ChainInputs) -> f64 {
    let m = c.min();
    (9.0 * c.q / (SQRT_2 * m)).max((9.0 * c.q * c.tau() / (2.0 * m)).sqrt()) / c.delta
}

/// `Q''_s = (9Q/min)^{alpha_s/2}((T - t0)^{1 - alpha_s/2} + Q'^{1 - alpha_s/2})`, `s >= 1`.
pub fn q_double_prime(c: &ChainInputs, s: f64) -> Result<f64> {
    if !(s >= 1.0) {
        return Err(invalid(format!("Q''_s needs s >= 1, got {s}")));
    }
    let a = alpha(s);
    let e = 1.0 - a / 2.0;
    Ok((9.0 * c.q / c.min()).powf(a / 2.0) * (c.tau().powf(e) + q_prime(c).powf(e)))
}

/// `Q~_s = ((s - 1)/(e delta))^{(s-1) alpha_s} Q''_s`, `s > 1`.
pub fn q_tilde(c: &ChainInputs, s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(invalid(format!("Q~_s needs s > 1 (s <= 1 is the energy-only regime), got {s}")));
    }
    let k = ((s - 1.0) / (E * c.delta)).powf((s - 1.0) * alpha(s));
    Ok(k * q_double_prime(c, s)?)
}

/// Lattice constant from the table, or computed in closed form.
pub fn lattice(table: &ConstantsTable, p: f64, a: f64) -> Result<ConstantValue> {
    match table.lattice(p, a) {
        Ok(v) => Ok(v),
        Err(_) => Ok(ConstantValue::exact(lattice_symbol(p, a), lattice_constant(p, a)?)),
    }
}

/// `Q~^W_s = (sqrt 2 C_{2s-2, 2 delta})^{alpha_{s+3/2}} Q''_{s+3/2}`, `s > -1/2`.
pub fn q_tilde_w(c: &ChainInputs, s: f64, table: &ConstantsTable) -> Result<(f64, ConstantValue)> {
    if !(s > -0.5) {
        return Err(invalid(format!("Q~^W_s needs s > -1/2, got {s}")));
    }
    let l = lattice(table, 2.0 * s - 2.0, 2.0 * c.delta)?;
    let v = (SQRT_2 * l.value).powf(alpha(s + 1.5)) * q_double_prime(c, s + 1.5)?;
    Ok((v, l))
}

/// `D^{(1)}_s = D^{(1,1)}(Q'^{alpha/2} (T-t0)^{1-alpha/2} + Q') + D^{(1,2)} Q''_{s/2+5/4}`
/// with `alpha = alpha_{s+2}`, `s >= -1/2`.
pub fn d1(c: &ChainInputs, s: f64, table: &ConstantsTable) -> Result<(f64, Vec<ConstantValue>)> {
    BoundId::B36_1.check(s)?;
    let cp = table.c_prime_half()?;
    let a = alpha(s + 2.0);
    let k = (2.0 * s + 1.0) / (2.0 * E * c.delta);
    let d11 = (2.0 * c.max().powi(2) * k.powf(2.0 * s + 1.0)).powf(1.0 / (2.0 * s + 3.0));
    let d12 = (2.0 * cp.value).powf(2.0 / (2.0 * s + 3.0)) * k.powf((2.0 * s + 1.0) / (2.0 * s + 3.0));
    let qp = q_prime(c);
    let v = d11 * (qp.powf(a / 2.0) * c.tau().powf(1.0 - a / 2.0) + qp) + d12 * q_double_prime(c, s / 2.0 + 1.25)?;
    Ok((v, vec![cp]))
}

/// `D^{(2)}_s` for `-5/2 < s <= -1/2`. No closed form is printed; this one
/// follows from the bound on `||xi||_s^2` and the energy-type bound.
///
/// With `c = 2/(2s+5)`, `a = (2s+5)/4`, `m = min(nu, eta)`, `M = max(nu, eta)`,
/// `tau = T - t0`, `Y = 4Q` (bounds `X~_0`) and `I = 9Q/m` (bounds
/// `int X~_1`):
///
/// * `||xi||_s^2 <= Diff + NL` with `Diff = 2M^2 X~_{s+2}` and
///   `NL = 4 C~'^2 (X~_a)^2 <= 4 C~'^2 X~_1^{2a} X~_0^{2(1-a)}`
///   (interpolation per field, then Hölder on the sum).
/// * `(Diff + NL)^c <= k (Diff^c + NL^c)`, `k = max(1, 2^{c-1})`.
/// * `NL^c <= (4 C~'^2)^c X~_1 Y^{(1-a)/a}` since `2ac = 1`; its integral
///   is at most `(4 C~'^2)^c Y^{(1-a)/a} I`.
/// * `s <= -2`: `X~_{s+2} <= Y`, so `int Diff^c <= (2M^2 Y)^c tau`.
/// * `-2 < s <= -1`: `X~_{s+2} <= X~_1^th Y^{1-th}`, `th = s+2`, `c th <= 1`,
///   and Hölder in time gives `(2M^2)^c Y^{c(1-th)} I^{c th} tau^{1-c th}`.
/// * `-1 < s <= -1/2`: `X~_{s+2} <= X~_1^{1-th} X~_{3/2}^{th}`, `th = 2(s+1)`;
///   with `p1 = c(1-th)`, `p2 = 2 c th`, `p1 + p2 <= 1`, Hölder against
///   `int X~_1 <= I` and `int X~_{3/2}^{1/2} <= Q'` gives
///   `(2M^2)^c I^{p1} Q'^{p2} tau^{1-p1-p2}`.
pub fn d2(c: &ChainInputs, s: f64, table: &ConstantsTable) -> Result<(f64, Vec<ConstantValue>)> {
    BoundId::B36_2.check(s)?;
    let ctp = table.c_tilde_prime(s)?;
    let e = 2.0 / (2.0 * s + 5.0);
    let a = (2.0 * s + 5.0) / 4.0;
    let k = 2f64.powf(e - 1.0).max(1.0);
    let y = 4.0 * c.q;
    let i1 = 9.0 * c.q / c.min();
    let tau = c.tau();
    let m2 = 2.0 * c.max().powi(2);
    let nl = (4.0 * ctp.value.powi(2)).powf(e) * y.powf((1.0 - a) / a) * i1;
    let diff = if s <= -2.0 {
        (m2 * y).powf(e) * tau
    } else if s <= -1.0 {
        let th = s + 2.0;
        m2.powf(e) * y.powf(e * (1.0 - th)) * i1.powf(e * th) * tau.powf(1.0 - e * th)
    } else {
        let th = 2.0 * (s + 1.0);
        let p1 = e * (1.0 - th);
        let p2 = 2.0 * e * th;
        m2.powf(e) * i1.powf(p1) * q_prime(c).powf(p2) * tau.powf((1.0 - p1 - p2).max(0.0))
    };
    Ok((k * (diff + nl), vec![ctp]))
}

/// `D^{(3)}_s = 2(max(nu^2, eta^2) X~_0 + c_{-s-1}^2 X~_0^2)`, instantaneous.
pub fn d3(nu: f64, eta: f64, x0_tilde: f64, c_sup: f64) -> f64 {
    2.0 * (nu.max(eta).powi(2) * x0_tilde + c_sup * c_sup * x0_tilde * x0_tilde)
}

/// `D^{(4)}_s = D^{(4,1)}(Q'^{1/(s+3)} (T-t0)^{(s+2)/(s+3)} + Q') + D^{(4,2)} Q''_{s/2+2}`,
/// `s > -2`.
pub fn d4(c: &ChainInputs, s: f64, table: &ConstantsTable) -> Result<(f64, Vec<ConstantValue>)> {
    BoundId::B36_4.check(s)?;
    let cp = table.c_prime_half()?;
    let l = lattice(table, 2.0 * s + 1.0, 2.0 * c.delta)?;
    let e = 1.0 / (s + 3.0);
    let d41 = (2.0 * l.value * c.max()).powf(e);
    let d42 = (8f64.sqrt() * l.value * cp.value).powf(e);
    let qp = q_prime(c);
    let v = d41 * (qp.powf(e) * c.tau().powf((s + 2.0) * e) + qp) + d42 * q_double_prime(c, s / 2.0 + 2.0)?;
    Ok((v, vec![cp, l]))
}

/// Right-hand side of the Lp bound for `p`, `s`:
/// `2^{alpha/2} C_{3/2-3/p}^{alpha} Q~_{s+3/2-3/p}`, `alpha = alpha_{p,s}`.
pub fn cor51(c: &ChainInputs, p: f64, s: f64, table: &ConstantsTable) -> Result<(f64, Vec<ConstantValue>)> {
    let r = s + 1.5 - 3.0 / p;
    let a = alpha_ps(p, s);
    let emb = table.embedding(1.5 - 3.0 / p)?;
    let v = 2f64.powf(a / 2.0) * emb.value.powf(a) * q_tilde(c, r)?;
    Ok((v, vec![emb]))
}

/// All chain values available at `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsChain {
    pub inputs: ChainInputs,
    pub s: f64,
    pub q_prime: f64,
    pub q_double: Option<f64>,
    pub q_tilde: Option<f64>,
    pub q_tilde_w: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    /// Coefficients `(2 max(nu^2, eta^2), 2 c_{-s-1}^2)` of `D^{(3)}` in
    /// `X~_0` and `X~_0^2`.
    pub d3_coeffs: Option<(f64, f64)>,
    pub d4: Option<f64>,
    pub constants_used: Vec<ConstantValue>,
}

/// Evaluates every chain member defined at `s`; members outside their
/// range are `None`.
pub fn constants_chain(inputs: ChainInputs, s: f64, table: &ConstantsTable) -> Result<ConstantsChain> {
    let mut used = Vec::new();
    let mut keep = |v: Vec<ConstantValue>| {
        for c in v {
            if !used.iter().any(|u: &ConstantValue| u.symbol == c.symbol) {
                used.push(c);
            }
        }
    };
    let q_double = (s >= 1.0).then(|| q_double_prime(&inputs, s)).transpose()?;
    let q_tilde = (s > 1.0).then(|| q_tilde(&inputs, s)).transpose()?;
    let q_tilde_w = if s > -0.5 {
        let (v, l) = q_tilde_w(&inputs, s, table)?;
        keep(vec![l]);
        Some(v)
    } else {
        None
    };
    let d1 = if BoundId::B36_1.accepts(s) {
        let (v, c) = d1(&inputs, s, table)?;
        keep(c);
        Some(v)
    } else {
        None
    };
    let d2 = if BoundId::B36_2.accepts(s) {
        let (v, c) = d2(&inputs, s, table)?;
        keep(c);
        Some(v)
    } else {
        None
    };
    let d3_coeffs = if BoundId::B36_3.accepts(s) {
        let c = table.sup(-s - 1.0)?;
        let out = (2.0 * inputs.max().powi(2), 2.0 * c.value * c.value);
        keep(vec![c]);
        Some(out)
    } else {
        None
    };
    let d4 = if BoundId::B36_4.accepts(s) {
        let (v, c) = d4(&inputs, s, table)?;
        keep(c);
        Some(v)
    } else {
        None
    };
    Ok(ConstantsChain {
        inputs,
        s,
        q_prime: q_prime(&inputs),
        q_double,
        q_tilde,
        q_tilde_w,
        d1,
        d2,
        d3_coeffs,
        d4,
        constants_used: used,
    })
}

/// Weakest provenance among `constants`.
pub fn weakest(constants: &[ConstantValue]) -> Provenance {
    constants.iter().fold(Provenance::Exact, |p, c| p.combine(c.provenance))
}
