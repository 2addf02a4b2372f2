//! The energy-type bound for the transformed fields and the balance
//! identity they satisfy.

use serde::{Deserialize, Serialize};

use super::phi::{transform, PhiState};
use super::sigma::sigma_p;
use crate::constants::{ConstantValue, ConstantsTable};
use crate::error::{CoreError, Result};
use crate::field::MhdState;
use crate::galerkin::rhs::Convolver;
use crate::galerkin::trace::TraceArchive;
use crate::verdict::{ratio, Verdict};

/// Largest admissible `delta`: `min(nu, eta) / (18 sqrt(2) C'_{1/2})`.
pub fn delta_max(table: &ConstantsTable, nu: f64, eta: f64) -> Result<f64> {
    let c = table.c_prime_half()?;
    Ok(delta_max_from(c.value, nu, eta))
}

pub fn delta_max_from(c_prime_half: f64, nu: f64, eta: f64) -> f64 {
    nu.min(eta) / (18.0 * std::f64::consts::SQRT_2 * c_prime_half)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub delta: f64,
    pub delta_max: f64,
    pub delta_admissible: bool,
    pub t0: f64,
    pub t_end: f64,
    pub phi0: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    /// `Q <= 0` for nonzero data; the bound then cannot hold.
    pub q_nonpositive: bool,
    /// `(9/4)(||v~||_0^2 + ||b~||_0^2)` at `t_end`.
    pub lhs_terminal: f64,
    pub lhs_integral: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    pub c_prime_half: ConstantValue,
}

/// Per-sample data of the bound: times, integrand, `phi`, `X~_0`, plus `Q`.
pub struct Theorem2Series {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub integrand: Vec<f64>,
    pub x0: Vec<f64>,
    pub q: f64,
}

/// Checks that consecutive samples are at most `2 * output_stride * dt`
/// apart.
pub fn check_density(trace: &TraceArchive) -> Result<()> {
    let cfg = trace.config();
    let limit = 2.0 * cfg.output_stride as f64 * cfg.dt * (1.0 + 1e-9);
    for w in trace.rows.windows(2) {
        let gap = w[1][0] - w[0][0];
        if gap > limit {
            return Err(CoreError::TraceTooSparse { gap, limit });
        }
    }
    Ok(())
}

/// Restricts `trace` to `[t0, t_end]` and checks that a sample sits at
/// `t_end`.
pub fn window(trace: &TraceArchive, t_end: f64) -> Result<TraceArchive> {
    let t = trace.times();
    let (Some(&first), Some(&last)) = (t.first(), t.last()) else {
        return Err(CoreError::Trace("empty trace".into()));
    };
    let slack = 1e-9 * t_end.abs().max(1.0);
    if t_end < first - slack || t_end > last + slack {
        return Err(CoreError::TimeOutOfRange(t_end));
    }
    let w = trace.truncated(t_end + slack);
    let end = *w.times().last().unwrap();
    if (end - t_end).abs() > slack {
        return Err(CoreError::Trace(format!("no sample at t={t_end} (closest earlier sample at t={end})")));
    }
    Ok(w)
}

/// Series of the bound, from the `phi` columns when they were recorded with
/// the same `delta`, otherwise from stored states at every sample.
pub fn theorem2_series(trace: &TraceArchive, delta: f64) -> Result<Theorem2Series> {
    let cfg = trace.config();
    let t = trace.times();
    let recorded = trace.manifest.delta.is_some_and(|d| (d - delta).abs() <= 1e-15 * delta.abs())
        && trace.column_index("lhs29_integrand").is_some()
        && trace.column_index("x0_tilde").is_some();
    if recorded {
        let q = trace.column("Q")?;
        return Ok(Theorem2Series {
            phi: trace.column("phi")?,
            integrand: trace.column("lhs29_integrand")?,
            x0: trace.column("x0_tilde")?,
            q: q[0],
            t,
        });
    }
    let mut out = Theorem2Series {
        t: t.clone(),
        phi: Vec::with_capacity(t.len()),
        integrand: Vec::with_capacity(t.len()),
        x0: Vec::with_capacity(t.len()),
        q: 0.0,
    };
    for i in 0..t.len() {
        if !trace.has_state(i) {
            return Err(CoreError::Trace(format!(
                "no phi column for delta={delta} and no stored state at t={}",
                t[i]
            )));
        }
        let ps = transform(&*trace.state(i)?, delta)?;
        if i == 0 {
            out.q = ps.energy_q();
        }
        out.phi.push(ps.phi);
        out.integrand.push(ps.dissipation(cfg.nu, cfg.eta));
        out.x0.push(ps.x(0.0));
    }
    Ok(out)
}

/// Trapezoidal integral of `y` over `t`.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tt, yy)| 0.5 * (tt[1] - tt[0]) * (yy[0] + yy[1]))
        .sum()
}

/// Checks `(9/4) X~_0(T) + int_{t0}^T (nu(...) + eta(...)) dt <= 9 Q`.
pub fn verify_theorem2(trace: &TraceArchive, delta: f64, t_end: f64, table: &ConstantsTable) -> Result<Theorem2Report> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(CoreError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let cfg = trace.config();
    let c = table.c_prime_half()?;
    let dmax = delta_max_from(c.value, cfg.nu, cfg.eta);
    let w = window(trace, t_end)?;
    check_density(&w)?;
    let series = theorem2_series(&w, delta)?;
    let lhs_terminal = 2.25 * series.x0.last().copied().unwrap_or(0.0);
    let lhs_integral = trapezoid(&series.t, &series.integrand);
    let rhs = 9.0 * series.q;
    let lhs = lhs_terminal + lhs_integral;
    let admissible = delta <= dmax;
    let verdict = if !admissible {
        Verdict::Informational
    } else {
        Verdict::compare(lhs, rhs)
    };
    Ok(Theorem2Report {
        delta,
        delta_max: dmax,
        delta_admissible: admissible,
        t0: series.t[0],
        t_end,
        phi0: series.phi[0],
        q: series.q,
        q_nonpositive: series.q <= 0.0 && series.x0[0] > 0.0,
        lhs_terminal,
        lhs_integral,
        rhs,
        ratio: ratio(lhs, rhs),
        verdict,
        c_prime_half: c,
    })
}

/// Terms of the balance identity at one instant.
#[derive(Clone, Copy, Debug)]
pub struct BalanceTerms {
    pub t: f64,
    /// `1/2 (1 + delta Phi^3 X~_2)`.
    pub factor: f64,
    /// `X~_{3/2}`.
    pub x32: f64,
    /// `nu ||v~||_{5/2}^2 + eta ||b~||_{5/2}^2`.
    pub dissipation: f64,
    /// `i Sigma_3`.
    pub sigma3: f64,
}

impl BalanceTerms {
    pub fn of(conv: &mut Convolver<f64>, state: &MhdState<f64>, ps: &PhiState<f64>) -> Result<Self> {
        Ok(Self {
            t: state.t,
            factor: 0.5 * (1.0 + ps.delta * ps.phi.powi(3) * ps.x(2.0)),
            x32: ps.x(1.5),
            dissipation: state.nu * ps.xv(2.5) + state.eta * ps.xb(2.5),
            sigma3: sigma_p(conv, state, ps, 3.0)?,
        })
    }

    pub fn from_state(conv: &mut Convolver<f64>, state: &MhdState<f64>, delta: f64) -> Result<Self> {
        let ps = transform(state, delta)?;
        Self::of(conv, state, &ps)
    }
}

/// Residuals of
/// `1/2 (1 + delta Phi^3 X~_2) dX~_{3/2}/dt + nu ||v~||_{5/2}^2
///  + eta ||b~||_{5/2}^2 - i Sigma_3`
/// on each interval between consecutive samples: the derivative is the
/// difference quotient and the other terms are interval averages, so the
/// residual is second order in the spacing.
pub fn balance_residual(samples: &[BalanceTerms]) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(CoreError::InvalidParameter("balance residual needs at least two samples".into()));
    }
    samples
        .windows(2)
        .map(|w| {
            let h = w[1].t - w[0].t;
            if !(h > 0.0) {
                return Err(CoreError::Trace("sample times are not strictly increasing".into()));
            }
            let avg = |f: fn(&BalanceTerms) -> f64| 0.5 * (f(&w[0]) + f(&w[1]));
            Ok(avg(|b| b.factor) * (w[1].x32 - w[0].x32) / h + avg(|b| b.dissipation) - avg(|b| b.sigma3))
        })
        .collect()
}

/// Balance residuals along the stored states of a trace.
pub fn balance_residual_trace(trace: &TraceArchive, delta: f64) -> Result<Vec<f64>> {
    let idx = trace.state_indices();
    let first = trace.state(*idx.first().ok_or_else(|| CoreError::Trace("no stored states".into()))?)?;
    let mut conv = Convolver::new(first.modes().clone());
    let terms = idx
        .iter()
        .map(|&i| BalanceTerms::from_state(&mut conv, &*trace.state(i)?, delta))
        .collect::<Result<Vec<_>>>()?;
    balance_residual(&terms)
}
