//! Analyticity radius from spectral decay, guaranteed-analyticity
//! intervals, inter-resolution discrepancy and the coefficient Lipschitz
//! bound.

use amhd_core::constants::ConstantsTable;
use amhd_core::galerkin::trace::{norm_column, TraceArchive};
use amhd_core::norms::{shell_spectrum_many, sobolev_norm_sq};
use amhd_core::transform::foias_temam::{FoiasTemam, FoiasTemamParams};
use amhd_core::transform::phi::solve_phi;
use amhd_core::verdict::ratio;
use amhd_core::{Field, ModeSet, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::{BoundsError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    /// Fitted exponential decay rate per unit `|n|`, clamped at 0.
    pub sigma_fit: f64,
    pub fit_range: (u32, u32),
    /// RMS residual of the log-linear fit.
    pub residual: f64,
    /// `delta Phi` at the same time, when known.
    pub lower_bound: Option<f64>,
}

/// Shell amplitudes below this fraction of the largest are ignored by the fit.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

/// Shells `[max(3, N/4), 3N/4]`.
pub fn default_shells(n_max: u32) -> (u32, u32) {
    ((n_max / 4).max(3), 3 * n_max / 4)
}

/// Number of modes with `round(|n|) = m`, `m = 0..=N` (the last shell
/// collects everything rounding above `N`).
pub fn shell_counts(modes: &ModeSet) -> Vec<usize> {
    let n = modes.n_max() as usize;
    let mut c = vec![0usize; n + 1];
    for i in 0..modes.len() {
        let m = ((modes.norm2(i) as f64).sqrt().round() as usize).min(n);
        c[m] += 1;
    }
    c
}

/// Decay fit of one field; see [`decay_fit_many`].
pub fn decay_fit(w: &Field, m_lo: u32, m_hi: u32) -> Result<RadiusEstimate> {
    decay_fit_many(&[w], m_lo, m_hi)
}

/// Least-squares fit of `log a_m` against `m` over `[m_lo, m_hi]`, where
/// `a_m` is the shell amplitude divided by the square root of the number of
/// modes in the shell, so that a per-mode decay `e^{-sigma |n|}` gives
/// slope `-sigma` without a lattice-count bias.
pub fn decay_fit_many(ws: &[&Field], m_lo: u32, m_hi: u32) -> Result<RadiusEstimate> {
    let n = ws[0].n_max();
    if !(m_lo < m_hi && m_hi <= n) {
        return Err(BoundsError::InsufficientRange(format!(
            "need m_lo < m_hi <= N, got [{m_lo}, {m_hi}] with N={n}"
        )));
    }
    let amp = shell_spectrum_many(ws);
    let counts = shell_counts(ws[0].modes());
    // shells at the roundoff floor of the largest one count as empty
    let floor = ROUNDOFF_FLOOR * amp.iter().copied().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = (m_lo..=m_hi)
        .filter_map(|m| {
            let a = amp[m as usize];
            let c = counts[m as usize];
            (a > floor && a.is_finite() && c > 0).then(|| (m as f64, (a / (c as f64).sqrt()).ln()))
        })
        .filter(|(_, y)| y.is_finite())
        .collect();
    if pts.len() < 3 {
        return Err(BoundsError::InsufficientRange(format!(
            "{} nonzero shells in [{m_lo}, {m_hi}]",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(RadiusEstimate {
        sigma_fit: (-slope).max(0.0),
        fit_range: (m_lo, m_hi),
        residual,
        lower_bound: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub t: f64,
    /// `None` when the fit was impossible (sample flagged).
    pub sigma_fit: Option<f64>,
    pub delta_phi: f64,
    /// `sigma_fit - delta Phi`.
    pub margin: Option<f64>,
    pub flag: Option<String>,
}

/// Fitted decay rate of `(V, B)` against `delta Phi` at every stored state.
pub fn radius_check(trace: &TraceArchive, delta: f64, shells: Option<(u32, u32)>) -> Result<Vec<RadiusSample>> {
    let (lo, hi) = shells.unwrap_or_else(|| default_shells(trace.config().n));
    let mut out = Vec::new();
    for i in trace.state_indices() {
        let st = trace.state(i)?;
        let phi = solve_phi(&*st, delta)?;
        let dp = delta * phi;
        let r = match decay_fit_many(&[&st.v, &st.b], lo, hi) {
            Ok(e) => RadiusSample {
                t: st.t,
                sigma_fit: Some(e.sigma_fit),
                delta_phi: dp,
                margin: Some(e.sigma_fit - dp),
                flag: None,
            },
            Err(BoundsError::InsufficientRange(m)) => RadiusSample {
                t: st.t,
                sigma_fit: None,
                delta_phi: dp,
                margin: None,
                flag: Some(m),
            },
            Err(e) => return Err(e),
        };
        out.push(r);
    }
    Ok(out)
}

/// Fraction of fit-eligible samples with `sigma_fit >= (1 - tol) delta Phi`.
pub fn radius_success_fraction(series: &[RadiusSample], tol: f64) -> Option<f64> {
    let ok: Vec<bool> = series
        .iter()
        .filter_map(|r| r.sigma_fit.map(|s| s >= (1.0 - tol) * r.delta_phi))
        .collect();
    (!ok.is_empty()).then(|| ok.iter().filter(|b| **b).count() as f64 / ok.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub p: f64,
    pub pairs: usize,
    pub worst_ratio: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalCover {
    /// `(t_k, t_k + t*(t_k))`; the end is `+inf` for zero data.
    pub intervals: Vec<(f64, f64)>,
    /// Covered fraction of `[t0, T]`.
    pub coverage: f64,
    pub envelope: Vec<EnvelopeCheck>,
}

fn norm_series(trace: &TraceArchive, s: f64) -> Result<Option<Vec<f64>>> {
    let (cv, cb) = (norm_column("v", s), norm_column("b", s));
    if trace.column_index(&cv).is_some() && trace.column_index(&cb).is_some() {
        let v = trace.column(&cv)?;
        let b = trace.column(&cb)?;
        return Ok(Some(v.iter().zip(&b).map(|(x, y)| x * x + y * y).collect()));
    }
    if (0..trace.len()).all(|i| trace.has_state(i)) {
        let mut out = Vec::with_capacity(trace.len());
        for i in 0..trace.len() {
            let st = trace.state(i)?;
            out.push(sobolev_norm_sq(&st.v, s) + sobolev_norm_sq(&st.b, s));
        }
        return Ok(Some(out));
    }
    Ok(None)
}

/// Intervals of guaranteed analyticity issued at every sample, their
/// coverage of the trace, and the higher-norm envelope at every later
/// sample inside each interval for each `p` in `ps`.
pub fn guaranteed_intervals(
    trace: &TraceArchive,
    s: f64,
    sigma: f64,
    ps: &[f64],
    table: &ConstantsTable,
) -> Result<IntervalCover> {
    let cfg = trace.config();
    let ys = norm_series(trace, s)?
        .ok_or_else(|| BoundsError::Trace(format!("trace has no norm columns for s={s}")))?;
    let t = trace.times();
    let params = FoiasTemamParams { s, sigma, gamma: None };
    let bounds = t
        .iter()
        .zip(&ys)
        .map(|(&tk, &y)| FoiasTemam::from_norm(y, tk, &params, cfg.nu, cfg.eta, table))
        .collect::<amhd_core::Result<Vec<_>>>()?;
    let intervals: Vec<(f64, f64)> = bounds.iter().map(|b| (b.t0, b.t0 + b.t_star)).collect();
    let (t0, t_end) = (t[0], *t.last().unwrap());
    let coverage = if t_end > t0 {
        let mut covered = 0.0;
        let mut reach = t0;
        for &(a, b) in &intervals {
            let a = a.max(reach);
            let b = b.min(t_end);
            if b > a {
                covered += b - a;
                reach = b;
            }
        }
        (covered / (t_end - t0)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let mut envelope = Vec::new();
    for &p in ps {
        if !(p > s) {
            return Err(BoundsError::Trace(format!("envelope index p={p} must exceed s={s}")));
        }
        let Some(yp) = norm_series(trace, p)? else {
            return Err(BoundsError::Trace(format!("trace has no norm columns for p={p}")));
        };
        let mut pairs = 0;
        let mut worst: f64 = 0.0;
        let mut verdict = Verdict::Vacuous;
        for b in &bounds {
            for (j, &tj) in t.iter().enumerate() {
                if tj <= b.t0 {
                    continue;
                }
                let Some(env) = b.envelope(p, tj) else { break };
                pairs += 1;
                let v = Verdict::compare(yp[j], env);
                if v == Verdict::Fail {
                    verdict = Verdict::Fail;
                } else if v == Verdict::Pass && verdict == Verdict::Vacuous {
                    verdict = Verdict::Pass;
                }
                if v != Verdict::Vacuous {
                    worst = worst.max(ratio(yp[j], env));
                }
            }
        }
        envelope.push(EnvelopeCheck {
            p,
            pairs,
            worst_ratio: worst,
            verdict,
        });
    }
    Ok(IntervalCover {
        intervals,
        coverage,
        envelope,
    })
}

/// `psi(t) = ||u<||_1^2 + ||a<||_1^2`, where `u<` and `a<` are the modes
/// `|n| <= N_lo` of the differences between the two runs.
pub fn two_resolution_psi(lo: &TraceArchive, hi: &TraceArchive) -> Result<Vec<(f64, f64)>> {
    let (nl, nh) = (lo.config().n, hi.config().n);
    if nh < nl {
        return Err(BoundsError::Trace(format!("second trace has lower resolution ({nh} < {nl})")));
    }
    let il = lo.state_indices();
    let ih = hi.state_indices();
    if il.len() != ih.len() {
        return Err(BoundsError::Trace(format!(
            "mismatched sampling grids ({} vs {} stored states)",
            il.len(),
            ih.len()
        )));
    }
    let mut out = Vec::with_capacity(il.len());
    for (&a, &b) in il.iter().zip(&ih) {
        let sl = lo.state(a)?;
        let sh = hi.state(b)?;
        if (sl.t - sh.t).abs() > 1e-9 * sl.t.abs().max(1.0) {
            return Err(BoundsError::Trace(format!("mismatched sample times {} and {}", sl.t, sh.t)));
        }
        let modes = sl.modes().clone();
        let u = sh.v.resample(modes.clone()).sub(&sl.v)?;
        let w = sh.b.resample(modes).sub(&sl.b)?;
        out.push((sl.t, sobolev_norm_sq(&u, 1.0) + sobolev_norm_sq(&w, 1.0)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Largest `|X_n(t1) - X_n(t2)| / (|t1 - t2| rate_n)` over pairs, modes
    /// and both fields.
    pub ratio: f64,
    pub pairs: usize,
    /// `(t1, t2, |n|^2)` of the worst case.
    pub worst: Option<(f64, f64, u32)>,
    /// `(||V||_0^2 + ||B||_0^2)/2` at the first sample.
    pub energy: f64,
    pub verdict: Verdict,
}

/// `|V_n(t1) - V_n(t2)| <= |t1 - t2| (nu |n|^2 sqrt(2E) + 2E|n|)` and
/// `|B_n(t1) - B_n(t2)| <= |t1 - t2| (eta |n|^2 sqrt(2E) + E|n|)` over all
/// pairs of stored states.
pub fn lipschitz_check(trace: &TraceArchive) -> Result<LipschitzReport> {
    let idx = trace.state_indices();
    if idx.len() < 2 {
        return Err(BoundsError::Trace("the Lipschitz check needs two stored states".into()));
    }
    let states = idx.iter().map(|&i| trace.state(i)).collect::<amhd_core::Result<Vec<_>>>()?;
    let first = &states[0];
    let e = 0.5 * (sobolev_norm_sq(&first.v, 0.0) + sobolev_norm_sq(&first.b, 0.0));
    let (nu, eta) = (first.nu, first.eta);
    let modes = first.modes().clone();
    let rate: Vec<(f64, f64)> = (0..modes.len())
        .map(|i| {
            let q = modes.norm2(i) as f64;
            let r = q.sqrt();
            (nu * q * (2.0 * e).sqrt() + 2.0 * e * r, eta * q * (2.0 * e).sqrt() + e * r)
        })
        .collect();
    let mag = |c: &[num_complex::Complex<f64>; 3], d: &[num_complex::Complex<f64>; 3]| {
        (0..3).map(|j| (c[j] - d[j]).norm_sqr()).sum::<f64>().sqrt()
    };
    let mut worst: f64 = 0.0;
    let mut at = None;
    let mut pairs = 0;
    let mut any_nonzero = false;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let (sa, sb) = (&states[a], &states[b]);
            let dt = (sb.t - sa.t).abs();
            pairs += 1;
            for i in 0..modes.len() {
                for (x, y, r) in [
                    (&sa.v.coeffs()[i], &sb.v.coeffs()[i], rate[i].0),
                    (&sa.b.coeffs()[i], &sb.b.coeffs()[i], rate[i].1),
                ] {
                    let d = mag(x, y);
                    if d == 0.0 {
                        continue;
                    }
                    any_nonzero = true;
                    let q = d / (dt * r);
                    if !(q <= worst) {
                        worst = q;
                        at = Some((sa.t, sb.t, modes.norm2(i)));
                    }
                }
            }
        }
    }
    let verdict = if !any_nonzero {
        Verdict::Vacuous
    } else if worst <= 1.0 + 1e-12 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(LipschitzReport {
        ratio: worst,
        pairs,
        worst: at,
        energy: e,
        verdict,
    })
}
