//! Evaluation of the inequalities along a sequence of states.
//!
//! Samples are reduced on arrival to the few scalars each inequality
//! needs; right-hand sides are assembled at the end so that constants can be
//! re-estimated without revisiting the states.

use std::sync::Arc;

use amhd_core::constants::{ConstantValue, ConstantsTable};
use amhd_core::galerkin::rhs::Convolver;
use amhd_core::galerkin::stepper::{Scheme, Stepper};
use amhd_core::galerkin::trace::TraceArchive;
use amhd_core::norms::gevrey_norm_sq;
use amhd_core::transform::foias_temam::{FoiasTemam, FoiasTemamParams};
use amhd_core::transform::theorem2::{delta_max_from, trapezoid, window};
use amhd_core::verdict::ratio;
use amhd_core::{MhdState, Verdict};
use serde::{Deserialize, Serialize};

use crate::chain::{self, alpha, alpha_ps, ChainInputs};
use crate::error::{BoundsError, Result};
use crate::ids::BoundId;
use crate::report::BoundReport;
use crate::sample::{LpNorm, StateSample};

/// Exponent `p` of the Lp bound.
pub const COR51_P: f64 = 4.0;
/// Largest relative gap allowed between the two derivative-norm routes.
pub const ROUTE_TOL: f64 = 1e-10;
/// Largest relative change of an integral under half-stride quadrature.
pub const RICHARDSON_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRequest {
    pub id: BoundId,
    pub s: Option<f64>,
}

impl BoundRequest {
    pub fn new(id: BoundId, s: f64) -> Self {
        Self {
            id,
            s: id.uses_s().then_some(s),
        }
    }

    /// Request for an inequality without `s`.
    pub fn plain(id: BoundId) -> Self {
        Self { id, s: None }
    }

    fn s(&self) -> f64 {
        self.s.unwrap_or(f64::NAN)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.uses_s() {
            match self.s {
                Some(s) => self.id.check(s),
                None => Err(BoundsError::Domain {
                    id: self.id,
                    s: f64::NAN,
                    range: self.id.s_range(),
                }),
            }
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessSettings {
    pub delta: f64,
    /// Analyticity growth rate of the instantaneous-regularisation bound.
    pub sigma: f64,
}

impl HarnessSettings {
    /// Fills unset values from the trace manifest, then from defaults
    /// (`sigma = min(nu, eta)/2`).
    pub fn from_trace(trace: &TraceArchive, delta: Option<f64>, sigma: Option<f64>) -> Result<Self> {
        let cfg = trace.config();
        let delta = delta
            .or(trace.manifest.delta)
            .ok_or_else(|| BoundsError::Trace("no delta given and none recorded in the manifest".into()))?;
        let sigma = sigma.or(trace.manifest.sigma).unwrap_or(0.5 * cfg.nu.min(cfg.eta));
        Ok(Self { delta, sigma })
    }
}

/// Adds every constant the requests need to `table`.
pub fn prepare_table(table: &mut ConstantsTable, requests: &[BoundRequest]) -> Result<()> {
    table.ensure_embedding(0.5)?;
    table.ensure_embedding(1.0)?;
    for r in requests {
        r.validate()?;
        let s = r.s();
        match r.id {
            BoundId::B19 => {
                table.ensure_embedding(s)?;
                table.ensure_embedding(1.5 - s)?;
            }
            BoundId::COR51 => table.ensure_embedding(1.5 - 3.0 / COR51_P)?,
            BoundId::B36_2 | BoundId::P42 => {
                for x in ConstantsTable::c_tilde_prime_inputs(s) {
                    table.ensure_embedding(x)?;
                }
            }
            BoundId::B36_3 => table.ensure_sup(-s - 1.0)?,
            BoundId::P52 => table.ensure_sup(-s - 2.0)?,
            _ => {}
        }
    }
    Ok(())
}

/// Quantities fixed by the first sample.
#[derive(Clone, Copy, Debug)]
struct Origin {
    t0: f64,
    q: f64,
    /// `||V||_0^2 + ||B||_0^2` at `t0`.
    x0: f64,
    nu: f64,
    eta: f64,
}

pub struct Harness {
    requests: Vec<BoundRequest>,
    settings: HarnessSettings,
    rows: Vec<Vec<Vec<f64>>>,
    origin: Option<Origin>,
    lp: Option<LpNorm>,
    conv: Option<Convolver<f64>>,
    /// Issuing state of the regularisation bound.
    first: Option<Arc<MhdState<f64>>>,
}

/// Sub-steps used to resolve a regularisation window shorter than the
/// sample spacing.
pub const B19_SUBSTEPS: usize = 8;

impl Harness {
    pub fn new(requests: Vec<BoundRequest>, settings: HarnessSettings) -> Result<Self> {
        for r in &requests {
            r.validate()?;
        }
        if !(settings.delta > 0.0) || !settings.delta.is_finite() {
            return Err(BoundsError::Core(amhd_core::CoreError::InvalidParameter(format!(
                "delta must be positive, got {}",
                settings.delta
            ))));
        }
        let rows = vec![Vec::new(); requests.len()];
        Ok(Self {
            requests,
            settings,
            rows,
            origin: None,
            lp: None,
            conv: None,
            first: None,
        })
    }

    pub fn requests(&self) -> &[BoundRequest] {
        &self.requests
    }

    pub fn samples(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Adds a state; its time derivative is computed here.
    pub fn observe_state(&mut self, state: Arc<MhdState<f64>>) -> Result<()> {
        let mut conv = match self.conv.take() {
            Some(c) if **c.modes() == **state.modes() => c,
            _ => Convolver::new(state.modes().clone()),
        };
        let mut sample = StateSample::new(&mut conv, state, self.settings.delta)?;
        let r = self.observe_with(&mut sample, &mut conv);
        self.conv = Some(conv);
        r
    }

    pub fn observe(&mut self, sample: &mut StateSample) -> Result<()> {
        let mut conv = match self.conv.take() {
            Some(c) if **c.modes() == **sample.state.modes() => c,
            _ => Convolver::new(sample.state.modes().clone()),
        };
        let r = self.observe_with(sample, &mut conv);
        self.conv = Some(conv);
        r
    }

    fn observe_with(&mut self, smp: &mut StateSample, conv: &mut Convolver<f64>) -> Result<()> {
        if (smp.ps.delta - self.settings.delta).abs() > 1e-15 * self.settings.delta {
            return Err(BoundsError::Trace("sample was transformed with a different delta".into()));
        }
        let t = smp.t();
        let origin = *self.origin.get_or_insert(Origin {
            t0: t,
            q: smp.ps.energy_q(),
            x0: smp.x(0.0),
            nu: smp.state.nu,
            eta: smp.state.eta,
        });
        if let Some(last) = self.rows.first().and_then(|r| r.last()) {
            if !(t > last[0]) {
                return Err(BoundsError::Trace(format!("sample times must increase (t={t} after {})", last[0])));
            }
        }
        if self.first.is_none() && self.requests.iter().any(|r| r.id == BoundId::B19) {
            self.first = Some(smp.state.clone());
        }
        let nu = origin.nu;
        let eta = origin.eta;
        for (k, req) in self.requests.iter().enumerate() {
            let s = req.s();
            let ps = &smp.ps;
            let row = match req.id {
                BoundId::B19 => {
                    let w = self.settings.sigma * (t - origin.t0);
                    let lhs = gevrey_norm_sq(&smp.state.v, w, s)? + gevrey_norm_sq(&smp.state.b, w, s)?;
                    vec![t, lhs, smp.x(s)]
                }
                BoundId::B29 => vec![t, ps.x(0.0), ps.dissipation(nu, eta)],
                BoundId::B32_1 | BoundId::B32_2 => vec![t, smp.x(s)],
                BoundId::B32_3 => vec![t, smp.wiener(s)],
                BoundId::COR51 => {
                    let n = smp.state.n_max();
                    let lp = self.lp.get_or_insert_with(|| LpNorm::new(n, COR51_P));
                    vec![t, lp.norm(&smp.state.v, s) + lp.norm(&smp.state.b, s)]
                }
                BoundId::B36_1 | BoundId::B36_2 => vec![t, smp.deriv_sq(s), smp.deriv_sq_xi(s)],
                BoundId::B36_3 => vec![t, smp.deriv_sq(s), smp.deriv_sq_xi(s), ps.x(0.0)],
                BoundId::B36_4 => vec![t, smp.deriv_wiener(s)],
                BoundId::P40 => vec![t, 0.5 * smp.xi.norm_sq(-0.5), ps.xv(1.5), ps.xb(1.5), ps.x(1.0)],
                BoundId::P42 => {
                    let a = (2.0 * s + 5.0) / 4.0;
                    vec![t, smp.xi.norm_sq(s), ps.xv(s + 2.0), ps.xb(s + 2.0), ps.x(a)]
                }
                BoundId::P44 => vec![t, smp.deriv_sq(s), smp.xv(s + 2.0), smp.xb(s + 2.0), smp.x(s + 1.5), smp.x(1.0)],
                BoundId::P51 => vec![t, smp.deriv_sq(-1.0), smp.x(1.0)],
                BoundId::P52 => {
                    let (dv, db) = smp.rhs.clone();
                    let second = smp.second(conv);
                    let a = amhd_core::norms::sobolev_norm_sq(&second.0, s) + amhd_core::norms::sobolev_norm_sq(&second.1, s);
                    // d/dt ||f||_{s+1}^2 = 2 Re sum |n|^{2s+2} conj(f_n) f'_n
                    let dd = 2.0 * nu * weighted_pairing(&dv, &second.0, s + 1.0)
                        + 2.0 * eta * weighted_pairing(&db, &second.1, s + 1.0);
                    vec![t, a, dd, smp.x(1.0)]
                }
            };
            self.rows[k].push(row);
        }
        Ok(())
    }

    /// Reports for every request. A failing report that rests on estimated
    /// constants is recomputed once with constants re-estimated at twice
    /// the trials.
    pub fn finish(&self, table: &ConstantsTable) -> Result<Vec<BoundReport>> {
        let origin = self
            .origin
            .ok_or_else(|| BoundsError::Trace("no samples observed".into()))?;
        let mut second: Option<ConstantsTable> = None;
        let mut out = Vec::with_capacity(self.requests.len());
        for (req, rows) in self.requests.iter().zip(&self.rows) {
            let mut rep = evaluate(req, rows, &origin, &self.settings, table, self.first.as_deref())?;
            if rep.verdict == Verdict::Fail && rep.estimated {
                if second.is_none() {
                    second = Some(table.reestimate(2)?);
                }
                let mut again = evaluate(req, rows, &origin, &self.settings, second.as_ref().unwrap(), self.first.as_deref())?;
                again.reestimated = true;
                rep = again;
            }
            out.push(rep);
        }
        Ok(out)
    }
}

/// `Re sum |n|^{2s} conj(a_n) . b_n`.
fn weighted_pairing(a: &amhd_core::Field, b: &amhd_core::Field, s: f64) -> f64 {
    let modes = a.modes();
    let mut acc = 0.0;
    for (i, (x, y)) in a.coeffs().iter().zip(b.coeffs()).enumerate() {
        let q = modes.norm2(i) as f64;
        if q == 0.0 {
            continue;
        }
        let w = q.powf(s);
        acc += w * (0..3).map(|j| (x[j].conj() * y[j]).re).sum::<f64>();
    }
    acc
}

fn half_stride(t: &[f64], y: &[f64]) -> Option<f64> {
    if t.len() < 3 {
        return None;
    }
    let mut idx: Vec<usize> = (0..t.len()).step_by(2).collect();
    if *idx.last().unwrap() != t.len() - 1 {
        idx.push(t.len() - 1);
    }
    let th: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let yh: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    Some(trapezoid(&th, &yh))
}

fn integral(rep: &mut BoundReport, t: &[f64], y: Vec<f64>) -> f64 {
    let full = trapezoid(t, &y);
    if let Some(h) = half_stride(t, &y) {
        let change = if full == 0.0 { (h - full).abs() } else { ((h - full) / full).abs() };
        rep.richardson_change = Some(change);
        if change >= RICHARDSON_TOL {
            rep.needs_denser_trace = true;
            rep.add_note("half-stride quadrature moves the integral by more than 1%; a denser trace is needed");
        }
    }
    rep.series = t.iter().copied().zip(y).collect();
    full
}

fn route_check(rep: &mut BoundReport, rows: &[Vec<f64>]) {
    let worst = rows
        .iter()
        .map(|r| {
            let d = (r[1] - r[2]).abs();
            let m = r[1].abs().max(r[2].abs());
            if m == 0.0 {
                0.0
            } else {
                d / m
            }
        })
        .fold(0.0, f64::max);
    rep.route_discrepancy = Some(worst);
}

fn finish_integral(rep: &mut BoundReport, lhs: f64, rhs: f64) {
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.ratio = ratio(lhs, rhs);
    rep.verdict = Verdict::compare(lhs, rhs);
}

/// Worst sample of a pointwise inequality given `(t, lhs, rhs)` per sample.
fn finish_pointwise(rep: &mut BoundReport, pts: Vec<(f64, f64, f64)>) {
    let mut verdict = Verdict::Vacuous;
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for &(t, l, r) in &pts {
        let v = Verdict::compare(l, r);
        if v == Verdict::Fail {
            verdict = Verdict::Fail;
        } else if v == Verdict::Pass && verdict == Verdict::Vacuous {
            verdict = Verdict::Pass;
        }
        let q = if v == Verdict::Vacuous { 0.0 } else { ratio(l, r) };
        if worst.map_or(true, |w| q > w.3 || q.is_nan()) {
            worst = Some((t, l, r, q));
        }
    }
    if let Some((t, l, r, q)) = worst {
        rep.worst_time = Some(t);
        rep.lhs = l;
        rep.rhs = r;
        rep.ratio = q;
    }
    rep.verdict = verdict;
    rep.series = pts.iter().map(|&(t, l, r)| (t, if l == 0.0 && r == 0.0 { 0.0 } else { ratio(l, r) })).collect();
}

/// Integrates from the issuing state across `[t0, t0 + t*)` and compares
/// the Gevrey norms with `q_s` at each interior sub-step.
fn b19_refined(state: &MhdState<f64>, ft: &FoiasTemam) -> Result<Vec<(f64, f64, f64)>> {
    let h = ft.t_star / B19_SUBSTEPS as f64;
    let mut stepper = Stepper::for_state(state, h, Scheme::Rk4, true)?;
    let mut cur = state.clone();
    let mut out = Vec::with_capacity(B19_SUBSTEPS - 1);
    for k in 1..B19_SUBSTEPS {
        cur = stepper.step(&cur)?;
        let t = ft.t0 + k as f64 * h;
        cur.t = t;
        let w = ft.sigma * (t - ft.t0);
        let lhs = gevrey_norm_sq(&cur.v, w, ft.s)? + gevrey_norm_sq(&cur.b, w, ft.s)?;
        if let Some(q) = ft.q(t) {
            out.push((t, lhs, q));
        }
    }
    Ok(out)
}

/// `C~'' = max(2 max(nu^2, eta^2), C'''_{-1} (||V_0||_0^2 + ||B_0||_0^2)^{1/2})`:
/// from the derivative bound at `s = -1`, with
/// `||.||_{1/2}^2 <= ||.||_0 ||.||_1` and the energy inequality.
pub fn c_tilde_double_prime(table: &ConstantsTable, nu: f64, eta: f64, x0_init: f64) -> Result<ConstantValue> {
    let c3 = table.c_triple_prime(-1.0)?;
    let v = (2.0 * nu.max(eta).powi(2)).max(c3.value * x0_init.sqrt());
    Ok(ConstantValue {
        symbol: "C~''".into(),
        value: v,
        provenance: c3.provenance,
        inputs: c3.inputs.clone(),
    })
}

fn evaluate(
    req: &BoundRequest,
    rows: &[Vec<f64>],
    o: &Origin,
    settings: &HarnessSettings,
    table: &ConstantsTable,
    first: Option<&MhdState<f64>>,
) -> Result<BoundReport> {
    let s = req.s();
    let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let t_end = *t.last().ok_or_else(|| BoundsError::Trace("no samples".into()))?;
    let mut rep = BoundReport::new(req.id, req.s, t_end);
    rep.samples = rows.len();
    let (nu, eta) = (o.nu, o.eta);
    let col = |k: usize| -> Vec<f64> { rows.iter().map(|r| r[k]).collect() };
    let chain_inputs = || ChainInputs::new(o.q.max(0.0), settings.delta, nu, eta, o.t0, t_end);
    let cph = table.c_prime_half()?;
    let dmax = delta_max_from(cph.value, nu, eta);
    let admissible = settings.delta <= dmax;

    match req.id {
        BoundId::B19 => {
            let params = FoiasTemamParams {
                s,
                sigma: settings.sigma,
                gamma: None,
            };
            let ft = FoiasTemam::from_norm(rows[0][2], o.t0, &params, nu, eta, table)?;
            // at t0 the inequality is an identity
            let mut pts: Vec<(f64, f64, f64)> = rows
                .iter()
                .skip(1)
                .filter_map(|r| ft.q(r[0]).map(|q| (r[0], r[1], q)))
                .collect();
            let inside = pts.len();
            if inside == 0 && ft.t_star.is_finite() {
                if let Some(st) = first {
                    pts = b19_refined(st, &ft)?;
                    rep.add_note(format!(
                        "window shorter than the sample spacing: resolved with {} sub-steps from t0",
                        B19_SUBSTEPS
                    ));
                }
            }
            finish_pointwise(&mut rep, pts);
            rep.add_note(format!("t* = {:e}; {inside} archived samples inside the window", ft.t_star));
            rep.set_constants(vec![ft.c_prime, ft.c_double_prime]);
        }
        BoundId::B29 => {
            let c = chain_inputs()?;
            let lhs_int = integral(&mut rep, &t, col(2));
            let lhs = 2.25 * rows.last().unwrap()[1] + lhs_int;
            finish_integral(&mut rep, lhs, 9.0 * c.q);
            rep.set_constants(vec![cph.clone()]);
            if o.q <= 0.0 && o.x0 > 0.0 {
                rep.add_note("Q <= 0 for nonzero data");
            }
        }
        BoundId::B32_1 => {
            let c = chain_inputs()?;
            let a = alpha(s);
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(a / 2.0)).collect());
            finish_integral(&mut rep, lhs, chain::q_tilde(&c, s)?);
            rep.set_constants(vec![cph.clone()]);
        }
        BoundId::B32_2 => {
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(1.0 / s)).collect());
            let rhs = o.x0.powf(1.0 / s) / (2.0 * nu.min(eta));
            finish_integral(&mut rep, lhs, rhs);
        }
        BoundId::B32_3 => {
            let c = chain_inputs()?;
            let a = alpha(s + 1.5);
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(a)).collect());
            let (rhs, l) = chain::q_tilde_w(&c, s, table)?;
            finish_integral(&mut rep, lhs, rhs);
            rep.set_constants(vec![cph.clone(), l]);
        }
        BoundId::COR51 => {
            let c = chain_inputs()?;
            let a = alpha_ps(COR51_P, s);
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(a)).collect());
            let (rhs, mut used) = chain::cor51(&c, COR51_P, s, table)?;
            finish_integral(&mut rep, lhs, rhs);
            used.push(cph.clone());
            rep.set_constants(used);
            rep.add_note(format!("p = {COR51_P}"));
        }
        BoundId::B36_1 | BoundId::B36_2 => {
            let c = chain_inputs()?;
            let e = if req.id == BoundId::B36_1 {
                alpha(s + 2.0) / 2.0
            } else {
                2.0 / (2.0 * s + 5.0)
            };
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(e)).collect());
            let (rhs, mut used) = if req.id == BoundId::B36_1 {
                chain::d1(&c, s, table)?
            } else {
                rep.derivation_dependent = true;
                chain::d2(&c, s, table)?
            };
            finish_integral(&mut rep, lhs, rhs);
            route_check(&mut rep, rows);
            if !used.iter().any(|u| u.symbol == cph.symbol) {
                used.push(cph.clone());
            }
            rep.set_constants(used);
        }
        BoundId::B36_3 => {
            let csup = table.sup(-s - 1.0)?;
            let pts = rows.iter().map(|r| (r[0], r[1], chain::d3(nu, eta, r[3], csup.value))).collect();
            finish_pointwise(&mut rep, pts);
            route_check(&mut rep, rows);
            rep.set_constants(vec![csup]);
        }
        BoundId::B36_4 => {
            let c = chain_inputs()?;
            let lhs = integral(&mut rep, &t, col(1).iter().map(|x| x.powf(1.0 / (s + 3.0))).collect());
            let (rhs, used) = chain::d4(&c, s, table)?;
            finish_integral(&mut rep, lhs, rhs);
            rep.set_constants(used);
        }
        BoundId::P40 => {
            let k = 2.0 * cph.value * cph.value;
            let pts = rows
                .iter()
                .map(|r| (r[0], r[1], nu * nu * r[2] + eta * eta * r[3] + k * r[4] * r[4]))
                .collect();
            finish_pointwise(&mut rep, pts);
            rep.set_constants(vec![cph.clone()]);
        }
        BoundId::P42 => {
            let ct = table.c_tilde_prime(s)?;
            let k = 4.0 * ct.value * ct.value;
            let pts = rows
                .iter()
                .map(|r| (r[0], r[1], 2.0 * nu * nu * r[2] + 2.0 * eta * eta * r[3] + k * r[4] * r[4]))
                .collect();
            finish_pointwise(&mut rep, pts);
            rep.set_constants(vec![ct]);
        }
        BoundId::P44 => {
            // (1/2) LHS moved to the left: 1/2 (||V'||_s^2 + ||B'||_s^2) <= ...
            let c3 = table.c_triple_prime(s)?;
            let pts = rows
                .iter()
                .map(|r| {
                    (
                        r[0],
                        0.5 * r[1],
                        nu * nu * r[2] + eta * eta * r[3] + 0.5 * c3.value * r[4] * r[5],
                    )
                })
                .collect();
            finish_pointwise(&mut rep, pts);
            rep.set_constants(vec![c3]);
        }
        BoundId::P51 => {
            let c = c_tilde_double_prime(table, nu, eta, o.x0)?;
            let pts = rows.iter().map(|r| (r[0], r[1], c.value * (r[2] + r[2].powf(1.5)))).collect();
            finish_pointwise(&mut rep, pts);
            rep.derivation_dependent = true;
            rep.set_constants(vec![c]);
        }
        BoundId::P52 => {
            let c = c_tilde_double_prime(table, nu, eta, o.x0)?;
            let csup = table.sup(-s - 2.0)?;
            let k = 20.0 * csup.value * csup.value * c.value;
            let pts = rows
                .iter()
                .map(|r| (r[0], r[1] + r[2], k * (r[3] * r[3] + r[3].powf(2.5))))
                .collect();
            finish_pointwise(&mut rep, pts);
            rep.derivation_dependent = true;
            rep.set_constants(vec![c, csup]);
        }
    }
    if let Some(d) = rep.route_discrepancy {
        if d > ROUTE_TOL {
            rep.verdict = Verdict::Fail;
            rep.add_note(format!("direct and xi routes disagree by {d:e}"));
        }
    }
    if req.id.needs_admissible_delta() && !admissible {
        rep.verdict = Verdict::Informational;
        rep.add_note(format!("delta = {} exceeds delta_max = {dmax}", settings.delta));
    }
    Ok(rep)
}

/// Runs `requests` over the stored states of `trace` on `[t0, t_end]`.
pub fn verify_trace(
    trace: &TraceArchive,
    requests: &[BoundRequest],
    t_end: Option<f64>,
    settings: HarnessSettings,
    table: &mut ConstantsTable,
) -> Result<Vec<BoundReport>> {
    prepare_table(table, requests)?;
    let t_end = match t_end {
        Some(t) => t,
        None => *trace
            .times()
            .last()
            .ok_or_else(|| BoundsError::Trace("empty trace".into()))?,
    };
    let w = window(trace, t_end)?;
    if let Some(i) = (0..w.len()).find(|&i| !w.has_state(i)) {
        return Err(BoundsError::Trace(format!(
            "no stored state at t={} (the harness needs one at every sample; set checkpoint_stride = output_stride)",
            w.rows[i][0]
        )));
    }
    if w.len() < 2 {
        return Err(BoundsError::Trace("the window holds fewer than two samples".into()));
    }
    let mut h = Harness::new(requests.to_vec(), settings)?;
    for i in 0..w.len() {
        h.observe_state(w.state(i)?)?;
    }
    h.finish(table)
}

/// Single integral (or pointwise-on-trace) bound.
pub fn verify_integral(
    id: BoundId,
    trace: &TraceArchive,
    s: f64,
    t_end: f64,
    settings: HarnessSettings,
    table: &mut ConstantsTable,
) -> Result<BoundReport> {
    let r = verify_trace(trace, &[BoundRequest::new(id, s)], Some(t_end), settings, table)?;
    Ok(r.into_iter().next().unwrap())
}

/// One pointwise inequality at a single state; the state also serves as the
/// initial datum where one is needed.
pub fn verify_pointwise(
    id: BoundId,
    s: Option<f64>,
    sample: &mut StateSample,
    table: &mut ConstantsTable,
) -> Result<BoundReport> {
    if !id.is_pointwise() {
        return Err(BoundsError::Trace(format!("{id} is not a pointwise inequality")));
    }
    let req = match s {
        Some(s) => BoundRequest::new(id, s),
        None => BoundRequest::plain(id),
    };
    prepare_table(table, &[req])?;
    let mut h = Harness::new(
        vec![req],
        HarnessSettings {
            delta: sample.delta,
            sigma: f64::NAN,
        },
    )?;
    h.observe(sample)?;
    Ok(h.finish(table)?.into_iter().next().unwrap())
}

/// The second-derivative inequality along the trace, `s < -7/2`.
pub fn d2_report(trace: &TraceArchive, s: f64, settings: HarnessSettings, table: &mut ConstantsTable) -> Result<BoundReport> {
    BoundId::P52.check(s)?;
    let r = verify_trace(trace, &[BoundRequest::new(BoundId::P52, s)], None, settings, table)?;
    Ok(r.into_iter().next().unwrap())
}
