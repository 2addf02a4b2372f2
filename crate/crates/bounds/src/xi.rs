//! Coefficients of the transformed time derivative.

use amhd_core::galerkin::rhs::{full_rhs, Convolver, FieldPair};
use amhd_core::norms::sobolev_norm_sq;
use amhd_core::transform::phi::{transform, PhiState};
use amhd_core::transform::theorem2::BalanceTerms;
use amhd_core::{MhdState, SpectralField};

use crate::error::{BoundsError, Result};

/// `xi_n = e^{delta Phi |n|} dV_n/dt` and the same for `B`.
#[derive(Clone, Debug)]
pub struct XiFields {
    pub xi_v: SpectralField<f64>,
    pub xi_b: SpectralField<f64>,
}

impl XiFields {
    /// `||xi^v||_s^2 + ||xi^b||_s^2`.
    pub fn norm_sq(&self, s: f64) -> f64 {
        sobolev_norm_sq(&self.xi_v, s) + sobolev_norm_sq(&self.xi_b, s)
    }

    /// `||dV/dt||_s^2 + ||dB/dt||_s^2` recovered from `xi` as
    /// `sum |n|^{2s} e^{-2 delta Phi |n|} |xi_n|^2`.
    pub fn derivative_norm_sq(&self, delta_phi: f64, s: f64) -> f64 {
        let mut v = self.xi_v.clone();
        let mut b = self.xi_b.clone();
        let modes = v.modes().clone();
        let w = |i: usize| (-delta_phi * (modes.norm2(i) as f64).sqrt()).exp();
        v.weight(w);
        b.weight(w);
        sobolev_norm_sq(&v, s) + sobolev_norm_sq(&b, s)
    }

    pub fn max_abs_diff(&self, other: &XiFields) -> f64 {
        self.xi_v.max_abs_diff(&other.xi_v).max(self.xi_b.max_abs_diff(&other.xi_b))
    }

    pub fn max_abs(&self) -> f64 {
        self.xi_v.max_abs().max(self.xi_b.max_abs())
    }
}

/// Weights `rhs` by `e^{delta Phi |n|}`.
pub fn xi_from_rhs(rhs: &FieldPair<f64>, delta: f64, phi: f64) -> XiFields {
    let modes = rhs.0.modes().clone();
    let w = |i: usize| (delta * phi * (modes.norm2(i) as f64).sqrt()).exp();
    let mut xi_v = rhs.0.clone();
    let mut xi_b = rhs.1.clone();
    xi_v.weight(w);
    xi_b.weight(w);
    XiFields { xi_v, xi_b }
}

/// `xi` at `state` from the exact right-hand side.
pub fn xi_fields(state: &MhdState<f64>, delta: f64) -> Result<XiFields> {
    let mut conv = Convolver::new(state.modes().clone());
    let ps = transform(state, delta)?;
    let rhs = full_rhs(&mut conv, state);
    Ok(xi_from_rhs(&rhs, delta, ps.phi))
}

/// `dPhi/dt = -(Phi^3/2) dX~_{3/2}/dt`, with `dX~_{3/2}/dt` taken from the
/// balance identity: `(i Sigma_3 - nu ||v~||_{5/2}^2 - eta ||b~||_{5/2}^2)
/// / (1/2 (1 + delta Phi^3 X~_2))`.
pub fn phi_rate(conv: &mut Convolver<f64>, state: &MhdState<f64>, ps: &PhiState<f64>) -> Result<f64> {
    let terms = BalanceTerms::of(conv, state, ps)?;
    let dx = (terms.sigma3 - terms.dissipation) / terms.factor;
    Ok(-0.5 * ps.phi.powi(3) * dx)
}

/// `xi = dv~/dt - delta |n| v~ dPhi/dt` at the middle of an odd number
/// (3 or 5) of equally spaced states `h` apart, with `dv~/dt` from central
/// differences of the transformed fields (second or fourth order).
pub fn xi_chain_rule(states: &[MhdState<f64>], h: f64, delta: f64) -> Result<XiFields> {
    let k = states.len();
    if !(k == 3 || k == 5) || !(h > 0.0) {
        return Err(BoundsError::Trace("chain-rule xi needs 3 or 5 states and h > 0".into()));
    }
    let ps = states.iter().map(|s| transform(s, delta)).collect::<amhd_core::Result<Vec<_>>>()?;
    let mid = k / 2;
    let centre = &ps[mid];
    let diff = |f: fn(&PhiState<f64>) -> &SpectralField<f64>| -> Result<SpectralField<f64>> {
        if k == 3 {
            let mut d = f(&ps[2]).sub(f(&ps[0]))?;
            d.scale(1.0 / (2.0 * h));
            Ok(d)
        } else {
            let mut d = f(&ps[3]).sub(f(&ps[1]))?;
            d.scale(8.0);
            d.axpy(-1.0, f(&ps[4]));
            d.axpy(1.0, f(&ps[0]));
            d.scale(1.0 / (12.0 * h));
            Ok(d)
        }
    };
    let mut xi_v = diff(|p| &p.v)?;
    let mut xi_b = diff(|p| &p.b)?;
    let mut conv = Convolver::new(states[mid].modes().clone());
    let rate = phi_rate(&mut conv, &states[mid], centre)?;
    let modes = centre.v.modes().clone();
    let mut corr_v = centre.v.clone();
    let mut corr_b = centre.b.clone();
    let w = |i: usize| delta * (modes.norm2(i) as f64).sqrt() * rate;
    corr_v.weight(w);
    corr_b.weight(w);
    xi_v.axpy(-1.0, &corr_v);
    xi_b.axpy(-1.0, &corr_b);
    Ok(XiFields { xi_v, xi_b })
}
