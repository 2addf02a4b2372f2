//! Instantaneous Gevrey regularisation for Sobolev data, `1/2 < s <= 1`.

use serde::{Deserialize, Serialize};

use crate::constants::{ConstantValue, ConstantsTable};
use crate::error::{CoreError, Result};
use crate::field::MhdState;
use crate::norms::{gevrey_norm_sq, sobolev_norm_sq};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoiasTemamParams {
    pub s: f64,
    pub sigma: f64,
    /// Young parameter; `None` pins it by `C'_s (5/2 - s) gamma = min(nu, eta) - sigma`.
    #[serde(default)]
    pub gamma: Option<f64>,
}

/// The majorant `q_s(t)` and existence time `t*` issued at time `t0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoiasTemam {
    pub s: f64,
    pub sigma: f64,
    pub gamma: f64,
    pub t0: f64,
    /// `||V(t0)||_s^2 + ||B(t0)||_s^2`.
    pub y0: f64,
    pub c_prime: ConstantValue,
    pub c_double_prime: ConstantValue,
    pub t_star: f64,
}

impl FoiasTemam {
    /// Builds the majorant from `y0 = ||V(t0)||_s^2 + ||B(t0)||_s^2`.
    pub fn from_norm(y0: f64, t0: f64, params: &FoiasTemamParams, nu: f64, eta: f64, table: &ConstantsTable) -> Result<Self> {
        let s = params.s;
        if !(s > 0.5 && s <= 1.0) {
            return Err(CoreError::InvalidParameter(format!("Foias-Temam bound needs 1/2 < s <= 1, got {s}")));
        }
        let min = nu.min(eta);
        if !(params.sigma > 0.0 && params.sigma < min) {
            return Err(CoreError::InvalidParameter(format!(
                "sigma must lie in (0, min(nu, eta)) = (0, {min}), got {}",
                params.sigma
            )));
        }
        let c_prime = table.c_prime(s)?;
        let gamma = match params.gamma {
            Some(g) => {
                if !(g > 0.0) || c_prime.value * (2.5 - s) * g > min - params.sigma {
                    return Err(CoreError::InvalidParameter(format!(
                        "gamma={g} violates C'_s (5/2 - s) gamma <= min(nu, eta) - sigma"
                    )));
                }
                g
            }
            None => (min - params.sigma) / (c_prime.value * (2.5 - s)),
        };
        let cdp = table.c_double_prime(s, gamma)?;
        let t_star = if y0 > 0.0 {
            y0.powf(-2.0 / (2.0 * s - 1.0)) / cdp.value
        } else {
            f64::INFINITY
        };
        Ok(Self {
            s,
            sigma: params.sigma,
            gamma,
            t0,
            y0,
            c_prime,
            c_double_prime: cdp,
            t_star,
        })
    }

    /// `q_s(t) = (y0^{-2/(2s-1)} - C''_s (t - t0))^{-(s - 1/2)}` for
    /// `t0 <= t < t0 + t*`.
    pub fn q(&self, t: f64) -> Option<f64> {
        let tau = t - self.t0;
        if tau < 0.0 || tau >= self.t_star {
            return None;
        }
        if self.y0 == 0.0 {
            return Some(0.0);
        }
        let s = self.s;
        let base = self.y0.powf(-2.0 / (2.0 * s - 1.0)) - self.c_double_prime.value * tau;
        Some(base.powf(-(s - 0.5)))
    }

    /// Envelope `q_s(t)((p - s)/(e sigma (t - t0)))^{2(p-s)}` bounding
    /// `||V||_p^2 + ||B||_p^2` for `p >= s`.
    pub fn envelope(&self, p: f64, t: f64) -> Option<f64> {
        let q = self.q(t)?;
        let tau = t - self.t0;
        if p == self.s {
            return Some(q);
        }
        if p < self.s || tau <= 0.0 {
            return None;
        }
        let k = (p - self.s) / (std::f64::consts::E * self.sigma * tau);
        Some(q * k.powf(2.0 * (p - self.s)))
    }
}

/// Majorant issued from `state` (the table must hold `C_s` and `C_{3/2-s}`).
pub fn foias_temam_norms(state: &MhdState<f64>, params: &FoiasTemamParams, table: &ConstantsTable) -> Result<FoiasTemam> {
    let y0 = sobolev_norm_sq(&state.v, params.s) + sobolev_norm_sq(&state.b, params.s);
    FoiasTemam::from_norm(y0, state.t, params, state.nu, state.eta, table)
}

/// `||V(t)||^2_{sigma (t - t0), s} + ||B(t)||^2_{sigma (t - t0), s}`.
pub fn foias_temam_lhs(state: &MhdState<f64>, bound: &FoiasTemam) -> Result<f64> {
    let w = bound.sigma * (state.t - bound.t0).max(0.0);
    Ok(gevrey_norm_sq(&state.v, w, bound.s)? + gevrey_norm_sq(&state.b, w, bound.s)?)
}
