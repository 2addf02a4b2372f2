//! The Gevrey-type transform `v~_n = V_n e^{delta Phi |n|}` with `Phi`
//! defined implicitly by `Phi = (1 + ||v~||_{3/2}^2 + ||b~||_{3/2}^2)^{-1/2}`.

use crate::error::{CoreError, Result};
use crate::field::{MhdState, SpectralField};
use crate::norms::{gevrey_profile_sq, sobolev_norm_sq, RadialProfile};
use crate::scalar::Real;

/// `Theta(Phi) = ||V||^2_{delta Phi,3/2} + ||B||^2_{delta Phi,3/2} + 1 - Phi^{-2}`.
pub fn theta<T: Real>(profile: &RadialProfile<T>, delta: T, phi: T) -> Result<T> {
    let g = gevrey_profile_sq(profile, delta * phi, T::lit(1.5))?;
    Ok(g + T::one() - T::one() / (phi * phi))
}

/// Root of `Theta` in `(0, 1]` by bisection. `Theta` is strictly increasing
/// there, tends to `-inf` at 0 and is non-negative at 1.
pub fn solve_phi<T: Real>(state: &MhdState<T>, delta: T) -> Result<T> {
    if !(delta >= T::zero()) || !delta.is_finite() {
        return Err(CoreError::InvalidParameter(format!("delta must be non-negative, got {delta}")));
    }
    let profile = RadialProfile::of_many(&[&state.v, &state.b]);
    if profile.energy.iter().any(|e| !e.is_finite()) {
        return Err(CoreError::PhiUndefined);
    }
    solve_phi_profile(&profile, delta)
}

pub(crate) fn solve_phi_profile<T: Real>(profile: &RadialProfile<T>, delta: T) -> Result<T> {
    let tol = T::invariant_tol();
    let at_one = theta(profile, delta, T::one())?;
    if at_one <= tol {
        return Ok(T::one());
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut best = (T::one(), at_one.abs());
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let th = theta(profile, delta, mid)?;
        if th.abs() < best.1 {
            best = (mid, th.abs());
        }
        if th.abs() <= tol {
            return Ok(mid);
        }
        if th > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // the bracket has collapsed to adjacent floats: accept the best endpoint
    // when its residual is at rounding level for the magnitude of Phi^{-2}
    let scale = T::one() / (best.0 * best.0);
    if best.1 <= tol * scale.max(T::one()) * T::lit(1e3) {
        Ok(best.0)
    } else {
        Err(CoreError::PhiNoConvergence {
            residual: best.1.as_f64(),
        })
    }
}

/// Transformed fields together with `Phi` and `delta`.
#[derive(Clone, Debug)]
pub struct PhiState<T: Real> {
    pub phi: T,
    pub delta: T,
    pub v: SpectralField<T>,
    pub b: SpectralField<T>,
}

/// Solves for `Phi` and applies the weight `e^{delta Phi |n|}`.
pub fn transform<T: Real>(state: &MhdState<T>, delta: T) -> Result<PhiState<T>> {
    let phi = solve_phi(state, delta)?;
    Ok(transform_with_phi(state, delta, phi))
}

pub fn transform_with_phi<T: Real>(state: &MhdState<T>, delta: T, phi: T) -> PhiState<T> {
    let modes = state.modes().clone();
    let w: Vec<T> = modes
        .slots()
        .iter()
        .map(|q| (delta * phi * T::lit(*q as f64).sqrt()).exp())
        .collect();
    let mut v = state.v.clone();
    let mut b = state.b.clone();
    v.weight(|i| w[modes.slot_of(i)]);
    b.weight(|i| w[modes.slot_of(i)]);
    PhiState { phi, delta, v, b }
}

impl<T: Real> PhiState<T> {
    /// `||v~||_s^2 + ||b~||_s^2`.
    pub fn x(&self, s: T) -> T {
        sobolev_norm_sq(&self.v, s) + sobolev_norm_sq(&self.b, s)
    }

    pub fn xv(&self, s: T) -> T {
        sobolev_norm_sq(&self.v, s)
    }

    pub fn xb(&self, s: T) -> T {
        sobolev_norm_sq(&self.b, s)
    }

    /// `Q = 1/2 X_0 - delta Phi X_{1/2} + delta^2 Phi^2 X_1
    ///      + (2 delta^3 / 3)(Phi^3 - 3 Phi + 2)`.
    pub fn energy_q(&self) -> T {
        let d = self.delta;
        let p = self.phi;
        let half = T::lit(0.5);
        half * self.x(T::zero()) - d * p * self.x(half)
            + d * d * p * p * self.x(T::one())
            + T::lit(2.0) * d * d * d / T::lit(3.0) * q_cubic(p)
    }

    /// Integrand `nu(||v~||_1^2 + 4 delta^2 Phi^2 ||v~||_2^2) + eta(...)`.
    pub fn dissipation(&self, nu: T, eta: T) -> T {
        let k = T::lit(4.0) * self.delta * self.delta * self.phi * self.phi;
        nu * (self.xv(T::one()) + k * self.xv(T::lit(2.0))) + eta * (self.xb(T::one()) + k * self.xb(T::lit(2.0)))
    }
}

/// `Phi^3 - 3 Phi + 2`, which lies in `[0, 2)` for `0 < Phi <= 1`.
pub fn q_cubic<T: Real>(phi: T) -> T {
    phi * phi * phi - T::lit(3.0) * phi + T::lit(2.0)
}
