//! Integrating-factor Runge-Kutta time stepping.
//!
//! Diffusion is integrated exactly through `exp(-nu |n|^2 dt)`; the
//! quadratic terms use classical RK2 (Heun) or RK4 weights in the
//! integrating-factor variables. Stage values are Leray-projected.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::rhs::{add_diffusion, nonlinear_rhs_direct, Convolver, FieldPair};
use crate::error::{CoreError, Result};
use crate::field::{MhdState, SpectralField};
use crate::modes::ModeSet;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rk2,
    #[default]
    Rk4,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::Rk2 => 2,
            Scheme::Rk4 => 4,
        }
    }
}

enum Nonlinearity<T: Real> {
    Fast(Box<Convolver<T>>),
    Direct,
}

pub struct Stepper<T: Real> {
    modes: Arc<ModeSet>,
    scheme: Scheme,
    nu: T,
    eta: T,
    dt: T,
    ef_v: Vec<T>,
    eh_v: Vec<T>,
    ef_b: Vec<T>,
    eh_b: Vec<T>,
    nl: Nonlinearity<T>,
}

impl<T: Real> Stepper<T> {
    /// `dealias = true` selects the pseudo-spectral convolution, otherwise
    /// the direct double sum.
    pub fn new(modes: Arc<ModeSet>, nu: T, eta: T, dt: T, scheme: Scheme, dealias: bool) -> Result<Self> {
        if !(nu > T::zero() && eta > T::zero()) {
            return Err(CoreError::InvalidParameter("diffusivities must be positive".into()));
        }
        let nl = if dealias {
            Nonlinearity::Fast(Box::new(Convolver::new(modes.clone())))
        } else {
            Nonlinearity::Direct
        };
        let mut s = Self {
            modes,
            scheme,
            nu,
            eta,
            dt: T::zero(),
            ef_v: Vec::new(),
            eh_v: Vec::new(),
            ef_b: Vec::new(),
            eh_b: Vec::new(),
            nl,
        };
        s.set_dt(dt)?;
        Ok(s)
    }

    pub fn for_state(state: &MhdState<T>, dt: T, scheme: Scheme, dealias: bool) -> Result<Self> {
        Self::new(state.modes().clone(), state.nu, state.eta, dt, scheme, dealias)
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn set_dt(&mut self, dt: T) -> Result<()> {
        if !(dt > T::zero() && dt.is_finite()) {
            return Err(CoreError::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if dt == self.dt {
            return Ok(());
        }
        self.dt = dt;
        let half = T::lit(0.5);
        let m = &self.modes;
        let f = |c: T, h: T| -> Vec<T> { (0..m.len()).map(|i| (-c * T::lit(m.norm2(i) as f64) * h).exp()).collect() };
        self.ef_v = f(self.nu, dt);
        self.eh_v = f(self.nu, dt * half);
        self.ef_b = f(self.eta, dt);
        self.eh_b = f(self.eta, dt * half);
        Ok(())
    }

    /// Quadratic part of the right-hand side at `(v, b)`.
    pub fn nonlinear(&mut self, v: &SpectralField<T>, b: &SpectralField<T>) -> FieldPair<T> {
        match &mut self.nl {
            Nonlinearity::Fast(c) => c.nonlinear(v, b),
            Nonlinearity::Direct => nonlinear_rhs_direct(v, b),
        }
    }

    /// Full right-hand side at a state.
    pub fn rhs(&mut self, s: &MhdState<T>) -> FieldPair<T> {
        let mut out = self.nonlinear(&s.v, &s.b);
        add_diffusion(&mut out, &s.v, &s.b, s.nu, s.eta);
        out
    }

    pub fn convolver(&mut self) -> Option<&mut Convolver<T>> {
        match &mut self.nl {
            Nonlinearity::Fast(c) => Some(c),
            Nonlinearity::Direct => None,
        }
    }

    /// Advances one step.
    pub fn step(&mut self, s: &MhdState<T>) -> Result<MhdState<T>> {
        let a = self.nonlinear(&s.v, &s.b);
        self.step_from(s, &a)
    }

    /// Advances one step given the quadratic term `a` at `s`.
    pub fn step_from(&mut self, s: &MhdState<T>, a: &FieldPair<T>) -> Result<MhdState<T>> {
        let h = self.dt;
        let (mut v, mut b) = match self.scheme {
            Scheme::Rk2 => {
                let mut v1 = combine(&[(&s.v, T::one()), (&a.0, h)], Some(&self.ef_v));
                let mut b1 = combine(&[(&s.b, T::one()), (&a.1, h)], Some(&self.ef_b));
                v1.leray_project();
                b1.leray_project();
                let k = self.nonlinear(&v1, &b1);
                let half = h * T::lit(0.5);
                let mut v = combine(&[(&s.v, T::one()), (&a.0, half)], Some(&self.ef_v));
                let mut b = combine(&[(&s.b, T::one()), (&a.1, half)], Some(&self.ef_b));
                v.axpy(half, &k.0);
                b.axpy(half, &k.1);
                (v, b)
            }
            Scheme::Rk4 => {
                let h2 = h * T::lit(0.5);
                let h6 = h / T::lit(6.0);
                let mut v1 = combine(&[(&s.v, T::one()), (&a.0, h2)], Some(&self.eh_v));
                let mut b1 = combine(&[(&s.b, T::one()), (&a.1, h2)], Some(&self.eh_b));
                v1.leray_project();
                b1.leray_project();
                let kb = self.nonlinear(&v1, &b1);
                let mut v2 = combine(&[(&s.v, T::one())], Some(&self.eh_v));
                let mut b2 = combine(&[(&s.b, T::one())], Some(&self.eh_b));
                v2.axpy(h2, &kb.0);
                b2.axpy(h2, &kb.1);
                v2.leray_project();
                b2.leray_project();
                let kc = self.nonlinear(&v2, &b2);
                let mut v3 = combine(&[(&s.v, T::one())], Some(&self.ef_v));
                let mut b3 = combine(&[(&s.b, T::one())], Some(&self.ef_b));
                v3.axpy(h, &scaled_by(&kc.0, &self.eh_v));
                b3.axpy(h, &scaled_by(&kc.1, &self.eh_b));
                v3.leray_project();
                b3.leray_project();
                let kd = self.nonlinear(&v3, &b3);
                // E u + h/6 (E a + 2 E_half (b + c) + d)
                let mut v = combine(&[(&s.v, T::one()), (&a.0, h6)], Some(&self.ef_v));
                let mut b = combine(&[(&s.b, T::one()), (&a.1, h6)], Some(&self.ef_b));
                let two_h6 = h6 * T::lit(2.0);
                v.axpy(two_h6, &combine(&[(&kb.0, T::one()), (&kc.0, T::one())], Some(&self.eh_v)));
                b.axpy(two_h6, &combine(&[(&kb.1, T::one()), (&kc.1, T::one())], Some(&self.eh_b)));
                v.axpy(h6, &kd.0);
                b.axpy(h6, &kd.1);
                (v, b)
            }
        };
        v.leray_project();
        b.leray_project();
        let next = MhdState {
            v,
            b,
            t: s.t + h,
            nu: s.nu,
            eta: s.eta,
        };
        if !next.is_finite() {
            return Err(CoreError::BlowUp {
                t: next.t.as_f64(),
                last_valid: Box::new(s.cast()),
            });
        }
        Ok(next)
    }
}

/// `E * sum_j c_j f_j` with an optional per-mode factor `E`.
fn combine<T: Real>(terms: &[(&SpectralField<T>, T)], factor: Option<&[T]>) -> SpectralField<T> {
    let mut out = terms[0].0.scaled(terms[0].1);
    for (f, c) in &terms[1..] {
        out.axpy(*c, f);
    }
    if let Some(e) = factor {
        out.weight(|i| e[i]);
    }
    out
}

fn scaled_by<T: Real>(f: &SpectralField<T>, e: &[T]) -> SpectralField<T> {
    let mut out = f.clone();
    out.weight(|i| e[i]);
    out
}

/// One step of size `dt` from `state` (convenience wrapper).
pub fn step<T: Real>(state: &MhdState<T>, dt: T, scheme: Scheme) -> Result<MhdState<T>> {
    Stepper::for_state(state, dt, scheme, true)?.step(state)
}
