//! Time integration of the Galerkin system with trace recording.

use serde::{Deserialize, Serialize};

use super::rhs::{add_diffusion, FieldPair};
use super::stepper::{Scheme, Stepper};
use crate::error::{CoreError, Result};
use crate::field::MhdState;
use crate::scalar::Real;

fn yes() -> bool {
    true
}
fn one() -> u64 {
    1
}
fn default_s_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n: u32,
    pub nu: f64,
    pub eta: f64,
    pub dt: f64,
    pub t_end: f64,
    /// Pseudo-spectral products on a `3N+1` grid; `false` selects the
    /// direct convolution.
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "one")]
    pub output_stride: u64,
    /// Steps between stored states; a multiple of `output_stride`
    /// (defaults to `output_stride`).
    #[serde(default)]
    pub checkpoint_stride: Option<u64>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Sobolev indices recorded in the norm series.
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    /// Also record `||dV/dt||_s`, `||dB/dt||_s`.
    #[serde(default = "yes")]
    pub derivative_norms: bool,
}

impl SolverConfig {
    pub fn new(n: u32, nu: f64, eta: f64, dt: f64, t_end: f64) -> Self {
        Self {
            n,
            nu,
            eta,
            dt,
            t_end,
            dealias: true,
            output_stride: 1,
            checkpoint_stride: None,
            scheme: Scheme::Rk4,
            s_grid: default_s_grid(),
            derivative_norms: true,
        }
    }

    pub fn checkpoint_stride(&self) -> u64 {
        self.checkpoint_stride.unwrap_or(self.output_stride)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidParameter(m));
        if self.n < 1 {
            return bad("n must be at least 1".into());
        }
        if !(self.nu > 0.0 && self.eta > 0.0) {
            return bad(format!("nu and eta must be positive (nu={}, eta={})", self.nu, self.eta));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        // t_end = 0 is allowed and records the initial sample only
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.output_stride == 0 {
            return bad("output_stride must be at least 1".into());
        }
        let c = self.checkpoint_stride();
        if c == 0 || c % self.output_stride != 0 {
            return bad(format!(
                "checkpoint_stride {c} must be a positive multiple of output_stride {}",
                self.output_stride
            ));
        }
        if self.s_grid.iter().any(|s| !s.is_finite()) {
            return bad("s_grid entries must be finite".into());
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self, t0: f64) -> u64 {
        let span = self.t_end - t0;
        ((span / self.dt) - 1e-9).ceil().max(0.0) as u64
    }
}

/// One recorded sample.
pub struct Sample<'a, T: Real> {
    pub step: u64,
    pub state: &'a MhdState<T>,
    /// `(dV/dt, dB/dt)` at `state`.
    pub rhs: &'a FieldPair<T>,
    pub checkpoint: bool,
}

pub trait TraceSink<T: Real> {
    fn record(&mut self, sample: &Sample<'_, T>) -> Result<()>;
}

/// Discards samples.
pub struct NullSink;

impl<T: Real> TraceSink<T> for NullSink {
    fn record(&mut self, _: &Sample<'_, T>) -> Result<()> {
        Ok(())
    }
}

impl<T: Real, F: FnMut(&Sample<'_, T>) -> Result<()>> TraceSink<T> for F {
    fn record(&mut self, sample: &Sample<'_, T>) -> Result<()> {
        self(sample)
    }
}

/// Integrates from `initial` to `config.t_end`, handing samples at step 0,
/// every `output_stride` steps and at the final time to `sink`. Returns the
/// final state; a blow-up returns [`CoreError::BlowUp`] after the samples
/// recorded so far have been delivered.
pub fn simulate<T: Real>(config: &SolverConfig, initial: &MhdState<T>, sink: &mut dyn TraceSink<T>) -> Result<MhdState<T>> {
    config.validate()?;
    if initial.n_max() != config.n {
        return Err(CoreError::InvalidParameter(format!(
            "initial data has N={} but the configuration asks for N={}",
            initial.n_max(),
            config.n
        )));
    }
    let mut state = initial.clone();
    state.nu = T::lit(config.nu);
    state.eta = T::lit(config.eta);
    let t0 = state.t.as_f64();
    let steps = config.steps(t0);
    let mut stepper = Stepper::for_state(&state, T::lit(config.dt), config.scheme, config.dealias)?;
    let ckpt = config.checkpoint_stride();
    let mut nl = stepper.nonlinear(&state.v, &state.b);
    for k in 0..=steps {
        let last = k == steps;
        if k % config.output_stride == 0 || last {
            let mut rhs = nl.clone();
            add_diffusion(&mut rhs, &state.v, &state.b, state.nu, state.eta);
            sink.record(&Sample {
                step: k,
                state: &state,
                rhs: &rhs,
                checkpoint: k % ckpt == 0 || last,
            })?;
        }
        if last {
            break;
        }
        let t_next = if k + 1 == steps {
            config.t_end
        } else {
            t0 + (k + 1) as f64 * config.dt
        };
        let h = if k + 1 == steps {
            t_next - state.t.as_f64()
        } else {
            config.dt
        };
        stepper.set_dt(T::lit(h))?;
        let mut next = stepper.step_from(&state, &nl)?;
        next.t = T::lit(t_next);
        state = next;
        nl = stepper.nonlinear(&state.v, &state.b);
    }
    Ok(state)
}
