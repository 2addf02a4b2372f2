//! Per-state quantities shared by all inequalities.

use std::sync::Arc;

use amhd_core::galerkin::rhs::{full_rhs, second_time_derivative, Convolver, FieldPair};
use amhd_core::grid::{smooth_size, Grid};
use amhd_core::norms::{sobolev_norm_sq, wiener_norm};
use amhd_core::transform::phi::{transform, PhiState};
use amhd_core::{MhdState, SpectralField};
use num_complex::Complex;

use crate::error::Result;
use crate::xi::{xi_from_rhs, XiFields};

/// A state together with its time derivative, transform and `xi`.
pub struct StateSample {
    pub state: Arc<MhdState<f64>>,
    pub delta: f64,
    pub ps: PhiState<f64>,
    pub rhs: FieldPair<f64>,
    pub xi: XiFields,
    second: Option<FieldPair<f64>>,
}

impl StateSample {
    pub fn new(conv: &mut Convolver<f64>, state: Arc<MhdState<f64>>, delta: f64) -> Result<Self> {
        let rhs = full_rhs(conv, &state);
        Self::with_rhs(state, rhs, delta)
    }

    pub fn with_rhs(state: Arc<MhdState<f64>>, rhs: FieldPair<f64>, delta: f64) -> Result<Self> {
        let ps = transform(&*state, delta)?;
        let xi = xi_from_rhs(&rhs, delta, ps.phi);
        Ok(Self {
            state,
            delta,
            ps,
            rhs,
            xi,
            second: None,
        })
    }

    pub fn t(&self) -> f64 {
        self.state.t
    }

    pub fn xv(&self, s: f64) -> f64 {
        sobolev_norm_sq(&self.state.v, s)
    }

    pub fn xb(&self, s: f64) -> f64 {
        sobolev_norm_sq(&self.state.b, s)
    }

    /// `||V||_s^2 + ||B||_s^2`.
    pub fn x(&self, s: f64) -> f64 {
        self.xv(s) + self.xb(s)
    }

    /// `||dV/dt||_s^2 + ||dB/dt||_s^2`.
    pub fn deriv_sq(&self, s: f64) -> f64 {
        sobolev_norm_sq(&self.rhs.0, s) + sobolev_norm_sq(&self.rhs.1, s)
    }

    /// The same through `xi`.
    pub fn deriv_sq_xi(&self, s: f64) -> f64 {
        self.xi.derivative_norm_sq(self.ps.delta * self.ps.phi, s)
    }

    /// `sum |n|^s (|V_n| + |B_n|)`.
    pub fn wiener(&self, s: f64) -> f64 {
        wiener_norm(&self.state.v, s) + wiener_norm(&self.state.b, s)
    }

    pub fn deriv_wiener(&self, s: f64) -> f64 {
        wiener_norm(&self.rhs.0, s) + wiener_norm(&self.rhs.1, s)
    }

    /// Second time derivative, computed on first use.
    pub fn second(&mut self, conv: &mut Convolver<f64>) -> &FieldPair<f64> {
        if self.second.is_none() {
            self.second = Some(second_time_derivative(conv, &self.state, &self.rhs));
        }
        self.second.as_ref().unwrap()
    }
}

/// `|(-Laplacian)^{s/2} w|_p` with the normalised measure, by collocation.
/// For even integer `p` the grid is fine enough for the quadrature of
/// `|f|^p` to be exact.
pub struct LpNorm {
    grid: Grid<f64>,
    a: Vec<Complex<f64>>,
    b: Vec<Complex<f64>>,
    p: f64,
}

impl LpNorm {
    pub fn new(n_max: u32, p: f64) -> Self {
        let modes = amhd_core::ModeSet::new(n_max);
        let m = smooth_size((p.ceil() as usize).max(2) * n_max as usize + 1);
        let grid = Grid::new(&modes, m);
        let a = grid.buffer();
        let b = grid.buffer();
        Self { grid, a, b, p }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn norm(&mut self, w: &SpectralField<f64>, s: f64) -> f64 {
        let modes = w.modes().clone();
        let c = w.coeffs();
        let wt: Vec<f64> = (0..modes.len())
            .map(|i| {
                let q = modes.norm2(i) as f64;
                if q == 0.0 {
                    0.0
                } else {
                    q.powf(s / 2.0)
                }
            })
            .collect();
        let i_unit = Complex::new(0.0, 1.0);
        self.grid.scatter(&mut self.a, |i| (c[i][0] + i_unit * c[i][1]) * wt[i]);
        self.grid.scatter(&mut self.b, |i| c[i][2] * wt[i]);
        self.grid.to_physical(&mut self.a);
        self.grid.to_physical(&mut self.b);
        let p = self.p;
        let sum: f64 = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(x, y)| (x.norm_sqr() + y.re * y.re).powf(p / 2.0))
            .sum();
        (sum / self.grid.points() as f64).powf(1.0 / p)
    }
}
