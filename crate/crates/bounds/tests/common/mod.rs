#![allow(dead_code)]

use std::sync::Arc;

use amhd_bounds::{BoundReport, BoundRequest, Harness, HarnessSettings};
use amhd_core::constants::ConstantsTable;
use amhd_core::galerkin::initial::{make_initial, InitialCondition};
use amhd_core::galerkin::simulate::SolverConfig;
use amhd_core::galerkin::trace::{run_to_archive, Storage, TraceArchive, TraceRecorder};
use amhd_core::transform::theorem2::delta_max;
use amhd_core::{MhdState, ModeSet, SpectralField, WaveVector};
use num_complex::Complex;

pub const NU: f64 = 0.1;
pub const ETA: f64 = 0.1;

/// `V = A e^{-nu t} cos(x_3) e_1`, `B = A e^{-eta t} cos(x_3) e_2`: both
/// nonlinear terms vanish, so this is an exact solution.
pub fn single_mode(n_max: u32, amp: f64, nu: f64, eta: f64, t: f64) -> MhdState<f64> {
    let m = ModeSet::shared(n_max);
    let z = Complex::new(0.0, 0.0);
    let hv = Complex::new(0.5 * amp * (-nu * t).exp(), 0.0);
    let hb = Complex::new(0.5 * amp * (-eta * t).exp(), 0.0);
    let n = WaveVector::new(0, 0, 1);
    let v = SpectralField::from_modes(m.clone(), &[(n, [hv, z, z])]).unwrap();
    let b = SpectralField::from_modes(m, &[(n, [z, hb, z])]).unwrap();
    MhdState::new(v, b, t, nu, eta).unwrap()
}

pub fn zero_state(n_max: u32) -> MhdState<f64> {
    let m = ModeSet::shared(n_max);
    MhdState::new(SpectralField::zeros(m.clone()), SpectralField::zeros(m), 0.0, NU, ETA).unwrap()
}

pub fn random_spectrum(n: u32, seed: u64, norm: f64) -> MhdState<f64> {
    let ic = InitialCondition::RandomSpectrum {
        a: 1.0,
        b: 0.7,
        v_norm: norm,
        b_norm: norm,
        seed,
    };
    make_initial(&ic, n, NU, ETA).unwrap()
}

/// Table with the two embedding constants every bound needs, and
/// `delta_max` for `(nu, eta)`.
pub fn table(nu: f64, eta: f64) -> (ConstantsTable, f64) {
    let mut t = ConstantsTable::default();
    t.ensure_embedding(0.5).unwrap();
    t.ensure_embedding(1.0).unwrap();
    let d = delta_max(&t, nu, eta).unwrap();
    (t, d)
}

/// Feeds `states` to a fresh harness and returns its reports.
pub fn run_harness(
    states: impl IntoIterator<Item = MhdState<f64>>,
    requests: &[BoundRequest],
    settings: HarnessSettings,
    table: &mut ConstantsTable,
) -> Vec<BoundReport> {
    amhd_bounds::prepare_table(table, requests).unwrap();
    let mut h = Harness::new(requests.to_vec(), settings).unwrap();
    for s in states {
        h.observe_state(Arc::new(s)).unwrap();
    }
    h.finish(table).unwrap()
}

/// Closed-form single-mode trajectory sampled at `k h`, `k = 0..=steps`.
pub fn single_mode_path(n_max: u32, amp: f64, h: f64, steps: usize) -> Vec<MhdState<f64>> {
    (0..=steps).map(|k| single_mode(n_max, amp, NU, ETA, k as f64 * h)).collect()
}

/// In-memory archive with a stored state at every sample.
pub fn archive(cfg: &SolverConfig, init: &MhdState<f64>, delta: Option<f64>) -> TraceArchive {
    let rec = TraceRecorder::new(cfg, Storage::Memory, delta).unwrap();
    let (tr, err) = run_to_archive(cfg, init, rec);
    assert!(err.is_none(), "{err:?}");
    tr.unwrap()
}
