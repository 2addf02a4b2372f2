#![allow(dead_code)]

use std::sync::Arc;

use amhd_core::{MhdState, ModeSet, SpectralField, WaveVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Field = SpectralField<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random solenoidal real field with `|c(n)| ~ |n|^-decay`.
pub fn random_field(modes: &Arc<ModeSet>, r: &mut ChaCha8Rng, decay: f64) -> Field {
    SpectralField::from_fn(modes.clone(), |n| {
        let a = n.norm().powf(-decay);
        std::array::from_fn(|_| Complex::new(a * r.gen_range(-1.0..1.0), a * r.gen_range(-1.0..1.0)))
    })
}

pub fn random_state(n: u32, seed: u64, nu: f64, eta: f64) -> MhdState<f64> {
    let m = ModeSet::shared(n);
    let mut r = rng(seed);
    let v = random_field(&m, &mut r, 1.0);
    let b = random_field(&m, &mut r, 1.0);
    MhdState::new(v, b, 0.0, nu, eta).unwrap()
}

/// `sum_n c_n e^{i n.x}` by explicit summation.
pub fn eval(w: &Field, x: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (n, c) in w.modes().vectors().iter().zip(w.coeffs()) {
        let ph = n.0[0] as f64 * x[0] + n.0[1] as f64 * x[1] + n.0[2] as f64 * x[2];
        let e = Complex::new(ph.cos(), ph.sin());
        for k in 0..3 {
            out[k] += (c[k] * e).re;
        }
    }
    out
}

pub fn mag(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `cos(k x_3) e_1` scaled by `amp`.
pub fn cos_mode(n_max: u32, k: i32, amp: f64) -> Field {
    let m = ModeSet::shared(n_max);
    let z = Complex::new(0.0, 0.0);
    SpectralField::from_modes(m, &[(WaveVector::new(0, 0, k), [Complex::new(amp / 2.0, 0.0), z, z])]).unwrap()
}

/// Single-mode fixture: `V = A cos(x_3) e_1`, `B = A cos(x_3) e_2`.
pub fn single_mode_state(n_max: u32, amp: f64, nu: f64, eta: f64) -> MhdState<f64> {
    let m = ModeSet::shared(n_max);
    let z = Complex::new(0.0, 0.0);
    let h = Complex::new(amp / 2.0, 0.0);
    let n = WaveVector::new(0, 0, 1);
    let v = SpectralField::from_modes(m.clone(), &[(n, [h, z, z])]).unwrap();
    let b = SpectralField::from_modes(m, &[(n, [z, h, z])]).unwrap();
    MhdState::new(v, b, 0.0, nu, eta).unwrap()
}

/// Sum of squared coefficient differences, relative to the larger field.
pub fn rel_diff(a: &Field, b: &Field) -> f64 {
    let scale = a.max_abs().max(b.max_abs()).max(1e-300);
    a.max_abs_diff(b) / scale
}

/// Brute-force `sum_{0 < |n| <= r} f(|n|^2)` over the integer lattice.
pub fn lattice_sum(r: i64, f: impl Fn(i64) -> f64) -> f64 {
    let mut counts = vec![0u64; (r * r + 1) as usize];
    for a in -r..=r {
        for b in -r..=r {
            let q = a * a + b * b;
            if q > r * r {
                continue;
            }
            for c in -r..=r {
                let k = q + c * c;
                if k <= r * r {
                    counts[k as usize] += 1;
                }
            }
        }
    }
    counts
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .filter(|(_, c)| **c > 0)
        .map(|(k, c)| *c as f64 * f(k as i64))
        .sum()
}
