//! Sobolev, Gevrey and Wiener norms and shell spectra.
//!
//! Mode contributions are first accumulated per distinct `|n|^2` and then
//! summed from the largest `|n|` down, both with compensated summation.

use crate::error::{CoreError, Result};
use crate::field::{norm_sqr3, SpectralField};
use crate::modes::ModeSet;
use crate::scalar::{Compensated, Real};

/// Per-`|n|^2` sums of `|c(n)|^2`.
#[derive(Clone, Debug)]
pub struct RadialProfile<T> {
    /// Distinct values of `|n|^2`, ascending.
    pub norm2: Vec<u32>,
    /// `sum_{|n|^2 = q} |c(n)|^2`.
    pub energy: Vec<T>,
}

impl<T: Real> RadialProfile<T> {
    pub fn of(w: &SpectralField<T>) -> Self {
        Self::of_many(&[w])
    }

    /// Joint profile of several fields on the same mode set.
    pub fn of_many(ws: &[&SpectralField<T>]) -> Self {
        let modes: &ModeSet = ws[0].modes();
        let mut acc = vec![Compensated::<T>::new(); modes.slots().len()];
        for w in ws {
            for (i, c) in w.coeffs().iter().enumerate() {
                acc[modes.slot_of(i)].add(norm_sqr3(c));
            }
        }
        Self {
            norm2: modes.slots().to_vec(),
            energy: acc.iter().map(|a| a.value()).collect(),
        }
    }

    /// `sum_q weight(|n|) * energy_q`, largest `|n|` first.
    pub fn weighted_sum(&self, mut weight: impl FnMut(T) -> T) -> T {
        let mut acc = Compensated::new();
        for (q, e) in self.norm2.iter().zip(&self.energy).rev() {
            if *e != T::zero() {
                acc.add(weight(T::lit(*q as f64).sqrt()) * *e);
            }
        }
        acc.value()
    }

    /// `sum |n|^{2s} |c|^2`.
    pub fn sobolev_sq(&self, s: T) -> T {
        self.weighted_sum(|r| r.powf(s + s))
    }

    /// `sum e^{2 sigma |n|} |n|^{2s} |c|^2` without overflow checks.
    pub fn gevrey_sq_unchecked(&self, sigma: T, s: T) -> T {
        let two = T::lit(2.0);
        self.weighted_sum(|r| (two * sigma * r).exp() * r.powf(two * s))
    }

    pub fn max_radius(&self) -> T {
        self.norm2
            .iter()
            .zip(&self.energy)
            .rev()
            .find(|(_, e)| **e != T::zero())
            .map(|(q, _)| T::lit(*q as f64).sqrt())
            .unwrap_or_else(T::zero)
    }
}

/// `||w||_s = (sum |n|^{2s} |w(n)|^2)^{1/2}`.
pub fn sobolev_norm<T: Real>(w: &SpectralField<T>, s: T) -> T {
    sobolev_norm_sq(w, s).sqrt()
}

pub fn sobolev_norm_sq<T: Real>(w: &SpectralField<T>, s: T) -> T {
    RadialProfile::of(w).sobolev_sq(s)
}

/// `||w||_{sigma,s}^2 = sum e^{2 sigma |n|} |n|^{2s} |w(n)|^2`.
///
/// Fails with [`CoreError::WeightOverflow`] when the largest weight would
/// overflow the scalar type.
pub fn gevrey_norm_sq<T: Real>(w: &SpectralField<T>, sigma: T, s: T) -> Result<T> {
    let p = RadialProfile::of(w);
    gevrey_profile_sq(&p, sigma, s)
}

pub fn gevrey_norm<T: Real>(w: &SpectralField<T>, sigma: T, s: T) -> Result<T> {
    gevrey_norm_sq(w, sigma, s).map(|x| x.sqrt())
}

pub(crate) fn gevrey_profile_sq<T: Real>(p: &RadialProfile<T>, sigma: T, s: T) -> Result<T> {
    let r = p.max_radius();
    let limit = T::max_value().ln() - T::lit(40.0);
    if T::lit(2.0) * sigma * r > limit {
        return Err(CoreError::WeightOverflow {
            sigma: sigma.as_f64(),
            radius: r.as_f64(),
        });
    }
    let v = p.gevrey_sq_unchecked(sigma, s);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CoreError::WeightOverflow {
            sigma: sigma.as_f64(),
            radius: r.as_f64(),
        })
    }
}

/// `sum |n|^s |w(n)|` with the Euclidean coefficient magnitude; majorizes
/// `max |(-Laplacian)^{s/2} w|`.
pub fn wiener_norm<T: Real>(w: &SpectralField<T>, s: T) -> T {
    let modes = w.modes();
    let mut acc = vec![Compensated::<T>::new(); modes.slots().len()];
    for (i, c) in w.coeffs().iter().enumerate() {
        acc[modes.slot_of(i)].add(norm_sqr3(c).sqrt());
    }
    let mut total = Compensated::new();
    for (q, a) in modes.slots().iter().zip(&acc).rev() {
        total.add(T::lit(*q as f64).sqrt().powf(s) * a.value());
    }
    total.value()
}

/// Shell amplitudes `(sum_{round|n| = m} |w(n)|^2)^{1/2}` for `m = 0..=N`.
pub fn shell_spectrum<T: Real>(w: &SpectralField<T>) -> Vec<T> {
    shell_spectrum_many(&[w])
}

/// Joint shell amplitudes of several fields.
pub fn shell_spectrum_many<T: Real>(ws: &[&SpectralField<T>]) -> Vec<T> {
    let p = RadialProfile::of_many(ws);
    let n = ws[0].n_max() as usize;
    let mut acc = vec![Compensated::<T>::new(); n + 1];
    for (q, e) in p.norm2.iter().zip(&p.energy) {
        let m = ((*q as f64).sqrt().round() as usize).min(n);
        acc[m].add(*e);
    }
    acc.iter().map(|a| a.value().sqrt()).collect()
}
