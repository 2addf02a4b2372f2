//! Solenoidal, real-valued vector fields in Fourier space.

use std::sync::Arc;

use num_complex::Complex;

use crate::error::{CoreError, Result};
use crate::modes::{ModeSet, WaveVector};
use crate::scalar::Real;

pub type Vec3<T> = [Complex<T>; 3];

#[inline]
pub(crate) fn zero3<T: Real>() -> Vec3<T> {
    [Complex::new(T::zero(), T::zero()); 3]
}

#[inline]
pub(crate) fn norm_sqr3<T: Real>(c: &Vec3<T>) -> T {
    c[0].norm_sqr() + c[1].norm_sqr() + c[2].norm_sqr()
}

#[inline]
pub(crate) fn dot_n<T: Real>(c: &Vec3<T>, n: WaveVector) -> Complex<T> {
    let [a, b, d] = n.0;
    c[0] * T::lit(a as f64) + c[1] * T::lit(b as f64) + c[2] * T::lit(d as f64)
}

#[inline]
pub(crate) fn conj3<T: Real>(c: &Vec3<T>) -> Vec3<T> {
    [c[0].conj(), c[1].conj(), c[2].conj()]
}

/// `P_n f = f - (f.n / |n|^2) n`.
#[inline]
pub fn leray_project_mode<T: Real>(c: &Vec3<T>, n: WaveVector) -> Vec3<T> {
    let q = T::lit(n.norm2() as f64);
    let s = dot_n(c, n) / q;
    let [a, b, d] = n.0;
    [
        c[0] - s * T::lit(a as f64),
        c[1] - s * T::lit(b as f64),
        c[2] - s * T::lit(d as f64),
    ]
}

/// `P_n f = f - (f.n / |n|^2) n`.
pub fn leray_project<T: Real>(f: &Vec3<T>, n: WaveVector) -> Result<Vec3<T>> {
    if n.is_zero() {
        return Err(CoreError::ZeroWaveVector);
    }
    Ok(leray_project_mode(f, n))
}

/// A divergence-free real vector field truncated to `0 < |n| <= N`.
///
/// Coefficients are stored per mode in the lexicographic order of the
/// [`ModeSet`]. Constructors either validate the reality and solenoidality
/// invariants or enforce them structurally.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    modes: Arc<ModeSet>,
    coeffs: Vec<Vec3<T>>,
}

impl<T: Real> PartialEq for SpectralField<T> {
    fn eq(&self, other: &Self) -> bool {
        *self.modes == *other.modes && self.coeffs == other.coeffs
    }
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(modes: Arc<ModeSet>) -> Self {
        let coeffs = vec![zero3(); modes.len()];
        Self { modes, coeffs }
    }

    /// Validating constructor: checks length, finiteness, reality
    /// `c(-n) = conj c(n)` and `|c.n| <= tol |c| |n|`.
    pub fn new(modes: Arc<ModeSet>, coeffs: Vec<Vec3<T>>) -> Result<Self> {
        if coeffs.len() != modes.len() {
            return Err(CoreError::LengthMismatch {
                expected: modes.len(),
                got: coeffs.len(),
            });
        }
        let tol = T::invariant_tol();
        for i in 0..modes.len() {
            let n = modes.vector(i);
            let c = &coeffs[i];
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CoreError::NonFinite(n));
            }
            let j = modes.conj(i);
            let d = &coeffs[j];
            let mismatch = (0..3)
                .map(|k| (d[k] - c[k].conj()).norm_sqr())
                .fold(T::zero(), |a, b| a + b)
                .sqrt();
            let scale = norm_sqr3(c).sqrt().max(norm_sqr3(d).sqrt());
            if mismatch > tol * scale {
                return Err(CoreError::Reality(n));
            }
            let div = dot_n(c, n).norm();
            if div > tol * norm_sqr3(c).sqrt() * T::lit(n.norm()) {
                return Err(CoreError::Solenoidality(n));
            }
        }
        Ok(Self { modes, coeffs })
    }

    /// Builds a field from its values on the positive half; the negative
    /// half is mirrored and every mode Leray-projected.
    pub fn from_fn(modes: Arc<ModeSet>, mut f: impl FnMut(WaveVector) -> Vec3<T>) -> Self {
        let mut coeffs = vec![zero3(); modes.len()];
        for i in modes.positive() {
            coeffs[i] = f(modes.vector(i));
        }
        Self::from_positive_half(modes, coeffs)
    }

    /// Keeps the positive-half coefficients, mirrors and projects.
    pub(crate) fn from_positive_half(modes: Arc<ModeSet>, mut coeffs: Vec<Vec3<T>>) -> Self {
        for i in modes.positive() {
            let n = modes.vector(i);
            let p = leray_project_mode(&coeffs[i], n);
            coeffs[modes.conj(i)] = conj3(&p);
            coeffs[i] = p;
        }
        Self { modes, coeffs }
    }

    /// Field from explicit `(n, c(n))` pairs; conjugate partners are filled in.
    pub fn from_modes(modes: Arc<ModeSet>, entries: &[(WaveVector, Vec3<T>)]) -> Result<Self> {
        let mut coeffs = vec![zero3(); modes.len()];
        for &(n, c) in entries {
            if n.is_zero() {
                return Err(CoreError::NonzeroMean);
            }
            let i = modes.index_of(n).ok_or(CoreError::OutsideBall(n))?;
            coeffs[i] = c;
            coeffs[modes.conj(i)] = conj3(&c);
        }
        Self::new(modes, coeffs)
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn n_max(&self) -> u32 {
        self.modes.n_max()
    }

    pub fn coeffs(&self) -> &[Vec3<T>] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Vec3<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Vec3<T>> {
        self.coeffs
    }

    /// Coefficient at `n` (zero outside the ball).
    pub fn coeff(&self, n: WaveVector) -> Vec3<T> {
        self.modes
            .index_of(n)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(zero3)
    }

    pub fn same_modes(&self, other: &Self) -> Result<()> {
        if *self.modes == *other.modes {
            Ok(())
        } else {
            Err(CoreError::ModeSetMismatch(self.n_max(), other.n_max()))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Re-imposes reality and solenoidality, averaging conjugate partners.
    pub fn leray_project(&mut self) {
        let modes = self.modes.clone();
        for i in modes.positive() {
            let j = modes.conj(i);
            let n = modes.vector(i);
            let half = T::lit(0.5);
            let avg: Vec3<T> = std::array::from_fn(|k| (self.coeffs[i][k] + self.coeffs[j][k].conj()) * half);
            let p = leray_project_mode(&avg, n);
            self.coeffs[j] = conj3(&p);
            self.coeffs[i] = p;
        }
    }

    pub fn scale(&mut self, a: T) {
        for c in &mut self.coeffs {
            for z in c.iter_mut() {
                *z = *z * a;
            }
        }
    }

    pub fn scaled(&self, a: T) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert!(*self.modes == *other.modes);
        for (c, d) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for k in 0..3 {
                c[k] = c[k] + d[k] * a;
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_modes(other)?;
        let mut out = self.clone();
        out.axpy(-T::one(), other);
        Ok(out)
    }

    /// Multiplies each mode by the real weight `w(i)`.
    pub fn weight(&mut self, mut w: impl FnMut(usize) -> T) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let a = w(i);
            for z in c.iter_mut() {
                *z = *z * a;
            }
        }
    }

    /// Galerkin projection onto (or zero extension into) another mode set.
    pub fn resample(&self, modes: Arc<ModeSet>) -> Self {
        let mut coeffs = vec![zero3(); modes.len()];
        for (i, c) in coeffs.iter_mut().enumerate() {
            if let Some(j) = self.modes.index_of(modes.vector(i)) {
                *c = self.coeffs[j];
            }
        }
        Self { modes, coeffs }
    }

    pub fn cast<U: Real>(&self) -> SpectralField<U> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| std::array::from_fn(|k| Complex::new(U::lit(c[k].re.as_f64()), U::lit(c[k].im.as_f64()))))
            .collect();
        SpectralField {
            modes: self.modes.clone(),
            coeffs,
        }
    }

    /// `sum_n c(n) . d(-n)` (complex, no conjugation of `d`).
    pub fn pairing(&self, other: &Self) -> Complex<T> {
        let mut re = crate::scalar::Compensated::new();
        let mut im = crate::scalar::Compensated::new();
        for i in 0..self.modes.len() {
            let c = &self.coeffs[i];
            let d = &other.coeffs[self.modes.conj(i)];
            for k in 0..3 {
                let p = c[k] * d[k];
                re.add(p.re);
                im.add(p.im);
            }
        }
        Complex::new(re.value(), im.value())
    }

    /// Largest `|c(n) - d(n)|` over modes.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(c, d)| {
                (0..3)
                    .map(|k| (c[k] - d[k]).norm_sqr())
                    .fold(T::zero(), |a, b| a + b)
                    .sqrt()
            })
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| norm_sqr3(c).sqrt())
            .fold(T::zero(), T::max)
    }
}

/// The pair `(V, B)` at time `t` together with the diffusivities.
#[derive(Clone, Debug, PartialEq)]
pub struct MhdState<T: Real> {
    pub v: SpectralField<T>,
    pub b: SpectralField<T>,
    pub t: T,
    pub nu: T,
    pub eta: T,
}

impl<T: Real> MhdState<T> {
    pub fn new(v: SpectralField<T>, b: SpectralField<T>, t: T, nu: T, eta: T) -> Result<Self> {
        v.same_modes(&b)?;
        if !(nu > T::zero() && eta > T::zero()) {
            return Err(CoreError::InvalidParameter(format!(
                "diffusivities must be positive (nu={nu}, eta={eta})"
            )));
        }
        Ok(Self { v, b, t, nu, eta })
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.v.modes()
    }

    pub fn n_max(&self) -> u32 {
        self.v.n_max()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.b.is_finite()
    }

    pub fn cast<U: Real>(&self) -> MhdState<U> {
        MhdState {
            v: self.v.cast(),
            b: self.b.cast(),
            t: U::lit(self.t.as_f64()),
            nu: U::lit(self.nu.as_f64()),
            eta: U::lit(self.eta.as_f64()),
        }
    }

    /// Galerkin projection of both fields onto the radius-`n` ball.
    pub fn resample(&self, n_max: u32) -> Self {
        let m = ModeSet::shared(n_max);
        Self {
            v: self.v.resample(m.clone()),
            b: self.b.resample(m),
            ..self.clone()
        }
    }
}
