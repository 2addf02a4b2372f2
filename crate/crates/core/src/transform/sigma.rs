//! The nonlinear sums `i Sigma_p` of the transformed energy balance.

use crate::error::Result;
use crate::field::MhdState;
use crate::galerkin::rhs::Convolver;
use crate::scalar::{Compensated, Real};

use super::phi::PhiState;

#[inline]
fn dotc<T: Real>(a: &crate::field::Vec3<T>, b: &crate::field::Vec3<T>) -> num_complex::Complex<T> {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `i Sigma_p` by direct double summation over `(n, k)`:
///
/// `i sum |n|^p W(n,k) [-(v~_{n-k}.k)(v~_k.v~_{-n} + b~_k.b~_{-n})
///   + (b~_{n-k}.k)(b~_k.v~_{-n} + v~_k.b~_{-n})]`
///
/// with `W = e^{delta Phi (|n| - |k| - |n-k|)}`; for `p = 0` the kernel is
/// replaced by its antisymmetrised form
/// `(e^{delta Phi(|n|-|k|-|n-k|)} - e^{delta Phi(|k|-|n|-|n-k|)})/2`.
/// Returns the real part; the imaginary part vanishes up to rounding.
pub fn sigma_p_direct<T: Real>(ps: &PhiState<T>, p: T) -> T {
    let modes = ps.v.modes().clone();
    let (v, b) = (ps.v.coeffs(), ps.b.coeffs());
    let dp = ps.delta * ps.phi;
    let norms: Vec<T> = (0..modes.len()).map(|i| T::lit(modes.norm2(i) as f64).sqrt()).collect();
    let sym = p == T::zero();
    let half = T::lit(0.5);
    let mut acc = Compensated::new();
    for i in 0..modes.len() {
        let n = modes.vector(i);
        let rn = norms[i];
        let weight_n = rn.powf(p);
        let (vm, bm) = (&v[modes.conj(i)], &b[modes.conj(i)]);
        let mut inner = Compensated::new();
        for j in 0..modes.len() {
            let Some(l) = modes.index_of(n - modes.vector(j)) else {
                continue;
            };
            let (rk, rl) = (norms[j], norms[l]);
            let w = if sym {
                ((dp * (rn - rk - rl)).exp() - (dp * (rk - rn - rl)).exp()) * half
            } else {
                (dp * (rn - rk - rl)).exp()
            };
            let k = modes.vector(j).0;
            let kk = [T::lit(k[0] as f64), T::lit(k[1] as f64), T::lit(k[2] as f64)];
            let vl_k = v[l][0] * kk[0] + v[l][1] * kk[1] + v[l][2] * kk[2];
            let bl_k = b[l][0] * kk[0] + b[l][1] * kk[1] + b[l][2] * kk[2];
            let term = -(vl_k * (dotc(&v[j], vm) + dotc(&b[j], bm))) + bl_k * (dotc(&b[j], vm) + dotc(&v[j], bm));
            // i * term, real part = -Im(term)
            inner.add(-term.im * w);
        }
        acc.add(weight_n * inner.value());
    }
    acc.value()
}

/// `i Sigma_p = sum_n |n|^p e^{2 delta Phi |n|} Re(N_V(n).V_{-n} + N_B(n).B_{-n})`
/// with `N` the quadratic part of the Galerkin right-hand side, evaluated
/// pseudo-spectrally.
pub fn sigma_p_fast<T: Real>(conv: &mut Convolver<T>, state: &MhdState<T>, delta: T, phi: T, p: T) -> T {
    let (nv, nb) = conv.nonlinear(&state.v, &state.b);
    sigma_p_from_nonlinear(state, &nv, &nb, delta, phi, p)
}

pub(crate) fn sigma_p_from_nonlinear<T: Real>(
    state: &MhdState<T>,
    nv: &crate::field::SpectralField<T>,
    nb: &crate::field::SpectralField<T>,
    delta: T,
    phi: T,
    p: T,
) -> T {
    let modes = state.modes().clone();
    let mut per_slot = vec![Compensated::<T>::new(); modes.slots().len()];
    for i in 0..modes.len() {
        let j = modes.conj(i);
        let e = dotc(&nv.coeffs()[i], &state.v.coeffs()[j]) + dotc(&nb.coeffs()[i], &state.b.coeffs()[j]);
        per_slot[modes.slot_of(i)].add(e.re);
    }
    let mut acc = Compensated::new();
    for (q, a) in modes.slots().iter().zip(&per_slot).rev() {
        let r = T::lit(*q as f64).sqrt();
        acc.add(r.powf(p) * (T::lit(2.0) * delta * phi * r).exp() * a.value());
    }
    acc.value()
}

/// Mode count up to which [`sigma_p`] uses the direct sum.
pub const DIRECT_SIGMA_MODES: usize = 2200;

/// `i Sigma_p`, by direct summation for small mode sets and through the
/// weighted pseudo-spectral product otherwise.
pub fn sigma_p<T: Real>(conv: &mut Convolver<T>, state: &MhdState<T>, ps: &PhiState<T>, p: T) -> Result<T> {
    if state.modes().len() <= DIRECT_SIGMA_MODES {
        Ok(sigma_p_direct(ps, p))
    } else {
        Ok(sigma_p_fast(conv, state, ps.delta, ps.phi, p))
    }
}
