//! Collocation grid and pruned three-dimensional FFTs.
//!
//! Only lines that carry data in the truncation ball are transformed: on
//! the way to physical space the third axis is transformed on the disk
//! `n1^2 + n2^2 <= N^2`, the second axis for `|n1| <= N`, the first axis
//! everywhere; the way back mirrors this.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::modes::ModeSet;
use crate::scalar::Real;

/// Smallest `M >= min` whose prime factors are all in {2, 3, 5, 7}.
pub fn smooth_size(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5, 7] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Grid points per dimension for exact products of two ball-`N` fields:
/// the aliased image of `|n_i| <= 2N` must miss `|n_i| <= N`, so `M >= 3N + 1`.
pub fn dealiased_size(n_max: u32) -> usize {
    smooth_size(3 * n_max as usize + 1)
}

pub struct Grid<T: Real> {
    n_max: usize,
    m: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
    plane: Vec<Complex<T>>,
    /// For each low `i1`: `k(n1) = floor(sqrt(N^2 - n1^2))`.
    low: Vec<(usize, usize)>,
    /// Grid index of every mode, flattened.
    mode_index: Vec<usize>,
}

impl<T: Real> Grid<T> {
    pub fn new(modes: &ModeSet, m: usize) -> Self {
        let n_max = modes.n_max() as usize;
        assert!(m > 2 * n_max, "grid too small for the mode set");
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let zero = Complex::new(T::zero(), T::zero());
        let n = n_max as i64;
        let low = (-n..=n)
            .map(|n1| {
                let k = ((n * n - n1 * n1) as f64).sqrt().floor() as usize;
                (wrap(n1, m), k)
            })
            .collect();
        let mode_index = modes
            .vectors()
            .iter()
            .map(|w| {
                let [a, b, c] = w.0;
                (wrap(a as i64, m) * m + wrap(b as i64, m)) * m + wrap(c as i64, m)
            })
            .collect();
        Self {
            n_max,
            m,
            fwd,
            inv,
            scratch: vec![zero; scratch_len],
            plane: vec![zero; m * m],
            low,
            mode_index,
        }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn buffer(&self) -> Vec<Complex<T>> {
        vec![Complex::new(T::zero(), T::zero()); self.points()]
    }

    /// Flat grid index of mode `i` of the mode set used at construction.
    #[inline]
    pub fn mode_index(&self, i: usize) -> usize {
        self.mode_index[i]
    }

    /// Zeroes `buf` and writes `value(i)` at the grid slot of each mode.
    pub fn scatter(&self, buf: &mut [Complex<T>], mut value: impl FnMut(usize) -> Complex<T>) {
        let zero = Complex::new(T::zero(), T::zero());
        buf.iter_mut().for_each(|z| *z = zero);
        for (i, &g) in self.mode_index.iter().enumerate() {
            buf[g] = value(i);
        }
    }

    /// `f(x_j) = sum_n c_n e^{i n.x_j}` for data supported in the ball.
    pub fn to_physical(&mut self, buf: &mut [Complex<T>]) {
        let m = self.m;
        let inv = self.inv.clone();
        // axis 3 on the disk: for fixed i1 the admissible i2 form two runs
        for &(i1, k) in &self.low {
            let base = i1 * m * m;
            inv.process_with_scratch(&mut buf[base..base + (k + 1) * m], &mut self.scratch);
            if k > 0 {
                let lo = base + (m - k) * m;
                inv.process_with_scratch(&mut buf[lo..lo + k * m], &mut self.scratch);
            }
        }
        self.axis2(buf, &inv);
        self.axis1(buf, &inv);
    }

    /// `c_n = M^{-3} sum_j f(x_j) e^{-i n.x_j}`, valid only on the ball.
    pub fn to_spectral(&mut self, buf: &mut [Complex<T>]) {
        let m = self.m;
        let fwd = self.fwd.clone();
        self.axis1(buf, &fwd);
        self.axis2(buf, &fwd);
        for &(i1, k) in &self.low {
            let base = i1 * m * m;
            fwd.process_with_scratch(&mut buf[base..base + (k + 1) * m], &mut self.scratch);
            if k > 0 {
                let lo = base + (m - k) * m;
                fwd.process_with_scratch(&mut buf[lo..lo + k * m], &mut self.scratch);
            }
        }
    }

    /// Normalisation applied by the caller after [`Grid::to_spectral`].
    pub fn inv_points(&self) -> T {
        T::one() / T::lit(self.points() as f64)
    }

    fn axis2(&mut self, buf: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let m = self.m;
        for &(i1, _) in &self.low {
            let base = i1 * m * m;
            let block = &mut buf[base..base + m * m];
            transpose(block, &mut self.plane, m);
            fft.process_with_scratch(&mut self.plane, &mut self.scratch);
            transpose(&self.plane, block, m);
        }
    }

    fn axis1(&mut self, buf: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let m = self.m;
        let mm = m * m;
        for i2 in 0..m {
            for i1 in 0..m {
                let src = &buf[i1 * mm + i2 * m..i1 * mm + i2 * m + m];
                for (i3, z) in src.iter().enumerate() {
                    self.plane[i3 * m + i1] = *z;
                }
            }
            fft.process_with_scratch(&mut self.plane, &mut self.scratch);
            for i1 in 0..m {
                let dst = &mut buf[i1 * mm + i2 * m..i1 * mm + i2 * m + m];
                for (i3, z) in dst.iter_mut().enumerate() {
                    *z = self.plane[i3 * m + i1];
                }
            }
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

#[inline]
fn wrap(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

fn transpose<T: Copy>(src: &[T], dst: &mut [T], m: usize) {
    const B: usize = 8;
    for ib in (0..m).step_by(B) {
        for jb in (0..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                for j in jb..(jb + B).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}
