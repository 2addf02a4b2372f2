//! Right-hand side of the Galerkin system.
//!
//! Velocity: `-i sum_k P_n[(V_{n-k}.k) V_k - (B_{n-k}.k) B_k] - nu |n|^2 V_n`;
//! magnetic: `i n x sum_k V_{n-k} x B_k - eta |n|^2 B_n`.

use std::sync::Arc;

use num_complex::Complex;

use crate::field::{leray_project_mode, zero3, MhdState, SpectralField, Vec3};
use crate::grid::{dealiased_size, Grid};
use crate::modes::{ModeSet, WaveVector};
use crate::scalar::Real;

pub type FieldPair<T> = (SpectralField<T>, SpectralField<T>);

#[inline]
fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
fn nvec<T: Real>(n: WaveVector) -> [T; 3] {
    [T::lit(n.0[0] as f64), T::lit(n.0[1] as f64), T::lit(n.0[2] as f64)]
}

#[inline]
fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn i_n_cross<T: Real>(n: WaveVector, w: &Vec3<T>) -> Vec3<T> {
    let k = nvec::<T>(n);
    // n x w
    let c = [
        w[2] * k[1] - w[1] * k[2],
        w[0] * k[2] - w[2] * k[0],
        w[1] * k[0] - w[0] * k[1],
    ];
    let i = cx(T::zero(), T::one());
    [c[0] * i, c[1] * i, c[2] * i]
}

/// Bilinear form by explicit double summation over `k`:
/// velocity `-i sum_k P_n[(V1_{n-k}.k) V2_k - (B1_{n-k}.k) B2_k]`,
/// magnetic `i n x sum_k V1_{n-k} x B2_k`. Reference implementation.
pub fn bilinear_direct<T: Real>(
    v1: &SpectralField<T>,
    b1: &SpectralField<T>,
    v2: &SpectralField<T>,
    b2: &SpectralField<T>,
) -> FieldPair<T> {
    let modes = v1.modes().clone();
    let len = modes.len();
    let mut out_v = vec![zero3::<T>(); len];
    let mut out_b = vec![zero3::<T>(); len];
    let (c1, d1, c2, d2) = (v1.coeffs(), b1.coeffs(), v2.coeffs(), b2.coeffs());
    for i in modes.positive() {
        let n = modes.vector(i);
        let mut acc_v = zero3::<T>();
        let mut acc_w = zero3::<T>();
        for j in 0..len {
            let k = modes.vector(j);
            let Some(l) = modes.index_of(n - k) else {
                continue;
            };
            let kk = nvec::<T>(k);
            let vk = c1[l][0] * kk[0] + c1[l][1] * kk[1] + c1[l][2] * kk[2];
            let bk = d1[l][0] * kk[0] + d1[l][1] * kk[1] + d1[l][2] * kk[2];
            for a in 0..3 {
                acc_v[a] = acc_v[a] + vk * c2[j][a] - bk * d2[j][a];
            }
            let x = cross(&c1[l], &d2[j]);
            for a in 0..3 {
                acc_w[a] = acc_w[a] + x[a];
            }
        }
        let minus_i = cx(T::zero(), -T::one());
        let p = leray_project_mode(&acc_v, n);
        out_v[i] = [p[0] * minus_i, p[1] * minus_i, p[2] * minus_i];
        out_b[i] = i_n_cross(n, &acc_w);
    }
    (
        SpectralField::from_positive_half(modes.clone(), out_v),
        SpectralField::from_positive_half(modes, out_b),
    )
}

/// Nonlinear part of the Galerkin right-hand side by direct summation.
pub fn nonlinear_rhs_direct<T: Real>(v: &SpectralField<T>, b: &SpectralField<T>) -> FieldPair<T> {
    bilinear_direct(v, b, v, b)
}

/// Pseudo-spectral evaluation of the quadratic terms on a `3N+1` grid.
///
/// Because `div V = 0`, `sum_k (V_{n-k}.k) V_k = sum_j n_j FT(V_j V_i)(n)`, so
/// the velocity term is `-P_n(i n_j T_ij)` with `T_ij = V_i V_j - B_i B_j`;
/// the magnetic term is `i n x FT(V x B)`. Two real fields are packed into
/// one complex transform.
pub struct Convolver<T: Real> {
    modes: Arc<ModeSet>,
    grid: Grid<T>,
    phys: Vec<Vec<Complex<T>>>,
    prod: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Convolver<T> {
    pub fn new(modes: Arc<ModeSet>) -> Self {
        let m = dealiased_size(modes.n_max());
        Self::with_grid(modes, m)
    }

    /// Uses an explicit grid size (smaller than `3N+1` aliases).
    pub fn with_grid(modes: Arc<ModeSet>, m: usize) -> Self {
        let grid = Grid::new(&modes, m);
        Self {
            modes,
            grid,
            phys: Vec::new(),
            prod: Vec::new(),
        }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn grid_size(&self) -> usize {
        self.grid.size()
    }

    fn ensure(&mut self, nphys: usize, nprod: usize) {
        while self.phys.len() < nphys {
            self.phys.push(self.grid.buffer());
        }
        while self.prod.len() < nprod {
            self.prod.push(self.grid.buffer());
        }
    }

    /// Transforms real component fields pairwise to physical space:
    /// buffer `k` holds component `2k` in its real and `2k+1` in its
    /// imaginary part.
    fn components_to_physical(&mut self, comps: &[(&SpectralField<T>, usize)]) {
        let npairs = comps.len().div_ceil(2);
        for p in 0..npairs {
            let (fa, ka) = comps[2 * p];
            let second = comps.get(2 * p + 1).copied();
            let buf = &mut self.phys[p];
            let ca = fa.coeffs();
            match second {
                Some((fb, kb)) => {
                    let cb = fb.coeffs();
                    // a + i b
                    self.grid
                        .scatter(buf, |i| ca[i][ka] + cx(-cb[i][kb].im, cb[i][kb].re));
                }
                None => self.grid.scatter(buf, |i| ca[i][ka]),
            }
            self.grid.to_physical(buf);
        }
    }

    /// Forward-transforms packed real products; returns per-mode spectra
    /// of each product on the positive half (`nprod` entries per mode).
    fn products_to_spectral(&mut self, nprod: usize) -> Vec<Complex<T>> {
        let modes = self.modes.clone();
        let scale = self.grid.inv_points();
        let half = T::lit(0.5);
        let mut spec = vec![cx(T::zero(), T::zero()); nprod * modes.len()];
        for p in 0..nprod.div_ceil(2) {
            let buf = &mut self.prod[p];
            self.grid.to_spectral(buf);
            let has_b = 2 * p + 1 < nprod;
            for i in modes.positive() {
                let c = buf[self.grid.mode_index(i)] * scale;
                let d = buf[self.grid.mode_index(modes.conj(i))].conj() * scale;
                let s = &mut spec[i * nprod..(i + 1) * nprod];
                s[2 * p] = (c + d) * half;
                if has_b {
                    // (c - d) / (2i)
                    let e = (c - d) * half;
                    s[2 * p + 1] = cx(e.im, -e.re);
                }
            }
        }
        spec
    }

    /// Assembles `(-P_n(i n_j T_ij), i n x W)` from the symmetric tensor
    /// spectra (order 11,12,13,22,23,33) and `W`.
    fn assemble_symmetric(&self, spec: &[Complex<T>]) -> FieldPair<T> {
        let modes = self.modes.clone();
        let mut out_v = vec![zero3::<T>(); modes.len()];
        let mut out_b = vec![zero3::<T>(); modes.len()];
        let minus_i = cx(T::zero(), -T::one());
        for i in modes.positive() {
            let n = modes.vector(i);
            let k = nvec::<T>(n);
            let s = &spec[i * 9..(i + 1) * 9];
            let t = [[s[0], s[1], s[2]], [s[1], s[3], s[4]], [s[2], s[4], s[5]]];
            let div: Vec3<T> = std::array::from_fn(|a| t[a][0] * k[0] + t[a][1] * k[1] + t[a][2] * k[2]);
            let p = leray_project_mode(&div, n);
            out_v[i] = [p[0] * minus_i, p[1] * minus_i, p[2] * minus_i];
            out_b[i] = i_n_cross(n, &[s[6], s[7], s[8]]);
        }
        (
            SpectralField::from_positive_half(modes.clone(), out_v),
            SpectralField::from_positive_half(modes, out_b),
        )
    }

    /// Nonlinear part of the right-hand side.
    pub fn nonlinear(&mut self, v: &SpectralField<T>, b: &SpectralField<T>) -> FieldPair<T> {
        self.ensure(3, 5);
        self.components_to_physical(&[(v, 0), (v, 1), (v, 2), (b, 0), (b, 1), (b, 2)]);
        let np = self.grid.points();
        let (p0, rest) = self.phys.split_at(1);
        let (p1, p2) = rest.split_at(1);
        let (p0, p1, p2) = (&p0[0], &p1[0], &p2[0]);
        let [q0, q1, q2, q3, q4, ..] = &mut self.prod[..] else {
            unreachable!()
        };
        for x in 0..np {
            let (v1, v2, v3) = (p0[x].re, p0[x].im, p1[x].re);
            let (b1, b2, b3) = (p1[x].im, p2[x].re, p2[x].im);
            let t11 = v1 * v1 - b1 * b1;
            let t12 = v1 * v2 - b1 * b2;
            let t13 = v1 * v3 - b1 * b3;
            let t22 = v2 * v2 - b2 * b2;
            let t23 = v2 * v3 - b2 * b3;
            let t33 = v3 * v3 - b3 * b3;
            let w1 = v2 * b3 - v3 * b2;
            let w2 = v3 * b1 - v1 * b3;
            let w3 = v1 * b2 - v2 * b1;
            q0[x] = cx(t11, t12);
            q1[x] = cx(t13, t22);
            q2[x] = cx(t23, t33);
            q3[x] = cx(w1, w2);
            q4[x] = cx(w3, T::zero());
        }
        let spec = self.products_to_spectral(9);
        self.assemble_symmetric(&spec)
    }

    /// Derivative of the nonlinear part along `(dv, db)`, i.e.
    /// `bilinear(dS, S) + bilinear(S, dS)`.
    pub fn nonlinear_tangent(
        &mut self,
        v: &SpectralField<T>,
        b: &SpectralField<T>,
        dv: &SpectralField<T>,
        db: &SpectralField<T>,
    ) -> FieldPair<T> {
        self.ensure(6, 5);
        self.components_to_physical(&[
            (v, 0),
            (v, 1),
            (v, 2),
            (b, 0),
            (b, 1),
            (b, 2),
            (dv, 0),
            (dv, 1),
            (dv, 2),
            (db, 0),
            (db, 1),
            (db, 2),
        ]);
        let np = self.grid.points();
        let ph = &self.phys;
        let [q0, q1, q2, q3, q4, ..] = &mut self.prod[..] else {
            unreachable!()
        };
        for x in 0..np {
            let u = [ph[0][x].re, ph[0][x].im, ph[1][x].re];
            let c = [ph[1][x].im, ph[2][x].re, ph[2][x].im];
            let du = [ph[3][x].re, ph[3][x].im, ph[4][x].re];
            let dc = [ph[4][x].im, ph[5][x].re, ph[5][x].im];
            let t = |a: usize, bb: usize| du[a] * u[bb] + u[a] * du[bb] - dc[a] * c[bb] - c[a] * dc[bb];
            let w1 = du[1] * c[2] - du[2] * c[1] + u[1] * dc[2] - u[2] * dc[1];
            let w2 = du[2] * c[0] - du[0] * c[2] + u[2] * dc[0] - u[0] * dc[2];
            let w3 = du[0] * c[1] - du[1] * c[0] + u[0] * dc[1] - u[1] * dc[0];
            q0[x] = cx(t(0, 0), t(0, 1));
            q1[x] = cx(t(0, 2), t(1, 1));
            q2[x] = cx(t(1, 2), t(2, 2));
            q3[x] = cx(w1, w2);
            q4[x] = cx(w3, T::zero());
        }
        let spec = self.products_to_spectral(9);
        self.assemble_symmetric(&spec)
    }

    /// General bilinear form (see [`bilinear_direct`]); `v1` must be
    /// solenoidal.
    pub fn bilinear(
        &mut self,
        v1: &SpectralField<T>,
        b1: &SpectralField<T>,
        v2: &SpectralField<T>,
        b2: &SpectralField<T>,
    ) -> FieldPair<T> {
        self.ensure(6, 6);
        self.components_to_physical(&[
            (v1, 0),
            (v1, 1),
            (v1, 2),
            (b1, 0),
            (b1, 1),
            (b1, 2),
            (v2, 0),
            (v2, 1),
            (v2, 2),
            (b2, 0),
            (b2, 1),
            (b2, 2),
        ]);
        let np = self.grid.points();
        let ph = &self.phys;
        let [q0, q1, q2, q3, q4, q5, ..] = &mut self.prod[..] else {
            unreachable!()
        };
        for x in 0..np {
            let u1 = [ph[0][x].re, ph[0][x].im, ph[1][x].re];
            let c1 = [ph[1][x].im, ph[2][x].re, ph[2][x].im];
            let u2 = [ph[3][x].re, ph[3][x].im, ph[4][x].re];
            let c2 = [ph[4][x].im, ph[5][x].re, ph[5][x].im];
            // T_ij = V2_i V1_j - B2_i B1_j
            let t = |i: usize, j: usize| u2[i] * u1[j] - c2[i] * c1[j];
            q0[x] = cx(t(0, 0), t(0, 1));
            q1[x] = cx(t(0, 2), t(1, 0));
            q2[x] = cx(t(1, 1), t(1, 2));
            q3[x] = cx(t(2, 0), t(2, 1));
            let w1 = u1[1] * c2[2] - u1[2] * c2[1];
            let w2 = u1[2] * c2[0] - u1[0] * c2[2];
            let w3 = u1[0] * c2[1] - u1[1] * c2[0];
            q4[x] = cx(t(2, 2), w1);
            q5[x] = cx(w2, w3);
        }
        let spec = self.products_to_spectral(12);
        let modes = self.modes.clone();
        let mut out_v = vec![zero3::<T>(); modes.len()];
        let mut out_b = vec![zero3::<T>(); modes.len()];
        let minus_i = cx(T::zero(), -T::one());
        for i in modes.positive() {
            let n = modes.vector(i);
            let k = nvec::<T>(n);
            let s = &spec[i * 12..(i + 1) * 12];
            let div: Vec3<T> = std::array::from_fn(|a| s[3 * a] * k[0] + s[3 * a + 1] * k[1] + s[3 * a + 2] * k[2]);
            let p = leray_project_mode(&div, n);
            out_v[i] = [p[0] * minus_i, p[1] * minus_i, p[2] * minus_i];
            out_b[i] = i_n_cross(n, &[s[9], s[10], s[11]]);
        }
        (
            SpectralField::from_positive_half(modes.clone(), out_v),
            SpectralField::from_positive_half(modes, out_b),
        )
    }
}

/// Adds `-nu |n|^2 V` and `-eta |n|^2 B` to a nonlinear pair.
pub fn add_diffusion<T: Real>(
    nl: &mut FieldPair<T>,
    v: &SpectralField<T>,
    b: &SpectralField<T>,
    nu: T,
    eta: T,
) {
    let modes = v.modes().clone();
    for (i, (o, c)) in nl.0.coeffs_mut().iter_mut().zip(v.coeffs()).enumerate() {
        let f = -nu * T::lit(modes.norm2(i) as f64);
        for k in 0..3 {
            o[k] = o[k] + c[k] * f;
        }
    }
    for (i, (o, c)) in nl.1.coeffs_mut().iter_mut().zip(b.coeffs()).enumerate() {
        let f = -eta * T::lit(modes.norm2(i) as f64);
        for k in 0..3 {
            o[k] = o[k] + c[k] * f;
        }
    }
}

/// `(dV/dt, dB/dt)` for the Galerkin system.
pub fn full_rhs<T: Real>(conv: &mut Convolver<T>, s: &MhdState<T>) -> FieldPair<T> {
    let mut out = conv.nonlinear(&s.v, &s.b);
    add_diffusion(&mut out, &s.v, &s.b, s.nu, s.eta);
    out
}

/// `(dV/dt, dB/dt)` using the direct convolution.
pub fn full_rhs_direct<T: Real>(s: &MhdState<T>) -> FieldPair<T> {
    let mut out = nonlinear_rhs_direct(&s.v, &s.b);
    add_diffusion(&mut out, &s.v, &s.b, s.nu, s.eta);
    out
}

/// Second time derivative: diffusion applied to the first derivative plus
/// the bilinear terms with one argument replaced by its time derivative.
pub fn second_time_derivative<T: Real>(
    conv: &mut Convolver<T>,
    s: &MhdState<T>,
    first: &FieldPair<T>,
) -> FieldPair<T> {
    let mut out = conv.nonlinear_tangent(&s.v, &s.b, &first.0, &first.1);
    add_diffusion(&mut out, &first.0, &first.1, s.nu, s.eta);
    out
}

/// Second time derivative with the direct convolution.
pub fn second_time_derivative_direct<T: Real>(s: &MhdState<T>, first: &FieldPair<T>) -> FieldPair<T> {
    let (a_v, a_b) = bilinear_direct(&first.0, &first.1, &s.v, &s.b);
    let (c_v, c_b) = bilinear_direct(&s.v, &s.b, &first.0, &first.1);
    let mut out = (a_v, a_b);
    out.0.axpy(T::one(), &c_v);
    out.1.axpy(T::one(), &c_b);
    add_diffusion(&mut out, &first.0, &first.1, s.nu, s.eta);
    out
}
