mod common;

use std::f64::consts::{E, PI};

use amhd_core::constants::{certified_cp, estimate_cs, lattice_constant, ConstantsTable, Provenance};
use amhd_core::field::leray_project;
use amhd_core::grid::{dealiased_size, smooth_size, Grid};
use amhd_core::norms::{gevrey_norm, gevrey_norm_sq, shell_spectrum, sobolev_norm, sobolev_norm_sq, wiener_norm};
use amhd_core::{CoreError, ModeSet, SpectralField, WaveVector};
use common::*;
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

#[test]
fn leray_examples() {
    let n = WaveVector::new(1, 0, 0);
    let p = leray_project(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], n).unwrap();
    assert_eq!(p, [c(0.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
    let w = WaveVector::new(1, -2, 2);
    let par = leray_project(&[c(2.0, 1.0), c(-4.0, -2.0), c(4.0, 2.0)], w).unwrap();
    assert!(par.iter().all(|z| z.norm() < 1e-15));
    let perp = [c(2.0, 0.5), c(1.0, 0.25), c(0.0, 0.0)];
    assert_eq!(leray_project(&perp, w).unwrap(), perp);
    assert!(matches!(
        leray_project(&perp, WaveVector::new(0, 0, 0)),
        Err(CoreError::ZeroWaveVector)
    ));
    assert_eq!(CoreError::ZeroWaveVector.to_string(), "projection undefined at n=0");
}

fn cvec() -> impl Strategy<Value = [Complex<f64>; 3]> {
    prop::array::uniform3((-5.0..5.0f64, -5.0..5.0f64)).prop_map(|a| a.map(|(x, y)| c(x, y)))
}

fn wavevector() -> impl Strategy<Value = WaveVector> {
    prop::array::uniform3(-6i32..=6)
        .prop_filter("nonzero", |a| a != &[0, 0, 0])
        .prop_map(WaveVector)
}

proptest! {
    #[test]
    fn leray_idempotent_and_self_adjoint(f in cvec(), g in cvec(), n in wavevector()) {
        let pf = leray_project(&f, n).unwrap();
        let ppf = leray_project(&pf, n).unwrap();
        for k in 0..3 {
            prop_assert!((pf[k] - ppf[k]).norm() <= 1e-12 * (1.0 + pf[k].norm()));
        }
        let pg = leray_project(&g, n).unwrap();
        let lhs: f64 = (0..3).map(|k| (g[k] * pf[k].conj()).re).sum();
        let rhs: f64 = (0..3).map(|k| (pg[k] * f[k].conj()).re).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn sobolev_examples() {
    let m = ModeSet::shared(3);
    assert_eq!(sobolev_norm(&SpectralField::<f64>::zeros(m), 1.3), 0.0);
    let v1 = cos_mode(3, 1, 1.0);
    for s in [-2.0, 0.0, 0.5, 3.0] {
        assert!((sobolev_norm(&v1, s) - 0.5f64.sqrt()).abs() < 1e-15);
    }
    let v2 = cos_mode(3, 2, 1.0);
    assert!((sobolev_norm_sq(&v2, 1.0) - 2.0).abs() < 1e-14);
    assert!((sobolev_norm_sq(&v2, 2.0) - 8.0).abs() < 1e-13);
}

#[test]
fn gevrey_examples() {
    let v2 = cos_mode(3, 2, 1.0);
    let g = gevrey_norm_sq(&v2, 0.5, 0.0).unwrap();
    assert!((g - 0.5 * E * E).abs() < 1e-13, "{g}");
    assert!((0.5 * E * E - 3.6945).abs() < 1e-4);
    let mut r = rng(3);
    let m = ModeSet::shared(4);
    for _ in 0..100 {
        let w = random_field(&m, &mut r, 1.0);
        let s = r.gen_range(-2.0..3.0);
        let a = gevrey_norm(&w, 0.0, s).unwrap();
        let b = sobolev_norm(&w, s);
        assert!((a - b).abs() <= 1e-14 * b);
    }
    let err = gevrey_norm_sq(&v2, 1e3, 0.0).unwrap_err();
    assert!(matches!(err, CoreError::WeightOverflow { .. }));
}

#[test]
fn wiener_examples_and_sup_bound() {
    let m = ModeSet::shared(3);
    assert_eq!(wiener_norm(&SpectralField::<f64>::zeros(m.clone()), 0.0), 0.0);
    let v2 = cos_mode(3, 2, 1.0);
    assert!((wiener_norm(&v2, 0.0) - 1.0).abs() < 1e-15);
    assert!((wiener_norm(&v2, 1.0) - 2.0).abs() < 1e-15);
    let mut r = rng(11);
    for _ in 0..100 {
        let w = random_field(&m, &mut r, 0.5);
        let bound = wiener_norm(&w, 0.0);
        for _ in 0..40 {
            let x = [r.gen_range(0.0..2.0 * PI), r.gen_range(0.0..2.0 * PI), r.gen_range(0.0..2.0 * PI)];
            assert!(mag(eval(&w, x)) <= bound * (1.0 + 1e-12));
        }
    }
}

#[test]
fn shell_spectrum_examples() {
    let m = ModeSet::shared(6);
    assert!(shell_spectrum(&SpectralField::<f64>::zeros(m.clone())).iter().all(|a| *a == 0.0));
    let sp = shell_spectrum(&cos_mode(6, 2, 1.0));
    for (k, a) in sp.iter().enumerate() {
        let want = if k == 2 { 0.5f64.sqrt() } else { 0.0 };
        assert!((a - want).abs() < 1e-15, "shell {k}: {a}");
    }
    // |c(n)| = e^{-|n|}, spread over the transverse directions
    let w = SpectralField::from_fn(m.clone(), |n| {
        let t = if n.0[0] == 0 && n.0[1] == 0 {
            [1.0, 0.0, 0.0]
        } else {
            let (a, b) = (n.0[0] as f64, n.0[1] as f64);
            let l = (a * a + b * b).sqrt();
            [-b / l, a / l, 0.0]
        };
        let amp = (-n.norm()).exp();
        t.map(|x| c(x * amp, 0.0))
    });
    let sp = shell_spectrum(&w);
    for k in 2..sp.len() {
        assert!(sp[k] < sp[k - 1], "shell {k}");
    }
}

#[test]
fn grid_transform_matches_direct_sum() {
    let m = ModeSet::shared(3);
    let mut r = rng(5);
    let w = random_field(&m, &mut r, 0.0);
    let size = dealiased_size(3);
    assert_eq!(size, 10);
    let mut g = Grid::<f64>::new(&m, size);
    let mut buf = g.buffer();
    g.scatter(&mut buf, |i| w.coeffs()[i][1]);
    g.to_physical(&mut buf);
    let h = 2.0 * PI / size as f64;
    for (i1, i2, i3) in [(0, 0, 0), (1, 4, 7), (9, 2, 5), (3, 3, 3)] {
        let x = [i1 as f64 * h, i2 as f64 * h, i3 as f64 * h];
        let want = eval(&w, x)[1];
        let got = buf[(i1 * size + i2) * size + i3];
        assert!((got.re - want).abs() < 1e-12 && got.im.abs() < 1e-12);
    }
    g.to_spectral(&mut buf);
    let k = g.inv_points();
    for i in 0..m.len() {
        assert!((buf[g.mode_index(i)] * k - w.coeffs()[i][1]).norm() < 1e-14);
    }
    assert_eq!(smooth_size(49), 49);
    assert_eq!(smooth_size(97), 98);
}

#[test]
fn lattice_constant_examples() {
    let c02 = lattice_constant(0.0, 2.0).unwrap();
    assert!((c02 * c02 - PI * 3f64.sqrt().exp()).abs() < 1e-10);
    assert!((c02 - 4.214).abs() < 1e-3);
    let c22 = lattice_constant(2.0, 2.0).unwrap();
    assert!((c22 * c22 - 12.0 * PI * 3f64.sqrt().exp()).abs() < 1e-9);
    assert!((c22 - 14.60).abs() < 5e-3);
    assert!(lattice_constant(-3.0, 1.0).is_err());
    assert!(lattice_constant(0.0, 0.0).is_err());
}

#[test]
fn lattice_sums_stay_below_bound() {
    // radial counts once, then every (p, a, Phi) from them
    let r = 200i64;
    let counts = {
        let mut out = vec![0u64; (r * r + 1) as usize];
        for a in -r..=r {
            for b in -r..=r {
                let q = a * a + b * b;
                if q > r * r {
                    continue;
                }
                let cmax = ((r * r - q) as f64).sqrt() as i64;
                for c in -cmax..=cmax {
                    out[(q + c * c) as usize] += 1;
                }
            }
        }
        out
    };
    for p in [-1.0, 0.0, 1.0, 2.0] {
        for a in [0.5, 1.0, 2.0] {
            for phi in [0.1, 0.5, 1.0] {
                let sum: f64 = counts
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, n)| {
                        let rr = (k as f64).sqrt();
                        *n as f64 * (-a * phi * rr).exp() * rr.powf(p)
                    })
                    .sum();
                let c = lattice_constant(p, a).unwrap();
                assert!(sum <= c * c * phi.powf(-(p + 3.0)), "p={p} a={a} phi={phi}: {sum}");
            }
        }
    }
}

#[test]
fn certified_cp_against_lattice_sum() {
    let c2 = certified_cp(2.0).unwrap();
    // brute force over |n| <= 60 plus the shell-volume tail bound
    let r = 60.0;
    let partial = lattice_sum(60, |k| (k as f64).powi(-2));
    let h = 3f64.sqrt() / 2.0;
    // cubes around |n| > r lie in |x| > r - h and |n| >= |x| - h there
    let tail = 4.0 * PI * ((r - h) / (r - 2.0 * h)).powi(2) / (r - 2.0 * h);
    assert!(c2 * c2 >= partial, "{c2}");
    assert!(c2 * c2 <= partial + tail, "{c2}");
    // the Z^3 Epstein sum of |n|^-4 is 16.5323...
    assert!((c2 - 16.5323f64.sqrt()).abs() < 1e-3, "{c2}");
    let big = certified_cp(40.0).unwrap();
    assert!((big - 6f64.sqrt()).abs() < 1e-6);
    assert!(certified_cp(1.5).is_err());
}

#[test]
fn certified_cp_dominates_sup_on_grid() {
    let m = ModeSet::shared(3);
    let mut r = rng(17);
    let p = 2.0;
    let cp = certified_cp(p).unwrap();
    let h = 2.0 * PI / 64.0;
    for _ in 0..100 {
        let decay = r.gen_range(0.0..2.0);
        let w = random_field(&m, &mut r, decay);
        let bound = cp * sobolev_norm(&w, p);
        let mut sup: f64 = 0.0;
        for _ in 0..200 {
            let x = [r.gen_range(0..64), r.gen_range(0..64), r.gen_range(0..64)].map(|i| i as f64 * h);
            sup = sup.max(mag(eval(&w, x)));
        }
        assert!(sup <= bound);
    }
}

/// `(mean |cos x|^q)^{1/q}` by the midpoint rule.
fn cos_lq(q: f64) -> f64 {
    let k = 200_000;
    let s: f64 = (0..k)
        .map(|i| ((i as f64 + 0.5) * 2.0 * PI / k as f64).cos().abs().powf(q))
        .sum();
    (s / k as f64).powf(1.0 / q)
}

#[test]
fn cs_estimate_dominates_single_mode() {
    for s in [0.25, 0.5, 1.0, 1.25] {
        let est = estimate_cs(s, 16, 6, 1, 3).unwrap();
        // cos(x_3): two coefficients 1/2, so ||f||_s = 1/sqrt(2)
        let single = cos_lq(6.0 / (3.0 - 2.0 * s)) / 0.5f64.sqrt();
        assert!(est.raw >= single * (1.0 - 1e-9), "s={s}: {} < {single}", est.raw);
    }
    assert!(estimate_cs(1.5, 16, 4, 1, 3).is_err());
    assert!(estimate_cs(0.0, 16, 4, 1, 3).is_err());
}

#[test]
fn cs_estimate_monotone_and_resolution_stable() {
    let a = estimate_cs(1.0, 16, 8, 9, 4).unwrap().raw;
    let b = estimate_cs(1.0, 16, 16, 9, 4).unwrap().raw;
    assert!(b >= a);
    let hi = estimate_cs(1.0, 32, 8, 9, 4).unwrap().raw;
    assert!((hi - a).abs() <= 0.05 * hi, "{a} vs {hi}");
    let again = estimate_cs(1.0, 16, 8, 9, 4).unwrap().raw;
    assert_eq!(a, again);
}

#[test]
fn constants_table_provenance() {
    let mut t = ConstantsTable::default();
    t.ensure_embedding(0.5).unwrap();
    t.ensure_embedding(1.0).unwrap();
    t.ensure_sup(2.0).unwrap();
    t.ensure_lattice(0.0, 2.0).unwrap();
    let c = t.embedding(0.5).unwrap();
    assert_eq!(c.provenance, Provenance::Estimated);
    let e = &t.entries["C_0.5"];
    assert_eq!(e.value, e.raw * 2.0);
    assert_eq!(t.sup(2.0).unwrap().provenance, Provenance::CertifiedUpper);
    assert_eq!(t.lattice(0.0, 2.0).unwrap().provenance, Provenance::Exact);
    assert_eq!(t.c_prime_half().unwrap().provenance, Provenance::Estimated);
    t.set_user("C_0.5", 1.0).unwrap();
    t.set_user("C_1", 1.0).unwrap();
    let cp = t.c_prime_half().unwrap();
    assert_eq!((cp.value, cp.provenance), (1.0, Provenance::UserSupplied));
    assert!(matches!(t.sup(3.0), Err(CoreError::MissingConstant(_))));
    let mut a = ConstantsTable::default();
    let mut b = ConstantsTable::default();
    a.ensure_embedding(0.75).unwrap();
    b.ensure_embedding(0.75).unwrap();
    assert_eq!(a, b);
}
