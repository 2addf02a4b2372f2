mod common;

use amhd_core::galerkin::checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
use amhd_core::galerkin::initial::{make_initial, InitialCondition};
use amhd_core::galerkin::rhs::{
    full_rhs, full_rhs_direct, nonlinear_rhs_direct, second_time_derivative, second_time_derivative_direct,
    Convolver, FieldPair,
};
use amhd_core::galerkin::simulate::{simulate, NullSink, SolverConfig};
use amhd_core::galerkin::stepper::{Scheme, Stepper};
use amhd_core::galerkin::trace::{run_to_archive, Storage, TraceArchive, TraceRecorder};
use amhd_core::norms::{shell_spectrum, sobolev_norm_sq};
use amhd_core::{CoreError, MhdState, ModeSet, SpectralField, WaveVector};
use common::*;
use num_complex::Complex;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn pair_rel(a: &FieldPair<f64>, b: &FieldPair<f64>) -> f64 {
    let scale = a.0.max_abs().max(a.1.max_abs()).max(b.0.max_abs()).max(b.1.max_abs()).max(1e-300);
    a.0.max_abs_diff(&b.0).max(a.1.max_abs_diff(&b.1)) / scale
}

fn energy_rate(s: &MhdState<f64>, nl: &FieldPair<f64>) -> f64 {
    2.0 * (s.v.pairing(&nl.0).re + s.b.pairing(&nl.1).re)
}

#[test]
fn direct_rhs_single_mode_vanishes() {
    let s = single_mode_state(3, 0.7, 0.1, 0.1);
    let v_only = MhdState::new(s.v.clone(), SpectralField::zeros(s.modes().clone()), 0.0, 0.1, 0.1).unwrap();
    for st in [&s, &v_only] {
        let (a, b) = nonlinear_rhs_direct(&st.v, &st.b);
        assert_eq!(a.max_abs(), 0.0);
        assert_eq!(b.max_abs(), 0.0);
    }
}

#[test]
fn induction_by_hand() {
    let m = ModeSet::shared(2);
    let z = c(0.0, 0.0);
    let v = SpectralField::from_modes(m.clone(), &[(WaveVector::new(1, 0, 0), [z, c(1.0, 0.0), z])]).unwrap();
    let b = SpectralField::from_modes(m.clone(), &[(WaveVector::new(0, 1, 0), [z, z, c(1.0, 0.0)])]).unwrap();
    let n = WaveVector::new(1, 1, 0);
    let (_, nb) = nonlinear_rhs_direct(&v, &b);
    let got = nb.coeff(n);
    assert!((got[0]).norm() < 1e-15 && got[1].norm() < 1e-15);
    assert!((got[2] - c(0.0, -1.0)).norm() < 1e-15, "{got:?}");
    assert!((nb.coeff(-n)[2] - c(0.0, 1.0)).norm() < 1e-15);
    let mut conv = Convolver::new(m);
    let (_, fb) = conv.nonlinear(&v, &b);
    assert!((fb.coeff(n)[2] - c(0.0, -1.0)).norm() < 1e-13);
}

#[test]
fn energy_neutrality_both_paths() {
    for seed in 0..10 {
        let s = random_state(4, seed, 0.1, 0.1);
        let d = nonlinear_rhs_direct(&s.v, &s.b);
        let mut conv = Convolver::new(s.modes().clone());
        let f = conv.nonlinear(&s.v, &s.b);
        let scale = sobolev_norm_sq(&s.v, 0.0) + sobolev_norm_sq(&s.b, 0.0);
        let dscale = scale * (d.0.max_abs() + d.1.max_abs());
        assert!(energy_rate(&s, &d).abs() <= 1e-12 * dscale);
        assert!(energy_rate(&s, &f).abs() <= 1e-12 * dscale);
    }
}

#[test]
fn fast_matches_direct() {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        let s = random_state(6, 100 + seed, 0.1, 0.1);
        let d = nonlinear_rhs_direct(&s.v, &s.b);
        let mut conv = Convolver::new(s.modes().clone());
        let f = conv.nonlinear(&s.v, &s.b);
        worst = worst.max(pair_rel(&d, &f));
    }
    assert!(worst <= 1e-12, "{worst:e}");
    let m = ModeSet::shared(6);
    let zero = SpectralField::<f64>::zeros(m.clone());
    let (a, b) = Convolver::new(m).nonlinear(&zero, &zero);
    assert_eq!(a.max_abs() + b.max_abs(), 0.0);
}

#[test]
fn undersized_grid_aliases() {
    let s = random_state(4, 7, 0.1, 0.1);
    let d = nonlinear_rhs_direct(&s.v, &s.b);
    let f = Convolver::with_grid(s.modes().clone(), 10).nonlinear(&s.v, &s.b);
    assert!(pair_rel(&d, &f) > 1e-6);
}

#[test]
fn full_rhs_is_decay_for_single_mode() {
    let s = single_mode_state(3, 2.0, 0.1, 0.3);
    let mut conv = Convolver::new(s.modes().clone());
    let (dv, db) = full_rhs(&mut conv, &s);
    assert!(rel_diff(&dv, &s.v.scaled(-0.1)) < 1e-14);
    assert!(rel_diff(&db, &s.b.scaled(-0.3)) < 1e-14);
    let (d2v, d2b) = second_time_derivative(&mut conv, &s, &(dv.clone(), db.clone()));
    assert!(rel_diff(&d2v, &s.v.scaled(0.01)) < 1e-13);
    assert!(rel_diff(&d2b, &s.b.scaled(0.09)) < 1e-13);
    let z = MhdState::new(SpectralField::zeros(s.modes().clone()), SpectralField::zeros(s.modes().clone()), 0.0, 0.1, 0.1).unwrap();
    let zr = full_rhs(&mut conv, &z);
    assert_eq!(zr.0.max_abs() + zr.1.max_abs(), 0.0);
}

#[test]
fn full_rhs_recomposes_and_stays_valid() {
    let s = random_state(4, 21, 0.13, 0.07);
    let mut conv = Convolver::new(s.modes().clone());
    let f = full_rhs(&mut conv, &s);
    let d = full_rhs_direct(&s);
    assert!(pair_rel(&f, &d) < 1e-12);
    let nl = nonlinear_rhs_direct(&s.v, &s.b);
    let modes = s.modes();
    for i in 0..modes.len() {
        let q = modes.norm2(i) as f64;
        for k in 0..3 {
            let want = nl.0.coeffs()[i][k] - s.v.coeffs()[i][k] * (0.13 * q);
            assert!((d.0.coeffs()[i][k] - want).norm() < 1e-13);
        }
    }
    // reality and solenoidality survive the validating constructor
    SpectralField::new(modes.clone(), f.0.coeffs().to_vec()).unwrap();
    SpectralField::new(modes.clone(), f.1.coeffs().to_vec()).unwrap();
}

#[test]
fn second_derivative_paths_agree() {
    let s = random_state(4, 31, 0.1, 0.2);
    let mut conv = Convolver::new(s.modes().clone());
    let first = full_rhs(&mut conv, &s);
    let a = second_time_derivative(&mut conv, &s, &first);
    let b = second_time_derivative_direct(&s, &first);
    assert!(pair_rel(&a, &b) < 1e-12);
}

#[test]
fn second_derivative_matches_finite_difference() {
    let ic = InitialCondition::RandomSpectrum {
        a: 1.0,
        b: 0.7,
        v_norm: 1.0,
        b_norm: 1.0,
        seed: 41,
    };
    let s = make_initial(&ic, 4, 0.1, 0.1).unwrap();
    let h = 1e-4;
    let mut conv = Convolver::new(s.modes().clone());
    let first = full_rhs(&mut conv, &s);
    let exact = second_time_derivative(&mut conv, &s, &first);
    let mut fwd = Stepper::for_state(&s, h, Scheme::Rk4, true).unwrap();
    let plus = fwd.step(&s).unwrap();
    // backwards in time: plain RK4 on the reversed system, four sub-steps
    let minus = {
        let mut cur = s.clone();
        let g = |st: &MhdState<f64>, conv: &mut Convolver<f64>| -> FieldPair<f64> {
            let (a, b) = full_rhs(conv, st);
            (a.scaled(-1.0), b.scaled(-1.0))
        };
        let k = 4;
        let dt = h / k as f64;
        for _ in 0..k {
            let k1 = g(&cur, &mut conv);
            let mut s2 = cur.clone();
            s2.v.axpy(dt / 2.0, &k1.0);
            s2.b.axpy(dt / 2.0, &k1.1);
            let k2 = g(&s2, &mut conv);
            let mut s3 = cur.clone();
            s3.v.axpy(dt / 2.0, &k2.0);
            s3.b.axpy(dt / 2.0, &k2.1);
            let k3 = g(&s3, &mut conv);
            let mut s4 = cur.clone();
            s4.v.axpy(dt, &k3.0);
            s4.b.axpy(dt, &k3.1);
            let k4 = g(&s4, &mut conv);
            for (kk, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
                cur.v.axpy(dt * w / 6.0, &kk.0);
                cur.b.axpy(dt * w / 6.0, &kk.1);
            }
        }
        cur
    };
    let fp = full_rhs(&mut conv, &plus);
    let fm = full_rhs(&mut conv, &minus);
    let mut fd = fp.clone();
    fd.0.axpy(-1.0, &fm.0);
    fd.1.axpy(-1.0, &fm.1);
    fd.0.scale(0.5 / h);
    fd.1.scale(0.5 / h);
    let err = pair_rel(&exact, &fd);
    assert!(err <= 1e-6, "{err:e}");
}

#[test]
fn step_is_exact_on_single_mode() {
    let s = single_mode_state(4, 1.5, 0.1, 0.25);
    for scheme in [Scheme::Rk2, Scheme::Rk4] {
        let mut st = Stepper::for_state(&s, 0.01, scheme, true).unwrap();
        let mut cur = s.clone();
        for _ in 0..100 {
            cur = st.step(&cur).unwrap();
        }
        assert!(rel_diff(&cur.v, &s.v.scaled((-0.1f64).exp())) < 1e-10);
        assert!(rel_diff(&cur.b, &s.b.scaled((-0.25f64).exp())) < 1e-10);
    }
}

fn terminal(s: &MhdState<f64>, scheme: Scheme, dt: f64, t: f64) -> MhdState<f64> {
    let mut st = Stepper::for_state(s, dt, scheme, true).unwrap();
    let mut cur = s.clone();
    for _ in 0..(t / dt).round() as usize {
        cur = st.step(&cur).unwrap();
    }
    cur
}

#[test]
fn convergence_order_matches_scheme() {
    let s = random_state(4, 5, 0.1, 0.1);
    let t = 0.4;
    for (scheme, dts) in [(Scheme::Rk2, [0.02, 0.01, 0.005]), (Scheme::Rk4, [0.08, 0.04, 0.02])] {
        let reference = terminal(&s, Scheme::Rk4, 0.00125, t);
        let errs: Vec<f64> = dts
            .iter()
            .map(|dt| {
                let e = terminal(&s, scheme, *dt, t);
                e.v.max_abs_diff(&reference.v).max(e.b.max_abs_diff(&reference.b))
            })
            .collect();
        let p = (errs[1] / errs[2]).log2();
        assert!((p - scheme.order() as f64).abs() <= 0.3, "{scheme:?}: {errs:?} order {p}");
    }
}

#[test]
fn blow_up_carries_last_state() {
    let mut s = random_state(3, 9, 0.01, 0.01);
    s.v.scale(1e6);
    s.b.scale(1e6);
    let mut cfg = SolverConfig::new(3, 0.01, 0.01, 0.1, 50.0);
    cfg.derivative_norms = false;
    let err = simulate(&cfg, &s, &mut NullSink).unwrap_err();
    match err {
        CoreError::BlowUp { t, last_valid } => {
            assert!(t > 0.0);
            assert!(last_valid.is_finite());
            assert!(err_msg(t).starts_with("blow-up"));
        }
        e => panic!("unexpected {e}"),
    }
}

fn err_msg(t: f64) -> String {
    CoreError::BlowUp {
        t,
        last_valid: Box::new(single_mode_state(1, 1.0, 0.1, 0.1)),
    }
    .to_string()
}

#[test]
fn checkpoint_round_trip_and_errors() {
    let mut s = random_state(4, 77, 0.11, 0.09);
    s.t = 0.375;
    let mut bytes = Vec::new();
    write_checkpoint(&mut bytes, &s).unwrap();
    let back = read_checkpoint(&bytes[..]).unwrap();
    assert_eq!(back, s);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.mhdg");
    save_checkpoint(&path, &s).unwrap();
    assert_eq!(load_checkpoint(&path).unwrap(), s);

    let e = read_checkpoint(&bytes[..bytes.len() - 5]).unwrap_err();
    assert_eq!(e.to_string(), "unexpected end of checkpoint");
    let mut bad = bytes.clone();
    bad[0] = b'X';
    assert!(read_checkpoint(&bad[..]).unwrap_err().to_string().contains("magic"));
    let mut ver = bytes.clone();
    ver[4] = 9;
    assert!(matches!(read_checkpoint(&ver[..]), Err(CoreError::CheckpointVersion(9))));
    // first record is n = (-4, 0, 0); perturb Re V_y, which keeps it solenoidal
    let mut broken = bytes.clone();
    let off = 44 + 12 + 16;
    let x = f64::from_le_bytes(broken[off..off + 8].try_into().unwrap()) + 0.5;
    broken[off..off + 8].copy_from_slice(&x.to_le_bytes());
    let e = read_checkpoint(&broken[..]).unwrap_err();
    assert!(e.to_string().starts_with("reality violation at n="), "{e}");
}

fn run(cfg: &SolverConfig, init: &MhdState<f64>, storage: Storage) -> TraceArchive {
    let rec = TraceRecorder::new(cfg, storage, None).unwrap();
    let (tr, err) = run_to_archive(cfg, init, rec);
    assert!(err.is_none());
    tr.unwrap()
}

#[test]
fn single_mode_archive_energy_decays() {
    let s = single_mode_state(3, 1.0, 0.1, 0.1);
    let mut cfg = SolverConfig::new(3, 0.1, 0.1, 0.01, 1.0);
    cfg.output_stride = 5;
    let tr = run(&cfg, &s, Storage::Memory);
    let e = tr.column("energy").unwrap();
    for (t, e) in tr.times().iter().zip(&e) {
        assert!((e - 0.5 * (-0.2 * t).exp()).abs() <= 1e-8, "t={t}");
    }
    assert_eq!(tr.len(), 21);
    assert!((tr.times().last().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_duration_records_initial_sample() {
    let s = random_state(3, 1, 0.1, 0.1);
    let cfg = SolverConfig::new(3, 0.1, 0.1, 0.01, 0.0);
    let tr = run(&cfg, &s, Storage::Memory);
    assert_eq!(tr.len(), 1);
    assert_eq!(*tr.state(0).unwrap(), s);
}

#[test]
fn disk_archives_are_bit_identical() {
    let ic = InitialCondition::RandomSpectrum {
        a: 1.0,
        b: 0.7,
        v_norm: 1.0,
        b_norm: 0.5,
        seed: 42,
    };
    let init = make_initial(&ic, 4, 0.1, 0.1).unwrap();
    let mut cfg = SolverConfig::new(4, 0.1, 0.1, 0.01, 0.1);
    cfg.output_stride = 2;
    cfg.checkpoint_stride = Some(4);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let rec = TraceRecorder::new(&cfg, Storage::Disk(d.path().to_path_buf()), Some(0.01))
            .unwrap()
            .with_initial(&ic);
        let (tr, err) = run_to_archive(&cfg, &init, rec);
        assert!(err.is_none());
        tr.unwrap();
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "series.csv"), read(&b, "series.csv"));
    assert_eq!(read(&a, "manifest.json"), read(&b, "manifest.json"));
    let loaded = TraceArchive::load(a.path()).unwrap();
    assert_eq!(loaded.len(), 6);
    assert_eq!(loaded.state_indices(), vec![0, 2, 4, 5]);
    assert_eq!(loaded.manifest.seed, Some(42));
    let s0 = loaded.state(0).unwrap();
    assert_eq!(*s0, init);
}

#[test]
fn config_validation() {
    let mut cfg = SolverConfig::new(4, 0.1, 0.1, 0.01, 1.0);
    cfg.checkpoint_stride = Some(3);
    cfg.output_stride = 2;
    assert!(cfg.validate().is_err());
    assert!(SolverConfig::new(4, 0.0, 0.1, 0.01, 1.0).validate().is_err());
    assert!(SolverConfig::new(4, 0.1, 0.1, -0.01, 1.0).validate().is_err());
    assert!(SolverConfig::new(4, 0.1, 0.1, 0.01, -1.0).validate().is_err());
    let s = random_state(3, 2, 0.1, 0.1);
    assert!(simulate(&cfg_for(4), &s, &mut NullSink).is_err());
}

fn cfg_for(n: u32) -> SolverConfig {
    SolverConfig::new(n, 0.1, 0.1, 0.01, 0.1)
}

#[test]
fn initial_conditions() {
    let ic = InitialCondition::SingleMode {
        n: [0, 0, 1],
        v_amp: [3.0, 0.0, 0.0],
        b_amp: [0.0, 0.0, 0.0],
    };
    let s = make_initial(&ic, 4, 0.1, 0.1).unwrap();
    assert!((sobolev_norm_sq(&s.v, 0.0) - 4.5).abs() < 1e-14);
    let bad = InitialCondition::SingleMode {
        n: [0, 0, 1],
        v_amp: [0.0, 0.0, 1.0],
        b_amp: [0.0, 0.0, 0.0],
    };
    assert!(matches!(make_initial(&bad, 4, 0.1, 0.1), Err(CoreError::Solenoidality(_))));
    let abc = make_initial(&InitialCondition::Abc { v: [1.0, 1.0, 1.0], b: [0.0; 3] }, 2, 0.1, 0.1).unwrap();
    // ABC fields are Beltrami: curl V = V, so the velocity nonlinearity vanishes
    let (nv, _) = nonlinear_rhs_direct(&abc.v, &abc.b);
    assert!(nv.max_abs() < 1e-15);

    let rs = |seed| InitialCondition::RandomSpectrum {
        a: 0.0,
        b: 0.7,
        v_norm: 1.0,
        b_norm: 1.0,
        seed,
    };
    let a = make_initial(&rs(3), 16, 0.1, 0.1).unwrap();
    let b = make_initial(&rs(3), 16, 0.1, 0.1).unwrap();
    assert_eq!(a, b);
    assert!((sobolev_norm_sq(&a.v, 0.0) - 1.0).abs() < 1e-12);
    // RMS per-mode amplitude per shell decays like e^{-0.7 m}
    let modes = a.modes();
    let sp = shell_spectrum(&a.v);
    let mut counts = vec![0usize; sp.len()];
    for w in modes.vectors() {
        counts[(w.norm().round() as usize).min(16)] += 1;
    }
    let pts: Vec<(f64, f64)> = (4..=12).map(|m| (m as f64, (sp[m] / (counts[m] as f64).sqrt()).ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    assert!((slope + 0.7).abs() <= 0.05, "{slope}");
}
