use std::fs;
use std::path::{Path, PathBuf};

use amhd_bounds::tracker::{decay_fit, decay_fit_many, default_shells, two_resolution_psi, RadiusEstimate};
use amhd_bounds::{series_csv, verify_trace, BoundRequest, HarnessSettings};
use amhd_core::constants::{ConstantsTable, EstimatorSettings};
use amhd_core::galerkin::checkpoint::load_checkpoint;
use amhd_core::galerkin::initial::make_initial;
use amhd_core::galerkin::simulate::{simulate, Sample, TraceSink};
use amhd_core::galerkin::trace::{Storage, TraceArchive, TraceRecorder};
use amhd_core::norms::sobolev_norm_sq;
use amhd_core::transform::phi::solve_phi;
use amhd_core::{CoreError, Verdict};
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_requests, RunConfig};
use crate::CliError;

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(x: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(x).map_err(CliError::other)
}

pub fn run(path: &Path, out: Option<PathBuf>, verbosity: u8) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(path)?;
    if out.is_some() {
        cfg.output = out;
    }
    let dir = cfg
        .output
        .clone()
        .ok_or_else(|| CliError::Config("no output directory (set `output` or pass --out)".into()))?;
    let solver = cfg.solver();
    solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut table = ConstantsTable::default();
    let res = cfg.resolve(&mut table)?;
    if !cfg.bounds.is_empty() {
        let reqs = parse_requests(&cfg.bounds, &cfg.bound_s)?;
        amhd_bounds::prepare_table(&mut table, &reqs).map_err(CliError::other)?;
    }
    let init = make_initial(&cfg.initial, cfg.n, cfg.nu, cfg.eta).map_err(|e| CliError::Config(e.to_string()))?;

    let mut rec = TraceRecorder::new(&solver, Storage::Disk(dir.clone()), Some(res.delta))
        .map_err(CliError::other)?
        .with_initial(&cfg.initial)
        .with_sigma(res.sigma)
        .with_constants(&table);
    let mut sink = |s: &Sample<'_, f64>| -> amhd_core::Result<()> {
        rec.record(s)?;
        if verbosity >= 1 {
            let st = s.state;
            let e = 0.5 * (sobolev_norm_sq(&st.v, 0.0) + sobolev_norm_sq(&st.b, 0.0));
            println!("step {:>8}  t {:<12.6}  energy {e:.9e}", s.step, st.t);
        }
        Ok(())
    };
    let outcome = simulate(&solver, &init, &mut sink);
    let (status, blow) = match outcome {
        Ok(_) => ("complete", None),
        Err(CoreError::BlowUp { t, .. }) => ("blow-up", Some(t)),
        Err(e) => return Err(CliError::other(e)),
    };
    let archive = rec.finish(status).map_err(CliError::other)?;

    // record the "auto" resolutions next to the solver settings
    let mpath = dir.join("manifest.json");
    let text = fs::read_to_string(&mpath).map_err(CliError::other)?;
    let mut manifest: serde_json::Value = serde_json::from_str(&text).map_err(CliError::other)?;
    manifest["resolved"] = serde_json::to_value(&res).map_err(CliError::other)?;
    write(&mpath, &to_json(&manifest)?)?;
    write(&dir.join("run_config.json"), &to_json(&cfg)?)?;

    if verbosity >= 1 {
        println!(
            "{} samples to t = {}, delta = {:.6e}{}, sigma = {}{}, archive {}",
            archive.len(),
            archive.times().last().copied().unwrap_or(0.0),
            res.delta,
            if res.delta_auto { " (auto)" } else { "" },
            res.sigma,
            if res.sigma_auto { " (auto)" } else { "" },
            dir.display()
        );
    }
    match blow {
        Some(t) => Err(CliError::BlowUp(format!(
            "non-finite state at t = {t}; partial archive kept in {}",
            dir.display()
        ))),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
pub fn verify(
    trace: &Path,
    bounds: &[String],
    s: &[f64],
    delta: Option<f64>,
    sigma: Option<f64>,
    t_end: Option<f64>,
    out: Option<PathBuf>,
    verbosity: u8,
) -> Result<(), CliError> {
    let archive = TraceArchive::load(trace).map_err(|e| CliError::Config(format!("{}: {e}", trace.display())))?;
    if archive.manifest.status != "complete" {
        return Err(CliError::Config(format!(
            "archive {} has status {:?}; verification needs a complete run",
            trace.display(),
            archive.manifest.status
        )));
    }
    let requests: Vec<BoundRequest> = if bounds.is_empty() && s.is_empty() {
        let saved = trace.join("run_config.json");
        match saved.exists() {
            true => {
                let cfg = RunConfig::load(&saved)?;
                parse_requests(&cfg.bounds, &cfg.bound_s)?
            }
            false => parse_requests(&[], &[])?,
        }
    } else {
        parse_requests(bounds, s)?
    };
    let mut table = archive.manifest.constants.clone().unwrap_or_default();
    let settings = HarnessSettings::from_trace(&archive, delta, sigma).map_err(|e| CliError::Config(e.to_string()))?;
    let reports = verify_trace(&archive, &requests, t_end, settings, &mut table).map_err(|e| match e {
        amhd_bounds::BoundsError::Domain { .. } | amhd_bounds::BoundsError::UnknownBound(_) => {
            CliError::Config(e.to_string())
        }
        e => CliError::other(e),
    })?;

    let dir = out.unwrap_or_else(|| trace.join("verify"));
    fs::create_dir_all(&dir).map_err(CliError::other)?;
    let bundle = json!({
        "trace": trace,
        "settings": settings,
        "requests": requests,
        "reports": reports,
        "constants": table,
    });
    write(&dir.join("report.json"), &to_json(&bundle)?)?;
    write(&dir.join("bound_series.csv"), &series_csv(&reports))?;

    let failed: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Fail)
        .map(|r| r.label())
        .collect();
    for r in &reports {
        if verbosity >= 1 {
            println!(
                "{:<14} {:<13} ratio {:.4e}  lhs {:.4e}  rhs {:.4e}{}",
                r.label(),
                r.verdict.to_string(),
                r.ratio,
                r.lhs,
                r.rhs,
                if r.estimated { "  [estimated constants]" } else { "" }
            );
        }
        if verbosity >= 2 {
            if let Some(n) = &r.note {
                println!("    note: {n}");
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::BoundFailure(failed.join(", ")))
    }
}

pub fn constants(
    s: &[f64],
    sup: &[f64],
    lattice: &[String],
    est: EstimatorSettings,
    safety: f64,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(safety >= 1.0) {
        return Err(CliError::Config(format!("safety factor must be >= 1, got {safety}")));
    }
    let mut table = ConstantsTable::new(safety, est);
    let dom = |e: CoreError| CliError::Config(e.to_string());
    for &x in s {
        table.ensure_embedding(x).map_err(dom)?;
    }
    for &p in sup {
        table.ensure_sup(p).map_err(dom)?;
    }
    for entry in lattice {
        let (p, a) = entry
            .split_once(':')
            .and_then(|(p, a)| Some((p.trim().parse::<f64>().ok()?, a.trim().parse::<f64>().ok()?)))
            .ok_or_else(|| CliError::Config(format!("lattice constant {entry:?} is not `p:a`")))?;
        table.ensure_lattice(p, a).map_err(dom)?;
    }
    let text = to_json(&table)?;
    if let Some(path) = out {
        write(&path, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn estimate_row(name: &str, e: &RadiusEstimate) -> String {
    let lb = e.lower_bound.map(|x| format!("{x:e}")).unwrap_or_default();
    format!(
        "{name},{:e},{},{},{:e},{lb}\n",
        e.sigma_fit, e.fit_range.0, e.fit_range.1, e.residual
    )
}

pub fn spectrum(path: &Path, shells: Option<(u32, u32)>, delta: Option<f64>, out: Option<PathBuf>) -> Result<(), CliError> {
    let st = load_checkpoint(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (lo, hi) = shells.unwrap_or_else(|| default_shells(st.n_max()));
    let lower = match delta {
        Some(d) => Some(d * solve_phi(&st, d).map_err(CliError::other)?),
        None => None,
    };
    let ctx = |e: amhd_bounds::BoundsError| CliError::Other(format!("{}: {e}", path.display()));
    let mut csv = String::from("field,sigma_fit,m_lo,m_hi,residual,lower_bound\n");
    for (name, fit) in [
        ("v", decay_fit(&st.v, lo, hi)),
        ("b", decay_fit(&st.b, lo, hi)),
        ("vb", decay_fit_many(&[&st.v, &st.b], lo, hi)),
    ] {
        let mut e = fit.map_err(ctx)?;
        e.lower_bound = lower;
        csv.push_str(&estimate_row(name, &e));
    }
    if let Some(p) = out {
        write(&p, &csv)?;
    }
    print!("{csv}");
    Ok(())
}

pub fn compare(path: &Path, ns: &[u32], out: Option<PathBuf>, verbosity: u8) -> Result<(), CliError> {
    let cfg = RunConfig::load(path)?;
    if ns.len() < 2 {
        return Err(CliError::Config("compare needs at least two truncations".into()));
    }
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    let top = *ns.last().unwrap();
    // every run starts from the projection of the finest data
    let base = make_initial(&cfg.initial, top, cfg.nu, cfg.eta).map_err(|e| CliError::Config(e.to_string()))?;
    let mut runs = Vec::new();
    for &n in &ns {
        let mut solver = cfg.solver();
        solver.n = n;
        solver.derivative_norms = false;
        solver.checkpoint_stride = None;
        solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let rec = TraceRecorder::new(&solver, Storage::Memory, None).map_err(CliError::other)?;
        let (tr, err) = amhd_core::galerkin::trace::run_to_archive(&solver, &base.resample(n), rec);
        if let Some(e) = err {
            return Err(CliError::BlowUp(format!("N = {n}: {e}")));
        }
        runs.push(tr.map_err(CliError::other)?);
        if verbosity >= 1 {
            println!("N = {n}: {} samples", runs.last().unwrap().len());
        }
    }
    let mut cols = Vec::new();
    for (w, pair) in runs.windows(2).zip(ns.windows(2)) {
        let psi = two_resolution_psi(&w[0], &w[1]).map_err(CliError::other)?;
        cols.push((format!("psi_{}_{}", pair[0], pair[1]), psi));
    }
    let mut csv = String::from("t");
    for (name, _) in &cols {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for i in 0..cols[0].1.len() {
        csv.push_str(&format!("{:e}", cols[0].1[i].0));
        for (_, c) in &cols {
            csv.push_str(&format!(",{:e}", c[i].1));
        }
        csv.push('\n');
    }
    let finals: Vec<f64> = cols.iter().map(|(_, c)| c.last().unwrap().1).collect();
    let monotone = finals.windows(2).all(|w| w[1] < w[0]);
    if let Some(dir) = out {
        fs::create_dir_all(&dir).map_err(CliError::other)?;
        write(&dir.join("compare.csv"), &csv)?;
        let summary = json!({
            "n": ns,
            "psi_final": cols.iter().zip(&finals).map(|((k, _), v)| json!({"pair": k, "psi": v})).collect::<Vec<_>>(),
            "monotone": monotone,
        });
        write(&dir.join("compare.json"), &to_json(&summary)?)?;
    } else {
        print!("{csv}");
    }
    if verbosity >= 1 {
        let parts: Vec<String> = cols.iter().zip(&finals).map(|((k, _), v)| format!("{k} {v:.3e}")).collect();
        println!("psi(T): {}; decreasing with N: {}", parts.join(", "), if monotone { "yes" } else { "no" });
    }
    Ok(())
}
