//! Trace archives: norm time series plus stored states.
//!
//! On disk an archive is a directory with `manifest.json`, `series.csv`
//! and `checkpoints/*.mhdg`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::checkpoint::{load_checkpoint, save_checkpoint};
use super::initial::InitialCondition;
use super::simulate::{Sample, SolverConfig, TraceSink};
use crate::constants::ConstantsTable;
use crate::error::{CoreError, Result};
use crate::field::MhdState;
use crate::norms::sobolev_norm_sq;
use crate::scalar::Real;
use crate::transform::phi::transform;

pub const ARTIFACT_VERSION: &str = concat!("amhd-", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestSample {
    pub t: f64,
    pub step: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    pub config: SolverConfig,
    #[serde(default)]
    pub initial: Option<InitialCondition>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub constants: Option<ConstantsTable>,
    pub status: String,
    pub columns: Vec<String>,
    pub samples: Vec<ManifestSample>,
}

#[derive(Clone, Debug)]
enum StateRef {
    Memory(Arc<MhdState<f64>>),
    File(PathBuf),
}

/// A recorded trajectory.
#[derive(Clone, Debug)]
pub struct TraceArchive {
    pub manifest: Manifest,
    pub rows: Vec<Vec<f64>>,
    states: Vec<Option<StateRef>>,
}

pub fn norm_column(prefix: &str, s: f64) -> String {
    format!("{prefix}_s{s}")
}

impl TraceArchive {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn config(&self) -> &SolverConfig {
        &self.manifest.config
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r[0]).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.manifest.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| CoreError::Trace(format!("missing column {name}")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Indices of samples with a stored state.
    pub fn state_indices(&self) -> Vec<usize> {
        (0..self.states.len()).filter(|&i| self.states[i].is_some()).collect()
    }

    pub fn has_state(&self, i: usize) -> bool {
        self.states.get(i).is_some_and(|s| s.is_some())
    }

    /// Stored state at sample `i`, loading it from disk if needed.
    pub fn state(&self, i: usize) -> Result<Arc<MhdState<f64>>> {
        match self.states.get(i) {
            Some(Some(StateRef::Memory(s))) => Ok(s.clone()),
            Some(Some(StateRef::File(p))) => Ok(Arc::new(load_checkpoint(p)?)),
            _ => Err(CoreError::Trace(format!("sample {i} has no stored state"))),
        }
    }

    /// Restricts the archive to samples with `t <= t_max` (plus rounding).
    pub fn truncated(&self, t_max: f64) -> Self {
        let keep = self.rows.iter().take_while(|r| r[0] <= t_max * (1.0 + 1e-12) + 1e-12).count();
        let mut out = self.clone();
        out.rows.truncate(keep);
        out.states.truncate(keep);
        out.manifest.samples.truncate(keep);
        out
    }

    /// Loads an on-disk archive; checkpoints are read lazily.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_reader(BufReader::new(File::open(dir.join("manifest.json"))?))?;
        let f = File::open(dir.join("series.csv"))?;
        let mut lines = BufReader::new(f).lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::Trace("empty series.csv".into()))??;
        let cols: Vec<String> = header.split(',').map(str::to_string).collect();
        if cols != manifest.columns {
            return Err(CoreError::Trace("series.csv header does not match manifest columns".into()));
        }
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let row = row.map_err(|e| CoreError::Trace(format!("series.csv line {}: {e}", ln + 2)))?;
            if row.len() != cols.len() {
                return Err(CoreError::Trace(format!("series.csv line {} has {} fields", ln + 2, row.len())));
            }
            rows.push(row);
        }
        if rows.len() != manifest.samples.len() {
            return Err(CoreError::Trace(format!(
                "series.csv has {} rows but the manifest lists {} samples",
                rows.len(),
                manifest.samples.len()
            )));
        }
        for w in rows.windows(2) {
            if w[1][0] <= w[0][0] {
                return Err(CoreError::Trace("sample times are not strictly increasing".into()));
            }
        }
        let states = manifest
            .samples
            .iter()
            .map(|s| s.checkpoint.as_ref().map(|c| StateRef::File(dir.join(c))))
            .collect();
        Ok(Self { manifest, rows, states })
    }

    /// Energy identity residual
    /// `E(t) + int_0^t (nu ||V||_1^2 + eta ||B||_1^2) - E(0)` (trapezoid).
    pub fn energy_residual(&self) -> Result<Vec<(f64, f64)>> {
        let e = self.column("energy")?;
        let dv = self.column("diss_v")?;
        let db = self.column("diss_b")?;
        let t = self.times();
        let mut out = Vec::with_capacity(t.len());
        let mut integral = 0.0;
        for i in 0..t.len() {
            if i > 0 {
                integral += 0.5 * (t[i] - t[i - 1]) * (dv[i] + db[i] + dv[i - 1] + db[i - 1]);
            }
            out.push((t[i], e[i] + integral - e[0]));
        }
        Ok(out)
    }
}

pub enum Storage {
    /// Keep states in memory.
    Memory,
    /// Write checkpoints and series under a directory.
    Disk(PathBuf),
    /// Norm series only.
    SeriesOnly,
}

/// Sink building a [`TraceArchive`].
pub struct TraceRecorder {
    manifest: Manifest,
    rows: Vec<Vec<f64>>,
    states: Vec<Option<StateRef>>,
    storage: Storage,
    csv: Option<BufWriter<File>>,
    q0: Option<f64>,
}

impl TraceRecorder {
    /// `delta`, when given, adds the `phi`, `Q`, `lhs29_integrand` and
    /// `x0_tilde` (`||v~||_0^2 + ||b~||_0^2`) columns.
    pub fn new(config: &SolverConfig, storage: Storage, delta: Option<f64>) -> Result<Self> {
        config.validate()?;
        let mut columns: Vec<String> = ["t", "energy", "diss_v", "diss_b"].iter().map(|s| s.to_string()).collect();
        for p in ["v", "b"] {
            columns.extend(config.s_grid.iter().map(|s| norm_column(p, *s)));
        }
        if config.derivative_norms {
            for p in ["dv", "db"] {
                columns.extend(config.s_grid.iter().map(|s| norm_column(p, *s)));
            }
        }
        if delta.is_some() {
            columns.extend(["phi", "Q", "lhs29_integrand", "x0_tilde"].iter().map(|s| s.to_string()));
        }
        let manifest = Manifest {
            artifact_version: ARTIFACT_VERSION.into(),
            config: config.clone(),
            initial: None,
            seed: None,
            delta,
            sigma: None,
            constants: None,
            status: "running".into(),
            columns,
            samples: Vec::new(),
        };
        let csv = match &storage {
            Storage::Disk(dir) => {
                std::fs::create_dir_all(dir.join("checkpoints"))?;
                let mut w = BufWriter::new(File::create(dir.join("series.csv"))?);
                writeln!(w, "{}", manifest.columns.join(","))?;
                Some(w)
            }
            _ => None,
        };
        Ok(Self {
            manifest,
            rows: Vec::new(),
            states: Vec::new(),
            storage,
            csv,
            q0: None,
        })
    }

    pub fn with_initial(mut self, ic: &InitialCondition) -> Self {
        self.manifest.seed = ic.seed();
        self.manifest.initial = Some(ic.clone());
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.manifest.sigma = Some(sigma);
        self
    }

    pub fn with_constants(mut self, table: &ConstantsTable) -> Self {
        self.manifest.constants = Some(table.clone());
        self
    }

    fn row<T: Real>(&mut self, s: &Sample<'_, T>) -> Result<Vec<f64>> {
        let st = s.state;
        let cfg = &self.manifest.config;
        let f = |x: T| x.as_f64();
        let e0v = f(sobolev_norm_sq(&st.v, T::zero()));
        let e0b = f(sobolev_norm_sq(&st.b, T::zero()));
        let mut row = vec![
            f(st.t),
            0.5 * (e0v + e0b),
            cfg.nu * f(sobolev_norm_sq(&st.v, T::one())),
            cfg.eta * f(sobolev_norm_sq(&st.b, T::one())),
        ];
        for w in [&st.v, &st.b] {
            row.extend(cfg.s_grid.iter().map(|x| f(sobolev_norm_sq(w, T::lit(*x)).sqrt())));
        }
        if cfg.derivative_norms {
            for w in [&s.rhs.0, &s.rhs.1] {
                row.extend(cfg.s_grid.iter().map(|x| f(sobolev_norm_sq(w, T::lit(*x)).sqrt())));
            }
        }
        if let Some(delta) = self.manifest.delta {
            let ps = transform(&st.cast::<f64>(), delta)?;
            let q = *self.q0.get_or_insert_with(|| ps.energy_q());
            row.extend([ps.phi, q, ps.dissipation(cfg.nu, cfg.eta), ps.x(0.0)]);
        }
        Ok(row)
    }

    /// Writes the manifest (on disk) and returns the archive.
    pub fn finish(mut self, status: &str) -> Result<TraceArchive> {
        self.manifest.status = status.into();
        if let Some(mut w) = self.csv.take() {
            w.flush()?;
        }
        if let Storage::Disk(dir) = &self.storage {
            let f = BufWriter::new(File::create(dir.join("manifest.json"))?);
            serde_json::to_writer_pretty(f, &self.manifest)?;
        }
        Ok(TraceArchive {
            manifest: self.manifest,
            rows: self.rows,
            states: self.states,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }
}

impl<T: Real> TraceSink<T> for TraceRecorder {
    fn record(&mut self, s: &Sample<'_, T>) -> Result<()> {
        let row = self.row(s)?;
        let mut ms = ManifestSample {
            t: row[0],
            step: s.step,
            checkpoint: None,
        };
        let state_ref = if s.checkpoint {
            match &self.storage {
                Storage::Memory => Some(StateRef::Memory(Arc::new(s.state.cast()))),
                Storage::Disk(dir) => {
                    let name = format!("checkpoints/ckpt_{:08}.mhdg", s.step);
                    let path = dir.join(&name);
                    save_checkpoint(&path, &s.state.cast())?;
                    ms.checkpoint = Some(name);
                    Some(StateRef::File(path))
                }
                Storage::SeriesOnly => None,
            }
        } else {
            None
        };
        if let Some(w) = &mut self.csv {
            let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
            w.flush()?;
        }
        self.rows.push(row);
        self.states.push(state_ref);
        self.manifest.samples.push(ms);
        Ok(())
    }
}

/// Runs `simulate` into a recorder and finishes it with status `complete`
/// or `blow-up`; a blow-up is reported after the archive is written.
pub fn run_to_archive(
    config: &SolverConfig,
    initial: &MhdState<f64>,
    recorder: TraceRecorder,
) -> (Result<TraceArchive>, Option<CoreError>) {
    let mut rec = recorder;
    let res = super::simulate::simulate(config, initial, &mut rec);
    match res {
        Ok(_) => (rec.finish("complete"), None),
        Err(e @ CoreError::BlowUp { .. }) => (rec.finish("blow-up"), Some(e)),
        Err(e) => (Err(e), None),
    }
}
