//! The run configuration: one JSON document, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use amhd_bounds::{BoundId, BoundRequest};
use amhd_core::constants::ConstantsTable;
use amhd_core::galerkin::initial::InitialCondition;
use amhd_core::galerkin::simulate::SolverConfig;
use amhd_core::galerkin::stepper::Scheme;
use amhd_core::transform::theorem2::delta_max;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A number, or `"auto"`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Auto {
    #[default]
    Auto,
    Value(f64),
}

impl Serialize for Auto {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Auto::Auto => s.serialize_str("auto"),
            Auto::Value(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Auto {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Auto;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Auto, E> {
                Ok(Auto::Value(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Auto, E> {
                Ok(Auto::Value(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Auto, E> {
                Ok(Auto::Value(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Auto, E> {
                if s == "auto" {
                    Ok(Auto::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(s), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

fn yes() -> bool {
    true
}
fn one() -> u64 {
    1
}
fn default_s_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: u32,
    pub nu: f64,
    pub eta: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "one")]
    pub output_stride: u64,
    #[serde(default)]
    pub checkpoint_stride: Option<u64>,
    #[serde(default)]
    pub scheme: Scheme,
    /// Sobolev indices of the recorded norm series.
    #[serde(default = "default_s_grid")]
    pub s_grid: Vec<f64>,
    #[serde(default = "yes")]
    pub derivative_norms: bool,
    pub initial: InitialCondition,
    /// `"auto"` is `0.9 delta_max`.
    #[serde(default)]
    pub delta: Auto,
    /// `"auto"` is `min(nu, eta)/2`.
    #[serde(default)]
    pub sigma: Auto,
    /// Bound ids, optionally with an index: `"B32_1"`, `"B32_1:3"`.
    #[serde(default)]
    pub bounds: Vec<String>,
    /// Indices for bounds listed without one.
    #[serde(default)]
    pub bound_s: Vec<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// `delta` and `sigma` after resolving `"auto"`, with their origin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub delta: f64,
    pub delta_auto: bool,
    pub delta_max: f64,
    pub sigma: f64,
    pub sigma_auto: bool,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            CliError::Config(format!("at `{path}`: {inner}"))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n: self.n,
            nu: self.nu,
            eta: self.eta,
            dt: self.dt,
            t_end: self.t_end,
            dealias: self.dealias,
            output_stride: self.output_stride,
            checkpoint_stride: self.checkpoint_stride,
            scheme: self.scheme,
            s_grid: self.s_grid.clone(),
            derivative_norms: self.derivative_norms,
        }
    }

    pub fn resolve(&self, table: &mut ConstantsTable) -> Result<Resolved, CliError> {
        for s in [0.5, 1.0] {
            table.ensure_embedding(s).map_err(CliError::other)?;
        }
        let dmax = delta_max(table, self.nu, self.eta).map_err(|e| CliError::Config(e.to_string()))?;
        let (delta, delta_auto) = match self.delta {
            Auto::Auto => (0.9 * dmax, true),
            Auto::Value(d) if d >= 0.0 && d.is_finite() => (d, false),
            Auto::Value(d) => return Err(CliError::Config(format!("at `delta`: must be non-negative, got {d}"))),
        };
        let (sigma, sigma_auto) = match self.sigma {
            Auto::Auto => (0.5 * self.nu.min(self.eta), true),
            Auto::Value(s) if s > 0.0 && s.is_finite() => (s, false),
            Auto::Value(s) => return Err(CliError::Config(format!("at `sigma`: must be positive, got {s}"))),
        };
        Ok(Resolved {
            delta,
            delta_auto,
            delta_max: dmax,
            sigma,
            sigma_auto,
        })
    }
}

/// Index used for a bound listed without one and without a matching `s`.
pub fn default_s(id: BoundId) -> Option<f64> {
    match id {
        BoundId::B19 | BoundId::B32_2 | BoundId::COR51 => Some(1.0),
        BoundId::B32_1 => Some(2.0),
        BoundId::B32_3 | BoundId::B36_1 | BoundId::P44 => Some(0.0),
        BoundId::B36_2 | BoundId::B36_4 | BoundId::P42 => Some(-1.0),
        BoundId::B36_3 => Some(-3.0),
        BoundId::P52 => Some(-4.0),
        BoundId::B29 | BoundId::P40 | BoundId::P51 => None,
    }
}

/// Turns `"ID"` / `"ID:s"` entries into requests. An id without an index
/// gets every entry of `s_list` it accepts, or its default index when
/// `s_list` is empty. An empty `ids` means every bound.
pub fn parse_requests(ids: &[String], s_list: &[f64]) -> Result<Vec<BoundRequest>, CliError> {
    let all: Vec<String>;
    let ids = if ids.is_empty() {
        all = BoundId::ALL.iter().map(|b| b.to_string()).collect();
        &all[..]
    } else {
        ids
    };
    let mut out = Vec::new();
    for entry in ids {
        let (name, s) = match entry.split_once(':') {
            Some((n, s)) => {
                let s: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad index in bound {entry:?}")))?;
                (n, Some(s))
            }
            None => (entry.as_str(), None),
        };
        let id: BoundId = name.parse().map_err(|e: amhd_bounds::BoundsError| CliError::Config(e.to_string()))?;
        if !id.uses_s() {
            if s.is_some() {
                return Err(CliError::Config(format!("{id} takes no index")));
            }
            out.push(BoundRequest::plain(id));
            continue;
        }
        let list: Vec<f64> = match s {
            Some(s) => vec![s],
            None if s_list.is_empty() => default_s(id).into_iter().collect(),
            None => {
                let ok: Vec<f64> = s_list.iter().copied().filter(|&s| id.accepts(s)).collect();
                if ok.is_empty() {
                    return Err(CliError::Config(format!(
                        "{id} accepts {}; none of the given indices {s_list:?} fit",
                        id.s_range()
                    )));
                }
                ok
            }
        };
        for s in list {
            let r = BoundRequest::new(id, s);
            r.validate().map_err(|e| CliError::Config(e.to_string()))?;
            out.push(r);
        }
    }
    Ok(out)
}
