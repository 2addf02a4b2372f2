use amhd_core::constants::{ConstantValue, Provenance};
use amhd_core::Verdict;
use serde::{Deserialize, Serialize};

use crate::ids::BoundId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: BoundId,
    /// `None` for inequalities without an `s`.
    pub s: Option<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub verdict: Verdict,
    pub constants_used: Vec<ConstantValue>,
    /// Some constant is an estimate (pass/fail then rests on it).
    pub estimated: bool,
    /// The right-hand side is assembled here rather than printed.
    pub derivation_dependent: bool,
    /// Constants were re-estimated with doubled trials after a failure.
    pub reestimated: bool,
    /// Relative change of the left-hand side under half-stride quadrature.
    pub richardson_change: Option<f64>,
    pub needs_denser_trace: bool,
    /// Largest relative gap between the direct and the `xi` evaluation of
    /// derivative norms.
    pub route_discrepancy: Option<f64>,
    /// Sample time of the reported `lhs`/`rhs` for pointwise inequalities.
    pub worst_time: Option<f64>,
    pub samples: usize,
    pub note: Option<String>,
    /// `(t, integrand)` for integral bounds, `(t, lhs/rhs)` for pointwise ones.
    #[serde(skip)]
    pub series: Vec<(f64, f64)>,
}

impl BoundReport {
    pub(crate) fn new(id: BoundId, s: Option<f64>, t_end: f64) -> Self {
        Self {
            id,
            s,
            t_end,
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            verdict: Verdict::Vacuous,
            constants_used: Vec::new(),
            estimated: false,
            derivation_dependent: false,
            reestimated: false,
            richardson_change: None,
            needs_denser_trace: false,
            route_discrepancy: None,
            worst_time: None,
            samples: 0,
            note: None,
            series: Vec::new(),
        }
    }

    pub(crate) fn set_constants(&mut self, c: Vec<ConstantValue>) {
        self.estimated = c.iter().any(|c| c.provenance == Provenance::Estimated);
        self.constants_used = c;
    }

    pub(crate) fn add_note(&mut self, note: impl Into<String>) {
        let note = note.into();
        self.note = Some(match self.note.take() {
            Some(n) => format!("{n}; {note}"),
            None => note,
        });
    }

    pub fn label(&self) -> String {
        match self.s {
            Some(s) => format!("{}(s={s})", self.id),
            None => self.id.to_string(),
        }
    }
}

/// CSV with columns `bound,s,t,value` holding every report's series.
pub fn series_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("bound,s,t,value\n");
    for r in reports {
        let s = r.s.map(|s| s.to_string()).unwrap_or_default();
        for (t, v) in &r.series {
            out.push_str(&format!("{},{},{:e},{:e}\n", r.id, s, t, v));
        }
    }
    out
}
