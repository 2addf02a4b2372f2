use serde::{Deserialize, Serialize};

/// Outcome of checking one inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Both sides vanish.
    Vacuous,
    /// A precondition of the inequality does not hold; reported only.
    Informational,
}

impl Verdict {
    /// Pass/fail/vacuous from the two sides, with a relative rounding slack.
    pub fn compare(lhs: f64, rhs: f64) -> Self {
        if lhs.is_nan() || rhs.is_nan() {
            return Verdict::Fail;
        }
        if lhs.abs() <= f64::MIN_POSITIVE && rhs.abs() <= f64::MIN_POSITIVE {
            return Verdict::Vacuous;
        }
        if lhs <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
            Verdict::Informational => "informational",
        })
    }
}

/// `lhs / rhs`, with `0/0 = 0` and `x/0 = inf`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lhs / rhs
    }
}
