//! Identifiers of the verified inequalities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    B19,
    B29,
    #[serde(rename = "B32_1")]
    B32_1,
    #[serde(rename = "B32_2")]
    B32_2,
    #[serde(rename = "B32_3")]
    B32_3,
    COR51,
    #[serde(rename = "B36_1")]
    B36_1,
    #[serde(rename = "B36_2")]
    B36_2,
    #[serde(rename = "B36_3")]
    B36_3,
    #[serde(rename = "B36_4")]
    B36_4,
    P40,
    P42,
    P44,
    P51,
    P52,
}

impl BoundId {
    pub const ALL: [BoundId; 15] = [
        BoundId::B19,
        BoundId::B29,
        BoundId::B32_1,
        BoundId::B32_2,
        BoundId::B32_3,
        BoundId::COR51,
        BoundId::B36_1,
        BoundId::B36_2,
        BoundId::B36_3,
        BoundId::B36_4,
        BoundId::P40,
        BoundId::P42,
        BoundId::P44,
        BoundId::P51,
        BoundId::P52,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::B19 => "B19",
            BoundId::B29 => "B29",
            BoundId::B32_1 => "B32_1",
            BoundId::B32_2 => "B32_2",
            BoundId::B32_3 => "B32_3",
            BoundId::COR51 => "COR51",
            BoundId::B36_1 => "B36_1",
            BoundId::B36_2 => "B36_2",
            BoundId::B36_3 => "B36_3",
            BoundId::B36_4 => "B36_4",
            BoundId::P40 => "P40",
            BoundId::P42 => "P42",
            BoundId::P44 => "P44",
            BoundId::P51 => "P51",
            BoundId::P52 => "P52",
        }
    }

    /// Instantaneous inequalities, checked at every sample.
    pub fn is_pointwise(self) -> bool {
        matches!(
            self,
            BoundId::P40 | BoundId::P42 | BoundId::P44 | BoundId::P51 | BoundId::P52 | BoundId::B36_3
        )
    }

    /// Bounds whose right-hand side is built from `Q` and therefore needs
    /// an admissible `delta`.
    pub fn needs_admissible_delta(self) -> bool {
        matches!(
            self,
            BoundId::B29
                | BoundId::B32_1
                | BoundId::B32_3
                | BoundId::COR51
                | BoundId::B36_1
                | BoundId::B36_2
                | BoundId::B36_4
        )
    }

    /// Whether the inequality depends on `s`.
    pub fn uses_s(self) -> bool {
        !matches!(self, BoundId::B29 | BoundId::P40 | BoundId::P51)
    }

    /// Range of admissible `s`, as text.
    pub fn s_range(self) -> &'static str {
        match self {
            BoundId::B19 => "1/2 < s <= 1",
            BoundId::B29 | BoundId::P40 | BoundId::P51 => "any s (unused)",
            BoundId::B32_1 => "s > 1",
            BoundId::B32_2 => "0 < s <= 1",
            BoundId::B32_3 => "s > -1/2",
            BoundId::COR51 => "s > 1/4 (p = 4)",
            BoundId::B36_1 => "s >= -1/2",
            BoundId::B36_2 | BoundId::P42 => "-5/2 < s <= -1/2",
            BoundId::B36_3 => "s < -5/2",
            BoundId::B36_4 => "s > -2",
            BoundId::P44 => "s >= -1",
            BoundId::P52 => "s < -7/2",
        }
    }

    pub fn accepts(self, s: f64) -> bool {
        if !s.is_finite() {
            return !self.uses_s();
        }
        match self {
            BoundId::B19 => s > 0.5 && s <= 1.0,
            BoundId::B29 | BoundId::P40 | BoundId::P51 => true,
            BoundId::B32_1 => s > 1.0,
            BoundId::B32_2 => s > 0.0 && s <= 1.0,
            BoundId::B32_3 => s > -0.5,
            BoundId::COR51 => s > 0.25,
            BoundId::B36_1 => s >= -0.5,
            BoundId::B36_2 | BoundId::P42 => s > -2.5 && s <= -0.5,
            BoundId::B36_3 => s < -2.5,
            BoundId::B36_4 => s > -2.0,
            BoundId::P44 => s >= -1.0,
            BoundId::P52 => s < -3.5,
        }
    }

    pub fn check(self, s: f64) -> Result<(), BoundsError> {
        if self.accepts(s) {
            Ok(())
        } else {
            Err(BoundsError::Domain {
                id: self,
                s,
                range: self.s_range(),
            })
        }
    }
}

pub fn valid_ids() -> String {
    BoundId::ALL.iter().map(|b| b.name()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundId {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('.', "_");
        BoundId::ALL
            .iter()
            .copied()
            .find(|b| b.name() == key)
            .ok_or_else(|| BoundsError::UnknownBound(s.to_string()))
    }
}
