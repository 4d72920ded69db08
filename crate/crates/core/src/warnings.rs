use std::fmt;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions raised while computing biomarkers. The affected value
/// falls back to a documented default and the flag records that it happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Warnings(u8);

impl Warnings {
    pub const NONE: Warnings = Warnings(0);
    /// Signal shorter than two delta-index segments; index set to 0.
    pub const DELTA_INDEX_SHORT: Warnings = Warnings(1);
    /// No template matches for sample entropy; capped value used.
    pub const SAMPEN_CAPPED: Warnings = Warnings(1 << 1);
    /// No PRSA anchor with a full window; PRSA outputs set to 0.
    pub const PRSA_NO_ANCHORS: Warnings = Warnings(1 << 2);

    const LABELS: [(Warnings, &'static str); 3] = [
        (Warnings::DELTA_INDEX_SHORT, "delta_index_short"),
        (Warnings::SAMPEN_CAPPED, "sampen_capped"),
        (Warnings::PRSA_NO_ANCHORS, "prsa_no_anchors"),
    ];

    pub fn contains(self, other: Warnings) -> bool {
        self.0 & other.0 == other.0 && other.0 != 0
    }

    pub fn insert(&mut self, other: Warnings) {
        self.0 |= other.0;
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitOr for Warnings {
    type Output = Warnings;

    fn bitor(self, rhs: Warnings) -> Warnings {
        Warnings(self.0 | rhs.0)
    }
}

impl fmt::Display for Warnings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = Self::LABELS
            .iter()
            .filter(|(w, _)| self.contains(*w))
            .map(|(_, n)| *n)
            .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join("|"))
        }
    }
}
