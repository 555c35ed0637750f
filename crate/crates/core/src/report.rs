//! Pass/fail bookkeeping shared by the exhaustive checks.

use std::fmt;

use serde::Serialize;

use crate::atomset::AtomSet;

/// How many failing witnesses a check keeps; the count keeps going.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub message: String,
    pub sets: Vec<AtomSet>,
}

impl Witness {
    pub fn new(message: impl Into<String>, sets: Vec<AtomSet>) -> Witness {
        Witness {
            message: message.into(),
            sets,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)?;
        if !self.sets.is_empty() {
            f.write_str(" [")?;
            for (i, s) in self.sets.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{s}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// Outcome of one exhaustive sweep.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub checked: usize,
    pub failed: usize,
    pub witnesses: Vec<Witness>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    /// Counts one instance; `witness` is only built on failure.
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Witness) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn fail(&mut self, witness: Witness) {
        self.record(false, || witness);
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.witnesses.first()
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "pass ({} checked)", self.checked)
        } else {
            write!(f, "FAIL ({} of {} failed)", self.failed, self.checked)?;
            if let Some(w) = self.first_witness() {
                write!(f, ": {w}")?;
            }
            Ok(())
        }
    }
}
