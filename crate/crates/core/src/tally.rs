use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ops::{normalized_weight, BasicOpClass, OpCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("BOPs tally overflowed 64 bits while accumulating {0}")]
pub struct TallyOverflow(pub &'static str);

/// Per-class counts of normalized basic operations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BopsTally {
    pub arithmetic: u64,
    pub comparing: u64,
    pub addressing: u64,
}

impl BopsTally {
    pub const ZERO: BopsTally = BopsTally {
        arithmetic: 0,
        comparing: 0,
        addressing: 0,
    };

    pub fn new(arithmetic: u64, comparing: u64, addressing: u64) -> Self {
        BopsTally {
            arithmetic,
            comparing,
            addressing,
        }
    }

    /// Sum of all three classes. Fails instead of wrapping.
    pub fn total(&self) -> Result<u64, TallyOverflow> {
        self.arithmetic
            .checked_add(self.comparing)
            .and_then(|s| s.checked_add(self.addressing))
            .ok_or(TallyOverflow("total"))
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn get(&self, category: OpCategory) -> u64 {
        match category {
            OpCategory::Arithmetic => self.arithmetic,
            OpCategory::Comparing => self.comparing,
            OpCategory::Addressing => self.addressing,
        }
    }

    pub fn add(&mut self, category: OpCategory, count: u64) -> Result<(), TallyOverflow> {
        let (slot, name) = match category {
            OpCategory::Arithmetic => (&mut self.arithmetic, "arithmetic"),
            OpCategory::Comparing => (&mut self.comparing, "comparing"),
            OpCategory::Addressing => (&mut self.addressing, "addressing"),
        };
        *slot = slot.checked_add(count).ok_or(TallyOverflow(name))?;
        Ok(())
    }

    /// Record one execution of `op` at its normalized weight.
    pub fn record(&mut self, op: BasicOpClass) -> Result<(), TallyOverflow> {
        self.add(op.category(), normalized_weight(op))
    }

    pub fn checked_add(&self, other: &BopsTally) -> Result<BopsTally, TallyOverflow> {
        Ok(BopsTally {
            arithmetic: self
                .arithmetic
                .checked_add(other.arithmetic)
                .ok_or(TallyOverflow("arithmetic"))?,
            comparing: self
                .comparing
                .checked_add(other.comparing)
                .ok_or(TallyOverflow("comparing"))?,
            addressing: self
                .addressing
                .checked_add(other.addressing)
                .ok_or(TallyOverflow("addressing"))?,
        })
    }

    pub fn checked_mul(&self, factor: u64) -> Result<BopsTally, TallyOverflow> {
        Ok(BopsTally {
            arithmetic: self
                .arithmetic
                .checked_mul(factor)
                .ok_or(TallyOverflow("arithmetic"))?,
            comparing: self
                .comparing
                .checked_mul(factor)
                .ok_or(TallyOverflow("comparing"))?,
            addressing: self
                .addressing
                .checked_mul(factor)
                .ok_or(TallyOverflow("addressing"))?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table5_shape_sums() {
        let t = BopsTally::new(106_000_000_000, 36_000_000_000, 387_000_000_000);
        assert_eq!(t.total().unwrap(), 529_000_000_000);
    }

    #[test]
    fn total_overflow_is_reported() {
        let t = BopsTally::new(u64::MAX, 1, 0);
        assert_eq!(t.total(), Err(TallyOverflow("total")));
    }

    #[test]
    fn add_overflow_leaves_value() {
        let mut t = BopsTally::new(0, u64::MAX, 0);
        assert!(t.add(OpCategory::Comparing, 1).is_err());
        assert_eq!(t.comparing, u64::MAX);
    }

    #[test]
    fn record_uses_weights() {
        let mut t = BopsTally::ZERO;
        t.record(BasicOpClass::Add).unwrap();
        t.record(BasicOpClass::Compare).unwrap();
        t.record(BasicOpClass::array_addressing(3).unwrap())
            .unwrap();
        assert_eq!(t, BopsTally::new(1, 1, 3));
    }

    #[test]
    fn checked_mul_overflow() {
        let t = BopsTally::new(1, 2, u64::MAX / 2);
        assert!(t.checked_mul(3).is_err());
        assert_eq!(t.checked_mul(2).unwrap().comparing, 4);
    }
}
