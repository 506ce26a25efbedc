//! Basic operation taxonomy and normalization weights.
//!
//! Every basic operation is normalized to a 64-bit operation. Scalar
//! operations weigh 1, N-dimensional array addressing weighs N, and packed
//! vector operations weigh `width / 64`.

use std::fmt;
use std::num::NonZeroU32;

/// The three classes a basic operation is tallied under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpCategory {
    Arithmetic,
    Comparing,
    Addressing,
}

impl fmt::Display for OpCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpCategory::Arithmetic => "arithmetic",
            OpCategory::Comparing => "comparing",
            OpCategory::Addressing => "addressing",
        })
    }
}

/// A single basic operation kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasicOpClass {
    Add,
    Subtract,
    Multiply,
    Divide,
    Bitwise,
    Logic,
    Compare,
    /// Array addressing with the given number of index dimensions.
    ArrayAddressing(NonZeroU32),
}

impl BasicOpClass {
    /// Array addressing over `dimensions` indices; `None` for zero.
    pub fn array_addressing(dimensions: u32) -> Option<Self> {
        NonZeroU32::new(dimensions).map(BasicOpClass::ArrayAddressing)
    }

    pub fn category(self) -> OpCategory {
        match self {
            BasicOpClass::Add
            | BasicOpClass::Subtract
            | BasicOpClass::Multiply
            | BasicOpClass::Divide
            | BasicOpClass::Bitwise
            | BasicOpClass::Logic => OpCategory::Arithmetic,
            BasicOpClass::Compare => OpCategory::Comparing,
            BasicOpClass::ArrayAddressing(_) => OpCategory::Addressing,
        }
    }

    /// Every enumeration member, with addressing instantiated at the given
    /// dimensionality.
    pub fn all(dimensions: NonZeroU32) -> [BasicOpClass; 8] {
        [
            BasicOpClass::Add,
            BasicOpClass::Subtract,
            BasicOpClass::Multiply,
            BasicOpClass::Divide,
            BasicOpClass::Bitwise,
            BasicOpClass::Logic,
            BasicOpClass::Compare,
            BasicOpClass::ArrayAddressing(dimensions),
        ]
    }
}

/// Normalized BOPs contributed by one scalar execution of `op`.
pub fn normalized_weight(op: BasicOpClass) -> u64 {
    match op {
        BasicOpClass::ArrayAddressing(dims) => u64::from(dims.get()),
        _ => 1,
    }
}

/// Normalized BOPs for an operation on operands `width_bits` wide.
///
/// Operands up to 64 bits count as a single scalar operation. Wider (packed)
/// operations count `width_bits / 64` lanes, so a 128-bit SSE op weighs 2 and
/// a 256-bit AVX op weighs 4. Widths above 64 must be multiples of 64.
pub fn normalized_weight_at_width(op: BasicOpClass, width_bits: u32) -> Option<u64> {
    let lanes = match width_bits {
        0 => return None,
        1..=64 => 1,
        w if w % 64 == 0 => u64::from(w / 64),
        _ => return None,
    };
    Some(normalized_weight(op) * lanes)
}
