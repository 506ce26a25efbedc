use crate::tally::{BopsTally, TallyOverflow};

/// Hooks called by the instrumented tools at every basic operation.
pub trait OpCounter: Default + Send {
    fn arith(&mut self, n: u64);
    fn cmp(&mut self, n: u64);
    fn addr(&mut self, n: u64);
}

/// Timing-mode counter. Zero-sized with empty inlined hooks, so the
/// instrumented code compiles to the same machine code as an uncounted build.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoCount;

impl OpCounter for NoCount {
    #[inline(always)]
    fn arith(&mut self, _: u64) {}
    #[inline(always)]
    fn cmp(&mut self, _: u64) {}
    #[inline(always)]
    fn addr(&mut self, _: u64) {}
}

/// Per-thread counters, merged into one tally once the workers finish.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct TallyAccumulator {
    pub arithmetic: u64,
    pub comparing: u64,
    pub addressing: u64,
}

impl OpCounter for TallyAccumulator {
    #[inline(always)]
    fn arith(&mut self, n: u64) {
        self.arithmetic = self.arithmetic.wrapping_add(n);
    }
    #[inline(always)]
    fn cmp(&mut self, n: u64) {
        self.comparing = self.comparing.wrapping_add(n);
    }
    #[inline(always)]
    fn addr(&mut self, n: u64) {
        self.addressing = self.addressing.wrapping_add(n);
    }
}

impl TallyAccumulator {
    pub fn tally(&self) -> BopsTally {
        BopsTally::new(self.arithmetic, self.comparing, self.addressing)
    }

    pub fn merge<'a>(
        parts: impl IntoIterator<Item = &'a TallyAccumulator>,
    ) -> Result<BopsTally, TallyOverflow> {
        parts
            .into_iter()
            .try_fold(BopsTally::ZERO, |acc, p| acc.checked_add(&p.tally()))
    }
}
