//! Decoding plans for every 6-bit continuation pattern.
//!
//! The bulk decoder looks at six bytes at a time. The continuation flags of
//! those bytes, gathered into a 6-bit value `mval` (bit `i` = MSB of byte `i`),
//! fully determine how the block splits into varints: every zero bit ends a
//! varint, and a run of ones reaching byte 5 is a varint that continues into
//! the next block.
//!
//! Plans are produced by [`derive_case`], a `const fn`, so the decoder can
//! specialise one code path per pattern at compile time while this module's
//! validator checks the same plans at run time.

use std::fmt;

use crate::varint::ElementWidth;

/// Bytes consumed per block.
pub const BLOCK_LEN: usize = 6;
/// Continuation flags of bytes 0..5.
pub const MSB_MASK: u64 = 0x0000_8080_8080_8080;
/// Payload bits of bytes 0..5.
pub const PAYLOAD_MASK: u64 = 0x0000_7f7f_7f7f_7f7f;
/// Pattern with no terminator in the block.
pub const ALL_CONTINUATION: u8 = 0b11_1111;
/// Shift increment for a block that only continues a varint.
pub const ALL_CONTINUATION_SHIFT: u32 = 7 * BLOCK_LEN as u32;

/// Payload bits of a contiguous byte range `lo..=hi` inside a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ByteSpanMask {
    lo: u8,
    hi: u8,
}

impl ByteSpanMask {
    pub const fn new(lo: usize, hi: usize) -> Option<Self> {
        if lo <= hi && hi < BLOCK_LEN {
            Some(ByteSpanMask {
                lo: lo as u8,
                hi: hi as u8,
            })
        } else {
            None
        }
    }

    const fn span(lo: usize, hi: usize) -> Self {
        ByteSpanMask {
            lo: lo as u8,
            hi: hi as u8,
        }
    }

    pub const fn lo(self) -> usize {
        self.lo as usize
    }

    pub const fn hi(self) -> usize {
        self.hi as usize
    }

    /// Byte count of the span. Spans are never empty.
    #[allow(clippy::len_without_is_empty)]
    pub const fn len(self) -> usize {
        self.hi() - self.lo() + 1
    }

    pub const fn mask(self) -> u64 {
        let mut m = 0;
        let mut i = self.lo();
        while i <= self.hi() {
            m |= 0x7f << (8 * i);
            i += 1;
        }
        m
    }

    pub const fn payload_bits(self) -> u32 {
        7 * self.len() as u32
    }
}

impl fmt::Display for ByteSpanMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#018x}", self.mask())
    }
}

const UNUSED: ByteSpanMask = ByteSpanMask::span(0, 0);

/// How to decode one block with a given continuation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CasePlan {
    mval: u8,
    extracts: [ByteSpanMask; BLOCK_LEN],
    completes: u8,
    trailing: Option<ByteSpanMask>,
    trailing_shift: u8,
    all_continuation: bool,
}

/// Builds the plan for `mval`. Panics if `mval >= 64`.
pub const fn derive_case(mval: u8) -> CasePlan {
    assert!(mval <= ALL_CONTINUATION, "mval is a 6-bit pattern");
    let mut extracts = [UNUSED; BLOCK_LEN];
    let mut completes = 0;
    let mut start = 0;
    let mut i = 0;
    while i < BLOCK_LEN {
        if mval >> i & 1 == 0 {
            extracts[completes] = ByteSpanMask::span(start, i);
            completes += 1;
            start = i + 1;
        }
        i += 1;
    }
    let (trailing, trailing_shift) = if start < BLOCK_LEN {
        let t = ByteSpanMask::span(start, BLOCK_LEN - 1);
        (Some(t), t.payload_bits() as u8)
    } else {
        (None, 0)
    };
    CasePlan {
        mval,
        extracts,
        completes: completes as u8,
        trailing,
        trailing_shift,
        all_continuation: completes == 0,
    }
}

const fn build_table_const() -> [CasePlan; 64] {
    let mut table = [derive_case(0); 64];
    let mut m = 1;
    while m < 64 {
        table[m] = derive_case(m as u8);
        m += 1;
    }
    table
}

/// All 64 plans, indexed by `mval`.
pub static CASE_TABLE: [CasePlan; 64] = build_table_const();

pub fn build_table() -> [CasePlan; 64] {
    build_table_const()
}

impl CasePlan {
    /// Assembles a plan from explicit parts without checking it. Meant for
    /// tooling and for exercising [`validate_table`].
    pub fn from_parts(
        mval: u8,
        extracts: &[ByteSpanMask],
        trailing: Option<ByteSpanMask>,
        trailing_shift: u32,
    ) -> Option<Self> {
        if extracts.len() > BLOCK_LEN || trailing_shift > u8::MAX as u32 {
            return None;
        }
        let mut arr = [UNUSED; BLOCK_LEN];
        arr[..extracts.len()].copy_from_slice(extracts);
        Some(CasePlan {
            mval,
            extracts: arr,
            completes: extracts.len() as u8,
            trailing,
            trailing_shift: trailing_shift as u8,
            all_continuation: extracts.is_empty(),
        })
    }

    pub const fn mval(&self) -> u8 {
        self.mval
    }

    /// Spans of the varints that end in this block, in byte order. The first
    /// one is merged with any carried partial value.
    pub fn extracts(&self) -> &[ByteSpanMask] {
        &self.extracts[..self.completes as usize]
    }

    /// Extract masks padded with zeros to six entries.
    pub const fn extract_masks(&self) -> [u64; BLOCK_LEN] {
        let mut out = [0; BLOCK_LEN];
        let mut j = 0;
        while j < self.completes as usize {
            out[j] = self.extracts[j].mask();
            j += 1;
        }
        out
    }

    pub const fn completes_count(&self) -> usize {
        self.completes as usize
    }

    /// The continuation run reaching the end of the block, if any.
    pub const fn trailing(&self) -> Option<ByteSpanMask> {
        self.trailing
    }

    pub const fn trailing_mask(&self) -> u64 {
        match self.trailing {
            Some(t) => t.mask(),
            None => 0,
        }
    }

    /// Carry shift after this block: `7 * run length` for a fresh partial,
    /// or the increment (42) when the block only continues a varint.
    pub const fn trailing_shift(&self) -> u32 {
        self.trailing_shift as u32
    }

    pub const fn is_all_continuation(&self) -> bool {
        self.all_continuation
    }

    /// Largest incoming carry shift for which this block holds only legal
    /// varints at `width`, or `None` if the block is malformed whatever the
    /// carry.
    ///
    /// A carry of shift `s` stands for `s / 7` continuation bytes already seen.
    /// The merged first varint must fit in `max_len` bytes, later complete
    /// varints must fit on their own, and a trailing run must leave room for
    /// its terminator.
    pub const fn shift_limit(&self, width: ElementWidth) -> Option<u32> {
        let max_len = width.max_len();
        if self.all_continuation {
            return if BLOCK_LEN < max_len {
                Some(7 * (max_len - 1 - BLOCK_LEN) as u32)
            } else {
                None
            };
        }
        let mut j = 1;
        while j < self.completes as usize {
            if self.extracts[j].len() > max_len {
                return None;
            }
            j += 1;
        }
        if let Some(t) = self.trailing {
            if t.len() > max_len - 1 {
                return None;
            }
        }
        let first = self.extracts[0].len();
        if first > max_len {
            None
        } else {
            Some(7 * (max_len - first) as u32)
        }
    }
}

impl fmt::Display for CasePlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "mval={:2} {:06b} completes={}",
            self.mval,
            self.mval,
            self.completes_count()
        )?;
        f.write_str(" extracts=[")?;
        for (i, e) in self.extracts().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")?;
        match self.trailing {
            Some(t) if self.all_continuation => {
                write!(f, " trailing={t} shift+={}", self.trailing_shift)
            }
            Some(t) => write!(f, " trailing={t} shift={}", self.trailing_shift),
            None => f.write_str(" trailing=none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    TableSize { len: usize },
    MvalMismatch { stored: u8 },
    CountMismatch { expected: usize, actual: usize },
    Overlap { a: u64, b: u64 },
    NotCovering { covered: u64 },
    /// An extract does not start right after the previous terminator.
    SpanOrder { index: usize },
    /// An extract does not end on a terminator byte, or swallows one.
    SpanBoundary { index: usize },
    TrailingMismatch,
    ShiftMismatch { expected: u32, actual: u32 },
    AllContinuationMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entry: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "entry {}: {:?}", self.entry, self.kind)
    }
}

/// Checks every plan's structural invariants. An empty result means valid.
pub fn validate_table(table: &[CasePlan]) -> Vec<Violation> {
    let mut out = Vec::new();
    if table.len() != 64 {
        out.push(Violation {
            entry: table.len(),
            kind: ViolationKind::TableSize { len: table.len() },
        });
    }
    for (entry, plan) in table.iter().enumerate() {
        let mut push = |kind| out.push(Violation { entry, kind });
        let Ok(mval) = u8::try_from(entry) else {
            continue;
        };
        if plan.mval != mval {
            push(ViolationKind::MvalMismatch { stored: plan.mval });
        }
        let is_terminator = |byte: usize| mval >> byte & 1 == 0;

        let expected = (0..BLOCK_LEN).filter(|&b| is_terminator(b)).count();
        if plan.completes_count() != expected {
            push(ViolationKind::CountMismatch {
                expected,
                actual: plan.completes_count(),
            });
        }

        let masks: Vec<u64> = plan
            .extracts()
            .iter()
            .chain(plan.trailing.iter())
            .map(|s| s.mask())
            .collect();
        for (i, &a) in masks.iter().enumerate() {
            for &b in &masks[i + 1..] {
                if a & b != 0 {
                    push(ViolationKind::Overlap { a, b });
                }
            }
        }
        let covered = masks.iter().fold(0, |acc, m| acc | m);
        if covered != PAYLOAD_MASK {
            push(ViolationKind::NotCovering { covered });
        }

        let mut next = 0;
        for (index, span) in plan.extracts().iter().enumerate() {
            if span.lo() != next {
                push(ViolationKind::SpanOrder { index });
            }
            let swallows = (span.lo()..span.hi()).any(is_terminator);
            if !is_terminator(span.hi()) || swallows {
                push(ViolationKind::SpanBoundary { index });
            }
            next = span.hi() + 1;
        }

        let continues = !is_terminator(BLOCK_LEN - 1);
        match plan.trailing {
            Some(t) => {
                let run_ok = t.lo() == next
                    && t.hi() == BLOCK_LEN - 1
                    && (t.lo()..=t.hi()).all(|b| !is_terminator(b));
                if !continues || !run_ok {
                    push(ViolationKind::TrailingMismatch);
                }
                let expected = if plan.all_continuation {
                    ALL_CONTINUATION_SHIFT
                } else {
                    t.payload_bits()
                };
                if plan.trailing_shift() != expected {
                    push(ViolationKind::ShiftMismatch {
                        expected,
                        actual: plan.trailing_shift(),
                    });
                }
            }
            None => {
                if continues {
                    push(ViolationKind::TrailingMismatch);
                }
                if plan.trailing_shift() != 0 {
                    push(ViolationKind::ShiftMismatch {
                        expected: 0,
                        actual: plan.trailing_shift(),
                    });
                }
            }
        }

        let all = mval == ALL_CONTINUATION;
        if plan.all_continuation != all || (all && !plan.extracts().is_empty()) {
            push(ViolationKind::AllContinuationMismatch);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn masks(plan: &CasePlan) -> Vec<u64> {
        plan.extracts().iter().map(|s| s.mask()).collect()
    }

    #[test]
    fn case_0_six_single_bytes() {
        let p = derive_case(0);
        assert_eq!(
            masks(&p),
            [
                0x0000_0000_0000_007f,
                0x0000_0000_0000_7f00,
                0x0000_0000_007f_0000,
                0x0000_0000_7f00_0000,
                0x0000_007f_0000_0000,
                0x0000_7f00_0000_0000,
            ]
        );
        assert_eq!(p.trailing(), None);
        assert_eq!(p.completes_count(), 6);
    }

    #[test]
    fn case_15() {
        let p = derive_case(15);
        assert_eq!(masks(&p), [0x0000_007f_7f7f_7f7f, 0x0000_7f00_0000_0000]);
        assert_eq!(p.trailing(), None);
    }

    #[test]
    fn case_32_fresh_trailing() {
        let p = derive_case(32);
        assert_eq!(p.completes_count(), 5);
        assert_eq!(p.trailing_mask(), 0x0000_7f00_0000_0000);
        assert_eq!(p.trailing_shift(), 7);
    }

    #[test]
    fn case_45() {
        let p = derive_case(45);
        assert_eq!(masks(&p), [0x0000_0000_0000_7f7f, 0x0000_007f_7f7f_0000]);
        assert_eq!(p.trailing_mask(), 0x0000_7f00_0000_0000);
        assert_eq!(p.trailing_shift(), 7);
    }

    #[test]
    fn case_62() {
        let p = derive_case(62);
        assert_eq!(masks(&p), [0x0000_0000_0000_007f]);
        assert_eq!(p.trailing_mask(), 0x0000_7f7f_7f7f_7f00);
        assert_eq!(p.trailing_shift(), 35);
    }

    #[test]
    fn case_63_all_continuation() {
        let p = derive_case(63);
        assert!(p.is_all_continuation());
        assert!(p.extracts().is_empty());
        assert_eq!(p.trailing_mask(), PAYLOAD_MASK);
        assert_eq!(p.trailing_shift(), 42);
    }

    #[test]
    fn table_totals() {
        let t = build_table();
        assert_eq!(t[0].completes_count(), 6);
        assert!(t[63].is_all_continuation());
        let total: usize = t.iter().map(|p| p.completes_count()).sum();
        // brute force: count zero bits over every 6-bit pattern
        let zeros: u32 = (0u32..64).map(|m| 6 - m.count_ones()).sum();
        assert_eq!(total, zeros as usize);
        assert_eq!(total, 192);
        assert_eq!(t, CASE_TABLE);
    }

    #[test]
    fn generated_table_is_valid() {
        assert_eq!(validate_table(&build_table()), []);
    }

    #[test]
    fn swapped_extracts_are_rejected() {
        let mut t = build_table();
        let p = t[15];
        let swapped = [p.extracts()[1], p.extracts()[0]];
        t[15] = CasePlan::from_parts(15, &swapped, None, 0).unwrap();
        let v = validate_table(&t);
        assert!(!v.is_empty());
        assert!(v.iter().all(|v| v.entry == 15));
        assert!(v
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::SpanOrder { .. })));
    }

    #[test]
    fn overlapping_extracts_are_rejected() {
        let mut t = build_table();
        let mut spans = t[0].extracts().to_vec();
        spans[1] = ByteSpanMask::new(0, 1).unwrap();
        t[0] = CasePlan::from_parts(0, &spans, None, 0).unwrap();
        let v = validate_table(&t);
        assert!(v
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::Overlap { .. })));
    }

    #[test]
    fn wrong_shift_is_rejected() {
        let mut t = build_table();
        let p = t[62];
        t[62] = CasePlan::from_parts(62, p.extracts(), p.trailing(), 28).unwrap();
        let v = validate_table(&t);
        assert_eq!(
            v,
            [Violation {
                entry: 62,
                kind: ViolationKind::ShiftMismatch {
                    expected: 35,
                    actual: 28
                }
            }]
        );
    }

    #[test]
    fn missing_trailing_is_rejected() {
        let mut t = build_table();
        let p = t[45];
        t[45] = CasePlan::from_parts(45, p.extracts(), None, 0).unwrap();
        let v = validate_table(&t);
        assert!(v
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::NotCovering { .. })));
        assert!(v.iter().any(|v| v.kind == ViolationKind::TrailingMismatch));
    }

    #[test]
    fn short_table_is_rejected() {
        let t = build_table();
        assert!(validate_table(&t[..63])
            .iter()
            .any(|v| v.kind == ViolationKind::TableSize { len: 63 }));
    }

    #[test]
    fn span_mask_popcount() {
        for lo in 0..BLOCK_LEN {
            for hi in lo..BLOCK_LEN {
                let s = ByteSpanMask::new(lo, hi).unwrap();
                assert_eq!(s.mask().count_ones() as usize, 7 * (hi - lo + 1));
            }
        }
        assert_eq!(ByteSpanMask::new(3, 2), None);
        assert_eq!(ByteSpanMask::new(0, 6), None);
    }

    #[test]
    fn shift_limits() {
        // u64: three carried continuation bytes + six more is the longest legal run
        assert_eq!(derive_case(63).shift_limit(ElementWidth::W64), Some(21));
        assert_eq!(derive_case(63).shift_limit(ElementWidth::W32), None);
        // five continuation bytes then a terminator: 6 bytes, too long for u32
        assert_eq!(derive_case(31).shift_limit(ElementWidth::W32), None);
        assert_eq!(derive_case(31).shift_limit(ElementWidth::W64), Some(28));
        assert_eq!(derive_case(0).shift_limit(ElementWidth::W32), Some(28));
        assert_eq!(derive_case(62).shift_limit(ElementWidth::W32), None);
        assert_eq!(derive_case(62).shift_limit(ElementWidth::W64), Some(63));
    }

    #[test]
    fn display_lines() {
        let line = derive_case(62).to_string();
        assert!(line.contains("shift=35"), "{line}");
        assert!(derive_case(63).to_string().contains("shift+=42"));
        assert_eq!(derive_case(0).to_string().matches("0x").count(), 6);
    }
}
