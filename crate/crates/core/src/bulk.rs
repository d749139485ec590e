//! Block-wise bulk decoding.
//!
//! The main loop loads eight bytes, uses PEXT on the six continuation flags to
//! pick one of the 64 case plans, and runs that plan: each varint ending in
//! the block is gathered with one PEXT, the first one merged with the carried
//! partial value. Six bytes are consumed per block; bytes 6 and 7 of the word
//! are loaded but never looked at.
//!
//! The loop runs while at least 8 values and 8 readable bytes remain, so a
//! block (at most 6 values) never writes past the output and never reads past
//! the input. Whatever is left, including a varint cut by the last block, is
//! finished by [`tail_fallback`].

use crate::case_table::{derive_case, CasePlan, BLOCK_LEN, MSB_MASK, PAYLOAD_MASK};
use crate::error::{BackendError, DecodeError, Error};
use crate::pext::{self, BackendKind, Extract, PextBackend, PextPreference, Portable};
use crate::varint::{self, EncodedStream, VarintInt};

const MIN_REMAINING: usize = 8;
const WORD_LEN: usize = 8;

/// A varint that started in an earlier block and is not finished yet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeCarry {
    /// Payload bits collected so far; always a multiple of 7.
    pub shift_bits: u32,
    pub partial_value: u64,
}

impl DecodeCarry {
    pub fn is_active(&self) -> bool {
        self.shift_bits != 0
    }

    fn carried_bytes(&self) -> usize {
        (self.shift_bits / 7) as usize
    }
}

/// Cursor and value count after a decoding step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Progress {
    pub cursor: usize,
    pub decoded: usize,
}

/// Decodes all of `stream` into `out` using the case table.
///
/// Produces exactly what [`varint::decode_all_scalar`] produces, errors
/// included.
pub fn decode_bulk<T: VarintInt>(
    stream: &EncodedStream,
    backend: PextBackend,
    out: &mut [T],
) -> Result<usize, DecodeError> {
    stream.check_sink::<T>(out.len())?;
    let bytes = stream.bytes();
    let count = stream.count();
    let out = &mut out[..count];

    let state = match backend.kind() {
        #[cfg(target_arch = "x86_64")]
        // SAFETY: Hardware backends exist only when BMI2 was detected.
        BackendKind::Hardware => unsafe { bulk_loop_bmi2(bytes, out)? },
        _ => bulk_loop::<T, Portable>(bytes, out)?,
    };

    let tail = tail_fallback(
        bytes,
        state.cursor,
        state.carry,
        count - state.written,
        &mut out[state.written..],
    )?;
    let end = tail.cursor;
    if end != bytes.len() {
        return Err(DecodeError::TrailingBytes {
            offset: end,
            remaining: bytes.len() - end,
        });
    }
    Ok(count)
}

/// Finishes a decode after the block loop: completes the carried varint, if
/// any, then decodes the remaining values one at a time. `out` must hold at
/// least `remaining` values.
pub fn tail_fallback<T: VarintInt>(
    bytes: &[u8],
    mut cursor: usize,
    carry: DecodeCarry,
    remaining: usize,
    out: &mut [T],
) -> Result<Progress, DecodeError> {
    let out = &mut out[..remaining];
    let mut slots = out.iter_mut();
    if carry.is_active() {
        let max_len = T::WIDTH.max_len();
        let start = cursor.saturating_sub(carry.carried_bytes());
        let mut shift = carry.shift_bits;
        let mut value = carry.partial_value;
        loop {
            let b = *bytes.get(cursor).ok_or(DecodeError::Truncated {
                offset: bytes.len(),
            })?;
            cursor += 1;
            value |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > T::WIDTH.max_shift() {
                return Err(DecodeError::Malformed {
                    offset: start,
                    max_len,
                });
            }
        }
        // a carry always belongs to a value the caller still expects
        match slots.next() {
            Some(slot) => *slot = T::from_u64_wrapping(value),
            None => debug_assert!(false, "carry with no remaining values"),
        }
    }
    for slot in slots {
        let (v, used) =
            varint::decode_one_scalar::<T>(&bytes[cursor..]).map_err(|e| e.shifted(cursor))?;
        *slot = v;
        cursor += used;
    }
    Ok(Progress {
        cursor,
        decoded: remaining,
    })
}

struct LoopState {
    cursor: usize,
    written: usize,
    carry: DecodeCarry,
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "bmi2")]
unsafe fn bulk_loop_bmi2<T: VarintInt>(
    bytes: &[u8],
    out: &mut [T],
) -> Result<LoopState, DecodeError> {
    bulk_loop::<T, pext::Bmi2>(bytes, out)
}

#[inline(always)]
fn bulk_loop<T: VarintInt, P: Extract>(
    bytes: &[u8],
    out: &mut [T],
) -> Result<LoopState, DecodeError> {
    let mut cursor = 0;
    let mut written = 0;
    let mut remaining = out.len();
    let mut carry = DecodeCarry::default();
    while remaining >= MIN_REMAINING && bytes.len() - cursor >= WORD_LEN {
        let word = u64::from_le_bytes(bytes[cursor..cursor + WORD_LEN].try_into().unwrap());
        let mval = P::pext(word, MSB_MASK) as u8;
        let dst: &mut [T; BLOCK_LEN] = (&mut out[written..written + BLOCK_LEN]).try_into().unwrap();
        let done = match dispatch::<T, P>(mval, word, &mut carry, dst) {
            Some(n) => n,
            None => return Err(locate_fault::<T>(mval, cursor, carry)),
        };
        written += done;
        remaining -= done;
        cursor += BLOCK_LEN;
    }
    Ok(LoopState {
        cursor,
        written,
        carry,
    })
}

/// Runs the plan for pattern `M`. Returns the number of values written, or
/// `None` if the block cannot be part of a legal stream given the carry.
#[inline(always)]
fn run_case<const M: u8, T: VarintInt, P: Extract>(
    word: u64,
    carry: &mut DecodeCarry,
    dst: &mut [T; BLOCK_LEN],
) -> Option<usize> {
    let limit = const {
        match derive_case(M).shift_limit(T::WIDTH) {
            Some(l) => l,
            None => u32::MAX,
        }
    };
    let always_bad = const { derive_case(M).shift_limit(T::WIDTH).is_none() };
    if always_bad || carry.shift_bits > limit {
        return None;
    }
    if const { derive_case(M).is_all_continuation() } {
        carry.partial_value |= P::pext(word, PAYLOAD_MASK) << carry.shift_bits;
        carry.shift_bits += const { derive_case(M).trailing_shift() };
        return Some(0);
    }

    let masks = const { derive_case(M).extract_masks() };
    let n = const { derive_case(M).completes_count() };
    let first = (P::pext(word, masks[0]) << carry.shift_bits) | carry.partial_value;
    dst[0] = T::from_u64_wrapping(first);
    for j in 1..n {
        dst[j] = T::from_u64_wrapping(P::pext(word, masks[j]));
    }
    let trailing = const { derive_case(M).trailing_mask() };
    if trailing != 0 {
        carry.partial_value = P::pext(word, trailing);
        carry.shift_bits = const { derive_case(M).trailing_shift() };
    } else {
        *carry = DecodeCarry::default();
    }
    Some(n)
}

macro_rules! case_dispatch {
    ($mval:expr, $word:expr, $carry:expr, $dst:expr; $($m:literal)*) => {
        match $mval {
            $($m => run_case::<$m, T, P>($word, $carry, $dst),)*
            _ => unreachable!("mval has six bits"),
        }
    };
}

#[inline(always)]
fn dispatch<T: VarintInt, P: Extract>(
    mval: u8,
    word: u64,
    carry: &mut DecodeCarry,
    dst: &mut [T; BLOCK_LEN],
) -> Option<usize> {
    case_dispatch!(mval, word, carry, dst;
        0 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15
        16 17 18 19 20 21 22 23 24 25 26 27 28 29 30 31
        32 33 34 35 36 37 38 39 40 41 42 43 44 45 46 47
        48 49 50 51 52 53 54 55 56 57 58 59 60 61 62 63)
}

/// Maps a rejected block to the first malformed varint in byte order.
#[cold]
fn locate_fault<T: VarintInt>(mval: u8, cursor: usize, carry: DecodeCarry) -> DecodeError {
    let plan: &CasePlan = &crate::case_table::CASE_TABLE[mval as usize];
    let max_len = T::WIDTH.max_len();
    let carried = carry.carried_bytes();
    let malformed = |offset| DecodeError::Malformed { offset, max_len };

    if plan.is_all_continuation() {
        return malformed(cursor - carried);
    }
    let extracts = plan.extracts();
    if carried + extracts[0].len() > max_len {
        return malformed(cursor - carried);
    }
    if let Some(e) = extracts[1..].iter().find(|e| e.len() > max_len) {
        return malformed(cursor + e.lo());
    }
    match plan.trailing() {
        Some(t) if t.len() >= max_len => malformed(cursor + t.lo()),
        _ => unreachable!("case {mval} rejected a legal block"),
    }
}

/// Which decoder [`Decoder`] routes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecoderConfig {
    pub scalar_only: bool,
    pub pext: PextPreference,
}

impl DecoderConfig {
    pub fn scalar() -> Self {
        DecoderConfig {
            scalar_only: true,
            pext: PextPreference::Auto,
        }
    }

    pub fn bulk(pext: PextPreference) -> Self {
        DecoderConfig {
            scalar_only: false,
            pext,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Scalar,
    Bulk(PextBackend),
}

/// A decoder with its route resolved once, at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decoder {
    route: Route,
}

impl Decoder {
    pub fn new(config: DecoderConfig) -> Result<Self, BackendError> {
        let route = if config.scalar_only {
            Route::Scalar
        } else {
            Route::Bulk(pext::detect_backend(config.pext.force())?)
        };
        Ok(Decoder { route })
    }

    pub fn with_route(route: Route) -> Self {
        Decoder { route }
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn decode<T: VarintInt>(
        &self,
        stream: &EncodedStream,
        out: &mut [T],
    ) -> Result<usize, DecodeError> {
        match self.route {
            Route::Scalar => varint::decode_all_scalar(stream, out),
            Route::Bulk(backend) => decode_bulk(stream, backend, out),
        }
    }

    pub fn decode_to_vec<T: VarintInt>(&self, stream: &EncodedStream) -> Result<Vec<T>, DecodeError> {
        let mut out = vec![T::default(); stream.count()];
        self.decode(stream, &mut out)?;
        Ok(out)
    }
}

/// Resolves `config` and decodes `stream` into `out`.
pub fn decode_adaptive<T: VarintInt>(
    stream: &EncodedStream,
    config: &DecoderConfig,
    out: &mut [T],
) -> Result<usize, Error> {
    Ok(Decoder::new(*config)?.decode(stream, out)?)
}
