//! Scalar LEB128 codec.
//!
//! Each byte carries 7 payload bits, least-significant group first. The most
//! significant bit of a byte is the continuation flag: set on every byte of a
//! varint except the last (the terminator).
//!
//! Everything here is deliberately byte-at-a-time. These routines define the
//! expected output of the bulk decoder.

use std::fmt;

use crate::error::{DecodeError, EncodeError};

const PAYLOAD: u8 = 0x7f;
const CONTINUATION: u8 = 0x80;
const TERMINATOR_PROBE: u64 = 0x8080_8080_8080_8080;

/// Byte counts indexed by `leading_zeros(value | 1)` for 32-bit values.
pub const SIZE_LUT32: [u8; 32] = [
    5, 5, 5, 5, //
    4, 4, 4, 4, 4, 4, 4, //
    3, 3, 3, 3, 3, 3, 3, //
    2, 2, 2, 2, 2, 2, 2, //
    1, 1, 1, 1, 1, 1, 1,
];

/// Byte counts indexed by `leading_zeros(value | 1)` for 64-bit values.
pub const SIZE_LUT64: [u8; 64] = [
    10, //
    9, 9, 9, 9, 9, 9, 9, //
    8, 8, 8, 8, 8, 8, 8, //
    7, 7, 7, 7, 7, 7, 7, //
    6, 6, 6, 6, 6, 6, 6, //
    5, 5, 5, 5, 5, 5, 5, //
    4, 4, 4, 4, 4, 4, 4, //
    3, 3, 3, 3, 3, 3, 3, //
    2, 2, 2, 2, 2, 2, 2, //
    1, 1, 1, 1, 1, 1, 1,
];

/// Bit width of a decoded unsigned integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementWidth {
    W32,
    W64,
}

impl ElementWidth {
    pub const fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            32 => Some(ElementWidth::W32),
            64 => Some(ElementWidth::W64),
            _ => None,
        }
    }

    pub const fn bits(self) -> u32 {
        match self {
            ElementWidth::W32 => 32,
            ElementWidth::W64 => 64,
        }
    }

    /// Longest legal encoding in bytes: 5 for 32-bit, 10 for 64-bit.
    pub const fn max_len(self) -> usize {
        match self {
            ElementWidth::W32 => 5,
            ElementWidth::W64 => 10,
        }
    }

    /// Shift applied to the payload of the last legal byte: 28 or 63.
    pub const fn max_shift(self) -> u32 {
        7 * (self.max_len() as u32 - 1)
    }

    pub const fn max_value(self) -> u64 {
        match self {
            ElementWidth::W32 => u32::MAX as u64,
            ElementWidth::W64 => u64::MAX,
        }
    }
}

impl fmt::Display for ElementWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits())
    }
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for u32 {}
    impl Sealed for u64 {}
}

/// Unsigned integer types the codec decodes into. Implemented for `u32` and `u64`.
///
/// All decoding arithmetic happens in 64 bits; results are narrowed with
/// [`VarintInt::from_u64_wrapping`], so a 32-bit varint whose fifth byte carries
/// bits above bit 31 wraps rather than failing.
pub trait VarintInt:
    sealed::Sealed + Copy + Default + Eq + Ord + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    const WIDTH: ElementWidth;

    fn from_u64_wrapping(value: u64) -> Self;

    fn to_u64(self) -> u64;

    fn try_from_u64(value: u64) -> Option<Self>;

    /// Leading zero count of `self | 1`, the index into the size table.
    fn size_index(self) -> usize;

    fn size_lut() -> &'static [u8];
}

impl VarintInt for u32 {
    const WIDTH: ElementWidth = ElementWidth::W32;

    #[inline(always)]
    fn from_u64_wrapping(value: u64) -> Self {
        value as u32
    }

    #[inline(always)]
    fn to_u64(self) -> u64 {
        u64::from(self)
    }

    fn try_from_u64(value: u64) -> Option<Self> {
        u32::try_from(value).ok()
    }

    #[inline(always)]
    fn size_index(self) -> usize {
        (self | 1).leading_zeros() as usize
    }

    fn size_lut() -> &'static [u8] {
        &SIZE_LUT32
    }
}

impl VarintInt for u64 {
    const WIDTH: ElementWidth = ElementWidth::W64;

    #[inline(always)]
    fn from_u64_wrapping(value: u64) -> Self {
        value
    }

    #[inline(always)]
    fn to_u64(self) -> u64 {
        self
    }

    fn try_from_u64(value: u64) -> Option<Self> {
        Some(value)
    }

    #[inline(always)]
    fn size_index(self) -> usize {
        (self | 1).leading_zeros() as usize
    }

    fn size_lut() -> &'static [u8] {
        &SIZE_LUT64
    }
}

/// A LEB128-encoded sequence together with its value count and element width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    bytes: Vec<u8>,
    count: usize,
    width: ElementWidth,
}

impl EncodedStream {
    /// Wraps raw bytes. Nothing is validated until the stream is decoded.
    pub fn new(bytes: Vec<u8>, count: usize, width: ElementWidth) -> Self {
        EncodedStream {
            bytes,
            count,
            width,
        }
    }

    pub fn encode<T: VarintInt>(values: &[T]) -> Self {
        let mut bytes = Vec::with_capacity(encoded_size_batch(values));
        for &v in values {
            encode_one(v, &mut bytes);
        }
        EncodedStream::new(bytes, values.len(), T::WIDTH)
    }

    /// Encodes `u64` values at `width`, rejecting values that do not fit.
    pub fn encode_wide(values: &[u64], width: ElementWidth) -> Result<Self, EncodeError> {
        match width {
            ElementWidth::W64 => Ok(EncodedStream::encode(values)),
            ElementWidth::W32 => {
                let mut bytes = Vec::with_capacity(values.len() * 2);
                for (index, &value) in values.iter().enumerate() {
                    let v = u32::try_from_u64(value).ok_or(EncodeError::ValueOutOfRange {
                        index,
                        value,
                        width,
                    })?;
                    encode_one(v, &mut bytes);
                }
                Ok(EncodedStream::new(bytes, values.len(), width))
            }
        }
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bytes_mut(&mut self) -> &mut Vec<u8> {
        &mut self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn width(&self) -> ElementWidth {
        self.width
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Checks that `out` can receive this stream's values.
    pub(crate) fn check_sink<T: VarintInt>(&self, available: usize) -> Result<(), DecodeError> {
        if self.width != T::WIDTH {
            return Err(DecodeError::WidthMismatch {
                stream: self.width,
                sink: T::WIDTH,
            });
        }
        if available < self.count {
            return Err(DecodeError::OutputTooSmall {
                needed: self.count,
                available,
            });
        }
        Ok(())
    }
}

/// Appends the LEB128 encoding of `value` to `out`, returning the byte count.
pub fn encode_one<T: VarintInt>(value: T, out: &mut Vec<u8>) -> usize {
    let mut val = value.to_u64();
    let start = out.len();
    while val >= u64::from(CONTINUATION) {
        out.push(CONTINUATION | (val as u8 & PAYLOAD));
        val >>= 7;
    }
    out.push(val as u8);
    out.len() - start
}

/// Writes the encoding of `value` into a fixed buffer.
pub fn encode_one_into<T: VarintInt>(value: T, out: &mut [u8]) -> Result<usize, EncodeError> {
    let needed = encoded_size(value);
    if out.len() < needed {
        return Err(EncodeError::Capacity {
            needed,
            available: out.len(),
        });
    }
    let mut val = value.to_u64();
    let mut i = 0;
    while val >= u64::from(CONTINUATION) {
        out[i] = CONTINUATION | (val as u8 & PAYLOAD);
        val >>= 7;
        i += 1;
    }
    out[i] = val as u8;
    Ok(i + 1)
}

/// Decodes one varint from the front of `bytes`, returning the value and the
/// number of bytes consumed.
///
/// A varint whose continuation flag is still set on byte `max_len` is
/// malformed, regardless of what follows. Error offsets are relative to `bytes`.
#[inline]
pub fn decode_one_scalar<T: VarintInt>(bytes: &[u8]) -> Result<(T, usize), DecodeError> {
    let max_len = T::WIDTH.max_len();
    let mut result = 0u64;
    let mut shift = 0u32;
    for (i, &b) in bytes.iter().enumerate() {
        result |= u64::from(b & PAYLOAD) << shift;
        if b & CONTINUATION == 0 {
            return Ok((T::from_u64_wrapping(result), i + 1));
        }
        if i + 1 == max_len {
            return Err(DecodeError::Malformed { offset: 0, max_len });
        }
        shift += 7;
    }
    Err(DecodeError::Truncated {
        offset: bytes.len(),
    })
}

/// Decodes every value of `stream` into `out`, returning the count decoded.
pub fn decode_all_scalar<T: VarintInt>(
    stream: &EncodedStream,
    out: &mut [T],
) -> Result<usize, DecodeError> {
    stream.check_sink::<T>(out.len())?;
    let bytes = stream.bytes();
    let mut pos = 0;
    for slot in &mut out[..stream.count()] {
        let (v, used) = decode_one_scalar::<T>(&bytes[pos..]).map_err(|e| e.shifted(pos))?;
        *slot = v;
        pos += used;
    }
    if pos != bytes.len() {
        return Err(DecodeError::TrailingBytes {
            offset: pos,
            remaining: bytes.len() - pos,
        });
    }
    Ok(stream.count())
}

/// Convenience wrapper around [`decode_all_scalar`] that allocates the output.
pub fn decode_to_vec_scalar<T: VarintInt>(stream: &EncodedStream) -> Result<Vec<T>, DecodeError> {
    let mut out = vec![T::default(); stream.count()];
    decode_all_scalar(stream, &mut out)?;
    Ok(out)
}

/// Returns the position just past the `n`-th terminator byte of `bytes`.
///
/// Eight bytes at a time, the number of terminators in a word is the popcount
/// of its inverted MSBs. The per-byte loop afterwards first finishes whatever
/// varint the word loop stopped inside.
pub fn skip_varints(mut n: usize, bytes: &[u8]) -> Result<usize, DecodeError> {
    let mut pos = 0;
    while n >= 8 && bytes.len() - pos >= 8 {
        let word = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
        n -= (!word & TERMINATOR_PROBE).count_ones() as usize;
        pos += 8;
    }
    while n > 0 {
        loop {
            let b = *bytes.get(pos).ok_or(DecodeError::Truncated {
                offset: bytes.len(),
            })?;
            pos += 1;
            if b & CONTINUATION == 0 {
                break;
            }
        }
        n -= 1;
    }
    Ok(pos)
}

/// Encoded length of `value` in bytes, from the leading-zero lookup table.
#[inline]
pub fn encoded_size<T: VarintInt>(value: T) -> usize {
    T::size_lut()[value.size_index()] as usize
}

/// [`encoded_size`] for a 64-bit value at a runtime width. Values wider than
/// `width` are sized as 64-bit values.
pub fn encoded_size_wide(value: u64, width: ElementWidth) -> usize {
    match (width, u32::try_from(value)) {
        (ElementWidth::W32, Ok(v)) => encoded_size(v),
        _ => encoded_size(value),
    }
}

pub fn encoded_size_batch<T: VarintInt>(values: &[T]) -> usize {
    values.iter().map(|&v| encoded_size(v)).sum()
}
