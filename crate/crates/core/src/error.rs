use std::io;

use thiserror::Error;

use crate::varint::ElementWidth;

/// Errors raised while decoding or skipping LEB128 data.
///
/// Offsets are absolute byte positions in the input. For malformed varints the
/// offset is the first byte of the offending varint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed varint at byte {offset}: continuation runs past {max_len} bytes")]
    Malformed { offset: usize, max_len: usize },
    #[error("input truncated at byte {offset} before a terminator byte")]
    Truncated { offset: usize },
    #[error("{remaining} bytes left over at byte {offset} after the last value")]
    TrailingBytes { offset: usize, remaining: usize },
    #[error("stream holds {stream}-bit values but the output holds {sink}-bit values")]
    WidthMismatch {
        stream: ElementWidth,
        sink: ElementWidth,
    },
    #[error("output has room for {available} values, stream holds {needed}")]
    OutputTooSmall { needed: usize, available: usize },
}

impl DecodeError {
    /// Byte offset of the fault, if the error is tied to a position.
    pub fn offset(&self) -> Option<usize> {
        match *self {
            DecodeError::Malformed { offset, .. }
            | DecodeError::Truncated { offset }
            | DecodeError::TrailingBytes { offset, .. } => Some(offset),
            DecodeError::WidthMismatch { .. } | DecodeError::OutputTooSmall { .. } => None,
        }
    }

    pub(crate) fn shifted(self, base: usize) -> Self {
        match self {
            DecodeError::Malformed { offset, max_len } => DecodeError::Malformed {
                offset: offset + base,
                max_len,
            },
            DecodeError::Truncated { offset } => DecodeError::Truncated {
                offset: offset + base,
            },
            DecodeError::TrailingBytes { offset, remaining } => DecodeError::TrailingBytes {
                offset: offset + base,
                remaining,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("output buffer too small: need {needed} bytes, have {available}")]
    Capacity { needed: usize, available: usize },
    #[error("value {value} at index {index} does not fit in {width} bits")]
    ValueOutOfRange {
        index: usize,
        value: u64,
        width: ElementWidth,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("hardware PEXT was requested but this CPU does not report BMI2")]
    ForcedUnavailable,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic {found:02x?}, expected \"SFVI\"")]
    BadMagic { found: [u8; 4] },
    #[error("unsupported dataset version {found}")]
    BadVersion { found: u8 },
    #[error("unsupported element width {found}")]
    BadWidth { found: u8 },
    #[error("expected {declared} bytes, file holds {actual}")]
    LengthMismatch { declared: u64, actual: u64 },
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("length distribution {name}: {reason}")]
    InvalidDistribution { name: String, reason: String },
}

/// Umbrella error for callers that mix decoding with backend selection or I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
}
