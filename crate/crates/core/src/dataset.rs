//! Dataset files: a fixed 32-byte header followed by the LEB128 payload.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "SFVI"
//!      4     1  version (1)
//!      5     1  element width in bits (32 or 64)
//!      6     2  reserved, zero
//!      8     8  value count        (little-endian)
//!     16     8  generator seed     (little-endian)
//!     24     8  payload length     (little-endian)
//!     32     -  payload
//! ```

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::DatasetError;
use crate::varint::{ElementWidth, EncodedStream};

pub const MAGIC: [u8; 4] = *b"SFVI";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub width: ElementWidth,
    pub count: u64,
    pub seed: u64,
    pub payload_len: u64,
}

impl DatasetHeader {
    pub fn for_stream(stream: &EncodedStream, seed: u64) -> Self {
        DatasetHeader {
            width: stream.width(),
            count: stream.count() as u64,
            seed,
            payload_len: stream.len() as u64,
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[..4].copy_from_slice(&MAGIC);
        b[4] = VERSION;
        b[5] = self.width.bits() as u8;
        b[8..16].copy_from_slice(&self.count.to_le_bytes());
        b[16..24].copy_from_slice(&self.seed.to_le_bytes());
        b[24..32].copy_from_slice(&self.payload_len.to_le_bytes());
        b
    }

    pub fn parse(b: &[u8; HEADER_LEN]) -> Result<Self, DatasetError> {
        let found: [u8; 4] = b[..4].try_into().unwrap();
        if found != MAGIC {
            return Err(DatasetError::BadMagic { found });
        }
        if b[4] != VERSION {
            return Err(DatasetError::BadVersion { found: b[4] });
        }
        let width =
            ElementWidth::from_bits(u32::from(b[5])).ok_or(DatasetError::BadWidth { found: b[5] })?;
        let le = |r: std::ops::Range<usize>| u64::from_le_bytes(b[r].try_into().unwrap());
        Ok(DatasetHeader {
            width,
            count: le(8..16),
            seed: le(16..24),
            payload_len: le(24..32),
        })
    }
}

pub fn write_stream_to<W: Write>(
    mut w: W,
    stream: &EncodedStream,
    seed: u64,
) -> Result<DatasetHeader, DatasetError> {
    let header = DatasetHeader::for_stream(stream, seed);
    w.write_all(&header.to_bytes())?;
    w.write_all(stream.bytes())?;
    w.flush()?;
    Ok(header)
}

pub fn read_stream_from<R: Read>(mut r: R) -> Result<(DatasetHeader, EncodedStream), DatasetError> {
    let mut all = Vec::new();
    r.read_to_end(&mut all)?;
    from_bytes(all)
}

/// Parses a whole dataset image. The payload is not decoded.
pub fn from_bytes(mut all: Vec<u8>) -> Result<(DatasetHeader, EncodedStream), DatasetError> {
    if all.len() < HEADER_LEN {
        if all.len() >= MAGIC.len() && all[..4] != MAGIC {
            return Err(DatasetError::BadMagic {
                found: all[..4].try_into().unwrap(),
            });
        }
        return Err(DatasetError::LengthMismatch {
            declared: HEADER_LEN as u64,
            actual: all.len() as u64,
        });
    }
    let header = DatasetHeader::parse(all[..HEADER_LEN].try_into().unwrap())?;
    let actual = (all.len() - HEADER_LEN) as u64;
    if actual != header.payload_len {
        return Err(DatasetError::LengthMismatch {
            declared: header.payload_len,
            actual,
        });
    }
    let count = usize::try_from(header.count).map_err(|_| DatasetError::LengthMismatch {
        declared: header.count,
        actual: usize::MAX as u64,
    })?;
    all.drain(..HEADER_LEN);
    Ok((header, EncodedStream::new(all, count, header.width)))
}

/// Encodes `values` at `width` and writes them with a header to `path`.
pub fn write_dataset(
    path: &Path,
    width: ElementWidth,
    seed: u64,
    values: &[u64],
) -> Result<DatasetHeader, DatasetError> {
    let stream = EncodedStream::encode_wide(values, width)?;
    write_stream(path, &stream, seed)
}

pub fn write_stream(
    path: &Path,
    stream: &EncodedStream,
    seed: u64,
) -> Result<DatasetHeader, DatasetError> {
    let file = fs::File::create(path)?;
    write_stream_to(std::io::BufWriter::new(file), stream, seed)
}

pub fn read_dataset(path: &Path) -> Result<(DatasetHeader, EncodedStream), DatasetError> {
    from_bytes(fs::read(path)?)
}
