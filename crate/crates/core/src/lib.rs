//! LEB128 variable-length integer codec with a bulk decoder driven by
//! parallel bit extract (PEXT).
//!
//! The crate is split into:
//!
//! - [`varint`]: scalar encoder, decoder, skipper and size estimator. These are
//!   the reference implementation every other path is checked against.
//! - [`pext`]: PEXT on 64-bit words, hardware (BMI2) or portable, with runtime
//!   backend selection.
//! - [`case_table`]: the 64 decoding plans, one per 6-bit continuation pattern.
//! - [`bulk`]: block-wise decoding of whole streams using the case table, with
//!   carry between blocks and a scalar tail.
//! - [`workload`] and [`dataset`]: deterministic benchmark data and its file
//!   format.
//! - [`par`]: batch helpers that use rayon when the `parallel` feature is on.
//!
//! ```
//! use leb128_bmi::{bulk, pext, EncodedStream};
//!
//! let values: Vec<u32> = (0..1000).map(|i| i * 7919).collect();
//! let stream = EncodedStream::encode(&values);
//! let backend = pext::detect_backend(None).unwrap();
//! let mut out = vec![0u32; stream.count()];
//! bulk::decode_bulk(&stream, backend, &mut out).unwrap();
//! assert_eq!(out, values);
//! ```

pub mod bulk;
pub mod case_table;
pub mod dataset;
mod error;
pub mod par;
pub mod pext;
pub mod varint;
pub mod workload;

pub use bulk::{decode_adaptive, decode_bulk, DecodeCarry, Decoder, DecoderConfig};
pub use error::{BackendError, DatasetError, DecodeError, EncodeError, Error, WorkloadError};
pub use pext::{BackendKind, PextBackend, PextPreference};
pub use varint::{ElementWidth, EncodedStream, VarintInt};
