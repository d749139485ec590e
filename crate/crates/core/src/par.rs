//! Batch helpers. With the `parallel` feature these fan out over rayon's
//! global pool; without it they run the [`seq`] versions.
//!
//! Everything here is for work across independent items (many streams, many
//! chunks, many random probes). A single stream is always decoded by one
//! thread.

use crate::bulk::Decoder;
use crate::error::DecodeError;
use crate::varint::{self, EncodedStream, VarintInt};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential versions of every helper, always available.
pub mod seq {
    use super::*;

    pub fn fill_chunks<T, F>(out: &mut [T], chunk_len: usize, f: F)
    where
        F: Fn(usize, &mut [T]),
    {
        out.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }

    pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }

    pub fn find_first<R, F>(n: usize, f: F) -> Option<R>
    where
        F: Fn(usize) -> Option<R>,
    {
        (0..n).find_map(f)
    }

    pub fn encoded_size_batch<T: VarintInt>(values: &[T]) -> usize {
        varint::encoded_size_batch(values)
    }

    pub fn decode_many<T: VarintInt>(
        decoder: &Decoder,
        streams: &[EncodedStream],
    ) -> Vec<Result<Vec<T>, DecodeError>> {
        map(streams, |s| decoder.decode_to_vec(s))
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Calls `f(chunk_index, chunk)` for each `chunk_len`-sized piece of `out`.
pub fn fill_chunks<T, F>(out: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    seq::fill_chunks(out, chunk_len, f);
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    seq::map(items, f)
}

/// The result for the lowest index in `0..n` where `f` returns `Some`.
pub fn find_first<R, F>(n: usize, f: F) -> Option<R>
where
    R: Send,
    F: Fn(usize) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().find_map_first(f);
    #[cfg(not(feature = "parallel"))]
    seq::find_first(n, f)
}

pub fn encoded_size_batch<T: VarintInt>(values: &[T]) -> usize {
    #[cfg(feature = "parallel")]
    return values
        .par_chunks(1 << 14)
        .map(varint::encoded_size_batch)
        .sum();
    #[cfg(not(feature = "parallel"))]
    seq::encoded_size_batch(values)
}

/// Decodes independent streams, one per task.
pub fn decode_many<T: VarintInt>(
    decoder: &Decoder,
    streams: &[EncodedStream],
) -> Vec<Result<Vec<T>, DecodeError>> {
    map(streams, |s| decoder.decode_to_vec(s))
}
