//! Deterministic benchmark workloads.
//!
//! W1 draws values uniformly over the full width. W2, W3 and W4 first draw an
//! encoded length from a skewed distribution, then a value uniformly among
//! the values of exactly that length.
//!
//! Generation is chunked: chunk `i` of [`CHUNK_LEN`] values uses a ChaCha8
//! stream seeded with `seed` on stream number `i`. Chunks are independent, so
//! the `parallel` feature changes how fast a dataset is produced, never its
//! contents.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::WorkloadError;
use crate::par;
use crate::varint::ElementWidth;

pub const CHUNK_LEN: usize = 1 << 16;

/// Longest encoding any distribution can name (a 64-bit value).
pub const MAX_LEN: usize = 10;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Workload {
    W1,
    W2,
    W3,
    W4,
}

impl Workload {
    pub const ALL: [Workload; 4] = [Workload::W1, Workload::W2, Workload::W3, Workload::W4];

    pub fn name(self) -> &'static str {
        match self {
            Workload::W1 => "w1",
            Workload::W2 => "w2",
            Workload::W3 => "w3",
            Workload::W4 => "w4",
        }
    }

    /// Byte-length distribution, or `None` for the uniform workload.
    pub fn distribution(self) -> Option<LengthDistribution> {
        let raw: &[f64] = match self {
            Workload::W1 => return None,
            Workload::W2 => &[0.9008, 0.0463, 0.0322, 0.0120, 0.0088],
            Workload::W3 => &[0.8122, 0.0731, 0.0616, 0.0420, 0.0110],
            Workload::W4 => &[0.7213, 0.1231, 0.0853, 0.0531, 0.0172],
        };
        Some(LengthDistribution::normalized(self.name(), raw).expect("builtin weights are valid"))
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "w1" => Ok(Workload::W1),
            "w2" => Ok(Workload::W2),
            "w3" => Ok(Workload::W3),
            "w4" => Ok(Workload::W4),
            other => Err(format!("unknown workload {other:?}, expected w1..w4")),
        }
    }
}

/// Probability of each encoded length 1..=10.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthDistribution {
    name: String,
    weights: [f64; MAX_LEN],
}

impl LengthDistribution {
    /// `weights[i]` is the probability of length `i + 1`. They must sum to 1.
    pub fn new(name: impl Into<String>, weights: &[f64]) -> Result<Self, WorkloadError> {
        let name = name.into();
        let invalid = |reason: String| WorkloadError::InvalidDistribution {
            name: name.clone(),
            reason,
        };
        if weights.len() > MAX_LEN {
            return Err(invalid(format!("{} lengths given, at most {MAX_LEN}", weights.len())));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(invalid(format!("weight {w} is not a probability")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("weights sum to {sum}")));
        }
        let mut arr = [0.0; MAX_LEN];
        arr[..weights.len()].copy_from_slice(weights);
        Ok(LengthDistribution { name, weights: arr })
    }

    /// Like [`LengthDistribution::new`] but rescales the weights to sum to 1.
    pub fn normalized(name: impl Into<String>, weights: &[f64]) -> Result<Self, WorkloadError> {
        let sum: f64 = weights.iter().sum();
        let name = name.into();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(WorkloadError::InvalidDistribution {
                name,
                reason: format!("weights sum to {sum}"),
            });
        }
        let scaled: Vec<f64> = weights.iter().map(|w| w / sum).collect();
        LengthDistribution::new(name, &scaled)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Probability of encoded length `len` (1-based).
    pub fn weight(&self, len: usize) -> f64 {
        len.checked_sub(1)
            .and_then(|i| self.weights.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn weights(&self) -> &[f64; MAX_LEN] {
        &self.weights
    }

    pub fn longest(&self) -> usize {
        self.weights.iter().rposition(|&w| w > 0.0).map_or(0, |i| i + 1)
    }

    pub fn check_width(&self, width: ElementWidth) -> Result<(), WorkloadError> {
        if self.longest() > width.max_len() {
            return Err(WorkloadError::InvalidDistribution {
                name: self.name.clone(),
                reason: format!(
                    "length {} is impossible for {width}-bit values",
                    self.longest()
                ),
            });
        }
        Ok(())
    }
}

/// W2, W3 and W4, in that order.
pub fn builtin_distributions() -> [LengthDistribution; 3] {
    [Workload::W2, Workload::W3, Workload::W4].map(|w| w.distribution().unwrap())
}

/// Inclusive value range whose encodings are exactly `len` bytes at `width`.
pub fn length_range(len: usize, width: ElementWidth) -> Option<(u64, u64)> {
    if len == 0 || len > width.max_len() {
        return None;
    }
    let lo = if len == 1 { 0 } else { 1u64 << (7 * (len - 1)) };
    let hi = if len == width.max_len() {
        width.max_value()
    } else {
        (1u64 << (7 * len)) - 1
    };
    Some((lo, hi))
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `count` values uniform over `[0, width max]`.
pub fn gen_uniform(count: usize, width: ElementWidth, seed: u64) -> Vec<u64> {
    let mut out = vec![0u64; count];
    par::fill_chunks(&mut out, CHUNK_LEN, |chunk, slots| {
        let mut rng = chunk_rng(seed, chunk);
        for slot in slots {
            *slot = match width {
                ElementWidth::W32 => u64::from(rng.random::<u32>()),
                ElementWidth::W64 => rng.random::<u64>(),
            };
        }
    });
    out
}

/// `count` values whose encoded lengths follow `dist`.
pub fn gen_by_lengths(
    count: usize,
    width: ElementWidth,
    dist: &LengthDistribution,
    seed: u64,
) -> Result<Vec<u64>, WorkloadError> {
    dist.check_width(width)?;
    let picker = WeightedIndex::new(dist.weights()).map_err(|e| WorkloadError::InvalidDistribution {
        name: dist.name.clone(),
        reason: e.to_string(),
    })?;
    let ranges: Vec<(u64, u64)> = (1..=MAX_LEN)
        .map(|len| length_range(len, width).unwrap_or((0, 0)))
        .collect();
    let mut out = vec![0u64; count];
    par::fill_chunks(&mut out, CHUNK_LEN, |chunk, slots| {
        let mut rng = chunk_rng(seed, chunk);
        for slot in slots {
            let (lo, hi) = ranges[picker.sample(&mut rng)];
            *slot = rng.random_range(lo..=hi);
        }
    });
    Ok(out)
}

/// Values for a named workload.
pub fn generate(workload: Workload, width: ElementWidth, count: usize, seed: u64) -> Vec<u64> {
    match workload.distribution() {
        None => gen_uniform(count, width, seed),
        Some(dist) => gen_by_lengths(count, width, &dist, seed)
            .expect("builtin distributions only name lengths up to 5"),
    }
}
