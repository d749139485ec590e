//! Single-threaded decode timing.
//!
//! The dataset is already in memory and the output buffer is allocated before
//! timing starts, so each timed iteration is one full-stream decode and
//! nothing else.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use leb128_bmi::bulk::{Decoder, Route};
use leb128_bmi::pext::{self, BackendKind};
use leb128_bmi::{BackendError, DecodeError, EncodedStream, PextBackend, PextPreference, VarintInt};
use thiserror::Error;

use crate::report::BenchReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Scalar,
    BulkHw,
    BulkSw,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Scalar => "scalar",
            Algo::BulkHw => "bulk-hw",
            Algo::BulkSw => "bulk-sw",
        }
    }

    pub fn decoder(self) -> Result<Decoder, BackendError> {
        Ok(Decoder::with_route(match self {
            Algo::Scalar => Route::Scalar,
            Algo::BulkHw => Route::Bulk(pext::detect_backend(Some(BackendKind::Hardware))?),
            Algo::BulkSw => Route::Bulk(PextBackend::PORTABLE),
        }))
    }

    /// Parses a comma-separated list. `bulk` means whichever bulk backend
    /// `pext` resolves to.
    pub fn parse_list(list: &str, pext: PextPreference) -> Result<Vec<Algo>, String> {
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let algo = match item {
                "bulk" => match pext.resolve() {
                    Ok(b) if b.kind() == BackendKind::Hardware => Algo::BulkHw,
                    Ok(_) => Algo::BulkSw,
                    Err(_) => Algo::BulkHw,
                },
                other => other.parse()?,
            };
            if !out.contains(&algo) {
                out.push(algo);
            }
        }
        if out.is_empty() {
            return Err("no algorithms given".into());
        }
        Ok(out)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(Algo::Scalar),
            "bulk-hw" => Ok(Algo::BulkHw),
            "bulk-sw" => Ok(Algo::BulkSw),
            other => Err(format!(
                "unknown algorithm {other:?}, expected scalar, bulk, bulk-hw or bulk-sw"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub algos: Vec<Algo>,
    pub iterations: usize,
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algos: vec![Algo::Scalar, Algo::BulkHw],
            iterations: 30,
            warmup: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("{algo} failed to decode the dataset: {source}")]
    Decode { algo: Algo, source: DecodeError },
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("checksum mismatch: {algo} produced {got:#x}, {reference} produced {expected:#x}")]
    ChecksumMismatch {
        algo: Algo,
        got: u64,
        reference: Algo,
        expected: u64,
    },
}

fn checksum<T: VarintInt>(values: &[T]) -> u64 {
    values.iter().fold(0u64, |acc, v| acc.wrapping_add(v.to_u64()))
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Times `iterations` full decodes after `warmup` untimed ones. Returns the
/// median in nanoseconds and the checksum of the decoded values.
pub fn time_decode<T: VarintInt>(
    decoder: &Decoder,
    stream: &EncodedStream,
    out: &mut [T],
    iterations: usize,
    warmup: usize,
) -> Result<(f64, u64), DecodeError> {
    for _ in 0..warmup {
        decoder.decode(black_box(stream), black_box(&mut *out))?;
    }
    let mut samples = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let start = Instant::now();
        decoder.decode(black_box(stream), black_box(&mut *out))?;
        let elapsed = start.elapsed();
        samples.push((elapsed.as_nanos() as f64).max(1.0));
    }
    Ok((median(&mut samples), checksum(out)))
}

fn run_typed<T: VarintInt>(
    stream: &EncodedStream,
    workload: &str,
    config: &BenchConfig,
) -> Result<Vec<BenchReport>, BenchError> {
    let decoders = config
        .algos
        .iter()
        .map(|&a| Ok((a, a.decoder()?)))
        .collect::<Result<Vec<_>, BackendError>>()?;
    let mut out = vec![T::default(); stream.count()];
    let mut reports: Vec<BenchReport> = Vec::new();
    for (algo, decoder) in decoders {
        let (ns, sum) = time_decode(&decoder, stream, &mut out, config.iterations, config.warmup)
            .map_err(|source| BenchError::Decode { algo, source })?;
        if let Some(first) = reports.first() {
            if first.checksum != sum {
                return Err(BenchError::ChecksumMismatch {
                    algo,
                    got: sum,
                    reference: first.algo,
                    expected: first.checksum,
                });
            }
        }
        let secs = ns * 1e-9;
        reports.push(BenchReport {
            algo,
            workload: workload.to_string(),
            width: stream.width(),
            count: stream.count(),
            iterations: config.iterations,
            ns_per_iteration: ns,
            values_per_second: stream.count() as f64 / secs,
            bytes_per_second: stream.len() as f64 / secs,
            backend: match decoder.route() {
                Route::Scalar => "none",
                Route::Bulk(b) => b.kind().as_str(),
            },
            checksum: sum,
        });
        out.fill(T::default());
    }
    Ok(reports)
}

/// Benchmarks every configured algorithm on `stream`.
pub fn run_bench(
    stream: &EncodedStream,
    workload: &str,
    config: &BenchConfig,
) -> Result<Vec<BenchReport>, BenchError> {
    if config.iterations == 0 {
        return Err(BenchError::NoIterations);
    }
    match stream.width() {
        leb128_bmi::ElementWidth::W32 => run_typed::<u32>(stream, workload, config),
        leb128_bmi::ElementWidth::W64 => run_typed::<u64>(stream, workload, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use leb128_bmi::workload::{generate, Workload};
    use leb128_bmi::ElementWidth;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn parse_algos() {
        assert_eq!(
            Algo::parse_list("scalar,bulk-sw", PextPreference::Auto),
            Ok(vec![Algo::Scalar, Algo::BulkSw])
        );
        assert_eq!(
            Algo::parse_list("bulk", PextPreference::Portable),
            Ok(vec![Algo::BulkSw])
        );
        assert!(Algo::parse_list("fast", PextPreference::Auto).is_err());
        assert!(Algo::parse_list("", PextPreference::Auto).is_err());
    }

    #[test]
    fn checksums_agree_across_algos() {
        let values = generate(Workload::W4, ElementWidth::W32, 10_000, 1);
        let stream = EncodedStream::encode_wide(&values, ElementWidth::W32).unwrap();
        let mut algos = vec![Algo::Scalar, Algo::BulkSw];
        if pext::bmi2_available() {
            algos.push(Algo::BulkHw);
        }
        let config = BenchConfig {
            algos: algos.clone(),
            iterations: 3,
            warmup: 1,
        };
        let reports = run_bench(&stream, "w4", &config).unwrap();
        assert_eq!(reports.len(), algos.len());
        let expected = values.iter().fold(0u64, |a, &v| a.wrapping_add(v));
        for r in &reports {
            assert_eq!(r.checksum, expected);
            assert!(r.ns_per_iteration > 0.0);
        }
    }

    #[test]
    fn zero_iterations_rejected() {
        let stream = EncodedStream::encode(&[1u32]);
        let config = BenchConfig {
            iterations: 0,
            ..BenchConfig::default()
        };
        assert!(matches!(
            run_bench(&stream, "x", &config),
            Err(BenchError::NoIterations)
        ));
    }
}
