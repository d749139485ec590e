//! Differential check of every decoder route against the scalar decoder.

use std::fmt;

use leb128_bmi::bulk::{Decoder, Route};
use leb128_bmi::pext::{self, BackendKind};
use leb128_bmi::varint::skip_varints;
use leb128_bmi::{DecodeError, ElementWidth, EncodedStream, PextBackend, VarintInt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Number of random prefixes checked against `skip_varints`.
pub const SKIP_PROBES: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    /// The reference decoder rejected the stream.
    Decode { route: String, error: DecodeError },
    /// A route disagreed with the scalar decoder's result.
    Route {
        route: String,
        value_index: Option<usize>,
        byte_offset: Option<usize>,
        detail: String,
    },
    Skip {
        k: usize,
        expected: usize,
        got: Result<usize, DecodeError>,
    },
    CountMismatch { header: u64, stream: usize },
}

impl Divergence {
    pub fn byte_offset(&self) -> Option<usize> {
        match self {
            Divergence::Decode { error, .. } => error.offset(),
            Divergence::Route { byte_offset, .. } => *byte_offset,
            Divergence::Skip { expected, .. } => Some(*expected),
            Divergence::CountMismatch { .. } => None,
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Decode { route, error } => write!(f, "{route}: {error}"),
            Divergence::Route {
                route,
                value_index,
                byte_offset,
                detail,
            } => {
                write!(f, "{route} diverges from scalar")?;
                if let Some(i) = value_index {
                    write!(f, " at value {i}")?;
                }
                if let Some(o) = byte_offset {
                    write!(f, " (byte {o})")?;
                }
                write!(f, ": {detail}")
            }
            Divergence::Skip { k, expected, got } => {
                write!(f, "skip({k}) returned {got:?}, decode position is {expected}")
            }
            Divergence::CountMismatch { header, stream } => {
                write!(f, "header count {header} but stream count {stream}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub count: usize,
    /// Route names that were compared, scalar first.
    pub routes: Vec<String>,
    pub skip_probes: usize,
    pub divergence: Option<Divergence>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(
                f,
                "PASS {} values, routes [{}], {} skip probes",
                self.count,
                self.routes.join(", "),
                self.skip_probes
            ),
            Some(d) => {
                write!(f, "FAIL")?;
                if let Some(o) = d.byte_offset() {
                    write!(f, " at byte {o}")?;
                }
                write!(f, ": {d}")
            }
        }
    }
}

/// Routes available on this machine: scalar, bulk-hw if BMI2 is present,
/// and bulk-sw.
pub fn available_routes() -> Vec<(String, Decoder)> {
    let mut routes = vec![("scalar".to_string(), Decoder::with_route(Route::Scalar))];
    if let Ok(hw) = pext::detect_backend(Some(BackendKind::Hardware)) {
        routes.push(("bulk-hw".into(), Decoder::with_route(Route::Bulk(hw))));
    }
    routes.push((
        "bulk-sw".into(),
        Decoder::with_route(Route::Bulk(PextBackend::PORTABLE)),
    ));
    routes
}

/// Byte position after each prefix of `k` values, found by scanning for
/// terminator bytes. `ends[k]` is the position after `k` values.
fn value_ends(bytes: &[u8], count: usize) -> Vec<usize> {
    let mut ends = Vec::with_capacity(count + 1);
    ends.push(0);
    ends.extend(
        bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b & 0x80 == 0)
            .map(|(i, _)| i + 1)
            .take(count),
    );
    ends
}

fn verify_typed<T: VarintInt>(
    stream: &EncodedStream,
    seed: u64,
    routes: &[(String, Decoder)],
) -> VerifyReport {
    let mut report = VerifyReport {
        count: stream.count(),
        routes: routes.iter().map(|(n, _)| n.clone()).collect(),
        skip_probes: 0,
        divergence: None,
    };

    let mut results = routes.iter().map(|(name, d)| (name, d.decode_to_vec::<T>(stream)));
    let Some((ref_name, reference)) = results.next() else {
        return report;
    };
    let ends = value_ends(stream.bytes(), stream.count());

    for (name, got) in results {
        if got == reference {
            continue;
        }
        let (value_index, detail) = match (&reference, &got) {
            (Ok(want), Ok(have)) => {
                let i = want.iter().zip(have).position(|(a, b)| a != b);
                let detail = match i {
                    Some(i) => format!("scalar {} vs {}", want[i], have[i]),
                    None => format!("lengths {} vs {}", want.len(), have.len()),
                };
                (i, detail)
            }
            (want, have) => (None, format!("{ref_name} {want:?} vs {have:?}")),
        };
        let byte_offset = value_index
            .and_then(|i| ends.get(i).copied())
            .or_else(|| got.as_ref().err().and_then(DecodeError::offset));
        report.divergence = Some(Divergence::Route {
            route: name.clone(),
            value_index,
            byte_offset,
            detail,
        });
        return report;
    }

    if let Err(error) = reference {
        report.divergence = Some(Divergence::Decode {
            route: ref_name.clone(),
            error,
        });
        return report;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SKIP_PROBES {
        let k = rng.random_range(0..=stream.count());
        let got = skip_varints(k, stream.bytes());
        report.skip_probes += 1;
        if got != Ok(ends[k]) {
            report.divergence = Some(Divergence::Skip {
                k,
                expected: ends[k],
                got,
            });
            return report;
        }
    }
    report
}

/// Decodes `stream` through every available route and checks `skip_varints`
/// at random prefixes. `seed` drives the prefix choice.
pub fn verify_stream(stream: &EncodedStream, seed: u64) -> VerifyReport {
    verify_stream_with(stream, seed, &available_routes())
}

/// Like [`verify_stream`] with an explicit route list; the first route is
/// the reference.
pub fn verify_stream_with(
    stream: &EncodedStream,
    seed: u64,
    routes: &[(String, Decoder)],
) -> VerifyReport {
    match stream.width() {
        ElementWidth::W32 => verify_typed::<u32>(stream, seed, routes),
        ElementWidth::W64 => verify_typed::<u64>(stream, seed, routes),
    }
}

/// [`verify_stream`] plus a check of the header's declared count.
pub fn verify_dataset(header_count: u64, stream: &EncodedStream, seed: u64) -> VerifyReport {
    verify_dataset_with(header_count, stream, seed, available_routes())
}

pub fn verify_dataset_with(
    header_count: u64,
    stream: &EncodedStream,
    seed: u64,
    routes: Vec<(String, Decoder)>,
) -> VerifyReport {
    let mut report = verify_stream_with(stream, seed, &routes);
    if report.passed() && header_count != stream.count() as u64 {
        report.divergence = Some(Divergence::CountMismatch {
            header: header_count,
            stream: stream.count(),
        });
    }
    report
}
