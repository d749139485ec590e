//! Property tests: every bulk route against the scalar decoder, and the
//! scalar codec against its own invariants.

use leb128_bmi::pext::{self, BackendKind};
use leb128_bmi::varint::{
    decode_one_scalar, decode_to_vec_scalar, encode_one, encoded_size, skip_varints,
};
use leb128_bmi::{bulk, ElementWidth, EncodedStream, PextBackend, VarintInt};
use proptest::prelude::*;

fn backends() -> Vec<PextBackend> {
    let mut v = vec![PextBackend::PORTABLE];
    if let Ok(hw) = pext::detect_backend(Some(BackendKind::Hardware)) {
        v.push(hw);
    }
    v
}

fn assert_bulk_matches<T: VarintInt>(stream: &EncodedStream) -> Result<(), TestCaseError> {
    let expected = decode_to_vec_scalar::<T>(stream);
    for b in backends() {
        let mut out = vec![T::default(); stream.count()];
        let got = bulk::decode_bulk(stream, b, &mut out).map(|_| out);
        prop_assert_eq!(&got, &expected, "backend {:?}", b);
    }
    Ok(())
}

/// Values drawn by encoded length so that long encodings are common.
fn value_of_len(width: ElementWidth) -> impl Strategy<Value = u64> {
    (1..=width.max_len(), any::<u64>()).prop_map(move |(len, r)| {
        let lo = if len == 1 { 0 } else { 1u64 << (7 * (len - 1)) };
        let hi = if len == width.max_len() {
            width.max_value()
        } else {
            (1u64 << (7 * len)) - 1
        };
        lo + r % (hi - lo).saturating_add(1).max(1)
    })
}

fn values(width: ElementWidth, max: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(value_of_len(width), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn roundtrip_u64(v: u64) {
        let mut buf = Vec::new();
        let n = encode_one(v, &mut buf);
        prop_assert_eq!(n, encoded_size(v));
        prop_assert_eq!(decode_one_scalar::<u64>(&buf), Ok((v, n)));
    }

    #[test]
    fn roundtrip_u32(v: u32) {
        let mut buf = Vec::new();
        let n = encode_one(v, &mut buf);
        prop_assert_eq!(n, encoded_size(v));
        prop_assert!((1..=5).contains(&n));
        prop_assert_eq!(decode_one_scalar::<u32>(&buf), Ok((v, n)));
    }

    #[test]
    fn bulk_matches_scalar_u64(vals in values(ElementWidth::W64, 600)) {
        assert_bulk_matches::<u64>(&EncodedStream::encode(&vals))?;
    }

    #[test]
    fn bulk_matches_scalar_u32(vals in values(ElementWidth::W32, 600)) {
        let vals: Vec<u32> = vals.into_iter().map(|v| v as u32).collect();
        assert_bulk_matches::<u32>(&EncodedStream::encode(&vals))?;
    }

    #[test]
    fn bulk_matches_scalar_on_corrupted_bytes(
        vals in values(ElementWidth::W64, 200),
        flips in prop::collection::vec((any::<prop::sample::Index>(), 0u8..8), 1..4),
        wide in any::<bool>(),
    ) {
        let stream = EncodedStream::encode(&vals);
        let mut bytes = stream.bytes().to_vec();
        if bytes.is_empty() {
            return Ok(());
        }
        for (i, bit) in flips {
            let i = i.index(bytes.len());
            bytes[i] ^= 1 << bit;
        }
        if wide {
            assert_bulk_matches::<u64>(&EncodedStream::new(bytes, vals.len(), ElementWidth::W64))?;
        } else {
            assert_bulk_matches::<u32>(&EncodedStream::new(bytes, vals.len(), ElementWidth::W32))?;
        }
    }

    #[test]
    fn bulk_matches_scalar_on_arbitrary_bytes(
        bytes in prop::collection::vec(any::<u8>(), 0..300),
        count in 0usize..200,
    ) {
        assert_bulk_matches::<u64>(&EncodedStream::new(bytes.clone(), count, ElementWidth::W64))?;
        assert_bulk_matches::<u32>(&EncodedStream::new(bytes, count, ElementWidth::W32))?;
    }

    #[test]
    fn skip_lands_where_decoding_lands(vals in values(ElementWidth::W64, 300), k in any::<prop::sample::Index>()) {
        let stream = EncodedStream::encode(&vals);
        let k = k.index(vals.len() + 1);
        let expected: usize = vals[..k].iter().map(|&v| encoded_size(v)).sum();
        prop_assert_eq!(skip_varints(k, stream.bytes()), Ok(expected));
    }

    #[test]
    fn decode_consumes_between_one_and_max_len(bytes in prop::collection::vec(any::<u8>(), 1..16)) {
        if let Ok((_, n)) = decode_one_scalar::<u32>(&bytes) {
            prop_assert!((1..=5).contains(&n));
        }
        if let Ok((_, n)) = decode_one_scalar::<u64>(&bytes) {
            prop_assert!((1..=10).contains(&n));
        }
    }
}

#[test]
fn large_random_u64_roundtrip() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let vals: Vec<u64> = (0..1_000_000)
        .map(|_| rng.random::<u64>() >> rng.random_range(0..64))
        .collect();
    let stream = EncodedStream::encode(&vals);
    assert_eq!(decode_to_vec_scalar::<u64>(&stream).unwrap(), vals);
    for b in backends() {
        let mut out = vec![0u64; vals.len()];
        bulk::decode_bulk(&stream, b, &mut out).unwrap();
        assert_eq!(out, vals, "{b:?}");
    }
}

#[test]
fn encoded_size_batch_matches_encoding() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let vals: Vec<u32> = (0..1000).map(|_| rng.random::<u32>() >> rng.random_range(0..32)).collect();
    let stream = EncodedStream::encode(&vals);
    assert_eq!(leb128_bmi::varint::encoded_size_batch(&vals), stream.len());
    assert_eq!(leb128_bmi::par::encoded_size_batch(&vals), stream.len());
}

#[test]
fn alternating_lengths_every_phase() {
    // 1,6,2,10-byte values shifted through all six block phases
    let pattern = [1u64, 1 << 35, 1 << 7, u64::MAX];
    for phase in 0..6 {
        let mut vals = vec![0u64; phase];
        for _ in 0..50 {
            vals.extend(pattern);
        }
        let stream = EncodedStream::encode(&vals);
        for b in backends() {
            let mut out = vec![0u64; vals.len()];
            bulk::decode_bulk(&stream, b, &mut out).unwrap();
            assert_eq!(out, vals, "phase {phase} {b:?}");
        }
    }
}
