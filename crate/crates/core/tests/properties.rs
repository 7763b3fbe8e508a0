use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tcq::conformance::{brute_force_tcq, greedy_tcq, random_path};
use tcq::entropy::{
    ac_decode, ac_encode, empirical_entropy, encode_plane, ArithmeticEncoder, ModelKind, StaticModel,
    TensorShape,
};
use tcq::indexing::{decode, index_plane_method2};
use tcq::{encode_method1, encode_method2, quantize_batch, reconstruct, viterbi_quantize, Bitstream, Codebook, TrellisSpec};

fn seq(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.3f64..1.3, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn viterbi_is_exactly_optimal(x in seq(8), rate in 1u32..=2) {
        let cb = Codebook::symmetric(rate).unwrap();
        let t = TrellisSpec::default4();
        let v = viterbi_quantize(&x, &cb, &t).unwrap();
        let b = brute_force_tcq(&x, &cb, &t).unwrap();
        prop_assert_eq!(v.distortion, b.distortion, "viterbi {:?} brute {:?}", v, b);
        prop_assert!(v.distortion <= greedy_tcq(&x, &cb, &t).unwrap().distortion);
    }
}

proptest! {
    #[test]
    fn quantization_is_idempotent_and_consistent(x in seq(200), rate in 1u32..=6) {
        let cb = Codebook::symmetric(rate).unwrap();
        let t = TrellisSpec::default4();
        let qs = viterbi_quantize(&x, &cb, &t).unwrap();
        prop_assert!(qs.check_path(&cb, &t).is_ok());
        let y = reconstruct(&qs, &cb, &t).unwrap();
        let again = viterbi_quantize(&y, &cb, &t).unwrap();
        prop_assert_eq!(again.distortion, 0.0);
        prop_assert_eq!(reconstruct(&again, &cb, &t).unwrap(), y);
    }

    #[test]
    fn batch_matches_rows(rows in (1usize..40).prop_flat_map(|w| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, w), 1..6)), rate in 1u32..=4) {
        let cb = Codebook::symmetric(rate).unwrap();
        let t = TrellisSpec::default4();
        let batch = quantize_batch(&rows, &cb, &t).unwrap();
        for (r, b) in rows.iter().zip(&batch) {
            prop_assert_eq!(&viterbi_quantize(r, &cb, &t).unwrap(), b);
        }
    }

    #[test]
    fn bitstreams_round_trip(seed in any::<u64>(), rate in 1u32..=10, len in 1usize..300) {
        let cb = Codebook::symmetric(rate).unwrap();
        let t = TrellisSpec::default4();
        let qs = random_path(&mut ChaCha8Rng::seed_from_u64(seed), &cb, &t, len);
        let values = reconstruct(&qs, &cb, &t).unwrap();
        for bs in [encode_method1(&qs, &cb, &t).unwrap(), encode_method2(&qs, &cb, &t).unwrap()] {
            prop_assert_eq!(bs.to_bytes().len(), 12 + (len * rate as usize).div_ceil(8));
            let back = decode(&Bitstream::from_bytes(&bs.to_bytes()).unwrap(), &cb, &t).unwrap();
            prop_assert_eq!(&back.codeword_ids, &qs.codeword_ids);
            prop_assert_eq!(&back.branch_bits, &qs.branch_bits);
            prop_assert_eq!(back.initial_state, qs.initial_state);
            prop_assert_eq!(reconstruct(&back, &cb, &t).unwrap(), values.clone());
        }
    }

    #[test]
    fn arithmetic_coding_is_lossless(symbols in prop::collection::vec(0u32..16, 0..3000), model in 0u8..3) {
        let kind = ModelKind::from_byte(model).unwrap();
        let bytes = ac_encode(&symbols, kind.build(16).unwrap().as_mut()).unwrap();
        let back = ac_decode(&bytes, symbols.len(), kind.build(16).unwrap().as_mut()).unwrap();
        prop_assert_eq!(back, symbols);
    }

    #[test]
    fn encoder_output_is_causal(symbols in prop::collection::vec(0u32..8, 1..2000), cut in 0.0f64..1.0) {
        let k = (symbols.len() as f64 * cut) as usize;
        let mut model = ModelKind::Order0.build(8).unwrap();
        let mut enc = ArithmeticEncoder::new();
        let mut prefix = Vec::new();
        for (i, &s) in symbols.iter().enumerate() {
            if i == k {
                prefix = enc.completed().to_vec();
            }
            enc.encode(model.cumulative(), s as usize).unwrap();
            model.update(s as usize);
        }
        let full = enc.finish();
        prop_assert!(full.starts_with(&prefix));
    }
}

#[test]
fn method2_rank_follows_value_order() {
    let cb = Codebook::symmetric(3).unwrap();
    let t = TrellisSpec::default4();
    let ramp: Vec<f64> = (0..512).map(|i| -1.0 + i as f64 / 256.0).collect();
    let qs = viterbi_quantize(&ramp, &cb, &t).unwrap();
    let plane = index_plane_method2(&qs, &cb, &t).unwrap();
    for (a, b) in qs.codeword_ids.iter().zip(&plane.indices) {
        for (c, d) in qs.codeword_ids.iter().zip(&plane.indices) {
            if cb.subset_of(*a as usize).union() == cb.subset_of(*c as usize).union() {
                assert_eq!(a.cmp(c), b.cmp(d));
            }
        }
    }
}

#[test]
fn exact_count_static_model_meets_entropy_bound() {
    // total of exactly 2^16 lets the static table carry the true counts
    for freqs in [vec![1u32 << 14; 4], vec![50_000, 10_000, 5_000, 500, 36], vec![1, 65_535]] {
        let mut symbols: Vec<u32> = freqs
            .iter()
            .enumerate()
            .flat_map(|(s, &f)| std::iter::repeat_n(s as u32, f as usize))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        rand::seq::SliceRandom::shuffle(symbols.as_mut_slice(), &mut rng);
        let n = symbols.len() as f64;
        let k = freqs.len() as f64;
        let bytes = ac_encode(&symbols, &mut StaticModel::new(&freqs).unwrap()).unwrap();
        let bound = n * empirical_entropy(&symbols) + 32.0 + 8.0 * k.log2().ceil();
        assert!(8.0 * bytes.len() as f64 <= bound, "{} bits > {bound}", 8 * bytes.len());
        assert_eq!(ac_decode(&bytes, symbols.len(), &mut StaticModel::new(&freqs).unwrap()).unwrap(), symbols);
    }
}

#[test]
fn constant_plane_is_nearly_free() {
    let n = 4096;
    let rate = 4;
    let plane = vec![5u32; n];
    for kind in [ModelKind::Order0, ModelKind::Neighbor] {
        let bytes = encode_plane(&plane, TensorShape::new(4, 32, 32), kind.build(1 << rate).unwrap().as_mut()).unwrap();
        assert!((8 * bytes.len()) < n * rate / 20, "{kind:?}: {} bytes", bytes.len());
    }
}
