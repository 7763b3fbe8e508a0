use tcq::entropy::{EntropyContainer, ModelKind, TensorShape, CONTAINER_PREFIX_LEN};
use tcq::indexing::{decode, Header, HEADER_LEN};
use tcq::{encode_method1, encode_method2, Bitstream, Codebook, Error, Method, QuantizedSeq, TrellisSpec};

// R=2 (8 codewords). From state 0: q=1 -> D2 takes id 2, state 2: q=0 -> D1
// takes id 5, state 1: q=1 -> D0 takes id 4.
fn hand_path() -> QuantizedSeq {
    QuantizedSeq {
        initial_state: 0,
        codeword_ids: vec![2, 5, 4],
        branch_bits: vec![1, 0, 1],
        distortion: 0.0,
    }
}

const HEADER_M1: [u8; 12] = [b'T', b'C', b'Q', b'1', 1, 2, 1, 0, 0, 0, 3, 0];

#[test]
fn method1_golden_bytes() {
    let cb = Codebook::symmetric(2).unwrap();
    let bytes = encode_method1(&hand_path(), &cb, &TrellisSpec::default4()).unwrap().to_bytes();
    // codes q*2 + subset rank: 2, 1, 3 -> 10 01 11 00
    let mut expect = HEADER_M1.to_vec();
    expect.push(0b1001_1100);
    assert_eq!(bytes, expect);
}

#[test]
fn method2_golden_bytes() {
    let cb = Codebook::symmetric(2).unwrap();
    let bytes = encode_method2(&hand_path(), &cb, &TrellisSpec::default4()).unwrap().to_bytes();
    // union ranks id/2: 1, 2, 2 -> 01 10 10 00
    let mut expect = HEADER_M1.to_vec();
    expect[6] = 2;
    expect.push(0b0110_1000);
    assert_eq!(bytes, expect);
    let back = decode(&Bitstream::from_bytes(&bytes).unwrap(), &cb, &TrellisSpec::default4()).unwrap();
    assert_eq!(back, hand_path());
}

#[test]
fn header_rejections() {
    let good = {
        let mut b = HEADER_M1.to_vec();
        b.push(0x9c);
        b
    };
    assert!(Bitstream::from_bytes(&good).is_ok());

    let mut b = good.clone();
    b[4] = 2;
    assert!(matches!(Bitstream::from_bytes(&b), Err(Error::UnsupportedVersion(2))));
    let mut b = good.clone();
    b[6] = 9;
    assert!(matches!(Bitstream::from_bytes(&b), Err(Error::UnknownMethod(9))));
    let mut b = good.clone();
    b[0] = b'X';
    assert!(matches!(Bitstream::from_bytes(&b), Err(Error::BadMagic { .. })));
    assert!(matches!(Bitstream::from_bytes(&good[..12]), Err(Error::Truncated { expected: 13, actual: 12 })));
    assert!(Bitstream::from_bytes(&good[..7]).is_err());
    let mut b = good.clone();
    b.push(0);
    assert!(Bitstream::from_bytes(&b).is_err());
    let mut b = good.clone();
    b[11] = 4;
    assert!(Header::parse(&b).is_err());
}

#[test]
fn container_layout() {
    let cb = Codebook::symmetric(2).unwrap();
    let t = TrellisSpec::default4();
    let c = EntropyContainer::encode(&hand_path(), &cb, &t, TensorShape::new(3, 1, 1), ModelKind::Order0).unwrap();
    let bytes = c.to_bytes();
    assert_eq!(CONTAINER_PREFIX_LEN, 25);
    assert_eq!(&bytes[..4], b"TCQ1");
    assert_eq!(bytes[6], Method::Entropy as u8);
    assert_eq!(&bytes[7..11], &3u32.to_be_bytes());
    assert_eq!(&bytes[HEADER_LEN..24], &[0, 0, 0, 3, 0, 0, 0, 1, 0, 0, 0, 1]);
    assert_eq!(bytes[24], 1);
    assert_eq!(EntropyContainer::from_bytes(&bytes).unwrap().decode(&cb, &t).unwrap(), hand_path());

    // bitstream parsers refuse each other's formats
    assert!(matches!(Bitstream::from_bytes(&bytes), Err(Error::Malformed(_))));
    let m1 = encode_method1(&hand_path(), &cb, &t).unwrap().to_bytes();
    assert!(matches!(EntropyContainer::from_bytes(&m1), Err(Error::MethodMismatch { .. })));
    let mut bad = bytes.clone();
    bad[24] = 7;
    assert!(EntropyContainer::from_bytes(&bad).is_err());
    let mut bad = bytes.clone();
    bad[15] = 4;
    assert!(matches!(EntropyContainer::from_bytes(&bad), Err(Error::InvalidShape { .. })));
}
