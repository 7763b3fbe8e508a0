//! Packs one path with both indexing methods and decodes it back.

use tcq::indexing::{decode, index_plane_method1, index_plane_method2};
use tcq::{encode_method1, encode_method2, reconstruct, viterbi_quantize, Bitstream, Codebook, TrellisSpec};

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> tcq::Result<()> {
    let cb = Codebook::symmetric(3)?;
    let t = TrellisSpec::default4();
    let x: Vec<f64> = (0..12).map(|i| -0.9 + 0.15 * i as f64).collect();
    let qs = viterbi_quantize(&x, &cb, &t)?;

    println!("method I codes:  {:?}", index_plane_method1(&qs, &cb, &t)?.indices);
    println!("method II codes: {:?}", index_plane_method2(&qs, &cb, &t)?.indices);

    for bs in [encode_method1(&qs, &cb, &t)?, encode_method2(&qs, &cb, &t)?] {
        let bytes = bs.to_bytes();
        println!("{:?}: {}", bs.header.method, hex(&bytes));
        let back = decode(&Bitstream::from_bytes(&bytes)?, &cb, &t)?;
        assert_eq!(reconstruct(&back, &cb, &t)?, reconstruct(&qs, &cb, &t)?);
    }
    println!("both decode to the same values");
    Ok(())
}
