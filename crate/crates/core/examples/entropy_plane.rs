//! Arithmetic-codes the index plane of a smooth 4×32×32 feature map with
//! each probability model.

use tcq::entropy::{EntropyContainer, ModelKind, TensorShape};
use tcq::{viterbi_quantize, Codebook, TrellisSpec};

fn main() -> tcq::Result<()> {
    let shape = TensorShape::new(4, 32, 32);
    let x: Vec<f64> = (0..shape.c)
        .flat_map(|c| {
            (0..shape.h).flat_map(move |i| {
                (0..shape.w).map(move |j| 0.8 * ((i as f64 * 0.1 + c as f64).sin() * (j as f64 * 0.07).cos()))
            })
        })
        .collect();
    let cb = Codebook::symmetric(3)?;
    let t = TrellisSpec::default4();
    let qs = viterbi_quantize(&x, &cb, &t)?;
    println!("{} symbols at {} bits/symbol = {} raw bytes", x.len(), cb.rate(), x.len() * 3 / 8);
    for model in [ModelKind::Static, ModelKind::Order0, ModelKind::Neighbor] {
        let c = EntropyContainer::encode(&qs, &cb, &t, shape, model)?;
        let back = EntropyContainer::from_bytes(&c.to_bytes())?.decode(&cb, &t)?;
        assert_eq!(back.codeword_ids, qs.codeword_ids);
        println!(
            "{:<8} {:>5} bytes  {:.3} bits/symbol",
            model.name(),
            c.payload.len(),
            8.0 * c.payload.len() as f64 / x.len() as f64
        );
    }
    Ok(())
}
