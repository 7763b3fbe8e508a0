//! Quantizes a short random sequence with the trellis and with a scalar
//! quantizer of the same rate, showing the chosen path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcq::{reconstruct, viterbi_quantize, Codebook, ScalarQuantizer, TrellisSpec};

fn main() -> tcq::Result<()> {
    let rate = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();

    let cb = Codebook::symmetric(rate)?;
    let t = TrellisSpec::default4();
    let qs = viterbi_quantize(&x, &cb, &t)?;
    let y = reconstruct(&qs, &cb, &t)?;
    let states = qs.check_path(&cb, &t)?;
    let sq = ScalarQuantizer::new(rate, -1.0, 1.0)?;

    println!("   x        state q  tcq      sq");
    let mut sq_err = 0.0;
    for (k, &z) in x.iter().enumerate() {
        let (_, v) = sq.quantize(z);
        sq_err += (z - v) * (z - v);
        println!("{z:+.4}   {}     {}  {:+.4}  {v:+.4}", states[k], qs.branch_bits[k], y[k]);
    }
    println!("squared error: tcq {:.5}, sq {sq_err:.5}", qs.distortion);
    Ok(())
}
