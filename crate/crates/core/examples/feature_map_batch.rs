//! Quantizes a synthetic PGM image as one trellis sequence per row, in
//! parallel, and reports PSNR.

use tcq::eval::{parse_pgm, pgm_bytes};
use tcq::trellis::feature_map_rows;
use tcq::{quantize_batch, reconstruct, Codebook, TrellisSpec};

fn main() -> tcq::Result<()> {
    let (w, h) = (64, 48);
    let pixels: Vec<u8> = (0..h)
        .flat_map(|i| (0..w).map(move |j| ((i * 3 + j * 2) % 256) as u8))
        .collect();
    let img = parse_pgm(&pgm_bytes(w, h, &pixels))?;

    let rows = feature_map_rows(&img.data, h, 1, 1, w)?;
    let t = TrellisSpec::default4();
    for rate in 1..=4 {
        let cb = Codebook::symmetric(rate)?;
        let paths = quantize_batch(&rows, &cb, &t)?;
        let mut se = 0.0;
        for (row, qs) in rows.iter().zip(&paths) {
            let y = reconstruct(qs, &cb, &t)?;
            se += row.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
        let mse = se / img.data.len() as f64;
        println!("R={rate}  {} sequences  psnr {:.2} dB", paths.len(), 10.0 * (4.0 / mse).log10());
    }
    Ok(())
}
