//! SNR gain of TCQ over scalar quantization on a uniform source.
//!
//! cargo run --release --example uniform_gain -- 4

use tcq::eval::{run_compare, CompareConfig, SourceSpec};

fn main() -> tcq::Result<()> {
    let rate = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let spec = SourceSpec::uniform(1 << 20, 4096, 7);
    let (tcq, sq) = run_compare(&spec, &CompareConfig::new(rate))?;
    println!("R={rate}  TCQ {:.3} dB  SQ {:.3} dB  gain {:.3} dB", tcq.snr_db, sq.snr_db, tcq.snr_db - sq.snr_db);
    println!(
        "header overhead {} bits = {:.5} bits/symbol",
        tcq.header_overhead_bits,
        tcq.header_overhead_per_symbol()
    );
    Ok(())
}
