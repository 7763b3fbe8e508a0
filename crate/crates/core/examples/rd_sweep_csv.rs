//! Rate-distortion sweep on a clipped Laplacian source, written as CSV to
//! stdout.

use tcq::entropy::ModelKind;
use tcq::eval::{run_rd_sweep, write_sweep_csv, CompareConfig, SourceKind, SourceSpec};

fn main() -> tcq::Result<()> {
    let spec = SourceSpec {
        kind: SourceKind::Laplacian { scale: 0.3 },
        samples: 1 << 18,
        seq_len: 4096,
        seed: 11,
    };
    let base = CompareConfig {
        entropy: Some(ModelKind::Order0),
        ..CompareConfig::new(1)
    };
    let rows = run_rd_sweep(&spec, &[1, 2, 3, 4, 5, 6], &base)?;
    write_sweep_csv(&rows, std::io::stdout().lock())
}
