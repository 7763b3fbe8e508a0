//! Prints the codebook, its four subsets and the two union quantizers.
//!
//! cargo run --example codebook_partition -- 2

use tcq::{Codebook, Subset, Union};

fn main() -> tcq::Result<()> {
    let rate = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let cb = Codebook::symmetric(rate)?;
    println!("R={rate}: {} points, step {}", cb.len(), cb.step());
    for (j, c) in cb.points().iter().enumerate() {
        println!("  c{j:<3} {c:+.5}  {}", cb.subset_of(j));
    }
    for s in Subset::ALL {
        let pts: Vec<String> = cb.subset_members(s).map(|j| format!("{:+.3}", cb.point(j))).collect();
        println!("{s}: {}", pts.join(" "));
    }
    for u in [Union::A0, Union::A1] {
        let pts: Vec<String> = cb.union_members(u).map(|j| format!("{:+.3}", cb.point(j))).collect();
        println!("{u:?}: {}", pts.join(" "));
    }
    Ok(())
}
