//! Hard forward values with soft or straight-through backward passes, and a
//! finite-difference check of the soft derivative.

use tcq::conformance::{finite_difference, DEFAULT_FD_STEP};
use tcq::softquant::{hard_soft_pair, Backward};
use tcq::{Codebook, SoftQuantConfig, TrellisSpec};

fn main() -> tcq::Result<()> {
    let cb = Codebook::symmetric(2)?;
    let t = TrellisSpec::default4();
    let z = [-0.8, -0.31, 0.02, 0.4, 0.77];
    for sigma in [2.0, 20.0] {
        let soft = hard_soft_pair(&z, &cb, sigma, &t, Backward::Soft)?;
        let cfg = SoftQuantConfig::from_codebook(sigma, &cb)?;
        println!("sigma {sigma}");
        for (k, &x) in z.iter().enumerate() {
            let fd = finite_difference(|v| cfg.value(v), x, DEFAULT_FD_STEP)?;
            println!(
                "  z {x:+.2}  hard {:+.3}  soft {:+.4}  grad {:.5}  fd {fd:.5}",
                soft.hard[k], soft.backward_values[k], soft.backward_grads[k]
            );
        }
    }
    let ste = hard_soft_pair(&z, &cb, 1.0, &t, Backward::StraightThrough)?;
    println!("straight-through grads: {:?}", ste.backward_grads);
    Ok(())
}
