//! Differentiable soft quantization for the backward pass.
//!
//! `Q(z) = Σ_j w_j c_j` with `w_j ∝ exp(-σ |z - c_j|)`. The derivative is
//! closed form, `dQ/dz = σ Σ_j w_j c_j (m̄ - m_j)` where `m_j = sign(z - c_j)`
//! and `m̄ = Σ_l w_l m_l`, so any training framework can bind it without an
//! autodiff dependency. At a codeword the kink uses `sign(0) = 0`.

use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::trellis::{reconstruct, viterbi_quantize, TrellisSpec};

#[derive(Debug, Clone, Copy)]
pub struct SoftQuantConfig<'a> {
    sigma: f64,
    points: &'a [f64],
}

impl<'a> SoftQuantConfig<'a> {
    pub fn new(sigma: f64, points: &'a [f64]) -> Result<SoftQuantConfig<'a>> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("sigma must be finite and > 0, got {sigma}")));
        }
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("soft quantizer needs finite codewords".into()));
        }
        Ok(SoftQuantConfig { sigma, points })
    }

    pub fn from_codebook(sigma: f64, cb: &'a Codebook) -> Result<SoftQuantConfig<'a>> {
        SoftQuantConfig::new(sigma, cb.points())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn points(&self) -> &[f64] {
        self.points
    }

    /// Softmax weights over the codewords, stabilized by subtracting the
    /// largest logit.
    pub fn weights(&self, z: f64) -> Vec<f64> {
        let min_dist = self
            .points
            .iter()
            .map(|c| (z - c).abs())
            .fold(f64::INFINITY, f64::min);
        let mut w: Vec<f64> = self
            .points
            .iter()
            .map(|c| (-self.sigma * ((z - c).abs() - min_dist)).exp())
            .collect();
        let total: f64 = w.iter().sum();
        for x in &mut w {
            *x /= total;
        }
        w
    }

    pub fn value(&self, z: f64) -> f64 {
        self.weights(z)
            .iter()
            .zip(self.points)
            .map(|(w, c)| w * c)
            .sum()
    }

    pub fn grad(&self, z: f64) -> f64 {
        let w = self.weights(z);
        let sign = |c: f64| {
            let d = z - c;
            if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            }
        };
        let m_bar: f64 = w.iter().zip(self.points).map(|(w, &c)| w * sign(c)).sum();
        self.sigma
            * w.iter()
                .zip(self.points)
                .map(|(w, &c)| w * c * (m_bar - sign(c)))
                .sum::<f64>()
    }
}

pub fn soft_quantize(z: f64, cfg: &SoftQuantConfig<'_>) -> f64 {
    cfg.value(z)
}

pub fn soft_quantize_grad(z: f64, cfg: &SoftQuantConfig<'_>) -> f64 {
    cfg.grad(z)
}

/// Backward-pass surrogate for the hard trellis quantizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backward {
    /// Soft quantization values and their analytic derivative.
    Soft,
    /// Derivative fixed at 1.
    StraightThrough,
}

/// Hard forward values together with what the backward pass needs.
#[derive(Debug, Clone, PartialEq)]
pub struct HardSoftPair {
    pub hard: Vec<f64>,
    pub backward_values: Vec<f64>,
    pub backward_grads: Vec<f64>,
}

/// Hard-forward / soft-backward evaluation of one sequence.
///
/// `hard` is the trellis reconstruction. With [`Backward::StraightThrough`]
/// the backward values equal `hard` and every gradient is 1.
pub fn hard_soft_pair(
    z: &[f64],
    cb: &Codebook,
    sigma: f64,
    trellis: &TrellisSpec,
    backward: Backward,
) -> Result<HardSoftPair> {
    let cfg = SoftQuantConfig::from_codebook(sigma, cb)?;
    let qs = viterbi_quantize(z, cb, trellis)?;
    let hard = reconstruct(&qs, cb, trellis)?;
    let (backward_values, backward_grads) = match backward {
        Backward::Soft => (
            z.iter().map(|&x| cfg.value(x)).collect(),
            z.iter().map(|&x| cfg.grad(x)).collect(),
        ),
        Backward::StraightThrough => (hard.clone(), vec![1.0; z.len()]),
    };
    Ok(HardSoftPair {
        hard,
        backward_values,
        backward_grads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: [f64; 2] = [-0.5, 0.5];

    #[test]
    fn symmetric_pair_at_zero() {
        for sigma in [0.1, 1.0, 20.0, 1e4] {
            let cfg = SoftQuantConfig::new(sigma, &TWO).unwrap();
            assert_eq!(cfg.value(0.0), 0.0);
        }
    }

    #[test]
    fn two_point_closed_form() {
        let cfg = SoftQuantConfig::new(20.0, &TWO).unwrap();
        let e = (-20.0f64).exp();
        let expect = 0.5 * (1.0 - e) / (1.0 + e);
        assert!((cfg.value(0.5) - expect).abs() < 1e-15);
        assert!((cfg.value(0.5) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn hard_limit() {
        let cb = Codebook::symmetric(2).unwrap();
        let cfg = SoftQuantConfig::from_codebook(1e4, &cb).unwrap();
        for z in [-0.9, -0.31, 0.0 + 0.01, 0.2, 0.7] {
            let hard = cb.point(cb.nearest(z).index);
            assert!((cfg.value(z) - hard).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn gradient_hand_expansion() {
        let cfg = SoftQuantConfig::new(1.0, &TWO).unwrap();
        assert!((cfg.grad(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn saturated_gradient_vanishes() {
        let cb = Codebook::symmetric(3).unwrap();
        let cfg = SoftQuantConfig::from_codebook(50.0, &cb).unwrap();
        assert!(cfg.grad(5.0).abs() < 1e-12);
        assert!(cfg.grad(-5.0).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_one_even_for_huge_sigma() {
        let cb = Codebook::symmetric(4).unwrap();
        let cfg = SoftQuantConfig::from_codebook(1e6, &cb).unwrap();
        for z in [-3.0, -0.4, 0.0, 0.123, 9.0] {
            let s: f64 = cfg.weights(z).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(cfg.value(z).is_finite());
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        assert!(SoftQuantConfig::new(0.0, &TWO).is_err());
        assert!(SoftQuantConfig::new(-1.0, &TWO).is_err());
        assert!(SoftQuantConfig::new(f64::NAN, &TWO).is_err());
        assert!(SoftQuantConfig::new(1.0, &[]).is_err());
    }

    #[test]
    fn straight_through_grads_are_one() {
        let cb = Codebook::symmetric(2).unwrap();
        let t = TrellisSpec::default4();
        let z = [0.1, -0.4, 0.8, 0.33];
        let p = hard_soft_pair(&z, &cb, 5.0, &t, Backward::StraightThrough).unwrap();
        assert_eq!(p.backward_grads, vec![1.0; 4]);
        let qs = viterbi_quantize(&z, &cb, &t).unwrap();
        assert_eq!(p.hard, reconstruct(&qs, &cb, &t).unwrap());
    }

    #[test]
    fn soft_backward_converges_on_codewords() {
        let cb = Codebook::symmetric(2).unwrap();
        let t = TrellisSpec::default4();
        // codewords along a feasible path are reproduced exactly by the trellis
        let raw = [0.9, -0.2, 0.4, 0.05, -0.7, 0.3];
        let z = reconstruct(&viterbi_quantize(&raw, &cb, &t).unwrap(), &cb, &t).unwrap();
        let p = hard_soft_pair(&z, &cb, 1e4, &t, Backward::Soft).unwrap();
        assert_eq!(p.hard, z);
        for (h, v) in p.hard.iter().zip(&p.backward_values) {
            assert!((h - v).abs() < 1e-9);
        }
    }
}
