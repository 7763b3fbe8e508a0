//! Reference oracles and randomized property drivers.
//!
//! Each check returns a [`CheckReport`]; failures carry a full
//! counterexample so a run can be reproduced from the report alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codebook::{Codebook, Subset};
use crate::entropy::{ac_decode, ac_encode, ModelKind, StaticModel};
use crate::error::{Error, Result};
use crate::indexing::{decode, encode_method1, encode_method2, Bitstream};
use crate::softquant::SoftQuantConfig;
use crate::trellis::{quantize_batch, reconstruct, viterbi_quantize, QuantizedSeq, TrellisSpec, NUM_STATES};

pub const MAX_ORACLE_LEN: usize = 12;
pub const MAX_ORACLE_RATE: u32 = 3;
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// Gradient-check relative errors use `max(|a|, |b|, GRAD_REL_FLOOR)` as
/// the denominator.
pub const GRAD_REL_FLOOR: f64 = 1e-3;
pub const GRAD_TOLERANCE: f64 = 1e-4;
/// Points this close to a codeword are skipped by the gradient check.
pub const GRAD_EXCLUSION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OracleConfig {
    pub max_sequence_len: usize,
    pub max_rate: u32,
    pub trials: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_sequence_len: 8,
            max_rate: 2,
            trials: 500,
            seed: 0x7c0_5eed,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sequence_len == 0 || self.max_sequence_len > MAX_ORACLE_LEN {
            return Err(Error::InvalidArgument(format!(
                "max_sequence_len must be in 1..={MAX_ORACLE_LEN}, got {}",
                self.max_sequence_len
            )));
        }
        if self.max_rate == 0 || self.max_rate > MAX_ORACLE_RATE {
            return Err(Error::InvalidRate {
                rate: self.max_rate,
                max: MAX_ORACLE_RATE,
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        Ok(())
    }
}

/// Exhaustive minimum-distortion search over every initial state and
/// branch sequence. Distortion is summed in sequence order.
pub fn brute_force_tcq(seq: &[f64], cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if seq.len() > MAX_ORACLE_LEN {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to {MAX_ORACLE_LEN} symbols, got {}",
            seq.len()
        )));
    }
    let n = seq.len();
    let mut best: Option<QuantizedSeq> = None;
    for s0 in 0..NUM_STATES {
        for bits in 0u32..(1 << n) {
            let mut state = s0;
            let mut dist = 0.0;
            let mut ids = Vec::with_capacity(n);
            let mut qs = Vec::with_capacity(n);
            for (k, &z) in seq.iter().enumerate() {
                let q = ((bits >> k) & 1) as u8;
                let near = cb.nearest_in_subset(z, t.subset(state, q));
                dist += near.dist;
                ids.push(near.index as u32);
                qs.push(q);
                state = t.next(state, q);
            }
            if best.as_ref().is_none_or(|b| dist < b.distortion) {
                best = Some(QuantizedSeq {
                    initial_state: s0 as u8,
                    codeword_ids: ids,
                    branch_bits: qs,
                    distortion: dist,
                });
            }
        }
    }
    Ok(best.unwrap())
}

/// Locally greedy path: the best first symbol over all states, then the
/// cheaper branch at every step.
pub fn greedy_tcq(seq: &[f64], cb: &Codebook, t: &TrellisSpec) -> Result<QuantizedSeq> {
    let Some(&first) = seq.first() else {
        return Err(Error::EmptySequence);
    };
    let step = |state: usize, z: f64| {
        (0..2u8)
            .map(|q| (q, cb.nearest_in_subset(z, t.subset(state, q))))
            .fold(None, |acc: Option<(u8, crate::codebook::Nearest)>, (q, n)| match acc {
                Some((_, b)) if b.dist <= n.dist => acc,
                _ => Some((q, n)),
            })
            .unwrap()
    };
    let s0 = (0..NUM_STATES)
        .min_by(|&a, &b| step(a, first).1.dist.total_cmp(&step(b, first).1.dist))
        .unwrap();
    let mut state = s0;
    let mut out = QuantizedSeq {
        initial_state: s0 as u8,
        codeword_ids: Vec::with_capacity(seq.len()),
        branch_bits: Vec::with_capacity(seq.len()),
        distortion: 0.0,
    };
    for &z in seq {
        let (q, near) = step(state, z);
        out.distortion += near.dist;
        out.codeword_ids.push(near.index as u32);
        out.branch_bits.push(q);
        state = t.next(state, q);
    }
    Ok(out)
}

/// Central difference `(f(z+h) - f(z-h)) / 2h`.
pub fn finite_difference(f: impl Fn(f64) -> f64, z: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be > 0, got {h}")));
    }
    Ok((f(z + h) - f(z - h)) / (2.0 * h))
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(GRAD_REL_FLOOR)
}

/// Random path consistent with `t`, of length `len`.
pub fn random_path(rng: &mut impl Rng, cb: &Codebook, t: &TrellisSpec, len: usize) -> QuantizedSeq {
    let s0 = rng.random_range(0..NUM_STATES);
    let mut state = s0;
    let mut qs = QuantizedSeq {
        initial_state: s0 as u8,
        codeword_ids: Vec::with_capacity(len),
        branch_bits: Vec::with_capacity(len),
        distortion: 0.0,
    };
    for _ in 0..len {
        let q = rng.random_range(0..2u8);
        let subset = t.subset(state, q);
        let rank = rng.random_range(0..cb.subset_len());
        qs.codeword_ids.push(cb.index_from_subset_rank(subset, rank).unwrap() as u32);
        qs.branch_bits.push(q);
        state = t.next(state, q);
    }
    qs
}

fn random_sequence(rng: &mut impl Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(lo..hi)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed error, for checks with a tolerance.
    pub max_error: Option<f64>,
    pub counterexample: Option<String>,
}

impl CheckReport {
    fn new(name: &'static str, trials: usize) -> CheckReport {
        CheckReport {
            name,
            passed: true,
            trials,
            failures: 0,
            max_error: None,
            counterexample: None,
        }
    }

    fn fail(&mut self, detail: impl FnOnce() -> String) {
        self.passed = false;
        self.failures += 1;
        if self.counterexample.is_none() {
            self.counterexample = Some(detail());
        }
    }
}

fn describe(qs: &QuantizedSeq) -> String {
    format!(
        "state {} ids {:?} bits {:?} distortion {:e}",
        qs.initial_state, qs.codeword_ids, qs.branch_bits, qs.distortion
    )
}

/// Viterbi distortion equals the brute-force minimum exactly, and never
/// exceeds the greedy path's.
pub fn check_viterbi_optimality(cfg: &OracleConfig) -> Result<CheckReport> {
    cfg.validate()?;
    let t = TrellisSpec::default4();
    let mut report = CheckReport::new("viterbi_matches_brute_force", cfg.trials);
    let outcomes: Vec<Option<String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = cfg.seed.wrapping_add(trial as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rate = 1 + (trial as u32 % cfg.max_rate);
            let cb = Codebook::symmetric(rate)?;
            let seq = random_sequence(&mut rng, cfg.max_sequence_len, -1.2, 1.2);
            let v = viterbi_quantize(&seq, &cb, &t)?;
            let b = brute_force_tcq(&seq, &cb, &t)?;
            let g = greedy_tcq(&seq, &cb, &t)?;
            Ok((v.distortion != b.distortion || v.distortion > g.distortion).then(|| {
                format!(
                    "seed {seed} R={rate} sequence {seq:?}\n  viterbi: {}\n  brute:   {}\n  greedy:  {}",
                    describe(&v),
                    describe(&b),
                    describe(&g)
                )
            }))
        })
        .collect::<Result<_>>()?;
    for o in outcomes.into_iter().flatten() {
        report.fail(|| o);
    }
    Ok(report)
}

/// Random consistent paths survive both bitstream methods bit-exactly and
/// reconstruct identical values.
pub fn check_indexing_round_trip(trials: usize, seed: u64) -> Result<CheckReport> {
    let t = TrellisSpec::default4();
    let mut report = CheckReport::new("indexing_round_trip", trials);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let rate = rng.random_range(1..=8);
        let len = rng.random_range(1..=64);
        let cb = Codebook::symmetric(rate)?;
        let qs = random_path(&mut rng, &cb, &t, len);
        let values = reconstruct(&qs, &cb, &t)?;
        for bs in [encode_method1(&qs, &cb, &t)?, encode_method2(&qs, &cb, &t)?] {
            let back = Bitstream::from_bytes(&bs.to_bytes()).and_then(|b| decode(&b, &cb, &t));
            let ok = match &back {
                Ok(d) => {
                    d.initial_state == qs.initial_state
                        && d.codeword_ids == qs.codeword_ids
                        && d.branch_bits == qs.branch_bits
                        && reconstruct(d, &cb, &t).is_ok_and(|v| v == values)
                }
                Err(_) => false,
            };
            if !ok {
                report.fail(|| {
                    format!(
                        "seed {seed} trial {trial} R={rate} method {:?}\n  input: {}\n  decoded: {back:?}",
                        bs.header.method,
                        describe(&qs)
                    )
                });
            }
        }
    }
    Ok(report)
}

/// Analytic soft-quantization derivative against central differences on
/// random `(z, σ, codebook)` triples.
pub fn check_soft_gradient(trials: usize, seed: u64) -> Result<CheckReport> {
    check_soft_gradient_with(trials, seed, None)
}

/// As [`check_soft_gradient`], optionally with a fixed `σ`.
pub fn check_soft_gradient_with(trials: usize, seed: u64, sigma: Option<f64>) -> Result<CheckReport> {
    let mut report = CheckReport::new("soft_quantize_gradient", trials);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_err = 0.0f64;
    let mut done = 0;
    while done < trials {
        let rate = rng.random_range(1..=3);
        let v_min = rng.random_range(-2.0..-0.5);
        let v_max = rng.random_range(0.5..2.0);
        let s = sigma.unwrap_or_else(|| (rng.random_range(0.5f64.ln()..50f64.ln())).exp());
        let z = rng.random_range(v_min - 0.5..v_max + 0.5);
        let cb = Codebook::new(rate, v_min, v_max)?;
        if cb.points().iter().any(|c| (z - c).abs() < GRAD_EXCLUSION) {
            continue;
        }
        done += 1;
        let cfg = SoftQuantConfig::from_codebook(s, &cb)?;
        let analytic = cfg.grad(z);
        let numeric = finite_difference(|x| cfg.value(x), z, DEFAULT_FD_STEP)?;
        let err = relative_error(analytic, numeric);
        max_err = max_err.max(err);
        if err.is_nan() || err >= GRAD_TOLERANCE {
            report.fail(|| {
                format!(
                    "seed {seed} R={rate} range [{v_min}, {v_max}] sigma {s} z {z}: analytic {analytic:e} numeric {numeric:e}"
                )
            });
        }
    }
    report.max_error = Some(max_err);
    Ok(report)
}

/// Lossless round trips under every model, plus the uniform K=4 size bound.
pub fn check_arithmetic_coder(trials: usize, seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::new("arithmetic_coder_round_trip", trials + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let k = rng.random_range(1..=64usize);
        let n = rng.random_range(0..2000usize);
        let skew = rng.random_range(1..=k);
        let symbols: Vec<u32> = (0..n).map(|_| rng.random_range(0..skew) as u32).collect();
        for kind in [ModelKind::Static, ModelKind::Order0, ModelKind::Neighbor] {
            let bytes = ac_encode(&symbols, kind.build(k)?.as_mut())?;
            let back = ac_decode(&bytes, n, kind.build(k)?.as_mut());
            if back.as_ref().ok() != Some(&symbols) {
                report.fail(|| format!("seed {seed} trial {trial} K={k} model {} symbols {symbols:?}", kind.name()));
            }
        }
    }
    let n = 100_000;
    let symbols: Vec<u32> = (0..n).map(|_| rng.random_range(0..4)).collect();
    let bytes = ac_encode(&symbols, &mut StaticModel::uniform(4)?)?;
    let bound = n * 2 / 8 + 4;
    if bytes.len() > bound {
        report.fail(|| format!("seed {seed}: uniform K=4 N={n} produced {} bytes, bound {bound}", bytes.len()));
    }
    Ok(report)
}

/// Batched quantization equals row-by-row quantization.
pub fn check_batch_equivalence(trials: usize, seed: u64) -> Result<CheckReport> {
    let t = TrellisSpec::default4();
    let mut report = CheckReport::new("batch_equals_rows", trials);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let rate = rng.random_range(1..=4);
        let cb = Codebook::symmetric(rate)?;
        let width = rng.random_range(1..=100);
        let rows: Vec<Vec<f64>> = (0..rng.random_range(1..=8))
            .map(|_| random_sequence(&mut rng, width, -1.1, 1.1))
            .collect();
        let batch = quantize_batch(&rows, &cb, &t)?;
        for (r, b) in rows.iter().zip(&batch) {
            if viterbi_quantize(r, &cb, &t)? != *b {
                report.fail(|| format!("seed {seed} trial {trial} R={rate} row {r:?}"));
            }
        }
    }
    Ok(report)
}

/// Every outgoing branch of the default trellis stays within its state's
/// union and the table passes validation.
pub fn check_trellis_structure() -> CheckReport {
    let t = TrellisSpec::default4();
    let mut report = CheckReport::new("default_trellis_structure", 1);
    if let Err(v) = t.validate() {
        report.fail(|| format!("{v:?}"));
    }
    for s in 0..NUM_STATES {
        for q in 0..2 {
            let sub: Subset = t.subset(s, q);
            if sub.union() != t.union_of(s) {
                report.fail(|| format!("state {s} branch {q} subset {sub} leaves union {:?}", t.union_of(s)));
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub config: OracleConfig,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs every oracle check.
pub fn run_suite(cfg: &OracleConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let checks = vec![
        check_trellis_structure(),
        check_viterbi_optimality(cfg)?,
        check_batch_equivalence(50, cfg.seed ^ 0xba7c)?,
        check_indexing_round_trip(10_000, cfg.seed ^ 0x1dec)?,
        check_soft_gradient(10_000, cfg.seed ^ 0x50f7)?,
        check_arithmetic_coder(100, cfg.seed ^ 0xac)?,
    ];
    Ok(SuiteReport {
        config: *cfg,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
