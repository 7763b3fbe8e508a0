//! Four-state trellis, Viterbi minimum-distortion search, and reconstruction.

use rayon::prelude::*;

use crate::codebook::{Codebook, Subset, Union};
use crate::error::{Error, Result};

pub const NUM_STATES: usize = 4;

/// State-transition and branch-labelling tables of a 4-state trellis.
///
/// `next_state[s][q]` is the state reached from `s` on branch bit `q`, and
/// `subset[s][q]` the sub-quantizer that branch draws its codeword from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrellisSpec {
    pub next_state: [[u8; 2]; NUM_STATES],
    pub subset: [[Subset; 2]; NUM_STATES],
    pub union_of: [Union; NUM_STATES],
}

/// A single invariant the trellis tables fail to satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: usize,
    pub message: String,
}

impl TrellisSpec {
    /// Shift-register trellis `next(s, q) = (s >> 1) | (q << 1)`: the branch
    /// bit enters at the high end. States 0 and 1 draw from `A0`, states 2
    /// and 3 from `A1`, and the two branches entering any state carry the two
    /// subsets of a single union.
    pub fn default4() -> TrellisSpec {
        use Subset::*;
        let mut next_state = [[0u8; 2]; NUM_STATES];
        for (s, row) in next_state.iter_mut().enumerate() {
            for (q, slot) in row.iter_mut().enumerate() {
                *slot = ((s >> 1) | (q << 1)) as u8;
            }
        }
        TrellisSpec {
            next_state,
            subset: [[D0, D2], [D2, D0], [D1, D3], [D3, D1]],
            union_of: [Union::A0, Union::A0, Union::A1, Union::A1],
        }
    }

    #[inline]
    pub fn next(&self, state: usize, q: u8) -> usize {
        self.next_state[state][q as usize] as usize
    }

    #[inline]
    pub fn subset(&self, state: usize, q: u8) -> Subset {
        self.subset[state][q as usize]
    }

    pub fn union_of(&self, state: usize) -> Union {
        self.union_of[state]
    }

    /// Branch bit of `state` whose subset is `subset`, if any.
    pub fn branch_for(&self, state: usize, subset: Subset) -> Option<u8> {
        self.subset[state].iter().position(|&s| s == subset).map(|q| q as u8)
    }

    /// Checks every structural invariant and returns all violations.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let mut incoming = [0usize; NUM_STATES];
        for s in 0..NUM_STATES {
            let [a, b] = self.subset[s];
            if a == b {
                v.push(Violation {
                    state: s,
                    message: format!("branches of state {s} share subset {a}"),
                });
            }
            if a.union() != b.union() {
                v.push(Violation {
                    state: s,
                    message: format!("branches of state {s} span both unions"),
                });
            } else if a.union() != self.union_of[s] {
                v.push(Violation {
                    state: s,
                    message: format!(
                        "branches of state {s} draw from {} but state is labelled {}",
                        a.union(),
                        self.union_of[s]
                    ),
                });
            }
            for q in 0..2 {
                let n = self.next_state[s][q] as usize;
                if n >= NUM_STATES {
                    v.push(Violation {
                        state: s,
                        message: format!("next state {n} out of range"),
                    });
                } else {
                    incoming[n] += 1;
                }
            }
        }
        for (s, &count) in incoming.iter().enumerate() {
            if count != 2 {
                v.push(Violation {
                    state: s,
                    message: format!("incoming-branch count of state {s} is {count}, expected 2"),
                });
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    fn require_valid(&self) -> Result<()> {
        self.validate().map_err(|v| {
            Error::InvalidTrellis(
                v.into_iter()
                    .map(|x| x.message)
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        })
    }

    /// Incoming branches `(predecessor, q)` of every state, in ascending
    /// `(q, predecessor)` order so that survivor ties resolve toward `q = 0`
    /// and then toward the smaller predecessor.
    fn incoming(&self) -> [[(u8, u8); 2]; NUM_STATES] {
        let mut out = [[(0u8, 0u8); 2]; NUM_STATES];
        let mut fill = [0usize; NUM_STATES];
        for q in 0..2u8 {
            for s in 0..NUM_STATES {
                let n = self.next(s, q);
                out[n][fill[n]] = (s as u8, q);
                fill[n] += 1;
            }
        }
        out
    }
}

impl Default for TrellisSpec {
    fn default() -> Self {
        TrellisSpec::default4()
    }
}

/// Output of the trellis search: the chosen path and its codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSeq {
    pub initial_state: u8,
    pub codeword_ids: Vec<u32>,
    pub branch_bits: Vec<u8>,
    /// Sum of squared errors along the path.
    pub distortion: f64,
}

impl QuantizedSeq {
    pub fn len(&self) -> usize {
        self.codeword_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codeword_ids.is_empty()
    }

    /// Replays the branch bits and checks each codeword lies in the subset
    /// of the branch taken. Returns the visited state sequence.
    pub fn check_path(&self, cb: &Codebook, trellis: &TrellisSpec) -> Result<Vec<u8>> {
        if self.codeword_ids.len() != self.branch_bits.len() {
            return Err(Error::InconsistentPath {
                position: self.codeword_ids.len().min(self.branch_bits.len()),
                reason: format!(
                    "{} codewords but {} branch bits",
                    self.codeword_ids.len(),
                    self.branch_bits.len()
                ),
            });
        }
        if self.initial_state as usize >= NUM_STATES {
            return Err(Error::InconsistentPath {
                position: 0,
                reason: format!("initial state {} out of range", self.initial_state),
            });
        }
        let mut state = self.initial_state as usize;
        let mut states = Vec::with_capacity(self.len());
        for (t, (&id, &q)) in self.codeword_ids.iter().zip(&self.branch_bits).enumerate() {
            if q > 1 {
                return Err(Error::InconsistentPath {
                    position: t,
                    reason: format!("branch bit {q}"),
                });
            }
            let id = id as usize;
            if id >= cb.len() {
                return Err(Error::InconsistentPath {
                    position: t,
                    reason: format!("codeword {id} outside codebook of {}", cb.len()),
                });
            }
            let want = trellis.subset(state, q);
            if cb.subset_of(id) != want {
                return Err(Error::InconsistentPath {
                    position: t,
                    reason: format!(
                        "codeword {id} is in {} but state {state} branch {q} uses {want}",
                        cb.subset_of(id)
                    ),
                });
            }
            states.push(state as u8);
            state = trellis.next(state, q);
        }
        Ok(states)
    }
}

fn check_input(seq: &[f64]) -> Result<()> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if let Some(position) = seq.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { position });
    }
    Ok(())
}

/// Finds the minimum squared-error path through the trellis.
///
/// All four states start at zero cost; the winning start state is reported
/// in `initial_state`. Survivors cost one byte per state per symbol.
pub fn viterbi_quantize(seq: &[f64], cb: &Codebook, trellis: &TrellisSpec) -> Result<QuantizedSeq> {
    check_input(seq)?;
    trellis.require_valid()?;
    Ok(viterbi_unchecked(seq, cb, trellis))
}

fn viterbi_unchecked(seq: &[f64], cb: &Codebook, trellis: &TrellisSpec) -> QuantizedSeq {
    let n = seq.len();
    let incoming = trellis.incoming();
    // survivor byte: predecessor state in bits 1..2, branch bit in bit 0
    let mut survivors = vec![0u8; n * NUM_STATES];
    let mut cost = [0.0f64; NUM_STATES];
    let mut branch_cost = [[0.0f64; 2]; NUM_STATES];

    for (t, &z) in seq.iter().enumerate() {
        let mut subset_cost = [0.0f64; 4];
        for s in Subset::ALL {
            subset_cost[s.index()] = cb.nearest_in_subset(z, s).dist;
        }
        for (s, row) in branch_cost.iter_mut().enumerate() {
            row[0] = cost[s] + subset_cost[trellis.subset[s][0].index()];
            row[1] = cost[s] + subset_cost[trellis.subset[s][1].index()];
        }
        let mut next = [0.0f64; NUM_STATES];
        let surv = &mut survivors[t * NUM_STATES..(t + 1) * NUM_STATES];
        for s in 0..NUM_STATES {
            let [(p0, q0), (p1, q1)] = incoming[s];
            let c0 = branch_cost[p0 as usize][q0 as usize];
            let c1 = branch_cost[p1 as usize][q1 as usize];
            let (c, p, q) = if c1 < c0 { (c1, p1, q1) } else { (c0, p0, q0) };
            next[s] = c;
            surv[s] = (p << 1) | q;
        }
        cost = next;
    }

    let mut end = 0;
    for s in 1..NUM_STATES {
        if cost[s] < cost[end] {
            end = s;
        }
    }

    let mut branch_bits = vec![0u8; n];
    let mut state = end;
    for t in (0..n).rev() {
        let b = survivors[t * NUM_STATES + state];
        branch_bits[t] = b & 1;
        state = (b >> 1) as usize;
    }
    let initial_state = state as u8;

    let mut codeword_ids = Vec::with_capacity(n);
    let mut distortion = 0.0;
    let mut s = state;
    for (&z, &q) in seq.iter().zip(&branch_bits) {
        let hit = cb.nearest_in_subset(z, trellis.subset(s, q));
        codeword_ids.push(hit.index as u32);
        distortion += hit.dist;
        s = trellis.next(s, q);
    }

    QuantizedSeq {
        initial_state,
        codeword_ids,
        branch_bits,
        distortion,
    }
}

/// Quantizes each row independently; row `i` of the result is identical to
/// `viterbi_quantize(rows[i])`. Rows run in parallel.
pub fn quantize_batch<R>(rows: &[R], cb: &Codebook, trellis: &TrellisSpec) -> Result<Vec<QuantizedSeq>>
where
    R: AsRef<[f64]> + Sync,
{
    let Some(first) = rows.first() else {
        return Err(Error::EmptySequence);
    };
    let width = first.as_ref().len();
    for (row, r) in rows.iter().enumerate() {
        let r = r.as_ref();
        if r.len() != width {
            return Err(Error::RaggedBatch {
                row,
                expected: width,
                actual: r.len(),
            });
        }
        check_input(r)?;
    }
    trellis.require_valid()?;
    Ok(rows
        .par_iter()
        .map(|r| viterbi_unchecked(r.as_ref(), cb, trellis))
        .collect())
}

/// Flattens a `B×C×H×W` tensor (row-major) into `B·C` rows of `H·W`
/// symbols, one trellis sequence per feature map.
pub fn feature_map_rows(data: &[f64], b: usize, c: usize, h: usize, w: usize) -> Result<Vec<&[f64]>> {
    let plane = h * w;
    if plane == 0 || b * c == 0 || data.len() != b * c * plane {
        return Err(Error::InvalidShape {
            c: b * c,
            h,
            w,
            len: data.len(),
        });
    }
    Ok(data.chunks_exact(plane).collect())
}

/// Codeword values along the path.
pub fn reconstruct(qs: &QuantizedSeq, cb: &Codebook, trellis: &TrellisSpec) -> Result<Vec<f64>> {
    qs.check_path(cb, trellis)?;
    Ok(qs.codeword_ids.iter().map(|&j| cb.point(j as usize)).collect())
}
