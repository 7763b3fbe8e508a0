//! Uniform TCQ codebook, its four-way subset partition, the two union
//! quantizers, and the midrise scalar quantizer used as a baseline.
//!
//! Codeword indices are 0-based throughout: index `j` holds the point
//! `v_min + step/2 + j * step`. The subset of index `j` is `D(j mod 4)`,
//! so `A0 = D0 ∪ D2` collects the even indices and `A1 = D1 ∪ D3` the odd
//! ones.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported rate in bits/symbol.
pub const MAX_RATE: u32 = 16;

/// One of the four sub-quantizers `D0..D3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subset {
    D0,
    D1,
    D2,
    D3,
}

impl Subset {
    pub const ALL: [Subset; 4] = [Subset::D0, Subset::D1, Subset::D2, Subset::D3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Subset {
        Subset::ALL[i % 4]
    }

    /// The union quantizer containing this subset.
    pub fn union(self) -> Union {
        if self.index().is_multiple_of(2) {
            Union::A0
        } else {
            Union::A1
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D{}", self.index())
    }
}

/// Union quantizers `A0 = D0 ∪ D2` and `A1 = D1 ∪ D3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Union {
    A0,
    A1,
}

impl Union {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Union {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.index())
    }
}

/// Result of a nearest-codeword search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    /// Global 0-based codeword index.
    pub index: usize,
    /// Squared error to the chosen codeword.
    pub dist: f64,
}

fn check_bounds(v_min: f64, v_max: f64) -> Result<()> {
    if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
        return Err(Error::InvalidBounds { v_min, v_max });
    }
    Ok(())
}

/// Nearest point among `points[offset], points[offset + stride], ...`.
///
/// The lattice is uniform, so the candidate pair is found by arithmetic and
/// resolved by comparing actual squared errors; ties go to the smaller index.
#[inline]
fn nearest_on_grid(points: &[f64], z: f64, offset: usize, stride: usize, spacing: f64) -> Nearest {
    let count = (points.len() - offset).div_ceil(stride);
    let base = points[offset];
    let t = ((z - base) / spacing).floor();
    let last = (count - 1) as f64;
    let lo = t.clamp(0.0, last) as usize;
    let hi = (lo + 1).min(count - 1);
    let j_lo = offset + lo * stride;
    let d_lo = (z - points[j_lo]).powi(2);
    if hi != lo {
        let j_hi = offset + hi * stride;
        let d_hi = (z - points[j_hi]).powi(2);
        if d_hi < d_lo {
            return Nearest {
                index: j_hi,
                dist: d_hi,
            };
        }
    }
    Nearest {
        index: j_lo,
        dist: d_lo,
    }
}

/// The `2^(R+1)`-point uniform reconstruction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    rate: u32,
    v_min: f64,
    v_max: f64,
    step: f64,
    points: Vec<f64>,
}

impl Codebook {
    /// Builds the codebook for `rate` bits/symbol over `[v_min, v_max]`.
    pub fn new(rate: u32, v_min: f64, v_max: f64) -> Result<Codebook> {
        if !(1..=MAX_RATE).contains(&rate) {
            return Err(Error::InvalidRate {
                rate,
                max: MAX_RATE,
            });
        }
        check_bounds(v_min, v_max)?;
        let levels = 1usize << (rate + 1);
        let step = (v_max - v_min) / levels as f64;
        let points = (0..levels)
            .map(|j| v_min + step / 2.0 + j as f64 * step)
            .collect();
        Ok(Codebook {
            rate,
            v_min,
            v_max,
            step,
            points,
        })
    }

    /// Codebook over the `[-1, 1]` range of a tanh-bounded signal.
    pub fn symmetric(rate: u32) -> Result<Codebook> {
        Codebook::new(rate, -1.0, 1.0)
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> f64 {
        self.points[index]
    }

    pub fn subset_of(&self, index: usize) -> Subset {
        Subset::from_index(index)
    }

    /// Number of points in each subset, `2^(R-1)`.
    pub fn subset_len(&self) -> usize {
        self.points.len() / 4
    }

    /// Number of points in each union, `2^R`.
    pub fn union_len(&self) -> usize {
        self.points.len() / 2
    }

    /// Global indices of the members of `subset`, ascending.
    pub fn subset_members(&self, subset: Subset) -> impl Iterator<Item = usize> {
        (subset.index()..self.points.len()).step_by(4)
    }

    /// Global indices of the members of `union`, ascending.
    pub fn union_members(&self, union: Union) -> impl Iterator<Item = usize> {
        (union.index()..self.points.len()).step_by(2)
    }

    /// 0-based rank of `index` within its own subset.
    pub fn rank_in_subset(&self, index: usize) -> usize {
        index / 4
    }

    /// 0-based rank of `index` within its own union.
    pub fn rank_in_union(&self, index: usize) -> usize {
        index / 2
    }

    pub fn index_from_subset_rank(&self, subset: Subset, rank: usize) -> Option<usize> {
        let j = subset.index() + 4 * rank;
        (j < self.points.len()).then_some(j)
    }

    pub fn index_from_union_rank(&self, union: Union, rank: usize) -> Option<usize> {
        let j = union.index() + 2 * rank;
        (j < self.points.len()).then_some(j)
    }

    /// Index of the grid point exactly equal to `value`, if any.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let n = nearest_on_grid(&self.points, value, 0, 1, self.step);
        (self.points[n.index] == value).then_some(n.index)
    }

    /// Closest member of `subset` to `z` in squared error.
    #[inline]
    pub fn nearest_in_subset(&self, z: f64, subset: Subset) -> Nearest {
        nearest_on_grid(&self.points, z, subset.index(), 4, 4.0 * self.step)
    }

    /// Closest member of `union` to `z` in squared error.
    #[inline]
    pub fn nearest_in_union(&self, z: f64, union: Union) -> Nearest {
        nearest_on_grid(&self.points, z, union.index(), 2, 2.0 * self.step)
    }

    /// Closest point of the full grid.
    pub fn nearest(&self, z: f64) -> Nearest {
        nearest_on_grid(&self.points, z, 0, 1, self.step)
    }
}

/// Midrise uniform scalar quantizer with `2^R` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuantizer {
    rate: u32,
    v_min: f64,
    v_max: f64,
    step: f64,
    levels: Vec<f64>,
}

impl ScalarQuantizer {
    pub fn new(rate: u32, v_min: f64, v_max: f64) -> Result<ScalarQuantizer> {
        if !(1..=MAX_RATE).contains(&rate) {
            return Err(Error::InvalidRate {
                rate,
                max: MAX_RATE,
            });
        }
        check_bounds(v_min, v_max)?;
        let count = 1usize << rate;
        let step = (v_max - v_min) / count as f64;
        let levels = (0..count)
            .map(|k| v_min + step / 2.0 + k as f64 * step)
            .collect();
        Ok(ScalarQuantizer {
            rate,
            v_min,
            v_max,
            step,
            levels,
        })
    }

    pub fn rate(&self) -> u32 {
        self.rate
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Returns the 0-based level index and its value.
    pub fn quantize(&self, z: f64) -> (usize, f64) {
        let n = nearest_on_grid(&self.levels, z, 0, 1, self.step);
        (n.index, self.levels[n.index])
    }
}
