//! Open arcs on the unit circle and point counting over a sorted index.
//!
//! An [`Arc`] is an open real interval `(lo, hi)` read modulo one, with
//! `hi - lo <= 1`. Endpoints are not reduced into `[0, 1)`: the neighbourhood
//! of `x` is stored as `(x + r2, x + r1)` and `(x - r1, x - r2)` verbatim, so a
//! node never lands inside its own neighbourhood through rounding. Membership
//! and counting both shift the arc by `k in {-1, 0, 1}` and compare against
//! the raw position, which keeps the two operations bit-consistent.

use core::ops::Range;

use crate::model::{AnnulusParams, PositionSet};

const SHIFTS: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub lo: f64,
    pub hi: f64,
}

impl Arc {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Endpoints shifted so that `lo` lies in `[0, 1)`, for display.
    pub fn normalized(&self) -> (f64, f64) {
        let k = libm::floor(self.lo);
        (self.lo - k, self.hi - k)
    }

    #[inline]
    pub fn contains(&self, y: f64) -> bool {
        SHIFTS.iter().any(|&k| self.lo + k < y && y < self.hi + k)
    }

    /// Up to two index ranges of `sorted` (nondecreasing values in `[0, 1)`)
    /// whose values lie inside the arc.
    pub fn rank_ranges<'a>(&self, sorted: &'a [f64]) -> impl Iterator<Item = Range<usize>> + 'a {
        let (lo, hi) = (self.lo, self.hi);
        SHIFTS.iter().filter_map(move |&k| {
            let (a, b) = (lo + k, hi + k);
            if b <= 0.0 || a >= 1.0 {
                return None;
            }
            let start = sorted.partition_point(|&v| v <= a);
            let end = sorted.partition_point(|&v| v < b);
            (start < end).then_some(start..end)
        })
    }
}

/// Pairwise-disjoint arcs; at most [`ArcSet::CAPACITY`] of them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSet {
    arcs: [Arc; ArcSet::CAPACITY],
    len: usize,
}

impl Default for ArcSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl ArcSet {
    /// Two annulus neighbourhoods meet in at most four pieces; the slack
    /// covers pieces that touch at a shared endpoint and are not merged.
    pub const CAPACITY: usize = 8;

    pub const fn empty() -> Self {
        Self { arcs: [Arc::new(0.0, 0.0); Self::CAPACITY], len: 0 }
    }

    pub fn push(&mut self, arc: Arc) {
        assert!(self.len < Self::CAPACITY, "ArcSet capacity exceeded");
        self.arcs[self.len] = arc;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[Arc] {
        &self.arcs[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn total_length(&self) -> f64 {
        self.as_slice().iter().map(Arc::length).sum()
    }

    pub fn contains(&self, y: f64) -> bool {
        self.as_slice().iter().any(|a| a.contains(y))
    }

    /// Pointwise intersection, computed piece by piece modulo one.
    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let mut out = ArcSet::empty();
        for a in self.as_slice() {
            for b in other.as_slice() {
                for k in SHIFTS {
                    let lo = a.lo.max(b.lo + k);
                    let hi = a.hi.min(b.hi + k);
                    if lo < hi {
                        out.push(Arc::new(lo, hi));
                    }
                }
            }
        }
        out
    }
}

/// The open arcs `(x + r2, x + r1)` and `(x - r1, x - r2)`: a point `y != x`
/// lies inside exactly when `r2 < d(x, y) < r1`.
pub fn neighbor_arcs(x: f64, params: &AnnulusParams) -> ArcSet {
    let (r1, r2) = (params.r1(), params.r2());
    let mut set = ArcSet::empty();
    set.push(Arc::new(x + r2, x + r1));
    set.push(Arc::new(x - r1, x - r2));
    set
}

/// Number of positions inside the arcs, not counting nodes listed in `exclude`.
/// Two binary searches per arc piece.
pub fn count_in_arcs(ps: &PositionSet, arcs: &ArcSet, exclude: &[usize]) -> usize {
    let sorted = ps.sorted_positions();
    let inside: usize = arcs
        .as_slice()
        .iter()
        .flat_map(|a| a.rank_ranges(sorted))
        .map(|r| r.len())
        .sum();
    let x = ps.positions();
    let excluded = exclude.iter().filter(|&&i| arcs.contains(x[i])).count();
    inside - excluded
}
