//! Estimators of `sigma^2 = E[h(X1,X2,X3) h(X1,X2,X4)]`.
//!
//! The expectation depends on the radii only, so it is evaluated once per
//! parameter set. Two independent routes are provided: plain Monte Carlo over
//! i.i.d. quadruples and a deterministic midpoint cubature.

use alloc::vec::Vec;

use rand::Rng;

use super::KernelParams;
use crate::arcs::{neighbor_arcs, Arc, ArcSet};
use crate::model::{AnnulusParams, RngSeed};
use crate::sum::NeumaierSum;
use crate::stats::kernel_h;
use crate::{Error, Result};

pub const MIN_MC_SAMPLES: u64 = 10_000;
pub const MIN_CUBATURE_GRID: u32 = 100;

/// Samples per Monte Carlo work unit. Each unit seeks to its own offset in
/// the key stream, so the split never changes the draws.
const MC_CHUNK: u64 = 1 << 16;
/// Four `f64` draws of two 32-bit words each.
const WORDS_PER_SAMPLE: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SigmaMethod {
    MonteCarlo,
    Cubature,
}

impl SigmaMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SigmaMethod::MonteCarlo => "monte_carlo",
            SigmaMethod::Cubature => "cubature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SigmaEstimate {
    pub value: f64,
    /// Monte Carlo standard error; zero for cubature.
    pub std_error: f64,
    pub method: SigmaMethod,
    pub samples_or_grid: u64,
}

/// Averages `h(X1,X2,X3) h(X1,X2,X4)` over `num_samples` i.i.d. uniform
/// quadruples drawn from the stream `seed`.
pub fn sigma2_monte_carlo(kp: &KernelParams, num_samples: u64, seed: RngSeed) -> Result<SigmaEstimate> {
    if num_samples < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples { got: num_samples, min: MIN_MC_SAMPLES });
    }
    let chunks = num_samples.div_ceil(MC_CHUNK);
    let partials = map_indices(chunks as usize, |chunk| {
        let start = chunk as u64 * MC_CHUNK;
        let len = MC_CHUNK.min(num_samples - start);
        mc_chunk(kp, seed, start, len)
    });

    let mut sum = NeumaierSum::new();
    let mut sum_sq = NeumaierSum::new();
    for (s, q) in &partials {
        sum.merge(s);
        sum_sq.merge(q);
    }
    let n = num_samples as f64;
    let mean = sum.value() / n;
    let var = ((sum_sq.value() / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(SigmaEstimate {
        value: mean,
        std_error: libm::sqrt(var / n),
        method: SigmaMethod::MonteCarlo,
        samples_or_grid: num_samples,
    })
}

fn mc_chunk(kp: &KernelParams, seed: RngSeed, start: u64, len: u64) -> (NeumaierSum, NeumaierSum) {
    let mut rng = seed.rng();
    rng.set_word_pos(start as u128 * WORDS_PER_SAMPLE as u128);
    let mut sum = NeumaierSum::new();
    let mut sum_sq = NeumaierSum::new();
    for _ in 0..len {
        let x1: f64 = rng.random();
        let x2: f64 = rng.random();
        let x3: f64 = rng.random();
        let x4: f64 = rng.random();
        let v = kernel_h(x1, x2, x3, kp) * kernel_h(x1, x2, x4, kp);
        if v != 0.0 {
            sum.add(v);
            sum_sq.add(v * v);
        }
    }
    (sum, sum_sq)
}

/// Deterministic cubature with `X1` pinned at 0 (exact by rotation invariance).
///
/// For `X2 = u` the integral over `X3` is done exactly:
/// `h2(u) = A(u) (L(u) - 2 p c) - c L(u)`, with `A(u)` the edge indicator,
/// `p` the edge probability and `L(u)` the length of the common
/// neighbourhood of 0 and `u`. Since `h(X1,X2,X4)` has the same conditional
/// mean, `sigma^2 = E[h2(X2)^2]`, a one-dimensional integral. The circle is cut
/// into `grid` cells, each cell is split where `A` jumps, and every piece is
/// integrated by the midpoint rule. `L` is continuous and piecewise linear,
/// so the error is `O(grid^-2)` wherever the radii fall relative to the cells.
pub fn sigma2_cubature(kp: &KernelParams, grid: u32) -> Result<SigmaEstimate> {
    if grid < MIN_CUBATURE_GRID {
        return Err(Error::GridTooCoarse { got: grid, min: MIN_CUBATURE_GRID });
    }
    let rule = CellRule::new(kp, 0.0, grid);
    let two_pc = 2.0 * kp.edge_probability() * kp.c;
    let terms = map_indices(grid as usize, |i| {
        let mut cell = NeumaierSum::new();
        rule.for_each_piece(i as u32, |len, l, adjacent| {
            let h2 = if adjacent { l - two_pc - kp.c * l } else { -kp.c * l };
            cell.add(len * h2 * h2);
        });
        cell
    });
    let mut total = NeumaierSum::new();
    for t in &terms {
        total.merge(t);
    }
    Ok(SigmaEstimate {
        value: total.value(),
        std_error: 0.0,
        method: SigmaMethod::Cubature,
        samples_or_grid: grid as u64,
    })
}

/// Estimate of `E[h(x1, X2, X3)]` with the same cell rule, anchored at `x1`.
///
/// The kernel is degenerate, so this is zero for every `x1` up to the rule's
/// error.
pub fn mean_h_conditional(x1: f64, kp: &KernelParams, grid: u32) -> f64 {
    assert!(grid > 0, "grid must be positive");
    let rule = CellRule::new(kp, x1, grid);
    let two_pc = 2.0 * kp.edge_probability() * kp.c;
    let terms = map_indices(grid as usize, |i| {
        let mut cell = NeumaierSum::new();
        rule.for_each_piece(i as u32, |len, l, adjacent| {
            let a = if adjacent { 1.0 } else { 0.0 };
            cell.add(len * (a * (l - two_pc) - kp.c * l));
        });
        cell
    });
    let mut total = NeumaierSum::new();
    for t in &terms {
        total.merge(t);
    }
    total.value()
}

/// Cells `[i / grid, (i + 1) / grid)` around an anchor point.
struct CellRule {
    params: AnnulusParams,
    anchor_x: f64,
    anchor: ArcSet,
    grid: u32,
}

impl CellRule {
    fn new(kp: &KernelParams, x: f64, grid: u32) -> Self {
        let params = AnnulusParams::new(1, kp.r1, kp.r2).expect("radii validated by KernelParams");
        Self { anchor: neighbor_arcs(x, &params), anchor_x: x, params, grid }
    }

    /// Splits cell `i` into pieces on which adjacency to the anchor is
    /// constant and calls `visit(length, L(midpoint), adjacent)` for each.
    fn for_each_piece(&self, i: u32, mut visit: impl FnMut(f64, f64, bool)) {
        let g = self.grid as f64;
        let (lo, hi) = (i as f64 / g, (i + 1) as f64 / g);
        let mut cell = ArcSet::empty();
        cell.push(Arc::new(lo, hi));
        let inside = cell.intersect(&self.anchor);
        let mut pieces = [(0.0, 0.0); ArcSet::CAPACITY];
        for (slot, arc) in pieces.iter_mut().zip(inside.as_slice()) {
            *slot = (arc.lo, arc.hi);
        }
        let pieces = &mut pieces[..inside.len()];
        pieces.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut emit = |a: f64, b: f64, adjacent: bool| {
            if b > a {
                let mid = 0.5 * (a + b);
                visit(b - a, self.common_length(mid), adjacent);
            }
        };
        let mut cursor = lo;
        for &(a, b) in pieces.iter() {
            emit(cursor, a, false);
            emit(a, b, true);
            cursor = b;
        }
        emit(cursor, hi, false);
    }

    fn common_length(&self, u: f64) -> f64 {
        debug_assert!(self.anchor_x.is_finite());
        self.anchor.intersect(&neighbor_arcs(u, &self.params)).total_length()
    }
}

#[cfg(feature = "parallel")]
fn map_indices<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}
