//! The random annulus graph model: parameters, uniform placement on the
//! circle, the circular metric and the annulus edge rule.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Largest node count for which [`build_adjacency`] materialises a dense matrix.
pub const DEFAULT_ADJACENCY_CAP: usize = 2000;

/// The model triple `(n, r1, r2)`.
///
/// Construction enforces `n >= 1` and `0 <= r2 < r1 <= 0.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AnnulusParams {
    n: usize,
    r1: f64,
    r2: f64,
}

impl AnnulusParams {
    pub fn new(n: usize, r1: f64, r2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroNodes);
        }
        check_radii(r1, r2)?;
        Ok(Self { n, r1, r2 })
    }

    /// Parameterise by the radius ratio `lambda = r1 / r2`; an infinite ratio
    /// gives the random geometric graph (`r2 = 0`).
    pub fn with_ratio(n: usize, r1: f64, lambda: f64) -> Result<Self> {
        if lambda.is_nan() {
            return Err(Error::NonFinite("lambda"));
        }
        let r2 = if lambda == f64::INFINITY { 0.0 } else { r1 / lambda };
        Self::new(n, r1, r2)
    }

    /// Same radii, different node count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.r1, self.r2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn r2(&self) -> f64 {
        self.r2
    }

    /// `2 * r2 < r1`: triangles have positive probability and the clustering
    /// limit is non-degenerate.
    pub fn clt_regime(&self) -> bool {
        2.0 * self.r2 < self.r1
    }

    /// Probability that two independent uniform points are adjacent.
    pub fn edge_probability(&self) -> f64 {
        2.0 * (self.r1 - self.r2)
    }
}

fn check_radii(r1: f64, r2: f64) -> Result<()> {
    if !r1.is_finite() {
        return Err(Error::NonFinite("r1"));
    }
    if !r2.is_finite() {
        return Err(Error::NonFinite("r2"));
    }
    if !(0.0 <= r2 && r2 < r1 && r1 <= 0.5) {
        return Err(Error::InvalidRadii { r1, r2 });
    }
    Ok(())
}

/// Key of a reproducible random stream.
///
/// The master seed keys a ChaCha8 generator and the stream id selects one of
/// its 2^64 independent streams, so replicate `k` can use stream `k` without
/// any coordination between workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RngSeed {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSeed {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Node positions on `[0, 1)` together with a sorted index for arc queries.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionSet {
    positions: Vec<f64>,
    sorted_order: Vec<u32>,
    sorted: Vec<f64>,
    rank: Vec<u32>,
}

impl PositionSet {
    /// Wraps explicit positions, e.g. from a fixture file.
    pub fn from_positions(positions: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = positions
            .iter()
            .enumerate()
            .find(|(_, &p)| !(0.0..1.0).contains(&p))
        {
            return Err(Error::PositionOutOfRange { index, value });
        }
        assert!(positions.len() <= u32::MAX as usize, "too many positions");
        let mut sorted_order: Vec<u32> = (0..positions.len() as u32).collect();
        sorted_order.sort_unstable_by(|&a, &b| {
            positions[a as usize]
                .total_cmp(&positions[b as usize])
                .then(a.cmp(&b))
        });
        let sorted = sorted_order.iter().map(|&i| positions[i as usize]).collect();
        let mut rank = vec![0u32; positions.len()];
        for (r, &i) in sorted_order.iter().enumerate() {
            rank[i as usize] = r as u32;
        }
        Ok(Self { positions, sorted_order, sorted, rank })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Node indices in nondecreasing order of position (ties by index).
    pub fn sorted_order(&self) -> &[u32] {
        &self.sorted_order
    }

    /// Positions read in `sorted_order`.
    pub fn sorted_positions(&self) -> &[f64] {
        &self.sorted
    }

    /// Position of node `index` within `sorted_order`.
    pub fn rank_of(&self, index: usize) -> usize {
        self.rank[index] as usize
    }

    /// Rotates every position by `shift` around the circle.
    pub fn rotated(&self, shift: f64) -> Self {
        let positions = self.positions.iter().map(|&p| wrap_unit(p + shift)).collect();
        Self::from_positions(positions).expect("wrapped positions lie in [0, 1)")
    }
}

/// Reduces `x` into `[0, 1)`.
pub(crate) fn wrap_unit(x: f64) -> f64 {
    let y = x - libm::floor(x);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Draws `params.n()` independent uniform positions on `[0, 1)` from the
/// stream keyed by `seed`.
pub fn sample_positions(params: &AnnulusParams, seed: RngSeed) -> PositionSet {
    let mut rng = seed.rng();
    let positions = (0..params.n()).map(|_| rng.random::<f64>()).collect();
    PositionSet::from_positions(positions).expect("uniform draws lie in [0, 1)")
}

/// Distance on the circle of circumference one.
#[inline]
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = libm::fabs(x - y);
    let wrapped = 1.0 - d;
    if wrapped < d {
        wrapped
    } else {
        d
    }
}

/// `r2 < d(x, y) < r1`, both inequalities strict.
#[inline]
pub fn edge_indicator(x: f64, y: f64, params: &AnnulusParams) -> bool {
    in_annulus(circle_distance(x, y), params.r1, params.r2)
}

#[inline]
pub(crate) fn in_annulus(d: f64, r1: f64, r2: f64) -> bool {
    r2 < d && d < r1
}

/// Dense symmetric 0/1 adjacency matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    cells: Vec<u8>,
}

impl Adjacency {
    /// Graph on `n` nodes with the given undirected edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges_with_cap(n, edges, DEFAULT_ADJACENCY_CAP)
    }

    pub fn from_edges_with_cap(n: usize, edges: &[(usize, usize)], cap: usize) -> Result<Self> {
        if n > cap {
            return Err(Error::CapExceeded { n, cap });
        }
        let mut adj = Self { n, cells: vec![0; n * n] };
        for &(i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for n = {n}");
            if i != j {
                adj.cells[i * n + j] = 1;
                adj.cells[j * n + i] = 1;
            }
        }
        Ok(adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.cells[i * self.n..(i + 1) * self.n]
    }
}

/// Materialises the annulus adjacency matrix for `n <= DEFAULT_ADJACENCY_CAP`.
pub fn build_adjacency(ps: &PositionSet, params: &AnnulusParams) -> Result<Adjacency> {
    build_adjacency_with_cap(ps, params, DEFAULT_ADJACENCY_CAP)
}

pub fn build_adjacency_with_cap(ps: &PositionSet, params: &AnnulusParams, cap: usize) -> Result<Adjacency> {
    let n = ps.len();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let x = ps.positions();
    let mut cells = vec![0u8; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            if edge_indicator(x[i], x[j], params) {
                cells[i * n + j] = 1;
                cells[j * n + i] = 1;
            }
        }
    }
    Ok(Adjacency { n, cells })
}
