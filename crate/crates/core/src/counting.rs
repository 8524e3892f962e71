//! Exact ordered triangle and ordered 2-path counts.
//!
//! `ordered_triangles` is `sum_{i != j != k} A_ij A_jk A_ki` and
//! `ordered_paths` is `sum_{i != j != k} A_ij A_jk`, the numerator and
//! denominator of the global clustering coefficient.

use alloc::vec::Vec;
use core::ops::Range;

use crate::arcs::{count_in_arcs, neighbor_arcs};
use crate::model::{Adjacency, AnnulusParams, PositionSet};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GraphCounts {
    /// Six times the number of triangles.
    pub ordered_triangles: u64,
    /// `sum_j deg_j (deg_j - 1)`.
    pub ordered_paths: u64,
    pub degrees: Vec<u32>,
}

impl GraphCounts {
    fn from_parts(degrees: Vec<u32>, edge_common_neighbours: u64) -> Self {
        // Summing common neighbours over unordered edges sees every triangle
        // three times; each triangle has six orderings.
        Self { ordered_triangles: 2 * edge_common_neighbours, ordered_paths: paths_from_degrees(&degrees), degrees }
    }

    pub fn triangles(&self) -> u64 {
        self.ordered_triangles / 6
    }

    pub fn edges(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum::<u64>() / 2
    }

    pub fn max_degree(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }
}

fn paths_from_degrees(degrees: &[u32]) -> u64 {
    degrees.iter().map(|&d| d as u64 * (d as u64).saturating_sub(1)).sum()
}

/// A node's neighbourhood as disjoint ranges of ranks in the sorted order.
/// The first `forward` spans come from the arc `(x + r2, x + r1)`.
#[derive(Debug, Clone, Copy, Default)]
struct Spans {
    spans: [(u32, u32); 4],
    len: u8,
    forward: u8,
}

impl Spans {
    fn new(x: f64, sorted: &[f64], params: &AnnulusParams) -> Self {
        let arcs = neighbor_arcs(x, params);
        let mut out = Spans::default();
        for (k, arc) in arcs.as_slice().iter().enumerate() {
            for r in arc.rank_ranges(sorted) {
                out.spans[out.len as usize] = (r.start as u32, r.end as u32);
                out.len += 1;
            }
            if k == 0 {
                out.forward = out.len;
            }
        }
        out
    }

    #[inline]
    fn all(&self) -> &[(u32, u32)] {
        &self.spans[..self.len as usize]
    }

    fn forward(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.spans[..self.forward as usize].iter().map(|&(a, b)| a as usize..b as usize)
    }

    fn size(&self) -> u32 {
        self.all().iter().map(|&(a, b)| b - a).sum()
    }

    #[inline]
    fn contains(&self, rank: u32) -> bool {
        self.all().iter().any(|&(a, b)| a <= rank && rank < b)
    }

    #[inline]
    fn overlap(&self, other: &Spans) -> u32 {
        let mut total = 0;
        for &(a0, a1) in self.all() {
            for &(b0, b1) in other.all() {
                let lo = a0.max(b0);
                let hi = a1.min(b1);
                total += hi.saturating_sub(lo);
            }
        }
        total
    }
}

/// Exact counts in `O(n log n + m)`.
///
/// Every node's two neighbour arcs are turned into at most four rank ranges
/// once. The common neighbourhood of an edge is then the overlap of two range
/// lists, which counts exactly the points inside the intersection of the
/// two arc sets. Edges are enumerated through forward arcs only, so each
/// unordered edge is visited once.
pub fn count_graph(ps: &PositionSet, params: &AnnulusParams) -> GraphCounts {
    let sorted = ps.sorted_positions();
    let n = sorted.len();

    let spans: Vec<Spans> = map_ranks(n, |r| Spans::new(sorted[r], sorted, params));

    let common = sum_ranks(n, |a| {
        let sa = &spans[a];
        let mut total = 0u64;
        for range in sa.forward() {
            for b in range {
                let sb = &spans[b];
                let mut shared = sa.overlap(sb);
                // A node is never inside its own open arcs, but guard anyway.
                for r in [a as u32, b as u32] {
                    if sa.contains(r) && sb.contains(r) {
                        shared -= 1;
                    }
                }
                total += shared as u64;
            }
        }
        total
    });

    let mut degrees = alloc::vec![0u32; n];
    for (rank, &node) in ps.sorted_order().iter().enumerate() {
        degrees[node as usize] = spans[rank].size();
    }
    GraphCounts::from_parts(degrees, common)
}

/// The same counts through explicit arc-set intersection and binary-search
/// queries per edge, `O((n + m) log n)`. Kept as an independent route for
/// cross-checking [`count_graph`].
pub fn count_graph_by_arc_queries(ps: &PositionSet, params: &AnnulusParams) -> GraphCounts {
    let x = ps.positions();
    let n = x.len();
    let order = ps.sorted_order();
    let sorted = ps.sorted_positions();

    let degrees: Vec<u32> = (0..n)
        .map(|i| count_in_arcs(ps, &neighbor_arcs(x[i], params), &[i]) as u32)
        .collect();

    let mut common = 0u64;
    for i in 0..n {
        let own = neighbor_arcs(x[i], params);
        let forward = own.as_slice()[0];
        for range in forward.rank_ranges(sorted) {
            for &j in &order[range] {
                let j = j as usize;
                if j == i {
                    continue;
                }
                let shared = own.intersect(&neighbor_arcs(x[j], params));
                common += count_in_arcs(ps, &shared, &[i, j]) as u64;
            }
        }
    }
    GraphCounts::from_parts(degrees, common)
}

/// Literal triple sum over ordered triples of distinct indices, `O(n^3)`.
pub fn brute_force_counts(adj: &Adjacency) -> GraphCounts {
    let n = adj.n();
    let mut ordered_triangles = 0u64;
    let mut ordered_paths = 0u64;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let aij = adj.get(i, j) as u64;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let path = aij * adj.get(j, k) as u64;
                ordered_paths += path;
                ordered_triangles += path * adj.get(k, i) as u64;
            }
        }
    }
    let degrees = (0..n).map(|i| adj.row(i).iter().map(|&a| a as u32).sum()).collect();
    GraphCounts { ordered_triangles, ordered_paths, degrees }
}

/// Counts for an arbitrary simple graph given as an edge list.
///
/// Duplicate edges, in either orientation, are counted once. Common
/// neighbours are found by merging sorted adjacency lists, `O(sum_edges deg)`.
pub fn count_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<GraphCounts> {
    let mut adj: Vec<Vec<u32>> = alloc::vec![Vec::new(); n];
    for &(i, j) in edges {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidEdge { i, j, n });
        }
        adj[i].push(j as u32);
        adj[j].push(i as u32);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut common = 0u64;
    for (i, list) in adj.iter().enumerate() {
        for &j in list.iter().filter(|&&j| j as usize > i) {
            common += sorted_intersection(list, &adj[j as usize]);
        }
    }
    let degrees = adj.iter().map(|l| l.len() as u32).collect();
    Ok(GraphCounts::from_parts(degrees, common))
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> u64 {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            core::cmp::Ordering::Less => x += 1,
            core::cmp::Ordering::Greater => y += 1,
            core::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Undirected edges `(i, j)` with `i < j` in original node indices, sorted.
pub fn edge_list(ps: &PositionSet, params: &AnnulusParams) -> Vec<(usize, usize)> {
    let sorted = ps.sorted_positions();
    let order = ps.sorted_order();
    let mut edges = Vec::new();
    for (a, &x) in sorted.iter().enumerate() {
        let spans = Spans::new(x, sorted, params);
        for range in spans.forward() {
            for b in range {
                let (i, j) = (order[a] as usize, order[b] as usize);
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    edges
}

#[cfg(feature = "parallel")]
fn map_ranks<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_ranks<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn sum_ranks<F: Fn(usize) -> u64 + Sync + Send>(n: usize, f: F) -> u64 {
    use rayon::prelude::*;
    (0..n).into_par_iter().with_min_len(256).map(f).sum()
}

#[cfg(not(feature = "parallel"))]
fn sum_ranks<F: Fn(usize) -> u64>(n: usize, f: F) -> u64 {
    (0..n).map(f).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_adjacency, sample_positions, RngSeed};
    use alloc::vec;
    use proptest::prelude::*;

    fn fixture(positions: Vec<f64>, r1: f64, r2: f64) -> (PositionSet, AnnulusParams) {
        let p = AnnulusParams::new(positions.len(), r1, r2).unwrap();
        (PositionSet::from_positions(positions).unwrap(), p)
    }

    #[test]
    fn single_triangle() {
        let (ps, p) = fixture(vec![0.0, 0.15, 0.29], 0.3, 0.1);
        let c = count_graph(&ps, &p);
        assert_eq!((c.ordered_triangles, c.ordered_paths), (6, 6));
        assert_eq!(c.degrees, vec![2, 2, 2]);
        assert_eq!(c, count_graph_by_arc_queries(&ps, &p));
    }

    #[test]
    fn edge_list_counts() {
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let c = count_edge_list(4, &k4).unwrap();
        assert_eq!((c.ordered_triangles, c.ordered_paths), (24, 24));
        let star = [(0, 1), (2, 0), (0, 3), (1, 0)];
        let c = count_edge_list(4, &star).unwrap();
        assert_eq!((c.ordered_triangles, c.ordered_paths, c.degrees.clone()), (0, 6, vec![3, 1, 1, 1]));
        assert_eq!(count_edge_list(3, &[(0, 3)]), Err(Error::InvalidEdge { i: 0, j: 3, n: 3 }));
        assert!(count_edge_list(3, &[(1, 1)]).is_err());
        assert_eq!(count_edge_list(0, &[]).unwrap().ordered_paths, 0);
    }

    #[test]
    fn single_path() {
        let (ps, p) = fixture(vec![0.0, 0.15, 0.95], 0.3, 0.1);
        let c = count_graph(&ps, &p);
        assert_eq!((c.ordered_triangles, c.ordered_paths), (0, 2));
        assert_eq!(c.degrees, vec![1, 2, 1]);
    }

    #[test]
    fn brute_force_fixtures() {
        let k4 = Adjacency::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        let c = brute_force_counts(&k4);
        assert_eq!((c.ordered_triangles, c.ordered_paths), (24, 24));

        let empty = Adjacency::from_edges(5, &[]).unwrap();
        let c = brute_force_counts(&empty);
        assert_eq!((c.ordered_triangles, c.ordered_paths), (0, 0));

        let star = Adjacency::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let c = brute_force_counts(&star);
        assert_eq!((c.ordered_triangles, c.ordered_paths), (0, 6));
    }

    #[test]
    fn geometric_graph_with_coincident_points() {
        let (ps, p) = fixture(vec![0.5, 0.5, 0.55, 0.5, 0.9], 0.1, 0.0);
        let c = count_graph(&ps, &p);
        let brute = brute_force_counts(&build_adjacency(&ps, &p).unwrap());
        assert_eq!(c, brute);
        // Coincident points are at distance 0, which is not above r2 = 0.
        assert_eq!(c.ordered_triangles, 0);
    }

    #[test]
    fn edge_list_matches_adjacency() {
        let p = AnnulusParams::new(120, 0.2, 0.05).unwrap();
        let ps = sample_positions(&p, RngSeed::new(8, 0));
        let adj = build_adjacency(&ps, &p).unwrap();
        let mut expected = Vec::new();
        for i in 0..120 {
            for j in (i + 1)..120 {
                if adj.get(i, j) == 1 {
                    expected.push((i, j));
                }
            }
        }
        assert_eq!(edge_list(&ps, &p), expected);
    }

    #[test]
    fn wide_radius_with_wraparound() {
        let p = AnnulusParams::new(80, 0.5, 0.0).unwrap();
        let ps = sample_positions(&p, RngSeed::new(4, 4));
        assert_eq!(count_graph(&ps, &p), brute_force_counts(&build_adjacency(&ps, &p).unwrap()));
    }

    fn arb_instance() -> impl Strategy<Value = (PositionSet, AnnulusParams)> {
        (3usize..=150, 0.001..0.5f64, 0.0..0.99f64, any::<u64>()).prop_map(|(n, r1, frac, seed)| {
            let p = AnnulusParams::new(n, r1, r1 * frac).unwrap();
            (sample_positions(&p, RngSeed::new(seed, 0)), p)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fast_counter_matches_brute_force((ps, p) in arb_instance()) {
            let brute = brute_force_counts(&build_adjacency(&ps, &p).unwrap());
            prop_assert_eq!(&count_graph(&ps, &p), &brute);
            prop_assert_eq!(&count_graph_by_arc_queries(&ps, &p), &brute);
            prop_assert_eq!(&count_edge_list(ps.len(), &edge_list(&ps, &p)).unwrap(), &brute);
        }

        #[test]
        fn count_invariants((ps, p) in arb_instance()) {
            let c = count_graph(&ps, &p);
            prop_assert_eq!(c.ordered_triangles % 6, 0);
            prop_assert_eq!(c.ordered_paths % 2, 0);
            prop_assert!(c.ordered_triangles <= c.ordered_paths);
            prop_assert_eq!(c.ordered_paths, paths_from_degrees(&c.degrees));
        }

        #[test]
        fn counts_are_rotation_invariant((ps, p) in arb_instance(), shift in 0.0..1.0f64) {
            prop_assert_eq!(count_graph(&ps.rotated(shift), &p), count_graph(&ps, &p));
        }

        #[test]
        fn degrees_grow_with_outer_radius((ps, p) in arb_instance(), grow in 0.0..1.0f64) {
            let wider = AnnulusParams::new(p.n(), p.r1() + (0.5 - p.r1()) * grow, p.r2()).unwrap();
            let narrow = count_graph(&ps, &p);
            let wide = count_graph(&ps, &wider);
            prop_assert!(narrow.degrees.iter().zip(&wide.degrees).all(|(a, b)| a <= b));
        }
    }
}
