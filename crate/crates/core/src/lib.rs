//! Random annulus graphs on the unit circle.
//!
//! Nodes are placed uniformly on a circle of circumference one and two nodes
//! are joined when their circular distance lies strictly between an inner
//! radius `r2` and an outer radius `r1`. This crate samples such graphs,
//! counts ordered triangles and ordered 2-paths exactly in near-linear time,
//! and evaluates the constants that govern the limiting law of the global
//! clustering coefficient: the limit itself, the centred triple kernel and
//! its two-point covariance `E[h(X1,X2,X3) h(X1,X2,X4)]`.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! The `parallel` feature spreads the heavy loops over a rayon pool; every
//! result is bit-identical to the sequential path.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod arcs;
pub mod counting;
mod error;
pub mod model;
pub mod stats;
mod sum;

pub use crate::arcs::{count_in_arcs, neighbor_arcs, Arc, ArcSet};
pub use crate::counting::{brute_force_counts, count_edge_list, count_graph, count_graph_by_arc_queries, edge_list, GraphCounts};
pub use crate::error::Error;
pub use crate::model::{
    build_adjacency, build_adjacency_with_cap, circle_distance, edge_indicator, sample_positions, Adjacency,
    AnnulusParams, PositionSet, RngSeed, DEFAULT_ADJACENCY_CAP,
};
pub use crate::stats::{
    asymptotic_limit, clustering_coefficient, kernel_h, kolmogorov_critical_value, ks_distance, limit_for_ratio,
    mean_h_conditional, normal_cdf, sigma2_cubature, sigma2_monte_carlo, standardized_statistic, KernelParams,
    SigmaEstimate, SigmaMethod,
};
pub use crate::sum::NeumaierSum;

pub type Result<T, E = Error> = core::result::Result<T, E>;
