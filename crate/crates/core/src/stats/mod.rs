//! Limit-theory quantities for the clustering coefficient.

mod kernel;
mod normal;
mod sigma;

pub use kernel::{
    asymptotic_limit, clustering_coefficient, kernel_h, limit_for_ratio, standardized_statistic, KernelParams,
};
pub use normal::{kolmogorov_critical_value, ks_distance, normal_cdf};
pub use sigma::{
    mean_h_conditional, sigma2_cubature, sigma2_monte_carlo, SigmaEstimate, SigmaMethod, MIN_CUBATURE_GRID,
    MIN_MC_SAMPLES,
};
