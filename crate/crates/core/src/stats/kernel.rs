use crate::counting::GraphCounts;
use crate::model::{circle_distance, in_annulus, AnnulusParams};
use crate::stats::SigmaEstimate;
use crate::{Error, Result};

/// Radii together with the kernel coefficient
/// `c = (r1 - 2 r2)^2 / (4 (r1 - r2)^2)` and the limit `3c`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KernelParams {
    pub r1: f64,
    pub r2: f64,
    pub c: f64,
    pub limit: f64,
}

impl KernelParams {
    /// Fails with [`Error::RegimeViolation`] unless `2 r2 < r1`.
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        // Reuse the model's radius validation; n is irrelevant here.
        AnnulusParams::new(1, r1, r2)?;
        if !(2.0 * r2 < r1) {
            return Err(Error::RegimeViolation { r1, r2 });
        }
        let gap = r1 - 2.0 * r2;
        let width = r1 - r2;
        let c = (gap * gap) / (4.0 * width * width);
        Ok(Self { r1, r2, c, limit: 3.0 * c })
    }

    pub fn from_params(params: &AnnulusParams) -> Result<Self> {
        Self::new(params.r1(), params.r2())
    }

    /// `p = 2 (r1 - r2)`.
    pub fn edge_probability(&self) -> f64 {
        2.0 * (self.r1 - self.r2)
    }

    #[inline]
    pub(crate) fn adjacent(&self, x: f64, y: f64) -> bool {
        in_annulus(circle_distance(x, y), self.r1, self.r2)
    }
}

/// `(3/4) (r1 - 2 r2)^2 / (r1 - r2)^2`.
pub fn asymptotic_limit(kp: &KernelParams) -> f64 {
    kp.limit
}

/// The limit as a function of `lambda = r1 / r2` alone:
/// `(3/4) (lambda - 2)^2 / (lambda - 1)^2`, and `3/4` for infinite `lambda`.
///
/// No regime check; at `lambda = 2` this returns 0.
pub fn limit_for_ratio(lambda: f64) -> f64 {
    if lambda == f64::INFINITY {
        return 0.75;
    }
    let num = lambda - 2.0;
    let den = lambda - 1.0;
    0.75 * (num * num) / (den * den)
}

/// Ordered triangles over ordered 2-paths; `None` when there are no 2-paths.
pub fn clustering_coefficient(counts: &GraphCounts) -> Option<f64> {
    (counts.ordered_paths > 0).then(|| counts.ordered_triangles as f64 / counts.ordered_paths as f64)
}

/// `h = A12 A13 A23 - c (A12 A13 + A21 A23 + A31 A32)`.
///
/// Takes one of the values `0`, `-c` (a single 2-path) or `1 - 3c` (a triangle).
pub fn kernel_h(x1: f64, x2: f64, x3: f64, kp: &KernelParams) -> f64 {
    let a12 = kp.adjacent(x1, x2) as u8 as f64;
    let a13 = kp.adjacent(x1, x3) as u8 as f64;
    let a23 = kp.adjacent(x2, x3) as u8 as f64;
    a12 * a13 * a23 - kp.c * (a12 * a13 + a12 * a23 + a13 * a23)
}

/// `2 sqrt(2) (r1 - r2)^2 n / (3 sigma) * (cn - limit)`.
pub fn standardized_statistic(cn: f64, params: &AnnulusParams, sigma: &SigmaEstimate) -> Result<f64> {
    if !(sigma.value > 0.0) {
        return Err(Error::NonpositiveSigma(sigma.value));
    }
    let kp = KernelParams::from_params(params)?;
    let width = params.r1() - params.r2();
    let scale = 2.0 * core::f64::consts::SQRT_2 * width * width * params.n() as f64 / (3.0 * libm::sqrt(sigma.value));
    Ok(scale * (cn - kp.limit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::SigmaMethod;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn limit_values() {
        let kp = KernelParams::new(0.03, 0.01).unwrap();
        assert!((asymptotic_limit(&kp) - 0.1875).abs() < 1e-12);
        let kp = KernelParams::new(0.04, 0.01).unwrap();
        assert!((asymptotic_limit(&kp) - 1.0 / 3.0).abs() < 1e-12);
        let kp = KernelParams::new(0.05, 0.0).unwrap();
        assert_eq!(asymptotic_limit(&kp), 0.75);
        let kp = KernelParams::new(0.02, 0.01 - 1e-9).unwrap();
        assert!(asymptotic_limit(&kp) < 1e-12);
        assert_eq!(kp.limit, 3.0 * kp.c);
        assert_eq!(limit_for_ratio(2.0), 0.0);
        assert!((limit_for_ratio(4.0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(limit_for_ratio(f64::INFINITY), 0.75);
    }

    #[test]
    fn regime_is_enforced() {
        assert!(matches!(KernelParams::new(0.02, 0.01), Err(Error::RegimeViolation { .. })));
        assert!(matches!(KernelParams::new(0.02, 0.015), Err(Error::RegimeViolation { .. })));
        assert!(matches!(KernelParams::new(0.02, 0.03), Err(Error::InvalidRadii { .. })));
    }

    #[test]
    fn clustering_coefficient_cases() {
        let c = |t, p| clustering_coefficient(&GraphCounts { ordered_triangles: t, ordered_paths: p, degrees: vec![] });
        assert_eq!(c(6, 6), Some(1.0));
        assert_eq!(c(0, 2), Some(0.0));
        assert_eq!(c(0, 0), None);
    }

    #[test]
    fn kernel_examples() {
        let kp = KernelParams::new(0.3, 0.1).unwrap();
        assert!((kp.c - 1.0 / 16.0).abs() < 1e-15);
        assert!((kernel_h(0.0, 0.15, 0.29, &kp) - 0.8125).abs() < 1e-15);
        assert!((kernel_h(0.0, 0.15, 0.95, &kp) + 0.0625).abs() < 1e-15);
        assert_eq!(kernel_h(0.0, 0.33, 0.66, &kp), 0.0);
    }

    fn sigma(value: f64) -> SigmaEstimate {
        SigmaEstimate { value, std_error: 0.0, method: SigmaMethod::Cubature, samples_or_grid: 400 }
    }

    #[test]
    fn standardisation_is_affine() {
        let p = AnnulusParams::new(10_000, 0.02, 0.005).unwrap();
        let s = sigma(1e-6);
        let limit = KernelParams::from_params(&p).unwrap().limit;
        assert_eq!(standardized_statistic(limit, &p, &s).unwrap(), 0.0);
        let one = standardized_statistic(limit + 0.001, &p, &s).unwrap();
        let two = standardized_statistic(limit + 0.002, &p, &s).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12 * two.abs());
        assert!(matches!(standardized_statistic(limit, &p, &sigma(0.0)), Err(Error::NonpositiveSigma(_))));
        let outside = AnnulusParams::new(100, 0.02, 0.012).unwrap();
        assert!(matches!(standardized_statistic(0.1, &outside, &s), Err(Error::RegimeViolation { .. })));
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, x3 in 0.0..1.0f64, r1 in 0.02..0.5f64, f in 0.0..0.49f64) {
            let kp = KernelParams::new(r1, r1 * f).unwrap();
            let h = kernel_h(x1, x2, x3, &kp);
            for (a, b, c) in [(x1, x3, x2), (x2, x1, x3), (x2, x3, x1), (x3, x1, x2), (x3, x2, x1)] {
                prop_assert_eq!(kernel_h(a, b, c, &kp), h);
            }
            let values = [0.0, -kp.c, 1.0 - 3.0 * kp.c];
            prop_assert!(values.contains(&h));
        }

        #[test]
        fn kernel_is_rotation_invariant(x1 in 0.0..1.0f64, x2 in 0.0..1.0f64, x3 in 0.0..1.0f64, s in 0.0..1.0f64) {
            let kp = KernelParams::new(0.1, 0.03).unwrap();
            let rot = |x: f64| crate::model::wrap_unit(x + s);
            let near = |a: f64, b: f64| {
                let d = circle_distance(a, b);
                (d - kp.r1).abs() < 1e-12 || (d - kp.r2).abs() < 1e-12
            };
            prop_assume!(!near(x1, x2) && !near(x1, x3) && !near(x2, x3));
            prop_assert_eq!(kernel_h(rot(x1), rot(x2), rot(x3), &kp), kernel_h(x1, x2, x3, &kp));
        }

        #[test]
        fn limit_increases_with_ratio(a in 2.0001..1000.0f64, b in 2.0001..1000.0f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            prop_assert!(limit_for_ratio(lo) < limit_for_ratio(hi));
            prop_assert!(limit_for_ratio(hi) < 0.75);
            prop_assert!(limit_for_ratio(lo) > 0.0);
        }
    }
}
