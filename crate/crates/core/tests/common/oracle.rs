//! Exact one-dimensional reference values for small radii (`r1 <= 0.1`).
//!
//! With `X1` pinned at 0 and `s` the offset of `X2`, integrating the kernel
//! over `X3` leaves
//! `h2(s) = A(s) L(s) - c (2 p A(s) + L(s))`,
//! where `A(s)` is the edge indicator, `p = 2 (r1 - r2)` and `L(s)` is the
//! length of the common neighbourhood of 0 and `s`. `L` is piecewise linear
//! with kinks at `±a ± b` for `a, b in {0, r1, r2}`, so three-point
//! Gauss-Legendre on each piece integrates `A L` and `h2^2` exactly.
//! Nothing here touches the crate under test.

#![allow(dead_code)]

pub struct Radii {
    pub r1: f64,
    pub r2: f64,
}

impl Radii {
    pub fn new(r1: f64, r2: f64) -> Self {
        assert!(r1 <= 0.1 && 0.0 <= r2 && r2 < r1);
        Self { r1, r2 }
    }

    fn neighbourhood(&self, t: f64) -> [(f64, f64); 2] {
        [(t + self.r2, t + self.r1), (t - self.r1, t - self.r2)]
    }

    fn adjacent(&self, s: f64) -> f64 {
        let d = s.abs();
        if self.r2 < d && d < self.r1 {
            1.0
        } else {
            0.0
        }
    }

    fn common_length(&self, s: f64) -> f64 {
        let mut total = 0.0;
        for (a0, a1) in self.neighbourhood(0.0) {
            for (b0, b1) in self.neighbourhood(s) {
                total += (a1.min(b1) - a0.max(b0)).max(0.0);
            }
        }
        total
    }

    pub fn edge_probability(&self) -> f64 {
        2.0 * (self.r1 - self.r2)
    }

    pub fn c(&self) -> f64 {
        let g = self.r1 - 2.0 * self.r2;
        let w = self.r1 - self.r2;
        g * g / (4.0 * w * w)
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut cuts = vec![-0.5, 0.5];
        let rs = [0.0, self.r1, self.r2];
        for a in rs {
            for b in rs {
                for v in [a + b, a - b, -a + b, -a - b] {
                    cuts.push(v);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for (x, wt) in nodes.iter().zip(weights) {
                total += wt * half * f(mid + half * x);
            }
        }
        total
    }

    /// `E[A12 A13 A23 | X1]`.
    pub fn triangle_probability(&self) -> f64 {
        self.integrate(|s| self.adjacent(s) * self.common_length(s))
    }

    /// `E[A12 A13 | X1]`, computed as the square of the integrated indicator.
    pub fn two_path_probability(&self) -> f64 {
        let p = self.integrate(|s| self.adjacent(s));
        p * p
    }

    pub fn h2(&self, s: f64) -> f64 {
        let a = self.adjacent(s);
        let l = self.common_length(s);
        a * l - self.c() * (2.0 * self.edge_probability() * a + l)
    }

    /// `E[h(X1,X2,X3) h(X1,X2,X4)] = E[h2(X1,X2)^2]`.
    pub fn sigma2(&self) -> f64 {
        self.integrate(|s| {
            let v = self.h2(s);
            v * v
        })
    }

    /// `E[h(X1,X2,X3)^2]`.
    pub fn kernel_second_moment(&self) -> f64 {
        let c = self.c();
        let t = self.triangle_probability();
        let w = 3.0 * self.two_path_probability();
        // h = 1 - 3c on triangles, -c on exactly one 2-path.
        t * (1.0 - 3.0 * c).powi(2) + (w - 3.0 * t) * c * c
    }
}
