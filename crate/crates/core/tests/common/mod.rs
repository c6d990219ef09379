//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use threeclass::distributions::DistributionSpec;
use threeclass::estimators::ThreeClassSample;
use threeclass::numerics::{integrate_adaptive, Interval};
use threeclass::rng::RandomStream;

/// Triple loop over all (x1, x2, x3) of the U-statistic kernel: 1 for
/// x1 < x2 < x3, 1/2 for exactly one adjacent tie (x1 = x2 < x3 or
/// x1 < x2 = x3), 1/6 for x1 = x2 = x3 and 0 otherwise. Counts are kept in
/// integer sixths so the result is exact.
pub fn brute_force_vus(s: &ThreeClassSample) -> f64 {
    let mut sixths: u64 = 0;
    for &x in s.class(0) {
        for &y in s.class(1) {
            for &z in s.class(2) {
                sixths += if x < y && y < z {
                    6
                } else if (x == y && y < z) || (x < y && y == z) {
                    3
                } else if x == y && y == z {
                    1
                } else {
                    0
                };
            }
        }
    }
    let [n1, n2, n3] = s.sizes();
    sixths as f64 / (6 * n1 * n2 * n3) as f64
}

/// Random sample with class sizes in 1..=15 whose values come from a small
/// grid, so ties within and across classes are common.
pub fn tied_sample(seed: u64) -> ThreeClassSample {
    let mut s = RandomStream::new(seed);
    let mut class = |shift: usize| -> Vec<f64> {
        let n = 1 + s.index(15);
        let levels = 2 + s.index(8);
        (0..n)
            .map(|_| (s.index(levels) + shift) as f64 * 0.5)
            .collect()
    };
    let (a, b, c) = (class(0), class(1), class(2));
    ThreeClassSample::new(a, b, c).unwrap()
}

/// VUS as the nested double integral
/// ∫∫_{x<z} f1(x) f3(z) (F2(z) − F2(x)) dx dz, with F2 itself obtained by
/// integrating f2.
pub fn nested_double_vus(
    f1: &DistributionSpec,
    f2: &DistributionSpec,
    f3: &DistributionSpec,
    lo: f64,
    hi: f64,
) -> f64 {
    let tol = 1e-9;
    let big_f2 = |t: f64| {
        if t <= lo {
            0.0
        } else {
            integrate_adaptive(|u| f2.pdf(u), Interval::new(lo, t).unwrap(), tol).unwrap()
        }
    };
    let outer = |z: f64| {
        if z <= lo {
            return 0.0;
        }
        let fz = big_f2(z);
        let inner = integrate_adaptive(
            |x| f1.pdf(x) * (fz - big_f2(x)),
            Interval::new(lo, z).unwrap(),
            1e-7,
        )
        .unwrap();
        f3.pdf(z) * inner
    };
    integrate_adaptive(outer, Interval::new(lo, hi).unwrap(), 1e-6).unwrap()
}
