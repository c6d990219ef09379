//! Shapiro–Wilk normality test using Royston's approximation (algorithm
//! AS R94) for 3 ≤ n ≤ 5000.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_quantile};

pub const MIN_SIZE: usize = 3;
pub const MAX_SIZE: usize = 5000;
/// Significance level below which a class is treated as non-normal.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Test statistic and p-value of one Shapiro–Wilk test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    pub w: f64,
    pub p_value: f64,
}

/// Antisymmetric Shapiro–Wilk weights for a sample of size `n`, in
/// ascending order of the order statistics.
fn weights(n: usize) -> Vec<f64> {
    if n == 3 {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        return vec![-a, 0.0, a];
    }
    let nf = n as f64;
    let m: Vec<f64> = (1..=n)
        .map(|i| std_normal_quantile((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let summ2: f64 = m.iter().map(|v| v * v).sum();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / nf.sqrt();
    let a1 = poly(&C1, rsn) + m[n - 1] / ssumm2;
    let mut a = vec![0.0; n];
    let (fixed, fac) = if n > 5 {
        let a2 = poly(&C2, rsn) + m[n - 2] / ssumm2;
        let fac = ((summ2 - 2.0 * m[n - 1].powi(2) - 2.0 * m[n - 2].powi(2))
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[n - 2] = a2;
        a[1] = -a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[n - 1].powi(2)) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    a[n - 1] = a1;
    a[0] = -a1;
    for i in fixed..n - fixed {
        a[i] = m[i] / fac;
    }
    a
}

/// Shapiro–Wilk W and its p-value.
pub fn shapiro_wilk(data: &[f64]) -> Result<ShapiroWilk> {
    let n = data.len();
    if !(MIN_SIZE..=MAX_SIZE).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "Shapiro-Wilk needs {MIN_SIZE} to {MAX_SIZE} observations, got {n}"
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "Shapiro-Wilk data must be finite".to_string(),
        ));
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let mean = x.iter().sum::<f64>() / n as f64;
    let ss: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if ss <= 0.0 || x[0] == x[n - 1] {
        return Err(Error::Degenerate(
            "Shapiro-Wilk data have zero variance".to_string(),
        ));
    }
    let a = weights(n);
    let num: f64 = a.iter().zip(&x).map(|(ai, xi)| ai * (xi - mean)).sum();
    let w = (num * num / ss).min(1.0);
    let nf = n as f64;
    let p_value = if n == 3 {
        (6.0 / PI * (w.sqrt().asin() - 0.75f64.sqrt().asin())).clamp(0.0, 1.0)
    } else if n <= 11 {
        let gamma = poly(&G, nf);
        let m = poly(&C3, nf);
        let s = poly(&C4, nf).exp();
        let w1 = -(gamma - (1.0 - w).ln()).ln();
        1.0 - std_normal_cdf((w1 - m) / s)
    } else {
        let ln_n = nf.ln();
        let m = poly(&C5, ln_n);
        let s = poly(&C6, ln_n).exp();
        1.0 - std_normal_cdf(((1.0 - w).ln() - m) / s)
    };
    Ok(ShapiroWilk {
        w,
        p_value: p_value.clamp(0.0, 1.0),
    })
}
