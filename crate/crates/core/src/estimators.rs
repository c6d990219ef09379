//! OVL and VUS estimators for three-class samples.
//!
//! Four estimation routes are provided: a trinormal plug-in, the same plug-in
//! after a common Box-Cox transformation, Gaussian kernel smoothing and (for
//! VUS only) the empirical U-statistic. [`evaluate`] computes several
//! statistics on one sample while fitting each model only once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    self, integrate_adaptive, integrate_piecewise, maximize_scalar_from_grid, std_normal_cdf,
    std_normal_pdf, Interval,
};

/// Quadrature tolerance for the normal plug-in estimators.
pub const NORMAL_TOLERANCE: f64 = 1e-8;
/// Quadrature tolerance for the kernel estimators.
pub const KERNEL_TOLERANCE: f64 = 1e-7;
/// Optimizer tolerance for the Box-Cox parameter.
pub const BOX_COX_TOLERANCE: f64 = 1e-6;
/// Default Box-Cox search interval.
pub const BOX_COX_DOMAIN: (f64, f64) = (-5.0, 5.0);
/// Below this magnitude the Box-Cox transform uses the log branch.
const LOG_BRANCH: f64 = 1e-10;
/// Half-width of the trinormal VUS integration range, in standard units.
const VUS_NORMAL_RANGE: f64 = 9.0;
/// Padding of the normal OVL range, in units of the largest sigma.
const OVL_NORMAL_PAD: f64 = 9.0;
/// Padding of the kernel integration range, in units of the largest bandwidth.
const KERNEL_PAD: f64 = 6.0;
/// Kernel contributions beyond this many bandwidths are below 1e-18.
const KERNEL_CUTOFF: f64 = 9.0;

fn clamp_unit(value: f64, what: &str) -> f64 {
    if !(0.0..=1.0).contains(&value) {
        log::debug!("{what} estimate {value} clamped to [0, 1]");
    }
    value.clamp(0.0, 1.0)
}

/// Marker values of the three ordered classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeClassSample {
    classes: [Vec<f64>; 3],
}

impl ThreeClassSample {
    pub fn new(class1: Vec<f64>, class2: Vec<f64>, class3: Vec<f64>) -> Result<Self> {
        let classes = [class1, class2, class3];
        for (k, c) in classes.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidInput(format!("class {} is empty", k + 1)));
            }
            if let Some(i) = c.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "class {} has a non-finite value at index {i}",
                    k + 1
                )));
            }
        }
        Ok(Self { classes })
    }

    /// Values of class `k` (0-based).
    pub fn class(&self, k: usize) -> &[f64] {
        &self.classes[k]
    }

    pub fn classes(&self) -> &[Vec<f64>; 3] {
        &self.classes
    }

    pub fn sizes(&self) -> [usize; 3] {
        [
            self.classes[0].len(),
            self.classes[1].len(),
            self.classes[2].len(),
        ]
    }

    pub fn total(&self) -> usize {
        self.sizes().iter().sum()
    }

    /// Applies `f` to every value.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        let [a, b, c] = &self.classes;
        Self::new(
            a.iter().map(|&x| f(x)).collect(),
            b.iter().map(|&x| f(x)).collect(),
            c.iter().map(|&x| f(x)).collect(),
        )
    }

    /// Smallest value across all classes.
    pub fn min(&self) -> f64 {
        self.classes
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.classes
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-class normal parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalTriple {
    pub mu: [f64; 3],
    pub sigma: [f64; 3],
}

impl NormalTriple {
    pub fn new(mu: [f64; 3], sigma: [f64; 3]) -> Result<Self> {
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite mean in {mu:?}")));
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::Degenerate(format!(
                "non-positive sigma in {sigma:?}"
            )));
        }
        let t = Self { mu, sigma };
        let (a, b, c, d) = t.coefficients();
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "trinormal coefficients not finite for {mu:?}, {sigma:?}"
            )));
        }
        Ok(t)
    }

    /// `(a, b, c, d)` with `a = s2/s1`, `b = (m1-m2)/s1`, `c = s2/s3`,
    /// `d = (m3-m2)/s3`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        let [m1, m2, m3] = self.mu;
        let [s1, s2, s3] = self.sigma;
        (s2 / s1, (m1 - m2) / s1, s2 / s3, (m3 - m2) / s3)
    }
}

/// Maximum likelihood normal fit of each class (standard deviation with
/// divisor `n`).
pub fn fit_normal_triple(sample: &ThreeClassSample) -> Result<NormalTriple> {
    let mut mu = [0.0; 3];
    let mut sigma = [0.0; 3];
    for k in 0..3 {
        let c = sample.class(k);
        if c.len() < 2 {
            return Err(Error::Degenerate(format!(
                "class {} has fewer than 2 values",
                k + 1
            )));
        }
        let n = c.len() as f64;
        let m = c.iter().sum::<f64>() / n;
        let v = c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        if v.is_nan() || v <= 0.0 {
            return Err(Error::Degenerate(format!(
                "class {} has zero variance",
                k + 1
            )));
        }
        mu[k] = m;
        sigma[k] = v.sqrt();
    }
    NormalTriple::new(mu, sigma)
}

/// Trinormal VUS, `∫ Φ(a s - b) Φ(-c s + d) φ(s) ds`.
pub fn vus_normal(fit: &NormalTriple) -> Result<f64> {
    let (a, b, c, d) = fit.coefficients();
    let v = integrate_adaptive(
        |s| std_normal_cdf(a * s - b) * std_normal_cdf(-c * s + d) * std_normal_pdf(s),
        Interval::new(-VUS_NORMAL_RANGE, VUS_NORMAL_RANGE)?,
        NORMAL_TOLERANCE,
    )?;
    Ok(clamp_unit(v, "VUS_N"))
}

/// Abscissas where the densities of classes `i` and `j` cross.
fn normal_crossings(fit: &NormalTriple, i: usize, j: usize, out: &mut Vec<f64>) {
    let (mi, si, mj, sj) = (fit.mu[i], fit.sigma[i], fit.mu[j], fit.sigma[j]);
    let (vi, vj) = (si * si, sj * sj);
    // log-density difference: qa x^2 + qb x + qc = 0
    let qa = 0.5 / vj - 0.5 / vi;
    let qb = mi / vi - mj / vj;
    let qc = mj * mj / (2.0 * vj) - mi * mi / (2.0 * vi) + (sj / si).ln();
    if qa.abs() <= 1e-12 * (0.5 / vi + 0.5 / vj) {
        if qb != 0.0 {
            out.push(-qc / qb);
        }
        return;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return;
    }
    let root = disc.sqrt();
    // numerically stable pair of roots
    let q = -0.5 * (qb + qb.signum() * root);
    if q != 0.0 {
        out.push(q / qa);
        out.push(qc / q);
    } else {
        out.push(0.0);
    }
}

/// Normal OVL, the integral of the smallest of the three fitted densities.
pub fn ovl_normal(fit: &NormalTriple) -> Result<f64> {
    let smax = fit.sigma.iter().copied().fold(0.0, f64::max);
    let lo = fit.mu.iter().copied().fold(f64::INFINITY, f64::min) - OVL_NORMAL_PAD * smax;
    let hi = fit.mu.iter().copied().fold(f64::NEG_INFINITY, f64::max) + OVL_NORMAL_PAD * smax;
    let mut cuts = Vec::with_capacity(6);
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        normal_crossings(fit, i, j, &mut cuts);
    }
    let v = integrate_piecewise(
        |x| {
            (0..3)
                .map(|k| numerics::normal_pdf(x, fit.mu[k], fit.sigma[k]))
                .fold(f64::INFINITY, f64::min)
        },
        lo,
        hi,
        &cuts,
        NORMAL_TOLERANCE,
    )?;
    Ok(clamp_unit(v, "OVL_N"))
}

/// Common Box-Cox transformation fitted to the three classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCoxFit {
    pub lambda: f64,
    /// Offset added to every value before transforming (0 for positive data).
    pub shift: f64,
    /// Profile log-likelihood at `lambda`.
    pub loglik: f64,
    pub search_domain: Interval,
    /// True when `lambda` sits on the edge of the search interval.
    pub at_boundary: bool,
}

impl BoxCoxFit {
    /// Human-readable warnings about the fit (positivity shift, boundary hit).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.shift > 0.0 {
            w.push(format!(
                "Box-Cox: non-positive values present, all values shifted by {}",
                self.shift
            ));
        }
        if self.at_boundary {
            w.push(format!(
                "Box-Cox: lambda {} at the edge of [{}, {}]",
                self.lambda, self.search_domain.lo, self.search_domain.hi
            ));
        }
        w
    }
}

/// Box-Cox transform of one positive value.
#[inline]
pub fn box_cox(x: f64, lambda: f64) -> f64 {
    box_cox_log(x.ln(), lambda)
}

#[inline]
fn box_cox_log(log_x: f64, lambda: f64) -> f64 {
    if lambda.abs() < LOG_BRANCH {
        log_x
    } else {
        (lambda * log_x).exp_m1() / lambda
    }
}

/// Profile log-likelihood over precomputed per-class logs, additive
/// constants dropped.
fn box_cox_profile(logs: &[Vec<f64>; 3], sum_log: f64, lambda: f64) -> f64 {
    let mut l = (lambda - 1.0) * sum_log;
    for c in logs {
        let n = c.len() as f64;
        let mean = c.iter().map(|&lx| box_cox_log(lx, lambda)).sum::<f64>() / n;
        let ss: f64 = c
            .iter()
            .map(|&lx| {
                let d = box_cox_log(lx, lambda) - mean;
                d * d
            })
            .sum();
        l -= 0.5 * n * (ss / n).ln();
    }
    l
}

/// Profile log-likelihood on the whole maximization grid.
///
/// Uses `x^λ` in place of the transform (the variance differs only by the
/// factor `λ^2`) and steps `x^λ` along the grid by multiplication, re-anchoring
/// with a fresh `exp` every 100 steps to bound rounding drift.
fn box_cox_profile_grid(logs: &[Vec<f64>; 3], sum_log: f64, domain: Interval) -> Vec<f64> {
    const REANCHOR: usize = 100;
    let n_grid = numerics::MAXIMIZE_GRID_POINTS;
    let step = domain.width() / (n_grid - 1) as f64;
    let mut powers: [Vec<f64>; 3] = Default::default();
    let ratios: [Vec<f64>; 3] =
        [0, 1, 2].map(|k| logs[k].iter().map(|lx| (step * lx).exp()).collect());
    let mut out = Vec::with_capacity(n_grid);
    for j in 0..n_grid {
        let lambda = numerics::grid_point(domain, j);
        let reanchor = j % REANCHOR == 0 || j == n_grid - 1;
        let mut l = (lambda - 1.0) * sum_log;
        for k in 0..3 {
            if reanchor {
                powers[k] = logs[k].iter().map(|lx| (lambda * lx).exp()).collect();
            } else {
                for (p, r) in powers[k].iter_mut().zip(&ratios[k]) {
                    *p *= r;
                }
            }
            let n = logs[k].len() as f64;
            let var = if lambda.abs() < LOG_BRANCH {
                variance(&logs[k])
            } else {
                variance(&powers[k]) / (lambda * lambda)
            };
            l -= 0.5 * n * var.ln();
        }
        out.push(if l.is_finite() { l } else { f64::NAN });
    }
    out
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Shift needed to make every value positive (0 when already positive).
pub fn positivity_shift(sample: &ThreeClassSample) -> f64 {
    let m = sample.min();
    if m <= 0.0 {
        1.0 - m
    } else {
        0.0
    }
}

/// Profile log-likelihood of the common Box-Cox parameter at `lambda`, on
/// `sample` after adding `shift`.
pub fn box_cox_loglik(sample: &ThreeClassSample, shift: f64, lambda: f64) -> Result<f64> {
    let logs = shifted_logs(sample, shift)?;
    let sum_log = logs.iter().flatten().sum();
    Ok(box_cox_profile(&logs, sum_log, lambda))
}

fn shifted_logs(sample: &ThreeClassSample, shift: f64) -> Result<[Vec<f64>; 3]> {
    let mut logs: [Vec<f64>; 3] = Default::default();
    for (k, out) in logs.iter_mut().enumerate() {
        for &x in sample.class(k) {
            let y = x + shift;
            if y.is_nan() || y <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "Box-Cox needs positive values, got {y} in class {}",
                    k + 1
                )));
            }
            out.push(y.ln());
        }
    }
    Ok(logs)
}

/// Maximizes the profile log-likelihood of a common Box-Cox parameter over
/// the default search interval.
pub fn fit_box_cox(sample: &ThreeClassSample) -> Result<BoxCoxFit> {
    fit_box_cox_in(sample, Interval::new(BOX_COX_DOMAIN.0, BOX_COX_DOMAIN.1)?)
}

pub fn fit_box_cox_in(sample: &ThreeClassSample, domain: Interval) -> Result<BoxCoxFit> {
    for k in 0..3 {
        let c = sample.class(k);
        if c.len() < 2 {
            return Err(Error::Degenerate(format!(
                "class {} has fewer than 2 values",
                k + 1
            )));
        }
        if c.iter().all(|&x| x == c[0]) {
            return Err(Error::Degenerate(format!("class {} is constant", k + 1)));
        }
    }
    let shift = positivity_shift(sample);
    if shift > 0.0 {
        log::debug!("Box-Cox: shifting all values by {shift}");
    }
    let logs = shifted_logs(sample, shift)?;
    let sum_log: f64 = logs.iter().flatten().sum();
    let grid = box_cox_profile_grid(&logs, sum_log, domain);
    let (lambda, loglik) = maximize_scalar_from_grid(
        |lambda| {
            let l = box_cox_profile(&logs, sum_log, lambda);
            if l.is_finite() {
                l
            } else {
                f64::NAN
            }
        },
        &grid,
        domain,
        BOX_COX_TOLERANCE,
    )?;
    let edge = 10.0 * BOX_COX_TOLERANCE;
    let at_boundary = lambda - domain.lo <= edge || domain.hi - lambda <= edge;
    if at_boundary {
        log::debug!("Box-Cox: lambda {lambda} at the search boundary");
    }
    Ok(BoxCoxFit {
        lambda,
        shift,
        loglik,
        search_domain: domain,
        at_boundary,
    })
}

/// Shifts and Box-Cox transforms every value of `sample`.
pub fn apply_box_cox(fit: &BoxCoxFit, sample: &ThreeClassSample) -> Result<ThreeClassSample> {
    let logs = shifted_logs(sample, fit.shift)?;
    let [a, b, c] = logs.map(|v| {
        v.into_iter()
            .map(|lx| box_cox_log(lx, fit.lambda))
            .collect()
    });
    ThreeClassSample::new(a, b, c)
}

/// Gaussian kernel smoother of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelClass {
    sorted: Vec<f64>,
    bandwidth: f64,
}

impl KernelClass {
    pub fn new(data: &[f64], bandwidth: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("kernel class has no data".to_string()));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        let mut sorted = data.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted, bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn data(&self) -> &[f64] {
        &self.sorted
    }

    /// Index range of points within the kernel cutoff of `x`.
    #[inline]
    fn window(&self, x: f64) -> (usize, usize) {
        let reach = KERNEL_CUTOFF * self.bandwidth;
        let lo = self.sorted.partition_point(|&v| v < x - reach);
        let hi = self.sorted.partition_point(|&v| v <= x + reach);
        (lo, hi)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        // Folding from +0.0 keeps empty windows from returning -0.0.
        let (lo, hi) = self.window(x);
        let h = self.bandwidth;
        let s = self.sorted[lo..hi]
            .iter()
            .map(|&v| std_normal_pdf((x - v) / h))
            .fold(0.0, |acc, t| acc + t);
        s / (self.sorted.len() as f64 * h)
    }

    /// Disjoint intervals outside of which the density is negligible.
    pub fn support(&self) -> Vec<(f64, f64)> {
        let reach = KERNEL_CUTOFF * self.bandwidth;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for &v in &self.sorted {
            match out.last_mut() {
                Some(last) if v - reach <= last.1 => last.1 = v + reach,
                _ => out.push((v - reach, v + reach)),
            }
        }
        out
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.window(x);
        let h = self.bandwidth;
        // points far to the left contribute 1 each
        let s = self.sorted[lo..hi]
            .iter()
            .map(|&v| std_normal_cdf((x - v) / h))
            .fold(0.0, |acc, t| acc + t);
        ((lo as f64 + s) / self.sorted.len() as f64).min(1.0)
    }
}

/// Rule-of-thumb bandwidth `(4/3)^(1/5) n^(-1/5) min(s, IQR/1.349)`.
///
/// When one of `s` and `IQR` is zero the other is used alone; when both are
/// zero the data are constant and no bandwidth exists.
pub fn silverman_bandwidth(data: &[f64]) -> Result<f64> {
    let st = numerics::summarize(data)?;
    let spread = match (st.sd_sample > 0.0, st.iqr > 0.0) {
        (true, true) => st.sd_sample.min(st.iqr / 1.349),
        (true, false) => st.sd_sample,
        (false, true) => st.iqr / 1.349,
        (false, false) => {
            return Err(Error::Degenerate(
                "constant class has no kernel bandwidth".to_string(),
            ))
        }
    };
    Ok((4.0f64 / 3.0).powf(0.2) * (st.n as f64).powf(-0.2) * spread)
}

/// Kernel smoothers of the three classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimator {
    classes: [KernelClass; 3],
}

impl KernelEstimator {
    pub fn new(classes: [KernelClass; 3]) -> Self {
        Self { classes }
    }

    pub fn class(&self, k: usize) -> &KernelClass {
        &self.classes[k]
    }

    pub fn bandwidths(&self) -> [f64; 3] {
        [0, 1, 2].map(|k| self.classes[k].bandwidth)
    }

    /// Range over which the kernel integrals are taken.
    pub fn domain(&self) -> Result<Interval> {
        let hmax = self.bandwidths().into_iter().fold(0.0, f64::max);
        let lo = self
            .classes
            .iter()
            .map(|c| c.sorted[0])
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .classes
            .iter()
            .map(|c| c.sorted[c.sorted.len() - 1])
            .fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo - KERNEL_PAD * hmax, hi + KERNEL_PAD * hmax)
    }
}

fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Integrates over the given disjoint segments of `domain`, sharing the
/// tolerance in proportion to segment width.
fn integrate_segments<F: Fn(f64) -> f64>(
    f: F,
    segments: &[(f64, f64)],
    domain: Interval,
    tol: f64,
) -> Result<f64> {
    let clipped: Vec<(f64, f64)> = segments
        .iter()
        .map(|&(lo, hi)| (lo.max(domain.lo), hi.min(domain.hi)))
        .filter(|(lo, hi)| lo < hi)
        .collect();
    let total: f64 = clipped.iter().map(|(lo, hi)| hi - lo).sum();
    let mut sum = 0.0;
    for (lo, hi) in clipped {
        let piece_tol = (tol * (hi - lo) / total).max(tol * 1e-3);
        sum += integrate_adaptive(&f, Interval::new(lo, hi)?, piece_tol)?;
    }
    Ok(sum)
}

/// Fits a Gaussian kernel smoother to each class with the rule-of-thumb
/// bandwidth.
pub fn kernel_fit(sample: &ThreeClassSample) -> Result<KernelEstimator> {
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        let c = sample.class(k);
        let h = silverman_bandwidth(c)
            .map_err(|e| Error::Degenerate(format!("class {}: {e}", k + 1)))?;
        out.push(KernelClass::new(c, h)?);
    }
    let [a, b, c]: [KernelClass; 3] = out.try_into().expect("three classes");
    Ok(KernelEstimator::new([a, b, c]))
}

/// Grid cells scanned per support segment when locating density crossings.
const CROSSING_CELLS: usize = 48;

/// Points in `[lo, hi]` where the smallest of the three densities changes
/// identity, located on a grid and refined by the Illinois method. Crossings
/// closer together than a grid cell may be missed; the adaptive quadrature
/// still resolves the resulting kinks, only more slowly.
fn argmin_switches<F: Fn(f64) -> [f64; 3]>(densities: F, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let argmin = |v: [f64; 3]| {
        let mut k = 0;
        for j in 1..3 {
            if v[j] < v[k] {
                k = j;
            }
        }
        k
    };
    let step = (hi - lo) / CROSSING_CELLS as f64;
    let mut x0 = lo;
    let mut v0 = densities(x0);
    for i in 1..=CROSSING_CELLS {
        let x1 = if i == CROSSING_CELLS {
            hi
        } else {
            lo + step * i as f64
        };
        let v1 = densities(x1);
        let (a, b) = (argmin(v0), argmin(v1));
        if a != b {
            // root of f_a - f_b, which changes sign across the cell
            let diff = |x: f64| {
                let v = densities(x);
                v[a] - v[b]
            };
            let (mut xl, mut xr) = (x0, x1);
            let (mut fl, mut fr) = (v0[a] - v0[b], v1[a] - v1[b]);
            let mut side = 0i8;
            for _ in 0..60 {
                if !(fl < 0.0 && fr > 0.0) || xr - xl <= 1e-12 * (1.0 + xl.abs()) {
                    break;
                }
                let xm = (xl * fr - xr * fl) / (fr - fl);
                let xm = if xm > xl && xm < xr {
                    xm
                } else {
                    0.5 * (xl + xr)
                };
                let fm = diff(xm);
                if fm == 0.0 {
                    xl = xm;
                    xr = xm;
                    break;
                }
                if fm < 0.0 {
                    xl = xm;
                    fl = fm;
                    if side == -1 {
                        fr *= 0.5;
                    }
                    side = -1;
                } else {
                    xr = xm;
                    fr = fm;
                    if side == 1 {
                        fl *= 0.5;
                    }
                    side = 1;
                }
            }
            out.push(0.5 * (xl + xr));
        }
        x0 = x1;
        v0 = v1;
    }
}

/// Kernel OVL, the integral of the smallest of the three smoothed densities.
pub fn ovl_kernel(fit: &KernelEstimator) -> Result<f64> {
    let domain = fit.domain()?;
    let segments: Vec<(f64, f64)> = intersect(
        &intersect(&fit.classes[0].support(), &fit.classes[1].support()),
        &fit.classes[2].support(),
    )
    .into_iter()
    .map(|(lo, hi)| (lo.max(domain.lo), hi.min(domain.hi)))
    .filter(|(lo, hi)| lo < hi)
    .collect();
    let densities = |x: f64| [0, 1, 2].map(|k| fit.classes[k].pdf(x));
    let min_density = |x: f64| {
        let v = densities(x);
        v[0].min(v[1]).min(v[2])
    };
    let total: f64 = segments.iter().map(|(lo, hi)| hi - lo).sum();
    let mut v = 0.0;
    let mut cuts = Vec::new();
    for &(lo, hi) in &segments {
        cuts.clear();
        argmin_switches(densities, lo, hi, &mut cuts);
        let piece_tol = (KERNEL_TOLERANCE * (hi - lo) / total).max(KERNEL_TOLERANCE * 1e-3);
        v += integrate_piecewise(min_density, lo, hi, &cuts, piece_tol)?;
    }
    Ok(clamp_unit(v, "OVL_K"))
}

/// Kernel VUS, `∫ F1(u) (1 - F3(u)) f2(u) du` with smoothed distributions.
pub fn vus_kernel(fit: &KernelEstimator) -> Result<f64> {
    let v = integrate_segments(
        |u| fit.classes[0].cdf(u) * (1.0 - fit.classes[2].cdf(u)) * fit.classes[1].pdf(u),
        &fit.classes[1].support(),
        fit.domain()?,
        KERNEL_TOLERANCE,
    )?;
    Ok(clamp_unit(v, "VUS_K"))
}

fn sorted_copy(data: &[f64]) -> Vec<f64> {
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Tie-weighted ordering count `6 * Σ ψ(x1, x2, x3)` over all triples, where
/// `ψ` is 1 for a strict ordering, 1/2 for one adjacent tie and 1/6 for a
/// triple tie.
pub fn ordering_count(sample: &ThreeClassSample) -> u128 {
    let s1 = sorted_copy(sample.class(0));
    let s3 = sorted_copy(sample.class(2));
    let n3 = s3.len() as u128;
    let mut total: u128 = 0;
    for &b in sample.class(1) {
        let below = s1.partition_point(|&v| v < b) as u128;
        let equal1 = s1.partition_point(|&v| v <= b) as u128 - below;
        let upto = s3.partition_point(|&v| v <= b) as u128;
        let equal3 = upto - s3.partition_point(|&v| v < b) as u128;
        let above = n3 - upto;
        total += 6 * below * above + 3 * (equal1 * above + below * equal3) + equal1 * equal3;
    }
    total
}

/// Empirical VUS: the tie-corrected proportion of ordered triples.
pub fn vus_empirical(sample: &ThreeClassSample) -> f64 {
    let [n1, n2, n3] = sample.sizes().map(|n| n as u128);
    ordering_count(sample) as f64 / (6 * n1 * n2 * n3) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Measure {
    Ovl,
    Vus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Method {
    Normal,
    BoxcoxNormal,
    Kernel,
    Empirical,
}

/// A valid (measure, method) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Statistic {
    measure: Measure,
    method: Method,
}

impl Statistic {
    pub const OVL_N: Statistic = Statistic {
        measure: Measure::Ovl,
        method: Method::Normal,
    };
    pub const OVL_BC: Statistic = Statistic {
        measure: Measure::Ovl,
        method: Method::BoxcoxNormal,
    };
    pub const OVL_K: Statistic = Statistic {
        measure: Measure::Ovl,
        method: Method::Kernel,
    };
    pub const VUS_N: Statistic = Statistic {
        measure: Measure::Vus,
        method: Method::Normal,
    };
    pub const VUS_BC: Statistic = Statistic {
        measure: Measure::Vus,
        method: Method::BoxcoxNormal,
    };
    pub const VUS_K: Statistic = Statistic {
        measure: Measure::Vus,
        method: Method::Kernel,
    };
    pub const VUS_E: Statistic = Statistic {
        measure: Measure::Vus,
        method: Method::Empirical,
    };

    pub const ALL: [Statistic; 7] = [
        Self::OVL_N,
        Self::OVL_BC,
        Self::OVL_K,
        Self::VUS_N,
        Self::VUS_BC,
        Self::VUS_K,
        Self::VUS_E,
    ];

    pub fn new(measure: Measure, method: Method) -> Result<Self> {
        if measure == Measure::Ovl && method == Method::Empirical {
            return Err(Error::UnsupportedPair {
                measure: measure.to_string(),
                method: method.to_string(),
            });
        }
        Ok(Self { measure, method })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// The statistic's value when the three classes are identical.
    pub fn null_value(&self) -> f64 {
        match self.measure {
            Measure::Ovl => 1.0,
            Measure::Vus => 1.0 / 6.0,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Ovl => "OVL",
            Measure::Vus => "VUS",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Normal => "NORMAL",
            Method::BoxcoxNormal => "BOXCOX_NORMAL",
            Method::Kernel => "KERNEL",
            Method::Empirical => "EMPIRICAL",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OVL" => Ok(Measure::Ovl),
            "VUS" => Ok(Measure::Vus),
            _ => Err(Error::Parse(format!("unknown measure '{s}'"))),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "N" | "NORMAL" => Ok(Method::Normal),
            "BC" | "BOXCOX" | "BOXCOX_NORMAL" => Ok(Method::BoxcoxNormal),
            "K" | "KERNEL" => Ok(Method::Kernel),
            "E" | "EMPIRICAL" => Ok(Method::Empirical),
            _ => Err(Error::Parse(format!("unknown method '{s}'"))),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = match self.method {
            Method::Normal => "N",
            Method::BoxcoxNormal => "BC",
            Method::Kernel => "K",
            Method::Empirical => "E",
        };
        write!(f, "{}_{suffix}", self.measure)
    }
}

impl FromStr for Statistic {
    type Err = Error;

    /// Accepts labels such as `VUS_N`, `ovl_bc` or `VUS_EMPIRICAL`.
    fn from_str(s: &str) -> Result<Self> {
        let (m, k) = s.trim().split_once('_').ok_or_else(|| {
            Error::Parse(format!("statistic '{s}' is not of the form MEASURE_METHOD"))
        })?;
        Statistic::new(m.parse()?, k.parse()?)
    }
}

impl TryFrom<String> for Statistic {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<Statistic> for String {
    fn from(value: Statistic) -> Self {
        value.to_string()
    }
}

/// Percentile bootstrap interval attached to an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    #[serde(rename = "B")]
    pub b: usize,
    /// Resamples that had to be redrawn because the estimator failed.
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub measure: Measure,
    pub method: Method,
    pub value: f64,
    pub ci: Option<ConfidenceInterval>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EstimateResult {
    pub fn statistic(&self) -> Statistic {
        Statistic {
            measure: self.measure,
            method: self.method,
        }
    }
}

/// Computes several statistics on one sample, fitting each model once.
/// Values come back in the order of `stats`.
pub fn evaluate(sample: &ThreeClassSample, stats: &[Statistic]) -> Result<Vec<f64>> {
    evaluate_with_warnings(sample, stats).map(|(v, _)| v)
}

/// Like [`evaluate`], also returning warnings raised by the fits.
pub fn evaluate_with_warnings(
    sample: &ThreeClassSample,
    stats: &[Statistic],
) -> Result<(Vec<f64>, Vec<String>)> {
    let mut normal = None;
    let mut boxcox = None;
    let mut kernel = None;
    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(stats.len());
    for st in stats {
        let v = match st.method {
            Method::Normal => {
                if normal.is_none() {
                    normal = Some(fit_normal_triple(sample)?);
                }
                let fit = normal.as_ref().expect("fitted");
                match st.measure {
                    Measure::Ovl => ovl_normal(fit)?,
                    Measure::Vus => vus_normal(fit)?,
                }
            }
            Method::BoxcoxNormal => {
                if boxcox.is_none() {
                    let bc = fit_box_cox(sample)?;
                    warnings.extend(bc.warnings());
                    let transformed = apply_box_cox(&bc, sample)?;
                    boxcox = Some(fit_normal_triple(&transformed)?);
                }
                let fit = boxcox.as_ref().expect("fitted");
                match st.measure {
                    Measure::Ovl => ovl_normal(fit)?,
                    Measure::Vus => vus_normal(fit)?,
                }
            }
            Method::Kernel => {
                if kernel.is_none() {
                    kernel = Some(kernel_fit(sample)?);
                }
                let fit = kernel.as_ref().expect("fitted");
                match st.measure {
                    Measure::Ovl => ovl_kernel(fit)?,
                    Measure::Vus => vus_kernel(fit)?,
                }
            }
            Method::Empirical => vus_empirical(sample),
        };
        out.push(v);
    }
    Ok((out, warnings))
}

/// Point estimate of one (measure, method) pair.
pub fn estimate(
    sample: &ThreeClassSample,
    measure: Measure,
    method: Method,
) -> Result<EstimateResult> {
    let st = Statistic::new(measure, method)?;
    let (values, warnings) = evaluate_with_warnings(sample, &[st])?;
    Ok(EstimateResult {
        measure,
        method,
        value: values[0],
        ci: None,
        warnings,
    })
}
