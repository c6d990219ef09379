//! Numerical kernels shared by every other module: adaptive Gauss–Kronrod
//! quadrature, bounded scalar maximization, type-7 sample quantiles and
//! summary statistics, plus the standard normal helpers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};
use statrs::function::erf;

use crate::error::{Error, Result};

/// Default absolute quadrature tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Maximum number of panels the adaptive integrator may create.
pub const MAX_PANELS: usize = 100_000;
/// Number of grid points scanned by [`maximize_scalar`] before refinement.
pub const MAXIMIZE_GRID_POINTS: usize = 1001;

/// A finite, non-empty closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "interval bounds must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "interval requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, `0.5 * erfc(-x / sqrt 2)`.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile function.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let mut x = -std::f64::consts::SQRT_2 * erf::erfc_inv(2.0 * p);
    // two Newton steps against the accurate CDF
    for _ in 0..2 {
        let d = std_normal_pdf(x);
        if d > 0.0 {
            x -= (std_normal_cdf(x) - p) / d;
        }
    }
    x
}

/// Density of `N(mu, sigma)`.
#[inline]
pub fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    std_normal_pdf((x - mu) / sigma) / sigma
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn eval_checked<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteIntegrand { abscissa: x })
    }
}

/// One Gauss–Kronrod 15-point panel with QUADPACK's error rescaling.
fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Panel> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval_checked(f, center)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = eval_checked(f, center - dx)?;
        let f2 = eval_checked(f, center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        lo,
        hi,
        value,
        error,
    })
}

/// Outcome of an adaptive integration with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Global adaptive Gauss–Kronrod (7/15) integration of `f` over `domain`,
/// bisecting the panel with the largest error estimate until the summed
/// estimate drops below `tol` or the panel budget is spent.
pub fn integrate_detailed<F: Fn(f64) -> f64>(
    f: F,
    domain: Interval,
    tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let first = gk15(&f, domain.lo, domain.hi)?;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut panels = 1usize;
    // panels too narrow to split further still carry their error
    let mut frozen_error = 0.0;
    let mut frozen_value = 0.0;
    let mut since_resum = 0usize;

    while error > tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        if !(worst.lo < mid && mid < worst.hi) || panels >= max_panels {
            frozen_error += worst.error;
            frozen_value += worst.value;
            if panels >= max_panels {
                let rest_value: f64 = heap.iter().map(|p| p.value).sum();
                let rest_error: f64 = heap.iter().map(|p| p.error).sum();
                return Err(Error::QuadratureFailed {
                    estimate: frozen_value + rest_value,
                    error_bound: frozen_error + rest_error,
                    panels,
                });
            }
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = gk15(&f, worst.lo, mid)?;
        let right = gk15(&f, mid, worst.hi)?;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        since_resum += 1;
        if since_resum == 64 {
            // keep the running error sum from drifting
            error = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
            since_resum = 0;
        }
    }
    let value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
    let error = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
    if error > tol && frozen_error > tol {
        return Err(Error::QuadratureFailed {
            estimate: value,
            error_bound: error,
            panels,
        });
    }
    Ok(Quadrature {
        value,
        error,
        panels,
    })
}

/// Integrates `f` over `domain` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, domain: Interval, tol: f64) -> Result<f64> {
    integrate_detailed(f, domain, tol, MAX_PANELS).map(|q| q.value)
}

/// Integrates over `[lo, hi]` split at the given interior breakpoints, sharing
/// the tolerance across pieces in proportion to their width.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    let domain = Interval::new(lo, hi)?;
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b.is_finite() && b > lo && b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);
    let total = domain.width();
    let mut sum = 0.0;
    for w in edges.windows(2) {
        if w[1] - w[0] <= total * 1e-15 {
            continue;
        }
        let piece_tol = (tol * (w[1] - w[0]) / total).max(tol * 1e-3);
        sum += integrate_adaptive(&f, Interval { lo: w[0], hi: w[1] }, piece_tol)?;
    }
    Ok(sum)
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `g` over `domain`: scans a 1001-point grid, then refines the
/// bracketing cell around the best grid point by golden-section search.
///
/// Returns `(argmax, max)`. Non-finite grid values are skipped; if every grid
/// value is non-finite the search fails.
pub fn maximize_scalar<G: Fn(f64) -> f64>(g: G, domain: Interval, tol: f64) -> Result<(f64, f64)> {
    let values: Vec<f64> = (0..MAXIMIZE_GRID_POINTS)
        .map(|i| g(grid_point(domain, i)))
        .collect();
    maximize_scalar_from_grid(g, &values, domain, tol)
}

/// Abscissa `i` of the maximization grid over `domain`.
pub fn grid_point(domain: Interval, i: usize) -> f64 {
    let n = MAXIMIZE_GRID_POINTS;
    if i >= n - 1 {
        domain.hi
    } else {
        domain.lo + domain.width() / (n - 1) as f64 * i as f64
    }
}

/// [`maximize_scalar`] with the grid scan supplied by the caller, for
/// objectives that can be tabulated on the grid more cheaply than pointwise.
/// `grid_values[i]` approximates `g(grid_point(domain, i))`; only its argmax
/// is used, and the refinement evaluates `g` itself.
pub fn maximize_scalar_from_grid<G: Fn(f64) -> f64>(
    g: G,
    grid_values: &[f64],
    domain: Interval,
    tol: f64,
) -> Result<(f64, f64)> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = MAXIMIZE_GRID_POINTS;
    if grid_values.len() != n {
        return Err(Error::InvalidInput(format!(
            "expected {n} grid values, got {}",
            grid_values.len()
        )));
    }
    let grid = |i: usize| grid_point(domain, i);
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in grid_values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    let (ib, _) = best
        .ok_or_else(|| Error::Optimization("objective is NaN at every grid point".to_string()))?;
    let vb = g(grid(ib));
    let vb = if vb.is_nan() { f64::NEG_INFINITY } else { vb };
    if vb == f64::INFINITY {
        return Ok((grid(ib), vb));
    }

    let mut a = grid(ib.saturating_sub(1));
    let mut b = grid((ib + 1).min(n - 1));
    let eval = |x: f64| {
        let v = g(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = eval(c);
    let mut gd = eval(d);
    while (b - a).abs() > tol {
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = eval(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = eval(d);
        }
    }
    let x = 0.5 * (a + b);
    let gx = eval(x);
    if gx >= vb {
        Ok((x, gx))
    } else {
        Ok((grid(ib), vb))
    }
}

/// Type-7 quantile of already sorted, non-empty data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Type-7 (linear interpolation) sample quantile.
pub fn sample_quantile(data: &[f64], p: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput("quantile of empty data".to_string()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidInput(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "quantile of non-finite data".to_string(),
        ));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, p))
}

/// Summary statistics of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// Standard deviation with divisor `n`.
    pub sd_mle: f64,
    /// Standard deviation with divisor `n - 1`.
    pub sd_sample: f64,
    /// Interquartile range from type-7 quantiles.
    pub iqr: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(data: &[f64]) -> Result<SampleStats> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "summary statistics need at least 2 values, got {n}"
        )));
    }
    if let Some(i) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite value at index {i}"
        )));
    }
    let nf = n as f64;
    let mean = data.iter().sum::<f64>() / nf;
    let ss: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum();
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = (quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25)).max(0.0);
    let min = sorted[0];
    let max = sorted[n - 1];
    Ok(SampleStats {
        n,
        mean: mean.clamp(min, max),
        sd_mle: (ss / nf).sqrt(),
        sd_sample: (ss / (nf - 1.0)).sqrt(),
        iqr,
        min,
        max,
    })
}
