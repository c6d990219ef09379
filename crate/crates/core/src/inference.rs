//! Percentile bootstrap intervals, the pooled-null bootstrap test of
//! informativeness, and OVL interpretation bands.
//!
//! Every bootstrap iteration `b` draws from its own stream keyed by
//! `(seed, tag, b, attempt)`, so results do not depend on thread scheduling
//! and the serial and parallel paths agree bit for bit. An iteration whose
//! resample breaks an estimator is redrawn with the next attempt number; the
//! total number of attempts is capped at `10 * B`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    evaluate, ConfidenceInterval, EstimateResult, Measure, Method, Statistic, ThreeClassSample,
};
use crate::numerics::quantile_sorted;
use crate::rng::{hash_label, RandomStream};

/// Attempts allowed per requested bootstrap replicate.
pub const ATTEMPT_FACTOR: usize = 10;
/// Bootstrap iterations scheduled together between budget checks.
const BOOTSTRAP_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(rename = "B")]
    pub b: usize,
    pub level: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Run bootstrap iterations on the rayon pool.
    #[serde(default)]
    pub parallel: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            b: 500,
            level: 0.95,
            alpha: 0.05,
            seed: 0,
            parallel: false,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 2 {
            return Err(Error::InvalidInput(format!(
                "B must be at least 2, got {}",
                self.b
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// How bootstrap samples are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampling {
    /// With replacement within each class, class sizes preserved.
    Stratified,
    /// With replacement from all values pooled, class sizes preserved.
    PooledNull,
}

impl Resampling {
    fn tag(self) -> u64 {
        match self {
            Resampling::Stratified => hash_label("stratified"),
            Resampling::PooledNull => hash_label("pooled-null"),
        }
    }
}

fn draw_from(pool: &[f64], n: usize, stream: &mut RandomStream) -> Vec<f64> {
    (0..n).map(|_| pool[stream.index(pool.len())]).collect()
}

/// Resamples each class from itself.
pub fn stratified_resample(
    sample: &ThreeClassSample,
    stream: &mut RandomStream,
) -> ThreeClassSample {
    let [a, b, c] = [0, 1, 2].map(|k| draw_from(sample.class(k), sample.class(k).len(), stream));
    ThreeClassSample::new(a, b, c).expect("resample of a valid sample")
}

/// Draws three classes of the original sizes from the pooled values.
pub fn pooled_resample(sample: &ThreeClassSample, stream: &mut RandomStream) -> ThreeClassSample {
    let pool: Vec<f64> = sample.classes().iter().flatten().copied().collect();
    pooled_resample_from(&pool, sample.sizes(), stream)
}

fn pooled_resample_from(
    pool: &[f64],
    sizes: [usize; 3],
    stream: &mut RandomStream,
) -> ThreeClassSample {
    let [a, b, c] = sizes.map(|n| draw_from(pool, n, stream));
    ThreeClassSample::new(a, b, c).expect("resample of a valid sample")
}

/// Bootstrap replicates of several statistics computed on shared resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicates {
    /// `values[j][b]` is statistic `j` on resample `b`.
    pub values: Vec<Vec<f64>>,
    /// Resamples discarded because an estimator failed on them.
    pub redraws: usize,
}

/// Draws `cfg.b` resamples and applies `statistic` to each, redrawing
/// resamples on which it fails. `statistic` must return the same number of
/// values on every call.
pub fn bootstrap_replicates<F>(
    sample: &ThreeClassSample,
    resampling: Resampling,
    cfg: &BootstrapConfig,
    statistic: F,
) -> Result<Replicates>
where
    F: Fn(&ThreeClassSample) -> Result<Vec<f64>> + Sync,
{
    cfg.validate()?;
    let cap = ATTEMPT_FACTOR * cfg.b;
    let tag = resampling.tag();
    let pool: Vec<f64> = match resampling {
        Resampling::PooledNull => sample.classes().iter().flatten().copied().collect(),
        Resampling::Stratified => Vec::new(),
    };
    // one iteration may use whatever the others leave when they succeed at once
    let per_iteration = cap - (cfg.b - 1);
    let one = |b: usize| -> std::result::Result<(Vec<f64>, usize), Error> {
        let mut last = None;
        for attempt in 0..per_iteration {
            let mut stream = RandomStream::derive(cfg.seed, &[tag, b as u64, attempt as u64]);
            let resample = match resampling {
                Resampling::Stratified => stratified_resample(sample, &mut stream),
                Resampling::PooledNull => pooled_resample_from(&pool, sample.sizes(), &mut stream),
            };
            match statistic(&resample) {
                Ok(v) => return Ok((v, attempt + 1)),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one attempt"))
    };
    let exhausted = |attempts: usize, e: Option<Error>| Error::BootstrapExhausted {
        attempts,
        last_error: e.map_or_else(
            || "estimator failed on resamples".to_string(),
            |e| e.to_string(),
        ),
    };
    let mut attempts = 0usize;
    let mut rows = Vec::with_capacity(cfg.b);
    // chunks bound the wasted work once the attempt budget is gone
    for chunk_start in (0..cfg.b).step_by(BOOTSTRAP_CHUNK) {
        let chunk = chunk_start..(chunk_start + BOOTSTRAP_CHUNK).min(cfg.b);
        let runs: Vec<_> = if cfg.parallel {
            chunk.into_par_iter().map(one).collect()
        } else {
            chunk.map(one).collect()
        };
        for r in runs {
            match r {
                Ok((v, a)) => {
                    attempts += a;
                    rows.push(v);
                }
                Err(e) => return Err(exhausted(cap, Some(e))),
            }
        }
        if attempts > cap {
            return Err(exhausted(cap, None));
        }
    }
    let width = rows.first().map_or(0, Vec::len);
    let mut values = vec![Vec::with_capacity(cfg.b); width];
    for row in rows {
        for (j, v) in row.into_iter().enumerate() {
            values[j].push(v);
        }
    }
    let redraws = attempts - cfg.b;
    if redraws > 0 {
        log::debug!("bootstrap redrew {redraws} failed resamples");
    }
    Ok(Replicates { values, redraws })
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Percentile interval of `values` at the given level (type-7 quantiles).
pub fn percentile_interval(values: &[f64], level: f64) -> (f64, f64) {
    let s = sorted(values);
    let tail = (1.0 - level) / 2.0;
    (quantile_sorted(&s, tail), quantile_sorted(&s, 1.0 - tail))
}

/// Point estimates and percentile bootstrap intervals for several statistics
/// from one set of stratified resamples.
pub fn bootstrap_ci_many(
    sample: &ThreeClassSample,
    stats: &[Statistic],
    cfg: &BootstrapConfig,
) -> Result<Vec<EstimateResult>> {
    cfg.validate()?;
    let (point, warnings) = crate::estimators::evaluate_with_warnings(sample, stats)?;
    let reps = bootstrap_replicates(sample, Resampling::Stratified, cfg, |s| evaluate(s, stats))?;
    Ok(stats
        .iter()
        .zip(point)
        .zip(&reps.values)
        .map(|((st, value), boot)| {
            let (lo, hi) = percentile_interval(boot, cfg.level);
            EstimateResult {
                measure: st.measure(),
                method: st.method(),
                value,
                ci: Some(ConfidenceInterval {
                    lo,
                    hi,
                    level: cfg.level,
                    b: cfg.b,
                    redraws: reps.redraws,
                }),
                warnings: warnings.clone(),
            }
        })
        .collect())
}

/// Point estimate with a percentile bootstrap interval.
pub fn bootstrap_ci(
    sample: &ThreeClassSample,
    measure: Measure,
    method: Method,
    cfg: &BootstrapConfig,
) -> Result<EstimateResult> {
    let st = Statistic::new(measure, method)?;
    Ok(bootstrap_ci_many(sample, &[st], cfg)?.remove(0))
}

/// Tail of the null distribution in which informative markers fall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    /// Small values are informative (OVL).
    LowerTail,
    /// Large values are informative (VUS).
    UpperTail,
}

impl Direction {
    pub fn for_measure(measure: Measure) -> Self {
        match measure {
            Measure::Ovl => Direction::LowerTail,
            Measure::Vus => Direction::UpperTail,
        }
    }

    /// Critical value: the `alpha` quantile of the null values for the lower
    /// tail, the `1 - alpha` quantile for the upper tail.
    pub fn critical_value(self, null_values: &[f64], alpha: f64) -> f64 {
        let s = sorted(null_values);
        match self {
            Direction::LowerTail => quantile_sorted(&s, alpha),
            Direction::UpperTail => quantile_sorted(&s, 1.0 - alpha),
        }
    }

    /// Whether `statistic` lies strictly beyond `critical`.
    pub fn rejects(self, statistic: f64, critical: f64) -> bool {
        match self {
            Direction::LowerTail => statistic < critical,
            Direction::UpperTail => statistic > critical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    #[serde(rename = "test")]
    pub which: Statistic,
    /// Observed value of the statistic.
    pub statistic: f64,
    pub null_quantile: f64,
    pub reject: bool,
    pub direction: Direction,
    #[serde(rename = "B")]
    pub b: usize,
    pub redraws: usize,
}

/// Pooled-null bootstrap tests of several statistics on shared resamples.
pub fn null_test_many(
    sample: &ThreeClassSample,
    stats: &[Statistic],
    cfg: &BootstrapConfig,
) -> Result<Vec<TestResult>> {
    cfg.validate()?;
    let observed = evaluate(sample, stats)?;
    let reps = bootstrap_replicates(sample, Resampling::PooledNull, cfg, |s| evaluate(s, stats))?;
    Ok(stats
        .iter()
        .zip(observed)
        .zip(&reps.values)
        .map(|((st, statistic), null_values)| {
            let direction = Direction::for_measure(st.measure());
            let null_quantile = direction.critical_value(null_values, cfg.alpha);
            TestResult {
                which: *st,
                statistic,
                null_quantile,
                reject: direction.rejects(statistic, null_quantile),
                direction,
                b: cfg.b,
                redraws: reps.redraws,
            }
        })
        .collect())
}

/// Tests whether the marker separates the classes at all, calibrating the
/// statistic against resamples drawn from the pooled data.
pub fn null_test(
    sample: &ThreeClassSample,
    measure: Measure,
    method: Method,
    cfg: &BootstrapConfig,
) -> Result<TestResult> {
    let st = Statistic::new(measure, method)?;
    Ok(null_test_many(sample, &[st], cfg)?.remove(0))
}

/// Qualitative reading of an OVL value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OvlBand {
    NoDifferentiation,
    Poor,
    Good,
    VeryGood,
    Excellent,
}

impl fmt::Display for OvlBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OvlBand::NoDifferentiation => "No differentiation",
            OvlBand::Poor => "Poor",
            OvlBand::Good => "Good",
            OvlBand::VeryGood => "Very good",
            OvlBand::Excellent => "Excellent",
        })
    }
}

pub fn interpret_ovl(value: f64) -> Result<OvlBand> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidInput(format!("OVL {value} outside [0, 1]")));
    }
    Ok(if value == 1.0 {
        OvlBand::NoDifferentiation
    } else if value >= 0.75 {
        OvlBand::Poor
    } else if value >= 0.55 {
        OvlBand::Good
    } else if value >= 0.35 {
        OvlBand::VeryGood
    } else {
        OvlBand::Excellent
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(b: usize, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            b,
            seed,
            ..Default::default()
        }
    }

    fn separated() -> ThreeClassSample {
        ThreeClassSample::new(
            vec![-100.0, -100.1, -99.9, -100.05],
            vec![0.0, 0.1, -0.1, 0.05],
            vec![100.0, 100.1, 99.9, 100.05],
        )
        .unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1, 0).validate().is_err());
        assert!(BootstrapConfig {
            level: 1.0,
            ..cfg(10, 0)
        }
        .validate()
        .is_err());
        assert!(BootstrapConfig {
            alpha: 0.0,
            ..cfg(10, 0)
        }
        .validate()
        .is_err());
        assert!(cfg(2, 0).validate().is_ok());
    }

    #[test]
    fn separated_ci_is_degenerate_at_one() {
        let r = bootstrap_ci(&separated(), Measure::Vus, Method::Empirical, &cfg(50, 3)).unwrap();
        let ci = r.ci.unwrap();
        assert_eq!(r.value, 1.0);
        assert!((ci.hi - ci.lo).abs() <= 1e-12 && (ci.lo - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn two_replicates_interpolate_between_min_and_max() {
        let s = ThreeClassSample::new(
            vec![0.0, 1.0, 2.0],
            vec![0.5, 3.0, 1.5],
            vec![2.0, 4.0, 1.0],
        )
        .unwrap();
        let c = cfg(2, 9);
        let reps = bootstrap_replicates(&s, Resampling::Stratified, &c, |x| {
            evaluate(x, &[Statistic::VUS_E])
        })
        .unwrap();
        let v = &reps.values[0];
        let ci = bootstrap_ci(&s, Measure::Vus, Method::Empirical, &c)
            .unwrap()
            .ci
            .unwrap();
        let (lo, hi) = (v[0].min(v[1]), v[0].max(v[1]));
        // type-7 interpolation between the two replicates
        assert!((ci.lo - (lo + 0.025 * (hi - lo))).abs() < 1e-15);
        assert!((ci.hi - (lo + 0.975 * (hi - lo))).abs() < 1e-15);
        assert!(lo <= ci.lo && ci.hi <= hi);
    }

    #[test]
    fn separated_classes_reject_everywhere() {
        let stats = [
            Statistic::OVL_N,
            Statistic::OVL_K,
            Statistic::VUS_N,
            Statistic::VUS_K,
            Statistic::VUS_E,
        ];
        for t in null_test_many(&separated(), &stats, &cfg(100, 4)).unwrap() {
            assert!(t.reject, "{t:?}");
        }
    }

    #[test]
    fn redraws_are_counted_and_capped() {
        // class 1 has a single repeated value 3 times out of 4, so many
        // resamples are constant and break the normal fit
        let s = ThreeClassSample::new(vec![1.0, 1.0, 1.0, 2.0], vec![0.0, 3.0], vec![5.0, 6.0])
            .unwrap();
        let r = bootstrap_ci(&s, Measure::Vus, Method::Normal, &cfg(50, 1)).unwrap();
        assert!(r.ci.unwrap().redraws > 0);
        let hopeless =
            ThreeClassSample::new(vec![1.0, 1.0], vec![0.0, 3.0], vec![5.0, 6.0]).unwrap();
        let err = bootstrap_replicates(&hopeless, Resampling::Stratified, &cfg(5, 1), |x| {
            evaluate(x, &[Statistic::VUS_N])
        })
        .unwrap_err();
        assert!(matches!(
            err,
            Error::BootstrapExhausted { attempts: 50, .. }
        ));
    }

    #[test]
    fn serial_and_parallel_agree() {
        let s = ThreeClassSample::new(
            vec![0.1, 0.7, -0.3, 1.2, 0.4],
            vec![0.9, 1.5, 0.2, 1.1, 2.0],
            vec![1.7, 2.4, 0.8, 3.1, 1.9],
        )
        .unwrap();
        let serial = cfg(64, 5);
        let parallel = BootstrapConfig {
            parallel: true,
            ..serial
        };
        let stats = Statistic::ALL;
        assert_eq!(
            bootstrap_ci_many(&s, &stats, &serial).unwrap(),
            bootstrap_ci_many(&s, &stats, &parallel).unwrap()
        );
        assert_eq!(
            null_test_many(&s, &stats, &serial).unwrap(),
            null_test_many(&s, &stats, &parallel).unwrap()
        );
    }

    #[test]
    fn direction_rules() {
        let null = [0.1, 0.2, 0.3, 0.4, 0.5];
        assert!((Direction::UpperTail.critical_value(&null, 0.25) - 0.4).abs() < 1e-15);
        assert!((Direction::LowerTail.critical_value(&null, 0.25) - 0.2).abs() < 1e-15);
        assert!(Direction::UpperTail.rejects(0.41, 0.4));
        assert!(!Direction::UpperTail.rejects(0.4, 0.4));
        assert!(Direction::LowerTail.rejects(0.19, 0.2));
        assert_eq!(Direction::for_measure(Measure::Ovl), Direction::LowerTail);
    }

    #[test]
    fn ovl_bands() {
        assert_eq!(interpret_ovl(1.0).unwrap(), OvlBand::NoDifferentiation);
        assert_eq!(interpret_ovl(0.1483).unwrap(), OvlBand::Excellent);
        assert_eq!(interpret_ovl(0.60).unwrap(), OvlBand::Good);
        assert_eq!(interpret_ovl(0.75).unwrap(), OvlBand::Poor);
        assert_eq!(interpret_ovl(0.55).unwrap(), OvlBand::Good);
        assert_eq!(interpret_ovl(0.35).unwrap().to_string(), "Very good");
        assert!(interpret_ovl(1.01).is_err());
        assert!(interpret_ovl(-0.1).is_err());
    }
}
