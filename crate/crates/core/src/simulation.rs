//! Scenario registry and Monte Carlo engines.
//!
//! Replication `r` of a scenario at size triple `(n1, n2, n3)` draws from
//! streams keyed by `(seed, scenario id, n1, n2, n3, r)`, so results are
//! reproducible, independent of execution order, and identical between the
//! serial and parallel paths. Keying by the size triple rather than its
//! position also makes reduced-scale runs agree with full runs on shared
//! cells.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{theoretical_ovl, theoretical_vus, DistributionSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    apply_box_cox, evaluate, fit_box_cox, fit_normal_triple, kernel_fit, ovl_kernel, ovl_normal,
    Statistic, ThreeClassSample,
};
use crate::inference::{
    bootstrap_replicates, null_test_many, percentile_interval, BootstrapConfig, Resampling,
};
use crate::published::{BIAS_TABLE, POWER_TABLES};
use crate::rng::{derive_seed, hash_label, RandomStream};

/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 20_250_101;
/// The eight size triples of the power study.
pub const POWER_SIZES: [[usize; 3]; 8] = [
    [20, 20, 20],
    [20, 20, 30],
    [20, 30, 50],
    [30, 50, 50],
    [50, 50, 50],
    [50, 50, 100],
    [50, 100, 100],
    [100, 100, 100],
];
/// Size triples kept at reduced scale.
pub const DESK_SIZES: [[usize; 3]; 3] = [[20, 20, 20], [50, 50, 50], [100, 100, 100]];
/// Common class sizes of the bias study.
pub const BIAS_SIZES: [usize; 3] = [20, 50, 100];
/// Share of failed replications above which a row is flagged.
pub const FAILURE_FLAG_SHARE: f64 = 0.01;

/// Study scale: the full published design or a reduced one for quick checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Full,
    Desk,
}

impl Scale {
    pub fn reps(self) -> usize {
        match self {
            Scale::Full => 1000,
            Scale::Desk => 400,
        }
    }

    pub fn bootstrap(self) -> usize {
        match self {
            Scale::Full => 500,
            Scale::Desk => 200,
        }
    }

    /// Rescales `scenario`: replications, bootstrap count and (for DESK)
    /// the size triples.
    pub fn apply(self, scenario: &mut ScenarioConfig) {
        scenario.reps = self.reps();
        scenario.boot.b = self.bootstrap();
        if self == Scale::Desk {
            let equal_sizes = scenario.sizes.iter().all(|s| s[0] == s[1] && s[1] == s[2]);
            if !equal_sizes {
                scenario.sizes.retain(|s| DESK_SIZES.contains(s));
            }
        }
    }
}

/// One simulation cell family: three class distributions, the sizes to run
/// and the Monte Carlo settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub f1: DistributionSpec,
    pub f2: DistributionSpec,
    pub f3: DistributionSpec,
    pub theoretical_ovl: Option<f64>,
    pub theoretical_vus: Option<f64>,
    pub sizes: Vec<[usize; 3]>,
    pub reps: usize,
    pub boot: BootstrapConfig,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Scenario with the default design (all eight sizes, 1000 replications,
    /// 500 bootstrap resamples).
    pub fn new(id: &str, f1: DistributionSpec, f2: DistributionSpec, f3: DistributionSpec) -> Self {
        Self {
            id: id.to_string(),
            f1,
            f2,
            f3,
            theoretical_ovl: None,
            theoretical_vus: None,
            sizes: POWER_SIZES.to_vec(),
            reps: Scale::Full.reps(),
            boot: BootstrapConfig {
                b: Scale::Full.bootstrap(),
                ..BootstrapConfig::default()
            },
            seed: DEFAULT_SEED,
        }
    }

    fn with_truth(mut self, ovl: f64, vus: f64) -> Self {
        self.theoretical_ovl = Some(ovl);
        self.theoretical_vus = Some(vus);
        self
    }

    fn with_sizes(mut self, sizes: Vec<[usize; 3]>) -> Self {
        self.sizes = sizes;
        self
    }

    pub fn specs(&self) -> [&DistributionSpec; 3] {
        [&self.f1, &self.f2, &self.f3]
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() || self.id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidInput(format!(
                "scenario id '{}' must be a non-empty word",
                self.id
            )));
        }
        for (name, v) in [("ovl", self.theoretical_ovl), ("vus", self.theoretical_vus)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "scenario {}: theoretical {name} {v} outside [0, 1]",
                        self.id
                    )));
                }
            }
        }
        if let Some(s) = self.sizes.iter().find(|s| s.iter().any(|&n| n < 2)) {
            return Err(Error::InvalidInput(format!(
                "scenario {}: every class size must be at least 2, got {s:?}",
                self.id
            )));
        }
        self.boot.validate()
    }

    /// True when all three classes are normal, which selects the plain normal
    /// plug-in as the parametric estimator.
    pub fn all_normal(&self) -> bool {
        self.specs().iter().all(|s| s.is_normal())
    }

    /// The five power-study statistics in table column order.
    pub fn power_statistics(&self) -> [Statistic; 5] {
        let (ovl, vus) = if self.all_normal() {
            (Statistic::OVL_N, Statistic::VUS_N)
        } else {
            (Statistic::OVL_BC, Statistic::VUS_BC)
        };
        [
            ovl,
            vus,
            Statistic::OVL_K,
            Statistic::VUS_K,
            Statistic::VUS_E,
        ]
    }

    /// Recomputes the theoretical OVL and VUS from the distributions.
    pub fn compute_truth(&self) -> Result<(f64, f64)> {
        Ok((
            theoretical_ovl(&self.f1, &self.f2, &self.f3)?,
            theoretical_vus(&self.f1, &self.f2, &self.f3)?,
        ))
    }

    fn replication_seed(&self, sizes: [usize; 3], r: usize) -> u64 {
        derive_seed(
            self.seed,
            &[
                hash_label(&self.id),
                sizes[0] as u64,
                sizes[1] as u64,
                sizes[2] as u64,
                r as u64,
            ],
        )
    }

    /// Sample of replication `r` at `sizes`, and the seed for its bootstrap.
    pub fn replication(&self, sizes: [usize; 3], r: usize) -> (ThreeClassSample, u64) {
        let seed = self.replication_seed(sizes, r);
        let mut stream = RandomStream::derive(seed, &[hash_label("sample")]);
        let [a, b, c] = [0, 1, 2].map(|k| self.specs()[k].sample(sizes[k], &mut stream));
        let sample = ThreeClassSample::new(a, b, c).expect("finite draws");
        (sample, derive_seed(seed, &[hash_label("bootstrap")]))
    }
}

fn spec(text: &str) -> DistributionSpec {
    text.parse().expect("built-in distribution text")
}

fn same3(text: &str) -> (DistributionSpec, DistributionSpec, DistributionSpec) {
    (spec(text), spec(text), spec(text))
}

/// All built-in scenarios: the seventeen power scenarios followed by the
/// seven bias-study scenarios `tt1-1` to `tt1-7`.
///
/// Gamma parameters are (shape, scale). The `gamma-shape-scale` scenario's
/// second parameters 0.6, 0.7 and 0.5 are rates, stored here as the scales
/// 1/0.6, 1/0.7 and 2; only that reading reproduces its stated OVL and VUS.
pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    const NULL_VUS: f64 = 1.0 / 6.0;
    let mut out = Vec::new();
    let mut add = |id: &str,
                   f: (DistributionSpec, DistributionSpec, DistributionSpec),
                   ovl: f64,
                   vus: f64| {
        out.push(ScenarioConfig::new(id, f.0, f.1, f.2).with_truth(ovl, vus));
    };
    let tri = |a: &str, b: &str, c: &str| (spec(a), spec(b), spec(c));
    add("normal-null", same3("normal(0,1)"), 1.0, NULL_VUS);
    add(
        "normal-location",
        tri("normal(0,1)", "normal(0.5,1)", "normal(1,1)"),
        0.6171,
        0.3372,
    );
    add(
        "normal-scale",
        tri("normal(0,1)", "normal(0,1.5)", "normal(0,2)"),
        0.6773,
        0.1668,
    );
    add("lognormal-null", same3("lognormal(0,1)"), 1.0, NULL_VUS);
    add(
        "lognormal-location",
        tri("lognormal(0,1)", "lognormal(0,1)", "lognormal(1,1)"),
        0.6171,
        0.3169,
    );
    add(
        "lognormal-scale",
        tri("lognormal(1,0.5)", "lognormal(1,1)", "lognormal(1,1.5)"),
        0.5157,
        0.1674,
    );
    add("gamma-null", same3("gamma(1,1)"), 1.0, NULL_VUS);
    add(
        "gamma-shape",
        tri("gamma(2,1)", "gamma(3,1)", "gamma(4,1)"),
        0.5295,
        0.3888,
    );
    let gss = (
        DistributionSpec::gamma(0.2, 1.0 / 0.6).expect("valid"),
        DistributionSpec::gamma(0.2, 1.0 / 0.7).expect("valid"),
        DistributionSpec::gamma(0.5, 2.0).expect("valid"),
    );
    add("gamma-shape-scale", gss, 0.6138, 0.3056);
    add(
        "cross-family",
        tri("normal(0,1)", "gamma(2,1)", "lognormal(0,1)"),
        0.3959,
        0.2943,
    );
    let mix_n = "mix(0.5*normal(0,1)+0.5*normal(3,1))";
    add("mix-normal-null", same3(mix_n), 1.0, NULL_VUS);
    let mix_n_loc = tri(
        mix_n,
        "mix(0.5*normal(1,1)+0.5*normal(4,1.5))",
        "mix(0.5*normal(2,1)+0.5*normal(5,2))",
    );
    add("mix-normal-location", mix_n_loc.clone(), 0.5807, 0.3208);
    add(
        "mix-normal-scale",
        tri(
            "mix(0.5*normal(0,1)+0.5*normal(1,0.5))",
            "mix(0.5*normal(0,1.5)+0.5*normal(1,1))",
            "mix(0.5*normal(0,2)+0.5*normal(1,1.5))",
        ),
        0.6784,
        0.1720,
    );
    let mix_g = "mix(0.5*gamma(1,1)+0.5*gamma(4,1))";
    add("mix-gamma-null", same3(mix_g), 1.0, NULL_VUS);
    let two_thirds = (2.0f64 / 3.0).to_string();
    let mix_g_alt = tri(
        mix_g,
        &format!("mix(0.5*gamma(2,1)+0.5*gamma(5,{two_thirds}))"),
        "mix(0.5*gamma(3,1)+0.5*gamma(6,0.5))",
    );
    add("mix-gamma", mix_g_alt.clone(), 0.6609, 0.2583);
    let mix_ng = "mix(0.5*normal(0,1)+0.5*gamma(4,1))";
    add("mix-normal-gamma-null", same3(mix_ng), 1.0, NULL_VUS);
    let mix_ng_alt = tri(
        mix_ng,
        &format!("mix(0.5*normal(1,1)+0.5*gamma(5,{two_thirds}))"),
        "mix(0.5*normal(2,1)+0.5*gamma(6,0.5))",
    );
    add("mix-normal-gamma", mix_ng_alt.clone(), 0.5450, 0.2580);

    let bias_sizes: Vec<[usize; 3]> = BIAS_SIZES.iter().map(|&n| [n, n, n]).collect();
    let sources = [
        "normal-location",
        "lognormal-location",
        "gamma-shape",
        "cross-family",
        "mix-normal-location",
        "mix-gamma",
        "mix-normal-gamma",
    ];
    for (i, src) in sources.iter().enumerate() {
        let base = out
            .iter()
            .find(|s| s.id == *src)
            .expect("source scenario")
            .clone();
        let mut s = base.with_sizes(bias_sizes.clone());
        s.id = format!("tt1-{}", i + 1);
        out.push(s);
    }
    out
}

/// Looks up a built-in scenario by id.
pub fn find_scenario(id: &str) -> Result<ScenarioConfig> {
    let all = builtin_scenarios();
    all.iter()
        .find(|s| s.id == id)
        .cloned()
        .ok_or_else(|| Error::UnknownId {
            kind: "scenario".to_string(),
            id: id.to_string(),
            valid: all
                .iter()
                .map(|s| s.id.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Rejection rate of one statistic in one power cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub statistic: Statistic,
    pub proportion: f64,
    pub mc_se: f64,
}

/// Rejection rates at one size triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub scenario: String,
    pub sizes: [usize; 3],
    pub rates: Vec<RejectionRate>,
    /// Replications that completed and enter the proportions.
    pub replications: usize,
    /// Replications excluded because the bootstrap gave up.
    pub failures: usize,
    /// More than 1% of replications failed.
    pub flagged: bool,
}

impl PowerRow {
    pub fn rate(&self, statistic: Statistic) -> Option<&RejectionRate> {
        self.rates.iter().find(|r| r.statistic == statistic)
    }
}

/// Monte Carlo standard error of a proportion.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    if n == 0 {
        f64::NAN
    } else {
        (p * (1.0 - p) / n as f64).sqrt()
    }
}

fn map_reps<T: Send, F: Fn(usize) -> T + Sync + Send>(reps: usize, parallel: bool, f: F) -> Vec<T> {
    if parallel {
        (0..reps).into_par_iter().map(f).collect()
    } else {
        (0..reps).map(f).collect()
    }
}

/// Runs the pooled-null bootstrap test for every statistic in every
/// replication at every size triple and tallies rejections.
pub fn run_power_study(
    scenario: &ScenarioConfig,
    statistics: &[Statistic],
    parallel: bool,
) -> Result<Vec<PowerRow>> {
    scenario.validate()?;
    if scenario.reps == 0 {
        return Ok(Vec::new());
    }
    let mut rows = Vec::with_capacity(scenario.sizes.len());
    for &sizes in &scenario.sizes {
        let outcomes = map_reps(scenario.reps, parallel, |r| {
            let (sample, seed) = scenario.replication(sizes, r);
            let cfg = BootstrapConfig {
                seed,
                parallel: false,
                ..scenario.boot
            };
            null_test_many(&sample, statistics, &cfg)
        });
        let mut counts = vec![0usize; statistics.len()];
        let mut done = 0usize;
        let mut failures = 0usize;
        for o in outcomes {
            match o {
                Ok(tests) => {
                    done += 1;
                    for (c, t) in counts.iter_mut().zip(tests) {
                        *c += usize::from(t.reject);
                    }
                }
                Err(e) if e.is_numerical() => {
                    log::debug!(
                        "scenario {} {sizes:?}: replication failed: {e}",
                        scenario.id
                    );
                    failures += 1;
                }
                Err(e) => return Err(e),
            }
        }
        let rates = statistics
            .iter()
            .zip(counts)
            .map(|(st, c)| {
                let p = if done == 0 {
                    f64::NAN
                } else {
                    c as f64 / done as f64
                };
                RejectionRate {
                    statistic: *st,
                    proportion: p,
                    mc_se: proportion_se(p, done),
                }
            })
            .collect();
        rows.push(PowerRow {
            scenario: scenario.id.clone(),
            sizes,
            rates,
            replications: done,
            failures,
            flagged: failures as f64 > FAILURE_FLAG_SHARE * scenario.reps as f64,
        });
    }
    Ok(rows)
}

/// Bias, RMSE and interval coverage of one OVL estimator at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub scenario: String,
    pub statistic: Statistic,
    pub sizes: [usize; 3],
    pub bias: f64,
    /// Monte Carlo standard error of `bias`.
    pub bias_se: f64,
    pub rmse: f64,
    pub coverage: f64,
    pub coverage_se: f64,
    pub replications: usize,
    pub failures: usize,
    pub flagged: bool,
}

/// The two OVL estimators of the bias study: the normal plug-in (after a
/// Box-Cox transformation unless all classes are normal) and the kernel one.
pub fn bias_statistics(scenario: &ScenarioConfig) -> [Statistic; 2] {
    [scenario.power_statistics()[0], Statistic::OVL_K]
}

/// Estimator used by [`run_bias_study_with`]: maps a sample to the values of
/// the requested statistics.
pub trait StatisticFn: Fn(&ThreeClassSample, &[Statistic]) -> Result<Vec<f64>> + Sync {}
impl<F: Fn(&ThreeClassSample, &[Statistic]) -> Result<Vec<f64>> + Sync> StatisticFn for F {}

/// Data the kernel OVL estimator sees in the bias study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelInput {
    /// The simulated values themselves.
    Raw,
    /// The values after the Box-Cox transformation fitted for the parametric
    /// estimator, whenever the parametric column is OVL_BC. This reproduces
    /// the published kernel bias figures for the skewed scenarios.
    #[default]
    BoxCox,
}

/// Point estimates of `stats` with the kernel OVL computed on `input` data.
pub fn bias_estimates(
    sample: &ThreeClassSample,
    stats: &[Statistic],
    input: KernelInput,
) -> Result<Vec<f64>> {
    let shares_transform = input == KernelInput::BoxCox && stats.contains(&Statistic::OVL_BC);
    if !shares_transform {
        return evaluate(sample, stats);
    }
    let transformed = apply_box_cox(&fit_box_cox(sample)?, sample)?;
    let mut kernel = None;
    stats
        .iter()
        .map(|st| match *st {
            Statistic::OVL_BC => ovl_normal(&fit_normal_triple(&transformed)?),
            Statistic::OVL_K => {
                if kernel.is_none() {
                    kernel = Some(kernel_fit(&transformed)?);
                }
                ovl_kernel(kernel.as_ref().expect("fitted above"))
            }
            other => Ok(evaluate(sample, &[other])?[0]),
        })
        .collect()
}

/// Bias, RMSE and 95% percentile-interval coverage of the OVL estimators for
/// each scenario and size triple.
pub fn run_bias_study(
    scenarios: &[ScenarioConfig],
    input: KernelInput,
    parallel: bool,
) -> Result<Vec<BiasRow>> {
    run_bias_study_with(
        scenarios,
        parallel,
        |s: &ThreeClassSample, st: &[Statistic]| bias_estimates(s, st, input),
    )
}

/// [`run_bias_study`] with a replaceable estimator, applied both to each
/// simulated sample and to its bootstrap resamples.
pub fn run_bias_study_with<F: StatisticFn>(
    scenarios: &[ScenarioConfig],
    parallel: bool,
    estimator: F,
) -> Result<Vec<BiasRow>> {
    let mut rows = Vec::new();
    for scenario in scenarios {
        scenario.validate()?;
        let truth = scenario.theoretical_ovl.ok_or_else(|| {
            Error::InvalidInput(format!("scenario {} has no theoretical OVL", scenario.id))
        })?;
        let stats = bias_statistics(scenario);
        for &sizes in &scenario.sizes {
            let outcomes = map_reps(scenario.reps, parallel, |r| -> Result<Vec<(f64, bool)>> {
                let (sample, seed) = scenario.replication(sizes, r);
                let cfg = BootstrapConfig {
                    seed,
                    parallel: false,
                    ..scenario.boot
                };
                let point = estimator(&sample, &stats)?;
                let reps = bootstrap_replicates(&sample, Resampling::Stratified, &cfg, |s| {
                    estimator(s, &stats)
                })?;
                Ok(point
                    .into_iter()
                    .zip(&reps.values)
                    .map(|(v, boot)| {
                        let (lo, hi) = percentile_interval(boot, cfg.level);
                        (v, lo <= truth && truth <= hi)
                    })
                    .collect())
            });
            let mut ok = Vec::new();
            let mut failures = 0usize;
            for o in outcomes {
                match o {
                    Ok(v) => ok.push(v),
                    Err(e) if e.is_numerical() => failures += 1,
                    Err(e) => return Err(e),
                }
            }
            let n = ok.len();
            for (j, st) in stats.iter().enumerate() {
                let errs: Vec<f64> = ok.iter().map(|v| v[j].0 - truth).collect();
                let covered = ok.iter().filter(|v| v[j].1).count();
                let nf = n as f64;
                let bias = errs.iter().sum::<f64>() / nf;
                let var = if n > 1 {
                    errs.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>() / (nf - 1.0)
                } else {
                    f64::NAN
                };
                let coverage = covered as f64 / nf;
                rows.push(BiasRow {
                    scenario: scenario.id.clone(),
                    statistic: *st,
                    sizes,
                    bias,
                    bias_se: (var / nf).sqrt(),
                    rmse: (errs.iter().map(|e| e * e).sum::<f64>() / nf).sqrt(),
                    coverage,
                    coverage_se: proportion_se(coverage, n),
                    replications: n,
                    failures,
                    flagged: failures as f64 > FAILURE_FLAG_SHARE * scenario.reps as f64,
                });
            }
        }
    }
    Ok(rows)
}

/// One machine-readable output row of a reproduced table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table_id: String,
    pub scenario: String,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub statistic: String,
    /// `rejection` for power tables; `bias`, `rmse` or `coverage` for the
    /// bias table.
    pub quantity: String,
    pub value: f64,
    pub mc_se: Option<f64>,
    pub published_value: Option<f64>,
}

/// A reproduced table: aligned text plus its rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproducedTable {
    pub table_id: String,
    pub scale: Scale,
    pub text: String,
    pub rows: Vec<TableRow>,
}

/// Power scenario ids that have a table, in registry order.
fn power_table_ids() -> Vec<String> {
    POWER_TABLES
        .iter()
        .map(|(id, _)| format!("power/{id}"))
        .collect()
}

pub const BIAS_TABLE_ID: &str = "bias/tt1";

/// Ids accepted by [`reproduce_table`].
pub fn table_ids() -> Vec<String> {
    let mut ids = power_table_ids();
    ids.push(BIAS_TABLE_ID.to_string());
    ids
}

fn published_power(id: &str, sizes: [usize; 3], column: usize) -> Option<f64> {
    POWER_TABLES
        .iter()
        .find(|(sid, _)| *sid == id)?
        .1
        .iter()
        .find(|(s, _)| *s == sizes)
        .map(|(_, v)| v[column])
}

fn published_bias(
    scenario_index: usize,
    statistic: Statistic,
    n: usize,
    quantity: usize,
) -> Option<f64> {
    let col = BIAS_SIZES.iter().position(|&m| m == n)?;
    let parametric = statistic != Statistic::OVL_K;
    BIAS_TABLE
        .iter()
        .find(|(i, label, _)| *i == scenario_index && (*label == "OVL_K") != parametric)
        .map(|(_, _, v)| v[quantity * 3 + col])
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

/// Runs the study behind a built-in table at the given scale and formats it
/// next to the published values.
pub fn reproduce_table(table_id: &str, scale: Scale, parallel: bool) -> Result<ReproducedTable> {
    if table_id == BIAS_TABLE_ID {
        return reproduce_bias_table(scale, parallel);
    }
    let scenario_id = table_id
        .strip_prefix("power/")
        .filter(|id| POWER_TABLES.iter().any(|(sid, _)| sid == id))
        .ok_or_else(|| Error::UnknownId {
            kind: "table".to_string(),
            id: table_id.to_string(),
            valid: table_ids().join(", "),
        })?;
    let mut scenario = find_scenario(scenario_id)?;
    scale.apply(&mut scenario);
    let stats = scenario.power_statistics();
    let power = run_power_study(&scenario, &stats, parallel)?;
    let mut rows = Vec::new();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{table_id}  {} / {} / {}  (reps={}, B={})",
        scenario.f1, scenario.f2, scenario.f3, scenario.reps, scenario.boot.b
    );
    let _ = write!(text, "{:<16}", "(n1,n2,n3)");
    for st in &stats {
        let _ = write!(text, " {:>22}", format!("{st} (published)"));
    }
    text.push('\n');
    for row in &power {
        let [n1, n2, n3] = row.sizes;
        let _ = write!(text, "{:<16}", format!("({n1},{n2},{n3})"));
        for (col, rate) in row.rates.iter().enumerate() {
            let published = published_power(scenario_id, row.sizes, col);
            let _ = write!(
                text,
                " {:>22}",
                format!(
                    "{:.3}±{:.3} ({})",
                    rate.proportion,
                    rate.mc_se,
                    fmt_opt(published)
                )
            );
            rows.push(TableRow {
                table_id: table_id.to_string(),
                scenario: scenario.id.clone(),
                n1,
                n2,
                n3,
                statistic: rate.statistic.to_string(),
                quantity: "rejection".to_string(),
                value: rate.proportion,
                mc_se: Some(rate.mc_se),
                published_value: published,
            });
        }
        if row.flagged {
            let _ = write!(text, "  [{} failed replications]", row.failures);
        }
        text.push('\n');
    }
    Ok(ReproducedTable {
        table_id: table_id.to_string(),
        scale,
        text,
        rows,
    })
}

fn reproduce_bias_table(scale: Scale, parallel: bool) -> Result<ReproducedTable> {
    let mut scenarios: Vec<ScenarioConfig> = builtin_scenarios()
        .into_iter()
        .filter(|s| s.id.starts_with("tt1-"))
        .collect();
    for s in &mut scenarios {
        scale.apply(s);
    }
    let result = run_bias_study(&scenarios, KernelInput::default(), parallel)?;
    let (reps, b) = (scale.reps(), scale.bootstrap());
    let text = format!(
        "{BIAS_TABLE_ID}  (reps={reps}, B={b}; published values in parentheses)\n{}",
        format_bias_rows(&result)
    );
    Ok(ReproducedTable {
        table_id: BIAS_TABLE_ID.to_string(),
        scale,
        text,
        rows: bias_rows_to_table(&result, BIAS_TABLE_ID),
    })
}

/// Published bias, RMSE and coverage for a row of a `tt1-*` scenario.
fn published_bias_row(row: &BiasRow) -> [Option<f64>; 3] {
    let index = row
        .scenario
        .strip_prefix("tt1-")
        .and_then(|i| i.parse().ok());
    let [n1, n2, n3] = row.sizes;
    [0, 1, 2].map(|q| match index {
        Some(i) if n1 == n2 && n2 == n3 => published_bias(i, row.statistic, n1, q),
        _ => None,
    })
}

/// Aligned text of bias-study rows with published values in parentheses.
pub fn format_bias_rows(rows: &[BiasRow]) -> String {
    let mut text = format!(
        "{:<20} {:<8} {:>16} {:>24} {:>18} {:>22}\n",
        "scenario", "stat", "(n1,n2,n3)", "bias", "rmse", "coverage"
    );
    for r in rows {
        let published = published_bias_row(r);
        let [n1, n2, n3] = r.sizes;
        let _ = writeln!(
            text,
            "{:<20} {:<8} {:>16} {:>24} {:>18} {:>22}{}",
            r.scenario,
            r.statistic.to_string(),
            format!("({n1},{n2},{n3})"),
            format!(
                "{:+.3}±{:.3} ({})",
                r.bias,
                r.bias_se,
                fmt_opt(published[0])
            ),
            format!("{:.3} ({})", r.rmse, fmt_opt(published[1])),
            format!(
                "{:.3}±{:.3} ({})",
                r.coverage,
                r.coverage_se,
                fmt_opt(published[2])
            ),
            if r.flagged {
                format!("  [{} failed]", r.failures)
            } else {
                String::new()
            }
        );
    }
    text
}

/// Rows of a bias study in the common output layout, three per input row
/// (bias, rmse, coverage).
pub fn bias_rows_to_table(rows: &[BiasRow], table_id: &str) -> Vec<TableRow> {
    rows.iter()
        .flat_map(|r| {
            let published = published_bias_row(r);
            [
                ("bias", r.bias, Some(r.bias_se)),
                ("rmse", r.rmse, None),
                ("coverage", r.coverage, Some(r.coverage_se)),
            ]
            .into_iter()
            .zip(published)
            .map(move |((name, value, se), published_value)| TableRow {
                table_id: table_id.to_string(),
                scenario: r.scenario.clone(),
                n1: r.sizes[0],
                n2: r.sizes[1],
                n3: r.sizes[2],
                statistic: r.statistic.to_string(),
                quantity: name.to_string(),
                value,
                mc_se: se,
                published_value,
            })
        })
        .collect()
}

/// Rows of a power study in the common output layout.
pub fn power_rows_to_table(rows: &[PowerRow]) -> Vec<TableRow> {
    rows.iter()
        .flat_map(|row| {
            let [n1, n2, n3] = row.sizes;
            row.rates
                .iter()
                .enumerate()
                .map(move |(col, rate)| TableRow {
                    table_id: format!("power/{}", row.scenario),
                    scenario: row.scenario.clone(),
                    n1,
                    n2,
                    n3,
                    statistic: rate.statistic.to_string(),
                    quantity: "rejection".to_string(),
                    value: rate.proportion,
                    mc_se: Some(rate.mc_se),
                    published_value: published_power(&row.scenario, row.sizes, col),
                })
        })
        .collect()
}

pub fn write_rows_csv<W: io::Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_json(rows: &[TableRow]) -> Result<String> {
    Ok(serde_json::to_string_pretty(rows)?)
}

fn parse_sizes(text: &str) -> Result<Vec<[usize; 3]>> {
    text.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let parts: Vec<&str> = t
                .trim_matches(|c| c == '(' || c == ')')
                .split(',')
                .map(str::trim)
                .collect();
            let nums: Vec<usize> = parts
                .iter()
                .map(|p| p.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad size triple '{t}'")))?;
            <[usize; 3]>::try_from(nums)
                .map_err(|_| Error::Parse(format!("size triple '{t}' needs three numbers")))
        })
        .collect()
}

fn parse_number<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad value '{value}' for {key}")))
}

/// Parses a scenario file: blocks of `key = value` lines, each opened by
/// `id = ...`, followed by `f1`, `f2`, `f3` and optionally `ovl`, `vus`,
/// `sizes` (`20,20,20; 50,50,50`), `reps`, `B` and `seed`. Lines starting
/// with `#` are comments.
pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioConfig>> {
    #[derive(Default)]
    struct Block {
        id: String,
        line: usize,
        fields: BTreeMap<String, (String, usize)>,
    }
    let mut blocks: Vec<Block> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {line_no}: expected 'key = value'")))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim().to_string());
        if key == "id" {
            blocks.push(Block {
                id: value,
                line: line_no,
                ..Default::default()
            });
            continue;
        }
        let block = blocks
            .last_mut()
            .ok_or_else(|| Error::Parse(format!("line {line_no}: '{key}' before any 'id'")))?;
        if !["f1", "f2", "f3", "ovl", "vus", "sizes", "reps", "b", "seed"].contains(&key.as_str()) {
            return Err(Error::Parse(format!("line {line_no}: unknown key '{key}'")));
        }
        if block.fields.insert(key.clone(), (value, line_no)).is_some() {
            return Err(Error::Parse(format!(
                "line {line_no}: duplicate key '{key}'"
            )));
        }
    }
    blocks
        .into_iter()
        .map(|b| {
            let get_spec = |k: &str| -> Result<DistributionSpec> {
                let (v, line) = b.fields.get(k).ok_or_else(|| {
                    Error::Parse(format!("scenario '{}' (line {}) lacks {k}", b.id, b.line))
                })?;
                v.parse()
                    .map_err(|e: Error| Error::Parse(format!("line {line}: {e}")))
            };
            let mut s =
                ScenarioConfig::new(&b.id, get_spec("f1")?, get_spec("f2")?, get_spec("f3")?);
            for (k, (v, line)) in &b.fields {
                match k.as_str() {
                    "ovl" => s.theoretical_ovl = Some(parse_number(k, v, *line)?),
                    "vus" => s.theoretical_vus = Some(parse_number(k, v, *line)?),
                    "sizes" => s.sizes = parse_sizes(v)?,
                    "reps" => s.reps = parse_number(k, v, *line)?,
                    "b" => s.boot.b = parse_number(k, v, *line)?,
                    "seed" => s.seed = parse_number(k, v, *line)?,
                    _ => {}
                }
            }
            s.validate()?;
            Ok(s)
        })
        .collect()
}

/// Writes scenarios in the format read by [`parse_scenarios`].
pub fn format_scenarios(scenarios: &[ScenarioConfig]) -> String {
    let mut out = String::new();
    for (i, s) in scenarios.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "id = {}", s.id);
        let _ = writeln!(out, "f1 = {}", s.f1);
        let _ = writeln!(out, "f2 = {}", s.f2);
        let _ = writeln!(out, "f3 = {}", s.f3);
        if let Some(v) = s.theoretical_ovl {
            let _ = writeln!(out, "ovl = {v}");
        }
        if let Some(v) = s.theoretical_vus {
            let _ = writeln!(out, "vus = {v}");
        }
        let sizes: Vec<String> = s
            .sizes
            .iter()
            .map(|t| format!("{},{},{}", t[0], t[1], t[2]))
            .collect();
        let _ = writeln!(out, "sizes = {}", sizes.join("; "));
        let _ = writeln!(out, "reps = {}", s.reps);
        let _ = writeln!(out, "B = {}", s.boot.b);
        let _ = writeln!(out, "seed = {}", s.seed);
    }
    out
}

impl fmt::Display for PowerRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [n1, n2, n3] = self.sizes;
        write!(f, "{} ({n1},{n2},{n3})", self.scenario)?;
        for r in &self.rates {
            write!(f, " {}={:.3}±{:.3}", r.statistic, r.proportion, r.mc_se)?;
        }
        Ok(())
    }
}
