//! Marker analysis: normality screening, estimates with bootstrap intervals,
//! OVL interpretation and density grids for plotting.

use std::fmt::{self, Write as _};
use std::io;

use serde::{Deserialize, Serialize};

use crate::dataset::{orient, MarkerDataset};
use crate::error::{Error, Result};
use crate::estimators::{
    evaluate_with_warnings, fit_normal_triple, kernel_fit, EstimateResult, Measure, Method,
    Statistic, ThreeClassSample,
};
use crate::inference::{
    bootstrap_ci_many, interpret_ovl, null_test_many, BootstrapConfig, OvlBand, TestResult,
};
use crate::normality::{shapiro_wilk, DEFAULT_THRESHOLD};
use crate::numerics::normal_pdf;

/// Shapiro–Wilk result for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassNormality {
    pub label: String,
    pub n: usize,
    pub w: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub classes: Vec<ClassNormality>,
    pub threshold: f64,
    /// Every class has p ≥ threshold.
    pub overall_normal: bool,
}

/// Shapiro–Wilk test of each class.
pub fn normality_report(dataset: &MarkerDataset, threshold: f64) -> Result<NormalityReport> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidInput(format!(
            "normality threshold {threshold} must lie in (0, 1)"
        )));
    }
    let classes = (0..3)
        .map(|k| {
            let data = dataset.sample.class(k);
            let sw = shapiro_wilk(data).map_err(|e| {
                Error::Data(format!(
                    "Shapiro-Wilk for class '{}': {e}",
                    dataset.class_labels[k]
                ))
            })?;
            Ok(ClassNormality {
                label: dataset.class_labels[k].clone(),
                n: data.len(),
                w: sw.w,
                p_value: sw.p_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let overall_normal = classes.iter().all(|c| c.p_value >= threshold);
    Ok(NormalityReport {
        classes,
        threshold,
        overall_normal,
    })
}

/// Settings of [`analyze_marker`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Estimation methods. With `auto_parametric`, `Normal` and
    /// `BoxcoxNormal` both stand for the parametric method picked by the
    /// normality screen.
    pub methods: Vec<Method>,
    /// Bootstrap settings for the intervals; `None` gives point estimates only.
    pub bootstrap: Option<BootstrapConfig>,
    pub normality_threshold: f64,
    pub auto_parametric: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            methods: vec![Method::Normal, Method::Kernel, Method::Empirical],
            bootstrap: Some(BootstrapConfig::default()),
            normality_threshold: DEFAULT_THRESHOLD,
            auto_parametric: true,
        }
    }
}

/// An estimate plus, for OVL, its qualitative band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEstimate {
    #[serde(flatten)]
    pub estimate: EstimateResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<OvlBand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerReport {
    pub marker: String,
    pub class_labels: [String; 3],
    pub sizes: [usize; 3],
    pub orientation_sign: i8,
    pub dropped_rows: usize,
    pub normality: NormalityReport,
    /// Parametric method chosen by the normality screen.
    pub parametric: Method,
    pub estimates: Vec<ReportEstimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl MarkerReport {
    pub fn estimate(&self, statistic: Statistic) -> Option<&ReportEstimate> {
        self.estimates
            .iter()
            .find(|e| e.estimate.statistic() == statistic)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Statistics requested by `methods`: OVL and VUS for each method, VUS only
/// for the empirical one, with the parametric method replaced by `parametric`
/// when `auto_parametric` is set. Duplicates are dropped.
pub fn requested_statistics(
    methods: &[Method],
    parametric: Method,
    auto_parametric: bool,
) -> Vec<Statistic> {
    let mut out = Vec::new();
    for &m in methods {
        let m = match m {
            Method::Normal | Method::BoxcoxNormal if auto_parametric => parametric,
            other => other,
        };
        for measure in [Measure::Ovl, Measure::Vus] {
            if let Ok(st) = Statistic::new(measure, m) {
                if !out.contains(&st) {
                    out.push(st);
                }
            }
        }
    }
    out
}

fn screened(
    dataset: &MarkerDataset,
    opts: &AnalysisOptions,
) -> Result<(MarkerDataset, NormalityReport, Method)> {
    if opts.methods.is_empty() {
        return Err(Error::InvalidInput(
            "no estimation method requested".to_string(),
        ));
    }
    let ds = orient(dataset);
    let normality = normality_report(&ds, opts.normality_threshold)?;
    let parametric = if normality.overall_normal {
        Method::Normal
    } else {
        Method::BoxcoxNormal
    };
    Ok((ds, normality, parametric))
}

/// Orients the marker, screens each class for normality, picks the
/// parametric method (NORMAL when every class passes, BOXCOX_NORMAL
/// otherwise) and computes the requested estimates.
pub fn analyze_marker(dataset: &MarkerDataset, opts: &AnalysisOptions) -> Result<MarkerReport> {
    let (ds, normality, parametric) = screened(dataset, opts)?;
    let stats = requested_statistics(&opts.methods, parametric, opts.auto_parametric);
    let results = match &opts.bootstrap {
        Some(cfg) => bootstrap_ci_many(&ds.sample, &stats, cfg)?,
        None => {
            let (values, warnings) = evaluate_with_warnings(&ds.sample, &stats)?;
            stats
                .iter()
                .zip(values)
                .map(|(st, value)| EstimateResult {
                    measure: st.measure(),
                    method: st.method(),
                    value,
                    ci: None,
                    warnings: if st.method() == Method::BoxcoxNormal {
                        warnings.clone()
                    } else {
                        Vec::new()
                    },
                })
                .collect()
        }
    };
    let estimates = results
        .into_iter()
        .map(|estimate| {
            let band = match estimate.measure {
                Measure::Ovl => Some(interpret_ovl(estimate.value)?),
                Measure::Vus => None,
            };
            Ok(ReportEstimate { estimate, band })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarkerReport {
        marker: ds.marker_name.clone(),
        class_labels: ds.class_labels.clone(),
        sizes: ds.sample.sizes(),
        orientation_sign: ds.orientation_sign,
        dropped_rows: ds.dropped_rows,
        normality,
        parametric,
        estimates,
        warnings: ds.warnings,
    })
}

/// Pooled-null bootstrap tests of the statistics [`analyze_marker`] would
/// report.
pub fn test_marker(
    dataset: &MarkerDataset,
    opts: &AnalysisOptions,
    cfg: &BootstrapConfig,
) -> Result<Vec<TestResult>> {
    let (ds, _, parametric) = screened(dataset, opts)?;
    let stats = requested_statistics(&opts.methods, parametric, opts.auto_parametric);
    null_test_many(&ds.sample, &stats, cfg)
}

impl fmt::Display for MarkerReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [n1, n2, n3] = self.sizes;
        let [l1, l2, l3] = &self.class_labels;
        writeln!(
            f,
            "marker {}: {l1} (n={n1}), {l2} (n={n2}), {l3} (n={n3})",
            self.marker
        )?;
        if self.orientation_sign < 0 {
            writeln!(f, "values negated so that class means increase")?;
        }
        writeln!(f, "Shapiro-Wilk (threshold {}):", self.normality.threshold)?;
        for c in &self.normality.classes {
            writeln!(f, "  {:<10} W = {:.4}  p = {:.4}", c.label, c.w, c.p_value)?;
        }
        writeln!(f, "parametric method: {}", self.parametric)?;
        writeln!(
            f,
            "{:<8} {:>8}  {:<20} interpretation",
            "estimate", "value", "CI"
        )?;
        for e in &self.estimates {
            let ci = e.estimate.ci.map_or_else(
                || "-".to_string(),
                |ci| format!("[{:.4}, {:.4}]", ci.lo, ci.hi),
            );
            let band = e.band.map_or_else(String::new, |b| b.to_string());
            let line = format!(
                "{:<8} {:>8.4}  {:<20} {band}",
                e.estimate.statistic().to_string(),
                e.estimate.value,
                ci
            );
            writeln!(f, "{}", line.trim_end())?;
            for w in &e.estimate.warnings {
                writeln!(f, "  warning: {w}")?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Class densities and distribution functions on a grid, for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityGridRow {
    pub class: usize,
    pub x: f64,
    pub kernel_pdf: f64,
    pub normal_pdf: f64,
    pub kernel_cdf: f64,
    pub ecdf: f64,
}

/// Evaluates each class's kernel and fitted normal density, kernel CDF and
/// empirical CDF at `points` equally spaced values covering the data.
pub fn density_grid(sample: &ThreeClassSample, points: usize) -> Result<Vec<DensityGridRow>> {
    if points < 2 {
        return Err(Error::InvalidInput(format!(
            "density grid needs at least 2 points, got {points}"
        )));
    }
    let kernel = kernel_fit(sample)?;
    let normal = fit_normal_triple(sample)?;
    let pad = 3.0 * kernel.bandwidths().iter().copied().fold(0.0, f64::max);
    let (lo, hi) = (sample.min() - pad, sample.max() + pad);
    let step = (hi - lo) / (points - 1) as f64;
    let mut rows = Vec::with_capacity(3 * points);
    for k in 0..3 {
        let data = sample.class(k);
        for i in 0..points {
            let x = lo + step * i as f64;
            rows.push(DensityGridRow {
                class: k + 1,
                x,
                kernel_pdf: kernel.class(k).pdf(x),
                normal_pdf: normal_pdf(x, normal.mu[k], normal.sigma[k]),
                kernel_cdf: kernel.class(k).cdf(x),
                ecdf: data.iter().filter(|&&v| v <= x).count() as f64 / data.len() as f64,
            });
        }
    }
    Ok(rows)
}

pub fn write_density_grid_csv<W: io::Write>(rows: &[DensityGridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table of test results.
pub fn format_tests(tests: &[TestResult]) -> String {
    let mut out = format!(
        "{:<8} {:>10} {:>14} {:>8}\n",
        "test", "statistic", "null quantile", "reject"
    );
    for t in tests {
        let _ = writeln!(
            out,
            "{:<8} {:>10.4} {:>14.4} {:>8}",
            t.which.to_string(),
            t.statistic,
            t.null_quantile,
            if t.reject { "yes" } else { "no" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use rand_distr::{Distribution, LogNormal, Normal};

    fn labels() -> [String; 3] {
        ["a".to_string(), "b".to_string(), "c".to_string()]
    }

    fn normal_dataset(seed: u64, n: usize, shift: f64) -> MarkerDataset {
        let mut s = RandomStream::new(seed);
        let mut draw = |m: f64| -> Vec<f64> {
            let d = Normal::new(m, 1.0).unwrap();
            (0..n).map(|_| d.sample(&mut s)).collect()
        };
        let (a, b, c) = (draw(0.0), draw(shift), draw(2.0 * shift));
        MarkerDataset::new("m", ThreeClassSample::new(a, b, c).unwrap(), labels()).unwrap()
    }

    #[test]
    fn statistic_selection() {
        let m = [Method::Normal, Method::Kernel, Method::Empirical];
        let got = requested_statistics(&m, Method::BoxcoxNormal, true);
        assert_eq!(
            got,
            vec![
                Statistic::OVL_BC,
                Statistic::VUS_BC,
                Statistic::OVL_K,
                Statistic::VUS_K,
                Statistic::VUS_E
            ]
        );
        let got = requested_statistics(
            &[Method::Normal, Method::BoxcoxNormal],
            Method::Normal,
            false,
        );
        assert_eq!(
            got,
            vec![
                Statistic::OVL_N,
                Statistic::VUS_N,
                Statistic::OVL_BC,
                Statistic::VUS_BC
            ]
        );
    }

    #[test]
    fn separated_marker_is_excellent() {
        let a: Vec<f64> = (0..10).map(|i| f64::from(i) * 0.1).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 100.0).collect();
        let c: Vec<f64> = a.iter().map(|x| x + 200.0).collect();
        let ds =
            MarkerDataset::new("sep", ThreeClassSample::new(a, b, c).unwrap(), labels()).unwrap();
        let opts = AnalysisOptions {
            bootstrap: None,
            ..Default::default()
        };
        let report = analyze_marker(&ds, &opts).unwrap();
        for e in &report.estimates {
            match e.estimate.measure {
                Measure::Ovl => {
                    assert!(e.estimate.value < 1e-6, "{e:?}");
                    assert_eq!(e.band, Some(OvlBand::Excellent));
                }
                Measure::Vus => assert!(e.estimate.value > 1.0 - 1e-6, "{e:?}"),
            }
        }
    }

    #[test]
    fn report_round_trips_through_json() {
        let ds = normal_dataset(4, 25, 0.8);
        let opts = AnalysisOptions {
            bootstrap: Some(BootstrapConfig {
                b: 30,
                ..Default::default()
            }),
            ..Default::default()
        };
        let report = analyze_marker(&ds, &opts).unwrap();
        assert_eq!(report.estimates.len(), 5);
        assert!(report.estimates.iter().all(|e| e.estimate.ci.is_some()));
        assert_eq!(
            MarkerReport::from_json(&report.to_json().unwrap()).unwrap(),
            report
        );
        assert!(report.to_string().contains("OVL_K"));
    }

    #[test]
    fn decreasing_marker_is_oriented() {
        let ds = normal_dataset(5, 20, -3.0);
        let report = analyze_marker(
            &ds,
            &AnalysisOptions {
                bootstrap: None,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(report.orientation_sign, -1);
        assert!(report.estimate(Statistic::VUS_E).unwrap().estimate.value > 0.8);
    }

    #[test]
    fn skewed_marker_selects_box_cox() {
        let mut s = RandomStream::new(8);
        let mut draw = |scale: f64| -> Vec<f64> {
            let d = LogNormal::new(scale.ln(), 1.2).unwrap();
            (0..60).map(|_| d.sample(&mut s)).collect()
        };
        let (a, b, c) = (draw(1.0), draw(2.0), draw(4.0));
        let ds =
            MarkerDataset::new("skew", ThreeClassSample::new(a, b, c).unwrap(), labels()).unwrap();
        let report = analyze_marker(
            &ds,
            &AnalysisOptions {
                bootstrap: None,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!report.normality.overall_normal);
        assert_eq!(report.parametric, Method::BoxcoxNormal);
        assert!(report.estimate(Statistic::OVL_BC).is_some());
    }

    #[test]
    fn density_grid_shape() {
        let ds = normal_dataset(6, 15, 1.0);
        let rows = density_grid(&ds.sample, 50).unwrap();
        assert_eq!(rows.len(), 150);
        for k in 1..=3 {
            let class: Vec<_> = rows.iter().filter(|r| r.class == k).collect();
            assert!(class[0].ecdf == 0.0 && class[49].ecdf == 1.0);
            assert!(class.windows(2).all(|w| w[1].kernel_cdf >= w[0].kernel_cdf));
        }
        let mut buf = Vec::new();
        write_density_grid_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("class,x,kernel_pdf,normal_pdf,kernel_cdf,ecdf\n"));
        assert!(density_grid(&ds.sample, 1).is_err());
    }
}
