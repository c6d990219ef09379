//! Class marker distributions and their ground-truth OVL / VUS values.
//!
//! A [`DistributionSpec`] is validated on construction, so density, CDF and
//! sampling are infallible afterwards. Specs have a canonical text form
//! (`normal(0,1)`, `lognormal(1,0.5)`, `gamma(2,1)`,
//! `mix(0.5*normal(0,1)+0.5*gamma(4,1))`) used by scenario files and the CLI.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::numerics::{self, std_normal_cdf, std_normal_pdf};
use crate::rng::RandomStream;

/// Probability mass left out on each side when truncating the integration
/// domain for theoretical values.
const TAIL_MASS: f64 = 1e-10;
/// Quadrature tolerance for theoretical OVL and VUS.
pub const THEORETICAL_TOLERANCE: f64 = 1e-6;
/// Power used to tame density singularities at the origin (`x = u^5`).
const ORIGIN_POWER: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Mean and standard deviation.
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// Mean and standard deviation of `log X`.
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    /// Finite mixture of non-mixture components.
    Mixture {
        weights: Vec<f64>,
        components: Vec<DistributionSpec>,
    },
}

/// A validated marker distribution for one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DistributionSpec {
    family: Family,
    // log normalizing constant of the gamma density, ln Γ(k) + k ln θ
    log_norm: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be finite, got {v}"
        )))
    }
}

impl DistributionSpec {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("normal mean", mu)?;
        check_positive("normal sigma", sigma)?;
        Ok(Self {
            family: Family::Normal { mu, sigma },
            log_norm: 0.0,
        })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("lognormal mu", mu)?;
        check_positive("lognormal sigma", sigma)?;
        Ok(Self {
            family: Family::LogNormal { mu, sigma },
            log_norm: 0.0,
        })
    }

    pub fn gamma(shape: f64, scale: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        check_positive("gamma scale", scale)?;
        Ok(Self {
            family: Family::Gamma { shape, scale },
            log_norm: ln_gamma(shape) + shape * scale.ln(),
        })
    }

    pub fn mixture(weights: Vec<f64>, components: Vec<DistributionSpec>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidInput(format!(
                "mixture needs matching non-empty weights and components ({} vs {})",
                weights.len(),
                components.len()
            )));
        }
        if weights
            .iter()
            .any(|w| !(w.is_finite() && *w >= 0.0 && *w <= 1.0))
        {
            return Err(Error::InvalidInput(
                "mixture weights must lie in [0, 1]".to_string(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "mixture weights must sum to 1, got {total}"
            )));
        }
        if components
            .iter()
            .any(|c| matches!(c.family, Family::Mixture { .. }))
        {
            return Err(Error::InvalidInput(
                "nested mixtures are not supported".to_string(),
            ));
        }
        Ok(Self {
            family: Family::Mixture {
                weights,
                components,
            },
            log_norm: 0.0,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_normal(&self) -> bool {
        matches!(self.family, Family::Normal { .. })
    }

    /// True when the whole distribution lives on `(0, inf)`.
    pub fn has_positive_support(&self) -> bool {
        match &self.family {
            Family::Normal { .. } => false,
            Family::LogNormal { .. } | Family::Gamma { .. } => true,
            Family::Mixture { components, .. } => components
                .iter()
                .all(DistributionSpec::has_positive_support),
        }
    }

    /// True when some component has a density boundary at the origin.
    fn touches_origin(&self) -> bool {
        match &self.family {
            Family::Normal { .. } => false,
            Family::LogNormal { .. } | Family::Gamma { .. } => true,
            Family::Mixture { components, .. } => components.iter().any(|c| c.touches_origin()),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Normal { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            Family::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_pdf((x.ln() - mu) / sigma) / (sigma * x)
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else {
                    ((shape - 1.0) * x.ln() - x / scale - self.log_norm).exp()
                }
            }
            Family::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.pdf(x))
                .sum(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            Family::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Family::Gamma { shape, scale } => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    gamma_lr(*shape, x / scale)
                }
            }
            Family::Mixture {
                weights,
                components,
            } => weights
                .iter()
                .zip(components)
                .map(|(w, c)| w * c.cdf(x))
                .sum::<f64>()
                .min(1.0),
        }
    }

    /// Inverse CDF by bracketed bisection, uniform across families.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!(
                "quantile level {p} outside (0, 1)"
            )));
        }
        let (mut lo, mut hi);
        if self.has_positive_support() {
            lo = 0.0;
            hi = 1.0;
            while self.cdf(hi) < p {
                lo = hi;
                hi *= 2.0;
                if hi > 1e300 {
                    return Err(Error::Optimization(format!("cannot bracket quantile {p}")));
                }
            }
        } else {
            let mut step = 1.0;
            lo = -1.0;
            hi = 1.0;
            while self.cdf(lo) > p {
                hi = lo;
                lo -= step;
                step *= 2.0;
                if step > 1e300 {
                    return Err(Error::Optimization(format!("cannot bracket quantile {p}")));
                }
            }
            step = 1.0;
            while self.cdf(hi) < p {
                lo = hi;
                hi += step;
                step *= 2.0;
                if step > 1e300 {
                    return Err(Error::Optimization(format!("cannot bracket quantile {p}")));
                }
            }
        }
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if !(lo < mid && mid < hi) {
                break;
            }
            let c = self.cdf(mid);
            if c < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (clo, chi) = (self.cdf(lo), self.cdf(hi));
        Ok(if (p - clo).abs() < (chi - p).abs() {
            lo
        } else {
            hi
        })
    }

    fn sample_one(&self, stream: &mut RandomStream) -> f64 {
        match &self.family {
            Family::Normal { mu, sigma } => Normal::new(*mu, *sigma)
                .expect("validated normal")
                .sample(stream),
            Family::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma)
                .expect("validated lognormal")
                .sample(stream),
            Family::Gamma { shape, scale } => Gamma::new(*shape, *scale)
                .expect("validated gamma")
                .sample(stream),
            Family::Mixture {
                weights,
                components,
            } => {
                let u = stream.uniform();
                let mut acc = 0.0;
                let mut chosen = components.len() - 1;
                for (i, w) in weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                components[chosen].sample_one(stream)
            }
        }
    }

    /// `n` i.i.d. draws from this distribution.
    pub fn sample(&self, n: usize, stream: &mut RandomStream) -> Vec<f64> {
        match &self.family {
            Family::Normal { mu, sigma } => {
                let d = Normal::new(*mu, *sigma).expect("validated normal");
                (0..n).map(|_| d.sample(stream)).collect()
            }
            Family::LogNormal { mu, sigma } => {
                let d = LogNormal::new(*mu, *sigma).expect("validated lognormal");
                (0..n).map(|_| d.sample(stream)).collect()
            }
            Family::Gamma { shape, scale } => {
                let d = Gamma::new(*shape, *scale).expect("validated gamma");
                (0..n).map(|_| d.sample(stream)).collect()
            }
            Family::Mixture { .. } => (0..n).map(|_| self.sample_one(stream)).collect(),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Family::LogNormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Family::Gamma { shape, scale } => write!(f, "gamma({shape},{scale})"),
            Family::Mixture {
                weights,
                components,
            } => {
                write!(f, "mix(")?;
                for (i, (w, c)) in weights.iter().zip(components).enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn parse_number(s: &str, whole: &str) -> Result<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("bad number '{s}' in distribution '{whole}'")))
}

fn parse_simple(s: &str, whole: &str) -> Result<DistributionSpec> {
    let open = s
        .find('(')
        .ok_or_else(|| Error::Parse(format!("expected '(' in distribution '{whole}'")))?;
    if !s.ends_with(')') {
        return Err(Error::Parse(format!("expected ')' at end of '{whole}'")));
    }
    let name = s[..open].to_ascii_lowercase();
    let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').collect();
    if args.len() != 2 {
        return Err(Error::Parse(format!(
            "'{name}' takes two parameters, got {} in '{whole}'",
            args.len()
        )));
    }
    let a = parse_number(args[0], whole)?;
    let b = parse_number(args[1], whole)?;
    match name.as_str() {
        "normal" | "n" => DistributionSpec::normal(a, b),
        "lognormal" | "logn" => DistributionSpec::lognormal(a, b),
        "gamma" => DistributionSpec::gamma(a, b),
        other => Err(Error::Parse(format!(
            "unknown distribution family '{other}'"
        ))),
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = s.to_ascii_lowercase();
        if let Some(inner) = lower.strip_prefix("mix(") {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("unterminated mixture '{text}'")))?;
            let mut weights = Vec::new();
            let mut components = Vec::new();
            for term in inner.split('+') {
                let (w, comp) = term
                    .split_once('*')
                    .ok_or_else(|| Error::Parse(format!("mixture term '{term}' lacks 'w*'")))?;
                weights.push(parse_number(w, text)?);
                components.push(parse_simple(comp, text)?);
            }
            DistributionSpec::mixture(weights, components)
        } else {
            parse_simple(&s, text)
        }
    }
}

impl TryFrom<String> for DistributionSpec {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<DistributionSpec> for String {
    fn from(value: DistributionSpec) -> Self {
        value.to_string()
    }
}

/// Integrates `g` over the region carrying all but `TAIL_MASS` of every
/// class, splitting at the origin when a component's density starts there
/// and substituting `x = u^5` on the positive piece to remove endpoint
/// singularities such as `x^(k-1)` with `k < 1`.
fn integrate_over_classes<G: Fn(f64) -> f64>(
    specs: [&DistributionSpec; 3],
    g: G,
    tol: f64,
) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in specs {
        let l = if s.has_positive_support() {
            0.0
        } else {
            s.quantile(TAIL_MASS)?
        };
        lo = lo.min(l);
        hi = hi.max(s.quantile(1.0 - TAIL_MASS)?);
    }
    let origin = specs.iter().any(|s| s.touches_origin());
    let positive_piece = |a: f64, b: f64, piece_tol: f64| -> Result<f64> {
        let ua = a.powf(1.0 / ORIGIN_POWER);
        let ub = b.powf(1.0 / ORIGIN_POWER);
        numerics::integrate_adaptive(
            |u: f64| {
                let x = u.powf(ORIGIN_POWER);
                g(x) * ORIGIN_POWER * u.powf(ORIGIN_POWER - 1.0)
            },
            numerics::Interval::new(ua, ub)?,
            piece_tol,
        )
    };
    if origin && lo < 0.0 && hi > 0.0 {
        let left = numerics::integrate_adaptive(&g, numerics::Interval::new(lo, 0.0)?, tol / 2.0)?;
        Ok(left + positive_piece(0.0, hi, tol / 2.0)?)
    } else if origin && lo >= 0.0 {
        positive_piece(lo, hi, tol)
    } else {
        numerics::integrate_adaptive(&g, numerics::Interval::new(lo, hi)?, tol)
    }
}

/// Overlap coefficient: the integral of the pointwise minimum of the three
/// class densities.
pub fn theoretical_ovl(
    f1: &DistributionSpec,
    f2: &DistributionSpec,
    f3: &DistributionSpec,
) -> Result<f64> {
    let v = integrate_over_classes(
        [f1, f2, f3],
        |x| f1.pdf(x).min(f2.pdf(x)).min(f3.pdf(x)),
        THEORETICAL_TOLERANCE,
    )?;
    Ok(v.clamp(0.0, 1.0))
}

/// Volume under the ROC surface, `P(X1 < X2 < X3)`, evaluated as
/// `∫ F1(u) (1 - F3(u)) f2(u) du`.
pub fn theoretical_vus(
    f1: &DistributionSpec,
    f2: &DistributionSpec,
    f3: &DistributionSpec,
) -> Result<f64> {
    let v = integrate_over_classes(
        [f1, f2, f3],
        |u| f1.cdf(u) * (1.0 - f3.cdf(u)) * f2.pdf(u),
        THEORETICAL_TOLERANCE,
    )?;
    Ok(v.clamp(0.0, 1.0))
}

/// Two thresholds `c1 < c2` splitting the marker axis into three classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    c1: f64,
    c2: f64,
}

impl DecisionRule {
    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        if c1.is_nan() || c2.is_nan() || c1 >= c2 {
            return Err(Error::InvalidInput(format!(
                "decision rule needs c1 < c2, got ({c1}, {c2})"
            )));
        }
        Ok(Self { c1, c2 })
    }

    pub fn thresholds(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    /// Class assigned to `x`: 1 if `x <= c1`, 2 if `c1 < x <= c2`, else 3.
    pub fn classify(&self, x: f64) -> usize {
        if x <= self.c1 {
            1
        } else if x <= self.c2 {
            2
        } else {
            3
        }
    }
}

/// True positive fractions of the three classes under a decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub tpf1: f64,
    pub tpf2: f64,
    pub tpf3: f64,
}

pub fn operating_point(
    rule: &DecisionRule,
    f1: &DistributionSpec,
    f2: &DistributionSpec,
    f3: &DistributionSpec,
) -> OperatingPoint {
    let (c1, c2) = rule.thresholds();
    OperatingPoint {
        tpf1: f1.cdf(c1).clamp(0.0, 1.0),
        tpf2: (f2.cdf(c2) - f2.cdf(c1)).clamp(0.0, 1.0),
        tpf3: (1.0 - f3.cdf(c2)).clamp(0.0, 1.0),
    }
}

pub fn classify(rule: &DecisionRule, x: f64) -> usize {
    rule.classify(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(mu: f64, s: f64) -> DistributionSpec {
        DistributionSpec::normal(mu, s).unwrap()
    }

    #[test]
    fn pdf_examples() {
        assert!((n(0.0, 1.0).pdf(0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        let g = DistributionSpec::gamma(1.0, 1.0).unwrap();
        for x in [0.1, 1.0, 3.7] {
            assert!((g.pdf(x) - (-x).exp()).abs() < 1e-14);
        }
        assert_eq!(g.pdf(0.0), 0.0);
        assert_eq!(g.pdf(-1.0), 0.0);
        let m: DistributionSpec = "mix(0.5*normal(0,1)+0.5*normal(3,1))".parse().unwrap();
        assert!((m.pdf(1.5) - 0.129_517_595_665_891_7).abs() < 1e-12);
    }

    #[test]
    fn cdf_examples() {
        assert!((n(0.0, 1.0).cdf(0.0) - 0.5).abs() < 1e-15);
        let l = DistributionSpec::lognormal(0.0, 1.0).unwrap();
        assert!((l.cdf(1.0) - 0.5).abs() < 1e-15);
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        assert!((g.cdf(2.0) - (1.0 - 3.0 * (-2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        assert!((n(0.0, 1.0).quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        let l = DistributionSpec::lognormal(1.0, 1.0).unwrap();
        assert!((l.quantile(0.5).unwrap() - std::f64::consts::E).abs() < 1e-9);
        assert!(n(0.0, 1.0).quantile(0.0).is_err());
        assert!(n(0.0, 1.0).quantile(1.0).is_err());
        let m: DistributionSpec = "mix(0.5*normal(0,1)+0.5*normal(3,1))".parse().unwrap();
        assert!((m.quantile(0.5).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(DistributionSpec::normal(0.0, 0.0).is_err());
        assert!(DistributionSpec::lognormal(0.0, -1.0).is_err());
        assert!(DistributionSpec::gamma(0.0, 1.0).is_err());
        assert!(DistributionSpec::gamma(1.0, f64::NAN).is_err());
        assert!(DistributionSpec::mixture(vec![0.5, 0.4], vec![n(0.0, 1.0), n(1.0, 1.0)]).is_err());
        let inner = DistributionSpec::mixture(vec![1.0], vec![n(0.0, 1.0)]).unwrap();
        assert!(DistributionSpec::mixture(vec![1.0], vec![inner]).is_err());
    }

    #[test]
    fn text_form_parses_with_whitespace() {
        let a: DistributionSpec = " mix( 0.5 * normal(0, 1) + 0.5*gamma(4,1) ) "
            .parse()
            .unwrap();
        assert_eq!(a.to_string(), "mix(0.5*normal(0,1)+0.5*gamma(4,1))");
        assert_eq!(
            "lognormal(1,0.5)"
                .parse::<DistributionSpec>()
                .unwrap()
                .to_string(),
            "lognormal(1,0.5)"
        );
        assert!("weibull(1,1)".parse::<DistributionSpec>().is_err());
        assert!("normal(1)".parse::<DistributionSpec>().is_err());
        assert!("normal(a,1)".parse::<DistributionSpec>().is_err());
        assert!("mix(0.5*normal(0,1)".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn decision_rule_and_operating_points() {
        let rule = DecisionRule::new(0.0, 1.0).unwrap();
        assert_eq!(classify(&rule, -0.5), 1);
        assert_eq!(classify(&rule, 0.0), 1);
        assert_eq!(classify(&rule, 1.0), 2);
        assert_eq!(classify(&rule, 2.0), 3);
        assert!(DecisionRule::new(1.0, 1.0).is_err());

        let z = n(0.0, 1.0);
        let op = operating_point(&rule, &z, &z, &z);
        assert!((op.tpf1 - 0.5).abs() < 1e-15);
        assert!((op.tpf2 - 0.341_344_746_068_542_9).abs() < 1e-12);
        assert!((op.tpf3 - 0.158_655_253_931_457_05).abs() < 1e-12);

        let wide = DecisionRule::new(-1e9, 1e9).unwrap();
        let g = DistributionSpec::gamma(2.0, 1.0).unwrap();
        let op = operating_point(&wide, &z, &g, &z);
        assert!(op.tpf1 < 1e-12 && (op.tpf2 - 1.0).abs() < 1e-12 && op.tpf3 < 1e-12);

        let thirds = DecisionRule::new(
            g.quantile(1.0 / 3.0).unwrap(),
            g.quantile(2.0 / 3.0).unwrap(),
        )
        .unwrap();
        let op = operating_point(&thirds, &g, &g, &g);
        for t in [op.tpf1, op.tpf2, op.tpf3] {
            assert!((t - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_specs_give_extremes() {
        let g = DistributionSpec::gamma(0.2, 0.6).unwrap();
        assert!((theoretical_ovl(&g, &g, &g).unwrap() - 1.0).abs() < 1e-6);
        assert!((theoretical_vus(&g, &g, &g).unwrap() - 1.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn separated_specs() {
        let (a, b, c) = (n(0.0, 0.1), n(10.0, 0.1), n(20.0, 0.1));
        assert!(theoretical_vus(&a, &b, &c).unwrap() >= 0.999);
        assert!(theoretical_ovl(&a, &b, &c).unwrap() <= 1e-6);
    }
}
