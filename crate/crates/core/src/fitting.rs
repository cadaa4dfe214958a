//! Parameter estimation and Kolmogorov–Smirnov goodness of fit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{Family, RuntimeDistribution};
use crate::error::{Error, Result};

/// Conventional KS acceptance threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Exponential shift is snapped to zero when `min <= SNAP_TO_ZERO * mean`.
pub const SNAP_TO_ZERO: f64 = 0.01;

/// Lognormal shift offset below the sample minimum for integer counts.
pub const ITERATION_SHIFT_OFFSET: f64 = 0.5;

/// Relative lognormal shift offset below the sample minimum for times.
pub const SECONDS_SHIFT_FACTOR: f64 = 1e-6;

/// Smallest sample for which `ks_test` reports a p-value.
pub const KS_MIN_SAMPLE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Iterations,
    Seconds,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Iterations => "iterations",
            Unit::Seconds => "seconds",
        })
    }
}

/// Runtime observations for one problem instance, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    unit: Unit,
    label: String,
}

/// Min / mean / median / max of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
}

impl EmpiricalSample {
    /// Observations must be finite and nonnegative; the sample must not be empty.
    pub fn new(mut values: Vec<f64>, unit: Unit, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::UndersizedSample { needed: 1, got: 0 });
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::DegenerateSample(format!("observation {i} is {v}; runtimes must be finite and >= 0")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values, unit, label: label.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }

    pub fn summary(&self) -> Summary {
        Summary {
            count: self.len(),
            min: self.min(),
            mean: self.mean(),
            median: self.median(),
            max: self.max(),
        }
    }

    fn distinct_count(&self) -> usize {
        1 + self.values.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected,
}

/// Outcome of testing one distribution against one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub sample_label: String,
    pub dist: RuntimeDistribution,
    pub ks_statistic: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub sample_size: usize,
    /// The classical KS p-value assumes parameters fixed in advance.
    pub params_estimated_from_sample: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl FitReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

/// Estimated distribution plus notes describing any adjustment applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimated {
    pub dist: RuntimeDistribution,
    pub notes: Vec<String>,
}

/// `x0 = min`, `lambda = 1/(mean - x0)`; the shift snaps to zero when the
/// minimum is negligible against the mean.
pub fn estimate_shifted_exponential(sample: &EmpiricalSample) -> Result<Estimated> {
    if sample.len() < 2 {
        return Err(Error::UndersizedSample { needed: 2, got: sample.len() });
    }
    let min = sample.min();
    let mean = sample.mean();
    if mean <= min {
        return Err(Error::DegenerateSample("all observations are equal; rate is undefined".into()));
    }
    let mut notes = Vec::new();
    let x0 = if min <= SNAP_TO_ZERO * mean {
        notes.push(format!("shift snapped to 0 (min {min} <= {SNAP_TO_ZERO} * mean {mean})"));
        0.0
    } else {
        min
    };
    let dist = RuntimeDistribution::shifted_exponential(x0, 1.0 / (mean - x0))?;
    Ok(Estimated { dist, notes })
}

/// Shift just below the minimum, then `mu`, `sigma` = maximum-likelihood
/// estimates (mean and population standard deviation) of `log(v - x0)`.
pub fn estimate_shifted_lognormal(sample: &EmpiricalSample) -> Result<Estimated> {
    if sample.len() < 3 {
        return Err(Error::DegenerateSample(format!("lognormal fit needs at least 3 observations, got {}", sample.len())));
    }
    if sample.distinct_count() < 3 {
        return Err(Error::DegenerateSample("lognormal fit needs at least 3 distinct observations".into()));
    }
    let min = sample.min();
    let (x0, note) = match sample.unit() {
        Unit::Iterations => (
            (min - ITERATION_SHIFT_OFFSET).max(0.0),
            format!("shift set to min - {ITERATION_SHIFT_OFFSET} (iteration counts)"),
        ),
        Unit::Seconds => (
            min * (1.0 - SECONDS_SHIFT_FACTOR),
            format!("shift set to min * (1 - {SECONDS_SHIFT_FACTOR}) (seconds)"),
        ),
    };
    let (mu, sigma) = lognormal_mle(sample.values(), x0)?;
    let dist = RuntimeDistribution::shifted_lognormal(x0, mu, sigma)?;
    Ok(Estimated { dist, notes: vec![note] })
}

/// MLE of `(mu, sigma)` for `log(v - x0)` with the shift held fixed.
pub fn lognormal_mle(values: &[f64], x0: f64) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::UndersizedSample { needed: 1, got: 0 });
    }
    let logs = values
        .iter()
        .map(|&v| {
            if v > x0 {
                Ok((v - x0).ln())
            } else {
                Err(Error::DegenerateSample(format!("observation {v} is not above the shift {x0}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let n = logs.len() as f64;
    let mu = logs.iter().sum::<f64>() / n;
    let sigma = (logs.iter().map(|l| (l - mu).powi(2)).sum::<f64>() / n).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateSample("log-deviations have zero spread".into()));
    }
    Ok((mu, sigma))
}

/// Normal law with the sample mean and standard deviation, truncated at 0.
pub fn estimate_shifted_gaussian(sample: &EmpiricalSample) -> Result<Estimated> {
    if sample.len() < 2 {
        return Err(Error::UndersizedSample { needed: 2, got: sample.len() });
    }
    let n = sample.len() as f64;
    let mean = sample.mean();
    let sd = (sample.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateSample("all observations are equal; spread is undefined".into()));
    }
    let dist = RuntimeDistribution::shifted_gaussian(0.0, mean, sd)?;
    Ok(Estimated { dist, notes: vec!["normal truncated below 0 and renormalized".into()] })
}

pub fn estimate(family: Family, sample: &EmpiricalSample) -> Result<Estimated> {
    match family {
        Family::ShiftedExponential => estimate_shifted_exponential(sample),
        Family::ShiftedLognormal => estimate_shifted_lognormal(sample),
        Family::ShiftedGaussian => estimate_shifted_gaussian(sample),
    }
}

/// Two-sided sup-distance between the stepped empirical CDF and `dist`.
pub fn ks_statistic(sample: &EmpiricalSample, dist: &RuntimeDistribution) -> f64 {
    let n = sample.len() as f64;
    sample
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist.cdf(v);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
        .min(1.0)
}

/// Survival function of the Kolmogorov distribution,
/// `Q(x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)`.
///
/// For `x < 1` the alternating series converges slowly, so the equivalent
/// theta-function form `1 - sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2))`
/// is used there.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for k in 1..100 {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * pi2 / (8.0 * x * x)).exp();
            cdf += term;
            if term < 1e-16 * cdf || term == 0.0 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / x;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic KS p-value with the finite-sample scaling
/// `x = (sqrt(N) + 0.12 + 0.11/sqrt(N)) * D`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)
}

pub fn ks_test(sample: &EmpiricalSample, dist: &RuntimeDistribution) -> Result<FitReport> {
    ks_test_with_threshold(sample, dist, DEFAULT_THRESHOLD)
}

pub fn ks_test_with_threshold(sample: &EmpiricalSample, dist: &RuntimeDistribution, threshold: f64) -> Result<FitReport> {
    check_threshold(threshold)?;
    if sample.len() < KS_MIN_SAMPLE {
        return Err(Error::UndersizedSample { needed: KS_MIN_SAMPLE, got: sample.len() });
    }
    let d = ks_statistic(sample, dist);
    let p = ks_p_value(d, sample.len());
    Ok(FitReport {
        sample_label: sample.label().to_string(),
        dist: *dist,
        ks_statistic: d,
        p_value: p,
        threshold,
        verdict: if p >= threshold { Verdict::Accepted } else { Verdict::Rejected },
        sample_size: sample.len(),
        params_estimated_from_sample: true,
        notes: Vec::new(),
    })
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("threshold must lie in [0, 1], got {threshold}")))
    }
}

/// Result of estimating and testing one family; failures are kept, not raised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFit {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<FitReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl FamilyFit {
    fn p_value(&self) -> f64 {
        self.report.as_ref().map_or(f64::NEG_INFINITY, |r| r.p_value)
    }
}

/// Estimates and tests every family, best p-value first.
pub fn fit_all(sample: &EmpiricalSample, families: &[Family], threshold: f64) -> Result<Vec<FamilyFit>> {
    if families.is_empty() {
        return Err(Error::InvalidArgument("no distribution family requested".into()));
    }
    check_threshold(threshold)?;
    let mut fits: Vec<FamilyFit> = families
        .iter()
        .map(|&family| {
            let outcome = estimate(family, sample).and_then(|est| {
                let mut report = ks_test_with_threshold(sample, &est.dist, threshold)?;
                report.notes = est.notes;
                Ok(report)
            });
            match outcome {
                Ok(report) => FamilyFit { family, report: Some(report), error: None },
                Err(e) => FamilyFit { family, report: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    fits.sort_by(|a, b| b.p_value().total_cmp(&a.p_value()));
    Ok(fits)
}
