//! Parametric runtime distributions and the first-order-statistic transform.
//!
//! A multi-walk run on `n` independent copies finishes at
//! `Z(n) = min(Y_1, ..., Y_n)`, so `P(Z(n) > t) = S(t)^n` with `S` the
//! survival function of one sequential run. Expected parallel runtime is
//! computed from that survival form:
//!
//! ```text
//! E[Z(n)] = x0 + int_{x0}^inf S(t)^n dt
//! ```
//!
//! which only needs `S`, stays bounded near the shift, and reduces to the
//! closed form `x0 + 1/(n*lambda)` for the shifted exponential.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, Estimate, QuadratureOptions};
use crate::special::{normal_pdf, normal_sf, normal_sf_inverse};

/// Distribution family tag, serialized in snake case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ShiftedExponential,
    ShiftedLognormal,
    /// Normal law truncated to `[x0, inf)` and renormalized.
    ShiftedGaussian,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::ShiftedExponential, Family::ShiftedLognormal, Family::ShiftedGaussian];

    pub fn short_name(self) -> &'static str {
        match self {
            Family::ShiftedExponential => "exp",
            Family::ShiftedLognormal => "lognormal",
            Family::ShiftedGaussian => "gaussian",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Exponential { x0: f64, lambda: f64 },
    Lognormal { x0: f64, mu: f64, sigma: f64 },
    Gaussian { x0: f64, mu: f64, sigma: f64, tail_mass: f64 },
}

/// A validated runtime distribution. Density is zero below the shift `x0`.
///
/// For the gaussian family `mu` and `sigma` are the location and scale of
/// the underlying normal before truncation at `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord", into = "DistributionRecord")]
pub struct RuntimeDistribution {
    kind: Kind,
}

/// Flat JSON shape `{"family","x0","lambda","mu","sigma"}`; absent fields are omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub family: Family,
    pub x0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl TryFrom<DistributionRecord> for RuntimeDistribution {
    type Error = Error;

    fn try_from(rec: DistributionRecord) -> Result<Self> {
        let missing = |name: &str| Error::InvalidParameters(format!("{} requires field `{name}`", rec.family));
        match rec.family {
            Family::ShiftedExponential => {
                Self::shifted_exponential(rec.x0, rec.lambda.ok_or_else(|| missing("lambda"))?)
            }
            Family::ShiftedLognormal => Self::shifted_lognormal(
                rec.x0,
                rec.mu.ok_or_else(|| missing("mu"))?,
                rec.sigma.ok_or_else(|| missing("sigma"))?,
            ),
            Family::ShiftedGaussian => Self::shifted_gaussian(
                rec.x0,
                rec.mu.ok_or_else(|| missing("mu"))?,
                rec.sigma.ok_or_else(|| missing("sigma"))?,
            ),
        }
    }
}

impl From<RuntimeDistribution> for DistributionRecord {
    fn from(d: RuntimeDistribution) -> Self {
        match d.kind {
            Kind::Exponential { x0, lambda } => DistributionRecord {
                family: Family::ShiftedExponential,
                x0,
                lambda: Some(lambda),
                mu: None,
                sigma: None,
            },
            Kind::Lognormal { x0, mu, sigma } => DistributionRecord {
                family: Family::ShiftedLognormal,
                x0,
                lambda: None,
                mu: Some(mu),
                sigma: Some(sigma),
            },
            Kind::Gaussian { x0, mu, sigma, .. } => DistributionRecord {
                family: Family::ShiftedGaussian,
                x0,
                lambda: None,
                mu: Some(mu),
                sigma: Some(sigma),
            },
        }
    }
}

fn check_shift(x0: f64) -> Result<()> {
    if x0.is_finite() && x0 >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("shift x0 must be finite and >= 0, got {x0}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl RuntimeDistribution {
    pub fn shifted_exponential(x0: f64, lambda: f64) -> Result<Self> {
        check_shift(x0)?;
        check_positive("lambda", lambda)?;
        Ok(Self { kind: Kind::Exponential { x0, lambda } })
    }

    pub fn shifted_lognormal(x0: f64, mu: f64, sigma: f64) -> Result<Self> {
        check_shift(x0)?;
        check_positive("sigma", sigma)?;
        if !mu.is_finite() {
            return Err(Error::InvalidParameters(format!("mu must be finite, got {mu}")));
        }
        // exp(mu + sigma^2/2) must be representable.
        if mu + 0.5 * sigma * sigma > 700.0 {
            return Err(Error::InvalidParameters("lognormal mean overflows".into()));
        }
        Ok(Self { kind: Kind::Lognormal { x0, mu, sigma } })
    }

    pub fn shifted_gaussian(x0: f64, mu: f64, sigma: f64) -> Result<Self> {
        check_shift(x0)?;
        check_positive("sigma", sigma)?;
        if !mu.is_finite() {
            return Err(Error::InvalidParameters(format!("mu must be finite, got {mu}")));
        }
        let tail_mass = normal_sf((x0 - mu) / sigma);
        if tail_mass < 1e-250 {
            return Err(Error::InvalidParameters(format!(
                "truncation point x0={x0} leaves no mass above it (mu={mu}, sigma={sigma})"
            )));
        }
        Ok(Self { kind: Kind::Gaussian { x0, mu, sigma, tail_mass } })
    }

    pub fn family(&self) -> Family {
        match self.kind {
            Kind::Exponential { .. } => Family::ShiftedExponential,
            Kind::Lognormal { .. } => Family::ShiftedLognormal,
            Kind::Gaussian { .. } => Family::ShiftedGaussian,
        }
    }

    pub fn x0(&self) -> f64 {
        match self.kind {
            Kind::Exponential { x0, .. } | Kind::Lognormal { x0, .. } | Kind::Gaussian { x0, .. } => x0,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.kind {
            Kind::Exponential { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn mu(&self) -> Option<f64> {
        match self.kind {
            Kind::Lognormal { mu, .. } | Kind::Gaussian { mu, .. } => Some(mu),
            Kind::Exponential { .. } => None,
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match self.kind {
            Kind::Lognormal { sigma, .. } | Kind::Gaussian { sigma, .. } => Some(sigma),
            Kind::Exponential { .. } => None,
        }
    }

    /// Density in terms of the excess `s = t - x0 >= 0`.
    fn pdf_excess(&self, s: f64) -> f64 {
        match self.kind {
            Kind::Exponential { lambda, .. } => lambda * (-lambda * s).exp(),
            Kind::Lognormal { mu, sigma, .. } => {
                if s <= 0.0 {
                    return 0.0;
                }
                let z = (s.ln() - mu) / sigma;
                normal_pdf(z) / (s * sigma)
            }
            Kind::Gaussian { x0, mu, sigma, tail_mass } => normal_pdf((x0 + s - mu) / sigma) / (sigma * tail_mass),
        }
    }

    /// `P(Y > x0 + s)`, computed without cancellation in the upper tail.
    fn survival_excess(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 1.0;
        }
        match self.kind {
            Kind::Exponential { lambda, .. } => (-lambda * s).exp(),
            Kind::Lognormal { mu, sigma, .. } => normal_sf((s.ln() - mu) / sigma),
            Kind::Gaussian { x0, mu, sigma, tail_mass } => (normal_sf((x0 + s - mu) / sigma) / tail_mass).min(1.0),
        }
    }

    /// Excess `s` with `P(Y > x0 + s) = q`, for `q` in `(0, 1]`.
    fn inverse_survival_excess(&self, q: f64) -> f64 {
        match self.kind {
            Kind::Exponential { lambda, .. } => -q.ln() / lambda,
            Kind::Lognormal { mu, sigma, .. } => (mu + sigma * normal_sf_inverse(q)).exp(),
            Kind::Gaussian { x0, mu, sigma, tail_mass } => {
                let z = normal_sf_inverse(q * tail_mass);
                (mu + sigma * z - x0).max(0.0)
            }
        }
    }

    /// Probability density `f_Y(t)`; zero below the shift.
    pub fn pdf(&self, t: f64) -> f64 {
        let x0 = self.x0();
        if t < x0 {
            0.0
        } else {
            self.pdf_excess(t - x0)
        }
    }

    /// Cumulative distribution `F_Y(t)`; zero at and below the shift.
    pub fn cdf(&self, t: f64) -> f64 {
        let x0 = self.x0();
        if t <= x0 {
            return 0.0;
        }
        let s = t - x0;
        match self.kind {
            Kind::Exponential { lambda, .. } => -(-lambda * s).exp_m1(),
            // erfc form keeps the lower tail accurate.
            Kind::Lognormal { mu, sigma, .. } => normal_sf((mu - s.ln()) / sigma),
            Kind::Gaussian { .. } => 1.0 - self.survival_excess(s),
        }
    }

    /// Survival function `1 - F_Y(t)`.
    pub fn survival(&self, t: f64) -> f64 {
        self.survival_excess(t - self.x0())
    }

    /// `t` with `F_Y(t) = p`, for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("quantile level must lie in [0, 1), got {p}")));
        }
        Ok(self.x0() + self.inverse_survival_excess(1.0 - p))
    }

    /// Closed-form mean `E[Y]`.
    pub fn expectation(&self) -> f64 {
        match self.kind {
            Kind::Exponential { x0, lambda } => x0 + 1.0 / lambda,
            Kind::Lognormal { x0, mu, sigma } => x0 + (mu + 0.5 * sigma * sigma).exp(),
            Kind::Gaussian { x0, mu, sigma, tail_mass } => {
                let alpha = (x0 - mu) / sigma;
                mu + sigma * normal_pdf(alpha) / tail_mass
            }
        }
    }

    /// Expected runtime of the fastest of `n` independent walks, `E[Z(n)]`.
    ///
    /// Closed form for the exponential family, survival-form quadrature otherwise.
    pub fn min_expectation(&self, n: u32) -> Result<f64> {
        check_cores(n)?;
        match self.kind {
            Kind::Exponential { x0, lambda } => Ok(x0 + 1.0 / (f64::from(n) * lambda)),
            _ => Ok(self.min_expectation_quadrature(n)?.value),
        }
    }

    /// `E[Z(n)]` by numeric integration for every family; the exponential
    /// closed form is the cross-check for this path.
    pub fn min_expectation_quadrature(&self, n: u32) -> Result<Estimate> {
        check_cores(n)?;
        let transform = MinTransform::new(*self, n)?;
        let opts = QuadratureOptions { rel_tol: 1e-11, ..Default::default() };
        let tail = integrate_to_infinity(
            |s| transform.survival_excess(s),
            0.0,
            transform.panel_scale(),
            |s| transform.survival_excess(s),
            &opts,
        )?;
        Ok(Estimate { value: self.x0() + tail.value, error: tail.error })
    }

    /// Predicted speedup `G(n) = E[Y] / E[Z(n)]`.
    pub fn speedup(&self, n: u32) -> Result<f64> {
        check_cores(n)?;
        match self.kind {
            Kind::Exponential { x0, lambda } => {
                // n(1 + x0*lambda) / (1 + n*x0*lambda): exact for x0 = 0.
                let nf = f64::from(n);
                let a = x0 * lambda;
                Ok(nf * (1.0 + a) / (1.0 + nf * a))
            }
            _ => Ok(self.expectation() / self.min_expectation(n)?),
        }
    }

    /// `lim G(n)` as `n -> inf`; `None` when the speedup is unbounded (`x0 = 0`).
    pub fn speedup_limit(&self) -> Option<f64> {
        match self.kind {
            Kind::Exponential { x0, lambda } if x0 > 0.0 => Some(1.0 + 1.0 / (x0 * lambda)),
            Kind::Exponential { .. } => None,
            _ => {
                let x0 = self.x0();
                (x0 > 0.0).then(|| self.expectation() / x0)
            }
        }
    }

    /// Tangent coefficient of the exponential speedup at the origin, `x0*lambda + 1`.
    pub fn origin_slope(&self) -> Option<f64> {
        match self.kind {
            Kind::Exponential { x0, lambda } => Some(x0 * lambda + 1.0),
            _ => None,
        }
    }

    /// Predicted speedups for an increasing list of core counts.
    pub fn speedup_curve(&self, cores: &[u32]) -> Result<SpeedupCurve> {
        validate_cores(cores)?;
        let points = cores
            .iter()
            .map(|&n| Ok(SpeedupPoint { n, speedup: self.speedup(n)?, std_error: None }))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpeedupCurve { points, limit: self.speedup_limit(), origin_slope: self.origin_slope() })
    }

    /// Inverse-CDF sampling; every draw is `>= x0`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        let x0 = self.x0();
        Ok((0..count)
            .map(|_| {
                // gen::<f64>() is in [0, 1), so q is in (0, 1].
                let q = 1.0 - rng.gen::<f64>();
                x0 + self.inverse_survival_excess(q)
            })
            .collect())
    }
}

fn check_cores(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("core count must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Core lists must be nonempty, positive and strictly increasing.
pub fn validate_cores(cores: &[u32]) -> Result<()> {
    if cores.is_empty() {
        return Err(Error::InvalidArgument("core list is empty".into()));
    }
    if cores[0] == 0 {
        return Err(Error::InvalidArgument("core counts must be >= 1".into()));
    }
    if let Some(w) = cores.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(format!(
            "core list must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Distribution of the minimum of `n` i.i.d. copies of `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTransform {
    base: RuntimeDistribution,
    n: u32,
}

impl MinTransform {
    pub fn new(base: RuntimeDistribution, n: u32) -> Result<Self> {
        check_cores(n)?;
        Ok(Self { base, n })
    }

    pub fn base(&self) -> &RuntimeDistribution {
        &self.base
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn survival_excess(&self, s: f64) -> f64 {
        self.base.survival_excess(s).powi(self.n as i32)
    }

    /// Panel width for quadrature: the median excess of the minimum.
    fn panel_scale(&self) -> f64 {
        let q = 0.5f64.powf(1.0 / f64::from(self.n));
        let s = self.base.inverse_survival_excess(q);
        if s.is_finite() && s > 0.0 {
            s
        } else {
            // Degenerate median (gaussian truncated far above its mode): fall
            // back to the base mean excess.
            (self.base.expectation() - self.base.x0()).max(f64::MIN_POSITIVE)
        }
    }

    /// `F_Z(t) = 1 - (1 - F_Y(t))^n`.
    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    pub fn survival(&self, t: f64) -> f64 {
        self.base.survival(t).powi(self.n as i32)
    }

    /// `f_Z(t) = n f_Y(t) (1 - F_Y(t))^(n-1)`.
    pub fn pdf(&self, t: f64) -> f64 {
        let x0 = self.base.x0();
        if t < x0 {
            return 0.0;
        }
        let s = t - x0;
        f64::from(self.n) * self.base.pdf_excess(s) * self.base.survival_excess(s).powi(self.n as i32 - 1)
    }

    pub fn expectation(&self) -> Result<f64> {
        self.base.min_expectation(self.n)
    }

    /// Numeric `int f_Z` over the support; equals 1 for a proper density.
    pub fn pdf_mass(&self) -> Result<Estimate> {
        let n = self.n as i32;
        let nf = f64::from(self.n);
        let base = self.base;
        let opts = QuadratureOptions { rel_tol: 1e-11, ..Default::default() };
        integrate_to_infinity(
            |s| nf * base.pdf_excess(s) * base.survival_excess(s).powi(n - 1),
            0.0,
            self.panel_scale(),
            // f*S^(n-1) tends to zero at least as fast as S^n / (mean excess).
            |s| base.survival_excess(s).powi(n).max(nf * base.pdf_excess(s) * base.survival_excess(s).powi(n - 1)),
            &opts,
        )
    }
}

/// One predicted (or estimated) speedup value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupPoint {
    pub n: u32,
    pub speedup: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

/// Speedup as a function of core count, with the asymptote when it is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedupCurve {
    pub points: Vec<SpeedupPoint>,
    pub limit: Option<f64>,
    pub origin_slope: Option<f64>,
}

impl SpeedupCurve {
    pub fn cores(&self) -> Vec<u32> {
        self.points.iter().map(|p| p.n).collect()
    }

    pub fn at(&self, n: u32) -> Option<f64> {
        self.points.iter().find(|p| p.n == n).map(|p| p.speedup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn exp(x0: f64, lambda: f64) -> RuntimeDistribution {
        RuntimeDistribution::shifted_exponential(x0, lambda).unwrap()
    }

    fn lognormal(x0: f64, mu: f64, sigma: f64) -> RuntimeDistribution {
        RuntimeDistribution::shifted_lognormal(x0, mu, sigma).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(RuntimeDistribution::shifted_exponential(0.0, 0.0).is_err());
        assert!(RuntimeDistribution::shifted_exponential(-1.0, 1.0).is_err());
        assert!(RuntimeDistribution::shifted_lognormal(0.0, 1.0, -1.0).is_err());
        assert!(RuntimeDistribution::shifted_gaussian(0.0, 1.0, 0.0).is_err());
        assert!(RuntimeDistribution::shifted_lognormal(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn pdf_examples() {
        let d = exp(100.0, 0.001);
        assert_eq!(d.pdf(50.0), 0.0);
        assert!((d.pdf(100.0) - 0.001).abs() < 1e-18);

        let ln = lognormal(0.0, 5.0, 1.0);
        let want = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 5f64.exp());
        assert!(((ln.pdf(5f64.exp()) - want) / want).abs() < 1e-13);
    }

    #[test]
    fn cdf_examples() {
        let d = exp(100.0, 0.001);
        assert_eq!(d.cdf(100.0), 0.0);
        assert!((d.cdf(1100.0) - (1.0 - (-1f64).exp())).abs() < 1e-15);
        let ln = lognormal(0.0, 5.0, 1.0);
        assert!((ln.cdf(5f64.exp()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let ai = exp(1217.0, 9.15956e-6);
        assert!((ai.expectation() - 110_393.0).abs() / 110_393.0 < 1e-4);
        assert_eq!(exp(0.0, 2.0).expectation(), 0.5);
        let ln = lognormal(0.0, 5.0, 1.0);
        assert!((ln.expectation() - 5.5f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn expectation_matches_quadrature_for_every_family() {
        let dists = [
            exp(1217.0, 9.15956e-6),
            lognormal(0.0, 5.0, 1.0),
            lognormal(6210.0, 12.0275, 1.3398),
            RuntimeDistribution::shifted_gaussian(0.0, 1000.0, 400.0).unwrap(),
            RuntimeDistribution::shifted_gaussian(50.0, 10.0, 30.0).unwrap(),
        ];
        for d in dists {
            let q = d.min_expectation_quadrature(1).unwrap().value;
            let e = d.expectation();
            assert!(((q - e) / e).abs() < 1e-6, "{d:?}: quadrature {q} vs closed form {e}");
        }
    }

    #[test]
    fn min_expectation_examples() {
        assert_eq!(exp(100.0, 0.001).min_expectation(10).unwrap(), 200.0);
        let ai = exp(1217.0, 9.15956e-6);
        assert_eq!(ai.min_expectation(1).unwrap(), ai.expectation());

        // Min of two lognormals: 2 e^(mu + sigma^2/2) Phi(-sigma/sqrt 2); mpmath value.
        let ln = lognormal(0.0, 5.0, 1.0);
        let got = ln.min_expectation(2).unwrap();
        assert!((got - 117.329_811_418_855).abs() < 1e-7, "{got}");
        assert!(exp(1.0, 1.0).min_expectation(0).is_err());
    }

    #[test]
    fn min_of_two_lognormals_monte_carlo() {
        let ln = lognormal(0.0, 5.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = ln.sample(&mut rng, 2_000_000).unwrap();
        let mins: Vec<f64> = draws.chunks_exact(2).map(|c| c[0].min(c[1])).collect();
        let m = mins.len() as f64;
        let mean = mins.iter().sum::<f64>() / m;
        let var = mins.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let se = (var / m).sqrt();
        let exact = ln.min_expectation(2).unwrap();
        assert!((mean - exact).abs() < 4.0 * se, "MC {mean} +- {se} vs {exact}");
    }

    #[test]
    fn speedup_limit_examples() {
        let ai = exp(1217.0, 9.15956e-6);
        assert!((ai.speedup_limit().unwrap() - 90.7087).abs() < 1e-3);
        assert!((exp(100.0, 0.001).speedup_limit().unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(exp(0.0, 1.0).speedup_limit(), None);
        assert_eq!(lognormal(0.0, 5.0, 1.0).speedup_limit(), None);
        let ms = lognormal(6210.0, 12.0275, 1.3398);
        assert!((ms.speedup_limit().unwrap() - ms.expectation() / 6210.0).abs() < 1e-12);
    }

    #[test]
    fn speedup_curve_exponential_rows() {
        let ai = exp(1217.0, 9.15956e-6);
        let curve = ai.speedup_curve(&[16, 32, 64, 128, 256]).unwrap();
        for (p, want) in curve.points.iter().zip([13.7, 23.8, 37.8, 53.3, 67.2]) {
            assert!((p.speedup - want).abs() / want < 0.005, "n={} got {}", p.n, p.speedup);
        }
        assert_eq!(curve.origin_slope, Some(1217.0 * 9.15956e-6 + 1.0));

        let costas = exp(0.0, 5.4e-9);
        let curve = costas.speedup_curve(&[16, 32, 64, 128, 256]).unwrap();
        for p in &curve.points {
            assert_eq!(p.speedup, f64::from(p.n));
        }
        assert_eq!(curve.limit, None);
    }

    #[test]
    fn speedup_curve_lognormal_row() {
        let ms = lognormal(6210.0, 12.0275, 1.3398);
        let curve = ms.speedup_curve(&[16, 32, 64, 128, 256]).unwrap();
        for (p, want) in curve.points.iter().zip([15.94, 22.04, 28.28, 34.26, 39.7]) {
            assert!((p.speedup - want).abs() / want < 0.02, "n={} got {}", p.n, p.speedup);
        }
    }

    #[test]
    fn speedup_curve_rejects_bad_core_lists() {
        let d = exp(1.0, 1.0);
        assert!(d.speedup_curve(&[]).is_err());
        assert!(d.speedup_curve(&[4, 4]).is_err());
        assert!(d.speedup_curve(&[0, 2]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_above_shift() {
        let d = exp(5.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        assert!(d.sample(&mut rng, 0).is_err());

        let a = d.sample(&mut ChaCha8Rng::seed_from_u64(42), 1000).unwrap();
        let b = d.sample(&mut ChaCha8Rng::seed_from_u64(42), 1000).unwrap();
        assert_eq!(a, b);
        for dist in [d, lognormal(3.0, 1.0, 2.0), RuntimeDistribution::shifted_gaussian(2.0, 0.0, 1.0).unwrap()] {
            let xs = dist.sample(&mut rng, 10_000).unwrap();
            assert!(xs.iter().all(|&x| x >= dist.x0()));
        }
    }

    #[test]
    fn sample_mean_law_of_large_numbers() {
        let d = exp(5.0, 1.0);
        let xs = d.sample(&mut ChaCha8Rng::seed_from_u64(42), 1_000_000).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        // sd of Exp(1) is 1.
        let se = 1.0 / (xs.len() as f64).sqrt();
        assert!((mean - 6.0).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn json_round_trip_omits_absent_fields() {
        let d = exp(1217.0, 9.15956e-6);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"family":"shifted_exponential","x0":1217.0,"lambda":9.15956e-6}"#);
        let back: RuntimeDistribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);

        let bad = r#"{"family":"shifted_lognormal","x0":0.0,"mu":1.0}"#;
        assert!(serde_json::from_str::<RuntimeDistribution>(bad).is_err());
        let neg = r#"{"family":"shifted_exponential","x0":0.0,"lambda":-1.0}"#;
        assert!(serde_json::from_str::<RuntimeDistribution>(neg).is_err());
    }

    #[test]
    fn gaussian_truncation_renormalizes() {
        let g = RuntimeDistribution::shifted_gaussian(0.0, 0.0, 1.0).unwrap();
        // Half-normal: mean sqrt(2/pi), S(x0) = 1.
        assert!((g.expectation() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-14);
        assert_eq!(g.cdf(0.0), 0.0);
        assert!((g.pdf(0.0) - 2.0 * normal_pdf(0.0)).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in [exp(3.0, 0.2), lognormal(10.0, 2.0, 0.7), RuntimeDistribution::shifted_gaussian(1.0, 4.0, 2.0).unwrap()] {
            for i in 1..50 {
                let p = i as f64 / 50.0;
                let t = d.quantile(p).unwrap();
                assert!((d.cdf(t) - p).abs() < 1e-12, "{d:?} p={p}");
            }
            assert!(d.quantile(1.0).is_err());
        }
    }
}
