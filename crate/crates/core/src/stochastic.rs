//! Synthetic data generation: AR(1) fluctuations around a nondecreasing trend,
//! the long-run variance of the error process, and residual ACF diagnostics.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::streams::stream_rng;

/// Specification of the stationary AR(1) error process
/// `X_k = rho * X_{k-1} + eps_k` with Gaussian innovations scaled so that the
/// marginal standard deviation is `marginal_sd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Spec {
    pub rho: f64,
    pub marginal_sd: f64,
    pub seed: u64,
    pub burn_in: usize,
}

impl Ar1Spec {
    pub fn new(rho: f64, marginal_sd: f64, seed: u64) -> Result<Self> {
        if !rho.is_finite() || rho.abs() >= 1.0 {
            return Err(Error::invalid(
                "rho",
                format!("|rho| must be < 1, got {rho}"),
            ));
        }
        if !marginal_sd.is_finite() || marginal_sd <= 0.0 {
            return Err(Error::invalid(
                "marginal_sd",
                format!("marginal standard deviation must be > 0, got {marginal_sd}"),
            ));
        }
        Ok(Ar1Spec {
            rho,
            marginal_sd,
            seed,
            burn_in: 0,
        })
    }

    /// Extra initial steps to discard. The recursion starts from an exact
    /// draw of the marginal law, so the default of zero is already stationary.
    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Innovation standard deviation `marginal_sd * sqrt(1 - rho^2)`.
    pub fn innovation_sd(&self) -> f64 {
        self.marginal_sd * (1.0 - self.rho * self.rho).sqrt()
    }
}

/// Long-run variance `sigma^2 = lim Var(S_n)/n` of the AR(1) process: the sum
/// of all autocovariances, `marginal_sd^2 * (1 + rho) / (1 - rho)`.
pub fn long_run_variance_ar1(spec: &Ar1Spec) -> f64 {
    spec.marginal_sd * spec.marginal_sd * (1.0 + spec.rho) / (1.0 - spec.rho)
}

/// A stationary AR(1) path of length `n`: the start is drawn from the
/// marginal law, then the recursion is advanced once per returned value
/// (after `burn_in` discarded steps). Deterministic given `spec.seed`.
pub fn ar1_path(n: usize, spec: &Ar1Spec) -> Vec<f64> {
    let mut rng = stream_rng(spec.seed, 0);
    let sd_eps = spec.innovation_sd();
    let mut x: f64 = spec.marginal_sd * rng.sample::<f64, _>(StandardNormal);
    for _ in 0..spec.burn_in {
        x = spec.rho * x + sd_eps * rng.sample::<f64, _>(StandardNormal);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = spec.rho * x + sd_eps * rng.sample::<f64, _>(StandardNormal);
        out.push(x);
    }
    out
}

/// The trend shapes used by the simulation harness, plus an escape hatch for
/// arbitrary monotone trends. `phi` must be nondecreasing and continuous on
/// [0, 1].
#[derive(Debug, Clone, Copy)]
pub enum TrendFunction {
    /// `phi(t) = sqrt(t)`
    Sqrt,
    /// `phi(t) = t`
    Identity,
    /// `phi(t) = t^2`
    Square,
    Custom {
        name: &'static str,
        phi: fn(f64) -> f64,
        phi_prime: fn(f64) -> f64,
    },
}

impl TrendFunction {
    pub fn phi(&self, t: f64) -> f64 {
        match self {
            TrendFunction::Sqrt => t.sqrt(),
            TrendFunction::Identity => t,
            TrendFunction::Square => t * t,
            TrendFunction::Custom { phi, .. } => phi(t),
        }
    }

    pub fn phi_prime(&self, t: f64) -> f64 {
        match self {
            TrendFunction::Sqrt => 0.5 / t.sqrt(),
            TrendFunction::Identity => 1.0,
            TrendFunction::Square => 2.0 * t,
            TrendFunction::Custom { phi_prime, .. } => phi_prime(t),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            TrendFunction::Sqrt => "sqrt",
            TrendFunction::Identity => "identity",
            TrendFunction::Square => "square",
            TrendFunction::Custom { name, .. } => name,
        }
    }
}

impl PartialEq for TrendFunction {
    fn eq(&self, other: &Self) -> bool {
        // Custom variants compare by name; function pointer identity is
        // not meaningful across codegen units.
        self.name() == other.name()
    }
}

impl std::str::FromStr for TrendFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(TrendFunction::Sqrt),
            "identity" => Ok(TrendFunction::Identity),
            "square" => Ok(TrendFunction::Square),
            _ => Err(Error::invalid(
                "phi",
                format!("unknown trend function `{s}` (expected sqrt, identity or square)"),
            )),
        }
    }
}

/// A synthesized series `y_k = phi(k/n) + X_k` together with its exact
/// components. `values[k] == trend[k] + noise[k]` holds bit for bit, and
/// `noise` equals `ar1_path(n, spec)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSeries {
    pub series: TimeSeries,
    pub trend: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Generates `y_k = phi(k/n) + X_k` for `k = 1..n`, recording the true trend
/// alongside for error evaluation.
pub fn synthesize(n: usize, phi: &TrendFunction, spec: &Ar1Spec) -> SyntheticSeries {
    let noise = ar1_path(n, spec);
    let nf = n as f64;
    let trend: Vec<f64> = (1..=n).map(|k| phi.phi(k as f64 / nf)).collect();
    let values: Vec<f64> = trend.iter().zip(&noise).map(|(m, x)| m + x).collect();
    SyntheticSeries {
        series: TimeSeries::new(values).expect("trend plus AR(1) noise is finite and non-empty"),
        trend,
        noise,
    }
}

/// Sample autocorrelations at lags `0..=max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult {
    autocorrelations: Vec<f64>,
}

impl AcfResult {
    /// Autocorrelation at lag `h`; index 0 is always exactly 1.
    pub fn at(&self, lag: usize) -> f64 {
        self.autocorrelations[lag]
    }

    pub fn values(&self) -> &[f64] {
        &self.autocorrelations
    }

    pub fn max_lag(&self) -> usize {
        self.autocorrelations.len() - 1
    }
}

/// Mean-centered sample autocorrelations with the biased (1/n) covariance
/// normalizer, the standard correlogram convention.
pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = series.len();
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    if max_lag >= n {
        return Err(Error::LagTooLarge { lag: max_lag, n });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let denom: f64 = centered.iter().map(|c| c * c).sum();
    if denom == 0.0 {
        return Err(Error::ZeroVariance);
    }
    let mut autocorrelations = Vec::with_capacity(max_lag + 1);
    autocorrelations.push(1.0);
    for h in 1..=max_lag {
        let num: f64 = centered[..n - h]
            .iter()
            .zip(&centered[h..])
            .map(|(a, b)| a * b)
            .sum();
        autocorrelations.push(num / denom);
    }
    Ok(AcfResult { autocorrelations })
}
