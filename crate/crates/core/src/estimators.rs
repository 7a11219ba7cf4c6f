//! The three trend estimators: the full isotonic fit, the penalized last-point
//! estimator, and the boundary-corrected last-point estimator, plus the
//! normalized estimation-error statistic used by the replication harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isotonic::pava_blocks;
use crate::series::TimeSeries;
use crate::stochastic::TrendFunction;
use crate::sums::suffix_sums;

/// The isotonic trend fit: nondecreasing level values `mu_tilde[k-1]` for
/// observation `k`, and the level-set boundaries as cumulative-sum diagram
/// knot indices (`0` and `n` always included; block `j` covers observations
/// `knots[j]+1 ..= knots[j+1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrendFit {
    mu_tilde: Vec<f64>,
    knots: Vec<usize>,
    n: usize,
}

impl TrendFit {
    pub fn mu_tilde(&self) -> &[f64] {
        &self.mu_tilde
    }

    pub fn knots(&self) -> &[usize] {
        &self.knots
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fitted value at 1-based observation index `k`.
    pub fn value_at(&self, k: usize) -> Result<f64> {
        if k < 1 || k > self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                n: self.n,
            });
        }
        Ok(self.mu_tilde[k - 1])
    }

    /// Fitted value at the last observation.
    pub fn last(&self) -> f64 {
        self.mu_tilde[self.n - 1]
    }
}

/// Fits the isotonic (nondecreasing least-squares) trend: level sets from
/// the pool-adjacent-violators pass, level values as block means from
/// compensated suffix sums. Singleton blocks carry the raw observation, so a
/// nondecreasing input is reproduced bit for bit; the last level agrees
/// exactly with the suffix scan in [`penalized_last`] at zero penalty.
pub fn isotonic_trend(y: &TimeSeries) -> TrendFit {
    let n = y.len();
    let blocks = pava_blocks(y.values(), &vec![1.0; n]);
    let suffix = suffix_sums(y.values());
    let block_mean = |a: usize, b: usize| {
        if b - a == 1 {
            y.values()[a]
        } else {
            (suffix[a] - suffix[b]) / (b - a) as f64
        }
    };

    // Re-deriving block values from the suffix sums can leave a float-tied
    // pair out of order by an ulp; merge such pairs so the fit is
    // nondecreasing on every input.
    let mut knots: Vec<usize> = Vec::with_capacity(blocks.len() + 1);
    knots.push(0);
    let mut means: Vec<f64> = Vec::with_capacity(blocks.len());
    let mut end = 0;
    for block in &blocks {
        end += block.len;
        let mut a = *knots.last().unwrap();
        let mut m = block_mean(a, end);
        while means.last().is_some_and(|&prev| prev > m) {
            means.pop();
            knots.pop();
            a = *knots.last().unwrap();
            m = block_mean(a, end);
        }
        means.push(m);
        knots.push(end);
    }

    let mut mu_tilde = Vec::with_capacity(n);
    for (w, &m) in knots.windows(2).zip(&means) {
        mu_tilde.extend(std::iter::repeat_n(m, w[1] - w[0]));
    }
    TrendFit { mu_tilde, knots, n }
}

/// Penalty configuration for the penalized last-point estimator. The default
/// rule is `lambda_n = alpha * n^(1/3)`; an explicit lambda overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    alpha: f64,
    lambda_override: Option<f64>,
}

impl PenaltySpec {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::invalid(
                "alpha",
                format!("alpha must be > 0, got {alpha}"),
            ));
        }
        Ok(PenaltySpec {
            alpha,
            lambda_override: None,
        })
    }

    /// Fixed penalty, bypassing the rate rule. `lambda = 0` recovers the raw
    /// isotonic value at the last point.
    pub fn with_lambda(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid(
                "lambda",
                format!("lambda must be >= 0, got {lambda}"),
            ));
        }
        Ok(PenaltySpec {
            alpha: 1.0,
            lambda_override: Some(lambda),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda_override
            .unwrap_or_else(|| self.alpha * (n as f64).cbrt())
    }

    /// The penalty rate implied by the resolved lambda, `lambda / n^(1/3)`.
    pub fn effective_alpha(&self, n: usize) -> f64 {
        match self.lambda_override {
            Some(l) => l / (n as f64).cbrt(),
            None => self.alpha,
        }
    }
}

impl Default for PenaltySpec {
    fn default() -> Self {
        PenaltySpec {
            alpha: 1.0,
            lambda_override: None,
        }
    }
}

/// Smoothing configuration for the boundary-corrected estimator. The default
/// rule evaluates the isotonic fit at `m_n = n - ceil(ell * n^(1/3))`; an
/// explicit index overrides it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    ell: f64,
    m_override: Option<usize>,
}

impl BoundarySpec {
    pub fn new(ell: f64) -> Result<Self> {
        if !ell.is_finite() || ell <= 0.0 {
            return Err(Error::invalid("ell", format!("ell must be > 0, got {ell}")));
        }
        Ok(BoundarySpec {
            ell,
            m_override: None,
        })
    }

    /// Fixed evaluation index (1-based). `m = n` recovers the raw isotonic
    /// value at the last point.
    pub fn with_m(m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("m", "m must be at least 1"));
        }
        Ok(BoundarySpec {
            ell: 1.0,
            m_override: Some(m),
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// The 1-based index the estimator evaluates at for a series of length `n`.
    pub fn resolve_m(&self, n: usize) -> Result<usize> {
        let m = match self.m_override {
            Some(m) => m,
            None => {
                let offset = (self.ell * (n as f64).cbrt()).ceil() as usize;
                if offset >= n {
                    return Err(Error::invalid(
                        "ell",
                        format!("offset ceil(ell * n^(1/3)) = {offset} leaves no index in 1..={n}"),
                    ));
                }
                n - offset
            }
        };
        if m < 1 || m > n {
            return Err(Error::IndexOutOfRange { index: m, n });
        }
        Ok(m)
    }
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            ell: 1.0,
            m_override: None,
        }
    }
}

/// Penalized last-point estimate `max_i (y_i + ... + y_n) / (n - i + 1 + lambda)`,
/// an exact maximum over all suffixes via a running compensated suffix sum.
pub fn penalized_last(y: &TimeSeries, p: &PenaltySpec) -> f64 {
    penalized_last_with_index(y, p).0
}

/// As [`penalized_last`], also reporting the 1-based start of the maximizing
/// suffix (smallest such index under ties).
pub fn penalized_last_with_index(y: &TimeSeries, p: &PenaltySpec) -> (f64, usize) {
    let n = y.len();
    let lambda = p.lambda(n);
    let suffix = suffix_sums(y.values());
    let mut best = f64::NEG_INFINITY;
    let mut arg = 1;
    for i in 1..=n {
        let c = suffix[i - 1] / ((n - i + 1) as f64 + lambda);
        if c > best {
            best = c;
            arg = i;
        }
    }
    (best, arg)
}

/// Boundary-corrected last-point estimate: the isotonic fit evaluated at the
/// interior index `m_n` resolved from `b`.
pub fn boundary_corrected_last(y: &TimeSeries, b: &BoundarySpec) -> Result<f64> {
    let m = b.resolve_m(y.len())?;
    isotonic_trend(y).value_at(m)
}

/// The normalized estimation error of the isotonic fit at an interior point,
/// `n^(1/3) * (mu_tilde(t) - phi(t))`, with `t` snapped to `floor(n t)/n`,
/// and its scaled version divided by `kappa = (sigma^2 phi'(t) / 2)^(1/3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiStatistic {
    /// `n^(1/3) * (mu_tilde(t) - phi(t))` at the snapped point.
    pub raw: f64,
    /// `raw / kappa`; absent when `sigma == 0`.
    pub scaled: Option<f64>,
    /// The snapped evaluation point `floor(n t)/n`.
    pub t_snapped: f64,
    /// The scaling constant, absent when `sigma == 0`.
    pub kappa: Option<f64>,
}

/// Snaps `t` to the diagram point `floor(n t)/n`, returning the 1-based
/// observation index. A small nudge keeps exact multiples (e.g. `t = 1/3`
/// with `n` divisible by 3) from flooring down through float dust.
pub(crate) fn snap_index(n: usize, t: f64) -> Result<usize> {
    if !t.is_finite() || t <= 0.0 || t > 1.0 {
        return Err(Error::OutOfDomain {
            t,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let k = (n as f64 * t + 1e-9).floor() as usize;
    if k < 1 {
        return Err(Error::OutOfDomain {
            t,
            lo: 1.0 / n as f64,
            hi: 1.0,
        });
    }
    Ok(k.min(n))
}

pub(crate) fn kappa(sigma: f64, phi_prime: f64) -> f64 {
    (0.5 * sigma * sigma * phi_prime).cbrt()
}

/// Computes [`XiStatistic`] from an existing fit. `sigma` is the long-run
/// standard deviation of the errors; pass 0 to skip the scaled statistic.
pub fn xi_from_fit(
    fit: &TrendFit,
    phi: &TrendFunction,
    t_n: f64,
    sigma: f64,
) -> Result<XiStatistic> {
    let n = fit.n();
    let k = snap_index(n, t_n)?;
    let t_snapped = k as f64 / n as f64;
    let raw = (n as f64).cbrt() * (fit.mu_tilde()[k - 1] - phi.phi(t_snapped));
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(
            "sigma",
            format!("sigma must be >= 0, got {sigma}"),
        ));
    }
    if sigma == 0.0 {
        return Ok(XiStatistic {
            raw,
            scaled: None,
            t_snapped,
            kappa: None,
        });
    }
    let slope = phi.phi_prime(t_snapped);
    if !slope.is_finite() || slope <= 0.0 {
        return Err(Error::invalid(
            "phi_prime",
            format!("phi'({t_snapped}) = {slope} must be > 0 for the scaled statistic"),
        ));
    }
    let kappa = kappa(sigma, slope);
    Ok(XiStatistic {
        raw,
        scaled: Some(raw / kappa),
        t_snapped,
        kappa: Some(kappa),
    })
}

/// Fits the isotonic trend and computes [`XiStatistic`] at `t_n`.
pub fn xi_statistic(
    y: &TimeSeries,
    phi: &TrendFunction,
    t_n: f64,
    sigma: f64,
) -> Result<XiStatistic> {
    xi_from_fit(&isotonic_trend(y), phi, t_n, sigma)
}
