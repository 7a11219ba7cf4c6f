//! Replication engine: generates many synthetic series, applies the
//! estimators, and tabulates empirical distribution functions of the
//! normalized estimation errors at limit-law probe points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    boundary_corrected_last, isotonic_trend, kappa, penalized_last, snap_index, BoundarySpec,
    PenaltySpec,
};
use crate::limits::{
    boundary_limit_sample, penalized_limit_sample, BmGrid, QuantileTable, TableProvenance,
};
use crate::stochastic::{long_run_variance_ar1, synthesize, Ar1Spec, TrendFunction};
use crate::streams::derive_seed;

/// The probe probabilities used by the interior tabulation.
pub const TABLE_PROBE_PS: [f64; 15] = [
    0.025, 0.05, 0.10, 0.20, 0.25, 0.30, 0.40, 0.50, 0.60, 0.70, 0.75, 0.80, 0.90, 0.95, 0.975,
];

/// The probe points used by the boundary and penalized tabulations.
pub const TABLE_PROBE_ZS: [f64; 11] = [-2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5];

const SWEEP_LO: f64 = 1.0 / 3.0;
const SWEEP_HI: f64 = 2.0 / 3.0;

/// Binomial standard error `sqrt(p (1 - p) / reps)` of an empirical CDF value.
pub fn standard_error(p: f64, reps: usize) -> Result<f64> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(Error::invalid(
            "p",
            format!("probability must lie in (0, 1), got {p}"),
        ));
    }
    if reps < 1 {
        return Err(Error::invalid("reps", "at least one replication"));
    }
    Ok((p * (1.0 - p) / reps as f64).sqrt())
}

/// Configuration for one replication experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Length of each synthetic series.
    pub n: usize,
    /// Number of replications per (rho, phi) cell.
    pub reps: usize,
    pub rhos: Vec<f64>,
    pub phis: Vec<TrendFunction>,
    /// Interior evaluation points; snapped to `floor(n t)/n`.
    pub t0s: Vec<f64>,
    /// Required by [`run_penalized`]. The penalty rate is deliberately not
    /// defaulted there: results depend on it and callers must choose.
    pub penalty: Option<PenaltySpec>,
    /// Required by [`run_boundary`], same reasoning.
    pub boundary: Option<BoundarySpec>,
    pub marginal_sd: f64,
    pub seed: u64,
    /// Interior probes: probabilities whose limit-law quantiles are probed.
    pub probe_ps: Vec<f64>,
    /// Boundary/penalized probes: points where the CDFs are tabulated.
    pub probe_zs: Vec<f64>,
    /// Interior sweep resolution over `[1/3, 2/3]` for the min/max columns.
    pub sweep_points: usize,
    /// Replications for the matching limit-law column; 0 skips that column.
    pub asymptotic_reps: usize,
    /// Grid step for the limit-law samplers.
    pub limit_step: f64,
}

impl ExperimentConfig {
    /// Full-scale interior setup: n = 150, 10,000 replications,
    /// rho in {.5, .9}, all three trends, t0 in {1/3, 1/2, 2/3}.
    pub fn paper_interior(seed: u64) -> Self {
        ExperimentConfig {
            n: 150,
            reps: 10_000,
            rhos: vec![0.5, 0.9],
            phis: vec![
                TrendFunction::Square,
                TrendFunction::Identity,
                TrendFunction::Sqrt,
            ],
            t0s: vec![1.0 / 3.0, 0.5, 2.0 / 3.0],
            penalty: None,
            boundary: None,
            marginal_sd: 0.25,
            seed,
            probe_ps: TABLE_PROBE_PS.to_vec(),
            probe_zs: TABLE_PROBE_ZS.to_vec(),
            sweep_points: 11,
            asymptotic_reps: 20_000,
            limit_step: 1e-3,
        }
    }

    /// Desk-scale variant: 2,000 replications, tolerances widened accordingly.
    pub fn desk_interior(seed: u64) -> Self {
        ExperimentConfig {
            reps: 2_000,
            ..Self::paper_interior(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", "need at least two observations"));
        }
        if self.reps < 1 {
            return Err(Error::invalid("reps", "at least one replication"));
        }
        if self.rhos.is_empty() {
            return Err(Error::invalid("rhos", "at least one rho"));
        }
        for &rho in &self.rhos {
            if !rho.is_finite() || rho.abs() >= 1.0 {
                return Err(Error::invalid(
                    "rhos",
                    format!("|rho| < 1 required, got {rho}"),
                ));
            }
        }
        if self.phis.is_empty() {
            return Err(Error::invalid("phis", "at least one trend function"));
        }
        for &t in &self.t0s {
            if !t.is_finite() || t <= 0.0 || t >= 1.0 {
                return Err(Error::invalid(
                    "t0s",
                    format!("t0 must lie in (0, 1), got {t}"),
                ));
            }
        }
        if !self.marginal_sd.is_finite() || self.marginal_sd <= 0.0 {
            return Err(Error::invalid("marginal_sd", "must be > 0"));
        }
        for &p in &self.probe_ps {
            if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                return Err(Error::invalid(
                    "probe_ps",
                    format!("probe {p} outside (0, 1)"),
                ));
            }
        }
        if self.probe_ps.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("probe_ps", "must be strictly increasing"));
        }
        if self.probe_zs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("probe_zs", "must be strictly increasing"));
        }
        if self.sweep_points < 2 {
            return Err(Error::invalid(
                "sweep_points",
                "need at least 2 sweep points",
            ));
        }
        if !self.limit_step.is_finite() || self.limit_step <= 0.0 {
            return Err(Error::invalid("limit_step", "must be > 0"));
        }
        Ok(())
    }

    fn cells(&self) -> Vec<(usize, TrendFunction, f64)> {
        let mut out = Vec::new();
        let mut ci = 0;
        for &phi in &self.phis {
            for &rho in &self.rhos {
                out.push((ci, phi, rho));
                ci += 1;
            }
        }
        out
    }

    /// Per-replication seed; depends only on the cell index and replication
    /// index, so every estimator run over the same config sees the same
    /// series. Replications can be distributed across workers freely.
    fn rep_seed(&self, cell: usize, rep: usize) -> u64 {
        derive_seed(self.seed, ((cell as u64) << 40) | rep as u64)
    }

    /// Seed for the matching limit-law sampler of a cell.
    fn asym_seed(&self, cell: usize) -> u64 {
        derive_seed(self.seed, 0xA57A_0000_0000_0000 | cell as u64)
    }

    fn provenance(&self, kind: ReportKind, chernoff: Option<TableProvenance>) -> ReportProvenance {
        ReportProvenance {
            kind,
            n: self.n,
            reps: self.reps,
            rhos: self.rhos.clone(),
            phis: self.phis.iter().map(|p| p.name().to_string()).collect(),
            t0s: self.t0s.clone(),
            ell: self.boundary.map(|b| b.ell()),
            lambda: self.penalty.map(|p| p.lambda(self.n)),
            m: self.boundary.and_then(|b| b.resolve_m(self.n).ok()),
            marginal_sd: self.marginal_sd,
            seed: self.seed,
            sweep_points: self.sweep_points,
            asymptotic_reps: self.asymptotic_reps,
            limit_step: self.limit_step,
            chernoff,
        }
    }
}

/// Which tabulation a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Interior,
    Boundary,
    Penalized,
}

/// What a report column holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Interior empirical CDF at a snapped evaluation point.
    T0(f64),
    /// Pointwise minimum over the t0 sweep.
    SweepMin,
    /// Pointwise maximum over the t0 sweep.
    SweepMax,
    /// Boundary/penalized empirical CDF at the configured n.
    FiniteN,
    /// Matching limit-law CDF column.
    Asymptotic,
}

/// One tabulated column: empirical CDF values, one per probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportColumn {
    pub phi: String,
    pub rho: f64,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

/// Echo of the configuration that produced a report, for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportProvenance {
    pub kind: ReportKind,
    pub n: usize,
    pub reps: usize,
    pub rhos: Vec<f64>,
    pub phis: Vec<String>,
    pub t0s: Vec<f64>,
    pub ell: Option<f64>,
    pub lambda: Option<f64>,
    pub m: Option<usize>,
    pub marginal_sd: f64,
    pub seed: u64,
    pub sweep_points: usize,
    pub asymptotic_reps: usize,
    pub limit_step: f64,
    pub chernoff: Option<TableProvenance>,
}

/// An empirical-CDF table over probe points, one column per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub kind: ReportKind,
    /// Probe probabilities (interior) or probe points (boundary/penalized).
    pub probes: Vec<f64>,
    /// Interior only: the limit-law quantiles the CDF was evaluated at.
    pub probe_quantiles: Option<Vec<f64>>,
    /// Interior only: binomial standard errors `sqrt(p(1-p)/reps)` per probe.
    pub se: Vec<f64>,
    pub columns: Vec<ReportColumn>,
    pub provenance: ReportProvenance,
}

impl ReplicationReport {
    pub fn column(&self, phi: &str, rho: f64, kind: ColumnKind) -> Option<&ReportColumn> {
        self.columns.iter().find(|c| {
            c.phi == phi
                && (c.rho - rho).abs() < 1e-12
                && match (c.kind, kind) {
                    (ColumnKind::T0(a), ColumnKind::T0(b)) => (a - b).abs() < 1e-9,
                    (a, b) => a == b,
                }
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| Error::invalid("report", format!("malformed JSON: {e}")))
    }

    /// Renders the report as CSV tables, one table per trend shape for the
    /// interior report and a single table otherwise. Rows are probes,
    /// columns are cells.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        match self.kind {
            ReportKind::Interior => self
                .provenance
                .phis
                .iter()
                .map(|phi| (format!("interior_{phi}"), self.interior_csv(phi)))
                .collect(),
            ReportKind::Boundary => vec![("boundary".to_string(), self.z_csv())],
            ReportKind::Penalized => vec![("penalized".to_string(), self.z_csv())],
        }
    }

    fn interior_csv(&self, phi: &str) -> String {
        let mut header = String::from("p,se");
        let cols: Vec<&ReportColumn> = self.columns.iter().filter(|c| c.phi == phi).collect();
        for c in &cols {
            match c.kind {
                ColumnKind::T0(t) => header.push_str(&format!(",rho{}_t0_{t:.4}", c.rho)),
                ColumnKind::SweepMin => header.push_str(&format!(",rho{}_min", c.rho)),
                ColumnKind::SweepMax => header.push_str(&format!(",rho{}_max", c.rho)),
                _ => {}
            }
        }
        let mut out = header;
        out.push('\n');
        for (i, p) in self.probes.iter().enumerate() {
            out.push_str(&format!("{p},{:.4}", self.se[i]));
            for c in &cols {
                out.push_str(&format!(",{:.4}", c.values[i]));
            }
            out.push('\n');
        }
        out
    }

    fn z_csv(&self) -> String {
        let mut header = String::from("z");
        for c in &self.columns {
            let tag = match c.kind {
                ColumnKind::FiniteN => format!("{}_rho{}_n{}", c.phi, c.rho, self.provenance.n),
                ColumnKind::Asymptotic => format!("{}_rho{}_limit", c.phi, c.rho),
                _ => continue,
            };
            header.push_str(&format!(",{tag}"));
        }
        let mut out = header;
        out.push('\n');
        for (i, z) in self.probes.iter().enumerate() {
            out.push_str(&format!("{z}"));
            for c in &self.columns {
                out.push_str(&format!(",{:.4}", c.values[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// Interior tabulation: for every (phi, rho) cell, the empirical CDF of
/// the scaled statistic at the limit-law quantiles `chernoff.quantile_for(p)`
/// for each probe `p`, at each configured t0 plus pointwise min/max columns
/// over an equispaced t0 sweep of `[1/3, 2/3]` (the sweep reuses each
/// replication's series).
pub fn run_interior(cfg: &ExperimentConfig, chernoff: &QuantileTable) -> Result<ReplicationReport> {
    cfg.validate()?;
    let probes_q: Vec<f64> = cfg
        .probe_ps
        .iter()
        .map(|&p| chernoff.quantile_for(p))
        .collect::<Result<_>>()?;
    let np = probes_q.len();
    let n = cfg.n;
    let cbrt_n = (n as f64).cbrt();

    let main_ks: Vec<usize> = cfg
        .t0s
        .iter()
        .map(|&t| snap_index(n, t))
        .collect::<Result<_>>()?;
    let sweep_ks: Vec<usize> = (0..cfg.sweep_points)
        .map(|i| {
            let t = SWEEP_LO + (SWEEP_HI - SWEEP_LO) * i as f64 / (cfg.sweep_points - 1) as f64;
            snap_index(n, t)
        })
        .collect::<Result<_>>()?;
    let mut eval_ks: Vec<usize> = main_ks.iter().chain(&sweep_ks).copied().collect();
    eval_ks.sort_unstable();
    eval_ks.dedup();
    let slot = |k: usize| eval_ks.binary_search(&k).expect("evaluation point present");
    let nk = eval_ks.len();

    let mut columns = Vec::new();
    for (ci, phi, rho) in cfg.cells() {
        let sigma = long_run_variance_ar1(&Ar1Spec::new(rho, cfg.marginal_sd, 0)?).sqrt();
        let kappas: Vec<f64> = eval_ks
            .iter()
            .map(|&k| {
                let t = k as f64 / n as f64;
                let slope = phi.phi_prime(t);
                if !slope.is_finite() || slope <= 0.0 {
                    return Err(Error::invalid(
                        "phi_prime",
                        format!("phi'({t}) = {slope} must be > 0 for the scaled statistic"),
                    ));
                }
                Ok(kappa(sigma, slope))
            })
            .collect::<Result<_>>()?;

        let counts = (0..cfg.reps)
            .into_par_iter()
            .fold(
                || vec![0u64; nk * np],
                |mut acc, r| {
                    let spec = Ar1Spec {
                        rho,
                        marginal_sd: cfg.marginal_sd,
                        seed: cfg.rep_seed(ci, r),
                        burn_in: 0,
                    };
                    let syn = synthesize(n, &phi, &spec);
                    let fit = isotonic_trend(&syn.series);
                    for (ki, &k) in eval_ks.iter().enumerate() {
                        let xi = cbrt_n * (fit.mu_tilde()[k - 1] - syn.trend[k - 1]);
                        let v = xi / kappas[ki];
                        for (pi, &q) in probes_q.iter().enumerate() {
                            if v <= q {
                                acc[ki * np + pi] += 1;
                            }
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; nk * np],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );

        let cdf_at = |ki: usize, pi: usize| counts[ki * np + pi] as f64 / cfg.reps as f64;
        for &k in &main_ks {
            let ki = slot(k);
            columns.push(ReportColumn {
                phi: phi.name().to_string(),
                rho,
                kind: ColumnKind::T0(k as f64 / n as f64),
                values: (0..np).map(|pi| cdf_at(ki, pi)).collect(),
            });
        }
        let mins: Vec<f64> = (0..np)
            .map(|pi| {
                sweep_ks
                    .iter()
                    .map(|&k| cdf_at(slot(k), pi))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let maxs: Vec<f64> = (0..np)
            .map(|pi| {
                sweep_ks
                    .iter()
                    .map(|&k| cdf_at(slot(k), pi))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        columns.push(ReportColumn {
            phi: phi.name().to_string(),
            rho,
            kind: ColumnKind::SweepMin,
            values: mins,
        });
        columns.push(ReportColumn {
            phi: phi.name().to_string(),
            rho,
            kind: ColumnKind::SweepMax,
            values: maxs,
        });
    }

    let se = cfg
        .probe_ps
        .iter()
        .map(|&p| standard_error(p, cfg.reps))
        .collect::<Result<_>>()?;
    Ok(ReplicationReport {
        kind: ReportKind::Interior,
        probes: cfg.probe_ps.clone(),
        probe_quantiles: Some(probes_q),
        se,
        columns,
        provenance: cfg.provenance(ReportKind::Interior, Some(chernoff.provenance.clone())),
    })
}

/// Normalized last-point errors `n^(1/3) (estimate - phi(1))` tabulated at
/// the z probes, one finite-n column per (phi, rho) cell, each paired with
/// the CDF of the matching limit law sampled at the same parameters; no
/// normalization constant is applied to either axis.
fn run_endpoint(
    cfg: &ExperimentConfig,
    kind: ReportKind,
    estimate: impl Fn(&crate::series::TimeSeries) -> Result<f64> + Sync,
    asym: impl Fn(TrendFunction, f64, u64) -> Result<Vec<f64>>,
) -> Result<ReplicationReport> {
    cfg.validate()?;
    let n = cfg.n;
    let cbrt_n = (n as f64).cbrt();
    let zs = &cfg.probe_zs;
    let np = zs.len();

    let mut columns = Vec::new();
    for (ci, phi, rho) in cfg.cells() {
        let counts = (0..cfg.reps)
            .into_par_iter()
            .map(|r| -> Result<Vec<u64>> {
                let spec = Ar1Spec {
                    rho,
                    marginal_sd: cfg.marginal_sd,
                    seed: cfg.rep_seed(ci, r),
                    burn_in: 0,
                };
                let syn = synthesize(n, &phi, &spec);
                let err = cbrt_n * (estimate(&syn.series)? - syn.trend[n - 1]);
                Ok(zs.iter().map(|&z| u64::from(err <= z)).collect())
            })
            .try_reduce(
                || vec![0u64; np],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )?;
        columns.push(ReportColumn {
            phi: phi.name().to_string(),
            rho,
            kind: ColumnKind::FiniteN,
            values: counts.iter().map(|&c| c as f64 / cfg.reps as f64).collect(),
        });
        if cfg.asymptotic_reps > 0 {
            let sigma = long_run_variance_ar1(&Ar1Spec::new(rho, cfg.marginal_sd, 0)?).sqrt();
            columns.push(ReportColumn {
                phi: phi.name().to_string(),
                rho,
                kind: ColumnKind::Asymptotic,
                values: asym(phi, sigma, cfg.asym_seed(ci))?,
            });
        }
    }

    Ok(ReplicationReport {
        kind,
        probes: zs.clone(),
        probe_quantiles: None,
        se: Vec::new(),
        columns,
        provenance: cfg.provenance(kind, None),
    })
}

/// Boundary-corrected tabulation; requires `cfg.boundary`.
pub fn run_boundary(cfg: &ExperimentConfig) -> Result<ReplicationReport> {
    let bspec = cfg
        .boundary
        .ok_or_else(|| Error::invalid("ell", "boundary spec is required for the boundary run"))?;
    bspec.resolve_m(cfg.n)?;
    run_endpoint(
        cfg,
        ReportKind::Boundary,
        |y| boundary_corrected_last(y, &bspec),
        |phi, sigma, seed| {
            let slope = phi.phi_prime(1.0);
            let grid = BmGrid::boundary_window(bspec.ell(), sigma, slope, cfg.limit_step)?;
            let sample =
                boundary_limit_sample(bspec.ell(), slope, sigma, cfg.asymptotic_reps, &grid, seed)?;
            Ok(cfg
                .probe_zs
                .iter()
                .map(|&z| sample.empirical_cdf(z))
                .collect())
        },
    )
}

/// Penalized tabulation; requires `cfg.penalty`.
pub fn run_penalized(cfg: &ExperimentConfig) -> Result<ReplicationReport> {
    let pspec = cfg
        .penalty
        .ok_or_else(|| Error::invalid("alpha", "penalty spec is required for the penalized run"))?;
    run_endpoint(
        cfg,
        ReportKind::Penalized,
        |y| Ok(penalized_last(y, &pspec)),
        |phi, sigma, seed| {
            let alpha = pspec.effective_alpha(cfg.n);
            let phi1 = phi.phi(1.0);
            let slope = phi.phi_prime(1.0);
            let grid = BmGrid::penalized_window(alpha, phi1, slope, sigma, cfg.limit_step)?;
            let sample = penalized_limit_sample(
                alpha,
                phi1,
                slope,
                sigma,
                cfg.asymptotic_reps,
                &grid,
                seed,
            )?;
            Ok(cfg
                .probe_zs
                .iter()
                .map(|&z| sample.empirical_cdf(z))
                .collect())
        },
    )
}
