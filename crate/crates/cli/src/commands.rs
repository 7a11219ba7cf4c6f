//! Command implementations.

use std::fmt::Write as _;
use std::path::Path;

use monotrend::{
    acf as compute_acf, boundary_corrected_last, boundary_limit_sample, chernoff_quantiles,
    isotonic_trend, penalized_last_with_index, penalized_limit_sample, run_boundary, run_interior,
    run_penalized, synthesize, Ar1Spec, BmGrid, BoundarySpec, ColumnKind, ExperimentConfig,
    LimitLaw, PenaltySpec, QuantileTable, ReplicationReport, TimeSeries, TrendFunction,
    TABLE_PROBE_PS,
};

use crate::args::{AcfArgs, FitArgs, Format, Law, LimitsArgs, SimulateArgs, TablesArgs, Which};
use crate::io::{config_hash, derived_path, provenance_line, read_series, write_file};
use crate::{CliError, CliResult};

fn parse_list<T: std::str::FromStr>(raw: &str, name: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| CliError::Validation(format!("--{name}: cannot parse `{s}`: {e}")))
        })
        .collect()
}

fn penalty_from(alpha: f64, lambda: Option<f64>) -> CliResult<PenaltySpec> {
    Ok(match lambda {
        Some(l) => PenaltySpec::with_lambda(l)?,
        None => PenaltySpec::new(alpha)?,
    })
}

fn boundary_from(ell: f64, m: Option<usize>) -> CliResult<BoundarySpec> {
    Ok(match m {
        Some(m) => BoundarySpec::with_m(m)?,
        None => BoundarySpec::new(ell)?,
    })
}

/// Step-function coordinates of a fitted trend: two `(x, level)` rows per
/// level set, using numeric labels for `x` when available.
fn step_coordinates(series: &TimeSeries, fit: &monotrend::TrendFit) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = match series.labels() {
        Some(labels) if labels.iter().all(|l| l.parse::<f64>().is_ok()) => {
            labels.iter().map(|l| l.parse().unwrap()).collect()
        }
        _ => (1..=series.len()).map(|k| k as f64).collect(),
    };
    let mut out = Vec::new();
    for w in fit.knots().windows(2) {
        let level = fit.mu_tilde()[w[0]];
        out.push((xs[w[0]], level));
        out.push((xs[w[1] - 1], level));
    }
    out
}

pub fn fit(a: FitArgs, verbose: u8) -> CliResult<()> {
    let parsed = read_series(&a.input, a.column)?;
    let y = &parsed.series;
    let n = y.len();
    if verbose > 0 {
        eprintln!(
            "read {n} observations from {} (column {})",
            a.input, parsed.value_column
        );
    }

    let trend = isotonic_trend(y);
    let pspec = penalty_from(a.alpha.unwrap_or(1.0), a.lambda)?;
    let (pen_value, pen_index) = penalized_last_with_index(y, &pspec);
    let bspec = boundary_from(a.ell.unwrap_or(1.0), a.m)?;
    // With the default rate rule a very short series may leave no interior
    // index; report the estimate as unavailable. An explicit --ell/--m that
    // cannot resolve is a hard error.
    let boundary = match bspec.resolve_m(n) {
        Ok(m) => Some((m, boundary_corrected_last(y, &bspec)?)),
        Err(e) if a.ell.is_none() && a.m.is_none() => {
            eprintln!("note: boundary-corrected estimate unavailable: {e}");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let residuals: Vec<f64> = y
        .values()
        .iter()
        .zip(trend.mu_tilde())
        .map(|(v, m)| v - m)
        .collect();
    let max_lag = a.max_lag.unwrap_or(n / 4).min(n.saturating_sub(1));
    // A perfect fit (monotone input) has zero-variance residuals and no
    // defined correlogram; emit an empty ACF table instead of failing.
    let acf = match compute_acf(&residuals, max_lag) {
        Ok(acf) => Some(acf),
        Err(monotrend::Error::ZeroVariance) => {
            eprintln!("note: residuals have zero variance; ACF skipped");
            None
        }
        Err(e) => return Err(e.into()),
    };

    let hash = config_hash(&(&a.input, a.column, a.alpha, a.lambda, a.ell, a.m));
    let header = provenance_line(None, &hash);
    let labels = y.labels().expect("reader always attaches labels");

    let mut fit_csv = format!("{header}\nlabel,value,trend,residual\n");
    for i in 0..n {
        writeln!(
            fit_csv,
            "{},{},{},{}",
            labels[i],
            y.values()[i],
            trend.mu_tilde()[i],
            residuals[i]
        )
        .unwrap();
    }
    write_file(&derived_path(&a.out_dir, &a.input, "_fit.csv"), &fit_csv)?;

    let mut step_csv = format!("{header}\nx,level\n");
    for (x, level) in step_coordinates(y, &trend) {
        writeln!(step_csv, "{x},{level}").unwrap();
    }
    write_file(&derived_path(&a.out_dir, &a.input, "_step.csv"), &step_csv)?;

    let mut acf_csv = format!("{header}\nlag,acf\n");
    if let Some(acf) = &acf {
        for (lag, r) in acf.values().iter().enumerate() {
            writeln!(acf_csv, "{lag},{r}").unwrap();
        }
    }
    write_file(&derived_path(&a.out_dir, &a.input, "_acf.csv"), &acf_csv)?;

    let estimates = serde_json::json!({
        "n": n,
        "trend_last": trend.last(),
        "penalized": {
            "alpha": pspec.alpha(),
            "lambda": pspec.lambda(n),
            "value": pen_value,
            "suffix_start": pen_index,
        },
        "boundary": boundary.map(|(m, value)| serde_json::json!({
            "ell": bspec.ell(),
            "m": m,
            "value": value,
        })),
        "provenance": {
            "tool": "monotrend",
            "version": env!("CARGO_PKG_VERSION"),
            "input": a.input,
            "config": hash,
        },
    });
    write_file(
        &derived_path(&a.out_dir, &a.input, "_estimates.json"),
        &serde_json::to_string_pretty(&estimates).expect("estimates serialize"),
    )?;

    let boundary_note = match boundary {
        Some((m, value)) => format!("{value:.6} (m = {m})"),
        None => "unavailable".to_string(),
    };
    println!(
        "n = {n}; isotonic last = {:.6}; penalized = {:.6} (lambda = {:.4}); boundary-corrected = {boundary_note}",
        trend.last(),
        pen_value,
        pspec.lambda(n),
    );
    Ok(())
}

pub fn simulate(a: SimulateArgs, verbose: u8) -> CliResult<()> {
    let phi: TrendFunction = a
        .phi
        .parse()
        .map_err(|e: monotrend::Error| CliError::Validation(e.to_string()))?;
    if a.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let spec = Ar1Spec::new(a.rho, a.marginal_sd, a.seed)?.with_burn_in(a.burn_in);
    let syn = synthesize(a.n, &phi, &spec);
    let hash = config_hash(&(a.n, &a.phi, a.rho, a.marginal_sd, a.seed, a.burn_in));
    let mut csv = format!("{}\n", provenance_line(Some(a.seed), &hash));
    if a.components {
        csv.push_str("label,value,trend,noise\n");
        for k in 0..a.n {
            writeln!(
                csv,
                "{},{},{},{}",
                k + 1,
                syn.series.values()[k],
                syn.trend[k],
                syn.noise[k]
            )
            .unwrap();
        }
    } else {
        csv.push_str("label,value\n");
        for k in 0..a.n {
            writeln!(csv, "{},{}", k + 1, syn.series.values()[k]).unwrap();
        }
    }
    write_file(Path::new(&a.out), &csv)?;
    if verbose > 0 {
        eprintln!("wrote {} rows to {}", a.n, a.out);
    }
    Ok(())
}

fn require(value: Option<f64>, name: &str, law: &str) -> CliResult<f64> {
    value
        .ok_or_else(|| CliError::Validation(format!("missing required --{name} for the {law} law")))
}

/// Computes (or loads from cache) the quantile table for one limit law.
fn quantile_table(a: &LimitsArgs) -> CliResult<(QuantileTable, bool)> {
    let ps: Vec<f64> = match &a.probs {
        Some(raw) => parse_list(raw, "probs")?,
        None => TABLE_PROBE_PS.to_vec(),
    };

    let (law, grid) = match a.law {
        Law::Chernoff => {
            let lower = a.lower.unwrap_or(-2.5);
            let upper = a.upper.unwrap_or(2.5);
            (LimitLaw::Chernoff, BmGrid::new(lower, upper, a.step)?)
        }
        Law::Boundary => {
            let ell = require(a.ell, "ell", "boundary")?;
            let sigma = require(a.sigma, "sigma", "boundary")?;
            let slope = require(a.phi1_prime, "phi1-prime", "boundary")?;
            let grid = match (a.lower, a.upper) {
                (None, None) => BmGrid::boundary_window(ell, sigma, slope, a.step)?,
                (lower, upper) => {
                    let default = BmGrid::boundary_window(ell, sigma, slope, a.step)?;
                    BmGrid::new(
                        lower.unwrap_or(default.lower()),
                        upper.unwrap_or(default.upper()),
                        a.step,
                    )?
                }
            };
            (
                LimitLaw::Boundary {
                    ell,
                    phi1_prime: slope,
                    sigma,
                },
                grid,
            )
        }
        Law::Penalized => {
            let alpha = require(a.alpha, "alpha", "penalized")?;
            let phi1 = require(a.phi1, "phi1", "penalized")?;
            let slope = require(a.phi1_prime, "phi1-prime", "penalized")?;
            let sigma = require(a.sigma, "sigma", "penalized")?;
            let grid = match a.upper {
                None => BmGrid::penalized_window(alpha, phi1, slope, sigma, a.step)?,
                Some(t) => BmGrid::new(0.0, t, a.step)?,
            };
            (
                LimitLaw::Penalized {
                    alpha,
                    phi1,
                    phi1_prime: slope,
                    sigma,
                },
                grid,
            )
        }
    };

    let key = QuantileTable::cache_key(&law, a.reps, &grid, a.seed);
    let cache_path = Path::new(&a.cache_dir).join(format!("{}-{key}.json", law.name()));
    if !a.fresh {
        if let Ok(text) = std::fs::read_to_string(&cache_path) {
            if let Ok(table) = QuantileTable::from_json(&text) {
                if table.probabilities == ps {
                    return Ok((table, true));
                }
            }
        }
    }

    let table = match law {
        LimitLaw::Chernoff => chernoff_quantiles(&ps, a.reps, &grid, a.seed)?,
        LimitLaw::Boundary {
            ell,
            phi1_prime,
            sigma,
        } => {
            let sample = boundary_limit_sample(ell, phi1_prime, sigma, a.reps, &grid, a.seed)?;
            QuantileTable::from_sample(&sample, &ps)?
        }
        LimitLaw::Penalized {
            alpha,
            phi1,
            phi1_prime,
            sigma,
        } => {
            let sample =
                penalized_limit_sample(alpha, phi1, phi1_prime, sigma, a.reps, &grid, a.seed)?;
            QuantileTable::from_sample(&sample, &ps)?
        }
    };
    write_file(&cache_path, &table.to_json_pretty())?;
    Ok((table, false))
}

pub fn limits(a: LimitsArgs, verbose: u8) -> CliResult<()> {
    let (table, cache_hit) = quantile_table(&a)?;
    if table.provenance.truncation_warning {
        eprintln!("warning: extremum hit the grid window in more than 1% of replications");
    }
    let law_name = table.provenance.law.name().to_string();
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| format!("{law_name}_quantiles.json"));
    write_file(Path::new(&out), &table.to_json_pretty())?;
    println!(
        "{} table with {} probes written to {out}{}",
        law_name,
        table.probabilities.len(),
        if cache_hit { " (cache hit)" } else { "" }
    );
    if verbose > 0 {
        for (p, q) in table.probabilities.iter().zip(&table.quantiles) {
            eprintln!("  q({p}) = {q}");
        }
    }
    Ok(())
}

fn experiment_config(a: &TablesArgs) -> CliResult<ExperimentConfig> {
    let rhos: Vec<f64> = parse_list(&a.rhos, "rhos")?;
    let phis: Vec<TrendFunction> = a
        .phis
        .split(',')
        .map(|s| s.trim().parse::<TrendFunction>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let t0s: Vec<f64> = parse_list(&a.t0s, "t0s")?;
    let mut cfg = ExperimentConfig::desk_interior(a.seed);
    cfg.n = a.n;
    cfg.reps = a.reps;
    cfg.rhos = rhos;
    cfg.phis = phis;
    cfg.t0s = t0s;
    cfg.marginal_sd = a.marginal_sd;
    cfg.asymptotic_reps = a.asym_reps;
    cfg.limit_step = a.limit_step;
    match a.which {
        Which::Penalized => {
            if a.alpha.is_none() && a.lambda.is_none() {
                return Err(CliError::Validation(
                    "missing required --alpha for the penalized tabulation".into(),
                ));
            }
            cfg.penalty = Some(penalty_from(a.alpha.unwrap_or(1.0), a.lambda)?);
        }
        Which::Boundary => {
            if a.ell.is_none() && a.m.is_none() {
                return Err(CliError::Validation(
                    "missing required --ell for the boundary tabulation".into(),
                ));
            }
            cfg.boundary = Some(boundary_from(a.ell.unwrap_or(1.0), a.m)?);
        }
        Which::Interior => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A cheap consistency pass over a finished report: every column must be a
/// CDF sampled at increasing probes.
fn verify_report(rep: &ReplicationReport) -> CliResult<()> {
    for c in &rep.columns {
        if !c.values.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(CliError::Internal(format!(
                "column {} rho {} holds values outside [0, 1]",
                c.phi, c.rho
            )));
        }
        let cumulative = !matches!(c.kind, ColumnKind::SweepMin | ColumnKind::SweepMax);
        if cumulative && c.values.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Internal(format!(
                "column {} rho {} is not nondecreasing",
                c.phi, c.rho
            )));
        }
    }
    Ok(())
}

pub fn tables(a: TablesArgs, verbose: u8) -> CliResult<()> {
    let cfg = experiment_config(&a)?;
    // Hash the statistical configuration only, not output paths.
    let hash = config_hash(&(a.which, &cfg, a.chernoff_reps));

    let report = match a.which {
        Which::Interior => {
            let limits_args = LimitsArgs {
                law: Law::Chernoff,
                reps: a.chernoff_reps,
                step: a.limit_step,
                lower: None,
                upper: None,
                ell: None,
                sigma: None,
                phi1_prime: None,
                alpha: None,
                phi1: None,
                probs: None,
                seed: monotrend::streams::derive_seed(a.seed, 0xC4E7),
                out: None,
                cache_dir: a.cache_dir.clone(),
                fresh: a.fresh,
            };
            let (table, cache_hit) = quantile_table(&limits_args)?;
            if verbose > 0 {
                eprintln!(
                    "interior probes from a {}-replication table{}",
                    table.provenance.reps,
                    if cache_hit { " (cache hit)" } else { "" }
                );
            }
            run_interior(&cfg, &table)?
        }
        Which::Boundary => run_boundary(&cfg)?,
        Which::Penalized => run_penalized(&cfg)?,
    };
    verify_report(&report)?;

    let provenance = provenance_line(Some(a.seed), &hash);
    let mut written = Vec::new();
    if matches!(a.format, Format::Csv | Format::Both) {
        for (name, body) in report.csv_tables() {
            let path = Path::new(&a.out_dir).join(format!("{name}.csv"));
            write_file(&path, &format!("{provenance}\n{body}"))?;
            written.push(path.display().to_string());
        }
    }
    if matches!(a.format, Format::Json | Format::Both) {
        let name = match a.which {
            Which::Interior => "interior",
            Which::Boundary => "boundary",
            Which::Penalized => "penalized",
        };
        let path = Path::new(&a.out_dir).join(format!("{name}.json"));
        write_file(&path, &report.to_json_pretty())?;
        written.push(path.display().to_string());
    }
    println!("wrote {}", written.join(", "));
    Ok(())
}

pub fn acf(a: AcfArgs, verbose: u8) -> CliResult<()> {
    let parsed = read_series(&a.input, a.column)?;
    let n = parsed.series.len();
    let max_lag = a.max_lag.unwrap_or(n / 4).min(n.saturating_sub(1));
    let result = compute_acf(parsed.series.values(), max_lag)?;
    let hash = config_hash(&(&a.input, a.column, max_lag));
    let mut csv = format!("{}\nlag,acf\n", provenance_line(None, &hash));
    for (lag, r) in result.values().iter().enumerate() {
        writeln!(csv, "{lag},{r}").unwrap();
    }
    write_file(Path::new(&a.out), &csv)?;
    if verbose > 0 {
        eprintln!("wrote lags 0..={max_lag} to {}", a.out);
    }
    println!(
        "acf(1) = {:.4} over {n} observations",
        result.at(1.min(max_lag))
    );
    Ok(())
}
