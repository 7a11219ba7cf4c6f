//! Nonparametric estimation of a nondecreasing trend observed with stationary
//! dependent fluctuations.
//!
//! The crate provides:
//!
//! - [`isotonic`]: greatest-convex-minorant computation on a finite diagram,
//!   pool-adjacent-violators fitting, and a brute-force min-max oracle for
//!   differential testing;
//! - [`estimators`]: the isotonic trend fit plus two last-point estimators
//!   that damp the endpoint spiking problem (a penalized suffix maximum and
//!   an interior boundary correction), and the normalized error statistic;
//! - [`stochastic`]: seeded AR(1) synthesis around a monotone trend, the
//!   closed-form long-run variance, and residual ACF diagnostics;
//! - [`limits`]: Monte Carlo samplers and quantile tables for the three
//!   limiting distributions of the normalized errors (Chernoff's law, the
//!   restricted-minorant boundary law, the penalized sup-functional law);
//! - [`replication`]: a deterministic, parallel harness tabulating empirical
//!   CDFs of normalized errors against limit-law probe points.
//!
//! Everything randomized is driven by per-replication ChaCha streams, so
//! results are reproducible bit for bit regardless of thread count.

pub mod error;
pub mod estimators;
pub mod isotonic;
pub mod limits;
pub mod replication;
pub mod series;
pub mod stochastic;
pub mod streams;

mod sums;

pub use error::{Error, Result};
pub use estimators::{
    boundary_corrected_last, isotonic_trend, penalized_last, penalized_last_with_index,
    xi_from_fit, xi_statistic, BoundarySpec, PenaltySpec, TrendFit, XiStatistic,
};
pub use isotonic::{cusum_diagram, gcm, left_derivative, minmax_oracle, pava, Diagram, GcmFit};
pub use limits::{
    boundary_limit_sample, chernoff_quantiles, chernoff_sample, penalized_limit_sample,
    two_sided_bm, BmGrid, LimitLaw, LimitSample, QuantileTable, TableProvenance,
};
pub use replication::{
    run_boundary, run_interior, run_penalized, standard_error, ColumnKind, ExperimentConfig,
    ReplicationReport, ReportColumn, ReportKind, ReportProvenance, TABLE_PROBE_PS, TABLE_PROBE_ZS,
};
pub use series::{TimeSeries, Weights};
pub use stochastic::{
    acf, ar1_path, long_run_variance_ar1, synthesize, AcfResult, Ar1Spec, SyntheticSeries,
    TrendFunction,
};
