//! Observation containers: the raw series being fit and per-observation weights.

use crate::error::{Error, Result};

/// An observed time series `y_1..y_n`, optionally carrying time labels
/// (e.g. years). This is the estimation input everywhere in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    /// Builds a series from raw values. Rejects empty input and non-finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(TimeSeries {
            values,
            labels: None,
        })
    }

    /// Builds a labelled series; `labels` must have one entry per value.
    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                got: labels.len(),
            });
        }
        let mut s = Self::new(values)?;
        s.labels = Some(labels);
        Ok(s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty input
    }
}

/// Strictly positive per-observation weights for the weighted isotonic fit.
/// All uses in the simulation harness are unit weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    w: Vec<f64>,
}

impl Weights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::EmptySeries);
        }
        for (index, &value) in w.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::NonPositiveWeight { index, value });
            }
        }
        Ok(Weights { w })
    }

    /// Unit weights of length `n`.
    pub fn unit(n: usize) -> Self {
        Weights { w: vec![1.0; n] }
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
