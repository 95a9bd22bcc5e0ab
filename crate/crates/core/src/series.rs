//! Uniformly sampled time series and their CSV representation.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on sample spacing accepted when reading external CSV data.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// A uniformly sampled signal `x(t_0), ..., x(t_N)` with `t_i = t0 + i * dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
    label: String,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::InvalidSeries(format!("start time {t0} is not finite")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidSeries(format!("sampling interval {dt} must be > 0")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "{} sample(s); at least 2 are required",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("sample {i} is not finite")));
        }
        Ok(Self {
            t0,
            dt,
            values,
            label: label.into(),
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Sampling frequency in Hz.
    pub fn fs(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a series holds at least two samples.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last sample, `N`.
    pub fn last_index(&self) -> usize {
        self.values.len() - 1
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.last_index())
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.time(i))
    }

    /// Same grid, new values. Used by the noise generator.
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            t0: self.t0,
            dt: self.dt,
            values,
            label: self.label.clone(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Writes `t,value` rows with round-trip precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "value"])?;
        for (t, v) in self.times().zip(&self.values) {
            w.write_record([format!("{t:.16e}"), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `t,value` CSV. Rows must be uniformly spaced to within
    /// [`SPACING_TOLERANCE`] of the median spacing.
    pub fn read_csv<R: Read>(reader: R, label: impl Into<String>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::InvalidSeries(format!(
                "expected header `t,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |col: usize| -> Result<f64> {
                rec.get(col)
                    .ok_or_else(|| Error::InvalidSeries(format!("row {}: missing column {col}", row + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidSeries(format!("row {}: {e}", row + 1)))
            };
            times.push(parse(0)?);
            values.push(parse(1)?);
        }
        if times.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "{} sample(s); at least 2 are required",
                times.len()
            )));
        }
        let mut steps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        if let Some(bad) = steps.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::InvalidSeries(format!(
                "times are not strictly increasing at row {}",
                bad + 2
            )));
        }
        let mut sorted = steps.clone();
        sorted.sort_by(f64::total_cmp);
        let median = crate::stats::median_sorted(&sorted);
        for (i, s) in steps.iter_mut().enumerate() {
            if ((*s - median) / median).abs() > SPACING_TOLERANCE {
                return Err(Error::InvalidSeries(format!(
                    "non-uniform spacing at row {}: step {s} vs median {median}",
                    i + 2
                )));
            }
        }
        // The grid is rebuilt from the mean spacing so the last time matches.
        let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        Self::new(times[0], dt, values, label)
    }
}
