use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Normalization;
use crate::bank::{self, BenchFunction};
use crate::error::{Error, Result};
use crate::noise::Snr;
use crate::stats;
use crate::thresholding::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Persistence,
    Molinaro,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Persistence => "persistence",
            Method::Molinaro => "molinaro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The method ran but produced no first-root estimate.
    Missing,
    /// Baseline not run: the noisy series does not start positive.
    SkippedPrecondition,
    /// Baseline hit its iteration guard.
    GuardTripped,
    Failed,
}

/// One method's result on one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub function: u32,
    pub fs_hz: f64,
    pub snr: Snr,
    pub seed: u64,
    pub method: Method,
    pub threshold_policy: Option<Policy>,
    pub mu: Option<f64>,
    pub first_root_est: Option<f64>,
    pub first_root_true: f64,
    /// In the sweep's configured normalization.
    pub rel_err: Option<f64>,
    pub rel_err_interval: Option<f64>,
    pub rel_err_root: Option<f64>,
    pub wall_time_s: f64,
    pub n_true_roots: usize,
    pub n_found: usize,
    pub uncertain_count: usize,
    pub status: Status,
    /// Certain root estimates, ascending. Not written to CSV.
    pub estimates: Vec<f64>,
}

impl BenchRecord {
    pub(super) fn new(f: &BenchFunction, fs_hz: f64, snr: Snr, seed: u64) -> Self {
        BenchRecord {
            function: f.id,
            fs_hz,
            snr,
            seed,
            method: Method::Persistence,
            threshold_policy: None,
            mu: None,
            first_root_est: None,
            first_root_true: f.earliest_root().unwrap_or(f64::NAN),
            rel_err: None,
            rel_err_interval: None,
            rel_err_root: None,
            wall_time_s: 0.0,
            n_true_roots: f.roots.len(),
            n_found: 0,
            uncertain_count: 0,
            status: Status::Ok,
            estimates: Vec::new(),
        }
    }

    pub(super) fn failed(mut self, method: Method, e: &Error) -> Self {
        log::warn!("x{} at {} Hz, SNR {}, seed {}: {} failed: {e}", self.function, self.fs_hz, self.snr, self.seed, method.name());
        self.method = method;
        self.status = Status::Failed;
        self
    }

    pub(super) fn set_estimate(&mut self, f: &BenchFunction, est: Option<f64>, norm: Normalization) {
        self.first_root_est = est;
        match est {
            Some(t) => {
                self.rel_err_interval = Some(Normalization::Interval.rel_err(f, t));
                self.rel_err_root = Some(Normalization::Root.rel_err(f, t));
                self.rel_err = Some(norm.rel_err(f, t));
                self.status = Status::Ok;
            }
            None => self.status = Status::Missing,
        }
    }

    pub fn rel_err_in(&self, norm: Normalization) -> Option<f64> {
        match norm {
            Normalization::Interval => self.rel_err_interval,
            Normalization::Root => self.rel_err_root,
        }
    }
}

/// CSV shape of a [`BenchRecord`]; the first fifteen columns are the stable
/// interface, the two trailing ones carry both normalizations.
#[derive(Debug, Serialize, Deserialize)]
struct RecordRow {
    function: String,
    fs_hz: f64,
    snr_db: String,
    seed: u64,
    method: Method,
    threshold_policy: Option<Policy>,
    mu: Option<f64>,
    first_root_est: Option<f64>,
    first_root_true: f64,
    rel_err: Option<f64>,
    wall_time_s: f64,
    n_true_roots: usize,
    n_found: usize,
    uncertain_count: usize,
    status: Status,
    rel_err_interval: Option<f64>,
    rel_err_root: Option<f64>,
}

fn parse_function(name: &str) -> Result<u32> {
    name.strip_prefix('x')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::InvalidSeries(format!("bad function name `{name}`")))
}

impl From<&BenchRecord> for RecordRow {
    fn from(r: &BenchRecord) -> Self {
        RecordRow {
            function: format!("x{}", r.function),
            fs_hz: r.fs_hz,
            snr_db: r.snr.to_string(),
            seed: r.seed,
            method: r.method,
            threshold_policy: r.threshold_policy,
            mu: r.mu,
            first_root_est: r.first_root_est,
            first_root_true: r.first_root_true,
            rel_err: r.rel_err,
            wall_time_s: r.wall_time_s,
            n_true_roots: r.n_true_roots,
            n_found: r.n_found,
            uncertain_count: r.uncertain_count,
            status: r.status,
            rel_err_interval: r.rel_err_interval,
            rel_err_root: r.rel_err_root,
        }
    }
}

impl TryFrom<RecordRow> for BenchRecord {
    type Error = Error;
    fn try_from(r: RecordRow) -> Result<Self> {
        Ok(BenchRecord {
            function: parse_function(&r.function)?,
            fs_hz: r.fs_hz,
            snr: r.snr_db.parse()?,
            seed: r.seed,
            method: r.method,
            threshold_policy: r.threshold_policy,
            mu: r.mu,
            first_root_est: r.first_root_est,
            first_root_true: r.first_root_true,
            rel_err: r.rel_err,
            rel_err_interval: r.rel_err_interval,
            rel_err_root: r.rel_err_root,
            wall_time_s: r.wall_time_s,
            n_true_roots: r.n_true_roots,
            n_found: r.n_found,
            uncertain_count: r.uncertain_count,
            status: r.status,
            estimates: Vec::new(),
        })
    }
}

fn write_rows<W: Write, T: Serialize>(rows: impl IntoIterator<Item = T>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_records_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    write_rows(records.iter().map(RecordRow::from), w)
}

pub fn read_records_csv<R: Read>(r: R) -> Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(r)
        .deserialize::<RecordRow>()
        .map(|row| BenchRecord::try_from(row?))
        .collect()
}

/// Per-(function, fs, SNR, method) summary over seeds. Runs without an
/// estimate count towards `n_missing` and enter the error statistics at the
/// worst possible error (see [`Normalization::penalty`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub function: String,
    pub fs_hz: f64,
    pub snr_db: String,
    pub method: Method,
    pub n: usize,
    pub n_missing: usize,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    pub mean_wall_time_s: f64,
    pub median_wall_time_s: f64,
}

pub fn aggregate(records: &[BenchRecord], norm: Normalization) -> Vec<AggregateRow> {
    type Key = (u32, u64, u64, Method);
    let snr_key = |s: Snr| match s {
        Snr::Clean => u64::MAX,
        Snr::Db(db) => db.to_bits(),
    };
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, (Snr, Vec<&BenchRecord>)> = BTreeMap::new();
    for r in records {
        let key = (r.function, r.fs_hz.to_bits(), snr_key(r.snr), r.method);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                (r.snr, Vec::new())
            })
            .1
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let (snr, rows) = &groups[&key];
            let penalty = bank::bench_function(key.0).map_or(1.0, |f| norm.penalty(f));
            let errs: Vec<f64> = rows.iter().map(|r| r.rel_err_in(norm).unwrap_or(penalty)).collect();
            let times: Vec<f64> = rows.iter().map(|r| r.wall_time_s).collect();
            AggregateRow {
                function: format!("x{}", key.0),
                fs_hz: f64::from_bits(key.1),
                snr_db: snr.to_string(),
                method: key.3,
                n: rows.len(),
                n_missing: rows.iter().filter(|r| r.rel_err_in(norm).is_none()).count(),
                mean_rel_err: stats::mean(&errs),
                median_rel_err: stats::median(&errs),
                mean_wall_time_s: stats::mean(&times),
                median_wall_time_s: stats::median(&times),
            }
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(rows: &[AggregateRow], w: W) -> Result<()> {
    write_rows(rows, w)
}

pub fn read_aggregate_csv<R: Read>(r: R) -> Result<Vec<AggregateRow>> {
    Ok(csv::Reader::from_reader(r).deserialize().collect::<Result<_, _>>()?)
}

/// Certain-bracket count against the true root count, per persistence run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingCountRow {
    pub function: String,
    pub fs_hz: f64,
    pub snr_db: String,
    pub seed: u64,
    pub n_true_roots: usize,
    pub n_found: usize,
    pub delta: i64,
}

pub fn crossing_counts(records: &[BenchRecord]) -> Vec<CrossingCountRow> {
    records
        .iter()
        .filter(|r| r.method == Method::Persistence && r.status != Status::Failed)
        .map(|r| CrossingCountRow {
            function: format!("x{}", r.function),
            fs_hz: r.fs_hz,
            snr_db: r.snr.to_string(),
            seed: r.seed,
            n_true_roots: r.n_true_roots,
            n_found: r.n_found,
            delta: r.n_found as i64 - r.n_true_roots as i64,
        })
        .collect()
}

pub fn write_crossing_counts_csv<W: Write>(rows: &[CrossingCountRow], w: W) -> Result<()> {
    write_rows(rows, w)
}
