//! Accuracy and runtime experiments: persistence bracketing against the
//! Lipschitz baseline on the first root of each benchmark function, swept
//! over sampling rates, noise levels and seeds.
//!
//! Every cell is independent and seeded from its coordinates (see
//! [`cell_seed`]), so the sweep runs in parallel and still emits the same rows
//! in the same order as a serial run.

mod records;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bank::{self, BenchFunction};
use crate::bracketing::{bracket_split, sign_split, Retention};
use crate::error::{Error, Result};
use crate::molinaro::{self, MolinaroParams, ResultKind};
use crate::noise::{add_noise, NoiseSpec, Snr};
use crate::thresholding::{select_threshold, ThresholdConfig, ThresholdSpec};

pub use records::{
    aggregate, crossing_counts, read_aggregate_csv, read_records_csv, write_aggregate_csv, write_crossing_counts_csv,
    write_records_csv, AggregateRow, BenchRecord, CrossingCountRow, Method, Status,
};
pub use svg::{bar_chart_svg, heatmap_svg};

/// How absolute first-root errors are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `|t_est - t_true| / (t_b - t_a)`
    #[default]
    Interval,
    /// `|t_est - t_true| / |t_true|`
    Root,
}

impl Normalization {
    fn scale(self, f: &BenchFunction) -> f64 {
        match self {
            Normalization::Interval => f.interval.1 - f.interval.0,
            Normalization::Root => f.earliest_root().map_or(f64::NAN, f64::abs),
        }
    }

    pub fn rel_err(self, f: &BenchFunction, est: f64) -> f64 {
        let truth = f.earliest_root().unwrap_or(f64::NAN);
        (est - truth).abs() / self.scale(f)
    }

    /// Error charged to a run that produced no estimate: the largest error an
    /// estimate inside the interval could have.
    pub fn penalty(self, f: &BenchFunction) -> f64 {
        let truth = f.earliest_root().unwrap_or(f64::NAN);
        let (a, b) = f.interval;
        (truth - a).abs().max((b - truth).abs()) / self.scale(f)
    }
}

/// Axes and settings of a sweep. Deserializes from the `[sweep]` table of a
/// config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub functions: Vec<u32>,
    pub fs: Vec<f64>,
    pub snr: Vec<Snr>,
    pub seeds: Vec<u64>,
    pub threshold: ThresholdConfig,
    pub baseline: MolinaroParams,
    pub rel_err: Normalization,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            functions: (2..=14).collect(),
            fs: vec![25.0, 100.0, 500.0, 1000.0, 5000.0],
            snr: vec![Snr::Db(15.0), Snr::Db(30.0), Snr::Db(45.0), Snr::Clean],
            seeds: (0..10).collect(),
            threshold: ThresholdConfig::default(),
            baseline: MolinaroParams::default(),
            rel_err: Normalization::Interval,
            output_dir: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.functions.is_empty() || self.fs.is_empty() || self.snr.is_empty() || self.seeds.is_empty() {
            return bad("sweep axes (functions, fs, snr, seeds) must be non-empty");
        }
        for &id in &self.functions {
            let f = bank::bench_function(id)?;
            if f.earliest_root().is_none() {
                return Err(Error::InvalidParameter(format!("{} has no true root", f.name())));
            }
        }
        if self.fs.iter().any(|&fs| !(fs > 0.0 && fs.is_finite())) {
            return bad("sampling frequencies must be positive");
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return bad("seeds must be distinct");
        }
        self.threshold.to_spec()?;
        self.baseline.validate()
    }

    /// Cells in output order: function, then fs, then SNR, then seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &function in &self.functions {
            for &fs in &self.fs {
                for &snr in &self.snr {
                    for &seed in &self.seeds {
                        cells.push(Cell { function, fs, snr, seed });
                    }
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub function: u32,
    pub fs: f64,
    pub snr: Snr,
    pub seed: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed used for a cell's noise and forest: splitmix64 folded over the
/// function id, the bit patterns of fs and SNR (clean = all ones) and the
/// user seed, in that order.
pub fn cell_seed(function: u32, fs: f64, snr: Snr, seed: u64) -> u64 {
    let snr_bits = match snr {
        Snr::Clean => u64::MAX,
        Snr::Db(db) => db.to_bits(),
    };
    [u64::from(function), fs.to_bits(), snr_bits, seed]
        .into_iter()
        .fold(0, |h, x| splitmix64(h ^ x))
}

fn seeded(spec: &ThresholdSpec, seed: u64) -> ThresholdSpec {
    let mut spec = spec.clone();
    match &mut spec {
        ThresholdSpec::IsolationForest(cfg) | ThresholdSpec::Auto { forest: cfg, .. } => {
            cfg.seed = splitmix64(cfg.seed ^ seed);
        }
        _ => {}
    }
    spec
}

/// Runs both methods on one cell and returns `[persistence, molinaro]`.
/// Failures are recorded in the rows' status, never returned.
pub fn run_cell(
    f: &BenchFunction,
    fs: f64,
    snr: Snr,
    seed: u64,
    threshold: &ThresholdSpec,
    params: &MolinaroParams,
    norm: Normalization,
) -> [BenchRecord; 2] {
    let base = BenchRecord::new(f, fs, snr, seed);
    let series = f
        .sample(fs)
        .and_then(|s| add_noise(&s, &NoiseSpec { snr, seed: cell_seed(f.id, fs, snr, seed) }));
    let series = match series {
        Ok(s) => s,
        Err(e) => {
            let fail = |method| base.clone().failed(method, &e);
            return [fail(Method::Persistence), fail(Method::Molinaro)];
        }
    };

    let mut pers = base.clone();
    pers.method = Method::Persistence;
    let spec = seeded(threshold, cell_seed(f.id, fs, snr, seed));
    let start = Instant::now();
    let outcome = (|| {
        let split = sign_split(&series);
        let sel = select_threshold(&spec, &series, &split)?;
        let brackets = bracket_split(&series, &split, sel.mu, Retention::Strict)?;
        Ok::<_, Error>((sel, brackets))
    })();
    pers.wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok((sel, brackets)) => {
            pers.threshold_policy = Some(sel.policy);
            pers.mu = Some(sel.mu);
            pers.estimates = brackets.iter().filter(|b| !b.uncertain).map(|b| b.estimate).collect();
            pers.n_found = pers.estimates.len();
            pers.uncertain_count = brackets.len() - pers.n_found;
            // Earliest certain bracket; an uncertain one only when nothing else
            // was found.
            let first = pers.estimates.first().copied().or(brackets.first().map(|b| b.estimate));
            pers.set_estimate(f, first, norm);
        }
        Err(e) => pers = pers.failed(Method::Persistence, &e),
    }

    let mut mol = base;
    mol.method = Method::Molinaro;
    if !(series.values()[0] > 0.0) {
        mol.status = Status::SkippedPrecondition;
    } else {
        let start = Instant::now();
        let res = molinaro::first_zero_crossing(&series, params);
        mol.wall_time_s = start.elapsed().as_secs_f64();
        match res {
            Ok(r) => {
                let est = (r.kind == ResultKind::Crossing).then_some(r.location);
                mol.estimates = est.into_iter().collect();
                mol.n_found = mol.estimates.len();
                mol.set_estimate(f, est, norm);
            }
            Err(Error::IterationLimit { .. }) => mol.status = Status::GuardTripped,
            Err(e) => mol = mol.failed(Method::Molinaro, &e),
        }
    }
    [pers, mol]
}

/// Runs every cell of `spec` (in parallel) and returns the rows in cell order,
/// persistence before molinaro within a cell.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let threshold = spec.threshold.to_spec()?;
    let rows: Vec<[BenchRecord; 2]> = spec
        .cells()
        .par_iter()
        .map(|c| {
            let f = bank::bench_function(c.function).expect("validated");
            run_cell(f, c.fs, c.snr, c.seed, &threshold, &spec.baseline, spec.rel_err)
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Persistence-only crossing counts per cell.
pub fn crossing_count_report(spec: &ExperimentSpec) -> Result<Vec<CrossingCountRow>> {
    Ok(crossing_counts(&run_sweep(spec)?))
}

/// Files written by [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<BenchRecord>,
    pub aggregate: Vec<AggregateRow>,
    pub files: Vec<PathBuf>,
}

/// Runs the sweep and writes `records.csv`, `aggregate.csv`,
/// `crossing_counts.csv`, per-function heatmaps (fs × SNR) of mean relative
/// error and mean wall time for each method, and per-(fs, SNR) bar charts.
pub fn sweep(spec: &ExperimentSpec, out_dir: &Path) -> Result<SweepOutput> {
    let records = run_sweep(spec)?;
    let aggregate = aggregate(&records, spec.rel_err);
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, write: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        write(&path)?;
        files.push(path);
        Ok(())
    };

    put("records.csv".into(), &|p| write_records_csv(&records, fs::File::create(p)?))?;
    put("aggregate.csv".into(), &|p| write_aggregate_csv(&aggregate, fs::File::create(p)?))?;
    put("crossing_counts.csv".into(), &|p| {
        write_crossing_counts_csv(&crossing_counts(&records), fs::File::create(p)?)
    })?;

    for &id in &spec.functions {
        for method in [Method::Persistence, Method::Molinaro] {
            for (metric, label) in [(Metric::RelErr, "rel_err"), (Metric::WallTime, "wall_time")] {
                let doc = heatmap_svg(&aggregate, id, method, metric, &spec.fs, &spec.snr);
                put(format!("heat_{label}_x{id}_{}.svg", method.name()), &|p| Ok(fs::write(p, &doc)?))?;
            }
        }
    }
    for &fs_hz in &spec.fs {
        for &snr in &spec.snr {
            let doc = bar_chart_svg(&aggregate, fs_hz, snr, &spec.functions);
            put(format!("bar_rel_err_{fs_hz}hz_{snr}.svg"), &|p| Ok(fs::write(p, &doc)?))?;
        }
    }
    Ok(SweepOutput {
        records,
        aggregate,
        files,
    })
}

/// Quantity shown in a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    RelErr,
    WallTime,
}
