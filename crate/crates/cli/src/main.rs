mod args;
mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;
use zerobracket::bank;
use zerobracket::bracketing::{bracket_split, sign_split, BracketInterval, Retention, Source as Side};
use zerobracket::harness::{self, write_records_csv, Normalization};
use zerobracket::molinaro::{self, FirstCrossingResult};
use zerobracket::noise::{add_noise, NoiseSpec, Snr};
use zerobracket::thresholding::{select_threshold, Policy};
use zerobracket::{Error, TimeSeries};

use args::{Cli, Command, Format, InputArgs, OutputArgs, OUT_DIR_ENV};
use config::Config;

const EXIT_INPUT: u8 = 2;
const EXIT_NO_BRACKETS: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;
const EXIT_GUARD: u8 = 5;
const DEFAULT_FS: f64 = 1000.0;
const DEFAULT_OUT_DIR: &str = "zerobracket-out";

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::NonPositiveStart(_)) => EXIT_PRECONDITION,
        Some(Error::IterationLimit { .. }) => EXIT_GUARD,
        _ => EXIT_INPUT,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Brackets {
            input,
            threshold,
            inclusive,
            out,
        } => {
            let retention = if inclusive { Retention::Inclusive } else { Retention::Strict };
            let spec = config.threshold_with(&threshold).to_spec()?;
            let (series, noise) = load(&input)?;
            let split = sign_split(&series);
            let sel = select_threshold(&spec, &series, &split)?;
            let brackets = bracket_split(&series, &split, sel.mu, retention)?;
            let report = BracketReport {
                input: series.label().to_string(),
                snr: noise.snr,
                seed: noise.seed,
                policy: sel.policy,
                requested_policy: spec.policy(),
                fell_back: sel.fell_back,
                mu: sel.mu,
                brackets: brackets.clone(),
                zero_samples: split.zero_sample_times(),
            };
            emit(&out, &report, |w| write_csv(w, &brackets))?;
            Ok(if brackets.iter().all(|b| b.uncertain) { EXIT_NO_BRACKETS } else { 0 })
        }
        Command::Diagram { input, out } => {
            let (series, noise) = load(&input)?;
            let rows = diagram_rows(&series);
            let report = DiagramReport {
                input: series.label().to_string(),
                snr: noise.snr,
                seed: noise.seed,
                rows: rows.clone(),
            };
            emit(&out, &report, |w| write_csv(w, &rows))?;
            Ok(0)
        }
        Command::Baseline { input, params, out } => {
            let params = config.baseline_with(&params);
            let (series, noise) = load(&input)?;
            let result = molinaro::first_zero_crossing(&series, &params)?;
            let report = BaselineReport {
                input: series.label().to_string(),
                snr: noise.snr,
                seed: noise.seed,
                r: params.r,
                eps: params.eps,
                sigma: params.sigma.unwrap_or(series.dt()),
                result,
            };
            emit(&out, &report, |w| write_csv(w, [&result]))?;
            Ok(0)
        }
        Command::Bench {
            builtin,
            fs,
            noise,
            threshold,
            params,
            out,
        } => {
            let f = bank::bench_function(builtin)?;
            let spec = config.threshold_with(&threshold).to_spec()?;
            let params = config.baseline_with(&params);
            params.validate()?;
            let records = harness::run_cell(f, fs, noise.snr(), noise.seed, &spec, &params, Normalization::Interval);
            emit(&out, &records, |w| Ok(write_records_csv(&records, w)?))?;
            Ok(0)
        }
        Command::Sweep { output } => {
            let spec = config.experiment();
            let dir = output
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .or_else(|| spec.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            let result = harness::sweep(&spec, &dir)?;
            for path in &result.files {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Functions { format } => {
            let rows: Vec<FunctionRow> = bank::all().iter().map(FunctionRow::from).collect();
            let out = OutputArgs { format, output: None };
            emit(&out, &rows, |w| write_csv(w, &rows))?;
            Ok(0)
        }
    }
}

/// Reads or samples the input and adds the requested noise.
fn load(input: &InputArgs) -> Result<(TimeSeries, NoiseSpec)> {
    let series = match (&input.source.builtin, &input.source.input) {
        (Some(id), _) => bank::bench_function(*id)?.sample(input.fs.unwrap_or(DEFAULT_FS))?,
        (None, Some(path)) => read_series(path)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let noise = NoiseSpec {
        snr: input.noise.snr(),
        seed: input.noise.seed,
    };
    Ok((add_noise(&series, &noise)?, noise))
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let label = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(TimeSeries::read_csv(file, label)?)
}

fn emit<T: Serialize>(out: &OutputArgs, report: &T, csv: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut sink: Box<dyn Write> = match &out.output {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match out.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink, report)?;
            writeln!(sink)?;
        }
        Format::Csv => csv(&mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(w: &mut dyn Write, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BracketReport {
    input: String,
    snr: Snr,
    seed: u64,
    policy: Policy,
    requested_policy: Policy,
    fell_back: bool,
    mu: f64,
    brackets: Vec<BracketInterval>,
    zero_samples: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct DiagramRow {
    rank: usize,
    death: f64,
    left_point: f64,
    source: Side,
}

#[derive(Serialize)]
struct DiagramReport {
    input: String,
    snr: Snr,
    seed: u64,
    rows: Vec<DiagramRow>,
}

/// Both diagrams merged, largest death first (ties: P before Q, then by
/// left point). Ranks start at 1.
fn diagram_rows(series: &TimeSeries) -> Vec<DiagramRow> {
    let split = sign_split(series);
    let mut rows: Vec<DiagramRow> = [Side::P, Side::Q]
        .into_iter()
        .flat_map(|side| {
            split.diagram(side).entries().iter().map(move |e| DiagramRow {
                rank: 0,
                death: e.death,
                left_point: e.left_point,
                source: side,
            }).collect::<Vec<_>>()
        })
        .collect();
    rows.sort_by(|a, b| {
        b.death
            .total_cmp(&a.death)
            .then(a.source.cmp(&b.source))
            .then(a.left_point.total_cmp(&b.left_point))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    rows
}

#[derive(Serialize)]
struct BaselineReport {
    input: String,
    snr: Snr,
    seed: u64,
    r: f64,
    eps: f64,
    sigma: f64,
    #[serde(flatten)]
    result: FirstCrossingResult,
}

#[derive(Serialize)]
struct FunctionRow {
    id: u32,
    name: String,
    formula: &'static str,
    t_a: f64,
    t_b: f64,
    roots: String,
}

impl From<&bank::BenchFunction> for FunctionRow {
    fn from(f: &bank::BenchFunction) -> Self {
        let roots: Vec<String> = f.roots.iter().map(|r| r.printed.to_string()).collect();
        FunctionRow {
            id: f.id,
            name: f.name(),
            formula: f.formula,
            t_a: f.interval.0,
            t_b: f.interval.1,
            roots: roots.join(" "),
        }
    }
}
