use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zerobracket::noise::Snr;
use zerobracket::thresholding::Policy;

pub const OUT_DIR_ENV: &str = "ZEROBRACKET_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "zerobracket", version, about = "Bracket every zero-crossing of a sampled signal")]
pub struct Cli {
    /// TOML config with [threshold], [baseline] and [sweep] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero-crossing brackets with their uncertainty flags.
    Brackets {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        /// Keep gaps whose persistence equals mu as well.
        #[arg(long)]
        inclusive: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Merged persistence diagram of the positive and negative samples.
    Diagram {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// First zero-crossing by the Lipschitz baseline.
    Baseline {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        params: BaselineArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Both methods on one built-in function, one noise realisation.
    Bench {
        /// Built-in function id (1-14).
        #[arg(long)]
        builtin: u32,
        #[arg(long, default_value_t = 1000.0)]
        fs: f64,
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        threshold: ThresholdArgs,
        #[command(flatten)]
        params: BaselineArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Full experiment grid; writes CSV and SVG files into a directory.
    Sweep {
        /// Output directory (default: $ZEROBRACKET_OUT_DIR, then the config's
        /// sweep.output_dir, then ./zerobracket-out).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// The built-in benchmark functions.
    Functions {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Add white Gaussian noise at this SNR in dB ("clean" for none).
    #[arg(long, conflicts_with = "clean")]
    pub snr: Option<Snr>,
    /// No added noise (the default).
    #[arg(long)]
    pub clean: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl NoiseArgs {
    pub fn snr(&self) -> Snr {
        self.snr.unwrap_or(Snr::Clean)
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct Source {
    /// Built-in function id (1-14), sampled on its interval.
    #[arg(long)]
    pub builtin: Option<u32>,
    /// CSV with a `t,value` header and uniformly spaced times.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub source: Source,
    /// Sampling rate for --builtin.
    #[arg(long, conflicts_with = "input")]
    pub fs: Option<f64>,
    #[command(flatten)]
    pub noise: NoiseArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long, value_parser = parse_policy)]
    pub threshold: Option<Policy>,
    /// Threshold for `--threshold fixed` (implies it when given alone).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Root count for `known-root-count`.
    #[arg(long)]
    pub n_roots: Option<usize>,
    #[arg(long)]
    pub mad_k: Option<f64>,
    /// Sampling rate (Hz) at which `auto` switches to the z-score rule.
    #[arg(long)]
    pub crossover: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    /// Reliability factor (> 1).
    #[arg(long)]
    pub r: Option<f64>,
    /// Lipschitz floor, in (0, 1e-3].
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stopping tolerance (default: the sample interval).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: zerobracket::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn source_is_exclusive_and_required() {
        assert!(Cli::try_parse_from(["zerobracket", "brackets"]).is_err());
        assert!(Cli::try_parse_from(["zerobracket", "brackets", "--builtin", "2", "--input", "a.csv"]).is_err());
        assert!(Cli::try_parse_from(["zerobracket", "brackets", "--builtin", "2", "--snr", "15", "--clean"]).is_err());
        let cli = Cli::try_parse_from(["zerobracket", "brackets", "--builtin", "2", "--snr", "15dB"]).unwrap();
        match cli.command {
            Command::Brackets { input, .. } => assert_eq!(input.noise.snr(), Snr::Db(15.0)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn policy_names_parse() {
        let cli = Cli::try_parse_from(["zerobracket", "brackets", "--builtin", "2", "--threshold", "noise-free-dt"]).unwrap();
        match cli.command {
            Command::Brackets { threshold, .. } => assert_eq!(threshold.threshold, Some(Policy::NoiseFreeDt)),
            _ => unreachable!(),
        }
        assert!(Cli::try_parse_from(["zerobracket", "brackets", "--builtin", "2", "--threshold", "nope"]).is_err());
    }
}
