use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use zerobracket::harness::{ExperimentSpec, Normalization};
use zerobracket::molinaro::MolinaroParams;
use zerobracket::noise::Snr;
use zerobracket::thresholding::ThresholdConfig;

use crate::args::{BaselineArgs, ThresholdArgs};

/// Contents of a `--config` file. Every table is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub threshold: ThresholdConfig,
    pub baseline: MolinaroParams,
    pub sweep: SweepTable,
}

/// Sweep axes; threshold and baseline settings come from their own tables.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepTable {
    pub functions: Vec<u32>,
    pub fs: Vec<f64>,
    pub snr: Vec<Snr>,
    pub seeds: Vec<u64>,
    pub rel_err: Normalization,
    pub output_dir: Option<PathBuf>,
}

impl Default for SweepTable {
    fn default() -> Self {
        let d = ExperimentSpec::default();
        SweepTable {
            functions: d.functions,
            fs: d.fs,
            snr: d.snr,
            seeds: d.seeds,
            rel_err: d.rel_err,
            output_dir: d.output_dir,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Config-file threshold settings with command-line flags laid over them.
    pub fn threshold_with(&self, args: &ThresholdArgs) -> ThresholdConfig {
        let mut t = self.threshold.clone();
        if let Some(p) = args.threshold {
            t.policy = Some(p.name().to_string());
        } else if args.mu.is_some() {
            t.policy = Some("fixed".into());
        }
        t.fixed = args.mu.or(t.fixed);
        t.n_roots = args.n_roots.or(t.n_roots);
        t.mad_k = args.mad_k.or(t.mad_k);
        t.auto_crossover_hz = args.crossover.or(t.auto_crossover_hz);
        t
    }

    pub fn baseline_with(&self, args: &BaselineArgs) -> MolinaroParams {
        let mut p = self.baseline;
        p.r = args.r.unwrap_or(p.r);
        p.eps = args.eps.unwrap_or(p.eps);
        p.sigma = args.sigma.or(p.sigma);
        p.max_iters = args.max_iters.or(p.max_iters);
        p
    }

    pub fn experiment(&self) -> ExperimentSpec {
        let s = &self.sweep;
        ExperimentSpec {
            functions: s.functions.clone(),
            fs: s.fs.clone(),
            snr: s.snr.clone(),
            seeds: s.seeds.clone(),
            threshold: self.threshold.clone(),
            baseline: self.baseline,
            rel_err: s.rel_err,
            output_dir: s.output_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zerobracket::thresholding::Policy;

    #[test]
    fn parses_all_tables() {
        let cfg: Config = toml::from_str(
            r#"
            [threshold]
            policy = "isolation-forest"
            [threshold.iforest]
            n_trees = 50
            seed = 9
            [baseline]
            r = 1.5
            [sweep]
            functions = [2, 3]
            fs = [500.0]
            snr = [15.0, "clean"]
            seeds = [0, 1]
            rel_err = "root"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.threshold.iforest.n_trees, 50);
        assert_eq!(cfg.baseline.r, 1.5);
        let spec = cfg.experiment();
        assert_eq!(spec.snr, vec![Snr::Db(15.0), Snr::Clean]);
        assert_eq!(spec.rel_err, Normalization::Root);
        assert_eq!(spec.threshold.to_spec().unwrap().policy(), Policy::IsolationForest);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[threshold]\npolicyy = \"mad\"").is_err());
    }

    #[test]
    fn flags_override_file() {
        let cfg: Config = toml::from_str("[threshold]\npolicy = \"mad\"\nmad_k = 2.0").unwrap();
        let args = ThresholdArgs {
            threshold: None,
            mu: Some(0.4),
            n_roots: None,
            mad_k: None,
            crossover: None,
        };
        let t = cfg.threshold_with(&args);
        assert_eq!(t.policy.as_deref(), Some("fixed"));
        assert_eq!(t.fixed, Some(0.4));
        assert_eq!(t.mad_k, Some(2.0));
    }
}
