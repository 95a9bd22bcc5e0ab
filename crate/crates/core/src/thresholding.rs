//! Choosing the persistence threshold `mu`.
//!
//! All statistical rules operate on the merged deaths of the `P` and `Q`
//! diagrams: a handful of large gaps (one per sign run) stand out from a bulk
//! of sampling-scale gaps, and the rules look for that jump.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bracketing::SignSplit;
use crate::error::{Error, Result};
use crate::iforest::{self, ForestConfig};
use crate::series::TimeSeries;
use crate::stats;

/// Sampling rate (Hz) at which `auto` switches from the isolation forest to
/// the z-score rule.
pub const DEFAULT_AUTO_CROSSOVER_HZ: f64 = 250.0;
pub const DEFAULT_MAD_K: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Fixed,
    NoiseFreeDt,
    KnownRootCount,
    Zscore3,
    Iqr15,
    Mad,
    IsolationForest,
    Auto,
}

impl Policy {
    pub const ALL: [Policy; 8] = [
        Policy::Fixed,
        Policy::NoiseFreeDt,
        Policy::KnownRootCount,
        Policy::Zscore3,
        Policy::Iqr15,
        Policy::Mad,
        Policy::IsolationForest,
        Policy::Auto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Fixed => "fixed",
            Policy::NoiseFreeDt => "noise-free-dt",
            Policy::KnownRootCount => "known-root-count",
            Policy::Zscore3 => "zscore3",
            Policy::Iqr15 => "iqr15",
            Policy::Mad => "mad",
            Policy::IsolationForest => "isolation-forest",
            Policy::Auto => "auto",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Policy::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidParameter(format!("unknown threshold policy `{s}` (one of {})", names.join(", ")))
            })
    }
}

/// A threshold policy together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdSpec {
    Fixed(f64),
    NoiseFreeDt,
    KnownRootCount(usize),
    Zscore3,
    Iqr15,
    Mad { k: f64 },
    IsolationForest(ForestConfig),
    Auto { crossover_hz: f64, forest: ForestConfig },
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Auto {
            crossover_hz: DEFAULT_AUTO_CROSSOVER_HZ,
            forest: ForestConfig::default(),
        }
    }
}

impl ThresholdSpec {
    pub fn policy(&self) -> Policy {
        match self {
            ThresholdSpec::Fixed(_) => Policy::Fixed,
            ThresholdSpec::NoiseFreeDt => Policy::NoiseFreeDt,
            ThresholdSpec::KnownRootCount(_) => Policy::KnownRootCount,
            ThresholdSpec::Zscore3 => Policy::Zscore3,
            ThresholdSpec::Iqr15 => Policy::Iqr15,
            ThresholdSpec::Mad { .. } => Policy::Mad,
            ThresholdSpec::IsolationForest(_) => Policy::IsolationForest,
            ThresholdSpec::Auto { .. } => Policy::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            ThresholdSpec::Fixed(v) if !(v >= 0.0) => bad(format!("fixed threshold {v} must be >= 0")),
            ThresholdSpec::Mad { k } if !(k.is_finite() && k >= 0.0) => bad(format!("MAD multiplier {k} must be >= 0")),
            ThresholdSpec::Auto { crossover_hz, .. } if !(crossover_hz > 0.0) => {
                bad(format!("auto crossover {crossover_hz} Hz must be > 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Flat `threshold.*` configuration keys, as read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub policy: Option<String>,
    pub fixed: Option<f64>,
    pub n_roots: Option<usize>,
    pub mad_k: Option<f64>,
    pub auto_crossover_hz: Option<f64>,
    pub iforest: ForestConfig,
}

impl ThresholdConfig {
    pub fn to_spec(&self) -> Result<ThresholdSpec> {
        let policy: Policy = self.policy.as_deref().unwrap_or("auto").parse()?;
        let spec = match policy {
            Policy::Fixed => ThresholdSpec::Fixed(
                self.fixed
                    .ok_or_else(|| Error::InvalidParameter("policy `fixed` needs threshold.fixed".into()))?,
            ),
            Policy::NoiseFreeDt => ThresholdSpec::NoiseFreeDt,
            Policy::KnownRootCount => ThresholdSpec::KnownRootCount(self.n_roots.ok_or_else(|| {
                Error::InvalidParameter("policy `known-root-count` needs threshold.n_roots".into())
            })?),
            Policy::Zscore3 => ThresholdSpec::Zscore3,
            Policy::Iqr15 => ThresholdSpec::Iqr15,
            Policy::Mad => ThresholdSpec::Mad {
                k: self.mad_k.unwrap_or(DEFAULT_MAD_K),
            },
            Policy::IsolationForest => ThresholdSpec::IsolationForest(self.iforest),
            Policy::Auto => ThresholdSpec::Auto {
                crossover_hz: self.auto_crossover_hz.unwrap_or(DEFAULT_AUTO_CROSSOVER_HZ),
                forest: self.iforest,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Deaths of both diagrams, largest first.
pub fn merged_deaths(split: &SignSplit) -> Vec<f64> {
    let mut deaths: Vec<f64> = split.all_deaths().collect();
    deaths.sort_unstable_by(|a, b| b.total_cmp(a));
    deaths
}

fn need(what: &'static str, needed: usize, got: usize) -> Result<()> {
    if got < needed {
        return Err(Error::NotEnoughData { what, needed, got });
    }
    Ok(())
}

/// `mean + 3 * sigma` (population standard deviation).
pub fn threshold_zscore3(deaths: &[f64]) -> Result<f64> {
    need("z-score threshold", 2, deaths.len())?;
    Ok(stats::mean(deaths) + 3.0 * stats::std_population(deaths))
}

/// Upper Tukey fence `Q3 + 1.5 * (Q3 - Q1)`, quartiles interpolated linearly.
pub fn threshold_iqr15(deaths: &[f64]) -> Result<f64> {
    need("IQR threshold", 4, deaths.len())?;
    let sorted = stats::sorted_ascending(deaths);
    let q1 = stats::quantile_sorted(&sorted, 0.25);
    let q3 = stats::quantile_sorted(&sorted, 0.75);
    Ok(q3 + 1.5 * (q3 - q1))
}

/// Median absolute deviation about the median.
pub fn mad(deaths: &[f64]) -> Result<f64> {
    need("MAD", 1, deaths.len())?;
    let med = stats::median(deaths);
    let dev: Vec<f64> = deaths.iter().map(|d| (d - med).abs()).collect();
    Ok(stats::median(&dev))
}

/// `median + k * MAD`. The policy dispatch falls back to the z-score rule when
/// the MAD is zero; this function does not.
pub fn threshold_mad(deaths: &[f64], k: f64) -> Result<f64> {
    need("MAD threshold", 1, deaths.len())?;
    Ok(stats::median(deaths) + k * mad(deaths)?)
}

/// One sample interval; exact for noise-free signals under strict retention.
pub fn threshold_noise_free(s: &TimeSeries) -> f64 {
    s.dt()
}

/// With `n` roots there are `n + 1` structural gaps: cut midway between the
/// `(n+1)`-th and `(n+2)`-th largest deaths.
pub fn threshold_known_roots(deaths: &[f64], n: usize) -> Result<f64> {
    need("known-root-count threshold", n + 2, deaths.len())?;
    let mut sorted = deaths.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(0.5 * (sorted[n] + sorted[n + 1]))
}

/// Summary statistics of a set of deaths, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeathStats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
    pub q1: f64,
    pub q3: f64,
    pub mad: f64,
}

pub fn death_stats(deaths: &[f64]) -> Option<DeathStats> {
    if deaths.is_empty() {
        return None;
    }
    let sorted = stats::sorted_ascending(deaths);
    Some(DeathStats {
        count: deaths.len(),
        mean: stats::mean(deaths),
        median: stats::median_sorted(&sorted),
        std: stats::std_population(deaths),
        q1: stats::quantile_sorted(&sorted, 0.25),
        q3: stats::quantile_sorted(&sorted, 0.75),
        mad: mad(deaths).ok()?,
    })
}

/// Outcome of [`select_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Selection {
    pub mu: f64,
    /// The policy that actually produced `mu` (`auto` resolves to a concrete
    /// rule; fallbacks report the rule fallen back to).
    pub policy: Policy,
    pub fell_back: bool,
}

/// Concrete policy `auto` resolves to for a series sampled at `fs` Hz.
pub fn auto_policy(fs: f64, crossover_hz: f64) -> Policy {
    if fs >= crossover_hz {
        Policy::Zscore3
    } else {
        Policy::IsolationForest
    }
}

pub fn select_threshold(spec: &ThresholdSpec, s: &TimeSeries, split: &SignSplit) -> Result<Selection> {
    spec.validate()?;
    let pick = |mu: f64, policy: Policy| Selection {
        mu,
        policy,
        fell_back: false,
    };
    match *spec {
        ThresholdSpec::Fixed(v) => Ok(pick(v, Policy::Fixed)),
        ThresholdSpec::NoiseFreeDt => Ok(pick(threshold_noise_free(s), Policy::NoiseFreeDt)),
        ThresholdSpec::KnownRootCount(n) => Ok(pick(
            threshold_known_roots(&merged_deaths(split), n)?,
            Policy::KnownRootCount,
        )),
        ThresholdSpec::Zscore3 => Ok(pick(threshold_zscore3(&merged_deaths(split))?, Policy::Zscore3)),
        ThresholdSpec::Iqr15 => Ok(pick(threshold_iqr15(&merged_deaths(split))?, Policy::Iqr15)),
        ThresholdSpec::Mad { k } => {
            let deaths = merged_deaths(split);
            if mad(&deaths)? == 0.0 {
                log::warn!("MAD of the persistence diagram is zero; using the z-score rule");
                Ok(Selection {
                    mu: threshold_zscore3(&deaths)?,
                    policy: Policy::Zscore3,
                    fell_back: true,
                })
            } else {
                Ok(pick(threshold_mad(&deaths, k)?, Policy::Mad))
            }
        }
        ThresholdSpec::IsolationForest(cfg) => forest_selection(split, &cfg),
        ThresholdSpec::Auto { crossover_hz, forest } => match auto_policy(s.fs(), crossover_hz) {
            Policy::Zscore3 => select_threshold(&ThresholdSpec::Zscore3, s, split),
            _ => forest_selection(split, &forest),
        },
    }
}

fn forest_selection(split: &SignSplit, cfg: &ForestConfig) -> Result<Selection> {
    let deaths = merged_deaths(split);
    let t = iforest::iforest_threshold(&deaths, cfg)?;
    Ok(Selection {
        mu: t.mu,
        policy: if t.fell_back {
            Policy::Zscore3
        } else {
            Policy::IsolationForest
        },
        fell_back: t.fell_back,
    })
}
