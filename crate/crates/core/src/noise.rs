//! Additive white Gaussian noise at a prescribed signal-to-noise ratio.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64`, so a seed reproduces the same noise on every platform.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Target SNR in decibels, or no noise at all.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnrRepr", into = "SnrRepr")]
pub enum Snr {
    Clean,
    Db(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SnrRepr {
    Db(f64),
    Text(String),
}

impl TryFrom<SnrRepr> for Snr {
    type Error = Error;
    fn try_from(r: SnrRepr) -> Result<Self> {
        match r {
            SnrRepr::Db(v) => Ok(Snr::Db(v)),
            SnrRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Snr> for SnrRepr {
    fn from(s: Snr) -> Self {
        match s {
            Snr::Clean => SnrRepr::Text("clean".into()),
            Snr::Db(v) => SnrRepr::Db(v),
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Clean => f.write_str("clean"),
            Snr::Db(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Snr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("clean") || s.eq_ignore_ascii_case("inf") {
            return Ok(Snr::Clean);
        }
        let v: f64 = s
            .trim_end_matches("dB")
            .trim_end_matches("db")
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad SNR `{s}`")))?;
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("SNR {v} is not finite")));
        }
        Ok(Snr::Db(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr: Snr,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn clean() -> Self {
        Self {
            snr: Snr::Clean,
            seed: 0,
        }
    }

    pub fn db(snr_db: f64, seed: u64) -> Self {
        Self {
            snr: Snr::Db(snr_db),
            seed,
        }
    }
}

/// Mean square of the samples.
pub fn signal_power(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// The noise realization `add_noise` would inject, or `None` for a clean spec.
pub fn noise_vector(s: &TimeSeries, spec: &NoiseSpec) -> Result<Option<Vec<f64>>> {
    let snr_db = match spec.snr {
        Snr::Clean => return Ok(None),
        Snr::Db(v) if v.is_finite() => v,
        Snr::Db(v) => return Err(Error::InvalidParameter(format!("SNR {v} is not finite"))),
    };
    let noise_power = signal_power(s.values()) * 10f64.powf(-snr_db / 10.0);
    let normal = Normal::new(0.0, noise_power.sqrt())
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(Some((0..s.len()).map(|_| normal.sample(&mut rng)).collect()))
}

/// Adds i.i.d. zero-mean Gaussian noise with variance `P_s * 10^(-snr/10)`,
/// `P_s` being the mean square of the clean samples.
pub fn add_noise(s: &TimeSeries, spec: &NoiseSpec) -> Result<TimeSeries> {
    match noise_vector(s, spec)? {
        None => Ok(s.clone()),
        Some(noise) => {
            let values = s.values().iter().zip(&noise).map(|(v, n)| v + n).collect();
            Ok(s.with_values(values))
        }
    }
}
