//! Zero-crossing brackets from the persistence of the positive and negative
//! sample sets.
//!
//! The sample times are split into `P` (value > 0) and `Q` (value < 0), both
//! augmented with the series endpoints. A wide gap between consecutive `P`
//! points is a stretch where the signal was never positive, and likewise for
//! `Q`. The endpoints of all gaps wider than the threshold `mu` are merged
//! into one sorted list `r_0 <= ... <= r_{2K-1}`, padded with `t_0` and
//! `t_N`, and the candidate intervals are `[r_{2i-1}, r_{2i}]`.
//!
//! An interval whose ends are a positive sample and a negative sample
//! contains a root of any continuous function through the samples. Every
//! other interval is returned with `uncertain = true`.
//!
//! All positions are handled as sample indices, so gap persistences are exact
//! integer multiples of `dt` and `mu = dt` cleanly separates adjacent samples
//! from real gaps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::series::TimeSeries;

/// How a gap is compared against the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Retention {
    /// Keep gaps with persistence `> mu`.
    #[default]
    Strict,
    /// Keep gaps with persistence `>= mu`.
    Inclusive,
}

impl Retention {
    #[inline]
    fn keeps(self, persistence: f64, mu: f64) -> bool {
        match self {
            Retention::Strict => persistence > mu,
            Retention::Inclusive => persistence >= mu,
        }
    }
}

/// Which point set a gap came from. `P` sorts before `Q` on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    P,
    Q,
}

/// Sample indices with strictly positive / strictly negative values, each
/// augmented with the first and last index, plus the exact-zero samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSplit {
    t0: f64,
    dt: f64,
    last: usize,
    p: Vec<usize>,
    q: Vec<usize>,
    zeros: Vec<usize>,
}

impl SignSplit {
    pub fn p_indices(&self) -> &[usize] {
        &self.p
    }

    pub fn q_indices(&self) -> &[usize] {
        &self.q
    }

    pub fn zero_indices(&self) -> &[usize] {
        &self.zeros
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn p_points(&self) -> Vec<f64> {
        self.p.iter().map(|&i| self.time(i)).collect()
    }

    pub fn q_points(&self) -> Vec<f64> {
        self.q.iter().map(|&i| self.time(i)).collect()
    }

    pub fn zero_sample_times(&self) -> Vec<f64> {
        self.zeros.iter().map(|&i| self.time(i)).collect()
    }

    fn indices(&self, source: Source) -> &[usize] {
        match source {
            Source::P => &self.p,
            Source::Q => &self.q,
        }
    }

    /// Persistence diagram of one of the sets, in time units.
    pub fn diagram(&self, source: Source) -> PersistenceDiagram {
        let points = self.indices(source).iter().map(|&i| i as f64).collect();
        PersistenceDiagram::from_sorted_unique(points).rescaled(self.t0, self.dt)
    }

    /// `(lo, hi)` index pairs of consecutive points of one set.
    fn gaps(&self, source: Source) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.indices(source).windows(2).map(|w| (w[0], w[1]))
    }

    /// Persistence of every gap of both sets, in time units, unordered.
    pub(crate) fn all_deaths(&self) -> impl Iterator<Item = f64> + '_ {
        self.gaps(Source::P)
            .chain(self.gaps(Source::Q))
            .map(|(lo, hi)| (hi - lo) as f64 * self.dt)
    }
}

pub fn sign_split(s: &TimeSeries) -> SignSplit {
    let last = s.last_index();
    let mut p = Vec::with_capacity(s.len() / 2 + 2);
    let mut q = Vec::with_capacity(s.len() / 2 + 2);
    let mut zeros = Vec::new();
    for (i, &v) in s.values().iter().enumerate() {
        if v > 0.0 {
            p.push(i);
        } else if v < 0.0 {
            q.push(i);
        } else {
            zeros.push(i);
        }
    }
    for set in [&mut p, &mut q] {
        if set.first() != Some(&0) {
            set.insert(0, 0);
        }
        if set.last() != Some(&last) {
            set.push(last);
        }
    }
    SignSplit {
        t0: s.t0(),
        dt: s.dt(),
        last,
        p,
        q,
        zeros,
    }
}

/// A gap between consecutive points of one set whose persistence passed the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapInterval {
    pub lo: f64,
    pub hi: f64,
    pub source: Source,
    pub persistence: f64,
    #[serde(skip)]
    pub lo_index: usize,
    #[serde(skip)]
    pub hi_index: usize,
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::InvalidParameter(format!("persistence threshold {mu} must be >= 0")));
    }
    Ok(())
}

/// Gaps of `P` then `Q` with persistence strictly above `mu`.
pub fn retained_gaps(split: &SignSplit, mu: f64) -> Result<Vec<GapInterval>> {
    retained_gaps_with(split, mu, Retention::Strict)
}

pub fn retained_gaps_with(split: &SignSplit, mu: f64, retention: Retention) -> Result<Vec<GapInterval>> {
    check_mu(mu)?;
    let mut out = Vec::new();
    for source in [Source::P, Source::Q] {
        for (lo, hi) in split.gaps(source) {
            let persistence = (hi - lo) as f64 * split.dt;
            if retention.keeps(persistence, mu) {
                out.push(GapInterval {
                    lo: split.time(lo),
                    hi: split.time(hi),
                    source,
                    persistence,
                    lo_index: lo,
                    hi_index: hi,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointType {
    PositiveSample,
    NegativeSample,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_type: EndpointType,
    pub hi_type: EndpointType,
    pub uncertain: bool,
    pub estimate: f64,
    #[serde(skip)]
    pub lo_index: usize,
    #[serde(skip)]
    pub hi_index: usize,
    /// Some sample inside `[lo, hi]` is exactly zero.
    #[serde(skip)]
    pub contains_zero_sample: bool,
}

fn is_certain(a: EndpointType, b: EndpointType) -> bool {
    matches!(
        (a, b),
        (EndpointType::PositiveSample, EndpointType::NegativeSample)
            | (EndpointType::NegativeSample, EndpointType::PositiveSample)
    )
}

/// Brackets of `s` for threshold `mu`, strict retention.
pub fn bracket(s: &TimeSeries, mu: f64) -> Result<Vec<BracketInterval>> {
    bracket_split(s, &sign_split(s), mu, Retention::Strict)
}

pub fn bracket_with(s: &TimeSeries, mu: f64, retention: Retention) -> Result<Vec<BracketInterval>> {
    bracket_split(s, &sign_split(s), mu, retention)
}

/// Brackets from a precomputed split of `s`.
pub fn bracket_split(
    s: &TimeSeries,
    split: &SignSplit,
    mu: f64,
    retention: Retention,
) -> Result<Vec<BracketInterval>> {
    let gaps = retained_gaps_with(split, mu, retention)?;
    let mut endpoints: Vec<(usize, Source)> = Vec::with_capacity(2 * gaps.len());
    for g in &gaps {
        endpoints.push((g.lo_index, g.source));
        endpoints.push((g.hi_index, g.source));
    }
    endpoints.sort_unstable();

    // Padded list r_{-1}, r_0, ..., r_{2K-1}, r_{2K}; `None` marks the padding.
    let mut padded: Vec<(usize, Option<Source>)> = Vec::with_capacity(endpoints.len() + 2);
    padded.push((0, None));
    padded.extend(endpoints.into_iter().map(|(i, src)| (i, Some(src))));
    padded.push((split.last, None));

    let values = s.values();
    let type_of = |(i, src): (usize, Option<Source>)| match src {
        None => EndpointType::Boundary,
        Some(_) if values[i] > 0.0 => EndpointType::PositiveSample,
        Some(_) if values[i] < 0.0 => EndpointType::NegativeSample,
        Some(_) => EndpointType::Boundary,
    };

    let out = padded
        .chunks_exact(2)
        .filter(|pair| pair[0].0 != pair[1].0)
        .map(|pair| {
            let (lo_index, hi_index) = (pair[0].0, pair[1].0);
            let (lo_type, hi_type) = (type_of(pair[0]), type_of(pair[1]));
            let lo = s.time(lo_index);
            let hi = s.time(hi_index);
            let first_zero = split.zeros.partition_point(|&z| z < lo_index);
            BracketInterval {
                lo,
                hi,
                lo_type,
                hi_type,
                uncertain: !is_certain(lo_type, hi_type),
                estimate: 0.5 * (lo + hi),
                lo_index,
                hi_index,
                contains_zero_sample: split.zeros.get(first_zero).is_some_and(|&z| z <= hi_index),
            }
        })
        .collect();
    Ok(out)
}

/// Midpoint of each bracket, in order.
pub fn estimates(brackets: &[BracketInterval]) -> Vec<f64> {
    brackets.iter().map(|b| b.estimate).collect()
}
