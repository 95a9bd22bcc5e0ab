//! Isolation forest used to pick out the high-persistence points of a sorted
//! persistence diagram.
//!
//! Standard construction: each tree is grown on a random subsample (without
//! replacement) with uniformly random axis-aligned splits, up to a height of
//! `ceil(log2(subsample))`. A point's anomaly score is
//! `2^(-E[h(x)] / c(subsample))`, where `h` is its path length and `c(n)` the
//! average path length of an unsuccessful BST search over `n` points.
//!
//! Tree `i` draws from ChaCha8 seeded with `seed` on stream `i`, so the
//! forest does not depend on how many threads build it.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Averaging path lengths over many trees can push a score a few ulps past
/// the cutoff.
const SCORE_TOLERANCE: f64 = 1e-9;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Which coordinates of a sorted diagram the forest sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    /// `(rank, death)`, the sorted-diagram picture.
    #[default]
    RankDeath,
    /// Death value only.
    DeathOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Defaults to `min(256, n)`.
    pub subsample: Option<usize>,
    pub seed: u64,
    pub score_cutoff: f64,
    pub features: FeatureMode,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            subsample: None,
            seed: 0,
            score_cutoff: 0.5,
            features: FeatureMode::RankDeath,
        }
    }
}

impl ForestConfig {
    fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParameter("n_trees must be >= 1".into()));
        }
        if matches!(self.subsample, Some(s) if s < 2) {
            return Err(Error::InvalidParameter("subsample must be >= 2".into()));
        }
        if !(self.score_cutoff > 0.0 && self.score_cutoff < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "score cutoff {} must lie in (0, 1)",
                self.score_cutoff
            )));
        }
        Ok(())
    }
}

/// Average path length of an unsuccessful search in a BST of `n` points.
pub fn average_path_length(n: usize) -> f64 {
    match n {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = (n - 1) as f64;
            let harmonic = if n <= 64 {
                (1..n).map(|i| 1.0 / i as f64).sum()
            } else {
                m.ln() + EULER_GAMMA
            };
            2.0 * harmonic - 2.0 * m / n as f64
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        size: usize,
    },
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct IsolationTree<const D: usize> {
    nodes: Vec<Node>,
}

impl<const D: usize> IsolationTree<D> {
    fn grow(points: &[[f64; D]], height_limit: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut tree = Self { nodes: Vec::new() };
        let mut scratch: Vec<[f64; D]> = points.to_vec();
        tree.build(&mut scratch, 0, height_limit, rng);
        tree
    }

    fn build(&mut self, pts: &mut [[f64; D]], depth: usize, limit: usize, rng: &mut ChaCha8Rng) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { size: pts.len() });
        if depth >= limit || pts.len() <= 1 {
            return id;
        }
        let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); D];
        for p in pts.iter() {
            for (r, &x) in ranges.iter_mut().zip(p) {
                r.0 = r.0.min(x);
                r.1 = r.1.max(x);
            }
        }
        let splittable: Vec<usize> = (0..D).filter(|&f| ranges[f].1 > ranges[f].0).collect();
        if splittable.is_empty() {
            return id;
        }
        let feature = splittable[rng.random_range(0..splittable.len())];
        let (lo, hi) = ranges[feature];
        let value = loop {
            let v = rng.random_range(lo..hi);
            if v > lo {
                break v;
            }
        };
        // Partition in place: x < value goes left.
        let mut mid = 0;
        for i in 0..pts.len() {
            if pts[i][feature] < value {
                pts.swap(i, mid);
                mid += 1;
            }
        }
        let (left_pts, right_pts) = pts.split_at_mut(mid);
        let left = self.build(left_pts, depth + 1, limit, rng);
        let right = self.build(right_pts, depth + 1, limit, rng);
        self.nodes[id] = Node::Split {
            feature,
            value,
            left,
            right,
        };
        id
    }

    /// Path length `h(x)`: edges to the leaf plus `c(leaf size)`.
    pub fn path_length(&self, point: &[f64; D]) -> f64 {
        let mut node = 0;
        let mut depth = 0.0;
        loop {
            match self.nodes[node] {
                Node::Leaf { size } => return depth + average_path_length(size),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    node = if point[feature] < value { left } else { right };
                    depth += 1.0;
                }
            }
        }
    }

    /// Checks every split value lies strictly inside the range of the points
    /// routed to that node.
    #[cfg(test)]
    fn splits_are_interior(&self, points: &[[f64; D]]) -> bool {
        fn walk<const D: usize>(t: &IsolationTree<D>, node: usize, pts: Vec<[f64; D]>) -> bool {
            match t.nodes[node] {
                Node::Leaf { .. } => true,
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    let lo = pts.iter().map(|p| p[feature]).fold(f64::INFINITY, f64::min);
                    let hi = pts.iter().map(|p| p[feature]).fold(f64::NEG_INFINITY, f64::max);
                    let (l, r): (Vec<_>, Vec<_>) = pts.into_iter().partition(|p| p[feature] < value);
                    lo < value && value < hi && walk(t, left, l) && walk(t, right, r)
                }
            }
        }
        walk(self, 0, points.to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct Forest<const D: usize> {
    trees: Vec<IsolationTree<D>>,
    subsample: usize,
    score_cutoff: f64,
}

impl<const D: usize> Forest<D> {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn subsample(&self) -> usize {
        self.subsample
    }

    /// Mean path length over the trees.
    pub fn path_length(&self, point: &[f64; D]) -> Result<f64> {
        if self.trees.is_empty() {
            return Err(Error::EmptyForest);
        }
        let total: f64 = self.trees.iter().map(|t| t.path_length(point)).sum();
        Ok(total / self.trees.len() as f64)
    }

    /// Anomaly score in `(0, 1)`; higher is more anomalous.
    pub fn score(&self, point: &[f64; D]) -> Result<f64> {
        let h = self.path_length(point)?;
        Ok(2f64.powf(-h / average_path_length(self.subsample)))
    }

    /// Points scoring strictly above the configured cutoff (beyond rounding).
    pub fn flags(&self, points: &[[f64; D]]) -> Result<Vec<bool>> {
        points
            .iter()
            .map(|p| self.score(p).map(|s| s > self.score_cutoff + SCORE_TOLERANCE))
            .collect()
    }
}

pub fn fit<const D: usize>(points: &[[f64; D]], cfg: &ForestConfig) -> Result<Forest<D>> {
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::NotEnoughData {
            what: "isolation forest",
            needed: 2,
            got: points.len(),
        });
    }
    let subsample = cfg.subsample.unwrap_or(256).min(points.len());
    let height_limit = (subsample as f64).log2().ceil() as usize;
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let chosen: Vec<[f64; D]> = index::sample(&mut rng, points.len(), subsample)
                .into_iter()
                .map(|k| points[k])
                .collect();
            IsolationTree::grow(&chosen, height_limit, &mut rng)
        })
        .collect();
    Ok(Forest {
        trees,
        subsample,
        score_cutoff: cfg.score_cutoff,
    })
}

/// Per-point outlier flags for deaths sorted in descending order.
pub fn flag_sorted_deaths(deaths: &[f64], cfg: &ForestConfig) -> Result<Vec<bool>> {
    match cfg.features {
        FeatureMode::RankDeath => {
            let pts: Vec<[f64; 2]> = deaths.iter().enumerate().map(|(i, &d)| [i as f64, d]).collect();
            fit(&pts, cfg)?.flags(&pts)
        }
        FeatureMode::DeathOnly => {
            let pts: Vec<[f64; 1]> = deaths.iter().map(|&d| [d]).collect();
            fit(&pts, cfg)?.flags(&pts)
        }
    }
}

/// Threshold from the flagged head of a descending death list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestThreshold {
    pub mu: f64,
    /// Number of leading (largest) deaths flagged as outliers.
    pub n_flagged: usize,
    pub fell_back: bool,
}

/// Fits on `(rank, death)` and cuts midway between the smallest death of the
/// flagged head and the largest death below it. The head is the run of
/// flagged entries starting from the largest death; flags further down the
/// list (extreme ranks with ordinary deaths) are ignored, and the head is
/// trimmed back to the nearest strict drop in value. Falls back to the z-score
/// rule when that leaves nothing, or everything, flagged.
pub fn iforest_threshold(deaths: &[f64], cfg: &ForestConfig) -> Result<ForestThreshold> {
    if deaths.len() < 4 {
        return Err(Error::NotEnoughData {
            what: "isolation-forest threshold",
            needed: 4,
            got: deaths.len(),
        });
    }
    debug_assert!(deaths.windows(2).all(|w| w[0] >= w[1]), "deaths must be sorted descending");
    let flags = flag_sorted_deaths(deaths, cfg)?;
    let mut head = flags.iter().take_while(|&&f| f).count();
    // A cut can only fall where the deaths strictly drop.
    while head > 0 && head < deaths.len() && deaths[head - 1] <= deaths[head] {
        head -= 1;
    }
    if head == 0 || head == deaths.len() {
        let mu = crate::thresholding::threshold_zscore3(deaths)?;
        log::warn!("isolation forest flagged {head} of {} deaths; falling back to z-score (mu = {mu})", deaths.len());
        return Ok(ForestThreshold {
            mu,
            n_flagged: head,
            fell_back: true,
        });
    }
    Ok(ForestThreshold {
        mu: 0.5 * (deaths[head - 1] + deaths[head]),
        n_flagged: head,
        fell_back: false,
    })
}
