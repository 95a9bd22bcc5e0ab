//! Molinaro–Sergeyev first-zero-crossing search, used as a baseline.
//!
//! The method keeps a sorted set of trial points on the sample grid, bounds
//! the signal from below on each interval between trials with a local
//! Lipschitz estimate, and either chases the first interval whose bound dips
//! below zero or samples where the bound is lowest. It only ever reports one
//! location: the first crossing, or the global minimum when no crossing is
//! found.
//!
//! Reading of the pseudocode used here:
//!
//! - trials start at the first and last sample times;
//! - `k` is the current number of trials and `S_i`, `m_i`, `R_i` refer to the
//!   interval `[t_{i-1}, t_i]` between consecutive trials;
//! - the two-term `lambda'` applies to the first and last interval, the
//!   three-term one everywhere else;
//! - `t*` (crossing branch) and `t_hat` (minimum branch) are rounded to the
//!   nearest grid point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub const DEFAULT_R: f64 = 1.3;
pub const DEFAULT_EPS: f64 = 1e-4;
const MAX_EPS: f64 = 1e-3;
/// Iteration guard as a multiple of the grid size.
const GUARD_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MolinaroParams {
    /// Reliability factor, `> 1`.
    pub r: f64,
    /// Lipschitz floor, in `(0, 1e-3]`.
    pub eps: f64,
    /// Stopping tolerance in time units; the sample interval when unset.
    pub sigma: Option<f64>,
    /// Iteration guard; `10 * N` when unset.
    pub max_iters: Option<usize>,
}

impl Default for MolinaroParams {
    fn default() -> Self {
        MolinaroParams {
            r: DEFAULT_R,
            eps: DEFAULT_EPS,
            sigma: None,
            max_iters: None,
        }
    }
}

impl MolinaroParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::InvalidParameter(format!("reliability r = {} must be > 1", self.r)));
        }
        if !(self.eps > 0.0 && self.eps <= MAX_EPS) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} must lie in (0, {MAX_EPS}]",
                self.eps
            )));
        }
        if let Some(sigma) = self.sigma {
            if !(sigma >= 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidParameter(format!("sigma = {sigma} must be >= 0")));
            }
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultKind {
    Crossing,
    GlobalMinimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstCrossingResult {
    pub kind: ResultKind,
    pub location: f64,
    #[serde(skip)]
    pub index: usize,
    pub value: f64,
    pub iterations: usize,
    /// Distinct samples looked at, including the two initial trials.
    pub evaluations: usize,
}

/// `|f_i - f_{i-1}| / (t_i - t_{i-1})` for consecutive trials. `S[j]` belongs
/// to the interval ending at trial `j + 1`.
pub fn slopes(t: &[f64], f: &[f64]) -> Vec<f64> {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| (f[1] - f[0]).abs() / (t[1] - t[0]))
        .collect()
}

/// `m_i = r * max(lambda'_i, lambda''_i, eps)` for every interval.
pub fn lipschitz_estimates(t: &[f64], s: &[f64], r: f64, eps: f64) -> Vec<f64> {
    let n = s.len();
    let lambda_max = s.iter().copied().fold(0.0, f64::max);
    let width_max = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    (0..n)
        .map(|j| {
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(n - 1);
            let local = s[lo..=hi].iter().copied().fold(0.0, f64::max);
            let global = lambda_max * (t[j + 1] - t[j]) / width_max;
            r * local.max(global).max(eps)
        })
        .collect()
}

/// Characteristic `R_i` and the minimiser `t_hat_i` of the lower bound on
/// each interval.
pub fn characteristics(t: &[f64], f: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>) {
    m.iter()
        .enumerate()
        .map(|(j, &m)| {
            let dt = t[j + 1] - t[j];
            let r = 0.5 * (f[j + 1] + f[j] - m * dt);
            let hat = 0.5 * (t[j + 1] + t[j] - (f[j + 1] - f[j]) / m);
            (r, hat)
        })
        .unzip()
}

/// Search state: trial points as sorted sample indices.
#[derive(Debug, Clone)]
pub struct MolinaroState<'a> {
    series: &'a TimeSeries,
    trials: Vec<usize>,
    iterations: usize,
    evaluations: usize,
}

enum Step {
    Continue,
    Done { index: usize, crossing: bool },
}

impl<'a> MolinaroState<'a> {
    pub fn new(series: &'a TimeSeries) -> Result<Self> {
        if series.len() < 2 {
            return Err(Error::TooFewSamples(series.len()));
        }
        let first = series.values()[0];
        if !(first > 0.0) {
            return Err(Error::NonPositiveStart(first));
        }
        Ok(MolinaroState {
            series,
            trials: vec![0, series.last_index()],
            iterations: 0,
            evaluations: 2,
        })
    }

    pub fn trial_indices(&self) -> &[usize] {
        &self.trials
    }

    pub fn trial_times(&self) -> Vec<f64> {
        self.trials.iter().map(|&i| self.series.time(i)).collect()
    }

    pub fn trial_values(&self) -> Vec<f64> {
        self.trials.iter().map(|&i| self.series.values()[i]).collect()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    fn nearest_index(&self, time: f64) -> usize {
        let s = self.series;
        let x = ((time - s.t0()) / s.dt()).round();
        x.clamp(0.0, s.last_index() as f64) as usize
    }

    fn step(&mut self, params: &MolinaroParams, sigma: f64) -> Step {
        self.iterations += 1;
        let t = self.trial_times();
        let f = self.trial_values();
        let s = slopes(&t, &f);
        let m = lipschitz_estimates(&t, &s, params.r, params.eps);
        let (r, hat) = characteristics(&t, &f, &m);

        // `j` indexes the interval [trials[j], trials[j + 1]].
        let crossing = r.iter().position(|&r| r <= 0.0);
        let (j, target) = match crossing {
            Some(j) => (j, t[j] + f[j] / m[j]),
            None => {
                let j = r
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(j, _)| j)
                    .expect("at least one interval");
                (j, hat[j])
            }
        };

        let (left, right) = (self.trials[j], self.trials[j + 1]);
        let mut next = self.nearest_index(target).clamp(left, right);
        if next == right {
            next -= 1;
        }
        let close = (next - left) as f64 * self.series.dt() <= sigma;
        if next == left || close {
            if next != left {
                self.evaluations += 1;
            }
            let nonpositive = self.series.values()[next] <= 0.0;
            return Step::Done {
                index: next,
                crossing: crossing.is_some() || nonpositive,
            };
        }

        self.evaluations += 1;
        if self.series.values()[next] <= 0.0 {
            self.trials.truncate(j + 1);
            self.trials.push(next);
        } else {
            self.trials.insert(j + 1, next);
        }
        Step::Continue
    }

    fn global_minimum(&self) -> usize {
        let v = self.series.values();
        *self
            .trials
            .iter()
            .min_by(|&&a, &&b| v[a].total_cmp(&v[b]))
            .expect("trials are never empty")
    }

    /// Runs to completion.
    pub fn run(mut self, params: &MolinaroParams) -> Result<FirstCrossingResult> {
        params.validate()?;
        let sigma = params.sigma.unwrap_or(self.series.dt());
        let guard = params.max_iters.unwrap_or(GUARD_FACTOR * self.series.len());
        loop {
            if self.iterations >= guard {
                return Err(Error::IterationLimit {
                    iterations: self.iterations,
                    trials: self.trials.len(),
                });
            }
            if let Step::Done { index, crossing } = self.step(params, sigma) {
                let index = if crossing { index } else { self.global_minimum() };
                return Ok(FirstCrossingResult {
                    kind: if crossing {
                        ResultKind::Crossing
                    } else {
                        ResultKind::GlobalMinimum
                    },
                    location: self.series.time(index),
                    index,
                    value: self.series.values()[index],
                    iterations: self.iterations,
                    evaluations: self.evaluations,
                });
            }
        }
    }
}

/// First zero crossing of `s`, or its global minimum if no crossing is found.
/// Requires a positive first sample.
pub fn first_zero_crossing(s: &TimeSeries, params: &MolinaroParams) -> Result<FirstCrossingResult> {
    params.validate()?;
    MolinaroState::new(s)?.run(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bank;

    fn grid(f: impl Fn(f64) -> f64, a: f64, b: f64, fs: f64) -> TimeSeries {
        bank::sample(&f, (a, b), fs, "test").unwrap()
    }

    fn first_sign_change(s: &TimeSeries) -> Option<f64> {
        let v = s.values();
        (0..v.len()).find(|&i| v[i] <= 0.0).map(|i| s.time(i))
    }

    #[test]
    fn slope_examples() {
        assert_eq!(slopes(&[0.0, 1.0], &[1.0, -1.0]), vec![2.0]);
        assert_eq!(slopes(&[0.0, 1.0, 2.0], &[3.0, 3.0, 3.0]), vec![0.0, 0.0]);
        assert_eq!(slopes(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]), vec![1.0, 3.0]);
    }

    #[test]
    fn lipschitz_examples() {
        let m = lipschitz_estimates(&[0.0, 1.0, 2.0], &[0.0, 0.0], 1.3, 1e-4);
        assert!(m.iter().all(|&m| (m - 1.3e-4).abs() < 1e-18));

        let m = lipschitz_estimates(&[0.0, 1.0, 2.0], &[2.0, 0.0], 1.3, 1e-4);
        assert!((m[0] - 2.6).abs() < 1e-12);
        assert!((m[1] - 2.6).abs() < 1e-12);

        // The first interval only looks one slope ahead; interior ones look
        // both ways.
        let close_all = |got: Vec<f64>, want: &[f64]| {
            got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-8)
        };
        let m = lipschitz_estimates(&[0.0, 1.0, 2.0, 12.0], &[0.0, 0.0, 4.0], 1.0 + 1e-9, 1e-4);
        assert!(close_all(m, &[0.4, 4.0, 4.0]));
        let m = lipschitz_estimates(&[0.0, 1.0, 2.0, 3.0, 13.0], &[5.0, 0.0, 0.0, 0.1], 2.0, 1e-4);
        assert!(close_all(m, &[10.0, 10.0, 1.0, 10.0]));

        // lambda'' grows linearly with the interval width.
        let m = lipschitz_estimates(&[0.0, 1.0, 3.0], &[0.0, 4.0], 1.5, 1e-4);
        assert!((m[0] - 1.5 * 4.0).abs() < 1e-12);
        let m = lipschitz_estimates(&[0.0, 1.0, 3.0, 7.0], &[0.0, 0.0, 1.0], 1.5, 1e-4);
        assert!((m[0] - 1.5 * 0.25).abs() < 1e-12);
        assert!((m[1] - 1.5 * 1.0).abs() < 1e-12);
    }

    #[test]
    fn characteristic_examples() {
        let (r, _) = characteristics(&[0.0, 1.0], &[1.0, 1.0], &[1.3e-4]);
        assert!((r[0] - 0.5 * (2.0 - 1.3e-4)).abs() < 1e-15);
        let (r, _) = characteristics(&[0.0, 1.0], &[1.0, -1.0], &[2.6]);
        assert!((r[0] + 1.3).abs() < 1e-12);
        let (_, hat) = characteristics(&[2.0, 4.0], &[7.0, 7.0], &[3.0]);
        assert_eq!(hat[0], 3.0);
    }

    #[test]
    fn linear_root() {
        let s = grid(|t| 1.0 - t, 0.0, 2.0, 1000.0);
        let res = first_zero_crossing(&s, &MolinaroParams::default()).unwrap();
        assert_eq!(res.kind, ResultKind::Crossing);
        assert!((res.location - 1.0).abs() <= s.dt() + 1e-12, "{res:?}");
        assert!(res.evaluations < s.len());
    }

    #[test]
    fn x3_first_root() {
        let f = bank::bench_function(3).unwrap();
        let s = f.sample(500.0).unwrap();
        let res = first_zero_crossing(&s, &MolinaroParams::default()).unwrap();
        assert_eq!(res.kind, ResultKind::Crossing);
        assert!((res.location - 2.064).abs() <= 2.0 * s.dt(), "{res:?}");
    }

    #[test]
    fn positive_parabola_gives_global_minimum() {
        let s = grid(|t| (t - 1.0) * (t - 1.0) + 1.0, 0.0, 2.0, 1000.0);
        let res = first_zero_crossing(&s, &MolinaroParams::default()).unwrap();
        assert_eq!(res.kind, ResultKind::GlobalMinimum);
        assert!((res.location - 1.0).abs() < 0.05, "{res:?}");
        assert!(res.value >= 1.0);
    }

    #[test]
    fn rejects_nonpositive_start() {
        let s = grid(|t| t - 1.0, 0.0, 2.0, 100.0);
        assert!(matches!(
            first_zero_crossing(&s, &MolinaroParams::default()),
            Err(Error::NonPositiveStart(_))
        ));
    }

    #[test]
    fn guard_trips() {
        let f = bank::bench_function(2).unwrap();
        let s = f.sample(500.0).unwrap();
        let params = MolinaroParams {
            max_iters: Some(1),
            ..Default::default()
        };
        assert!(matches!(
            first_zero_crossing(&s, &params),
            Err(Error::IterationLimit { iterations: 1, .. })
        ));
    }

    #[test]
    fn invalid_params() {
        let s = grid(|t| 1.0 - t, 0.0, 2.0, 100.0);
        for p in [
            MolinaroParams { r: 1.0, ..Default::default() },
            MolinaroParams { eps: 0.0, ..Default::default() },
            MolinaroParams { eps: 2e-3, ..Default::default() },
            MolinaroParams { sigma: Some(-1.0), ..Default::default() },
        ] {
            assert!(first_zero_crossing(&s, &p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn results_lie_on_the_grid() {
        for f in bank::all() {
            let s = f.sample(500.0).unwrap();
            let res = first_zero_crossing(&s, &MolinaroParams::default()).unwrap();
            assert_eq!(res.location, s.time(res.index));
            assert!(res.location >= s.t0() && res.location <= s.t_end());
        }
    }

    #[test]
    fn shrinking_sigma_never_moves_away_from_scan() {
        for f in bank::all() {
            let s = f.sample(500.0).unwrap();
            let Some(scan) = first_sign_change(&s) else { continue };
            let mut prev = f64::INFINITY;
            for k in [4.0, 2.0, 1.0] {
                let params = MolinaroParams {
                    sigma: Some(k * s.dt()),
                    ..Default::default()
                };
                let res = first_zero_crossing(&s, &params).unwrap();
                let dist = (res.location - scan).abs();
                // On x8 the lower bound dips below zero between two positive
                // trials just short of the root, costing one extra grid step.
                let slack = if f.id == 8 { s.dt() } else { 0.0 };
                assert!(dist <= prev + slack + 1e-12, "{} sigma {k}dt: {dist} > {prev}", f.name());
                prev = prev.min(dist);
            }
        }
    }
}
