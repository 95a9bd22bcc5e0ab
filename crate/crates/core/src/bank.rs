//! Benchmark functions with known zero-crossings, and uniform sampling.
//!
//! Root locations are stored to full double precision (refined from the
//! published four-to-six digit values with a high-precision root finder);
//! the published values are kept in [`Root::printed`] for reference. Two
//! published values are off: x_8's second root is 5.49779 (printed 5.5), and
//! x_2's last root is 7.24983 (printed 7.2598).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    /// The function changes sign.
    Crossing,
    /// The function touches zero without changing sign.
    Tangential,
    /// The root sits on the interval boundary.
    Boundary,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Root {
    pub at: f64,
    pub printed: f64,
    pub kind: RootKind,
}

const fn crossing(at: f64, printed: f64) -> Root {
    Root {
        at,
        printed,
        kind: RootKind::Crossing,
    }
}

#[derive(Debug, Serialize)]
pub struct BenchFunction {
    pub id: u32,
    pub formula: &'static str,
    pub interval: (f64, f64),
    pub roots: &'static [Root],
    #[serde(skip)]
    eval: fn(f64) -> f64,
}

impl BenchFunction {
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn name(&self) -> String {
        format!("x{}", self.id)
    }

    /// All stored root locations, ascending.
    pub fn true_roots(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.at).collect()
    }

    /// Roots where the function changes sign strictly inside the interval.
    pub fn crossing_roots(&self) -> Vec<f64> {
        self.roots
            .iter()
            .filter(|r| r.kind == RootKind::Crossing)
            .map(|r| r.at)
            .collect()
    }

    pub fn earliest_root(&self) -> Option<f64> {
        self.roots.first().map(|r| r.at)
    }

    pub fn sample(&self, fs: f64) -> Result<TimeSeries> {
        sample(|t| self.eval(t), self.interval, fs, self.name())
    }
}

fn x1(t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (1.0 / 6.0) * t3 * t3 - (52.0 / 25.0) * t3 * t2 + (39.0 / 80.0) * t2 * t2 + (71.0 / 10.0) * t3
        - (79.0 / 20.0) * t2
        - t
        + 1.0 / 10.0
        + 1000.0
}

fn x2(t: f64) -> f64 {
    t.sin() + (10.0 / 3.0 * t).sin()
}

fn x3(t: f64) -> f64 {
    (-16.0 * t * t + 24.0 * t - 5.0) * (-t).exp() + 3.0
}

fn x4(t: f64) -> f64 {
    (-3.0 * t + 1.4) * (18.0 * t).sin() + 0.1
}

fn x5(t: f64) -> f64 {
    t.sin() + (2.0 / 3.0 * t).sin()
}

fn x6(t: f64) -> f64 {
    -t * t.sin() + 0.5
}

fn x7(t: f64) -> f64 {
    -(2.0 * t.cos() + (2.0 * t).cos())
}

fn x8(t: f64) -> f64 {
    t.sin().powi(3) + t.cos().powi(3)
}

fn x9(t: f64) -> f64 {
    -t.powi(3) + (t * t - 1.0).powi(6)
}

fn x10(t: f64) -> f64 {
    -(-t).exp() * (2.0 * PI * t).sin() + 0.5
}

fn x11(t: f64) -> f64 {
    (t * t - 5.0 * t + 6.0) / (t * t + 1.0)
}

fn x12(t: f64) -> f64 {
    if t <= 3.0 {
        (t - 2.0) * (t - 2.0)
    } else {
        2.0 * (t - 2.0).ln() + 1.0
    }
}

fn x13(t: f64) -> f64 {
    -t + (3.0 * t).sin() + 1.0
}

fn x14(t: f64) -> f64 {
    -(t - t.sin()) * (-t * t).exp() + 0.01
}

static BANK: [BenchFunction; 14] = [
    BenchFunction {
        id: 1,
        formula: "(1/6)t^6 - (52/25)t^5 + (39/80)t^4 + (71/10)t^3 - (79/20)t^2 - t + 1/10 + 1000",
        interval: (-1.5, 5.0),
        roots: &[crossing(4.052_496_716_970_047, 4.052)],
        eval: x1,
    },
    BenchFunction {
        id: 2,
        formula: "sin(t) + sin(10t/3)",
        interval: (2.7, 7.5),
        roots: &[
            crossing(2.899_931_680_236_732, 2.9),
            crossing(4.039_190_554_615_448, 4.039),
            crossing(4.349_897_520_355_098, 4.3499),
            crossing(5.799_863_360_473_464, 5.79986),
            crossing(6.731_984_257_692_414, 6.73198),
            crossing(7.249_829_200_591_831, 7.2598),
        ],
        eval: x2,
    },
    BenchFunction {
        id: 3,
        formula: "(-16t^2 + 24t - 5) e^(-t) + 3",
        interval: (1.9, 3.9),
        roots: &[crossing(2.064_364_528_589_522, 2.064)],
        eval: x3,
    },
    BenchFunction {
        id: 4,
        formula: "(-3t + 1.4) sin(18t) + 0.1",
        interval: (0.0, 1.2),
        roots: &[
            crossing(0.181_030_997_016_327_5, 0.181),
            crossing(0.334_861_665_008_157_5, 0.3349),
            crossing(0.705_897_816_893_182_9, 0.7059),
            crossing(0.868_045_581_340_449, 0.868),
            crossing(1.050_371_858_849_656, 1.0504),
        ],
        eval: x4,
    },
    BenchFunction {
        id: 5,
        formula: "sin(t) + sin(2t/3)",
        interval: (3.1, 11.0),
        roots: &[
            crossing(3.769_911_184_307_752, 3.77),
            crossing(7.539_822_368_615_504, 7.54),
            crossing(9.424_777_960_769_38, 9.425),
        ],
        eval: x5,
    },
    BenchFunction {
        id: 6,
        formula: "-t sin(t) + 0.5",
        interval: (0.0, 8.0),
        roots: &[
            crossing(0.740_840_955_095_490_6, 0.741),
            crossing(2.972_585_490_382_36, 2.973),
            crossing(6.361_859_813_361_645, 6.362),
        ],
        eval: x6,
    },
    BenchFunction {
        id: 7,
        formula: "-(2cos(t) + cos(2t))",
        interval: (-1.57, 6.28),
        roots: &[
            crossing(-1.196_061_894_086_156, -1.196),
            crossing(1.196_061_894_086_156, 1.196),
            crossing(5.087_123_413_093_43, 5.087),
        ],
        eval: x7,
    },
    BenchFunction {
        id: 8,
        formula: "sin^3(t) + cos^3(t)",
        interval: (0.0, 6.28),
        roots: &[
            crossing(2.356_194_490_192_345, 2.356),
            crossing(5.497_787_143_782_138, 5.5),
        ],
        eval: x8,
    },
    BenchFunction {
        id: 9,
        formula: "-t^3 + (t^2 - 1)^6",
        interval: (0.001, 0.99),
        roots: &[crossing(0.524_888_598_656_404_8, 0.525)],
        eval: x9,
    },
    BenchFunction {
        id: 10,
        formula: "-e^(-t) sin(2 pi t) + 0.5",
        interval: (0.0, 4.0),
        roots: &[
            crossing(0.092_379_634_881_049_91, 0.092),
            crossing(0.371_012_185_631_629_5, 0.371),
        ],
        eval: x10,
    },
    BenchFunction {
        id: 11,
        formula: "(t^2 - 5t + 6) / (t^2 + 1)",
        interval: (-5.0, 3.0),
        roots: &[
            crossing(2.0, 2.0),
            Root {
                at: 3.0,
                printed: 3.0,
                kind: RootKind::Boundary,
            },
        ],
        eval: x11,
    },
    BenchFunction {
        id: 12,
        formula: "(t - 2)^2 if t <= 3, else 2 ln(t - 2) + 1",
        interval: (0.0, 6.0),
        roots: &[Root {
            at: 2.0,
            printed: 2.0,
            kind: RootKind::Tangential,
        }],
        eval: x12,
    },
    BenchFunction {
        id: 13,
        formula: "-t + sin(3t) + 1",
        interval: (0.0, 6.5),
        roots: &[crossing(1.035_396_314_521_105, 1.035)],
        eval: x13,
    },
    BenchFunction {
        id: 14,
        formula: "-(t - sin(t)) e^(-t^2) + 0.01",
        interval: (-2.0, 2.0),
        roots: &[crossing(0.415_922_683_367_838_1, 0.4159)],
        eval: x14,
    },
];

pub fn all() -> &'static [BenchFunction] {
    &BANK
}

pub fn bench_function(id: u32) -> Result<&'static BenchFunction> {
    BANK.get((id as usize).wrapping_sub(1))
        .ok_or(Error::UnknownFunction(id))
}

pub fn eval_bench(id: u32, t: f64) -> Result<f64> {
    Ok(bench_function(id)?.eval(t))
}

/// Samples `f` on `[t_a, t_b]` at `fs` Hz: `round(fs * (t_b - t_a)) + 1`
/// samples (ties round to even), first at `t_a`, last at `t_b`.
pub fn sample<F>(f: F, interval: (f64, f64), fs: f64, label: impl Into<String>) -> Result<TimeSeries>
where
    F: Fn(f64) -> f64,
{
    let (ta, tb) = interval;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(Error::InvalidParameter(format!("sampling frequency {fs} must be > 0")));
    }
    if !(ta.is_finite() && tb.is_finite() && tb > ta) {
        return Err(Error::InvalidParameter(format!("interval [{ta}, {tb}] is empty")));
    }
    let n = (fs * (tb - ta)).round_ties_even() as usize + 1;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let dt = (tb - ta) / (n - 1) as f64;
    let values = (0..n).map(|i| f(ta + i as f64 * dt)).collect();
    TimeSeries::new(ta, dt, values, label)
}
