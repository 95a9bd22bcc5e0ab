//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zerobracket::bank::{self, BenchFunction};
use zerobracket::bracketing::{bracket_split, sign_split, BracketInterval, Retention};
use zerobracket::harness::{aggregate, run_sweep, ExperimentSpec, Method, Normalization};
use zerobracket::iforest::ForestConfig;
use zerobracket::molinaro::{first_zero_crossing, MolinaroParams, ResultKind};
use zerobracket::noise::{add_noise, noise_vector, signal_power, NoiseSpec, Snr};
use zerobracket::persistence::diagram;
use zerobracket::thresholding::{
    merged_deaths, select_threshold, threshold_iqr15, threshold_known_roots, threshold_mad, threshold_zscore3,
    ThresholdSpec,
};
use zerobracket::TimeSeries;

/// Functions whose reference roots are all interior crossings with a
/// trustworthy published value.
const RECOVERABLE: [u32; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 13, 14];

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn certain(brackets: &[BracketInterval]) -> Vec<&BracketInterval> {
    brackets.iter().filter(|b| !b.uncertain).collect()
}

fn brackets_with(s: &TimeSeries, spec: &ThresholdSpec) -> Vec<BracketInterval> {
    let split = sign_split(s);
    let sel = select_threshold(spec, s, &split).expect("threshold");
    bracket_split(s, &split, sel.mu, Retention::Strict).expect("brackets")
}

/// Index pairs of consecutive non-zero samples with opposite signs.
fn scan_pairs(values: &[f64]) -> Vec<(usize, usize)> {
    let nonzero: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
    nonzero
        .windows(2)
        .filter(|w| values[w[0]].signum() != values[w[1]].signum())
        .map(|w| (w[0], w[1]))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut cases = 0;
    for f in bank::all() {
        for fs in [25.0, 100.0, 1000.0] {
            let s = f.sample(fs).unwrap();
            let got: Vec<(usize, usize)> = certain(&brackets_with(&s, &ThresholdSpec::NoiseFreeDt))
                .iter()
                .map(|b| (b.lo_index, b.hi_index))
                .collect();
            if got != scan_pairs(s.values()) {
                mismatches.push(format!("{}@{fs}", f.name()));
            }
            cases += 1;
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        mismatches.is_empty() && elapsed < Duration::from_secs(5),
        format!("{cases} cases, {} mismatches {mismatches:?}, {:.3} s", mismatches.len(), elapsed.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for id in RECOVERABLE {
        let f = bank::bench_function(id).unwrap();
        let s = f.sample(1000.0).unwrap();
        let brackets = brackets_with(&s, &ThresholdSpec::NoiseFreeDt);
        let est: Vec<f64> = brackets.iter().map(|b| b.estimate).collect();
        let roots = f.true_roots();
        let ok = brackets.iter().all(|b| !b.uncertain)
            && est.len() == roots.len()
            && est.iter().zip(&roots).all(|(e, r)| (e - r).abs() <= s.dt());
        if !ok {
            bad.push(format!("{}: {est:?} vs {roots:?}", f.name()));
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        bad.is_empty() && elapsed < Duration::from_secs(5),
        format!("{} functions, failures {bad:?}, {:.3} s", RECOVERABLE.len(), elapsed.as_secs_f64()),
    )
}

/// Random piecewise-smooth function: up to five pieces, each a sinusoid
/// plus a linear trend, with jumps allowed at the breakpoints.
struct Piecewise {
    breaks: Vec<f64>,
    pieces: Vec<[f64; 5]>,
}

impl Piecewise {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        let k = rng.random_range(1..=5);
        let mut breaks: Vec<f64> = (0..k - 1).map(|_| rng.random_range(0.0..1.0)).collect();
        breaks.sort_by(f64::total_cmp);
        let pieces = (0..k)
            .map(|_| {
                [
                    rng.random_range(0.1..2.0),
                    rng.random_range(1.0..60.0),
                    rng.random_range(0.0..6.3),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-2.0..2.0),
                ]
            })
            .collect();
        Piecewise { breaks, pieces }
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= t);
        let [a, w, phi, b, c] = self.pieces[i];
        a * (w * t + phi).sin() + b + c * (t - 0.5)
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut checked = 0usize;
    for _ in 0..1000 {
        let g = Piecewise::random(&mut rng);
        let fs = rng.random_range(20.0..2000.0);
        let s = bank::sample(|t| g.eval(t), (0.0, 1.0), fs, "pw").unwrap();
        let spec = match rng.random_range(0..4) {
            0 => ThresholdSpec::NoiseFreeDt,
            1 => ThresholdSpec::Zscore3,
            2 => ThresholdSpec::Iqr15,
            _ => ThresholdSpec::Fixed(rng.random_range(0.0..0.2)),
        };
        let split = sign_split(&s);
        let Ok(sel) = select_threshold(&spec, &s, &split) else { continue };
        for b in certain(&bracket_split(&s, &split, sel.mu, Retention::Strict).unwrap()) {
            checked += 1;
            if !(g.eval(b.lo) * g.eval(b.hi) < 0.0) {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && checked > 0,
        format!("1000 signals, {checked} certain brackets, {violations} violations"),
    )
}

/// Cluster count of single-linkage clustering at distance `mu`, by
/// union-find over all pairs.
fn single_linkage_clusters(points: &[f64], mu: f64) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).abs() <= mu {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut tele, mut perm, mut clus) = (0, 0, 0);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=100);
        let coarse = rng.random_bool(0.3);
        let mut pts: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = rng.random_range(-50.0..50.0);
                if coarse { x.round() } else { x }
            })
            .collect();
        let d = diagram(&pts);

        let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        let total: f64 = d.deaths().sum();
        if (total - (hi - lo)).abs() > 1e-9 * (1.0 + hi - lo) {
            tele += 1;
        }

        pts.shuffle(&mut rng);
        if diagram(&pts) != d {
            perm += 1;
        }

        let mu = rng.random_range(0.0..5.0);
        if d.components_at(mu) != single_linkage_clusters(&pts, mu) {
            clus += 1;
        }
    }
    Outcome::new(
        tele + perm + clus == 0,
        format!("10000 sets, violations: telescoping {tele}, permutation {perm}, clusters {clus}"),
    )
}

fn criterion_5() -> Outcome {
    let f = bank::bench_function(2).unwrap();
    let span = f.interval.1 - f.interval.0;
    let s = f.sample(999_999.0 / span).unwrap();
    assert_eq!(s.len(), 1_000_000);
    let ps = signal_power(s.values());
    let mut worst: f64 = 0.0;
    for target in [15.0, 30.0, 45.0] {
        for seed in 0..20 {
            let noise = noise_vector(&s, &NoiseSpec::db(target, seed)).unwrap().unwrap();
            let pn = noise.iter().map(|x| x * x).sum::<f64>() / noise.len() as f64;
            let realized = 10.0 * (ps / pn).log10();
            worst = worst.max((realized - target).abs());
        }
    }
    Outcome::new(worst <= 0.1, format!("60 series of 1e6 samples, worst deviation {worst:.4} dB"))
}

fn criterion_6() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let mut bad: Vec<String> = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            bad.push(what.to_string());
        }
    };
    check(close(threshold_zscore3(&[1.0; 4]).unwrap(), 1.0), "zscore constant");
    check(close(threshold_zscore3(&[0.0, 2.0]).unwrap(), 4.0), "zscore {0,2}");
    check(close(threshold_iqr15(&[1.0; 4]).unwrap(), 1.0), "iqr constant");
    check(close(threshold_iqr15(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 5.5), "iqr {1,2,3,4}");
    check(close(threshold_mad(&[1.0; 4], 3.0).unwrap(), 1.0), "mad constant");
    check(close(threshold_mad(&[1.0, 1.0, 1.0, 9.0], 3.0).unwrap(), 1.0), "mad {1,1,1,9}");
    check(close(threshold_mad(&[0.0, 1.0, 2.0, 3.0, 100.0], 3.0).unwrap(), 5.0), "mad {0,1,2,3,100}");
    check(close(threshold_known_roots(&[10.0, 9.0, 8.0, 1.0, 1.0, 1.0], 2).unwrap(), 4.5), "known n=2");

    let x9 = bank::bench_function(9).unwrap().sample(1000.0).unwrap();
    let noisy = add_noise(&x9, &NoiseSpec::db(15.0, 0)).unwrap();
    let d = merged_deaths(&sign_split(&noisy));
    let mu = threshold_zscore3(&d).unwrap();
    check(d.iter().filter(|&&x| x > mu).count() == 2, "x9 15 dB zscore separates 2");

    let x4 = bank::bench_function(4).unwrap().sample(100.0).unwrap();
    let d = merged_deaths(&sign_split(&x4));
    check(d[5] > d[6], "x4 100 Hz top-6 gap");

    let mut cases = 0;
    for id in RECOVERABLE {
        let f = bank::bench_function(id).unwrap();
        let n = f.true_roots().len();
        for fs in [100.0, 500.0, 1000.0] {
            cases += 1;
            let s = f.sample(fs).unwrap();
            let got = certain(&brackets_with(&s, &ThresholdSpec::KnownRootCount(n))).len();
            check(got == n, &format!("known-root-count {}@{fs}: {got} != {n}", f.name()));
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("10 worked examples + {cases} known-root-count cases, failures {bad:?}"),
    )
}

fn criterion_7() -> Outcome {
    let f = bank::bench_function(4).unwrap();
    let mut lines = Vec::new();
    let mut pass = true;
    for fs in [25.0, 100.0] {
        let clean = f.sample(fs).unwrap();
        for snr in [Snr::Db(40.0), Snr::Db(55.0), Snr::Clean] {
            let hits = (0..10u64)
                .filter(|&seed| {
                    let s = add_noise(&clean, &NoiseSpec { snr, seed }).unwrap();
                    let spec = ThresholdSpec::IsolationForest(ForestConfig {
                        seed,
                        ..Default::default()
                    });
                    certain(&brackets_with(&s, &spec)).len() == 5
                })
                .count();
            pass &= hits >= 8;
            lines.push(format!("{fs} Hz/{snr}: {hits}/10"));
        }
    }
    Outcome::new(pass, lines.join(", "))
}

fn criterion_8() -> Outcome {
    let mut bad = Vec::new();
    for f in bank::all() {
        let s = f.sample(500.0).unwrap();
        if !(s.values()[0] > 0.0) {
            continue;
        }
        let root = f.earliest_root().unwrap();
        match first_zero_crossing(&s, &MolinaroParams::default()) {
            Ok(r) => {
                let within = r.kind == ResultKind::Crossing && (r.location - root).abs() <= 2.0 * s.dt();
                if !within || r.evaluations >= s.len() {
                    bad.push(format!(
                        "{}: {:?} at {:.4} vs root {root:.4} ({:.1} dt), {} evals of {}",
                        f.name(),
                        r.kind,
                        r.location,
                        (r.location - root).abs() / s.dt(),
                        r.evaluations,
                        s.len()
                    ));
                }
            }
            Err(e) => bad.push(format!("{}: {e}", f.name())),
        }
    }
    Outcome::new(bad.is_empty(), format!("14 functions at 500 Hz, failures {bad:?}"))
}

fn head_to_head_spec(functions: Vec<u32>, fs: Vec<f64>) -> ExperimentSpec {
    ExperimentSpec {
        functions,
        fs,
        snr: vec![Snr::Db(15.0), Snr::Db(30.0), Snr::Db(45.0)],
        seeds: (0..10).collect(),
        ..Default::default()
    }
}

fn criterion_9() -> Outcome {
    let spec = head_to_head_spec(RECOVERABLE.to_vec(), vec![500.0]);
    let agg = aggregate(&run_sweep(&spec).unwrap(), Normalization::Interval);
    let mut pass = true;
    let mut lines = Vec::new();
    for snr in ["15", "30", "45"] {
        let mut wins = 0;
        let mut losses = Vec::new();
        for id in RECOVERABLE {
            let name = format!("x{id}");
            let median = |m: Method| {
                agg.iter()
                    .find(|r| r.function == name && r.snr_db == snr && r.method == m)
                    .map(|r| r.median_rel_err)
                    .unwrap()
            };
            let (p, m) = (median(Method::Persistence), median(Method::Molinaro));
            if p <= m {
                wins += 1;
            } else {
                losses.push(name);
            }
        }
        let frac = wins as f64 / RECOVERABLE.len() as f64;
        pass &= frac >= 0.7;
        lines.push(format!("{snr} dB: {wins}/{} ({:.0}%, behind on {losses:?})", RECOVERABLE.len(), 100.0 * frac));
    }
    Outcome::new(pass, lines.join("; "))
}

fn criterion_10() -> Outcome {
    let spec = head_to_head_spec(vec![2], vec![100.0, 500.0, 1000.0]);
    let agg = aggregate(&run_sweep(&spec).unwrap(), Normalization::Interval);
    let worst = |m: Method| {
        agg.iter()
            .filter(|r| r.method == m)
            .map(|r| r.mean_rel_err)
            .fold(0.0, f64::max)
    };
    let (p, m) = (worst(Method::Persistence), worst(Method::Molinaro));
    Outcome::new(
        p <= m,
        format!("max mean-cell error: persistence {:.3}%, molinaro {:.3}%", 100.0 * p, 100.0 * m),
    )
}

fn x2_with(n: usize) -> TimeSeries {
    let f: &BenchFunction = bank::bench_function(2).unwrap();
    let span = f.interval.1 - f.interval.0;
    let s = f.sample((n - 1) as f64 / span).unwrap();
    assert_eq!(s.len(), n);
    add_noise(&s, &NoiseSpec::db(30.0, 11)).unwrap()
}

/// Best of three runs of the full pipeline.
fn time_pipeline(s: &TimeSeries) -> (Duration, usize) {
    let mut best = Duration::MAX;
    let mut found = 0;
    for _ in 0..3 {
        let start = Instant::now();
        let split = sign_split(s);
        let sel = select_threshold(&ThresholdSpec::default(), s, &split).unwrap();
        let b = bracket_split(s, &split, sel.mu, Retention::Strict).unwrap();
        best = best.min(start.elapsed());
        found = b.len();
    }
    (best, found)
}

fn criterion_11() -> Outcome {
    let big = x2_with(1_000_000);
    let small = x2_with(100_000);
    let (t_big, n_big) = time_pipeline(&big);
    let (t_small, _) = time_pipeline(&small);
    let ratio = t_big.as_secs_f64() / t_small.as_secs_f64().max(1e-9);
    // N log N predicts ~12x for a tenfold N; allow measurement noise.
    Outcome::new(
        t_big < Duration::from_secs(1) && ratio < 25.0,
        format!(
            "1e6 samples: {:.3} s ({n_big} brackets); 1e5: {:.4} s; ratio {ratio:.1}",
            t_big.as_secs_f64(),
            t_small.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("clean-signal oracle equivalence", criterion_1),
        ("root recovery at 1000 Hz", criterion_2),
        ("IVT on random piecewise-smooth signals", criterion_3),
        ("persistence diagram properties", criterion_4),
        ("realized SNR", criterion_5),
        ("threshold policies", criterion_6),
        ("isolation forest at low fs", criterion_7),
        ("baseline correctness", criterion_8),
        ("head-to-head median error at 500 Hz", criterion_9),
        ("x2 heat-map contrast", criterion_10),
        ("performance at 1e6 samples", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} #{:<2} {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
