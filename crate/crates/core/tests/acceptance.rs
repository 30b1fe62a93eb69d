//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p emoflow --test acceptance`. Set
//! `EMOFLOW_BLESS=1` to rewrite the pinned golden manifest.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use emoflow::emotion::{validate_simplex, EmotionVector};
use emoflow::infoflow::{
    bidirectional_te, discretize, permutation_significance, te_symbols, BinningSpec, SymbolSeries,
    TeResult,
};
use emoflow::pipeline::{run_pipeline, PipelineConfig};
use emoflow::report::read_te_report;
use emoflow::scoring::{score_lexicon, Lexicon};
use emoflow::synth::{write_fixture, SynthConfig};
use emoflow::timeseries::rolling_mean;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROPERTY_CASES: u32 = 256;
const SEED: u64 = 7;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle equivalence", oracle_equivalence),
        ("analytic lag-1 copy", analytic_copy),
        ("independence calibration", independence_calibration),
        ("synthetic lead pattern", synthetic_lead),
        ("windowed reversal", windowed_reversal),
        ("property suites", property_suites),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}, {secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}, {secs:.2}s): {detail}", i + 1)
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Independent reference implementations.

fn oracle_bins(values: &[f64], n_bins: usize) -> Vec<usize> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| {
            if hi == lo {
                0
            } else {
                (((v - lo) / (hi - lo) * n_bins as f64).floor() as usize).min(n_bins - 1)
            }
        })
        .collect()
}

/// Plug-in TE from x to y by direct summation over observed triples, each
/// probability obtained by rescanning the samples.
fn oracle_te(x: &[usize], y: &[usize], lag: usize) -> f64 {
    let samples: Vec<(usize, usize, usize)> = (lag..y.len())
        .map(|t| (y[t], y[t - lag], x[t - lag]))
        .collect();
    let n = samples.len() as f64;
    let p = |f: &dyn Fn(&(usize, usize, usize)) -> bool| {
        samples.iter().filter(|s| f(s)).count() as f64 / n
    };
    let mut seen = Vec::new();
    let mut te = 0.0;
    for &(a, b, c) in &samples {
        if seen.contains(&(a, b, c)) {
            continue;
        }
        seen.push((a, b, c));
        let p_abc = p(&|s| *s == (a, b, c));
        let p_b = p(&|s| s.1 == b);
        let p_bc = p(&|s| s.1 == b && s.2 == c);
        let p_ab = p(&|s| s.0 == a && s.1 == b);
        te += p_abc * (p_abc * p_b / (p_bc * p_ab)).log2();
    }
    te
}

fn random_series(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    // a third of the series draw from few distinct levels to force ties
    if rng.random_bool(1.0 / 3.0) {
        let levels = rng.random_range(1..=4);
        (0..len)
            .map(|_| rng.random_range(0..levels) as f64)
            .collect()
    } else {
        (0..len).map(|_| rng.random_range(-5.0..5.0)).collect()
    }
}

// Criteria.

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let len = rng.random_range(2..=30);
        let lag = rng.random_range(1..=3.min(len - 1));
        let n_bins = rng.random_range(2..=4);
        let xv = random_series(&mut rng, len);
        let yv = random_series(&mut rng, len);
        let spec = BinningSpec::new(n_bins);
        let x = discretize(&xv, &spec).map_err(|e| e.to_string())?;
        let y = discretize(&yv, &spec).map_err(|e| e.to_string())?;
        let (ox, oy) = (oracle_bins(&xv, n_bins), oracle_bins(&yv, n_bins));
        check(x.symbols == ox && y.symbols == oy, || {
            format!("case {case}: binning differs from oracle")
        })?;
        for (src, dst, os, od) in [(&x, &y, &ox, &oy), (&y, &x, &oy, &ox)] {
            let got = te_symbols(src, dst, lag).map_err(|e| e.to_string())?;
            let want = oracle_te(os, od, lag);
            worst = worst.max((got - want).abs());
            check((got - want).abs() <= 1e-12, || {
                format!("case {case}: te {got} vs oracle {want}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "500 instances x 2 directions, max |diff| = {worst:.2e}, {elapsed:.2?}"
    ))
}

fn analytic_copy() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let x: Vec<f64> = (0..10_000).map(|_| rng.random_range(0..2) as f64).collect();
    let mut y = vec![rng.random_range(0..2) as f64];
    y.extend_from_slice(&x[..x.len() - 1]);
    let te = bidirectional_te(&x, &y, &BinningSpec::new(2), 1).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check((te.te_x_to_y - 1.0).abs() <= 0.05, || {
        format!("te_x_to_y = {}", te.te_x_to_y)
    })?;
    check(te.te_y_to_x < 0.02, || {
        format!("te_y_to_x = {}", te.te_y_to_x)
    })?;
    check(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "te_x_to_y = {:.4}, te_y_to_x = {:.4}",
        te.te_x_to_y, te.te_y_to_x
    ))
}

fn independence_calibration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let normal = rand_distr::StandardNormal;
    let reps = 200;
    let mut rejections = 0;
    for rep in 0..reps {
        let x: Vec<f64> = (0..200).map(|_| rng.sample::<f64, _>(normal)).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.sample::<f64, _>(normal)).collect();
        let p = permutation_significance(&x, &y, &BinningSpec::new(3), 1, 99, SEED + rep)
            .map_err(|e| e.to_string())?;
        if p.p_x_to_y <= 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / reps as f64;
    check((rate - 0.05).abs() <= 0.04, || {
        format!("rejection rate {rate:.3}")
    })?;
    Ok(format!(
        "{rejections}/{reps} rejections at 0.05 (rate {rate:.3})"
    ))
}

fn run_fixture(
    dir: &Path,
    synth: &SynthConfig,
    windows: bool,
) -> Result<(PipelineConfig, Vec<TeResult>), String> {
    let windows = if windows {
        synth.phase_windows()
    } else {
        Vec::new()
    };
    let cfg_path = write_fixture(dir, synth, &windows).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    run_pipeline(&cfg).map_err(|e| e.to_string())?;
    let te = read_te_report(&cfg.output_dir.join("te_report.json")).map_err(|e| e.to_string())?;
    Ok((cfg, te))
}

fn synthetic_lead() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (cfg, te) = run_fixture(dir.path(), &SynthConfig::two_months(SEED), false)?;
    check(cfg.lag == 3, || format!("fixture lag {}", cfg.lag))?;
    let full = &te[..8];
    for r in full {
        check(r.te_x_to_y > r.te_y_to_x, || {
            format!(
                "{}: social->news {:.4} <= news->social {:.4}",
                r.emotion, r.te_x_to_y, r.te_y_to_x
            )
        })?;
    }
    let crossover: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(cfg.output_dir.join("crossover.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let day = |ch: &str| -> Result<String, String> {
        let rec = &crossover[ch];
        check(rec["status"] == "crossed", || {
            format!("{ch} crossover status {}", rec["status"])
        })?;
        Ok(rec["day"].as_str().unwrap_or_default().to_owned())
    };
    let (social, news) = (day("social")?, day("news")?);
    check(social < news, || {
        format!("social crossover {social} not before news {news}")
    })?;
    let min_gap = full
        .iter()
        .map(|r| r.te_x_to_y - r.te_y_to_x)
        .fold(f64::INFINITY, f64::min);
    Ok(format!(
        "social->news dominates for 8/8 emotions (min margin {min_gap:.3} bits); fear/anticipation crossover social {social}, news {news}"
    ))
}

fn windowed_reversal() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let synth = SynthConfig::reversal(SEED);
    let (_, te) = run_fixture(dir.path(), &synth, true)?;
    let phases = synth.phase_windows();
    let mut margins = Vec::new();
    for w in &phases {
        let rows: Vec<&TeResult> = te
            .iter()
            .filter(|r| r.window_start == w.start && r.window_end == w.end)
            .collect();
        check(rows.len() == 8, || {
            format!("window {} to {}: {} results", w.start, w.end, rows.len())
        })?;
        let mean = rows.iter().map(|r| r.te_x_to_y - r.te_y_to_x).sum::<f64>() / 8.0;
        let social_leads = rows.iter().filter(|r| r.te_x_to_y > r.te_y_to_x).count();
        margins.push((mean, social_leads));
    }
    let ((m1, c1), (m2, c2)) = (margins[0], margins[1]);
    check(m1 > 0.0 && m2 < 0.0, || {
        format!("mean social-minus-news TE: first half {m1:.4}, second half {m2:.4}")
    })?;
    Ok(format!(
        "first half social leads (mean margin {m1:.3}, {c1}/8 emotions), second half news leads (mean margin {:.3}, {}/8 emotions)",
        -m2,
        8 - c2
    ))
}

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases: PROPERTY_CASES,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn symbols_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, usize, usize)> {
    (2usize..=5, 1usize..=3).prop_flat_map(|(n_bins, lag)| {
        (lag + 1..=60).prop_flat_map(move |len| {
            (
                prop::collection::vec(0..n_bins, len),
                prop::collection::vec(0..n_bins, len),
                Just(n_bins),
                Just(lag),
            )
        })
    })
}

fn property_suites() -> Outcome {
    let mut passed = Vec::new();
    let mut run = |name: &str, result: Result<(), String>| -> Result<(), String> {
        result.map_err(|e| format!("{name}: {e}"))?;
        passed.push(name.to_owned());
        Ok(())
    };

    let words = [
        "afraid", "sad", "wow", "hope", "happy", "angry", "gross", "trust", "rice", "the",
    ];
    let lexicon_strategy = (
        prop::collection::vec(prop::collection::vec(0.0f64..5.0, 8), words.len()),
        0.01f64..10.0,
    );
    let text_strategy = prop::collection::vec(0usize..words.len() + 2, 0..40);
    run(
        "lexicon scores on simplex",
        runner()
            .run(
                &(lexicon_strategy, text_strategy),
                |((weights, mass), tokens)| {
                    let entries: HashMap<String, [f64; 8]> = words
                        .iter()
                        .zip(&weights)
                        .filter(|(_, w)| w.iter().any(|&v| v > 0.0))
                        .map(|(k, w)| (k.to_string(), w.clone().try_into().unwrap()))
                        .collect();
                    prop_assume!(!entries.is_empty());
                    let lex = Lexicon::new(entries, mass).unwrap();
                    let text: Vec<&str> = tokens
                        .iter()
                        .map(|&i| words.get(i).copied().unwrap_or("unknown,"))
                        .collect();
                    let v = score_lexicon(&text.join(" "), &lex);
                    prop_assert!(validate_simplex(&v), "{:?}", v);
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    )?;

    run(
        "normalized scorer responses on simplex",
        runner()
            .run(&prop::collection::vec(0.0f64..1e6, 8), |raw| {
                let arr: [f64; 8] = raw.try_into().unwrap();
                match EmotionVector::normalized(arr) {
                    Some(v) => prop_assert!(validate_simplex(&v), "{:?}", v),
                    None => prop_assert!(arr.iter().sum::<f64>() == 0.0),
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    run(
        "rolling mean of a constant is constant",
        runner()
            .run(&(-1e6f64..1e6, 1usize..80, 1usize..15), |(c, len, w)| {
                let out = rolling_mean(&vec![c; len], w).unwrap();
                prop_assert!(out.iter().all(|v| (v - c).abs() <= 1e-9 * c.abs().max(1.0)));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    run(
        "rolling mean length is n - w + 1",
        runner()
            .run(
                &(prop::collection::vec(-10.0f64..10.0, 0..80), 1usize..15),
                |(v, w)| {
                    let out = rolling_mean(&v, w).unwrap();
                    prop_assert_eq!(out.len(), (v.len() + 1).saturating_sub(w));
                    Ok(())
                },
            )
            .map_err(|e| e.to_string()),
    )?;

    run(
        "TE within [0, log2(n_bins)]",
        runner()
            .run(&symbols_strategy(), |(x, y, n_bins, lag)| {
                let xs = SymbolSeries::new(x, n_bins).unwrap();
                let ys = SymbolSeries::new(y, n_bins).unwrap();
                let te = te_symbols(&xs, &ys, lag).unwrap();
                prop_assert!(te >= 0.0, "te {}", te);
                prop_assert!(
                    te <= (n_bins as f64).log2() + 1e-12,
                    "te {} bins {}",
                    te,
                    n_bins
                );
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let permuted = symbols_strategy().prop_flat_map(|(x, y, n_bins, lag)| {
        let perm = Just((0..n_bins).collect::<Vec<_>>()).prop_shuffle();
        (Just((x, y, n_bins, lag)), perm.clone(), perm)
    });
    run(
        "TE invariant under bin relabeling",
        runner()
            .run(&permuted, |((x, y, n_bins, lag), px, py)| {
                let base = te_symbols(
                    &SymbolSeries::new(x.clone(), n_bins).unwrap(),
                    &SymbolSeries::new(y.clone(), n_bins).unwrap(),
                    lag,
                )
                .unwrap();
                let xr: Vec<usize> = x.iter().map(|&s| px[s]).collect();
                let yr: Vec<usize> = y.iter().map(|&s| py[s]).collect();
                let relabeled = te_symbols(
                    &SymbolSeries::new(xr, n_bins).unwrap(),
                    &SymbolSeries::new(yr, n_bins).unwrap(),
                    lag,
                )
                .unwrap();
                prop_assert!(
                    (base - relabeled).abs() <= 1e-12,
                    "{} vs {}",
                    base,
                    relabeled
                );
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    let affine = (
        prop::collection::vec(-100.0f64..100.0, 5..60),
        prop::collection::vec(-100.0f64..100.0, 5..60),
        2usize..=5,
        0.01f64..100.0,
        -1e3f64..1e3,
    );
    run(
        "TE invariant under positive affine maps",
        runner()
            .run(&affine, |(x, y, n_bins, a, b)| {
                let len = x.len().min(y.len());
                let (x, y) = (&x[..len], &y[..len]);
                let spec = BinningSpec::new(n_bins);
                let map = |v: &[f64]| v.iter().map(|t| a * t + b).collect::<Vec<_>>();
                let base = bidirectional_te(x, y, &spec, 1).unwrap();
                let moved = bidirectional_te(&map(x), &map(y), &spec, 1).unwrap();
                prop_assert!((base.te_x_to_y - moved.te_x_to_y).abs() <= 1e-12);
                prop_assert!((base.te_y_to_x - moved.te_y_to_x).abs() <= 1e-12);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    )?;

    Ok(format!(
        "{} properties x {PROPERTY_CASES} cases: {}",
        passed.len(),
        passed.join("; ")
    ))
}

fn determinism() -> Outcome {
    let synth = SynthConfig::two_months(SEED);
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut manifests = Vec::new();
    for dir in [a.path(), b.path()] {
        let (cfg, _) = run_fixture(dir, &synth, false)?;
        manifests.push(fs::read(cfg.output_dir.join("manifest.json")).map_err(|e| e.to_string())?);
    }
    check(manifests[0] == manifests[1], || {
        "manifests differ between runs".into()
    })?;

    let golden_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/manifest_two_months_seed7.json");
    if std::env::var_os("EMOFLOW_BLESS").is_some() {
        fs::create_dir_all(golden_path.parent().unwrap()).map_err(|e| e.to_string())?;
        fs::write(&golden_path, &manifests[0]).map_err(|e| e.to_string())?;
    }
    let golden = fs::read(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    check(golden == manifests[0], || {
        format!("manifest differs from pinned {}", golden_path.display())
    })?;
    let entries = serde_json::from_slice::<serde_json::Value>(&golden)
        .ok()
        .and_then(|v| v["artifacts"].as_array().map(Vec::len))
        .unwrap_or(0);
    Ok(format!(
        "two runs byte-identical and equal to the pinned manifest ({entries} artifacts)"
    ))
}
