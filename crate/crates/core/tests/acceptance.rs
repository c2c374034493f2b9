//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Tolerances and seeds are pinned here.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use readtime::aggregation::classify_read_level;
use readtime::baselines::{all_baselines, center_distance_all, mouse_proximity_all, window_share_all};
use readtime::estimators::{EstimatorKind, PredictionRecord};
use readtime::evaluation::{
    compute_metrics, holm_sidak, make_cv_plan, paired_t_test, GroundTruth, MessageEstimate, MessageTruth, Metric,
    MetricsReport, SessionTruth,
};
use readtime::event::{MessageGeometry, NewsletterLayout, ViewState, WindowSnapshot};
use readtime::experiment::{
    evaluate_round_model, oracle_records, run_experiment, score_records, train_round_model, ExperimentConfig,
    PreparedData,
};
use readtime::geometry::{Point, Rect};
use readtime::neural::gradcheck::check_gradients;
use readtime::neural::{Activation, DenseNet, Inputs, Loss, Matrix, Model, Targets, TrainConfig, TwoTowerNet};
use readtime::simulator::{generate_corpus, MixtureEntry, ReaderArchetype, SimConfig};

/// Seed of the default corpus used for the ordering check.
const ORDERING_SEED: u64 = 1;
/// Leave-one-user-out rounds for the ordering check: each user tested once.
const ORDERING_ROUNDS: usize = 9;
const ORDERING_BUDGET: Duration = Duration::from_secs(30 * 60);
const Q3_SEED: u64 = 1;
const Q3_ROUNDS: usize = 18;
/// Required per_error gap between the two baseline-fed networks, as a fraction.
const Q3_MARGIN: f64 = 0.01;
const GRAD_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const GRAD_TOLERANCE: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-6;
const STATS_TOLERANCE: f64 = 1e-10;
const BASELINE_CASES: u32 = 10_000;
const ONE_MINUTE: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(t0: Instant, budget: Duration) -> Result<(), String> {
    check(t0.elapsed() < budget, format!("took {:.1?}, budget {budget:?}", t0.elapsed()))
}

/// Gaze labels used as per-second probabilities reproduce the truth exactly.
fn oracle_identity() -> Outcome {
    let t0 = Instant::now();
    let mut messages = 0;
    for seed in [1, 2] {
        let sim = generate_corpus(&SimConfig { seed, ..SimConfig::default() }).map_err(|e| e.to_string())?;
        let users = sim.corpus.sessionize().map_err(|e| e.to_string())?;
        let data = PreparedData::new(&users).map_err(|e| e.to_string())?;
        let rows: Vec<usize> = (0..data.timestamp.n_rows()).collect();
        let records = oracle_records(&data.timestamp, &rows).map_err(|e| e.to_string())?;
        let r = score_records(&records, &data.truth).map_err(|e| e.to_string())?;
        check(r.per_error == Some(0.0), format!("seed {seed}: per_error {:?}", r.per_error))?;
        check(r.abs_error == Some(0.0), format!("seed {seed}: abs_error {:?}", r.abs_error))?;
        check(r.accuracy == Some(1.0), format!("seed {seed}: accuracy {:?}", r.accuracy))?;
        messages += r.n_messages;
    }
    within(t0, ONE_MINUTE)?;
    Ok(format!("{messages} messages over 2 corpora exact in {:.1?}", t0.elapsed()))
}

fn random_params(model: &mut Model, rng: &mut ChaCha8Rng) {
    for slice in model.param_slices_mut() {
        slice.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
}

/// The four network shapes used by the learned estimators, at small random sizes.
fn architectures(rng: &mut ChaCha8Rng) -> Vec<(&'static str, Model)> {
    let w = rng.random_range(3..6);
    let ia = rng.random_range(2..5);
    let ib = rng.random_range(2..5);
    let relu = Activation::Relu;
    let towers = |rng: &mut ChaCha8Rng| {
        let a = DenseNet::new(ia, &[(w, relu), (4, Activation::Identity)], rng).unwrap();
        let b = DenseNet::new(ib, &[(w, relu), (4, Activation::Sigmoid)], rng).unwrap();
        (a, b)
    };
    let mut out = Vec::new();
    out.push((
        "single sigmoid",
        Model::Single(DenseNet::new(ia, &[(w, relu), (1, Activation::Sigmoid)], rng).unwrap()),
    ));
    for (name, head) in [
        ("two-tower multiply", (1, Activation::Sigmoid)),
        ("relu head", (1, relu)),
        ("softmax head", (3, Activation::Softmax)),
    ] {
        let (a, b) = towers(rng);
        let h = DenseNet::new(4, &[head], rng).unwrap();
        out.push((name, Model::TwoTower(TwoTowerNet::new(a, b, h).unwrap())));
    }
    out
}

/// Central differences against backprop for every architecture and every
/// loss it accepts; incompatible pairs must be rejected.
fn gradient_correctness() -> Outcome {
    let t0 = Instant::now();
    let mut checked = 0;
    let mut worst = 0.0f64;
    for seed in GRAD_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (name, mut model) in architectures(&mut rng) {
            random_params(&mut model, &mut rng);
            let (ia, ib) = model.input_dims();
            let n = 7;
            let a = random_matrix(&mut rng, n, ia);
            let b = ib.map(|d| random_matrix(&mut rng, n, d));
            let x = Inputs { a: &a, b: b.as_ref() };
            let binary: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..2u8))).collect();
            let real: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
            let class: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let mut accepted = 0;
            for (loss, targets) in [
                (Loss::WeightedBce, Targets::Binary(&binary)),
                (Loss::AbsoluteError, Targets::Real(&real)),
                (Loss::CrossEntropy, Targets::Class(&class)),
            ] {
                match check_gradients(&model, x, &targets, loss, 20.0, GRAD_STEP) {
                    Ok(r) => {
                        accepted += 1;
                        checked += 1;
                        worst = worst.max(r.max_rel_error);
                        check(
                            r.max_rel_error < GRAD_TOLERANCE,
                            format!(
                                "{name} / {loss:?} seed {seed}: rel error {:.2e} at {:?}",
                                r.max_rel_error, r.worst
                            ),
                        )?;
                    }
                    Err(_) => check(
                        !matches!(
                            (name, loss),
                            ("single sigmoid" | "two-tower multiply", Loss::WeightedBce)
                                | ("relu head", Loss::AbsoluteError)
                                | ("softmax head", Loss::CrossEntropy)
                        ),
                        format!("{name} rejected its own loss {loss:?}"),
                    )?,
                }
            }
            check(accepted > 0, format!("{name} accepts no loss"))?;
        }
    }
    within(t0, ONE_MINUTE)?;
    Ok(format!("{checked} (architecture, loss, seed) checks, worst rel error {worst:.1e}"))
}

fn truth_session(id: &str, times: [f64; 5]) -> SessionTruth {
    SessionTruth {
        session_id: id.into(),
        user_id: "u".into(),
        start_sec: 0,
        end_sec: 100,
        messages: times
            .iter()
            .enumerate()
            .map(|(i, &time)| MessageTruth {
                msg_id: format!("m{i}"),
                words: 100,
                time,
                level: classify_read_level(time, 100).unwrap(),
            })
            .collect(),
    }
}

/// Three sessions of five 100-word messages (skip below 15 s, detail from
/// 30 s). Every expected value below was worked out by hand.
fn metric_fixture() -> Outcome {
    let truth = GroundTruth {
        sessions: vec![
            truth_session("A", [0.0, 12.0, 40.0, 8.0, 20.0]),
            truth_session("B", [5.0, 15.0, 30.0, 50.0, 0.0]),
            truth_session("C", [25.0, 10.0, 3.0, 60.0, 14.0]),
        ],
    };
    let est = [
        ("A", [2.0, 10.0, 30.0, 8.0, 35.0]),
        ("B", [0.0, 20.0, 45.0, 50.0, 16.0]),
        ("C", [5.0, 10.0, 14.0, 20.0, 15.0]),
    ];
    let estimates: Vec<MessageEstimate> = est
        .iter()
        .flat_map(|(s, times)| {
            times.iter().enumerate().map(move |(i, &t)| MessageEstimate {
                session_id: s.to_string(),
                msg_id: format!("m{i}"),
                time: Some(t),
                level: classify_read_level(t, 100).unwrap(),
            })
        })
        .collect();
    let r = compute_metrics(&estimates, &truth).map_err(|e| e.to_string())?;
    // True times of at least 10 s (the 10 s message included) go to per_error,
    // in session then message order.
    let per =
        (1.0 / 6.0 + 1.0 / 4.0 + 3.0 / 4.0 + 1.0 / 3.0 + 1.0 / 2.0 + 0.0 + 4.0 / 5.0 + 0.0 + 2.0 / 3.0 + 1.0 / 14.0)
            / 10.0;
    let expected = MetricsReport {
        n_messages: 15,
        per_error: Some(per),
        per_error_count: 10,
        abs_error: Some(34.0 / 5.0),
        abs_error_count: 5,
        accuracy: Some(10.0 / 15.0),
        skim_precision: Some(1.0 / 4.0),
        skim_recall: Some(1.0 / 3.0),
        detail_precision: Some(3.0 / 4.0),
        detail_recall: Some(3.0 / 4.0),
        // read = skim or detail: a skim read as detail still counts as read.
        read_precision: Some(6.0 / 8.0),
        read_recall: Some(6.0 / 7.0),
        confusion: [[6, 2, 0], [1, 1, 1], [0, 1, 3]],
    };
    check(r == expected, format!("got {r:?}"))?;

    // Classification-only estimates leave both time metrics undefined.
    let classes: Vec<MessageEstimate> = estimates.iter().map(|e| MessageEstimate { time: None, ..e.clone() }).collect();
    let rc = compute_metrics(&classes, &truth).map_err(|e| e.to_string())?;
    check(rc.per_error.is_none() && rc.abs_error.is_none() && rc.accuracy == expected.accuracy, "class-only report")?;
    Ok("15 messages: per/abs split, confusion and all rates exact".into())
}

/// Raw p from a two-sided paired t-test and Holm–Šidák adjustment, frozen
/// from scipy.stats.ttest_rel and statsmodels multipletests("holm-sidak").
fn statistics_fixture() -> Outcome {
    let a = [0.42, 0.37, 0.51, 0.29, 0.46, 0.33, 0.40, 0.38];
    let b = [0.35, 0.30, 0.47, 0.31, 0.36, 0.29, 0.33, 0.36];
    let c = [0.41, 0.39, 0.45, 0.30, 0.47, 0.30, 0.42, 0.35];
    let d = [0.28, 0.33, 0.40, 0.22, 0.35, 0.27, 0.30, 0.29];
    let t_expected = [3.7064895138296343, 0.8533684971523511, 7.937253933193772];
    let p_expected = [0.007589824128208739, 0.4216928893628016, 9.584590571929183e-05];
    let adj_expected = [0.01512204282612034, 0.4216928893628016, 0.00028751015872542846];
    let mut raw = Vec::new();
    for (i, other) in [b, c, d].iter().enumerate() {
        let t = paired_t_test(&a, other).map_err(|e| e.to_string())?;
        check((t.t - t_expected[i]).abs() < STATS_TOLERANCE, format!("pair {i}: t {} vs {}", t.t, t_expected[i]))?;
        check((t.p - p_expected[i]).abs() < STATS_TOLERANCE, format!("pair {i}: p {} vs {}", t.p, p_expected[i]))?;
        raw.push(t.p);
    }
    let adj = holm_sidak(&raw);
    for i in 0..3 {
        check(
            (adj[i] - adj_expected[i]).abs() < STATS_TOLERANCE,
            format!("pair {i}: adjusted {} vs {}", adj[i], adj_expected[i]),
        )?;
        check(adj[i] >= raw[i], "adjusted below raw")?;
    }
    for &p in &raw {
        check(holm_sidak(&[p]) == vec![p], format!("k = 1 changed {p}"))?;
    }
    Ok("3 pairs over 8 rounds within 1e-10; k = 1 unchanged".into())
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map_or("undefined".into(), |v| format!("{:.1}%", 100.0 * v))
}

/// Simulate, featurize, cross-validate and compare on the default corpus.
fn ordering() -> Outcome {
    use EstimatorKind::*;
    let t0 = Instant::now();
    let sim = generate_corpus(&SimConfig { seed: ORDERING_SEED, ..SimConfig::default() }).map_err(|e| e.to_string())?;
    let users = sim.corpus.sessionize().map_err(|e| e.to_string())?;
    let data = PreparedData::new(&users).map_err(|e| e.to_string())?;
    let models = vec![Baseline1, Baseline2, Baseline3, Logistic, Nn, PatternNn, PatternSessionalNn];
    let cfg = ExperimentConfig { models, rounds: ORDERING_ROUNDS, ..ExperimentConfig::default() };
    let out = run_experiment(&data, &cfg, &|_| {}).map_err(|e| e.to_string())?;
    let pe = |k| out.table.mean(k, Metric::PerError);
    let get = |k| pe(k).ok_or(format!("{k}: per_error undefined"));
    let best_baseline = [Baseline1, Baseline2, Baseline3].into_iter().map(get).collect::<Result<Vec<_>, _>>()?;
    let best_baseline = best_baseline.into_iter().fold(f64::INFINITY, f64::min);
    let (nn, logistic, pnn, sessional) = (get(Nn)?, get(Logistic)?, get(PatternNn)?, get(PatternSessionalNn)?);
    let summary = format!(
        "NN {} < Logistic {} < best baseline {}; Pattern+ Sessional NN {} > Pattern+ NN {}; {:.0?}",
        fmt_pct(Some(nn)),
        fmt_pct(Some(logistic)),
        fmt_pct(Some(best_baseline)),
        fmt_pct(Some(sessional)),
        fmt_pct(Some(pnn)),
        t0.elapsed()
    );
    check(nn < logistic && logistic < best_baseline && sessional > pnn, summary.clone())?;
    within(t0, ORDERING_BUDGET)?;
    Ok(summary)
}

/// Pattern features must help the baseline-fed network when mouse habits
/// differ between users.
fn q3_mechanism() -> Outcome {
    use EstimatorKind::*;
    let mixture = vec![
        MixtureEntry { archetype: ReaderArchetype::tracks_gaze(80.0, 0.8), weight: 0.5 },
        MixtureEntry { archetype: ReaderArchetype::parked(), weight: 0.5 },
    ];
    let sim =
        generate_corpus(&SimConfig { seed: Q3_SEED, mixture, ..SimConfig::default() }).map_err(|e| e.to_string())?;
    let users = sim.corpus.sessionize().map_err(|e| e.to_string())?;
    let data = PreparedData::new(&users).map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig {
        models: vec![BaselineNn, PatternBaselineNn],
        rounds: Q3_ROUNDS,
        ..ExperimentConfig::default()
    };
    let out = run_experiment(&data, &cfg, &|_| {}).map_err(|e| e.to_string())?;
    let n = out.table.models[&BaselineNn].len();
    let (plain, pattern) =
        (out.table.mean(BaselineNn, Metric::PerError), out.table.mean(PatternBaselineNn, Metric::PerError));
    let summary =
        format!("Baseline NN {} -> Pattern+ Baseline NN {} over {n} rounds", fmt_pct(plain), fmt_pct(pattern));
    let (Some(plain), Some(pattern)) = (plain, pattern) else {
        return Err(summary);
    };
    check(n >= 16 && pattern <= plain - Q3_MARGIN, summary.clone())?;
    Ok(summary)
}

fn artifacts(threads: usize) -> Result<Vec<Vec<u8>>, String> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| e.to_string())?;
    pool.install(|| {
        let cfg =
            SimConfig { n_users: 3, newsletters_per_user: 3, newsletter_pool: 5, seed: 11, ..SimConfig::default() };
        let sim = generate_corpus(&cfg).map_err(|e| e.to_string())?;
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        sim.corpus.save(dir.path(), None, Some(&sim.archetypes)).map_err(|e| e.to_string())?;
        let mut bytes = Vec::new();
        let mut files: Vec<_> = walk(dir.path());
        files.sort();
        for f in files {
            bytes.push(std::fs::read(&f).map_err(|e| e.to_string())?);
        }
        let users = sim.corpus.sessionize().map_err(|e| e.to_string())?;
        let data = PreparedData::new(&users).map_err(|e| e.to_string())?;
        for m in [&data.timestamp, &data.sessional] {
            let mut buf = Vec::new();
            m.write_tsv(&mut buf).map_err(|e| e.to_string())?;
            bytes.push(buf);
        }
        let plan = make_cv_plan(&data.user_sessions, 2, 5).map_err(|e| e.to_string())?;
        bytes.push(serde_json::to_vec(&plan).unwrap());
        let train = TrainConfig { max_epochs: 3, ..TrainConfig::default() };
        let kinds = [EstimatorKind::Baseline3, EstimatorKind::PatternNn, EstimatorKind::PatternSessionalNn];
        let per_round: Vec<Vec<Vec<u8>>> = plan
            .rounds
            .par_iter()
            .map(|round| {
                kinds
                    .iter()
                    .map(|&k| {
                        let est = train_round_model(&data, round, k, &train).map_err(|e| e.to_string())?;
                        let (records, report) = evaluate_round_model(&data, round, &est).map_err(|e| e.to_string())?;
                        let mut out = est.to_json().into_bytes();
                        out.extend(serde_json::to_vec::<Vec<PredictionRecord>>(&records).unwrap());
                        out.extend(serde_json::to_vec(&report).unwrap());
                        Ok(out)
                    })
                    .collect::<Result<Vec<_>, String>>()
            })
            .collect::<Result<_, _>>()?;
        bytes.extend(per_round.into_iter().flatten());
        Ok(bytes)
    })
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

/// Every stage run twice with the same seeds, once on one thread and once on
/// several, yields identical bytes.
fn determinism() -> Outcome {
    let first = artifacts(1)?;
    let second = artifacts(3)?;
    check(first.len() == second.len(), "artifact count differs")?;
    if let Some(i) = (0..first.len()).find(|&i| first[i] != second[i]) {
        return Err(format!("artifact {i} differs"));
    }
    let total: usize = first.iter().map(Vec::len).sum();
    Ok(format!("{} artifacts ({total} bytes) identical across runs and thread counts", first.len()))
}

fn snapshot_strategy() -> impl Strategy<Value = WindowSnapshot> {
    let rect = (0.0..1500.0f64, 0.0..4000.0f64, 1.0..1200.0f64, 1.0..900.0f64);
    (
        prop::collection::vec(rect, 1..12),
        0.0..4000.0f64,
        prop::option::of((200u32..2000, 200u32..1400)),
        prop::option::of((-200.0..2200.0f64, -200.0..6000.0f64)),
    )
        .prop_map(|(rects, scroll, viewport, mouse)| {
            let messages: Vec<MessageGeometry> = rects
                .iter()
                .enumerate()
                .map(|(i, &(x, y, w, h))| MessageGeometry {
                    msg_id: format!("m{i}"),
                    rect: Rect::new(x, y, w, h),
                    words: 10,
                })
                .collect();
            let doc = messages.iter().map(|m| m.rect.bottom()).fold(0.0, f64::max);
            let layout = NewsletterLayout::new("n".to_string(), doc, messages).unwrap();
            let state = ViewState { scroll_y: scroll, viewport, mouse: mouse.map(|(x, y)| Point::new(x, y)) };
            WindowSnapshot::compute(&layout, 0, &state)
        })
}

/// Window share recomputed from the message and window extents without the
/// snapshot's clipping code.
fn independent_share(snap: &WindowSnapshot, layout_rect: Rect) -> f64 {
    let overlap_w = (layout_rect.right().min(snap.win_w) - layout_rect.x.max(0.0)).max(0.0);
    let overlap_h = (layout_rect.bottom().min(snap.scroll_y + snap.win_h) - layout_rect.y.max(snap.scroll_y)).max(0.0);
    overlap_w * overlap_h / (snap.win_w * snap.win_h)
}

fn baseline_properties() -> Outcome {
    let mut runner =
        TestRunner::new(PropConfig { cases: BASELINE_CASES, failure_persistence: None, ..PropConfig::default() });
    let result = runner.run(&snapshot_strategy(), |snap| {
        let b1 = window_share_all(&snap);
        let b2 = center_distance_all(&snap);
        let b3 = mouse_proximity_all(&snap);
        let any_visible = snap.messages.iter().any(|m| m.is_visible());
        for (m, &p) in snap.messages.iter().zip(&b1) {
            prop_assert_eq!(p, m.window_share);
        }
        let s2: f64 = b2.iter().sum();
        if any_visible {
            prop_assert!((s2 - 1.0).abs() < 1e-9, "baseline 2 sums to {}", s2);
        } else {
            prop_assert_eq!(s2, 0.0);
        }
        let s3: f64 = b3.iter().sum();
        prop_assert!(s3 == 0.0 || s3 == 1.0);
        prop_assert_eq!(s3 == 1.0, any_visible && snap.mouse.is_some());
        prop_assert!(b3.iter().zip(&snap.messages).all(|(&p, m)| p == 0.0 || m.is_visible()));
        for (row, ((&p1, &p2), &p3)) in all_baselines(&snap).iter().zip(b1.iter().zip(&b2).zip(&b3)) {
            prop_assert_eq!(*row, [p1, p2, p3]);
        }
        Ok(())
    });
    result.map_err(|e| e.to_string())?;

    // Baseline 1 against an independent clipping computation.
    let mut runner =
        TestRunner::new(PropConfig { cases: BASELINE_CASES, failure_persistence: None, ..PropConfig::default() });
    let geometry =
        (0.0..1500.0f64, 0.0..4000.0f64, 1.0..1200.0f64, 1.0..900.0f64, 0.0..4000.0f64, 200u32..2000, 200u32..1400);
    runner
        .run(&geometry, |(x, y, w, h, scroll, ww, wh)| {
            let rect = Rect::new(x, y, w, h);
            let layout = NewsletterLayout::new(
                "n".to_string(),
                rect.bottom(),
                vec![MessageGeometry { msg_id: "m".into(), rect, words: 1 }],
            )
            .unwrap();
            let snap = WindowSnapshot::compute(
                &layout,
                0,
                &ViewState { scroll_y: scroll, viewport: Some((ww, wh)), mouse: None },
            );
            let expected = independent_share(&snap, rect);
            prop_assert!((window_share_all(&snap)[0] - expected).abs() < 1e-12);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{BASELINE_CASES} random snapshots plus {BASELINE_CASES} clipping cases"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("oracle identity", oracle_identity),
        ("gradient correctness", gradient_correctness),
        ("metric fixture", metric_fixture),
        ("statistics fixture", statistics_fixture),
        ("baseline properties", baseline_properties),
        ("determinism", determinism),
        ("per_error ordering on the default corpus", ordering),
        ("pattern features help baseline NN", q3_mechanism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.1?}]", t0.elapsed()),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{:.1?}]", t0.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
