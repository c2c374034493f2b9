//! Property tests over randomly generated logs, layouts and numbers.

use proptest::prelude::*;
use readtime::aggregation::{classify_read_level, reading_time};
use readtime::baselines::all_baselines;
use readtime::estimators::{Estimator, EstimatorKind, RowOutput};
use readtime::evaluation::{holm_sidak, make_cv_plan};
use readtime::event::{
    event_log_to_string, parse_event_str, sessionize, EventKind, InteractionEvent, LayoutSet, MessageGeometry,
    NewsletterLayout, ViewState, WindowSnapshot,
};
use readtime::experiment::{train_round_model, PreparedData};
use readtime::features::temporary::session_timestamp_features;
use readtime::features::{session_sessional_features, UserHistory};
use readtime::geometry::{Point, Rect};
use readtime::neural::{Activation, DenseNet, Inputs, LayerShape, Matrix, Model, TrainConfig};
use readtime::simulator::{generate_corpus, SimConfig};

const DOC_HEIGHT: f64 = 3000.0;

/// Six stacked messages in a single column.
fn stacked_layout() -> NewsletterLayout {
    let messages = (0..6)
        .map(|i| MessageGeometry {
            msg_id: format!("m{i}"),
            rect: Rect::new(100.0, 50.0 + 450.0 * i as f64, 700.0, 400.0),
            words: 40 + 20 * i as u32,
        })
        .collect();
    NewsletterLayout::new("nl", DOC_HEIGHT, messages).unwrap()
}

fn layouts() -> LayoutSet {
    let mut set = LayoutSet::new();
    set.insert(stacked_layout()).unwrap();
    set
}

fn action() -> impl Strategy<Value = EventKind> {
    let coord = (0.0..1400.0f64, 0.0..DOC_HEIGHT);
    prop_oneof![
        6 => coord.clone().prop_map(|(x, y)| EventKind::Move { x, y }),
        3 => (0.0..2000.0f64).prop_map(|scroll_y| EventKind::Scroll { scroll_y }),
        1 => (coord, prop::option::of(0..6usize))
            .prop_map(|((x, y), m)| EventKind::Click { x, y, msg_id: m.map(|i| format!("m{i}")) }),
        1 => (400u32..2000, 300u32..1200).prop_map(|(win_w, win_h)| EventKind::Viewport { win_w, win_h }),
        1 => any::<bool>().prop_map(|visible| EventKind::Visibility { visible }),
    ]
}

prop_compose! {
    /// An open, a run of interactions and a close, with non-decreasing times.
    fn reading_log()(start in 0.0..5.0f64, steps in prop::collection::vec((0.0..1.5f64, action()), 1..80))
        -> Vec<InteractionEvent>
    {
        let mut t = start;
        let mut events = vec![InteractionEvent::new(t, EventKind::Open { newsletter_id: "nl".into() })];
        for (dt, kind) in steps {
            t += dt;
            events.push(InteractionEvent::new(t, kind));
        }
        events.push(InteractionEvent::new(t + 0.5, EventKind::Close));
        events
    }
}

type SnapshotParts = (Vec<(f64, f64, f64, f64)>, f64, Option<(u32, u32)>, Option<(f64, f64)>);

fn snapshot_parts() -> impl Strategy<Value = SnapshotParts> {
    (
        prop::collection::vec((0.0..1500.0f64, 0.0..4000.0f64, 1.0..1200.0f64, 1.0..900.0f64), 1..10),
        0.0..4000.0f64,
        prop::option::of((200u32..2000, 200u32..1400)),
        prop::option::of((-200.0..2200.0f64, -200.0..6000.0f64)),
    )
}

fn snapshot(
    rects: &[(f64, f64, f64, f64)],
    dy: f64,
    scroll: f64,
    viewport: Option<(u32, u32)>,
    mouse: Option<(f64, f64)>,
) -> WindowSnapshot {
    let messages: Vec<MessageGeometry> = rects
        .iter()
        .enumerate()
        .map(|(i, &(x, y, w, h))| MessageGeometry {
            msg_id: format!("m{i}"),
            rect: Rect::new(x, y + dy, w, h),
            words: 10,
        })
        .collect();
    let doc = messages.iter().map(|m| m.rect.bottom()).fold(0.0, f64::max);
    let layout = NewsletterLayout::new("n", doc, messages).unwrap();
    let state = ViewState { scroll_y: scroll + dy, viewport, mouse: mouse.map(|(x, y)| Point::new(x, y + dy)) };
    WindowSnapshot::compute(&layout, 0, &state)
}

proptest! {
    #[test]
    fn event_log_round_trips(events in reading_log()) {
        let text = event_log_to_string(&events);
        let parsed = parse_event_str(&text).unwrap();
        prop_assert_eq!(&parsed, &events);
        prop_assert_eq!(event_log_to_string(&parsed), text);
    }

    #[test]
    fn disjoint_messages_share_at_most_the_window(
        heights in prop::collection::vec((10.0..600.0f64, 0.0..80.0f64, 0.0..900.0f64, 50.0..900.0f64), 1..15),
        scroll in 0.0..5000.0f64,
        viewport in prop::option::of((200u32..2500, 200u32..1600)),
    ) {
        let mut y = 0.0;
        let mut messages = Vec::new();
        for (i, &(h, gap, x, w)) in heights.iter().enumerate() {
            y += gap;
            messages.push(MessageGeometry { msg_id: format!("m{i}"), rect: Rect::new(x, y, w, h), words: 5 });
            y += h;
        }
        let layout = NewsletterLayout::new("n", y, messages).unwrap();
        prop_assert!(layout.is_disjoint());
        let snap = WindowSnapshot::compute(&layout, 0, &ViewState { scroll_y: scroll, viewport, mouse: None });
        let total: f64 = snap.messages.iter().map(|m| m.window_share).sum();
        prop_assert!(total <= 1.0 + 1e-9, "total share {}", total);
        for m in &snap.messages {
            prop_assert_eq!(m.window_share == 0.0, m.visible_rect.is_empty());
        }
    }

    #[test]
    fn baselines_ignore_a_common_vertical_shift(
        (rects, scroll, viewport, mouse) in snapshot_parts(),
        dy in 0.0..3000.0f64,
    ) {
        let a = all_baselines(&snapshot(&rects, 0.0, scroll, viewport, mouse));
        let b = all_baselines(&snapshot(&rects, dy, scroll, viewport, mouse));
        for (pa, pb) in a.iter().zip(&b) {
            for k in 0..3 {
                prop_assert!((pa[k] - pb[k]).abs() <= 1e-9, "baseline {} moved: {} vs {}", k + 1, pa[k], pb[k]);
            }
        }
    }

    #[test]
    fn more_time_never_lowers_the_read_level(words in 1u32..2000, a in 0.0..1000.0f64, b in 0.0..1000.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(classify_read_level(lo, words).unwrap().index() <= classify_read_level(hi, words).unwrap().index());
    }

    #[test]
    fn holm_sidak_is_bounded_and_order_preserving(p in prop::collection::vec(0.0..=1.0f64, 1..12)) {
        let adj = holm_sidak(&p);
        prop_assert_eq!(adj.len(), p.len());
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
        for w in order.windows(2) {
            prop_assert!(adj[w[0]] <= adj[w[1]]);
        }
        for (raw, a) in p.iter().zip(&adj) {
            prop_assert!(*a >= *raw && *a <= 1.0);
        }
    }

    #[test]
    fn reading_time_is_the_sum_in_any_order(
        start in -100i64..100,
        probs in prop::collection::vec(0.0..=1.0f64, 1..60),
        rotation in 0usize..60,
    ) {
        let mut pairs: Vec<(i64, f64)> = probs.iter().enumerate().map(|(i, &p)| (start + i as i64, p)).collect();
        let n = pairs.len();
        pairs.rotate_left(rotation % n);
        let total = reading_time(&pairs, start, start + probs.len() as i64).unwrap();
        prop_assert!((total - probs.iter().sum::<f64>()).abs() < 1e-9);
        prop_assert!(total <= probs.len() as f64);
    }

    #[test]
    fn sweep_matches_point_snapshots(events in reading_log()) {
        for s in sessionize("u", &events, &layouts()).unwrap() {
            for snap in s.snapshots() {
                let point = s.snapshot_at(snap.t).unwrap();
                prop_assert_eq!(&point, &snap);
                prop_assert_eq!(&s.snapshot_at(snap.t).unwrap(), &point);
            }
        }
    }

    #[test]
    fn events_belong_to_at_most_one_session(events in reading_log()) {
        let sessions = sessionize("u", &events, &layouts()).unwrap();
        let mut cursor = 0;
        for s in &sessions {
            prop_assert!(s.end_sec > s.start_sec);
            // Sessions take disjoint, ordered spans of the input log.
            for e in &s.events {
                let pos = events[cursor..].iter().position(|x| x == e).map(|p| p + cursor);
                prop_assert!(pos.is_some(), "event {:?} not found after position {}", e, cursor);
                cursor = pos.unwrap() + 1;
            }
        }
        for pair in sessions.windows(2) {
            prop_assert!(pair[0].end_sec <= pair[1].start_sec);
        }
    }

    #[test]
    fn timestamp_and_sessional_extractors_agree(events in reading_log()) {
        let sessions = sessionize("u", &events, &layouts()).unwrap();
        let history = UserHistory::new(&events, &sessions);
        for s in &sessions {
            let per_second = session_timestamp_features(s, &history);
            let sessional = session_sessional_features(s, &history);
            for (m, summary) in sessional.iter().enumerate() {
                let mean = per_second.iter().map(|row| row[m].message.window_share).sum::<f64>() / per_second.len() as f64;
                prop_assert!((mean - summary.avg_window_share).abs() <= 1e-9);
                prop_assert!(summary.secs_visible as usize <= s.len_secs());
                let b1: f64 = per_second.iter().map(|row| row[m].baseline.p[0]).sum();
                prop_assert!((b1 - summary.baseline_time[0]).abs() <= 1e-9);
            }
            for f in per_second.iter().flatten() {
                prop_assert!(f.to_vec().iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn dropping_moves_never_raises_move_frequency(events in reading_log(), keep in prop::collection::vec(any::<bool>(), 80)) {
        let mut i = 0;
        let thinned: Vec<InteractionEvent> = events
            .iter()
            .filter(|e| {
                if !matches!(e.kind, EventKind::Move { .. }) {
                    return true;
                }
                i += 1;
                keep[(i - 1) % keep.len()]
            })
            .cloned()
            .collect();
        let sessions = sessionize("u", &events, &layouts()).unwrap();
        let full = UserHistory::new(&events, &sessions);
        let thin = UserHistory::new(&thinned, &sessionize("u", &thinned, &layouts()).unwrap());
        for s in &sessions {
            for t in s.seconds() {
                let a = full.pattern_at(t, "nl", 6);
                let b = thin.pattern_at(t, "nl", 6);
                for k in 0..4 {
                    prop_assert!(b.move_h[k] <= a.move_h[k] && b.move_v[k] <= a.move_v[k], "t={} window {}", t, k);
                    prop_assert_eq!(b.scroll[k], a.scroll[k]);
                }
            }
        }
    }

    #[test]
    fn cv_rounds_hold_out_the_test_user(
        sizes in prop::collection::vec(1usize..20, 2..10),
        rounds in 1usize..30,
        seed in any::<u64>(),
    ) {
        let users: Vec<(String, Vec<String>)> = sizes
            .iter()
            .enumerate()
            .map(|(u, &n)| (format!("u{u}"), (0..n).map(|s| format!("u{u}/s{s}")).collect()))
            .collect();
        let plan = make_cv_plan(&users, rounds, seed).unwrap();
        prop_assert_eq!(plan.rounds.len(), rounds);
        for r in &plan.rounds {
            let prefix = format!("{}/", r.test_user);
            prop_assert!(r.train_sessions.iter().chain(&r.validation_sessions).all(|s| !s.starts_with(&prefix)));
            let expected: usize = users.iter().filter(|(u, _)| *u != r.test_user).map(|(_, s)| s.len().div_ceil(8)).sum();
            prop_assert_eq!(r.validation_sessions.len(), expected);
            let others: usize = users.iter().filter(|(u, _)| *u != r.test_user).map(|(_, s)| s.len()).sum();
            prop_assert_eq!(r.train_sessions.len() + r.validation_sessions.len(), others);
        }
    }

    #[test]
    fn category_head_outputs_a_distribution(seed in 0u64..50, values in prop::collection::vec(-50.0..50.0f64, 64)) {
        let model = EstimatorKind::PatternCategoryNn.init_model(seed).unwrap().unwrap();
        let (da, db) = model.input_dims();
        let fill = |cols: usize| Matrix::from_vec(2, cols, (0..2 * cols).map(|i| values[i % values.len()]).collect()).unwrap();
        let a = fill(da);
        let b = db.map(fill);
        let out = model.forward(Inputs { a: &a, b: b.as_ref() }).unwrap();
        for i in 0..out.rows {
            let row = out.row(i);
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            prop_assert!(row.iter().all(|&p| (0.0..=1.0).contains(&p)));
        }
    }
}

/// Fixed weights for a 3-2-3 relu/softmax network; expected outputs were
/// computed independently with NumPy.
const TINY_CHECKPOINT: &str = r#"{"type":"single","layers":[
    {"input":3,"output":2,"activation":"relu"},{"input":2,"output":3,"activation":"softmax"}],
    "params":[0.5,-0.25,0.75,0.1,-0.3,0.6,0.05,-0.1,1.2,-0.4,0.3,-0.7,0.9,0.2,0.1,0.0,-0.2]}"#;

#[test]
fn tiny_checkpoint_reproduces_pinned_outputs() {
    let model: Model = serde_json::from_str(TINY_CHECKPOINT).unwrap();
    let x = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![0.3, 0.8, -1.5], vec![-0.5, 1.0, 1.0]]).unwrap();
    let out = model.forward(Inputs { a: &x, b: None }).unwrap();
    let expected = [
        [0.37797814098160176, 0.3420087651598244, 0.28001309385857376],
        [0.7336946140467598, 0.0898456218646163, 0.17645976408862393],
        [0.245653336014236, 0.4752881914406303, 0.2790584725451338],
    ];
    for (i, want) in expected.iter().enumerate() {
        for (got, want) in out.row(i).iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "row {i}: {got} vs {want}");
        }
    }
}

#[test]
fn relu_head_clamps_negative_time_to_zero() {
    let layer = LayerShape { input: 2, output: 1, activation: Activation::Relu };
    let net = DenseNet { layers: vec![layer], params: vec![0.5, 0.25, -10.0] };
    let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![-3.0, 4.0]]).unwrap();
    assert_eq!(net.forward(&x).unwrap().data, vec![0.0, 0.0]);
}

/// A trained checkpoint written to disk and read back predicts bit-identically.
#[test]
fn checkpoints_round_trip_bit_exactly() {
    let sim =
        generate_corpus(&SimConfig { n_users: 3, newsletters_per_user: 3, seed: 7, ..SimConfig::default() }).unwrap();
    let users = sim.corpus.sessionize().unwrap();
    let data = PreparedData::new(&users).unwrap();
    let plan = make_cv_plan(&data.user_sessions, 1, 0).unwrap();
    let round = &plan.rounds[0];
    let config = TrainConfig { max_epochs: 2, ..TrainConfig::default() };
    let dir = tempfile::tempdir().unwrap();
    for kind in [EstimatorKind::Logistic, EstimatorKind::PatternNn, EstimatorKind::PatternCategoryNn] {
        let estimator = train_round_model(&data, round, kind, &config).unwrap();
        let path = dir.path().join(format!("{}.json", kind.name()));
        estimator.save(&path).unwrap();
        let loaded = Estimator::load(&path).unwrap();
        assert_eq!(loaded, estimator);
        let g = kind.granularity();
        let rows = data.rows(g, &round.test_sessions);
        let before = estimator.predict_rows(data.matrix(g), &rows).unwrap();
        let after = loaded.predict_rows(data.matrix(g), &rows).unwrap();
        let bits = |v: &[RowOutput]| -> Vec<u64> {
            v.iter()
                .flat_map(|o| match *o {
                    RowOutput::Probability(p) | RowOutput::Time(p) => vec![p.to_bits()],
                    RowOutput::Classes(c) => c.iter().map(|x| x.to_bits()).collect(),
                })
                .collect()
        };
        assert_eq!(bits(&before), bits(&after), "{kind}");
    }
}
