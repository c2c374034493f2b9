//! Behavioral checks on the synthetic corpus generator.

use readtime::baselines::closest_to_mouse;
use readtime::corpus::Corpus;
use readtime::features::pattern::UserHistory;
use readtime::simulator::{corpus_stats, generate_corpus, MixtureEntry, ReaderArchetype, SimConfig, SimOutput};

fn only(archetype: ReaderArchetype, seed: u64) -> SimConfig {
    SimConfig { mixture: vec![MixtureEntry { archetype, weight: 1.0 }], seed, ..SimConfig::default() }
}

fn generate(config: &SimConfig) -> SimOutput {
    generate_corpus(config).expect("valid simulator config")
}

/// With noiseless, always-following mouse motion the nearest-to-mouse
/// heuristic recovers the gazed message almost everywhere.
#[test]
fn noiseless_tracking_mouse_marks_the_gazed_message() {
    let out = generate(&only(ReaderArchetype::tracks_gaze(0.0, 1.0), 4));
    let users = out.corpus.sessionize().unwrap();
    let (mut agree, mut total) = (0usize, 0usize);
    for u in &users {
        for s in &u.sessions {
            let labels = s.labels.as_ref().unwrap();
            for (snap, label) in s.snapshots().iter().zip(labels) {
                let Some(gazed) = *label else { continue };
                total += 1;
                agree += usize::from(closest_to_mouse(snap) == Some(gazed));
            }
        }
    }
    assert!(total > 1000, "too few labeled seconds: {total}");
    let rate = agree as f64 / total as f64;
    assert!(rate >= 0.99, "agreement {rate:.4} over {total} seconds");
}

#[test]
fn gazed_messages_are_on_screen() {
    let out = generate(&SimConfig { n_users: 4, ..SimConfig::default() });
    for u in out.corpus.sessionize().unwrap() {
        for s in &u.sessions {
            for (snap, label) in s.snapshots().iter().zip(s.labels.as_ref().unwrap()) {
                if let Some(m) = *label {
                    assert!(snap.messages[m].window_share > 0.0, "{} t={} msg {m} off screen", s.session_id, snap.t);
                }
            }
        }
    }
}

fn saved_bytes(out: &SimOutput) -> Vec<(String, Vec<u8>)> {
    let dir = tempfile::tempdir().unwrap();
    out.corpus.save(dir.path(), None, None).unwrap();
    let mut files: Vec<_> = walk(dir.path())
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p.strip_prefix(dir.path()).unwrap().display().to_string(), bytes)
        })
        .collect();
    files.sort();
    files
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn output_is_a_function_of_the_seed() {
    let small = |seed| SimConfig { n_users: 3, newsletters_per_user: 3, seed, ..SimConfig::default() };
    let a = saved_bytes(&generate(&small(8)));
    assert_eq!(a, saved_bytes(&generate(&small(8))));
    assert_ne!(a, saved_bytes(&generate(&small(9))));
}

fn mean_move_frequency(corpus: &Corpus) -> f64 {
    let users = corpus.sessionize().unwrap();
    let (mut sum, mut n) = (0.0, 0usize);
    for u in &users {
        let history = UserHistory::new(&u.log.events, &u.sessions);
        for s in &u.sessions {
            for t in s.seconds() {
                let p = history.pattern_at(t, &s.newsletter_id, s.layout.len());
                sum += p.move_h.iter().chain(&p.move_v).sum::<f64>() / 8.0;
                n += 1;
            }
        }
    }
    sum / n as f64
}

/// Mouse-tracking readers and readers who park the mouse leave clearly
/// different movement histories, which the pattern features expose.
#[test]
fn archetypes_differ_in_movement_frequency() {
    let base = |a| SimConfig { n_users: 3, ..only(a, 5) };
    let tracking = mean_move_frequency(&generate(&base(ReaderArchetype::tracks_gaze(80.0, 0.8))).corpus);
    let parked = mean_move_frequency(&generate(&base(ReaderArchetype::parked())).corpus);
    assert!(tracking - parked > 0.3, "tracking {tracking:.3} vs parked {parked:.3}");
}

#[test]
fn default_corpus_has_every_read_level_and_expected_size() {
    for seed in [1, 2] {
        let out = generate(&SimConfig { seed, ..SimConfig::default() });
        let stats = corpus_stats(&out.corpus.sessionize().unwrap()).unwrap();
        let total: usize = stats.level_counts.iter().sum();
        for (level, &count) in stats.level_counts.iter().enumerate() {
            assert!(count as f64 >= 0.10 * total as f64, "seed {seed}: level {level} has {count} of {total}");
        }
        assert!((150_000..=200_000).contains(&stats.datapoints), "seed {seed}: {} datapoints", stats.datapoints);
        assert_eq!(stats.positives, stats.gazed_seconds);
    }
}

#[test]
fn empty_corpus_has_zero_stats() {
    let stats = corpus_stats(&[]).unwrap();
    assert_eq!((stats.n_users, stats.n_sessions, stats.datapoints, stats.positives), (0, 0, 0, 0));
    assert_eq!(stats.level_counts, [0; 3]);
    assert_eq!(stats.positive_rate, None);
}

/// Each labeled second names at most one message, so positives are exactly
/// the gazed seconds and the rate is their share of all (message, second) rows.
#[test]
fn positive_rate_matches_gazed_seconds_over_messages() {
    let out = generate(&SimConfig { n_users: 3, ..SimConfig::default() });
    let users = out.corpus.sessionize().unwrap();
    let expected: f64 = users
        .iter()
        .flat_map(|u| &u.sessions)
        .map(|s| s.labels.as_ref().unwrap().iter().filter(|l| l.is_some()).count() as f64)
        .sum::<f64>()
        / users.iter().flat_map(|u| &u.sessions).map(|s| (s.len_secs() * s.layout.len()) as f64).sum::<f64>();
    let stats = corpus_stats(&users).unwrap();
    assert!((stats.positive_rate.unwrap() - expected).abs() < 1e-12);
}
