//! Simulates the default corpus and runs a short cross-validation.
//! Usage: cargo run --release -p readtime --example cv_run -- [rounds] [seed]
//!
//! `SIM` may hold a partial simulator config as JSON, `MODELS` a comma list
//! of estimator kinds and `MIX=tracks_parked` restricts readers to an even
//! tracks-gaze/parked mixture.

use std::time::Instant;

use readtime::evaluation::{comparison_text, performance_text};
use readtime::experiment::{oracle_records, run_experiment, score_records, ExperimentConfig, PreparedData};
use readtime::simulator::{corpus_stats, generate_corpus, MixtureEntry, ReaderArchetype, SimConfig};

fn main() -> readtime::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let rounds = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);
    let t0 = Instant::now();
    let base: SimConfig = match std::env::var("SIM") {
        Ok(json) => serde_json::from_str(&json).expect("SIM must be a SimConfig JSON object"),
        Err(_) => SimConfig::default(),
    };
    let mut sim_cfg = SimConfig { seed, ..base };
    if std::env::var("MIX").as_deref() == Ok("tracks_parked") {
        sim_cfg.mixture = vec![
            MixtureEntry { archetype: ReaderArchetype::tracks_gaze(80.0, 0.8), weight: 0.5 },
            MixtureEntry { archetype: ReaderArchetype::parked(), weight: 0.5 },
        ];
    }
    let sim = generate_corpus(&sim_cfg)?;
    let users = sim.corpus.sessionize()?;
    let stats = corpus_stats(&users)?;
    println!("{stats:?}\narchetypes {:?}", sim.archetypes);
    let data = PreparedData::new(&users)?;
    println!("prepared in {:?}", t0.elapsed());
    let all: Vec<usize> = (0..data.timestamp.n_rows()).collect();
    let oracle = score_records(&oracle_records(&data.timestamp, &all)?, &data.truth)?;
    println!("oracle per_error {:?} accuracy {:?}", oracle.per_error, oracle.accuracy);
    let mut cfg = ExperimentConfig { rounds, ..ExperimentConfig::default() };
    if let Ok(list) = std::env::var("MODELS") {
        cfg.models =
            list.split(',').map(readtime::estimators::EstimatorKind::parse).collect::<readtime::Result<_>>()?;
    }
    let t1 = Instant::now();
    let out = run_experiment(&data, &cfg, &|line| eprintln!("[{:?}] {line}", t1.elapsed()))?;
    println!("{}", performance_text(&out.table));
    println!("{}", comparison_text(&out.comparisons));
    Ok(())
}
