//! One function per subcommand. Every stage writes `resolved-config.toml`
//! into its output directory alongside its artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use rayon::prelude::*;
use readtime::corpus::{Corpus, Manifest};
use readtime::estimators::{write_predictions, Estimator, EstimatorKind};
use readtime::evaluation::{
    comparison_text, default_rounds, make_cv_plan, paired_comparisons, performance_text, CvPlan, GroundTruth, Metric,
    RoundMetrics, RoundTable,
};
use readtime::experiment::{evaluate_round_model, oracle_records, score_records, train_round_model, PreparedData};
use readtime::features::{build_dataset, FeatureMatrix, Granularity, LabelSource};
use readtime::simulator::{corpus_stats, generate_corpus};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{read_json, write_json, write_text};

const TIMESTAMP_FILE: &str = "timestamp.tsv";
const SESSIONAL_FILE: &str = "sessional.tsv";
const TRUTH_FILE: &str = "truth.json";
const FEATURES_META: &str = "features.json";
const PLAN_FILE: &str = "plan.json";
const MODELS_FILE: &str = "models.json";
const ROUNDS_FILE: &str = "rounds.json";
const ORACLE_FILE: &str = "oracle.json";

fn log(line: &str) {
    eprintln!("{line}");
}

fn load_corpus(dir: &Path) -> Result<(Corpus, Manifest)> {
    Corpus::load(dir).with_context(|| format!("loading corpus {}", dir.display()))
}

pub fn simulate(config: &RunConfig, out: &Path) -> Result<()> {
    let sim = &config.simulation;
    let output = generate_corpus(sim).context("invalid [simulation] section")?;
    let generator = serde_json::json!({ "simulator": sim });
    let notes: Vec<String> = output.archetypes.iter().map(|a| format!("archetype={a}")).collect();
    output.corpus.save(out, Some(generator), Some(&notes))?;
    let stats = corpus_stats(&output.corpus.sessionize()?)?;
    write_json(&out.join("stats.json"), &stats)?;
    config.write_resolved(out)?;
    log(&format!(
        "simulated {} users, {} sessions, {} datapoints into {}",
        stats.n_users,
        stats.n_sessions,
        stats.datapoints,
        out.display()
    ));
    Ok(())
}

pub fn ingest(config: &RunConfig, base: &Path, out: &Path) -> Result<()> {
    let mapping = config.ingest.as_ref().ok_or_else(|| anyhow!("the config has no [ingest] section"))?;
    let corpus = mapping.load(base)?;
    corpus.sessionize().context("ingested logs do not sessionize")?;
    let generator = serde_json::json!({ "ingest": mapping });
    corpus.save(out, Some(generator), None)?;
    config.write_resolved(out)?;
    log(&format!("ingested {} users into {}", corpus.users.len(), out.display()));
    Ok(())
}

/// Describes a feature directory.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeaturesMeta {
    corpus: PathBuf,
    labeled: bool,
    timestamp_schema: String,
    timestamp_rows: usize,
    sessional_schema: String,
    sessional_rows: usize,
}

fn write_matrix(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    m.write_tsv(&mut w).and_then(|_| w.flush()).with_context(|| format!("writing {}", path.display()))
}

fn read_matrix(path: &Path) -> Result<FeatureMatrix> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    FeatureMatrix::read_tsv(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

pub fn features(config: &RunConfig, corpus_dir: &Path, out: &Path) -> Result<()> {
    let (corpus, _) = load_corpus(corpus_dir)?;
    let users = corpus.sessionize()?;
    let labeled = corpus.has_labels();
    let source = if labeled { LabelSource::Gaze } else { LabelSource::None };
    let (ts, ss) = rayon::join(
        || build_dataset(&users, Granularity::PerTimestamp, source),
        || build_dataset(&users, Granularity::PerSession, source),
    );
    let (ts, ss) = (ts?, ss?);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_matrix(&out.join(TIMESTAMP_FILE), &ts)?;
    write_matrix(&out.join(SESSIONAL_FILE), &ss)?;
    if labeled {
        write_json(&out.join(TRUTH_FILE), &GroundTruth::from_sessions(&users)?)?;
    }
    let meta = FeaturesMeta {
        corpus: corpus_dir.to_path_buf(),
        labeled,
        timestamp_schema: ts.schema().into(),
        timestamp_rows: ts.n_rows(),
        sessional_schema: ss.schema().into(),
        sessional_rows: ss.n_rows(),
    };
    write_json(&out.join(FEATURES_META), &meta)?;
    config.write_resolved(out)?;
    log(&format!(
        "wrote {} timestamp rows and {} session rows to {}",
        meta.timestamp_rows,
        meta.sessional_rows,
        out.display()
    ));
    Ok(())
}

fn load_prepared(dir: &Path) -> Result<PreparedData> {
    let truth_path = dir.join(TRUTH_FILE);
    ensure!(truth_path.exists(), "{}: missing; training and evaluation need a labeled corpus", truth_path.display());
    let truth: GroundTruth = read_json(&truth_path)?;
    let ts = read_matrix(&dir.join(TIMESTAMP_FILE))?;
    let ss = read_matrix(&dir.join(SESSIONAL_FILE))?;
    PreparedData::from_parts(ts, ss, truth).with_context(|| format!("inconsistent features in {}", dir.display()))
}

/// Index of a model directory: which kinds were trained for which rounds.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelIndex {
    seed: u64,
    rounds: usize,
    kinds: Vec<EstimatorKind>,
    /// Relative checkpoint paths, `files[round][kind index]`.
    files: Vec<Vec<String>>,
}

fn checkpoint_path(round: usize, kind: EstimatorKind) -> String {
    format!("round-{round:02}/{}.json", kind.name())
}

pub fn train(config: &RunConfig, features_dir: &Path, out: &Path) -> Result<()> {
    let data = load_prepared(features_dir)?;
    let n_rounds = config.cv.rounds.unwrap_or_else(|| default_rounds(data.user_sessions.len()));
    let plan = make_cv_plan(&data.user_sessions, n_rounds, config.seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    write_json(&out.join(PLAN_FILE), &plan)?;
    let kinds = config.estimators.clone();
    plan.rounds.par_iter().try_for_each(|round| -> Result<()> {
        for &kind in &kinds {
            let est = train_round_model(&data, round, kind, &config.train)
                .with_context(|| format!("training {kind} for round {}", round.index))?;
            est.save(&out.join(checkpoint_path(round.index, kind)))?;
            log(&format!("round {} {kind}: trained", round.index));
        }
        Ok(())
    })?;
    let files = plan.rounds.iter().map(|r| kinds.iter().map(|&k| checkpoint_path(r.index, k)).collect()).collect();
    write_json(&out.join(MODELS_FILE), &ModelIndex { seed: config.seed, rounds: n_rounds, kinds, files })?;
    config.write_resolved(out)?;
    Ok(())
}

/// Ground-truth scores of the oracle on every round's test user.
#[derive(Debug, Serialize, Deserialize)]
struct OracleResults {
    rounds: Vec<RoundMetrics>,
}

pub fn evaluate(
    config: &RunConfig,
    features_dir: &Path,
    models_dir: &Path,
    out: &Path,
    oracle: bool,
    predictions: bool,
) -> Result<()> {
    let data = load_prepared(features_dir)?;
    let plan: CvPlan = read_json(&models_dir.join(PLAN_FILE))?;
    let index: ModelIndex = read_json(&models_dir.join(MODELS_FILE))?;
    ensure!(index.files.len() == plan.rounds.len(), "{}: round count disagrees with {PLAN_FILE}", models_dir.display());
    for round in &plan.rounds {
        if let Some(s) = round.test_sessions.iter().find(|s| !data.truth.sessions.iter().any(|t| &t.session_id == *s)) {
            bail!(
                "{}: session {s} of round {} is not in {}",
                models_dir.display(),
                round.index,
                features_dir.display()
            );
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let per_round: Vec<Vec<(EstimatorKind, RoundMetrics)>> = plan
        .rounds
        .par_iter()
        .zip(&index.files)
        .map(|(round, files)| {
            index
                .kinds
                .iter()
                .zip(files)
                .map(|(&kind, rel)| -> Result<_> {
                    let path = models_dir.join(rel);
                    let est = Estimator::load(&path).with_context(|| format!("loading {}", path.display()))?;
                    ensure!(est.kind == kind, "{}: holds {} but {MODELS_FILE} lists {kind}", path.display(), est.kind);
                    let (records, report) = evaluate_round_model(&data, round, &est)
                        .with_context(|| format!("evaluating {}", path.display()))?;
                    if predictions {
                        let p = out.join("predictions").join(rel.replace(".json", ".jsonl"));
                        let mut buf = Vec::new();
                        write_predictions(&mut buf, &records)?;
                        write_text(&p, std::str::from_utf8(&buf)?)?;
                    }
                    Ok((kind, RoundMetrics { round: round.index, test_user: round.test_user.clone(), report }))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut models: BTreeMap<EstimatorKind, Vec<RoundMetrics>> = BTreeMap::new();
    for (kind, rm) in per_round.into_iter().flatten() {
        models.entry(kind).or_default().push(rm);
    }
    let table = RoundTable { models };
    write_json(&out.join(ROUNDS_FILE), &table)?;
    if oracle {
        let rounds = plan
            .rounds
            .iter()
            .map(|round| -> Result<_> {
                let rows = data.rows(Granularity::PerTimestamp, &round.test_sessions);
                let records = oracle_records(&data.timestamp, &rows)?;
                let report = score_records(&records, &data.truth.subset(&round.test_sessions))?;
                Ok(RoundMetrics { round: round.index, test_user: round.test_user.clone(), report })
            })
            .collect::<Result<Vec<_>>>()?;
        let mean = |m: Metric| {
            let v: Vec<f64> = rounds.iter().filter_map(|r| m.value(&r.report)).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        log(&format!(
            "oracle: per_error {} accuracy {}",
            mean(Metric::PerError).map_or("\\".into(), |v| Metric::PerError.display(v)),
            mean(Metric::Accuracy).map_or("\\".into(), |v| Metric::Accuracy.display(v)),
        ));
        write_json(&out.join(ORACLE_FILE), &OracleResults { rounds })?;
    }
    write_text(&out.join("performance.txt"), &performance_text(&table))?;
    config.write_resolved(out)?;
    log(&format!("evaluated {} rounds into {}", plan.rounds.len(), out.display()));
    Ok(())
}

pub fn compare(config: &RunConfig, evaluation: &Path, out: &Path) -> Result<()> {
    let table: RoundTable = read_json(&evaluation.join(ROUNDS_FILE))?;
    let report = paired_comparisons(&table)?;
    write_json(&out.join("comparison.json"), &report)?;
    write_text(&out.join("comparison.txt"), &comparison_text(&report))?;
    write_text(&out.join("performance.txt"), &performance_text(&table))?;
    if out != evaluation {
        config.write_resolved(out)?;
    }
    print!("{}", comparison_text(&report));
    Ok(())
}

pub fn report(evaluation: &Path) -> Result<()> {
    let table: RoundTable = read_json(&evaluation.join(ROUNDS_FILE))?;
    let mut text = String::new();
    let rounds = table.models.values().map(Vec::len).max().unwrap_or(0);
    writeln!(text, "{} models over {rounds} rounds ({})", table.models.len(), evaluation.display())?;
    writeln!(text, "\nMean metrics per model\n")?;
    text.push_str(&performance_text(&table));
    let comparison = evaluation.join("comparison.txt");
    if comparison.exists() {
        writeln!(text, "\nPaired comparisons (Holm-Sidak adjusted p; * at 0.05, . at 0.10)\n")?;
        text.push_str(&fs::read_to_string(&comparison).with_context(|| format!("reading {}", comparison.display()))?);
    } else {
        writeln!(text, "\nNo comparison.txt yet; run `readtime compare` for paired tests.")?;
    }
    let oracle = evaluation.join(ORACLE_FILE);
    if oracle.exists() {
        let o: OracleResults = read_json(&oracle)?;
        let exact =
            o.rounds.iter().all(|r| r.report.per_error.is_none_or(|v| v == 0.0) && r.report.accuracy == Some(1.0));
        writeln!(text, "\nOracle check over {} rounds: {}", o.rounds.len(), if exact { "exact" } else { "MISMATCH" })?;
    }
    write_text(&evaluation.join("report.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn schema_text() -> String {
    let mut out = String::new();
    for g in [Granularity::PerTimestamp, Granularity::PerSession] {
        writeln!(out, "{}", g.schema()).unwrap();
        for (i, c) in g.columns().iter().enumerate() {
            writeln!(out, "  {i:>2}  {c}").unwrap();
        }
    }
    out
}
