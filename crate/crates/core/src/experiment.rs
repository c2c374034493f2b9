//! Cross-validated evaluation of several estimators on one labeled corpus.
//!
//! Feature matrices are built once; every round trains each learned model on
//! the round's training sessions, early-stops on its validation sessions and
//! scores the held-out user's sessions.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::UserSessions;
use crate::error::{Error, Result};
use crate::estimators::{prediction_records, Estimator, EstimatorKind, PredictionRecord};
use crate::evaluation::{
    compute_metrics, estimates_from_predictions, make_cv_plan, paired_comparisons, ComparisonReport, CvPlan, CvRound,
    GroundTruth, MetricsReport, RoundMetrics, RoundTable,
};
use crate::features::{build_dataset, FeatureMatrix, Granularity, LabelSource, RowLabels};
use crate::neural::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub models: Vec<EstimatorKind>,
    pub rounds: usize,
    /// Seeds the validation split; round `r` trains with `train.seed + r`.
    pub seed: u64,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { models: EstimatorKind::ALL.to_vec(), rounds: 8, seed: 0, train: TrainConfig::default() }
    }
}

/// Labeled feature matrices and ground truth shared by every round.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub timestamp: FeatureMatrix,
    pub sessional: FeatureMatrix,
    pub truth: GroundTruth,
    pub user_sessions: Vec<(String, Vec<String>)>,
    ts_rows: HashMap<Arc<str>, Vec<usize>>,
    ss_rows: HashMap<Arc<str>, Vec<usize>>,
}

impl PreparedData {
    pub fn new(users: &[UserSessions<'_>]) -> Result<Self> {
        let timestamp = build_dataset(users, Granularity::PerTimestamp, LabelSource::Gaze)?;
        let sessional = build_dataset(users, Granularity::PerSession, LabelSource::Gaze)?;
        Self::from_parts(timestamp, sessional, GroundTruth::from_sessions(users)?)
    }

    /// Assembles prepared data from matrices and truth loaded elsewhere.
    pub fn from_parts(timestamp: FeatureMatrix, sessional: FeatureMatrix, truth: GroundTruth) -> Result<Self> {
        if timestamp.granularity != Granularity::PerTimestamp || sessional.granularity != Granularity::PerSession {
            return Err(Error::Config("matrices have the wrong granularity".into()));
        }
        let mut user_sessions: Vec<(String, Vec<String>)> = Vec::new();
        for s in &truth.sessions {
            match user_sessions.last_mut() {
                Some((u, list)) if *u == s.user_id => list.push(s.session_id.clone()),
                _ => user_sessions.push((s.user_id.clone(), vec![s.session_id.clone()])),
            }
        }
        let ts_rows = timestamp.rows_by_session();
        let ss_rows = sessional.rows_by_session();
        Ok(Self { timestamp, sessional, truth, user_sessions, ts_rows, ss_rows })
    }

    pub fn matrix(&self, granularity: Granularity) -> &FeatureMatrix {
        match granularity {
            Granularity::PerTimestamp => &self.timestamp,
            Granularity::PerSession => &self.sessional,
        }
    }

    /// Matrix rows of the listed sessions, in session order.
    pub fn rows(&self, granularity: Granularity, sessions: &[String]) -> Vec<usize> {
        let index = match granularity {
            Granularity::PerTimestamp => &self.ts_rows,
            Granularity::PerSession => &self.ss_rows,
        };
        sessions.iter().filter_map(|s| index.get(s.as_str())).flatten().copied().collect()
    }
}

/// Per-second records that use the gaze labels themselves as probabilities.
/// Aggregating them must reproduce the true reading times exactly.
pub fn oracle_records(matrix: &FeatureMatrix, rows: &[usize]) -> Result<Vec<PredictionRecord>> {
    let RowLabels::Gaze(g) = &matrix.labels else {
        return Err(Error::Label("oracle needs per-second gaze labels".into()));
    };
    let outputs: Vec<_> = rows.iter().map(|&r| crate::estimators::RowOutput::Probability(g[r])).collect();
    Ok(prediction_records(matrix, rows, &outputs))
}

/// Scores prediction records against the truth of the sessions they cover.
pub fn score_records(records: &[PredictionRecord], truth: &GroundTruth) -> Result<MetricsReport> {
    let estimates = estimates_from_predictions(records, truth)?;
    compute_metrics(&estimates, truth)
}

/// Builds one model for one round: heuristics need no data, learned kinds
/// train on the round's training sessions with seed `train.seed + round`.
pub fn train_round_model(
    data: &PreparedData,
    round: &CvRound,
    kind: EstimatorKind,
    train: &TrainConfig,
) -> Result<Estimator> {
    if kind.is_heuristic() {
        return Estimator::heuristic(kind);
    }
    let g = kind.granularity();
    let cfg = TrainConfig { seed: train.seed.wrapping_add(round.index as u64), ..*train };
    let tr = data.rows(g, &round.train_sessions);
    let va = data.rows(g, &round.validation_sessions);
    Estimator::build(kind, data.matrix(g), &tr, &va, &cfg)
}

/// Predictions of `estimator` on the round's test sessions, with their metrics.
pub fn evaluate_round_model(
    data: &PreparedData,
    round: &CvRound,
    estimator: &Estimator,
) -> Result<(Vec<PredictionRecord>, MetricsReport)> {
    let g = estimator.granularity;
    let matrix = data.matrix(g);
    let test = data.rows(g, &round.test_sessions);
    let outputs = estimator.predict_rows(matrix, &test)?;
    let records = prediction_records(matrix, &test, &outputs);
    let report = score_records(&records, &data.truth.subset(&round.test_sessions))?;
    Ok((records, report))
}

/// Trains (when needed) and scores one model on one round.
pub fn run_round_model(
    data: &PreparedData,
    round: &CvRound,
    kind: EstimatorKind,
    train: &TrainConfig,
) -> Result<(Estimator, MetricsReport)> {
    let estimator = train_round_model(data, round, kind, train)?;
    let (_, report) = evaluate_round_model(data, round, &estimator)?;
    Ok((estimator, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub plan: CvPlan,
    pub table: RoundTable,
    pub comparisons: ComparisonReport,
}

/// Runs the cross-validation. `progress` receives one line per finished
/// (round, model); rounds run in parallel on the current rayon pool.
pub fn run_experiment(
    data: &PreparedData,
    config: &ExperimentConfig,
    progress: &(dyn Fn(&str) + Sync),
) -> Result<ExperimentOutput> {
    config.train.validate()?;
    if config.models.is_empty() {
        return Err(Error::Config("no models to evaluate".into()));
    }
    let plan = make_cv_plan(&data.user_sessions, config.rounds, config.seed)?;
    let per_round: Vec<Vec<(EstimatorKind, RoundMetrics)>> = plan
        .rounds
        .par_iter()
        .map(|round| {
            config
                .models
                .iter()
                .map(|&kind| {
                    let (_, report) = run_round_model(data, round, kind, &config.train)?;
                    progress(&format!(
                        "round {} (test {}) {}: per_error {}",
                        round.index,
                        round.test_user,
                        kind.name(),
                        report.per_error.map_or("-".into(), |v| format!("{:.1}%", 100.0 * v))
                    ));
                    Ok((kind, RoundMetrics { round: round.index, test_user: round.test_user.clone(), report }))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut models: BTreeMap<EstimatorKind, Vec<RoundMetrics>> = BTreeMap::new();
    for (kind, rm) in per_round.into_iter().flatten() {
        models.entry(kind).or_default().push(rm);
    }
    let table = RoundTable { models };
    let comparisons = paired_comparisons(&table)?;
    Ok(ExperimentOutput { plan, table, comparisons })
}
