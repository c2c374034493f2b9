//! The ten estimator configurations behind one build/predict interface.
//!
//! Each kind fixes which feature blocks it reads, its network shape and its
//! output contract. Heuristic kinds read the baseline columns of the
//! per-timestamp matrix, so their values are the baselines module's outputs.

use std::io::{BufRead, Write};
use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::ReadLevel;
use crate::baselines::TimestampPrediction;
use crate::error::{Error, Result};
use crate::features::{
    FeatureMatrix, Granularity, RowLabels, SessionalFeatures, Standardizer, TimestampFeatures, SS_BASELINE, SS_MESSAGE,
    SS_PATTERN, TS_BASELINE, TS_MESSAGE, TS_PATTERN, TS_USER,
};
use crate::neural::{
    train, Activation, DenseNet, Inputs, Loss, Matrix, Model, TargetData, TrainConfig, TrainSet, TrainTrace,
    TwoTowerNet,
};

pub const CHECKPOINT_FORMAT: &str = "readtime-estimator/v1";

const HIDDEN: usize = 32;
const TOWER_OUT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Baseline1,
    Baseline2,
    Baseline3,
    Logistic,
    BaselineNn,
    PatternBaselineNn,
    Nn,
    PatternNn,
    PatternSessionalNn,
    PatternCategoryNn,
}

/// Column indices feeding tower A (or the single network) and tower B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Routing {
    pub a: Vec<usize>,
    pub b: Option<Vec<usize>>,
}

fn cols(ranges: &[Range<usize>]) -> Vec<usize> {
    ranges.iter().flat_map(|r| r.clone()).collect()
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 10] = [
        EstimatorKind::Baseline1,
        EstimatorKind::Baseline2,
        EstimatorKind::Baseline3,
        EstimatorKind::Logistic,
        EstimatorKind::BaselineNn,
        EstimatorKind::PatternBaselineNn,
        EstimatorKind::Nn,
        EstimatorKind::PatternNn,
        EstimatorKind::PatternSessionalNn,
        EstimatorKind::PatternCategoryNn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Baseline1 => "baseline1",
            EstimatorKind::Baseline2 => "baseline2",
            EstimatorKind::Baseline3 => "baseline3",
            EstimatorKind::Logistic => "logistic",
            EstimatorKind::BaselineNn => "baseline_nn",
            EstimatorKind::PatternBaselineNn => "pattern_baseline_nn",
            EstimatorKind::Nn => "nn",
            EstimatorKind::PatternNn => "pattern_nn",
            EstimatorKind::PatternSessionalNn => "pattern_sessional_nn",
            EstimatorKind::PatternCategoryNn => "pattern_category_nn",
        }
    }

    /// Label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            EstimatorKind::Baseline1 => "Baseline1",
            EstimatorKind::Baseline2 => "Baseline2",
            EstimatorKind::Baseline3 => "Baseline3",
            EstimatorKind::Logistic => "Logistic",
            EstimatorKind::BaselineNn => "Baseline NN",
            EstimatorKind::PatternBaselineNn => "Pattern+ Baseline NN",
            EstimatorKind::Nn => "NN",
            EstimatorKind::PatternNn => "Pattern+ NN",
            EstimatorKind::PatternSessionalNn => "Pattern+ Sessional NN",
            EstimatorKind::PatternCategoryNn => "Pattern+ Category NN",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown estimator kind '{s}'")))
    }

    pub fn granularity(self) -> Granularity {
        match self {
            EstimatorKind::PatternSessionalNn | EstimatorKind::PatternCategoryNn => Granularity::PerSession,
            _ => Granularity::PerTimestamp,
        }
    }

    pub fn is_heuristic(self) -> bool {
        matches!(self, EstimatorKind::Baseline1 | EstimatorKind::Baseline2 | EstimatorKind::Baseline3)
    }

    /// Whether the kind yields a reading-time estimate (the category model does not).
    pub fn estimates_time(self) -> bool {
        self != EstimatorKind::PatternCategoryNn
    }

    pub fn routing(self) -> Routing {
        use EstimatorKind::*;
        let ts_base = |k: usize| Routing { a: vec![TS_BASELINE.start + k], b: None };
        match self {
            Baseline1 => ts_base(0),
            Baseline2 => ts_base(1),
            Baseline3 => ts_base(2),
            Logistic | Nn => Routing { a: cols(&[TS_MESSAGE, TS_USER]), b: None },
            PatternNn => Routing { a: cols(&[TS_MESSAGE, TS_USER]), b: Some(cols(&[TS_PATTERN])) },
            BaselineNn => Routing { a: cols(&[TS_BASELINE]), b: None },
            PatternBaselineNn => Routing { a: cols(&[TS_BASELINE]), b: Some(cols(&[TS_PATTERN])) },
            PatternSessionalNn | PatternCategoryNn => {
                Routing { a: cols(&[SS_MESSAGE, SS_BASELINE]), b: Some(cols(&[SS_PATTERN])) }
            }
        }
    }

    fn loss(self) -> Option<Loss> {
        match self {
            k if k.is_heuristic() => None,
            EstimatorKind::PatternSessionalNn => Some(Loss::AbsoluteError),
            EstimatorKind::PatternCategoryNn => Some(Loss::CrossEntropy),
            _ => Some(Loss::WeightedBce),
        }
    }

    /// Freshly initialized network for this kind.
    pub fn init_model(self, seed: u64) -> Result<Option<Model>> {
        let routing = self.routing();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = [(HIDDEN, Activation::Relu), (HIDDEN, Activation::Relu)];
        let single = |out: (usize, Activation), rng: &mut ChaCha8Rng| -> Result<Model> {
            Ok(Model::Single(DenseNet::new(routing.a.len(), &[hidden[0], hidden[1], out], rng)?))
        };
        let two_tower = |head: (usize, Activation), rng: &mut ChaCha8Rng| -> Result<Model> {
            // Tower A is linear at its output and tower B ends in a sigmoid, so
            // the merge scales each message/user unit by a pattern-driven gate.
            let a = DenseNet::new(routing.a.len(), &[hidden[0], hidden[1], (TOWER_OUT, Activation::Identity)], rng)?;
            let b_in = routing.b.as_ref().map_or(0, Vec::len);
            let b = DenseNet::new(b_in, &[hidden[0], hidden[1], (TOWER_OUT, Activation::Sigmoid)], rng)?;
            let h = DenseNet::new(TOWER_OUT, &[head], rng)?;
            Ok(Model::TwoTower(TwoTowerNet::new(a, b, h)?))
        };
        Ok(Some(match self {
            k if k.is_heuristic() => return Ok(None),
            EstimatorKind::Logistic => {
                Model::Single(DenseNet::new(routing.a.len(), &[(1, Activation::Sigmoid)], &mut rng)?)
            }
            EstimatorKind::Nn | EstimatorKind::BaselineNn => single((1, Activation::Sigmoid), &mut rng)?,
            EstimatorKind::PatternNn | EstimatorKind::PatternBaselineNn => {
                two_tower((1, Activation::Sigmoid), &mut rng)?
            }
            EstimatorKind::PatternSessionalNn => two_tower((1, Activation::Relu), &mut rng)?,
            EstimatorKind::PatternCategoryNn => two_tower((3, Activation::Softmax), &mut rng)?,
            _ => unreachable!(),
        }))
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters and preprocessing of a trained network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub model: Model,
    pub standardizer_a: Standardizer,
    pub standardizer_b: Option<Standardizer>,
    /// Regression targets are divided by this during training.
    pub target_scale: f64,
    pub train_config: TrainConfig,
    pub trace: TrainTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    pub format: String,
    pub kind: EstimatorKind,
    pub schema: String,
    pub granularity: Granularity,
    pub trained: Option<TrainedModel>,
}

/// Output for one feature row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowOutput {
    Probability(f64),
    Time(f64),
    Classes([f64; 3]),
}

impl RowOutput {
    pub fn predicted_level(&self) -> Option<ReadLevel> {
        match self {
            RowOutput::Classes(p) => Some(ReadLevel::argmax(p)),
            _ => None,
        }
    }
}

fn check_rows(matrix: &FeatureMatrix, rows: &[usize], what: &str) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config(format!("no {what} rows")));
    }
    if rows.iter().any(|&r| r >= matrix.n_rows()) {
        return Err(Error::Config(format!("{what} row index out of range")));
    }
    Ok(())
}

fn standardized(matrix: &FeatureMatrix, rows: &[usize], columns: &[usize], s: &Standardizer) -> Matrix {
    let mut data = Vec::with_capacity(rows.len() * columns.len());
    for &r in rows {
        let row = matrix.row(r);
        s.transform_into(columns.iter().map(|&c| row[c]), &mut data);
    }
    Matrix { rows: rows.len(), cols: columns.len(), data }
}

impl Estimator {
    /// A parameterless heuristic estimator.
    pub fn heuristic(kind: EstimatorKind) -> Result<Self> {
        if !kind.is_heuristic() {
            return Err(Error::Config(format!("{kind} needs training")));
        }
        Ok(Self {
            format: CHECKPOINT_FORMAT.into(),
            kind,
            schema: kind.granularity().schema().into(),
            granularity: kind.granularity(),
            trained: None,
        })
    }

    /// Builds an estimator. Heuristic kinds ignore the data; the others train
    /// on `train_rows` with early stopping on `val_rows`. Standardization
    /// statistics come from the training rows only.
    pub fn build(
        kind: EstimatorKind,
        matrix: &FeatureMatrix,
        train_rows: &[usize],
        val_rows: &[usize],
        config: &TrainConfig,
    ) -> Result<Self> {
        if kind.is_heuristic() {
            return Self::heuristic(kind);
        }
        if matrix.granularity != kind.granularity() {
            return Err(Error::Config(format!(
                "{kind} needs {} features, got {}",
                kind.granularity().schema(),
                matrix.schema()
            )));
        }
        check_rows(matrix, train_rows, "training")?;
        check_rows(matrix, val_rows, "validation")?;
        let routing = kind.routing();
        let loss = kind.loss().expect("trained kinds have a loss");
        let std_a = Standardizer::fit(matrix, train_rows, &routing.a)?;
        let std_b = routing.b.as_ref().map(|b| Standardizer::fit(matrix, train_rows, b)).transpose()?;

        let target_scale = match (&matrix.labels, loss) {
            (RowLabels::Session { time, .. }, Loss::AbsoluteError) => {
                let mean = train_rows.iter().map(|&r| time[r]).sum::<f64>() / train_rows.len() as f64;
                if mean > 0.0 {
                    mean
                } else {
                    1.0
                }
            }
            _ => 1.0,
        };
        let targets = |rows: &[usize]| -> Result<TargetData> {
            Ok(match (&matrix.labels, loss) {
                (RowLabels::Gaze(g), Loss::WeightedBce) => TargetData::Binary(rows.iter().map(|&r| g[r]).collect()),
                (RowLabels::Session { time, .. }, Loss::AbsoluteError) => {
                    TargetData::Real(rows.iter().map(|&r| time[r] / target_scale).collect())
                }
                (RowLabels::Session { level, .. }, Loss::CrossEntropy) => {
                    TargetData::Class(rows.iter().map(|&r| level[r].index()).collect())
                }
                _ => return Err(Error::Config(format!("{kind} cannot train on the matrix's labels"))),
            })
        };
        let make_set = |rows: &[usize]| -> Result<TrainSet> {
            Ok(TrainSet {
                a: standardized(matrix, rows, &routing.a, &std_a),
                b: routing.b.as_ref().map(|b| standardized(matrix, rows, b, std_b.as_ref().unwrap())),
                targets: targets(rows)?,
            })
        };
        let train_set = make_set(train_rows)?;
        let val_set = make_set(val_rows)?;
        let init = kind.init_model(config.seed)?.expect("trained kinds have a network");
        let (model, trace) = train(&init, loss, &train_set, &val_set, config)?;
        Ok(Self {
            format: CHECKPOINT_FORMAT.into(),
            kind,
            schema: kind.granularity().schema().into(),
            granularity: kind.granularity(),
            trained: Some(TrainedModel {
                model,
                standardizer_a: std_a,
                standardizer_b: std_b,
                target_scale,
                train_config: *config,
                trace,
            }),
        })
    }

    pub fn n_trainable_params(&self) -> usize {
        self.trained.as_ref().map_or(0, |t| t.model.n_params())
    }

    fn check_schema(&self, schema: &str) -> Result<()> {
        if schema != self.schema {
            return Err(Error::Schema { expected: self.schema.clone(), found: schema.to_string() });
        }
        Ok(())
    }

    /// Predicts the given rows of a feature matrix. Rows are processed in
    /// fixed-size chunks; each output depends only on its own row.
    pub fn predict_rows(&self, matrix: &FeatureMatrix, rows: &[usize]) -> Result<Vec<RowOutput>> {
        self.check_schema(matrix.schema())?;
        let Some(trained) = &self.trained else {
            let col = self.kind.routing().a[0];
            return Ok(rows.iter().map(|&r| RowOutput::Probability(matrix.row(r)[col])).collect());
        };
        const CHUNK: usize = 4096;
        let routing = self.kind.routing();
        let mut out = Vec::with_capacity(rows.len());
        for chunk in rows.chunks(CHUNK) {
            let a = standardized(matrix, chunk, &routing.a, &trained.standardizer_a);
            let b = match (&routing.b, &trained.standardizer_b) {
                (Some(cols), Some(s)) => Some(standardized(matrix, chunk, cols, s)),
                _ => None,
            };
            let y = trained.model.forward(Inputs { a: &a, b: b.as_ref() })?;
            for i in 0..y.rows {
                out.push(match self.kind {
                    EstimatorKind::PatternSessionalNn => RowOutput::Time(y.row(i)[0] * trained.target_scale),
                    EstimatorKind::PatternCategoryNn => {
                        let r = y.row(i);
                        RowOutput::Classes([r[0], r[1], r[2]])
                    }
                    _ => RowOutput::Probability(y.row(i)[0]),
                });
            }
        }
        Ok(out)
    }

    fn predict_vector(&self, values: Vec<f64>) -> Result<RowOutput> {
        let matrix = FeatureMatrix {
            granularity: self.granularity,
            columns: self.granularity.columns().iter().map(|s| s.to_string()).collect(),
            keys: vec![crate::features::RowKey {
                user_id: "".into(),
                session_id: "".into(),
                msg_id: "".into(),
                words: 1,
                t: None,
            }],
            values,
            labels: RowLabels::None,
        };
        Ok(self.predict_rows(&matrix, &[0])?[0])
    }

    pub fn predict_timestamp(&self, features: &TimestampFeatures) -> Result<TimestampPrediction> {
        if self.granularity != Granularity::PerTimestamp {
            return Err(Error::Config(format!("{} makes per-session predictions", self.kind)));
        }
        match self.predict_vector(features.to_vec())? {
            RowOutput::Probability(p) => Ok(TimestampPrediction { msg_id: features.msg_id.clone(), t: features.t, p }),
            _ => unreachable!("per-timestamp kinds output probabilities"),
        }
    }

    pub fn predict_session(&self, features: &SessionalFeatures) -> Result<RowOutput> {
        if self.granularity != Granularity::PerSession {
            return Err(Error::Config(format!("{} makes per-timestamp predictions", self.kind)));
        }
        self.predict_vector(features.to_vec())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimators serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let e: Self =
            serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        if e.format != CHECKPOINT_FORMAT {
            return Err(Error::Schema { expected: CHECKPOINT_FORMAT.into(), found: e.format });
        }
        Ok(e)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::corpus::write_file(path, self.to_json().as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// One line of a prediction dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionRecord {
    pub user_id: String,
    pub session_id: String,
    pub msg_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub t: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub class_probs: Option<[f64; 3]>,
}

/// Prediction records for the given rows, in row order.
pub fn prediction_records(matrix: &FeatureMatrix, rows: &[usize], outputs: &[RowOutput]) -> Vec<PredictionRecord> {
    rows.iter()
        .zip(outputs)
        .map(|(&r, out)| {
            let k = &matrix.keys[r];
            let mut rec = PredictionRecord {
                user_id: k.user_id.to_string(),
                session_id: k.session_id.to_string(),
                msg_id: k.msg_id.to_string(),
                t: k.t,
                p: None,
                time: None,
                class_probs: None,
            };
            match *out {
                RowOutput::Probability(p) => rec.p = Some(p),
                RowOutput::Time(t) => rec.time = Some(t),
                RowOutput::Classes(c) => rec.class_probs = Some(c),
            }
            rec
        })
        .collect()
}

pub fn write_predictions<W: Write>(mut out: W, records: &[PredictionRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}
