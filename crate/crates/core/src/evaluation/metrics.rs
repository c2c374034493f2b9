//! Reading-time error and read-level classification metrics.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::aggregation::{classify_read_level, reading_time, ReadLevel};
use crate::corpus::UserSessions;
use crate::error::{Error, Result};
use crate::estimators::PredictionRecord;

/// True reading times below this are scored by absolute error, the rest by
/// percentage error.
pub const PER_ERROR_MIN_SECS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageTruth {
    pub msg_id: String,
    pub words: u32,
    pub time: f64,
    pub level: ReadLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub session_id: String,
    pub user_id: String,
    pub start_sec: i64,
    pub end_sec: i64,
    pub messages: Vec<MessageTruth>,
}

/// Ground truth for every (session, message) of a labeled corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sessions: Vec<SessionTruth>,
}

impl GroundTruth {
    pub fn from_sessions(users: &[UserSessions<'_>]) -> Result<Self> {
        let mut sessions = Vec::new();
        for u in users {
            for s in &u.sessions {
                let secs = s
                    .true_reading_seconds()
                    .ok_or_else(|| Error::Label(format!("session {} has no gaze labels", s.session_id)))?;
                let messages = s
                    .layout
                    .messages
                    .iter()
                    .zip(secs)
                    .map(|(m, n)| {
                        let time = f64::from(n);
                        Ok(MessageTruth {
                            msg_id: m.msg_id.clone(),
                            words: m.words,
                            time,
                            level: classify_read_level(time, m.words)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                sessions.push(SessionTruth {
                    session_id: s.session_id.clone(),
                    user_id: u.log.user_id.clone(),
                    start_sec: s.start_sec,
                    end_sec: s.end_sec,
                    messages,
                });
            }
        }
        Ok(Self { sessions })
    }

    /// Restriction to the listed sessions, in the original order.
    pub fn subset(&self, session_ids: &[String]) -> Self {
        let keep: std::collections::HashSet<&str> = session_ids.iter().map(String::as_str).collect();
        Self { sessions: self.sessions.iter().filter(|s| keep.contains(s.session_id.as_str())).cloned().collect() }
    }

    pub fn n_messages(&self) -> usize {
        self.sessions.iter().map(|s| s.messages.len()).sum()
    }
}

/// An estimator's output for one (session, message).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageEstimate {
    pub session_id: String,
    pub msg_id: String,
    /// Absent for estimators that only classify.
    pub time: Option<f64>,
    pub level: ReadLevel,
}

/// Turns a prediction dump into per-(session, message) estimates. Per-second
/// probabilities must cover every second of their session.
pub fn estimates_from_predictions(records: &[PredictionRecord], truth: &GroundTruth) -> Result<Vec<MessageEstimate>> {
    let mut sessions: HashMap<&str, (&SessionTruth, HashMap<&str, &MessageTruth>)> = HashMap::new();
    for s in &truth.sessions {
        let msgs = s.messages.iter().map(|m| (m.msg_id.as_str(), m)).collect();
        sessions.insert(s.session_id.as_str(), (s, msgs));
    }
    let mut per_second: BTreeMap<(&str, &str), Vec<(i64, f64)>> = BTreeMap::new();
    let mut out = Vec::new();
    for r in records {
        let (session, msgs) = sessions
            .get(r.session_id.as_str())
            .ok_or_else(|| Error::Join(format!("prediction for unknown session {}", r.session_id)))?;
        let msg = msgs
            .get(r.msg_id.as_str())
            .ok_or_else(|| Error::Join(format!("prediction for unknown message {} in {}", r.msg_id, r.session_id)))?;
        match (r.t, r.p, r.time, r.class_probs) {
            (Some(t), Some(p), None, None) => {
                per_second.entry((session.session_id.as_str(), msg.msg_id.as_str())).or_default().push((t, p))
            }
            (None, None, Some(time), None) => {
                if !(time >= 0.0) {
                    return Err(Error::Domain(format!("negative time estimate {time}")));
                }
                out.push(MessageEstimate {
                    session_id: r.session_id.clone(),
                    msg_id: r.msg_id.clone(),
                    time: Some(time),
                    level: classify_read_level(time, msg.words)?,
                })
            }
            (None, None, None, Some(c)) => out.push(MessageEstimate {
                session_id: r.session_id.clone(),
                msg_id: r.msg_id.clone(),
                time: None,
                level: ReadLevel::argmax(&c),
            }),
            _ => {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("prediction for {}/{} mixes output fields", r.session_id, r.msg_id),
                })
            }
        }
    }
    for ((sid, mid), probs) in per_second {
        let (session, msgs) = &sessions[sid];
        let time = reading_time(&probs, session.start_sec, session.end_sec)?;
        out.push(MessageEstimate {
            session_id: sid.to_string(),
            msg_id: mid.to_string(),
            time: Some(time),
            level: classify_read_level(time, msgs[mid].words)?,
        });
    }
    Ok(out)
}

/// Metrics of one estimator on one test set. Rates are fractions in [0, 1];
/// cells with a zero denominator are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n_messages: usize,
    pub per_error: Option<f64>,
    pub per_error_count: usize,
    pub abs_error: Option<f64>,
    pub abs_error_count: usize,
    pub accuracy: Option<f64>,
    pub skim_precision: Option<f64>,
    pub skim_recall: Option<f64>,
    pub detail_precision: Option<f64>,
    pub detail_recall: Option<f64>,
    pub read_precision: Option<f64>,
    pub read_recall: Option<f64>,
    /// `confusion[true][estimated]` in skip, skim, detail order.
    pub confusion: [[usize; 3]; 3],
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Joins estimates to truth by (session, message) and computes every metric.
pub fn compute_metrics(estimates: &[MessageEstimate], truth: &GroundTruth) -> Result<MetricsReport> {
    let mut by_key: HashMap<(&str, &str), &MessageEstimate> = HashMap::with_capacity(estimates.len());
    for e in estimates {
        if by_key.insert((e.session_id.as_str(), e.msg_id.as_str()), e).is_some() {
            return Err(Error::Join(format!("duplicate estimate for {}/{}", e.session_id, e.msg_id)));
        }
    }
    let n = truth.n_messages();
    if by_key.len() != n {
        return Err(Error::Join(format!("{} estimates for {n} messages", by_key.len())));
    }
    let mut per_sum = 0.0;
    let mut per_n = 0;
    let mut abs_sum = 0.0;
    let mut abs_n = 0;
    let mut confusion = [[0usize; 3]; 3];
    for s in &truth.sessions {
        for m in &s.messages {
            let e = by_key
                .get(&(s.session_id.as_str(), m.msg_id.as_str()))
                .ok_or_else(|| Error::Join(format!("no estimate for {}/{}", s.session_id, m.msg_id)))?;
            if let Some(est) = e.time {
                let err = (m.time - est).abs();
                if m.time >= PER_ERROR_MIN_SECS {
                    per_sum += err / m.time;
                    per_n += 1;
                } else {
                    abs_sum += err;
                    abs_n += 1;
                }
            }
            confusion[m.level.index()][e.level.index()] += 1;
        }
    }
    let has_time = estimates.iter().any(|e| e.time.is_some());
    if has_time && estimates.iter().any(|e| e.time.is_none()) {
        return Err(Error::Join("estimates mix timed and untimed messages".into()));
    }
    let (skip, skim, detail) = (0, 1, 2);
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    let est_count = |c: usize| (0..3).map(|t| confusion[t][c]).sum::<usize>();
    let true_count = |c: usize| confusion[c].iter().sum::<usize>();
    let read_hits =
        confusion[skim][skim] + confusion[skim][detail] + confusion[detail][skim] + confusion[detail][detail];
    let est_read = n - est_count(skip);
    let true_read = n - true_count(skip);
    Ok(MetricsReport {
        n_messages: n,
        per_error: (has_time && per_n > 0).then(|| per_sum / per_n as f64),
        per_error_count: if has_time { per_n } else { 0 },
        abs_error: (has_time && abs_n > 0).then(|| abs_sum / abs_n as f64),
        abs_error_count: if has_time { abs_n } else { 0 },
        accuracy: ratio(correct, n),
        skim_precision: ratio(confusion[skim][skim], est_count(skim)),
        skim_recall: ratio(confusion[skim][skim], true_count(skim)),
        detail_precision: ratio(confusion[detail][detail], est_count(detail)),
        detail_recall: ratio(confusion[detail][detail], true_count(detail)),
        read_precision: ratio(read_hits, est_read),
        read_recall: ratio(read_hits, true_read),
        confusion,
    })
}

/// The metrics reported per model and compared between models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PerError,
    AbsError,
    Accuracy,
    SkimPrecision,
    SkimRecall,
    DetailPrecision,
    DetailRecall,
    ReadPrecision,
    ReadRecall,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::PerError,
        Metric::AbsError,
        Metric::Accuracy,
        Metric::SkimPrecision,
        Metric::SkimRecall,
        Metric::DetailPrecision,
        Metric::DetailRecall,
        Metric::ReadPrecision,
        Metric::ReadRecall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PerError => "per_error",
            Metric::AbsError => "abs_error",
            Metric::Accuracy => "accuracy",
            Metric::SkimPrecision => "skim_precision",
            Metric::SkimRecall => "skim_recall",
            Metric::DetailPrecision => "detail_precision",
            Metric::DetailRecall => "detail_recall",
            Metric::ReadPrecision => "read_precision",
            Metric::ReadRecall => "read_recall",
        }
    }

    pub fn value(self, r: &MetricsReport) -> Option<f64> {
        match self {
            Metric::PerError => r.per_error,
            Metric::AbsError => r.abs_error,
            Metric::Accuracy => r.accuracy,
            Metric::SkimPrecision => r.skim_precision,
            Metric::SkimRecall => r.skim_recall,
            Metric::DetailPrecision => r.detail_precision,
            Metric::DetailRecall => r.detail_recall,
            Metric::ReadPrecision => r.read_precision,
            Metric::ReadRecall => r.read_recall,
        }
    }

    /// Seconds for abs_error, percent otherwise.
    pub fn display(self, v: f64) -> String {
        match self {
            Metric::AbsError => format!("{v:.1}"),
            _ => format!("{:.0}", v * 100.0),
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Metric::AbsError => "s",
            _ => "%",
        }
    }
}
