//! Feature matrices: one row per (message, second) or per (message, session),
//! with row keys for split bookkeeping and a tab-separated on-disk form.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pattern::UserHistory;
use super::sessional::session_sessional_features;
use super::temporary::session_timestamp_features;
use super::{SESSIONAL_COLUMNS, SESSIONAL_SCHEMA, TIMESTAMP_COLUMNS, TIMESTAMP_SCHEMA};
use crate::aggregation::{classify_read_level, ReadLevel};
use crate::corpus::UserSessions;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    PerTimestamp,
    PerSession,
}

impl Granularity {
    pub fn schema(self) -> &'static str {
        match self {
            Granularity::PerTimestamp => TIMESTAMP_SCHEMA,
            Granularity::PerSession => SESSIONAL_SCHEMA,
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Granularity::PerTimestamp => &TIMESTAMP_COLUMNS,
            Granularity::PerSession => &SESSIONAL_COLUMNS,
        }
    }
}

/// Where row labels come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSource {
    /// Per-second gaze labels attached to the sessions.
    Gaze,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowKey {
    pub user_id: Arc<str>,
    pub session_id: Arc<str>,
    pub msg_id: Arc<str>,
    pub words: u32,
    /// Second for per-timestamp rows.
    pub t: Option<i64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowLabels {
    None,
    /// 1.0 when the message was gazed at that second.
    Gaze(Vec<f64>),
    Session {
        time: Vec<f64>,
        level: Vec<ReadLevel>,
    },
}

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub granularity: Granularity,
    pub columns: Vec<String>,
    pub keys: Vec<RowKey>,
    pub values: Vec<f64>,
    pub labels: RowLabels,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.keys.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn schema(&self) -> &'static str {
        self.granularity.schema()
    }

    pub fn gaze_labels(&self) -> Option<&[f64]> {
        match &self.labels {
            RowLabels::Gaze(v) => Some(v),
            _ => None,
        }
    }

    /// Row indices grouped by session id, preserving row order.
    pub fn rows_by_session(&self) -> HashMap<Arc<str>, Vec<usize>> {
        let mut out: HashMap<Arc<str>, Vec<usize>> = HashMap::new();
        for (i, k) in self.keys.iter().enumerate() {
            out.entry(k.session_id.clone()).or_default().push(i);
        }
        out
    }

    /// Tab-separated form: a `#schema=` line, a header, then one row per line.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "#schema={}", self.schema())?;
        let mut header = String::from("user_id\tsession_id\tmsg_id\twords");
        if self.granularity == Granularity::PerTimestamp {
            header.push_str("\tt");
        }
        match self.labels {
            RowLabels::None => {}
            RowLabels::Gaze(_) => header.push_str("\tlabel_gaze"),
            RowLabels::Session { .. } => header.push_str("\tlabel_time\tlabel_level"),
        }
        for c in &self.columns {
            header.push('\t');
            header.push_str(c);
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for (i, k) in self.keys.iter().enumerate() {
            line.clear();
            write!(line, "{}\t{}\t{}\t{}", k.user_id, k.session_id, k.msg_id, k.words).unwrap();
            if let Some(t) = k.t {
                write!(line, "\t{t}").unwrap();
            }
            match &self.labels {
                RowLabels::None => {}
                RowLabels::Gaze(g) => write!(line, "\t{}", g[i]).unwrap(),
                RowLabels::Session { time, level } => write!(line, "\t{}\t{}", time[i], level[i].name()).unwrap(),
            }
            for v in self.row(i) {
                write!(line, "\t{v}").unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse { line: i + 1, message: e.to_string() }),
                None => Err(Error::Parse { line: 0, message: format!("missing {what}") }),
            }
        };
        let (_, schema_line) = next("schema line")?;
        let schema = schema_line
            .strip_prefix("#schema=")
            .ok_or_else(|| Error::Parse { line: 1, message: "expected #schema= line".into() })?;
        let granularity = match schema {
            TIMESTAMP_SCHEMA => Granularity::PerTimestamp,
            SESSIONAL_SCHEMA => Granularity::PerSession,
            other => {
                return Err(Error::Schema {
                    expected: format!("{TIMESTAMP_SCHEMA} or {SESSIONAL_SCHEMA}"),
                    found: other.to_string(),
                })
            }
        };
        let (_, header) = next("header")?;
        let cols: Vec<&str> = header.split('\t').collect();
        let mut pos = 4;
        if cols.len() < 4 || cols[..4] != ["user_id", "session_id", "msg_id", "words"] {
            return Err(Error::Parse { line: 2, message: "unexpected key columns".into() });
        }
        let has_t = granularity == Granularity::PerTimestamp;
        if has_t {
            if cols.get(pos) != Some(&"t") {
                return Err(Error::Parse { line: 2, message: "missing t column".into() });
            }
            pos += 1;
        }
        let label_kind = match cols.get(pos) {
            Some(&"label_gaze") => {
                pos += 1;
                1
            }
            Some(&"label_time") => {
                pos += 2;
                2
            }
            _ => 0,
        };
        let columns: Vec<String> = cols[pos..].iter().map(|s| s.to_string()).collect();
        let expected = granularity.columns();
        if columns.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::Schema { expected: expected.join(","), found: columns.join(",") });
        }

        let mut keys = Vec::new();
        let mut values = Vec::new();
        let mut gaze = Vec::new();
        let mut time = Vec::new();
        let mut level = Vec::new();
        let mut interned: HashMap<String, Arc<str>> = HashMap::new();
        let mut intern = |s: &str| interned.entry(s.to_string()).or_insert_with(|| Arc::from(s)).clone();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != pos + columns.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields", pos + columns.len()),
                });
            }
            let bad = |m: &str| Error::Parse { line: line_no, message: m.to_string() };
            let words: u32 = fields[3].parse().map_err(|_| bad("bad words"))?;
            let t = if has_t { Some(fields[4].parse::<i64>().map_err(|_| bad("bad t"))?) } else { None };
            let off = if has_t { 5 } else { 4 };
            match label_kind {
                1 => gaze.push(fields[off].parse::<f64>().map_err(|_| bad("bad label"))?),
                2 => {
                    time.push(fields[off].parse::<f64>().map_err(|_| bad("bad label_time"))?);
                    level.push(match fields[off + 1] {
                        "skip" => ReadLevel::Skip,
                        "skim" => ReadLevel::Skim,
                        "detail" => ReadLevel::Detail,
                        _ => return Err(bad("bad label_level")),
                    });
                }
                _ => {}
            }
            for f in &fields[pos..] {
                let v: f64 = f.parse().map_err(|_| bad("bad feature value"))?;
                if !v.is_finite() {
                    return Err(bad("non-finite feature value"));
                }
                values.push(v);
            }
            keys.push(RowKey {
                user_id: intern(fields[0]),
                session_id: intern(fields[1]),
                msg_id: intern(fields[2]),
                words,
                t,
            });
        }
        let labels = match label_kind {
            1 => RowLabels::Gaze(gaze),
            2 => RowLabels::Session { time, level },
            _ => RowLabels::None,
        };
        Ok(FeatureMatrix { granularity, columns, keys, values, labels })
    }
}

/// Per-column z-scoring with statistics from a chosen subset of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant columns store 1.
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(matrix: &FeatureMatrix, rows: &[usize], columns: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("cannot fit standardization on zero rows".into()));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; columns.len()];
        for &r in rows {
            let row = matrix.row(r);
            for (m, &c) in mean.iter_mut().zip(columns) {
                *m += row[c];
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; columns.len()];
        for &r in rows {
            let row = matrix.row(r);
            for ((v, &c), m) in var.iter_mut().zip(columns).zip(&mean) {
                let d = row[c] - m;
                *v += d * d;
            }
        }
        let sd = var.into_iter().map(|v| (v / n).sqrt()).map(|s| if s > 1e-12 { s } else { 1.0 }).collect();
        Ok(Self { mean, sd })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Standardizes `raw` (already restricted to the fitted columns) into `out`.
    pub fn transform_into(&self, raw: impl IntoIterator<Item = f64>, out: &mut Vec<f64>) {
        out.extend(raw.into_iter().zip(self.mean.iter().zip(&self.sd)).map(|(v, (m, s))| (v - m) / s));
    }
}

struct UserRows {
    keys: Vec<RowKey>,
    values: Vec<f64>,
    gaze: Vec<f64>,
    time: Vec<f64>,
    level: Vec<ReadLevel>,
}

fn user_rows(user: &UserSessions<'_>, granularity: Granularity, labels: LabelSource) -> Result<UserRows> {
    let history = UserHistory::new(&user.log.events, &user.sessions);
    let user_id: Arc<str> = Arc::from(user.log.user_id.as_str());
    let mut out =
        UserRows { keys: Vec::new(), values: Vec::new(), gaze: Vec::new(), time: Vec::new(), level: Vec::new() };
    for session in &user.sessions {
        let session_id: Arc<str> = Arc::from(session.session_id.as_str());
        let msg_ids: Vec<Arc<str>> = session.layout.messages.iter().map(|m| Arc::from(m.msg_id.as_str())).collect();
        let session_labels = match labels {
            LabelSource::Gaze => Some(
                session
                    .labels
                    .as_ref()
                    .ok_or_else(|| Error::Label(format!("session {} has no gaze labels", session.session_id)))?,
            ),
            LabelSource::None => None,
        };
        match granularity {
            Granularity::PerTimestamp => {
                for (offset, per_msg) in session_timestamp_features(session, &history).into_iter().enumerate() {
                    let t = session.start_sec + offset as i64;
                    for (i, f) in per_msg.iter().enumerate() {
                        out.keys.push(RowKey {
                            user_id: user_id.clone(),
                            session_id: session_id.clone(),
                            msg_id: msg_ids[i].clone(),
                            words: session.layout.messages[i].words,
                            t: Some(t),
                        });
                        f.extend_into(&mut out.values);
                        if let Some(l) = session_labels {
                            out.gaze.push(if l[offset] == Some(i) { 1.0 } else { 0.0 });
                        }
                    }
                }
            }
            Granularity::PerSession => {
                let truth = session.true_reading_seconds();
                for (i, f) in session_sessional_features(session, &history).into_iter().enumerate() {
                    let words = session.layout.messages[i].words;
                    out.keys.push(RowKey {
                        user_id: user_id.clone(),
                        session_id: session_id.clone(),
                        msg_id: msg_ids[i].clone(),
                        words,
                        t: None,
                    });
                    out.values.extend(f.to_vec());
                    if session_labels.is_some() {
                        let secs = f64::from(truth.as_ref().expect("labels checked above")[i]);
                        out.time.push(secs);
                        out.level.push(classify_read_level(secs, words)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Builds the feature matrix for a sessionized corpus. Rows are ordered by
/// user, session, second and message, so equal inputs give identical output.
pub fn build_dataset(
    users: &[UserSessions<'_>],
    granularity: Granularity,
    labels: LabelSource,
) -> Result<FeatureMatrix> {
    let parts: Vec<UserRows> =
        users.par_iter().map(|u| user_rows(u, granularity, labels)).collect::<Result<Vec<_>>>()?;
    let mut keys = Vec::new();
    let mut values = Vec::new();
    let mut gaze = Vec::new();
    let mut time = Vec::new();
    let mut level = Vec::new();
    for p in parts {
        keys.extend(p.keys);
        values.extend(p.values);
        gaze.extend(p.gaze);
        time.extend(p.time);
        level.extend(p.level);
    }
    let columns: Vec<String> = granularity.columns().iter().map(|s| s.to_string()).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        let row = i / columns.len();
        return Err(Error::Numeric(format!(
            "non-finite value in column {} for session {} message {}",
            columns[i % columns.len()],
            keys[row].session_id,
            keys[row].msg_id
        )));
    }
    let labels = match (labels, granularity) {
        (LabelSource::None, _) => RowLabels::None,
        (LabelSource::Gaze, Granularity::PerTimestamp) => RowLabels::Gaze(gaze),
        (LabelSource::Gaze, Granularity::PerSession) => RowLabels::Session { time, level },
    };
    Ok(FeatureMatrix { granularity, columns, keys, values, labels })
}
