//! Per-session summaries for (message, session) pairs.

use std::collections::HashSet;

use super::pattern::UserHistory;
use super::temporary::POSITION_SENTINEL;
use crate::baselines;
use crate::error::Result;
use crate::event::{EventKind, ReadingSession, WindowSnapshot};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionalPattern {
    pub avg_move_h: f64,
    pub avg_move_v: f64,
    pub avg_scroll: f64,
    pub clicked_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionalFeatures {
    pub msg_id: String,
    pub session_id: String,
    pub avg_window_share: f64,
    /// Mean position over the seconds the message was visible; sentinel when never visible.
    pub avg_position_on_window: f64,
    pub clicked: f64,
    pub secs_visible: u32,
    pub pattern: SessionalPattern,
    /// Per-session reading-time estimates of the three baselines.
    pub baseline_time: [f64; 3],
}

impl SessionalFeatures {
    /// Values in [`super::SESSIONAL_COLUMNS`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        let p = &self.pattern;
        vec![
            self.avg_window_share,
            self.avg_position_on_window,
            self.clicked,
            f64::from(self.secs_visible),
            self.baseline_time[0],
            self.baseline_time[1],
            self.baseline_time[2],
            p.avg_move_h,
            p.avg_move_v,
            p.avg_scroll,
            p.clicked_fraction,
        ]
    }
}

fn session_pattern(session: &ReadingSession, history: &UserHistory) -> SessionalPattern {
    let len = session.len_secs() as f64;
    let (h, v, s) = history.occupancy(session.start_sec, session.end_sec);
    let clicked: HashSet<&str> = session
        .events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Click { msg_id: Some(id), .. } if session.layout.index_of(id).is_ok() => Some(id.as_str()),
            _ => None,
        })
        .collect();
    SessionalPattern {
        avg_move_h: f64::from(h) / len,
        avg_move_v: f64::from(v) / len,
        avg_scroll: f64::from(s) / len,
        clicked_fraction: clicked.len() as f64 / session.layout.len() as f64,
    }
}

fn summarize(
    session: &ReadingSession,
    snaps: &[WindowSnapshot],
    baseline_time: &[[f64; 3]],
    pattern: SessionalPattern,
    index: usize,
) -> SessionalFeatures {
    let msg_id = &session.layout.messages[index].msg_id;
    let n = snaps.len() as f64;
    let mut share_sum = 0.0;
    let mut pos_sum = 0.0;
    let mut visible = 0u32;
    for snap in snaps {
        let view = &snap.messages[index];
        share_sum += view.window_share;
        if let Some(c) = view.center_offset {
            pos_sum += c;
            visible += 1;
        }
    }
    let clicked =
        session.events.iter().any(|e| matches!(&e.kind, EventKind::Click { msg_id: Some(id), .. } if id == msg_id));
    SessionalFeatures {
        msg_id: msg_id.clone(),
        session_id: session.session_id.clone(),
        avg_window_share: share_sum / n,
        avg_position_on_window: if visible > 0 { pos_sum / f64::from(visible) } else { POSITION_SENTINEL },
        clicked: if clicked { 1.0 } else { 0.0 },
        secs_visible: visible,
        pattern,
        baseline_time: baseline_time[index],
    }
}

fn baseline_times(session: &ReadingSession, snaps: &[WindowSnapshot]) -> Vec<[f64; 3]> {
    let mut totals = vec![[0.0; 3]; session.layout.len()];
    for snap in snaps {
        for (tot, p) in totals.iter_mut().zip(baselines::all_baselines(snap)) {
            for k in 0..3 {
                tot[k] += p[k];
            }
        }
    }
    totals
}

pub fn sessional_features(session: &ReadingSession, history: &UserHistory, msg_id: &str) -> Result<SessionalFeatures> {
    let index = session.layout.index_of(msg_id)?;
    let snaps = session.snapshots();
    let times = baseline_times(session, &snaps);
    Ok(summarize(session, &snaps, &times, session_pattern(session, history), index))
}

/// Sessional features for every message of a session, in layout order.
pub fn session_sessional_features(session: &ReadingSession, history: &UserHistory) -> Vec<SessionalFeatures> {
    let snaps = session.snapshots();
    let times = baseline_times(session, &snaps);
    let pattern = session_pattern(session, history);
    (0..session.layout.len()).map(|i| summarize(session, &snaps, &times, pattern, i)).collect()
}
