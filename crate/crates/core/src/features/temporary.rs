//! Per-second ("temporary") features for (message, second) pairs.

use super::pattern::{PatternBlock, UserHistory};
use crate::baselines;
use crate::error::Result;
use crate::event::{ReadingSession, WindowSnapshot};

/// Position value used for messages with nothing on screen.
pub const POSITION_SENTINEL: f64 = -1.0;
/// Mouse coordinate value used before the first mouse event.
pub const MOUSE_SENTINEL: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageBlock {
    /// Vertical center of the visible part, window-normalized; sentinel when hidden.
    pub position_on_window: f64,
    pub visible: f64,
    pub window_share: f64,
    pub secs_since_msg_click: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserBlock {
    pub mouse_x: f64,
    pub mouse_y: f64,
    pub mouse_known: f64,
    pub secs_since_any_click: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineBlock {
    pub p: [f64; 3],
}

/// All temporary features of one message at one second.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestampFeatures {
    pub msg_id: String,
    pub t: i64,
    pub message: MessageBlock,
    pub user: UserBlock,
    pub pattern: PatternBlock,
    pub baseline: BaselineBlock,
}

impl TimestampFeatures {
    /// Values in [`super::TIMESTAMP_COLUMNS`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(super::TIMESTAMP_COLUMNS.len());
        self.extend_into(&mut v);
        v
    }

    pub(crate) fn extend_into(&self, v: &mut Vec<f64>) {
        let m = &self.message;
        v.extend_from_slice(&[m.position_on_window, m.visible, m.window_share, m.secs_since_msg_click]);
        let u = &self.user;
        v.extend_from_slice(&[u.mouse_x, u.mouse_y, u.mouse_known, u.secs_since_any_click]);
        let p = &self.pattern;
        v.extend_from_slice(&p.move_h);
        v.extend_from_slice(&p.move_v);
        v.extend_from_slice(&p.scroll);
        v.push(p.clicked_fraction);
        v.extend_from_slice(&self.baseline.p);
    }
}

pub(crate) fn message_block(
    snap: &WindowSnapshot,
    session: &ReadingSession,
    history: &UserHistory,
    index: usize,
) -> MessageBlock {
    let view = &snap.messages[index];
    let msg_id = &session.layout.messages[index].msg_id;
    MessageBlock {
        position_on_window: view.center_offset.unwrap_or(POSITION_SENTINEL),
        visible: if view.is_visible() { 1.0 } else { 0.0 },
        window_share: view.window_share,
        secs_since_msg_click: history.secs_since_msg_click(snap.t, &session.newsletter_id, msg_id),
    }
}

pub(crate) fn user_block(snap: &WindowSnapshot, history: &UserHistory) -> UserBlock {
    let (mouse_x, mouse_y, mouse_known) = match snap.mouse_in_window() {
        Some(p) => ((p.x / snap.win_w).clamp(0.0, 1.0), (p.y / snap.win_h).clamp(0.0, 1.0), 1.0),
        None => (MOUSE_SENTINEL, MOUSE_SENTINEL, 0.0),
    };
    UserBlock { mouse_x, mouse_y, mouse_known, secs_since_any_click: history.secs_since_any_click(snap.t) }
}

pub fn message_temporary_features(
    session: &ReadingSession,
    history: &UserHistory,
    msg_id: &str,
    t: i64,
) -> Result<MessageBlock> {
    let index = session.layout.index_of(msg_id)?;
    let snap = session.snapshot_at(t)?;
    Ok(message_block(&snap, session, history, index))
}

pub fn user_temporary_features(session: &ReadingSession, history: &UserHistory, t: i64) -> Result<UserBlock> {
    Ok(user_block(&session.snapshot_at(t)?, history))
}

pub fn pattern_temporary_features(history: &UserHistory, session: &ReadingSession, t: i64) -> PatternBlock {
    history.pattern_at(t, &session.newsletter_id, session.layout.len())
}

/// Full feature set for one (message, second).
pub fn timestamp_features(
    session: &ReadingSession,
    history: &UserHistory,
    msg_id: &str,
    t: i64,
) -> Result<TimestampFeatures> {
    let index = session.layout.index_of(msg_id)?;
    let snap = session.snapshot_at(t)?;
    let base = baselines::all_baselines(&snap);
    Ok(TimestampFeatures {
        msg_id: msg_id.to_string(),
        t,
        message: message_block(&snap, session, history, index),
        user: user_block(&snap, history),
        pattern: pattern_temporary_features(history, session, t),
        baseline: BaselineBlock { p: base[index] },
    })
}

/// Features for every (second, message) of a session: `out[t - start][m]`.
pub fn session_timestamp_features(session: &ReadingSession, history: &UserHistory) -> Vec<Vec<TimestampFeatures>> {
    session
        .snapshots()
        .iter()
        .map(|snap| {
            let base = baselines::all_baselines(snap);
            let user = user_block(snap, history);
            let pattern = pattern_temporary_features(history, session, snap.t);
            session
                .layout
                .messages
                .iter()
                .enumerate()
                .map(|(i, m)| TimestampFeatures {
                    msg_id: m.msg_id.clone(),
                    t: snap.t,
                    message: message_block(snap, session, history, i),
                    user,
                    pattern,
                    baseline: BaselineBlock { p: base[i] },
                })
                .collect()
        })
        .collect()
}
