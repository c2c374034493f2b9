//! The three literature heuristics for the probability that a message is
//! being read at a given second.
//!
//! 1. the message's share of the window area;
//! 2. window share weighted by `1 / (1 + d / diag)`, where `d` is the distance
//!    from the visible part's center to the window center, normalized over
//!    visible messages;
//! 3. one for the visible message closest to the mouse, zero elsewhere.

use crate::event::WindowSnapshot;

/// Probability that message `msg_id` is being read at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestampPrediction {
    pub msg_id: String,
    pub t: i64,
    pub p: f64,
}

/// Baseline 1 for every message, in layout order.
pub fn window_share_all(snap: &WindowSnapshot) -> Vec<f64> {
    snap.messages.iter().map(|m| m.window_share).collect()
}

/// Baseline 2 for every message, in layout order.
pub fn center_distance_all(snap: &WindowSnapshot) -> Vec<f64> {
    let center = snap.window_center();
    let diag = snap.window_diagonal();
    let raw: Vec<f64> = snap
        .messages
        .iter()
        .map(|m| {
            if !m.is_visible() {
                return 0.0;
            }
            let d = m.visible_rect.center().distance(center);
            m.window_share / (1.0 + d / diag)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.into_iter().map(|r| r / total).collect()
    } else {
        raw
    }
}

/// Index of the visible message nearest to the mouse. Ties go to the earlier
/// message in document order; `None` when the mouse is unknown or nothing is
/// visible.
pub fn closest_to_mouse(snap: &WindowSnapshot) -> Option<usize> {
    let mouse = snap.mouse_in_window()?;
    let mut best: Option<(usize, f64)> = None;
    for (i, m) in snap.messages.iter().enumerate() {
        if !m.is_visible() {
            continue;
        }
        let d = m.visible_rect.distance_to(mouse);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Baseline 3 for every message, in layout order.
pub fn mouse_proximity_all(snap: &WindowSnapshot) -> Vec<f64> {
    let mut p = vec![0.0; snap.messages.len()];
    if let Some(i) = closest_to_mouse(snap) {
        p[i] = 1.0;
    }
    p
}

/// All three baselines for every message: `out[m] = [p1, p2, p3]`.
pub fn all_baselines(snap: &WindowSnapshot) -> Vec<[f64; 3]> {
    let b2 = center_distance_all(snap);
    let closest = closest_to_mouse(snap);
    snap.messages
        .iter()
        .zip(b2)
        .enumerate()
        .map(|(i, (m, p2))| [m.window_share, p2, if closest == Some(i) { 1.0 } else { 0.0 }])
        .collect()
}

pub fn baseline_window_share(snap: &WindowSnapshot, index: usize) -> f64 {
    snap.messages[index].window_share
}

pub fn baseline_center_distance(snap: &WindowSnapshot, index: usize) -> f64 {
    center_distance_all(snap)[index]
}

pub fn baseline_mouse_proximity(snap: &WindowSnapshot, index: usize) -> f64 {
    if closest_to_mouse(snap) == Some(index) {
        1.0
    } else {
        0.0
    }
}
