//! Rolling behavioral statistics over a user's whole interaction history.
//!
//! Frequencies are per-second occupancy rates, not raw event counts: a second
//! counts as horizontal (vertical) movement when it holds a move event whose
//! x (y) differs from some move event in the same or the preceding second. A
//! diagonal movement counts on both axes. A second counts as scrolling when it
//! holds at least one scroll event.

use std::collections::{BTreeMap, HashSet};

use crate::event::{EventKind, InteractionEvent, ReadingSession};

/// Look-back windows in seconds; `None` is "since the beginning of the run".
pub const WINDOWS: [Option<i64>; 4] = [Some(2), Some(5), Some(10), None];

/// Upper bound for every "seconds since" feature.
pub const TIME_GAP_CAP: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PatternBlock {
    /// Horizontal move frequency over each of [`WINDOWS`].
    pub move_h: [f64; 4],
    pub move_v: [f64; 4],
    pub scroll: [f64; 4],
    /// Share of the current newsletter's messages clicked so far.
    pub clicked_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClickRecord {
    pub second: i64,
    pub msg_id: Option<String>,
    /// Newsletter whose session contained the click.
    pub newsletter_id: Option<String>,
}

/// Precomputed occupancy prefix sums and click list for one user.
#[derive(Debug, Clone)]
pub struct UserHistory {
    first_sec: i64,
    move_h: Vec<u32>,
    move_v: Vec<u32>,
    scroll: Vec<u32>,
    clicks: Vec<ClickRecord>,
}

fn prefix(flags: &[bool]) -> Vec<u32> {
    let mut out = Vec::with_capacity(flags.len() + 1);
    out.push(0);
    let mut acc = 0;
    for &f in flags {
        acc += u32::from(f);
        out.push(acc);
    }
    out
}

impl UserHistory {
    /// `sessions` are used only to attribute clicks to newsletters.
    pub fn new(events: &[InteractionEvent], sessions: &[ReadingSession]) -> Self {
        let Some(first) = events.first() else {
            return Self { first_sec: 0, move_h: vec![0], move_v: vec![0], scroll: vec![0], clicks: Vec::new() };
        };
        let first_sec = first.second();
        let last_sec = events.last().map_or(first_sec, |e| e.second());
        let n = (last_sec - first_sec + 1) as usize;

        let mut moves: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
        let mut scroll = vec![false; n];
        for ev in events {
            match ev.kind {
                EventKind::Move { x, y } => moves.entry(ev.second()).or_default().push((x, y)),
                EventKind::Scroll { .. } => scroll[(ev.second() - first_sec) as usize] = true,
                _ => {}
            }
        }
        let mut move_h = vec![false; n];
        let mut move_v = vec![false; n];
        for (&s, here) in &moves {
            let prev = moves.get(&(s - 1)).map(Vec::as_slice).unwrap_or(&[]);
            let spans = |axis: fn(&(f64, f64)) -> f64| {
                let mut it = here.iter().chain(prev).map(axis);
                let v0 = it.next().expect("second has at least one move");
                it.any(|v| v != v0)
            };
            let idx = (s - first_sec) as usize;
            move_h[idx] = spans(|p| p.0);
            move_v[idx] = spans(|p| p.1);
        }

        let mut clicks = Vec::new();
        for ev in events {
            if let EventKind::Click { msg_id, .. } = &ev.kind {
                let newsletter_id =
                    sessions.iter().find(|s| s.events.iter().any(|e| e == ev)).map(|s| s.newsletter_id.clone());
                clicks.push(ClickRecord { second: ev.second(), msg_id: msg_id.clone(), newsletter_id });
            }
        }

        Self { first_sec, move_h: prefix(&move_h), move_v: prefix(&move_v), scroll: prefix(&scroll), clicks }
    }

    pub fn first_second(&self) -> i64 {
        self.first_sec
    }

    fn last_second(&self) -> i64 {
        self.first_sec + self.move_h.len() as i64 - 2
    }

    /// Occupied seconds within `[lo, hi]` (inclusive), clamped to the history.
    fn count(&self, prefix: &[u32], lo: i64, hi: i64) -> u32 {
        let lo = lo.max(self.first_sec);
        let hi = hi.min(self.last_second());
        if hi < lo {
            return 0;
        }
        let a = (lo - self.first_sec) as usize;
        let b = (hi - self.first_sec) as usize + 1;
        prefix[b] - prefix[a]
    }

    fn rates(&self, prefix: &[u32], t: i64) -> [f64; 4] {
        let mut out = [0.0; 4];
        if t < self.first_sec {
            return out;
        }
        let elapsed = t - self.first_sec + 1;
        for (slot, w) in out.iter_mut().zip(WINDOWS) {
            let w = w.unwrap_or(elapsed);
            let denom = w.min(elapsed);
            *slot = f64::from(self.count(prefix, t - w + 1, t)) / denom as f64;
        }
        out
    }

    /// Pattern features at second `t` for a reader of `newsletter_id` with
    /// `n_messages` messages.
    pub fn pattern_at(&self, t: i64, newsletter_id: &str, n_messages: usize) -> PatternBlock {
        let clicked: HashSet<&str> = self
            .clicks
            .iter()
            .filter(|c| c.second <= t && c.newsletter_id.as_deref() == Some(newsletter_id))
            .filter_map(|c| c.msg_id.as_deref())
            .collect();
        PatternBlock {
            move_h: self.rates(&self.move_h, t),
            move_v: self.rates(&self.move_v, t),
            scroll: self.rates(&self.scroll, t),
            clicked_fraction: clicked.len() as f64 / n_messages as f64,
        }
    }

    /// Occupied (horizontal, vertical, scroll) seconds within `[lo, hi)`.
    pub fn occupancy(&self, lo: i64, hi: i64) -> (u32, u32, u32) {
        (
            self.count(&self.move_h, lo, hi - 1),
            self.count(&self.move_v, lo, hi - 1),
            self.count(&self.scroll, lo, hi - 1),
        )
    }

    /// Seconds since the latest click at or before `t`, capped.
    pub fn secs_since_any_click(&self, t: i64) -> f64 {
        self.clicks
            .iter()
            .rev()
            .find(|c| c.second <= t)
            .map_or(TIME_GAP_CAP, |c| ((t - c.second) as f64).min(TIME_GAP_CAP))
    }

    /// Seconds since `msg_id` of `newsletter_id` was last clicked, capped.
    pub fn secs_since_msg_click(&self, t: i64, newsletter_id: &str, msg_id: &str) -> f64 {
        self.clicks
            .iter()
            .rev()
            .find(|c| {
                c.second <= t
                    && c.msg_id.as_deref() == Some(msg_id)
                    && c.newsletter_id.as_deref() == Some(newsletter_id)
            })
            .map_or(TIME_GAP_CAP, |c| ((t - c.second) as f64).min(TIME_GAP_CAP))
    }

    pub fn clicks(&self) -> &[ClickRecord] {
        &self.clicks
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(t: f64, x: f64, y: f64) -> InteractionEvent {
        InteractionEvent::new(t, EventKind::Move { x, y })
    }

    #[test]
    fn saturated_horizontal_movement() {
        let events: Vec<_> = (0..20).map(|s| mv(s as f64, s as f64 * 10.0, 5.0)).collect();
        let h = UserHistory::new(&events, &[]);
        let p = h.pattern_at(19, "n", 1);
        assert_eq!(&p.move_h[..3], &[1.0, 1.0, 1.0]);
        // The very first move has nothing to differ from.
        assert_eq!(p.move_h[3], 19.0 / 20.0);
        assert_eq!(p.move_v, [0.0; 4]);
        assert_eq!(p.scroll, [0.0; 4]);
    }

    #[test]
    fn one_of_two_seconds_is_half() {
        let events = vec![mv(0.0, 0.0, 0.0), mv(0.5, 1.0, 1.0), mv(3.2, 1.0, 1.0), mv(3.7, 2.0, 2.0)];
        let h = UserHistory::new(&events, &[]);
        // Seconds 3 and 4: only second 3 has movement.
        let p = h.pattern_at(4, "n", 1);
        assert_eq!(p.move_h[0], 0.5);
        assert_eq!(p.move_v[0], 0.5);
    }

    #[test]
    fn before_first_event_is_zero() {
        let h = UserHistory::new(&[mv(10.0, 0.0, 0.0)], &[]);
        assert_eq!(h.pattern_at(5, "n", 3), PatternBlock::default());
    }

    #[test]
    fn short_history_uses_elapsed_denominator() {
        let events = vec![mv(0.0, 0.0, 0.0), mv(0.5, 3.0, 0.0)];
        let h = UserHistory::new(&events, &[]);
        let p = h.pattern_at(0, "n", 1);
        assert_eq!(p.move_h, [1.0; 4]);
        assert_eq!(p.move_v, [0.0; 4]);
    }

    #[test]
    fn click_gaps_are_capped() {
        let ev = InteractionEvent::new(7.2, EventKind::Click { x: 0.0, y: 0.0, msg_id: Some("a".into()) });
        let h = UserHistory::new(&[ev], &[]);
        assert_eq!(h.secs_since_any_click(12), 5.0);
        assert_eq!(h.secs_since_any_click(6), TIME_GAP_CAP);
        assert_eq!(h.secs_since_any_click(100_000), TIME_GAP_CAP);
    }
}
