//! Splitting a user's event stream into reading sessions.
//!
//! A session runs from an `open` (or a `visibility=true` resuming a hidden
//! newsletter) until `close`, `visibility=false`, the next `open`, or the end
//! of the log. Hyperlink navigations away from the newsletter show up as
//! visibility interruptions and therefore split sessions too.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::layout::{LayoutSet, NewsletterLayout};
use super::log::{EventKind, InteractionEvent};
use super::snapshot::{ViewState, WindowSnapshot};
use crate::error::{Error, Result};

/// Why a session ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionEnd {
    Close,
    Hidden,
    /// Another newsletter was opened while this one was active.
    Superseded,
    /// The log ended; the session ends at (and includes) its last event.
    Unterminated,
}

/// Ground-truth gaze per second: `None` means the user looked at no message.
pub type GazeLabels = BTreeMap<i64, Option<String>>;

#[derive(Debug, Clone)]
pub struct ReadingSession {
    pub session_id: String,
    pub user_id: String,
    pub newsletter_id: String,
    pub t0: f64,
    pub t1: f64,
    pub end: SessionEnd,
    /// First integer second covered by the session.
    pub start_sec: i64,
    /// One past the last covered second.
    pub end_sec: i64,
    pub events: Vec<InteractionEvent>,
    pub layout: Arc<NewsletterLayout>,
    /// View state inherited from before the session started.
    pub initial: ViewState,
    /// Gazed message index per covered second, when labels are attached.
    pub labels: Option<Vec<Option<usize>>>,
}

impl ReadingSession {
    pub fn seconds(&self) -> Range<i64> {
        self.start_sec..self.end_sec
    }

    pub fn len_secs(&self) -> usize {
        (self.end_sec - self.start_sec) as usize
    }

    pub fn contains_second(&self, t: i64) -> bool {
        self.seconds().contains(&t)
    }

    /// Window state at integer second `t`: every event whose floored
    /// timestamp is at most `t` has been applied.
    pub fn snapshot_at(&self, t: i64) -> Result<WindowSnapshot> {
        if !self.contains_second(t) {
            return Err(Error::Range { t, start: self.start_sec, end: self.end_sec });
        }
        let mut state = self.initial;
        for ev in self.events.iter().take_while(|ev| ev.second() <= t) {
            state.apply(ev);
        }
        Ok(WindowSnapshot::compute(&self.layout, t, &state))
    }

    /// Snapshots for every covered second, in order. Equivalent to calling
    /// [`ReadingSession::snapshot_at`] per second but linear in the event count.
    pub fn snapshots(&self) -> Vec<WindowSnapshot> {
        let mut state = self.initial;
        let mut next = 0;
        self.seconds()
            .map(|t| {
                while next < self.events.len() && self.events[next].second() <= t {
                    state.apply(&self.events[next]);
                    next += 1;
                }
                WindowSnapshot::compute(&self.layout, t, &state)
            })
            .collect()
    }

    /// Labeled gaze seconds per message (the true reading time).
    pub fn true_reading_seconds(&self) -> Option<Vec<u32>> {
        let labels = self.labels.as_ref()?;
        let mut counts = vec![0u32; self.layout.len()];
        for m in labels.iter().flatten() {
            counts[*m] += 1;
        }
        Some(counts)
    }
}

struct Active {
    newsletter_id: String,
    layout: Arc<NewsletterLayout>,
    t0: f64,
    initial: ViewState,
    events: Vec<InteractionEvent>,
}

/// Splits one user's sorted event log into sessions.
pub fn sessionize(user_id: &str, events: &[InteractionEvent], layouts: &LayoutSet) -> Result<Vec<ReadingSession>> {
    let mut sessions = Vec::new();
    let mut state = ViewState::default();
    let mut active: Option<Active> = None;
    // Newsletter currently open in the tab, whether visible or not.
    let mut open: Option<String> = None;
    let mut prev_end_sec = i64::MIN;
    let mut prev_t = f64::NEG_INFINITY;

    let mut finish = |sessions: &mut Vec<ReadingSession>, a: Active, t1: f64, end: SessionEnd| {
        let start_sec = (a.t0.floor() as i64).max(prev_end_sec);
        let end_sec = if end == SessionEnd::Unterminated { t1.floor() as i64 + 1 } else { t1.ceil() as i64 };
        if end_sec <= start_sec || t1 < a.t0 || (t1 == a.t0 && end != SessionEnd::Unterminated) {
            return;
        }
        prev_end_sec = end_sec;
        sessions.push(ReadingSession {
            session_id: format!("{user_id}/s{:03}", sessions.len()),
            user_id: user_id.to_string(),
            newsletter_id: a.newsletter_id,
            t0: a.t0,
            t1,
            end,
            start_sec,
            end_sec,
            events: a.events,
            layout: a.layout,
            initial: a.initial,
            labels: None,
        });
    };

    for ev in events {
        if ev.t < prev_t {
            return Err(Error::Structure(format!("user {user_id}: events are not sorted at t={}", ev.t)));
        }
        prev_t = ev.t;
        match &ev.kind {
            EventKind::Open { newsletter_id } => {
                let layout = layouts.get(newsletter_id)?.clone();
                if let Some(a) = active.take() {
                    finish(&mut sessions, a, ev.t, SessionEnd::Superseded);
                }
                state.apply(ev);
                open = Some(newsletter_id.clone());
                active = Some(Active {
                    newsletter_id: newsletter_id.clone(),
                    layout,
                    t0: ev.t,
                    initial: state,
                    events: vec![ev.clone()],
                });
            }
            EventKind::Close => {
                if open.take().is_none() {
                    return Err(Error::Structure(format!(
                        "user {user_id}: close at t={} without a matching open",
                        ev.t
                    )));
                }
                if let Some(a) = active.take() {
                    finish(&mut sessions, a, ev.t, SessionEnd::Close);
                }
            }
            EventKind::Visibility { visible: false } => {
                if let Some(a) = active.take() {
                    finish(&mut sessions, a, ev.t, SessionEnd::Hidden);
                }
            }
            EventKind::Visibility { visible: true } => {
                if active.is_none() {
                    if let Some(nid) = &open {
                        active = Some(Active {
                            newsletter_id: nid.clone(),
                            layout: layouts.get(nid)?.clone(),
                            t0: ev.t,
                            initial: state,
                            events: vec![ev.clone()],
                        });
                    }
                }
            }
            _ => {
                state.apply(ev);
                if let Some(a) = active.as_mut() {
                    a.events.push(ev.clone());
                }
            }
        }
    }
    if let Some(a) = active.take() {
        let last = a.events.last().map_or(a.t0, |e| e.t);
        finish(&mut sessions, a, last, SessionEnd::Unterminated);
    }
    Ok(sessions)
}

/// Attaches per-second gaze labels. Every covered second of every session
/// must be labeled and every labeled message must exist in the layout;
/// labels outside sessions are ignored.
pub fn attach_labels(sessions: &mut [ReadingSession], labels: &GazeLabels) -> Result<()> {
    for s in sessions.iter_mut() {
        let mut per_sec = Vec::with_capacity(s.len_secs());
        for t in s.seconds() {
            let label = labels
                .get(&t)
                .ok_or_else(|| Error::Label(format!("session {} has no gaze label for second {t}", s.session_id)))?;
            per_sec.push(match label {
                Some(id) => Some(s.layout.index_of(id).map_err(|_| {
                    Error::Label(format!("session {}: labeled msg_id {id} not in layout", s.session_id))
                })?),
                None => None,
            });
        }
        s.labels = Some(per_sec);
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabel {
    t: i64,
    msg_id: Option<String>,
}

pub fn parse_label_log<R: BufRead>(reader: R) -> Result<GazeLabels> {
    let mut labels = GazeLabels::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawLabel =
            serde_json::from_str(&text).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if labels.insert(raw.t, raw.msg_id).is_some() {
            return Err(Error::Parse { line: line_no, message: format!("duplicate label for second {}", raw.t) });
        }
    }
    Ok(labels)
}

pub fn write_label_log<W: Write>(mut out: W, labels: &GazeLabels) -> std::io::Result<()> {
    for (t, msg_id) in labels {
        let raw = RawLabel { t: *t, msg_id: msg_id.clone() };
        writeln!(out, "{}", serde_json::to_string(&raw).expect("label serialization is infallible"))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::layout::MessageGeometry;
    use crate::geometry::Rect;

    fn layouts() -> LayoutSet {
        let msgs = vec![
            MessageGeometry { msg_id: "a".into(), rect: Rect::new(0.0, 0.0, 500.0, 400.0), words: 40 },
            MessageGeometry { msg_id: "b".into(), rect: Rect::new(0.0, 500.0, 500.0, 400.0), words: 40 },
        ];
        std::iter::once(NewsletterLayout::new("n1", 1000.0, msgs).unwrap()).collect()
    }

    fn open(t: f64) -> InteractionEvent {
        InteractionEvent::new(t, EventKind::Open { newsletter_id: "n1".into() })
    }
    fn close(t: f64) -> InteractionEvent {
        InteractionEvent::new(t, EventKind::Close)
    }
    fn vis(t: f64, visible: bool) -> InteractionEvent {
        InteractionEvent::new(t, EventKind::Visibility { visible })
    }
    fn mv(t: f64) -> InteractionEvent {
        InteractionEvent::new(t, EventKind::Move { x: 1.0, y: 1.0 })
    }

    #[test]
    fn open_close_single_session() {
        let s = sessionize("u", &[open(0.0), close(100.0)], &layouts()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].t0, s[0].t1), (0.0, 100.0));
        assert_eq!(s[0].seconds(), 0..100);
        assert_eq!(s[0].end, SessionEnd::Close);
    }

    #[test]
    fn visibility_splits_session() {
        let evs = [open(0.0), vis(50.0, false), mv(55.0), vis(60.0, true), close(100.0)];
        let s = sessionize("u", &evs, &layouts()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].t0, s[0].t1, s[0].end), (0.0, 50.0, SessionEnd::Hidden));
        assert_eq!((s[1].t0, s[1].t1, s[1].end), (60.0, 100.0, SessionEnd::Close));
        // The move during the hidden interval belongs to no session.
        assert!(s.iter().all(|x| x.events.iter().all(|e| e.t != 55.0)));
    }

    #[test]
    fn unterminated_session_ends_at_last_event_inclusive() {
        let s = sessionize("u", &[open(0.0), mv(80.0)], &layouts()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].t0, s[0].t1), (0.0, 80.0));
        assert_eq!(s[0].end, SessionEnd::Unterminated);
        assert_eq!(s[0].seconds(), 0..81);
    }

    #[test]
    fn close_without_open_is_structural_error() {
        assert!(matches!(sessionize("u", &[close(3.0)], &layouts()), Err(Error::Structure(_))));
    }

    #[test]
    fn unknown_newsletter_is_lookup_error() {
        let ev = InteractionEvent::new(0.0, EventKind::Open { newsletter_id: "nope".into() });
        assert!(matches!(sessionize("u", &[ev], &layouts()), Err(Error::Lookup { .. })));
    }

    #[test]
    fn fractional_interruption_does_not_overlap_seconds() {
        let evs = [open(0.0), vis(10.3, false), vis(10.8, true), close(20.0)];
        let s = sessionize("u", &evs, &layouts()).unwrap();
        assert_eq!(s[0].seconds(), 0..11);
        assert_eq!(s[1].seconds(), 11..20);
    }

    #[test]
    fn labels_must_cover_session() {
        let mut s = sessionize("u", &[open(0.0), close(3.0)], &layouts()).unwrap();
        let mut labels: GazeLabels = [(0, Some("a".to_string())), (1, None)].into_iter().collect();
        assert!(attach_labels(&mut s, &labels).is_err());
        labels.insert(2, Some("b".into()));
        attach_labels(&mut s, &labels).unwrap();
        assert_eq!(s[0].labels.as_deref(), Some(&[Some(0), None, Some(1)][..]));
        assert_eq!(s[0].true_reading_seconds(), Some(vec![1, 1]));
        labels.insert(1, Some("zz".into()));
        assert!(attach_labels(&mut s, &labels).is_err());
    }

    #[test]
    fn snapshot_out_of_range() {
        let s = sessionize("u", &[open(0.0), close(10.0)], &layouts()).unwrap();
        assert!(matches!(s[0].snapshot_at(10), Err(Error::Range { .. })));
        assert!(s[0].snapshot_at(9).is_ok());
    }

    #[test]
    fn snapshot_uses_floored_event_seconds() {
        let evs = [
            open(0.0),
            InteractionEvent::new(0.0, EventKind::Viewport { win_w: 500, win_h: 400 }),
            InteractionEvent::new(3.4, EventKind::Scroll { scroll_y: 500.0 }),
            close(10.0),
        ];
        let s = &sessionize("u", &evs, &layouts()).unwrap()[0];
        assert_eq!(s.snapshot_at(2).unwrap().scroll_y, 0.0);
        assert_eq!(s.snapshot_at(3).unwrap().scroll_y, 500.0);
        assert_eq!(s.snapshots(), s.seconds().map(|t| s.snapshot_at(t).unwrap()).collect::<Vec<_>>());
    }

    #[test]
    fn label_log_round_trip() {
        let labels: GazeLabels = [(0, Some("a".to_string())), (1, None)].into_iter().collect();
        let mut buf = Vec::new();
        write_label_log(&mut buf, &labels).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "{\"t\":0,\"msg_id\":\"a\"}\n{\"t\":1,\"msg_id\":null}\n");
        assert_eq!(parse_label_log(&buf[..]).unwrap(), labels);
    }
}
