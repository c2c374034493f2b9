//! Raw browser interaction events and their JSONL encoding.
//!
//! One event per line, keys drawn from
//! `{t, kind, x, y, scroll_y, win_w, win_h, msg_id, visible, newsletter_id}`.
//! A key is present exactly when it applies to the event kind; `msg_id` is
//! optional on clicks.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind-specific payload of an [`InteractionEvent`].
#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Open {
        newsletter_id: String,
    },
    Close,
    /// Mouse position in document pixels.
    Move {
        x: f64,
        y: f64,
    },
    /// Vertical scroll offset in document pixels.
    Scroll {
        scroll_y: f64,
    },
    Click {
        x: f64,
        y: f64,
        msg_id: Option<String>,
    },
    Viewport {
        win_w: u32,
        win_h: u32,
    },
    Visibility {
        visible: bool,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Open { .. } => "open",
            EventKind::Close => "close",
            EventKind::Move { .. } => "move",
            EventKind::Scroll { .. } => "scroll",
            EventKind::Click { .. } => "click",
            EventKind::Viewport { .. } => "viewport",
            EventKind::Visibility { .. } => "visibility",
        }
    }
}

/// One timestamped browser event; `t` is seconds since the log epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionEvent {
    pub t: f64,
    pub kind: EventKind,
}

impl InteractionEvent {
    pub fn new(t: f64, kind: EventKind) -> Self {
        Self { t, kind }
    }

    /// The integer second this event is attributed to.
    pub fn second(&self) -> i64 {
        self.t.floor() as i64
    }
}

/// Wire form. Field order here is the canonical key order.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    t: f64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scroll_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    win_w: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    win_h: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    msg_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    visible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    newsletter_id: Option<String>,
}

impl RawEvent {
    fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        if self.x.is_some() {
            keys.push("x");
        }
        if self.y.is_some() {
            keys.push("y");
        }
        if self.scroll_y.is_some() {
            keys.push("scroll_y");
        }
        if self.win_w.is_some() {
            keys.push("win_w");
        }
        if self.win_h.is_some() {
            keys.push("win_h");
        }
        if self.msg_id.is_some() {
            keys.push("msg_id");
        }
        if self.visible.is_some() {
            keys.push("visible");
        }
        if self.newsletter_id.is_some() {
            keys.push("newsletter_id");
        }
        keys
    }

    fn into_event(self) -> std::result::Result<InteractionEvent, String> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(format!("t must be a non-negative number, got {}", self.t));
        }
        let (allowed, required): (&[&str], &[&str]) = match self.kind.as_str() {
            "open" => (&["newsletter_id"], &["newsletter_id"]),
            "close" => (&[], &[]),
            "move" => (&["x", "y"], &["x", "y"]),
            "scroll" => (&["scroll_y"], &["scroll_y"]),
            "click" => (&["x", "y", "msg_id"], &["x", "y"]),
            "viewport" => (&["win_w", "win_h"], &["win_w", "win_h"]),
            "visibility" => (&["visible"], &["visible"]),
            other => return Err(format!("unknown event kind {other:?}")),
        };
        let present = self.present_keys();
        if let Some(extra) = present.iter().find(|k| !allowed.contains(k)) {
            return Err(format!("key {extra:?} does not apply to {} events", self.kind));
        }
        if let Some(missing) = required.iter().find(|k| !present.contains(k)) {
            return Err(format!("{} event requires key {missing:?}", self.kind));
        }
        for (name, v) in [("x", self.x), ("y", self.y), ("scroll_y", self.scroll_y)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(format!("{name} must be finite"));
                }
            }
        }
        let kind = match self.kind.as_str() {
            "open" => EventKind::Open { newsletter_id: self.newsletter_id.unwrap() },
            "close" => EventKind::Close,
            "move" => EventKind::Move { x: self.x.unwrap(), y: self.y.unwrap() },
            "scroll" => EventKind::Scroll { scroll_y: self.scroll_y.unwrap() },
            "click" => EventKind::Click { x: self.x.unwrap(), y: self.y.unwrap(), msg_id: self.msg_id },
            "viewport" => {
                let (win_w, win_h) = (self.win_w.unwrap(), self.win_h.unwrap());
                if win_w == 0 || win_h == 0 {
                    return Err("viewport dimensions must be positive".into());
                }
                EventKind::Viewport { win_w, win_h }
            }
            "visibility" => EventKind::Visibility { visible: self.visible.unwrap() },
            _ => unreachable!(),
        };
        Ok(InteractionEvent { t: self.t, kind })
    }

    fn from_event(ev: &InteractionEvent) -> Self {
        let mut raw = RawEvent { t: ev.t, kind: ev.kind.name().to_string(), ..Default::default() };
        match &ev.kind {
            EventKind::Open { newsletter_id } => raw.newsletter_id = Some(newsletter_id.clone()),
            EventKind::Close => {}
            EventKind::Move { x, y } => {
                raw.x = Some(*x);
                raw.y = Some(*y);
            }
            EventKind::Scroll { scroll_y } => raw.scroll_y = Some(*scroll_y),
            EventKind::Click { x, y, msg_id } => {
                raw.x = Some(*x);
                raw.y = Some(*y);
                raw.msg_id = msg_id.clone();
            }
            EventKind::Viewport { win_w, win_h } => {
                raw.win_w = Some(*win_w);
                raw.win_h = Some(*win_h);
            }
            EventKind::Visibility { visible } => raw.visible = Some(*visible),
        }
        raw
    }
}

/// Parses one JSONL record. `line` is only used for error reporting.
pub fn parse_event_line(text: &str, line: usize) -> Result<InteractionEvent> {
    let raw: RawEvent = serde_json::from_str(text).map_err(|e| Error::Parse { line, message: e.to_string() })?;
    raw.into_event().map_err(|message| Error::Parse { line, message })
}

/// Parses a newline-delimited event log. Blank lines are skipped; line numbers
/// in errors are 1-based.
pub fn parse_event_log<R: BufRead>(reader: R) -> Result<Vec<InteractionEvent>> {
    let mut events: Vec<InteractionEvent> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
        if text.trim().is_empty() {
            continue;
        }
        let ev = parse_event_line(&text, line_no)?;
        if let Some(prev) = events.last() {
            if ev.t < prev.t {
                return Err(Error::Ordering { line: line_no, t: ev.t, prev: prev.t });
            }
        }
        events.push(ev);
    }
    Ok(events)
}

pub fn parse_event_str(text: &str) -> Result<Vec<InteractionEvent>> {
    parse_event_log(text.as_bytes())
}

/// Canonical single-line JSON encoding of an event (no trailing newline).
pub fn event_to_json(ev: &InteractionEvent) -> String {
    serde_json::to_string(&RawEvent::from_event(ev)).expect("event serialization is infallible")
}

pub fn write_event_log<W: Write>(mut out: W, events: &[InteractionEvent]) -> std::io::Result<()> {
    for ev in events {
        writeln!(out, "{}", event_to_json(ev))?;
    }
    Ok(())
}

pub fn event_log_to_string(events: &[InteractionEvent]) -> String {
    let mut buf = Vec::new();
    write_event_log(&mut buf, events).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_move_event() {
        let evs = parse_event_str(r#"{"t":1.5,"kind":"move","x":100,"y":200}"#).unwrap();
        assert_eq!(evs, vec![InteractionEvent::new(1.5, EventKind::Move { x: 100.0, y: 200.0 })]);
    }

    #[test]
    fn empty_stream_is_empty_list() {
        assert!(parse_event_str("").unwrap().is_empty());
    }

    #[test]
    fn missing_coordinates_is_parse_error_at_line() {
        let log = "{\"t\":1,\"kind\":\"close\"}\n{\"t\":2,\"kind\":\"move\"}\n";
        match parse_event_str(log) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn inapplicable_key_rejected() {
        let err = parse_event_str(r#"{"t":1,"kind":"scroll","scroll_y":5,"x":3}"#).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(parse_event_str(r#"{"t":1,"kind":"close","foo":1}"#).is_err());
    }

    #[test]
    fn negative_time_rejected() {
        assert!(parse_event_str(r#"{"t":-1,"kind":"close"}"#).is_err());
    }

    #[test]
    fn decreasing_timestamp_is_ordering_error() {
        let log = "{\"t\":5,\"kind\":\"close\"}\n{\"t\":4,\"kind\":\"close\"}\n";
        assert!(matches!(parse_event_str(log), Err(Error::Ordering { line: 2, .. })));
    }

    #[test]
    fn click_msg_id_is_optional() {
        let evs = parse_event_str(r#"{"t":3,"kind":"click","x":1,"y":2}"#).unwrap();
        assert_eq!(evs[0].kind, EventKind::Click { x: 1.0, y: 2.0, msg_id: None });
    }

    #[test]
    fn canonical_key_order() {
        let ev = InteractionEvent::new(2.0, EventKind::Click { x: 1.0, y: 2.5, msg_id: Some("m3".into()) });
        assert_eq!(event_to_json(&ev), r#"{"t":2.0,"kind":"click","x":1.0,"y":2.5,"msg_id":"m3"}"#);
    }
}
