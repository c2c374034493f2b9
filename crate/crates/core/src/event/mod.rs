//! Canonical event data model: logs, layouts, sessions and window snapshots.

pub mod layout;
pub mod log;
pub mod session;
pub mod snapshot;

pub use layout::{LayoutSet, MessageGeometry, NewsletterLayout};
pub use log::{
    event_log_to_string, event_to_json, parse_event_line, parse_event_log, parse_event_str, write_event_log, EventKind,
    InteractionEvent,
};
pub use session::{
    attach_labels, parse_label_log, sessionize, write_label_log, GazeLabels, ReadingSession, SessionEnd,
};
pub use snapshot::{MessageView, ViewState, WindowSnapshot, DEFAULT_VIEWPORT};
