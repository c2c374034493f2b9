//! Feature extraction: the temporary (per-second) and sessional feature
//! families, each split into message, user, pattern and baseline blocks.

pub mod dataset;
pub mod pattern;
pub mod sessional;
pub mod temporary;

use std::ops::Range;

pub use dataset::{build_dataset, FeatureMatrix, Granularity, LabelSource, RowKey, RowLabels, Standardizer};
pub use pattern::{PatternBlock, UserHistory, TIME_GAP_CAP, WINDOWS};
pub use sessional::{session_sessional_features, sessional_features, SessionalFeatures, SessionalPattern};
pub use temporary::{
    message_temporary_features, pattern_temporary_features, session_timestamp_features, timestamp_features,
    user_temporary_features, BaselineBlock, MessageBlock, TimestampFeatures, UserBlock, MOUSE_SENTINEL,
    POSITION_SENTINEL,
};

pub const TIMESTAMP_SCHEMA: &str = "timestamp/v1";
pub const SESSIONAL_SCHEMA: &str = "sessional/v1";

pub const TIMESTAMP_COLUMNS: [&str; 24] = [
    "msg.position_on_window",
    "msg.visible",
    "msg.window_share",
    "msg.secs_since_click",
    "user.mouse_x",
    "user.mouse_y",
    "user.mouse_known",
    "user.secs_since_any_click",
    "pat.move_h_2",
    "pat.move_h_5",
    "pat.move_h_10",
    "pat.move_h_inf",
    "pat.move_v_2",
    "pat.move_v_5",
    "pat.move_v_10",
    "pat.move_v_inf",
    "pat.scroll_2",
    "pat.scroll_5",
    "pat.scroll_10",
    "pat.scroll_inf",
    "pat.clicked_fraction",
    "base.p1",
    "base.p2",
    "base.p3",
];

pub const TS_MESSAGE: Range<usize> = 0..4;
pub const TS_USER: Range<usize> = 4..8;
pub const TS_PATTERN: Range<usize> = 8..21;
pub const TS_BASELINE: Range<usize> = 21..24;

pub const SESSIONAL_COLUMNS: [&str; 11] = [
    "smsg.avg_window_share",
    "smsg.avg_position_on_window",
    "smsg.clicked",
    "smsg.secs_visible",
    "sbase.time1",
    "sbase.time2",
    "sbase.time3",
    "spat.avg_move_h",
    "spat.avg_move_v",
    "spat.avg_scroll",
    "spat.clicked_fraction",
];

pub const SS_MESSAGE: Range<usize> = 0..4;
pub const SS_BASELINE: Range<usize> = 4..7;
pub const SS_PATTERN: Range<usize> = 7..11;
