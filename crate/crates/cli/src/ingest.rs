//! Maps externally recorded CSV tables onto the canonical corpus files.
//!
//! The adapter is driven entirely by an [`IngestConfig`]: which CSV columns
//! hold which event fields, how source event names translate to the canonical
//! kinds and how raw timestamps convert to seconds. Nothing about a particular
//! dataset is hard-coded. Events are stably sorted by time within each user
//! before writing, since exported logs are not always in arrival order.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use readtime::corpus::{Corpus, UserLog};
use readtime::event::{EventKind, GazeLabels, InteractionEvent, LayoutSet, MessageGeometry, NewsletterLayout};
use readtime::geometry::Rect;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    /// Event table: one row per browser event, all users together.
    pub events: PathBuf,
    /// Layout table: one row per message.
    pub layouts: PathBuf,
    /// Optional gaze label table: one row per labeled second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    /// Raw timestamps are multiplied by this to get seconds (0.001 for milliseconds).
    #[serde(default = "one")]
    pub time_scale: f64,
    /// Subtract each user's earliest event time so logs start near zero.
    #[serde(default)]
    pub rebase_time: bool,
    /// Rows whose event name has no mapping are skipped instead of rejected.
    #[serde(default)]
    pub skip_unknown_kinds: bool,
    #[serde(default)]
    pub event_columns: EventColumns,
    /// Canonical kind to the source names that mean it. Canonical names always map to themselves.
    #[serde(default)]
    pub kind_names: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub layout_columns: LayoutColumns,
    #[serde(default)]
    pub label_columns: LabelColumns,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EventColumns {
    pub user: String,
    pub t: String,
    pub kind: String,
    pub x: String,
    pub y: String,
    pub scroll_y: String,
    pub win_w: String,
    pub win_h: String,
    pub msg_id: String,
    pub visible: String,
    pub newsletter_id: String,
}

impl Default for EventColumns {
    fn default() -> Self {
        Self {
            user: "user_id".into(),
            t: "t".into(),
            kind: "kind".into(),
            x: "x".into(),
            y: "y".into(),
            scroll_y: "scroll_y".into(),
            win_w: "win_w".into(),
            win_h: "win_h".into(),
            msg_id: "msg_id".into(),
            visible: "visible".into(),
            newsletter_id: "newsletter_id".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutColumns {
    pub newsletter_id: String,
    pub msg_id: String,
    pub x: String,
    pub y: String,
    pub w: String,
    pub h: String,
    pub words: String,
    /// Optional; when the column is missing the lowest message bottom is used.
    pub doc_height: String,
}

impl Default for LayoutColumns {
    fn default() -> Self {
        Self {
            newsletter_id: "newsletter_id".into(),
            msg_id: "msg_id".into(),
            x: "x".into(),
            y: "y".into(),
            w: "w".into(),
            h: "h".into(),
            words: "words".into(),
            doc_height: "doc_height".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelColumns {
    pub user: String,
    pub t: String,
    /// Empty cells mean gaze off every message.
    pub msg_id: String,
}

impl Default for LabelColumns {
    fn default() -> Self {
        Self { user: "user_id".into(), t: "t".into(), msg_id: "msg_id".into() }
    }
}

const KINDS: [&str; 7] = ["open", "close", "move", "scroll", "click", "viewport", "visibility"];

struct Table {
    path: PathBuf,
    index: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        let headers = reader.headers().with_context(|| format!("reading header of {}", path.display()))?;
        let index = headers.iter().enumerate().map(|(i, h)| (h.trim().to_string(), i)).collect();
        let rows = reader
            .records()
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(Self { path: path.to_path_buf(), index, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| anyhow!("{}: missing column `{name}`", self.path.display()))
    }

    fn optional_column(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Cell text, `None` when blank. `line` is 1-based and counts the header.
    fn cell<'a>(&self, row: &'a csv::StringRecord, col: usize) -> Option<&'a str> {
        row.get(col).map(str::trim).filter(|s| !s.is_empty())
    }

    fn required<'a>(&self, row: &'a csv::StringRecord, col: Option<usize>, name: &str, line: usize) -> Result<&'a str> {
        col.and_then(|c| self.cell(row, c))
            .ok_or_else(|| anyhow!("{} line {line}: missing value for `{name}`", self.path.display()))
    }

    fn number<T: std::str::FromStr>(
        &self,
        row: &csv::StringRecord,
        col: Option<usize>,
        name: &str,
        line: usize,
    ) -> Result<T> {
        let text = self.required(row, col, name, line)?;
        text.parse().map_err(|_| anyhow!("{} line {line}: `{name}` is not a number: {text:?}", self.path.display()))
    }
}

fn parse_bool(text: &str) -> Option<bool> {
    match text.to_ascii_lowercase().as_str() {
        "true" | "1" | "visible" | "yes" => Some(true),
        "false" | "0" | "hidden" | "no" => Some(false),
        _ => None,
    }
}

impl IngestConfig {
    fn kind_lookup(&self) -> Result<HashMap<String, &'static str>> {
        let mut map: HashMap<String, &'static str> = KINDS.iter().map(|k| (k.to_string(), *k)).collect();
        for (canonical, sources) in &self.kind_names {
            let Some(&kind) = KINDS.iter().find(|k| **k == canonical.as_str()) else {
                bail!("kind_names: unknown canonical kind `{canonical}` (expected one of {})", KINDS.join(", "));
            };
            for s in sources {
                if let Some(prev) = map.insert(s.clone(), kind) {
                    if prev != kind && KINDS.contains(&s.as_str()) {
                        bail!("kind_names: `{s}` is a canonical kind and cannot be remapped");
                    }
                }
            }
        }
        Ok(map)
    }

    /// Reads the three tables relative to `base` and builds a corpus.
    pub fn load(&self, base: &Path) -> Result<Corpus> {
        if !(self.time_scale.is_finite() && self.time_scale > 0.0) {
            bail!("time_scale must be a positive number");
        }
        let layouts = self.read_layouts(&base.join(&self.layouts))?;
        let (mut events, origins) = self.read_events(&base.join(&self.events))?;
        let mut labels = match &self.labels {
            Some(p) => Some(self.read_labels(&base.join(p), &origins)?),
            None => None,
        };
        let mut users = Vec::new();
        for (user_id, evs) in std::mem::take(&mut events) {
            let user_labels = labels.as_mut().map(|all| all.remove(&user_id).unwrap_or_default());
            users.push(UserLog { user_id, events: evs, labels: user_labels });
        }
        if let Some(rest) = labels.filter(|l| !l.is_empty()) {
            let names: Vec<&String> = rest.keys().collect();
            bail!("labels reference users without events: {names:?}");
        }
        Ok(Corpus { layouts, users })
    }

    fn read_layouts(&self, path: &Path) -> Result<LayoutSet> {
        let table = Table::read(path)?;
        let c = &self.layout_columns;
        let nl = Some(table.column(&c.newsletter_id)?);
        let (mid, x, y, w, h, words) = (
            Some(table.column(&c.msg_id)?),
            Some(table.column(&c.x)?),
            Some(table.column(&c.y)?),
            Some(table.column(&c.w)?),
            Some(table.column(&c.h)?),
            Some(table.column(&c.words)?),
        );
        let doc_col = table.optional_column(&c.doc_height);
        let mut grouped: BTreeMap<String, (Vec<MessageGeometry>, Option<f64>)> = BTreeMap::new();
        for (i, row) in table.rows.iter().enumerate() {
            let line = i + 2;
            let id = table.required(row, nl, &c.newsletter_id, line)?.to_string();
            let rect = Rect::new(
                table.number(row, x, &c.x, line)?,
                table.number(row, y, &c.y, line)?,
                table.number(row, w, &c.w, line)?,
                table.number(row, h, &c.h, line)?,
            );
            let geometry = MessageGeometry {
                msg_id: table.required(row, mid, &c.msg_id, line)?.to_string(),
                rect,
                words: table.number(row, words, &c.words, line)?,
            };
            let entry = grouped.entry(id).or_default();
            entry.0.push(geometry);
            if doc_col.and_then(|col| table.cell(row, col)).is_some() {
                let d: f64 = table.number(row, doc_col, &c.doc_height, line)?;
                entry.1 = Some(entry.1.map_or(d, |prev: f64| prev.max(d)));
            }
        }
        let mut set = LayoutSet::new();
        for (id, (mut messages, doc)) in grouped {
            messages.sort_by(|a, b| a.rect.y.total_cmp(&b.rect.y));
            let bottom = messages.iter().map(|m| m.rect.bottom()).fold(0.0, f64::max);
            let layout = NewsletterLayout::new(id.clone(), doc.unwrap_or(bottom), messages)
                .map_err(|e| anyhow!("{}: newsletter {id}: {e}", path.display()))?;
            set.insert(layout).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        }
        Ok(set)
    }

    #[allow(clippy::type_complexity)]
    fn read_events(&self, path: &Path) -> Result<(BTreeMap<String, Vec<InteractionEvent>>, HashMap<String, f64>)> {
        let table = Table::read(path)?;
        let c = &self.event_columns;
        let kinds = self.kind_lookup()?;
        let user = Some(table.column(&c.user)?);
        let t_col = Some(table.column(&c.t)?);
        let kind_col = Some(table.column(&c.kind)?);
        let opt = |name: &str| table.optional_column(name);
        let (x, y, sy, ww, wh, mid, vis, nl) = (
            opt(&c.x),
            opt(&c.y),
            opt(&c.scroll_y),
            opt(&c.win_w),
            opt(&c.win_h),
            opt(&c.msg_id),
            opt(&c.visible),
            opt(&c.newsletter_id),
        );
        let mut raw: BTreeMap<String, Vec<InteractionEvent>> = BTreeMap::new();
        for (i, row) in table.rows.iter().enumerate() {
            let line = i + 2;
            let source = table.required(row, kind_col, &c.kind, line)?;
            let Some(&kind) = kinds.get(source) else {
                if self.skip_unknown_kinds {
                    continue;
                }
                bail!("{} line {line}: no mapping for event kind {source:?}", path.display());
            };
            let t: f64 = table.number(row, t_col, &c.t, line)?;
            let kind = match kind {
                "open" => {
                    EventKind::Open { newsletter_id: table.required(row, nl, &c.newsletter_id, line)?.to_string() }
                }
                "close" => EventKind::Close,
                "move" => {
                    EventKind::Move { x: table.number(row, x, &c.x, line)?, y: table.number(row, y, &c.y, line)? }
                }
                "scroll" => EventKind::Scroll { scroll_y: table.number(row, sy, &c.scroll_y, line)? },
                "click" => EventKind::Click {
                    x: table.number(row, x, &c.x, line)?,
                    y: table.number(row, y, &c.y, line)?,
                    msg_id: mid.and_then(|col| table.cell(row, col)).map(str::to_string),
                },
                "viewport" => EventKind::Viewport {
                    win_w: table.number(row, ww, &c.win_w, line)?,
                    win_h: table.number(row, wh, &c.win_h, line)?,
                },
                _ => {
                    let text = table.required(row, vis, &c.visible, line)?;
                    let visible = parse_bool(text).ok_or_else(|| {
                        anyhow!("{} line {line}: `{}` is not a boolean: {text:?}", path.display(), c.visible)
                    })?;
                    EventKind::Visibility { visible }
                }
            };
            let user_id = table.required(row, user, &c.user, line)?.to_string();
            raw.entry(user_id).or_default().push(InteractionEvent::new(t * self.time_scale, kind));
        }
        let mut origins = HashMap::new();
        for (user_id, events) in raw.iter_mut() {
            events.sort_by(|a, b| a.t.total_cmp(&b.t));
            let origin = if self.rebase_time { events.first().map_or(0.0, |e| e.t) } else { 0.0 };
            for e in events.iter_mut() {
                e.t -= origin;
            }
            origins.insert(user_id.clone(), origin);
        }
        Ok((raw, origins))
    }

    fn read_labels(&self, path: &Path, origins: &HashMap<String, f64>) -> Result<BTreeMap<String, GazeLabels>> {
        let table = Table::read(path)?;
        let c = &self.label_columns;
        let (user, t_col) = (Some(table.column(&c.user)?), Some(table.column(&c.t)?));
        let mid = table.column(&c.msg_id)?;
        let mut out: BTreeMap<String, GazeLabels> = BTreeMap::new();
        for (i, row) in table.rows.iter().enumerate() {
            let line = i + 2;
            let user_id = table.required(row, user, &c.user, line)?;
            let t: f64 = table.number(row, t_col, &c.t, line)?;
            let second = (t * self.time_scale - origins.get(user_id).copied().unwrap_or(0.0)).floor() as i64;
            let msg = table.cell(row, mid).map(str::to_string);
            let labels = out.entry(user_id.to_string()).or_default();
            if let Some(prev) = labels.insert(second, msg.clone()) {
                if prev != msg {
                    bail!(
                        "{} line {line}: user {user_id} second {second} labeled twice with different messages",
                        path.display()
                    );
                }
            }
        }
        Ok(out)
    }
}
