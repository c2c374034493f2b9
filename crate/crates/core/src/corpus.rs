//! A corpus on disk: layouts, one event log per user and optional gaze labels,
//! tied together by `manifest.json`.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{
    attach_labels, event_log_to_string, parse_event_log, parse_label_log, sessionize, write_label_log, GazeLabels,
    InteractionEvent, LayoutSet, NewsletterLayout, ReadingSession,
};

pub const CORPUS_FORMAT: &str = "readtime-corpus/v1";

/// One participant's complete interaction log.
#[derive(Debug, Clone)]
pub struct UserLog {
    pub user_id: String,
    pub events: Vec<InteractionEvent>,
    pub labels: Option<GazeLabels>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub layouts: LayoutSet,
    pub users: Vec<UserLog>,
}

/// A user's sessions alongside the full log they were cut from.
#[derive(Debug, Clone)]
pub struct UserSessions<'a> {
    pub log: &'a UserLog,
    pub sessions: Vec<ReadingSession>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestNewsletter {
    pub newsletter_id: String,
    pub layout: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestUser {
    pub user_id: String,
    pub events: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    /// Free-form description, e.g. the simulated reader archetype.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub newsletters: Vec<ManifestNewsletter>,
    pub users: Vec<ManifestUser>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
}

impl Corpus {
    pub fn user_ids(&self) -> Vec<&str> {
        self.users.iter().map(|u| u.user_id.as_str()).collect()
    }

    pub fn has_labels(&self) -> bool {
        !self.users.is_empty() && self.users.iter().all(|u| u.labels.is_some())
    }

    /// Sessionizes every user and attaches labels where present.
    pub fn sessionize(&self) -> Result<Vec<UserSessions<'_>>> {
        self.users
            .iter()
            .map(|log| {
                let mut sessions = sessionize(&log.user_id, &log.events, &self.layouts)?;
                if let Some(labels) = &log.labels {
                    attach_labels(&mut sessions, labels)?;
                }
                Ok(UserSessions { log, sessions })
            })
            .collect()
    }

    pub fn load(dir: &Path) -> Result<(Self, Manifest)> {
        let manifest_path = dir.join("manifest.json");
        let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::json(&manifest_path, e))?;
        if manifest.format != CORPUS_FORMAT {
            return Err(Error::Schema { expected: CORPUS_FORMAT.into(), found: manifest.format.clone() });
        }
        let mut layouts = LayoutSet::new();
        for n in &manifest.newsletters {
            let layout = NewsletterLayout::load(&dir.join(&n.layout))?;
            if layout.newsletter_id != n.newsletter_id {
                return Err(Error::Structure(format!(
                    "{}: newsletter_id {} does not match manifest entry {}",
                    n.layout, layout.newsletter_id, n.newsletter_id
                )));
            }
            layouts.insert(layout)?;
        }
        let mut users = Vec::with_capacity(manifest.users.len());
        for u in &manifest.users {
            let path = dir.join(&u.events);
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let events = parse_event_log(BufReader::new(file)).map_err(|e| with_path(e, &path))?;
            let labels = match &u.labels {
                Some(rel) => {
                    let path = dir.join(rel);
                    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
                    Some(parse_label_log(BufReader::new(file)).map_err(|e| with_path(e, &path))?)
                }
                None => None,
            };
            users.push(UserLog { user_id: u.user_id.clone(), events, labels });
        }
        Ok((Corpus { layouts, users }, manifest))
    }

    /// Writes the corpus in canonical form. `notes` are attached per user in
    /// the manifest (same order as `self.users`) when provided.
    pub fn save(&self, dir: &Path, generator: Option<serde_json::Value>, notes: Option<&[String]>) -> Result<Manifest> {
        for sub in ["layouts", "events", "labels"] {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        let mut newsletters = Vec::new();
        for layout in self.layouts.iter() {
            let rel = format!("layouts/{}.json", layout.newsletter_id);
            write_file(&dir.join(&rel), (layout.to_json() + "\n").as_bytes())?;
            newsletters.push(ManifestNewsletter { newsletter_id: layout.newsletter_id.clone(), layout: rel });
        }
        let mut users = Vec::new();
        for (i, u) in self.users.iter().enumerate() {
            let events_rel = format!("events/{}.jsonl", u.user_id);
            write_file(&dir.join(&events_rel), event_log_to_string(&u.events).as_bytes())?;
            let labels_rel = match &u.labels {
                Some(labels) => {
                    let rel = format!("labels/{}.jsonl", u.user_id);
                    let mut buf = Vec::new();
                    write_label_log(&mut buf, labels).expect("writing to a Vec cannot fail");
                    write_file(&dir.join(&rel), &buf)?;
                    Some(rel)
                }
                None => None,
            };
            users.push(ManifestUser {
                user_id: u.user_id.clone(),
                events: events_rel,
                labels: labels_rel,
                note: notes.and_then(|n| n.get(i).cloned()),
            });
        }
        let manifest = Manifest { format: CORPUS_FORMAT.into(), newsletters, users, generator };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serialization is infallible");
        write_file(&dir.join("manifest.json"), (text + "\n").as_bytes())?;
        Ok(manifest)
    }
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        Error::Ordering { line, t, prev } => {
            Error::Structure(format!("{} line {line}: timestamp {t} earlier than {prev}", path.display()))
        }
        other => other,
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
