//! Newsletter geometry: one bounding box and word count per message.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// A message's bounding box in document pixels and its word count.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageGeometry {
    pub msg_id: String,
    pub rect: Rect,
    pub words: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewsletterLayout {
    pub newsletter_id: String,
    pub doc_height: f64,
    pub messages: Vec<MessageGeometry>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMessage {
    msg_id: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    words: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    newsletter_id: String,
    doc_height: f64,
    messages: Vec<RawMessage>,
}

impl NewsletterLayout {
    pub fn new(newsletter_id: impl Into<String>, doc_height: f64, messages: Vec<MessageGeometry>) -> Result<Self> {
        let newsletter_id = newsletter_id.into();
        let bad = |msg: String| Error::Structure(format!("layout {newsletter_id}: {msg}"));
        if messages.is_empty() {
            return Err(bad("needs at least one message".into()));
        }
        if !(doc_height.is_finite() && doc_height > 0.0) {
            return Err(bad(format!("doc_height must be positive, got {doc_height}")));
        }
        let mut index = HashMap::with_capacity(messages.len());
        for (i, m) in messages.iter().enumerate() {
            let r = &m.rect;
            if ![r.x, r.y, r.w, r.h].iter().all(|v| v.is_finite()) || r.w <= 0.0 || r.h <= 0.0 {
                return Err(bad(format!("message {} has a degenerate rect", m.msg_id)));
            }
            if m.words == 0 {
                return Err(bad(format!("message {} has zero words", m.msg_id)));
            }
            if r.y < 0.0 || r.bottom() > doc_height {
                return Err(bad(format!("message {} extends outside [0, doc_height]", m.msg_id)));
            }
            if index.insert(m.msg_id.clone(), i).is_some() {
                return Err(bad(format!("duplicate msg_id {}", m.msg_id)));
            }
        }
        Ok(Self { newsletter_id, doc_height, messages, index })
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn index_of(&self, msg_id: &str) -> Result<usize> {
        self.index.get(msg_id).copied().ok_or_else(|| Error::lookup("msg_id", msg_id))
    }

    pub fn message(&self, msg_id: &str) -> Result<&MessageGeometry> {
        Ok(&self.messages[self.index_of(msg_id)?])
    }

    /// True when no two message rectangles overlap with positive area.
    pub fn is_disjoint(&self) -> bool {
        let m = &self.messages;
        (0..m.len()).all(|i| ((i + 1)..m.len()).all(|j| m[i].rect.intersect(&m[j].rect).is_empty()))
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let raw: RawLayout = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let messages = raw
            .messages
            .into_iter()
            .map(|m| MessageGeometry { msg_id: m.msg_id, rect: Rect::new(m.x, m.y, m.w, m.h), words: m.words })
            .collect();
        Self::new(raw.newsletter_id, raw.doc_height, messages).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let raw = RawLayout {
            newsletter_id: self.newsletter_id.clone(),
            doc_height: self.doc_height,
            messages: self
                .messages
                .iter()
                .map(|m| RawMessage {
                    msg_id: m.msg_id.clone(),
                    x: m.rect.x,
                    y: m.rect.y,
                    w: m.rect.w,
                    h: m.rect.h,
                    words: m.words,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("layout serialization is infallible")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|message| Error::Structure(format!("{}: {message}", path.display())))
    }
}

/// Layouts keyed by newsletter id.
#[derive(Debug, Clone, Default)]
pub struct LayoutSet {
    layouts: BTreeMap<String, Arc<NewsletterLayout>>,
}

impl LayoutSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, layout: NewsletterLayout) -> Result<()> {
        let id = layout.newsletter_id.clone();
        if self.layouts.insert(id.clone(), Arc::new(layout)).is_some() {
            return Err(Error::Structure(format!("duplicate newsletter_id {id}")));
        }
        Ok(())
    }

    pub fn get(&self, newsletter_id: &str) -> Result<&Arc<NewsletterLayout>> {
        self.layouts.get(newsletter_id).ok_or_else(|| Error::lookup("newsletter_id", newsletter_id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<NewsletterLayout>> {
        self.layouts.values()
    }

    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }
}

impl FromIterator<NewsletterLayout> for LayoutSet {
    fn from_iter<T: IntoIterator<Item = NewsletterLayout>>(iter: T) -> Self {
        let mut set = LayoutSet::new();
        for layout in iter {
            set.layouts.insert(layout.newsletter_id.clone(), Arc::new(layout));
        }
        set
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(id: &str, y: f64, h: f64) -> MessageGeometry {
        MessageGeometry { msg_id: id.into(), rect: Rect::new(0.0, y, 100.0, h), words: 10 }
    }

    #[test]
    fn rejects_duplicate_ids() {
        assert!(NewsletterLayout::new("n", 100.0, vec![msg("a", 0.0, 10.0), msg("a", 20.0, 10.0)]).is_err());
    }

    #[test]
    fn rejects_rect_below_document() {
        assert!(NewsletterLayout::new("n", 100.0, vec![msg("a", 95.0, 10.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let layout = NewsletterLayout::new("n1", 500.0, vec![msg("a", 0.0, 100.0), msg("b", 120.0, 80.0)]).unwrap();
        let back = NewsletterLayout::from_json(&layout.to_json()).unwrap();
        assert_eq!(layout, back);
        assert!(back.is_disjoint());
        assert_eq!(back.index_of("b").unwrap(), 1);
        assert!(back.index_of("zzz").is_err());
    }
}
