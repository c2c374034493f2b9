//! Seeded synthetic corpora: single-column newsletters, reader archetypes
//! that differ in how their mouse relates to their gaze, and per-second gaze
//! labels consistent with the emitted scroll trajectory.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregation::{classify_read_level, ReadLevel};
use crate::corpus::{Corpus, UserLog, UserSessions};
use crate::error::{Error, Result};
use crate::event::{EventKind, GazeLabels, InteractionEvent, LayoutSet, MessageGeometry, NewsletterLayout};
use crate::geometry::Rect;

const FULL_WINDOW: [f64; 2] = [0.05, 0.95];
/// Seconds per word at 200 wpm.
const SECS_PER_WORD: f64 = 0.3;

/// Single-column document geometry; message height grows linearly with words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayoutConfig {
    pub column_x: f64,
    pub column_w: f64,
    pub header_h: f64,
    pub footer_h: f64,
    pub gap: f64,
    pub base_height: f64,
    pub px_per_word: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            column_x: 100.0,
            column_w: 700.0,
            header_h: 120.0,
            footer_h: 200.0,
            gap: 20.0,
            base_height: 180.0,
            px_per_word: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum MousePolicy {
    /// Follows the reading line with Gaussian jitter `sigma` (pixels). Moves
    /// with `follow_prob` when the gazed message changes, otherwise with
    /// `move_prob` per second.
    TracksGaze { sigma: f64, move_prob: f64, follow_prob: f64 },
    /// Rests at a random point whose window height fraction lies in `band`.
    /// Placed when the newsletter opens and re-placed with `repark_prob` per
    /// second; otherwise moves only to click.
    Parked { repark_prob: f64, band: [f64; 2] },
    /// Jumps to a random window position with `move_prob` per second.
    Sporadic { move_prob: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReaderArchetype {
    pub name: String,
    pub mouse: MousePolicy,
    /// Probability of each interest class (skip, skim, detail) per message.
    pub interest: [f64; 3],
    /// Dwell-time multiplier of `words / 200 wpm` per interest class.
    pub dwell_factor: [f64; 3],
    /// Log-normal sigma of the dwell multiplier.
    pub dwell_sigma: f64,
    /// Probability of a click at the end of a skimmed or detailed message.
    pub click_prob: f64,
    /// Probability per second that gaze is off content.
    pub null_gaze_prob: f64,
    /// Probability per second of leaving the tab.
    pub interrupt_prob: f64,
    /// Gaze band as window fractions; leaving it triggers a scroll that puts
    /// the gaze at a uniform draw from `scroll_target`.
    pub comfort_band: [f64; 2],
    pub scroll_target: [f64; 2],
    /// A message whose top is above the window or below `start_max` when
    /// reading starts is first scrolled so its top sits at a uniform draw
    /// from `start_offset`.
    pub start_offset: [f64; 2],
    pub start_max: f64,
}

impl ReaderArchetype {
    fn with_mouse(name: &str, mouse: MousePolicy) -> Self {
        Self {
            name: name.into(),
            mouse,
            interest: [0.5, 0.25, 0.25],
            dwell_factor: [0.05, 0.7, 1.5],
            dwell_sigma: 0.25,
            click_prob: 0.25,
            null_gaze_prob: 0.04,
            interrupt_prob: 0.002,
            comfort_band: [0.0, 0.6],
            scroll_target: [0.1, 0.2],
            start_offset: [0.0, 0.02],
            start_max: 0.05,
        }
    }

    pub fn tracks_gaze(sigma: f64, follow_prob: f64) -> Self {
        Self::with_mouse("tracks_gaze", MousePolicy::TracksGaze { sigma, move_prob: 0.5, follow_prob })
    }

    pub fn parked() -> Self {
        Self::with_mouse("parked", MousePolicy::Parked { repark_prob: 0.05, band: [0.6, 0.95] })
    }

    pub fn sporadic() -> Self {
        Self::with_mouse("sporadic", MousePolicy::Sporadic { move_prob: 0.15 })
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("archetype {}: {m}", self.name)));
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !self.interest.iter().all(|&p| p >= 0.0) || (self.interest.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("interest probabilities must be non-negative and sum to 1");
        }
        if !self.dwell_factor.iter().all(|&f| f > 0.0) || !(self.dwell_sigma >= 0.0) {
            return bad("dwell factors must be positive and sigma non-negative");
        }
        if ![self.click_prob, self.null_gaze_prob, self.interrupt_prob].into_iter().all(prob)
            || self.null_gaze_prob >= 1.0
        {
            return bad("probabilities must lie in [0, 1) or [0, 1]");
        }
        let [lo, hi] = self.comfort_band;
        let [t0, t1] = self.scroll_target;
        if !(0.0 <= lo && lo < t0 && t0 <= t1 && t1 < hi && hi <= 1.0) {
            return bad("need 0 <= band low < scroll target range < band high <= 1");
        }
        let [s0, s1] = self.start_offset;
        if !(0.0 <= s0 && s0 <= s1 && s1 < self.start_max && self.start_max <= hi) {
            return bad("need 0 <= start_offset range < start_max <= band high");
        }
        match self.mouse {
            MousePolicy::TracksGaze { sigma, move_prob, follow_prob }
                if !(sigma >= 0.0) || !prob(move_prob) || !prob(follow_prob) =>
            {
                bad("tracks-gaze needs sigma >= 0 and probabilities in [0, 1]")
            }
            MousePolicy::Sporadic { move_prob: p } | MousePolicy::Parked { repark_prob: p, .. } if !prob(p) => {
                bad("mouse probabilities must lie in [0, 1]")
            }
            MousePolicy::Parked { band: [b0, b1], .. } if !(0.0 <= b0 && b0 <= b1 && b1 <= 1.0) => {
                bad("parking band must lie within [0, 1]")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureEntry {
    pub archetype: ReaderArchetype,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub n_users: usize,
    pub newsletters_per_user: usize,
    /// Distinct newsletters shared by all users; each user reads a random subset.
    pub newsletter_pool: usize,
    pub messages: [u32; 2],
    pub words: [u32; 2],
    /// Range of the per-session time budget in seconds.
    pub session_secs: [f64; 2],
    /// Idle gap range between sessions in seconds.
    pub gap_secs: [f64; 2],
    pub layout: LayoutConfig,
    /// Window sizes; each user gets one at random.
    pub viewports: Vec<[u32; 2]>,
    pub mixture: Vec<MixtureEntry>,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_users: 9,
            newsletters_per_user: 8,
            newsletter_pool: 16,
            messages: [3, 30],
            words: [10, 150],
            session_secs: [100.0, 220.0],
            gap_secs: [5.0, 60.0],
            layout: LayoutConfig::default(),
            viewports: vec![[1280, 800], [1440, 900], [1366, 768], [1536, 864]],
            mixture: vec![
                MixtureEntry { archetype: ReaderArchetype::tracks_gaze(80.0, 0.8), weight: 0.45 },
                MixtureEntry { archetype: ReaderArchetype::parked(), weight: 0.3 },
                MixtureEntry { archetype: ReaderArchetype::sporadic(), weight: 0.25 },
            ],
            seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_users == 0 || self.newsletters_per_user == 0 {
            return bad("n_users and newsletters_per_user must be positive");
        }
        if self.newsletter_pool < self.newsletters_per_user {
            return bad("newsletter_pool must be at least newsletters_per_user");
        }
        if self.messages[0] == 0 || self.messages[0] > self.messages[1] {
            return bad("messages range must be non-empty and start at 1 or more");
        }
        if self.words[0] == 0 || self.words[0] > self.words[1] {
            return bad("words range must be non-empty and start at 1 or more");
        }
        if !(self.session_secs[0] >= 5.0 && self.session_secs[0] <= self.session_secs[1]) {
            return bad("session_secs range must be non-empty and at least 5 s");
        }
        if !(self.gap_secs[0] >= 1.0 && self.gap_secs[0] <= self.gap_secs[1]) {
            return bad("gap_secs range must be non-empty and at least 1 s");
        }
        let l = &self.layout;
        if ![l.column_x, l.header_h, l.footer_h, l.gap, l.base_height, l.px_per_word].iter().all(|&v| v >= 0.0)
            || !(l.column_w > 0.0 && l.base_height + l.px_per_word > 0.0)
        {
            return bad("layout sizes must be non-negative with a positive column width and message height");
        }
        if self.viewports.is_empty() || self.viewports.iter().any(|v| v[0] == 0 || v[1] == 0) {
            return bad("viewports must be non-empty with positive sizes");
        }
        if self.mixture.is_empty()
            || self.mixture.iter().any(|m| !(m.weight >= 0.0))
            || (self.mixture.iter().map(|m| m.weight).sum::<f64>() - 1.0).abs() > 1e-9
        {
            return bad("mixture weights must be non-negative and sum to 1");
        }
        self.mixture.iter().try_for_each(|m| m.archetype.validate())
    }

    /// Archetype index per user: largest-remainder apportionment of the
    /// mixture, then interleaved so archetypes alternate across user ids.
    pub fn assign_archetypes(&self) -> Vec<usize> {
        let n = self.n_users;
        let quotas: Vec<f64> = self.mixture.iter().map(|m| m.weight * n as f64).collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b))
        });
        let short = n - counts.iter().sum::<usize>();
        for &i in order.iter().cycle().take(short) {
            counts[i] += 1;
        }
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            for (i, c) in counts.iter_mut().enumerate() {
                if *c > 0 {
                    *c -= 1;
                    out.push(i);
                }
            }
        }
        out
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..=hi.ln())).exp()
}

fn make_layout(config: &SimConfig, index: usize, rng: &mut ChaCha8Rng) -> NewsletterLayout {
    let n = rng.random_range(config.messages[0]..=config.messages[1]);
    let l = &config.layout;
    let mut y = l.header_h;
    let mut messages = Vec::with_capacity(n as usize);
    for m in 0..n {
        let words = log_uniform(rng, f64::from(config.words[0]), f64::from(config.words[1])).round().max(1.0) as u32;
        let h = l.base_height + l.px_per_word * f64::from(words);
        messages.push(MessageGeometry {
            msg_id: format!("m{m:02}"),
            rect: Rect::new(l.column_x, y, l.column_w, h),
            words,
        });
        y += h + l.gap;
    }
    NewsletterLayout::new(format!("nl{index:02}"), y - l.gap + l.footer_h, messages)
        .expect("generated layouts are valid")
}

/// Output of [`generate_corpus`]: the corpus and each user's archetype name.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub corpus: Corpus,
    pub archetypes: Vec<String>,
}

/// Generates a labeled corpus. Identical configs give identical corpora.
pub fn generate_corpus(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut layout_rng = stream(config.seed, 0);
    let layouts: Vec<NewsletterLayout> =
        (0..config.newsletter_pool).map(|i| make_layout(config, i, &mut layout_rng)).collect();
    let assignment = config.assign_archetypes();
    let users: Vec<UserLog> = (0..config.n_users)
        .into_par_iter()
        .map(|u| {
            let archetype = &config.mixture[assignment[u]].archetype;
            simulate_user(config, archetype, &layouts, u, &mut stream(config.seed, u as u64 + 1))
        })
        .collect();
    let layout_set: LayoutSet = layouts.into_iter().collect();
    let archetypes = assignment.iter().map(|&a| config.mixture[a].archetype.name.clone()).collect();
    Ok(SimOutput { corpus: Corpus { layouts: layout_set, users }, archetypes })
}

/// Whole-pixel, millisecond-resolution values keep the event files compact.
fn px(v: f64) -> f64 {
    v.round()
}

fn at(s: i64, frac: f64) -> f64 {
    s as f64 + frac
}

struct Reader<'a> {
    archetype: &'a ReaderArchetype,
    rng: &'a mut ChaCha8Rng,
    events: Vec<InteractionEvent>,
    labels: GazeLabels,
    win_w: f64,
    win_h: f64,
    mouse: Option<(f64, f64)>,
    scroll: f64,
}

impl Reader<'_> {
    fn push(&mut self, t: f64, kind: EventKind) {
        self.events.push(InteractionEvent::new(t, kind));
    }

    /// Moves along a short three-point path ending at `(x, y)` within second
    /// `s`, at fractions 0.3 to 0.5 (or 0.55 to 0.65 when `late`).
    fn move_to(&mut self, s: i64, x: f64, y: f64, late: bool) {
        let (x0, y0) = self.mouse.unwrap_or((x - 40.0, y - 30.0));
        let fracs = if late { [0.55, 0.6, 0.65] } else { [0.3, 0.4, 0.5] };
        for (k, frac) in [1.0, 2.0, 3.0].into_iter().zip(fracs) {
            let f = k / 3.0;
            let (mx, my) = (px(x0 + (x - x0) * f), px(y0 + (y - y0) * f));
            self.push(at(s, frac), EventKind::Move { x: mx, y: my });
        }
        self.mouse = Some((px(x), px(y)));
    }

    fn random_window_point(&mut self, band: [f64; 2]) -> (f64, f64) {
        let x = self.rng.random_range(0.05..0.95) * self.win_w;
        let y = self.scroll + uniform(self.rng, band) * self.win_h;
        (x, y)
    }

    fn scroll_to(&mut self, s: i64, target: f64) {
        let from = self.scroll;
        let steps = self.rng.random_range(1..=3);
        for k in 1..=steps {
            let v = px(from + (target - from) * k as f64 / steps as f64);
            self.push(at(s, 0.1 * k as f64), EventKind::Scroll { scroll_y: v });
        }
        self.scroll = px(target);
    }
}

struct Plan {
    index: usize,
    dwell: u32,
}

fn simulate_user(
    config: &SimConfig,
    archetype: &ReaderArchetype,
    layouts: &[NewsletterLayout],
    user_index: usize,
    rng: &mut ChaCha8Rng,
) -> UserLog {
    let [win_w, win_h] = config.viewports[rng.random_range(0..config.viewports.len())];
    let mut picks: Vec<usize> = sample(rng, layouts.len(), config.newsletters_per_user).into_vec();
    picks.sort_unstable();
    let order: Vec<usize> = sample(rng, picks.len(), picks.len()).into_iter().map(|i| picks[i]).collect();
    let mut reader = Reader {
        archetype,
        rng,
        events: Vec::new(),
        labels: BTreeMap::new(),
        win_w: f64::from(win_w),
        win_h: f64::from(win_h),
        mouse: None,
        scroll: 0.0,
    };
    let mut clock: i64 = reader.rng.random_range(0..30);
    for &nl in &order {
        clock = read_newsletter(config, &mut reader, &layouts[nl], (win_w, win_h), clock);
        clock += reader.rng.random_range(config.gap_secs[0]..=config.gap_secs[1]).round() as i64;
    }
    UserLog { user_id: format!("user{user_index:02}"), events: reader.events, labels: Some(reader.labels) }
}

/// Simulates one newsletter starting at second `start`; returns the second
/// after the close event.
fn read_newsletter(
    config: &SimConfig,
    r: &mut Reader<'_>,
    layout: &NewsletterLayout,
    viewport: (u32, u32),
    start: i64,
) -> i64 {
    let a = r.archetype;
    let budget = r.rng.random_range(config.session_secs[0]..=config.session_secs[1]).round() as i64;
    let noise = LogNormal::new(0.0, a.dwell_sigma).expect("sigma validated");
    let plans: Vec<Plan> = layout
        .messages
        .iter()
        .enumerate()
        .map(|(index, m)| {
            let u: f64 = r.rng.random();
            let class = if u < a.interest[0] {
                0
            } else if u < a.interest[0] + a.interest[1] {
                1
            } else {
                2
            };
            let secs = a.dwell_factor[class] * SECS_PER_WORD * f64::from(m.words) * noise.sample(r.rng);
            Plan { index, dwell: secs.round() as u32 }
        })
        .collect();

    r.push(at(start, 0.0), EventKind::Open { newsletter_id: layout.newsletter_id.clone() });
    r.push(at(start, 0.0), EventKind::Viewport { win_w: viewport.0, win_h: viewport.1 });
    r.scroll = 0.0;
    r.mouse = None;
    let max_scroll = (layout.doc_height - r.win_h).max(0.0);
    let jitter = Normal::new(0.0, 1.0).expect("unit normal");
    let mut s = start;
    let end = start + budget;
    let mut plan_i = 0;
    let mut spent = 0u32;
    let mut last_gazed: Option<usize> = None;
    let mut closing = 0;
    let mut visible = true;
    let rest_band = match a.mouse {
        MousePolicy::Parked { band, .. } => Some(band),
        MousePolicy::Sporadic { .. } => Some(FULL_WINDOW),
        MousePolicy::TracksGaze { .. } => None,
    };
    if let Some(band) = rest_band {
        let (x, y) = r.random_window_point(band);
        let (x, y) = (px(x), px(y));
        r.push(at(s, 0.05), EventKind::Move { x, y });
        r.mouse = Some((x, y));
    }
    while s < end {
        while plan_i < plans.len() && spent >= plans[plan_i].dwell {
            plan_i += 1;
            spent = 0;
        }
        if plan_i >= plans.len() {
            closing += 1;
            if closing > 2 {
                break;
            }
        }
        if !visible {
            // Returning from another tab resumes reading where it stopped.
            r.push(at(s, 0.05), EventKind::Visibility { visible: true });
            visible = true;
        }
        let current = plans.get(plan_i);
        let off_content = current.is_none() || r.rng.random_bool(a.null_gaze_prob);
        let gaze = match current {
            Some(p) => {
                let rect = layout.messages[p.index].rect;
                let frac = (f64::from(spent) + 0.5) / f64::from(p.dwell.max(1));
                Some((p.index, rect, rect.y + 8.0 + (rect.h - 16.0) * frac))
            }
            None => None,
        };
        if let Some((_, rect, gy)) = gaze {
            let [lo, hi] = a.comfort_band;
            let top = (rect.y - r.scroll) / r.win_h;
            let rel = (gy - r.scroll) / r.win_h;
            let anchor = if spent == 0 && (top < 0.0 || top > a.start_max) {
                Some(rect.y - uniform(r.rng, a.start_offset) * r.win_h)
            } else if rel < lo || rel > hi {
                Some(gy - uniform(r.rng, a.scroll_target) * r.win_h)
            } else {
                None
            };
            if let Some(y) = anchor {
                let target = y.clamp(0.0, max_scroll);
                if target != r.scroll {
                    r.scroll_to(s, target);
                }
            }
        }
        let label = match gaze {
            Some((idx, _, _)) if !off_content => Some(idx),
            _ => None,
        };
        r.labels.insert(s, label.map(|i| layout.messages[i].msg_id.clone()));

        match a.mouse {
            MousePolicy::TracksGaze { sigma, move_prob, follow_prob } => {
                if let (Some((idx, rect, gy)), false) = (gaze, off_content) {
                    let changed = last_gazed != Some(idx);
                    let p = if changed { follow_prob } else { move_prob };
                    if r.rng.random_bool(p) {
                        let mut x = rect.x + rect.w * r.rng.random_range(0.15..0.85) + sigma * jitter.sample(r.rng);
                        let mut y = gy + sigma * jitter.sample(r.rng);
                        if sigma == 0.0 {
                            x = x.clamp(rect.x + 1.0, rect.right() - 1.0);
                            y = y.clamp(rect.y + 1.0, rect.bottom() - 1.0);
                        }
                        x = x.clamp(1.0, r.win_w - 1.0);
                        y = y.clamp(r.scroll + 1.0, r.scroll + r.win_h - 1.0);
                        r.move_to(s, x, y, false);
                    }
                }
            }
            MousePolicy::Sporadic { move_prob } => {
                if r.rng.random_bool(move_prob) {
                    let (x, y) = r.random_window_point(FULL_WINDOW);
                    r.move_to(s, x, y, false);
                }
            }
            MousePolicy::Parked { repark_prob, band } => {
                if r.rng.random_bool(repark_prob) {
                    let (x, y) = r.random_window_point(band);
                    r.move_to(s, x, y, false);
                }
            }
        }

        if let Some(p) = current {
            if !off_content {
                spent += 1;
                let finished = spent >= p.dwell;
                let m = &layout.messages[p.index];
                let level = classify_read_level(f64::from(p.dwell), m.words).unwrap_or(ReadLevel::Skip);
                if finished && level.is_read() && r.rng.random_bool(a.click_prob) {
                    let x = m.rect.x + m.rect.w * r.rng.random_range(0.2..0.8);
                    let y = (m.rect.y + m.rect.h * r.rng.random_range(0.2..0.8))
                        .clamp(r.scroll + 1.0, r.scroll + r.win_h - 1.0);
                    r.move_to(s, x, y, true);
                    let (cx, cy) = r.mouse.expect("just moved");
                    let inside = cx >= m.rect.x && cx < m.rect.right() && cy >= m.rect.y && cy < m.rect.bottom();
                    r.push(at(s, 0.7), EventKind::Click { x: cx, y: cy, msg_id: inside.then(|| m.msg_id.clone()) });
                }
            }
            last_gazed = if off_content { last_gazed } else { Some(p.index) };
        }

        if s + 1 < end && closing == 0 && r.rng.random_bool(a.interrupt_prob) {
            r.push(at(s, 0.9), EventKind::Visibility { visible: false });
            visible = false;
            s += r.rng.random_range(5..=20);
        }
        s += 1;
    }
    if !visible {
        r.push(at(s, 0.05), EventKind::Visibility { visible: true });
        r.labels.insert(s, None);
        s += 1;
    }
    r.push(at(s - 1, 0.95), EventKind::Close);
    s
}

/// Summary counts of a labeled or unlabeled corpus.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_users: usize,
    pub n_sessions: usize,
    pub n_session_seconds: usize,
    /// (message, second) pairs.
    pub datapoints: usize,
    /// Datapoints whose message is gazed at.
    pub positives: usize,
    pub positive_rate: Option<f64>,
    /// Seconds with a gaze label naming a message.
    pub gazed_seconds: usize,
    /// (message, session) counts by true read level: skip, skim, detail.
    pub level_counts: [usize; 3],
    pub sessions_per_user: BTreeMap<String, usize>,
}

pub fn corpus_stats(users: &[UserSessions<'_>]) -> Result<CorpusStats> {
    let mut st = CorpusStats { n_users: users.len(), ..CorpusStats::default() };
    for u in users {
        st.sessions_per_user.insert(u.log.user_id.clone(), u.sessions.len());
        for s in &u.sessions {
            st.n_sessions += 1;
            st.n_session_seconds += s.len_secs();
            st.datapoints += s.len_secs() * s.layout.len();
            if let Some(labels) = &s.labels {
                let gazed = labels.iter().filter(|l| l.is_some()).count();
                st.gazed_seconds += gazed;
                st.positives += gazed;
            }
            if let Some(secs) = s.true_reading_seconds() {
                for (m, n) in s.layout.messages.iter().zip(secs) {
                    st.level_counts[classify_read_level(f64::from(n), m.words)?.index()] += 1;
                }
            }
        }
    }
    st.positive_rate = (st.datapoints > 0).then(|| st.positives as f64 / st.datapoints as f64);
    Ok(st)
}
