//! Per-second window state: what part of each message is on screen.

use serde::{Deserialize, Serialize};

use super::layout::NewsletterLayout;
use super::log::{EventKind, InteractionEvent};
use crate::geometry::{Point, Rect};

/// Window size assumed before any viewport event has been seen.
pub const DEFAULT_VIEWPORT: (u32, u32) = (1280, 800);

/// Browser view state carried from event to event.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ViewState {
    pub scroll_y: f64,
    pub viewport: Option<(u32, u32)>,
    /// Last known mouse position in document pixels.
    pub mouse: Option<Point>,
}

impl ViewState {
    pub fn apply(&mut self, ev: &InteractionEvent) {
        match &ev.kind {
            EventKind::Move { x, y } | EventKind::Click { x, y, .. } => self.mouse = Some(Point::new(*x, *y)),
            EventKind::Scroll { scroll_y } => self.scroll_y = *scroll_y,
            EventKind::Viewport { win_w, win_h } => self.viewport = Some((*win_w, *win_h)),
            EventKind::Open { .. } => {
                self.scroll_y = 0.0;
                self.mouse = None;
            }
            EventKind::Close | EventKind::Visibility { .. } => {}
        }
    }
}

/// One message as seen through the window at a given second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MessageView {
    /// Visible part in window coordinates; [`Rect::EMPTY`] when off-screen.
    pub visible_rect: Rect,
    /// Visible area divided by window area.
    pub window_share: f64,
    /// Vertical center of the visible part divided by window height, `None`
    /// when nothing is visible.
    pub center_offset: Option<f64>,
}

impl MessageView {
    pub fn is_visible(&self) -> bool {
        self.window_share > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSnapshot {
    pub t: i64,
    pub scroll_y: f64,
    pub win_w: f64,
    pub win_h: f64,
    /// Mouse in document pixels.
    pub mouse: Option<Point>,
    /// Set when no viewport event preceded `t` and [`DEFAULT_VIEWPORT`] was used.
    pub viewport_defaulted: bool,
    pub messages: Vec<MessageView>,
}

impl WindowSnapshot {
    pub fn compute(layout: &NewsletterLayout, t: i64, state: &ViewState) -> Self {
        let (w, h) = state.viewport.unwrap_or(DEFAULT_VIEWPORT);
        let (win_w, win_h) = (f64::from(w), f64::from(h));
        let window = Rect::new(0.0, state.scroll_y, win_w, win_h);
        let window_area = win_w * win_h;
        let messages = layout
            .messages
            .iter()
            .map(|m| {
                let clipped = m.rect.intersect(&window);
                if clipped.is_empty() {
                    MessageView { visible_rect: Rect::EMPTY, window_share: 0.0, center_offset: None }
                } else {
                    let visible = clipped.translate(0.0, -state.scroll_y);
                    MessageView {
                        visible_rect: visible,
                        window_share: visible.area() / window_area,
                        center_offset: Some((visible.y + visible.h / 2.0) / win_h),
                    }
                }
            })
            .collect();
        Self {
            t,
            scroll_y: state.scroll_y,
            win_w,
            win_h,
            mouse: state.mouse,
            viewport_defaulted: state.viewport.is_none(),
            messages,
        }
    }

    /// Mouse position translated into window coordinates.
    pub fn mouse_in_window(&self) -> Option<Point> {
        self.mouse.map(|p| Point::new(p.x, p.y - self.scroll_y))
    }

    pub fn window_center(&self) -> Point {
        Point::new(self.win_w / 2.0, self.win_h / 2.0)
    }

    pub fn window_diagonal(&self) -> f64 {
        self.win_w.hypot(self.win_h)
    }
}
