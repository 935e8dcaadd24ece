//! Pixel-space rectangles shared by the condenser, masker and renderers.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in integer pixel coordinates (`x`, `y` is the top-left corner).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct BBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl BBox {
    pub const fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        Self { x, y, w, h }
    }

    /// Rectangle spanning the corners `(x0, y0)` inclusive to `(x1, y1)` exclusive.
    pub fn from_corners(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Self::new(x0, y0, x1.saturating_sub(x0), y1.saturating_sub(y0))
    }

    /// Converts a fractional box to pixels, rounding outward, then clips it to `canvas`.
    ///
    /// Boxes that fall entirely outside the canvas collapse to a zero-area box on its border.
    pub fn from_f64_outward(x: f64, y: f64, w: f64, h: f64, canvas: (u32, u32)) -> Self {
        let (cw, ch) = (f64::from(canvas.0), f64::from(canvas.1));
        let x0 = x.floor().clamp(0.0, cw);
        let y0 = y.floor().clamp(0.0, ch);
        let x1 = (x + w.max(0.0)).ceil().clamp(x0, cw);
        let y1 = (y + h.max(0.0)).ceil().clamp(y0, ch);
        Self::from_corners(x0 as u32, y0 as u32, x1 as u32, y1 as u32)
    }

    pub fn right(&self) -> u32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> u32 {
        self.y + self.h
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn is_empty(&self) -> bool {
        self.w == 0 || self.h == 0
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &BBox) -> BBox {
        BBox::from_corners(
            self.x.min(other.x),
            self.y.min(other.y),
            self.right().max(other.right()),
            self.bottom().max(other.bottom()),
        )
    }

    pub fn intersect(&self, other: &BBox) -> Option<BBox> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x0 < x1 && y0 < y1).then(|| BBox::from_corners(x0, y0, x1, y1))
    }

    /// Clips to a `width` x `height` canvas; may return a zero-area box on the border.
    pub fn clip_to(&self, width: u32, height: u32) -> BBox {
        let x0 = self.x.min(width);
        let y0 = self.y.min(height);
        BBox::from_corners(x0, y0, self.right().min(width), self.bottom().min(height))
    }

    pub fn fits_within(&self, width: u32, height: u32) -> bool {
        self.right() <= width && self.bottom() <= height
    }

    pub fn contains_point(&self, px: u32, py: u32) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }
}
