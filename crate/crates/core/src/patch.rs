//! Variable-resolution patch inputs.
//!
//! [`plan_grid`] rescales an image (up or down, preserving aspect ratio) so that the number of
//! whole `patch_size` patches is as large as possible without exceeding the sequence budget.
//! Each patch carries its (row, col) so the encoder can use 2D position embeddings. The
//! fixed-resolution baselines ([`plan_grid_padded`], [`plan_grid_stretched`]) are kept for
//! comparison experiments.

use image::imageops::{self, FilterType};
use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PATCH_SIZE: u32 = 16;
pub const DEFAULT_SEQUENCE_BUDGET: usize = 2048;
pub const DEFAULT_PAD_FILL: [u8; 3] = [0, 0, 0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    Variable,
    Padded,
    Stretched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Resampler {
    Nearest,
    #[default]
    Bilinear,
}

impl Resampler {
    fn filter(self) -> FilterType {
        match self {
            Resampler::Nearest => FilterType::Nearest,
            Resampler::Bilinear => FilterType::Triangle,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("side {side} is not a positive multiple of patch size {patch_size}")]
    InvalidSide { side: u32, patch_size: u32 },
    #[error("width, height, patch size and budget must all be at least 1")]
    ZeroDimension,
}

/// A planned patch layout for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub rows: u32,
    pub cols: u32,
    pub patch_size: u32,
    /// Uniform scale applied to the source (for `Stretched`, the horizontal one).
    pub scale: f64,
    pub target_w: u32,
    pub target_h: u32,
    /// Size the source is resampled to before any padding. Equals the target size except in
    /// `Padded` mode.
    pub content_w: u32,
    pub content_h: u32,
    pub mode: GridMode,
    /// Number of sequence slots; `rows * cols` never exceeds it.
    pub budget: usize,
    pub pad_fill: [u8; 3],
}

impl GridPlan {
    pub fn patches(&self) -> usize {
        self.rows as usize * self.cols as usize
    }

    /// Pixels of the target canvas not covered by resampled content.
    pub fn padded_pixels(&self) -> u64 {
        u64::from(self.target_w) * u64::from(self.target_h)
            - u64::from(self.content_w) * u64::from(self.content_h)
    }

    /// How much the content's aspect ratio differs from the source's (1.0 = undistorted).
    pub fn aspect_distortion(&self, width: u32, height: u32) -> f64 {
        let source = f64::from(width) / f64::from(height);
        let content = f64::from(self.content_w) / f64::from(self.content_h);
        source / content
    }

    pub fn with_pad_fill(mut self, fill: [u8; 3]) -> Self {
        self.pad_fill = fill;
        self
    }
}

/// Plans the largest aspect-preserving grid for a `width` x `height` image.
///
/// At scale `s` the grid is `max(1, floor(s*h/p))` rows by `max(1, floor(s*w/p))` columns. Both
/// counts only grow with `s`, so the best grid is found at a critical scale where one of them
/// steps. For each feasible row count `r` the admissible column counts form an interval in
/// integers, so the optimum is found exactly with integer arithmetic; the returned `scale` is
/// the smallest scale that realizes the grid.
pub fn plan_grid(
    width: u32,
    height: u32,
    patch_size: u32,
    budget: usize,
) -> Result<GridPlan, PatchError> {
    if width == 0 || height == 0 || patch_size == 0 || budget == 0 {
        return Err(PatchError::ZeroDimension);
    }
    let (w, h) = (u64::from(width), u64::from(height));
    // Rows near the real-valued optimum sqrt(budget*h/w) matter, but every row count up to the
    // budget is cheap to check and avoids edge cases at extreme aspect ratios.
    let max_rows = budget as u64;
    let mut best: Option<(u64, u64)> = None;
    for r in 1..=max_rows {
        // Scales giving exactly `r` rows: [r*p/h, (r+1)*p/h), or (0, 2p/h) for r = 1.
        let cols_lo = if r == 1 { 1 } else { (r * w / h).max(1) };
        let cols_hi = (((r + 1) * w - 1) / h).max(1);
        let cols = cols_hi.min(budget as u64 / r);
        if cols < cols_lo {
            continue;
        }
        if best.is_none_or(|(br, bc)| r * cols > br * bc) {
            best = Some((r, cols));
        }
    }
    let (rows, cols) = best.expect("a 1x1 grid is always feasible");
    let p = f64::from(patch_size);
    let row_scale = if rows == 1 {
        0.0
    } else {
        rows as f64 * p / h as f64
    };
    let col_scale = if cols == 1 {
        0.0
    } else {
        cols as f64 * p / w as f64
    };
    let mut scale = row_scale.max(col_scale);
    if scale == 0.0 {
        // 1x1: any scale up to the first step works; use the largest that keeps one patch.
        scale = p / h.max(w) as f64;
    }
    let (rows, cols) = (rows as u32, cols as u32);
    Ok(GridPlan {
        rows,
        cols,
        patch_size,
        scale,
        target_w: cols * patch_size,
        target_h: rows * patch_size,
        content_w: cols * patch_size,
        content_h: rows * patch_size,
        mode: GridMode::Variable,
        budget,
        pad_fill: DEFAULT_PAD_FILL,
    })
}

fn check_side(side: u32, patch_size: u32) -> Result<u32, PatchError> {
    if patch_size == 0 || side == 0 || side % patch_size != 0 {
        return Err(PatchError::InvalidSide { side, patch_size });
    }
    Ok(side / patch_size)
}

/// Fixed square canvas: scale the longer side to `side`, keep the aspect ratio and pad the rest.
pub fn plan_grid_padded(
    width: u32,
    height: u32,
    patch_size: u32,
    side: u32,
) -> Result<GridPlan, PatchError> {
    let n = check_side(side, patch_size)?;
    if width == 0 || height == 0 {
        return Err(PatchError::ZeroDimension);
    }
    let scale = f64::from(side) / f64::from(width.max(height));
    let fit = |d: u32| ((f64::from(d) * scale).round() as u32).clamp(1, side);
    Ok(GridPlan {
        rows: n,
        cols: n,
        patch_size,
        scale,
        target_w: side,
        target_h: side,
        content_w: fit(width),
        content_h: fit(height),
        mode: GridMode::Padded,
        budget: (n * n) as usize,
        pad_fill: DEFAULT_PAD_FILL,
    })
}

/// Fixed square canvas: resize both dimensions to `side`, ignoring aspect ratio.
pub fn plan_grid_stretched(
    width: u32,
    height: u32,
    patch_size: u32,
    side: u32,
) -> Result<GridPlan, PatchError> {
    let n = check_side(side, patch_size)?;
    if width == 0 || height == 0 {
        return Err(PatchError::ZeroDimension);
    }
    Ok(GridPlan {
        rows: n,
        cols: n,
        patch_size,
        scale: f64::from(side) / f64::from(width),
        target_w: side,
        target_h: side,
        content_w: side,
        content_h: side,
        mode: GridMode::Stretched,
        budget: (n * n) as usize,
        pad_fill: DEFAULT_PAD_FILL,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Patch {
    pub row: u32,
    pub col: u32,
    /// `patch_size * patch_size * 3` bytes, row-major RGB.
    pub pixels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchGrid {
    pub plan: GridPlan,
    /// Row-major.
    pub patches: Vec<Patch>,
    /// One entry per sequence slot; true for slots holding a patch.
    pub pad_mask: Vec<bool>,
}

/// Resamples `image` onto the plan's canvas (padding if the plan says so).
pub fn resample(image: &RgbImage, plan: &GridPlan, resampler: Resampler) -> RgbImage {
    let content = if image.dimensions() == (plan.content_w, plan.content_h) {
        image.clone()
    } else {
        imageops::resize(image, plan.content_w, plan.content_h, resampler.filter())
    };
    if (plan.content_w, plan.content_h) == (plan.target_w, plan.target_h) {
        return content;
    }
    let mut canvas = RgbImage::from_pixel(plan.target_w, plan.target_h, Rgb(plan.pad_fill));
    imageops::replace(&mut canvas, &content, 0, 0);
    canvas
}

/// Cuts the resampled image into non-overlapping patches in row-major order.
pub fn patchify(image: &RgbImage, plan: &GridPlan, resampler: Resampler) -> PatchGrid {
    let canvas = resample(image, plan, resampler);
    let p = plan.patch_size;
    let mut patches = Vec::with_capacity(plan.patches());
    for row in 0..plan.rows {
        for col in 0..plan.cols {
            let mut pixels = Vec::with_capacity((p * p * 3) as usize);
            for y in 0..p {
                for x in 0..p {
                    pixels.extend_from_slice(&canvas.get_pixel(col * p + x, row * p + y).0);
                }
            }
            patches.push(Patch { row, col, pixels });
        }
    }
    let slots = plan.budget.max(patches.len());
    let pad_mask = (0..slots).map(|i| i < patches.len()).collect();
    PatchGrid {
        plan: *plan,
        patches,
        pad_mask,
    }
}

impl PatchGrid {
    /// Reassembles the patches into the resampled canvas.
    pub fn reassemble(&self) -> RgbImage {
        let p = self.plan.patch_size;
        let mut out = RgbImage::new(self.plan.target_w, self.plan.target_h);
        for patch in &self.patches {
            for y in 0..p {
                for x in 0..p {
                    let i = ((y * p + x) * 3) as usize;
                    let px = [patch.pixels[i], patch.pixels[i + 1], patch.pixels[i + 2]];
                    out.put_pixel(patch.col * p + x, patch.row * p + y, Rgb(px));
                }
            }
        }
        out
    }

    pub fn padding_slots(&self) -> usize {
        self.pad_mask.iter().filter(|m| !**m).count()
    }

    /// Binary form: `"SPGRD" 0x00`, plan JSON as `len:u32le bytes`, slot count as `u32le`, then
    /// every patch's pixels in row-major patch order.
    pub fn encode(&self) -> Vec<u8> {
        let plan = serde_json::to_vec(&self.plan).expect("plan serializes");
        let mut out = Vec::with_capacity(16 + plan.len() + self.patches.len() * self.patch_bytes());
        out.extend_from_slice(GRID_MAGIC);
        out.extend_from_slice(&(plan.len() as u32).to_le_bytes());
        out.extend_from_slice(&plan);
        out.extend_from_slice(&(self.pad_mask.len() as u32).to_le_bytes());
        for p in &self.patches {
            out.extend_from_slice(&p.pixels);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Option<PatchGrid> {
        let rest = bytes.strip_prefix(GRID_MAGIC.as_slice())?;
        let (len, rest) = split_u32(rest)?;
        let plan: GridPlan = serde_json::from_slice(rest.get(..len)?).ok()?;
        let (slots, mut rest) = split_u32(rest.get(len..)?)?;
        let size = (plan.patch_size * plan.patch_size * 3) as usize;
        if slots < plan.patches() || rest.len() != plan.patches() * size {
            return None;
        }
        let mut patches = Vec::with_capacity(plan.patches());
        for row in 0..plan.rows {
            for col in 0..plan.cols {
                let (pixels, tail) = rest.split_at(size);
                patches.push(Patch {
                    row,
                    col,
                    pixels: pixels.to_vec(),
                });
                rest = tail;
            }
        }
        let pad_mask = (0..slots).map(|i| i < patches.len()).collect();
        Some(PatchGrid {
            plan,
            patches,
            pad_mask,
        })
    }

    fn patch_bytes(&self) -> usize {
        (self.plan.patch_size * self.plan.patch_size * 3) as usize
    }
}

const GRID_MAGIC: &[u8; 6] = b"SPGRD\0";

fn split_u32(bytes: &[u8]) -> Option<(usize, &[u8])> {
    let (head, rest) = bytes.split_first_chunk::<4>()?;
    Some((u32::from_le_bytes(*head) as usize, rest))
}
