//! Deterministic raster drawing: wrapped text images, question banners, box outlines and fills.
//!
//! Text layout is a plain left-to-right advance with greedy word wrapping: no kerning,
//! ligatures or bidi. Point sizes convert to pixels at 96 dpi.

use std::fs;
use std::path::Path;

use ab_glyph::{point, Font, FontArc, PxScale, ScaleFont};
use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::BBox;

pub type Color = [u8; 3];

pub const WHITE: Color = [255, 255, 255];
pub const BLACK: Color = [0, 0, 0];

pub const BUILTIN_FONT_ID: &str = "dejavu-sans";
static BUILTIN_FONT: &[u8] = include_bytes!("../assets/DejaVuSans.ttf");

/// Warmup font sizes are drawn uniformly from this inclusive range (points).
pub const WARMUP_MIN_PT: u32 = 12;
pub const WARMUP_MAX_PT: u32 = 36;
pub const WARMUP_WIDTH: u32 = 640;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("nothing to render")]
    EmptyText,
    #[error("header text is empty or whitespace")]
    InvalidHeader,
    #[error("unknown font {0:?}")]
    UnknownFont(String),
    #[error("font file {path} could not be loaded: {reason}")]
    BadFont { path: String, reason: String },
    #[error("i/o error reading fonts: {0}")]
    Io(#[from] std::io::Error),
}

/// The fonts available to the renderers. The embedded font is always present and first.
#[derive(Clone)]
pub struct FontSet {
    fonts: Vec<(String, FontArc)>,
}

impl std::fmt::Debug for FontSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.ids()).finish()
    }
}

impl Default for FontSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl FontSet {
    pub fn builtin() -> Self {
        let font = FontArc::try_from_slice(BUILTIN_FONT).expect("embedded font parses");
        Self {
            fonts: vec![(BUILTIN_FONT_ID.to_owned(), font)],
        }
    }

    /// The embedded font plus every `.ttf`/`.otf` file in `dir`, ordered by file name.
    /// Font ids are the file stems.
    pub fn with_dir(dir: &Path) -> Result<Self, RenderError> {
        let mut set = Self::builtin();
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("ttf") || e.eq_ignore_ascii_case("otf"))
            })
            .collect();
        paths.sort();
        for path in paths {
            let bytes = fs::read(&path)?;
            let font = FontArc::try_from_vec(bytes).map_err(|e| RenderError::BadFont {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            if set.get(&id).is_none() {
                set.fonts.push((id, font));
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.fonts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fonts.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.fonts.iter().map(|(id, _)| id.as_str())
    }

    pub fn get(&self, id: &str) -> Option<&FontArc> {
        self.fonts.iter().find(|(i, _)| i == id).map(|(_, f)| f)
    }

    fn by_index(&self, i: usize) -> &str {
        &self.fonts[i].0
    }
}

/// Font, size and colors for one rendering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlyphSource {
    pub font_id: String,
    pub size_pt: u32,
    pub color: Color,
    pub background: Color,
}

impl GlyphSource {
    pub fn builtin(size_pt: u32) -> Self {
        Self {
            font_id: BUILTIN_FONT_ID.to_owned(),
            size_pt,
            color: BLACK,
            background: WHITE,
        }
    }
}

/// Random warmup style: uniform RGB text color, uniform font, uniform integer size in
/// `[12, 36]` pt, white background.
pub fn sample_warmup_style(seed: u64, fonts: &FontSet) -> GlyphSource {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let color: Color = rng.random();
    let font = fonts.by_index(rng.random_range(0..fonts.len()));
    let size_pt = rng.random_range(WARMUP_MIN_PT..=WARMUP_MAX_PT);
    GlyphSource {
        font_id: font.to_owned(),
        size_pt,
        color,
        background: WHITE,
    }
}

/// Scaled font metrics plus the layout routine.
struct Typesetter<'a> {
    font: &'a FontArc,
    scale: PxScale,
}

impl<'a> Typesetter<'a> {
    fn new(fonts: &'a FontSet, style: &GlyphSource) -> Result<Self, RenderError> {
        let font = fonts
            .get(&style.font_id)
            .ok_or_else(|| RenderError::UnknownFont(style.font_id.clone()))?;
        let scale = font
            .pt_to_px_scale(style.size_pt.max(1) as f32)
            .unwrap_or(PxScale::from(style.size_pt.max(1) as f32 * 96.0 / 72.0));
        Ok(Self { font, scale })
    }

    fn line_height(&self) -> u32 {
        let s = self.font.as_scaled(self.scale);
        (s.height() + s.line_gap()).ceil().max(1.0) as u32
    }

    fn ascent(&self) -> f32 {
        self.font.as_scaled(self.scale).ascent()
    }

    fn advance(&self, c: char) -> f32 {
        let s = self.font.as_scaled(self.scale);
        s.h_advance(s.glyph_id(c))
    }

    fn width(&self, text: &str) -> f32 {
        text.chars().map(|c| self.advance(c)).sum()
    }

    /// Greedy word wrap; words wider than `max_width` are broken between characters.
    fn wrap(&self, text: &str, max_width: f32) -> Vec<String> {
        let mut lines = Vec::new();
        let mut line = String::new();
        let mut line_w = 0.0f32;
        let space = self.advance(' ');
        for word in text.split(' ').filter(|w| !w.is_empty()) {
            let word_w = self.width(word);
            let joined = if line.is_empty() {
                word_w
            } else {
                line_w + space + word_w
            };
            if joined <= max_width {
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(word);
                line_w = joined;
                continue;
            }
            if !line.is_empty() {
                lines.push(std::mem::take(&mut line));
                line_w = 0.0;
            }
            if word_w <= max_width {
                line.push_str(word);
                line_w = word_w;
                continue;
            }
            for c in word.chars() {
                let w = self.advance(c);
                if !line.is_empty() && line_w + w > max_width {
                    lines.push(std::mem::take(&mut line));
                    line_w = 0.0;
                }
                line.push(c);
                line_w += w;
            }
        }
        if !line.is_empty() {
            lines.push(line);
        }
        lines
    }

    /// Draws `lines` starting at `top`, blending over existing pixels. Returns the number of
    /// characters the font had no glyph for.
    fn draw_lines(
        &self,
        image: &mut RgbImage,
        lines: &[String],
        left: f32,
        top: u32,
        color: Color,
    ) -> usize {
        let scaled = self.font.as_scaled(self.scale);
        let line_h = self.line_height();
        let mut missing = 0;
        for (i, line) in lines.iter().enumerate() {
            let baseline = (top + i as u32 * line_h) as f32 + self.ascent();
            let mut x = left;
            for c in line.chars() {
                let id = scaled.glyph_id(c);
                if id.0 == 0 && c != ' ' {
                    missing += 1;
                }
                let glyph = id.with_scale_and_position(self.scale, point(x, baseline));
                x += scaled.h_advance(id);
                let Some(outline) = scaled.outline_glyph(glyph) else {
                    continue;
                };
                let bounds = outline.px_bounds();
                outline.draw(|gx, gy, coverage| {
                    let px = bounds.min.x as i64 + i64::from(gx);
                    let py = bounds.min.y as i64 + i64::from(gy);
                    if px < 0
                        || py < 0
                        || px >= i64::from(image.width())
                        || py >= i64::from(image.height())
                    {
                        return;
                    }
                    let pixel = image.get_pixel_mut(px as u32, py as u32);
                    *pixel = blend(*pixel, color, coverage);
                });
            }
        }
        missing
    }
}

fn blend(under: Rgb<u8>, over: Color, coverage: f32) -> Rgb<u8> {
    let a = (coverage.clamp(0.0, 1.0) * 255.0).round() as u32;
    let mix = |u: u8, o: u8| ((u32::from(u) * (255 - a) + u32::from(o) * a + 127) / 255) as u8;
    Rgb([
        mix(under[0], over[0]),
        mix(under[1], over[1]),
        mix(under[2], over[2]),
    ])
}

/// Control characters become spaces so they cannot break layout.
fn printable(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RenderedText {
    pub image: RgbImage,
    pub lines: Vec<String>,
    /// Characters drawn with the font's replacement glyph.
    pub missing_glyphs: usize,
}

/// Renders `text` left-aligned and word-wrapped into an image exactly `width` pixels wide and
/// exactly as tall as its lines.
pub fn render_text_image(
    text: &str,
    style: &GlyphSource,
    width: u32,
    fonts: &FontSet,
) -> Result<RenderedText, RenderError> {
    let clean = printable(text);
    if clean.trim().is_empty() {
        return Err(RenderError::EmptyText);
    }
    let ts = Typesetter::new(fonts, style)?;
    let lines = ts.wrap(&clean, width as f32);
    let height = ts.line_height() * lines.len() as u32;
    let mut image = RgbImage::from_pixel(width, height, Rgb(style.background));
    let missing_glyphs = ts.draw_lines(&mut image, &lines, 0.0, 0, style.color);
    Ok(RenderedText {
        image,
        lines,
        missing_glyphs,
    })
}

/// Widest line of a rendering in pixels, by glyph advances.
pub fn line_advance(line: &str, style: &GlyphSource, fonts: &FontSet) -> Result<f32, RenderError> {
    Ok(Typesetter::new(fonts, style)?.width(line))
}

/// Line height in pixels for a style.
pub fn line_height(style: &GlyphSource, fonts: &FontSet) -> Result<u32, RenderError> {
    Ok(Typesetter::new(fonts, style)?.line_height())
}

/// Fixed banner style for question headers: black text on white with a black rule beneath.
pub const HEADER_SIZE_PT: u32 = 16;
pub const HEADER_PADDING: u32 = 8;
pub const HEADER_RULE: u32 = 2;

/// Height in pixels of the banner [`render_header`] would prepend.
pub fn header_height(width: u32, text: &str, fonts: &FontSet) -> Result<u32, RenderError> {
    Ok(header_layout(width, text, fonts)?.1)
}

fn header_layout(
    width: u32,
    text: &str,
    fonts: &FontSet,
) -> Result<(Vec<String>, u32), RenderError> {
    let clean = printable(text);
    if clean.trim().is_empty() {
        return Err(RenderError::InvalidHeader);
    }
    let style = GlyphSource::builtin(HEADER_SIZE_PT);
    let ts = Typesetter::new(fonts, &style)?;
    let inner = width.saturating_sub(2 * HEADER_PADDING).max(1);
    let lines = ts.wrap(&clean, inner as f32);
    let height = 2 * HEADER_PADDING + ts.line_height() * lines.len() as u32 + HEADER_RULE;
    Ok((lines, height))
}

/// Prepends a banner with `text` above `image`. The original pixels are copied unchanged into
/// the bottom of the output.
pub fn render_header(
    image: &RgbImage,
    text: &str,
    fonts: &FontSet,
) -> Result<RgbImage, RenderError> {
    let (lines, banner) = header_layout(image.width(), text, fonts)?;
    let style = GlyphSource::builtin(HEADER_SIZE_PT);
    let ts = Typesetter::new(fonts, &style)?;
    let (w, h) = image.dimensions();
    let mut out = RgbImage::from_pixel(w, banner + h, Rgb(WHITE));
    ts.draw_lines(
        &mut out,
        &lines,
        HEADER_PADDING as f32,
        HEADER_PADDING,
        BLACK,
    );
    fill_rect(
        &mut out,
        BBox::new(0, banner - HEADER_RULE, w, HEADER_RULE),
        BLACK,
    );
    image::imageops::replace(&mut out, image, 0, i64::from(banner));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxStyle {
    pub color: Color,
    pub stroke: u32,
}

impl Default for BoxStyle {
    fn default() -> Self {
        Self {
            color: [255, 0, 0],
            stroke: 2,
        }
    }
}

/// Outcome of [`draw_bbox`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxDraw {
    Drawn,
    /// The box extended past the image; only the visible part was outlined.
    Clipped,
    /// The box lies entirely outside the image; nothing was drawn.
    Outside,
}

/// The rectangle actually outlined for `bbox`: zero extents are raised to one pixel.
pub fn effective_box(bbox: BBox) -> BBox {
    BBox::new(bbox.x, bbox.y, bbox.w.max(1), bbox.h.max(1))
}

/// Outlines `bbox` with a stroke drawn inward from its edges. Pixels outside the four stroke
/// bands are left untouched.
pub fn draw_bbox(image: &mut RgbImage, bbox: BBox, style: &BoxStyle) -> BoxDraw {
    let wanted = effective_box(bbox);
    let canvas = BBox::new(0, 0, image.width(), image.height());
    let Some(b) = wanted.intersect(&canvas) else {
        return BoxDraw::Outside;
    };
    let s = style.stroke.max(1);
    let bands = [
        BBox::from_corners(b.x, b.y, b.right(), (b.y + s).min(b.bottom())),
        BBox::from_corners(
            b.x,
            b.bottom().saturating_sub(s).max(b.y),
            b.right(),
            b.bottom(),
        ),
        BBox::from_corners(b.x, b.y, (b.x + s).min(b.right()), b.bottom()),
        BBox::from_corners(
            b.right().saturating_sub(s).max(b.x),
            b.y,
            b.right(),
            b.bottom(),
        ),
    ];
    for band in bands {
        fill_rect(image, band, style.color);
    }
    if b == wanted {
        BoxDraw::Drawn
    } else {
        BoxDraw::Clipped
    }
}

/// Fills `rect` (clipped to the image) with a solid color.
pub fn fill_rect(image: &mut RgbImage, rect: BBox, color: Color) {
    let r = rect.clip_to(image.width(), image.height());
    for y in r.y..r.bottom() {
        for x in r.x..r.right() {
            image.put_pixel(x, y, Rgb(color));
        }
    }
}
