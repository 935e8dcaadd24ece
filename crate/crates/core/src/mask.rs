//! Span masking over the selected subtree's rendered text.
//!
//! Spans are whole words. Each step picks a text leaf with probability proportional to its
//! unmasked characters, draws a target length from a geometric distribution (capped at what
//! is still needed to reach the requested fraction), starts at a random unmasked word and
//! extends over following unmasked words until the target length is reached. Masks are
//! painted onto the screenshot; the target text is never changed.

use image::RgbImage;
use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Geometric;
use serde::{Deserialize, Serialize};

use crate::condense::RegionMap;
use crate::geom::BBox;
use crate::parse_format::{NodeContent, NodeId, ParseNode};
use crate::render::{fill_rect, Color};

pub const DEFAULT_MASK_FRACTION: f64 = 0.5;
pub const DEFAULT_MASK_COLOR: Color = [128, 128, 128];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskConfig {
    /// Mean span length in characters before word alignment.
    pub mean_span_chars: f64,
    /// Assumed glyph width as a fraction of line height, used to guess how a leaf's text wraps
    /// inside its box.
    pub glyph_aspect: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            mean_span_chars: 20.0,
            glyph_aspect: 0.5,
        }
    }
}

/// A masked character range `[char_start, char_end)` of one text leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskSpan {
    pub source_id: NodeId,
    pub char_start: usize,
    pub char_end: usize,
}

impl MaskSpan {
    pub fn len(&self) -> usize {
        self.char_end - self.char_start
    }

    pub fn is_empty(&self) -> bool {
        self.char_end == self.char_start
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MaskPlan {
    pub spans: Vec<MaskSpan>,
    pub rects: Vec<BBox>,
    /// Masked characters over all text characters of the subtree.
    pub masked_fraction: f64,
    pub total_chars: usize,
}

struct Leaf {
    id: NodeId,
    char_len: usize,
    /// Word boundaries as character ranges.
    words: Vec<(usize, usize)>,
    masked: Vec<bool>,
    unmasked_chars: usize,
}

fn word_ranges(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.chars().enumerate() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, text.chars().count()));
    }
    out
}

/// Chooses the spans to mask so that at least `fraction` of the subtree's text characters are
/// covered (or every word is). Deterministic in `seed`.
pub fn plan_masks(
    subtree: &ParseNode,
    regions: &RegionMap,
    fraction: f64,
    seed: u64,
    config: &MaskConfig,
) -> MaskPlan {
    let mut leaves = Vec::new();
    let mut total_chars = 0;
    for leaf in subtree.leaves() {
        let NodeContent::Text(text) = &leaf.content else {
            continue;
        };
        let char_len = text.chars().count();
        total_chars += char_len;
        // Leaves without a source node cannot be located on screen.
        let Some(id) = leaf.source_id else { continue };
        let words = word_ranges(text);
        let unmasked_chars = words.iter().map(|(s, e)| e - s).sum();
        leaves.push(Leaf {
            id,
            char_len,
            masked: vec![false; words.len()],
            words,
            unmasked_chars,
        });
    }

    let fraction = fraction.clamp(0.0, 1.0);
    let goal = (fraction * total_chars as f64).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let geometric =
        Geometric::new(1.0 / config.mean_span_chars.max(1.0)).expect("valid probability");
    let mut spans = Vec::new();
    let mut masked = 0usize;

    while masked < goal {
        let weights: Vec<usize> = leaves.iter().map(|l| l.unmasked_chars).collect();
        let Ok(pick) = WeightedIndex::new(&weights) else {
            break; // every word is masked
        };
        let leaf = &mut leaves[pick.sample(&mut rng)];
        let target = (1 + geometric.sample(&mut rng) as usize).min(goal - masked);

        let free: Vec<usize> = (0..leaf.words.len()).filter(|&w| !leaf.masked[w]).collect();
        let first = free[rng.random_range(0..free.len())];
        let mut last = first;
        while leaf.words[last].1 - leaf.words[first].0 < target
            && last + 1 < leaf.words.len()
            && !leaf.masked[last + 1]
        {
            last += 1;
        }
        let (start, end) = (leaf.words[first].0, leaf.words[last].1);
        for w in first..=last {
            leaf.masked[w] = true;
            leaf.unmasked_chars -= leaf.words[w].1 - leaf.words[w].0;
        }
        masked += end - start;
        spans.push(MaskSpan {
            source_id: leaf.id,
            char_start: start,
            char_end: end,
        });
    }

    let mut rects = Vec::new();
    for span in &spans {
        let leaf = leaves
            .iter()
            .find(|l| l.id == span.source_id)
            .expect("span leaf");
        if let Some(bbox) = regions.get(span.source_id) {
            rects.extend(span_rects(bbox, leaf.char_len, span, config.glyph_aspect));
        }
    }

    MaskPlan {
        spans,
        rects,
        masked_fraction: if total_chars == 0 {
            0.0
        } else {
            masked as f64 / total_chars as f64
        },
        total_chars,
    }
}

/// Estimated number of wrapped lines for `chars` characters in `bbox`, assuming each glyph is
/// `aspect` times as wide as a line is tall.
pub fn estimate_lines(bbox: BBox, chars: usize, aspect: f64) -> usize {
    if bbox.is_empty() || chars == 0 {
        return 1;
    }
    let k = (chars as f64 * aspect * f64::from(bbox.h) / f64::from(bbox.w))
        .sqrt()
        .round();
    (k as usize).clamp(1, chars)
}

/// Screen rectangles covering a span: the leaf box is cut into estimated lines of equal
/// character count, and each line is sliced horizontally in proportion to character offsets.
/// Edges round outward.
pub fn span_rects(bbox: BBox, char_len: usize, span: &MaskSpan, aspect: f64) -> Vec<BBox> {
    if char_len == 0 || span.is_empty() {
        return Vec::new();
    }
    let lines = estimate_lines(bbox, char_len, aspect);
    let per_line = char_len as f64 / lines as f64;
    let x_at = |offset: f64, ceil: bool| {
        let x = f64::from(bbox.x) + f64::from(bbox.w) * offset / per_line;
        (if ceil { x.ceil() } else { x.floor() }).clamp(f64::from(bbox.x), f64::from(bbox.right()))
            as u32
    };
    let y_at = |line: usize, ceil: bool| {
        let y = f64::from(bbox.y) + f64::from(bbox.h) * line as f64 / lines as f64;
        (if ceil { y.ceil() } else { y.floor() }).clamp(f64::from(bbox.y), f64::from(bbox.bottom()))
            as u32
    };

    let first_line = ((span.char_start as f64 / per_line).floor() as usize).min(lines - 1);
    let last_line = (((span.char_end - 1) as f64 / per_line).floor() as usize).min(lines - 1);
    let mut out = Vec::new();
    for line in first_line..=last_line {
        let line_start = per_line * line as f64;
        let from = if line == first_line {
            span.char_start as f64 - line_start
        } else {
            0.0
        };
        let to = if line == last_line {
            span.char_end as f64 - line_start
        } else {
            per_line
        };
        let rect = BBox::from_corners(
            x_at(from, false),
            y_at(line, false),
            x_at(to, true),
            y_at(line + 1, true),
        );
        if !rect.is_empty() {
            out.push(rect);
        }
    }
    out
}

/// Paints every rectangle of `plan` with `color`; all other pixels are untouched.
pub fn apply_masks(screenshot: &RgbImage, plan: &MaskPlan, color: Color) -> RgbImage {
    let mut out = screenshot.clone();
    for &rect in &plan.rects {
        fill_rect(&mut out, rect, color);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn leaf(text: &str, id: u32) -> ParseNode {
        ParseNode::text(text).with_source(NodeId(id))
    }

    fn regions_for(ids: &[u32]) -> RegionMap {
        let mut r = RegionMap::new(1000, 1000);
        for &id in ids {
            r.insert(NodeId(id), BBox::new(10, 20 * id, 300, 16));
        }
        r
    }

    #[test]
    fn zero_fraction_is_empty() {
        let plan = plan_masks(
            &leaf("hello world", 1),
            &regions_for(&[1]),
            0.0,
            3,
            &MaskConfig::default(),
        );
        assert!(plan.spans.is_empty());
        assert!(plan.rects.is_empty());
        assert_eq!(plan.masked_fraction, 0.0);
    }

    #[test]
    fn single_word_is_masked_whole() {
        let plan = plan_masks(
            &leaf("Python", 1),
            &regions_for(&[1]),
            0.5,
            11,
            &MaskConfig::default(),
        );
        assert_eq!(
            plan.spans,
            vec![MaskSpan {
                source_id: NodeId(1),
                char_start: 0,
                char_end: 6
            }]
        );
        assert_eq!(plan.masked_fraction, 1.0);
        assert_eq!(plan.rects, vec![BBox::new(10, 20, 300, 16)]);
    }

    #[test]
    fn deterministic_and_non_overlapping() {
        let tree = ParseNode::group(vec![
            leaf(
                "the quick brown fox jumps over the lazy dog again and again",
                1,
            ),
            leaf(
                "lorem ipsum dolor sit amet consectetur adipiscing elit sed do",
                2,
            ),
        ]);
        let regions = regions_for(&[1, 2]);
        let a = plan_masks(&tree, &regions, 0.5, 42, &MaskConfig::default());
        let b = plan_masks(&tree, &regions, 0.5, 42, &MaskConfig::default());
        assert_eq!(a, b);
        assert!(a.masked_fraction >= 0.5);
        for x in &a.spans {
            for y in &a.spans {
                if x != y && x.source_id == y.source_id {
                    assert!(x.char_end <= y.char_start || y.char_end <= x.char_start);
                }
            }
        }
    }

    #[test]
    fn multi_line_span_rects() {
        // 100 chars in a 200x80 box with aspect 0.5: sqrt(100*0.5*80/200) = 4.47 -> 4 lines.
        let bbox = BBox::new(0, 0, 200, 80);
        assert_eq!(estimate_lines(bbox, 100, 0.5), 4);
        let span = MaskSpan {
            source_id: NodeId(1),
            char_start: 20,
            char_end: 55,
        };
        let rects = span_rects(bbox, 100, &span, 0.5);
        assert_eq!(
            rects,
            vec![
                BBox::new(160, 0, 40, 20),
                BBox::new(0, 20, 200, 20),
                BBox::new(0, 40, 40, 20)
            ]
        );
    }

    #[test]
    fn apply_empty_plan_is_identity() {
        let img = RgbImage::from_fn(8, 8, |x, y| Rgb([x as u8, y as u8, 7]));
        assert_eq!(
            apply_masks(&img, &MaskPlan::default(), DEFAULT_MASK_COLOR),
            img
        );
    }

    #[test]
    fn full_leaf_rect_is_uniform() {
        let img = RgbImage::from_pixel(20, 20, Rgb([255, 255, 255]));
        let plan = MaskPlan {
            rects: vec![BBox::new(2, 3, 5, 4)],
            ..MaskPlan::default()
        };
        let out = apply_masks(&img, &plan, [9, 9, 9]);
        for (x, y, p) in out.enumerate_pixels() {
            let inside = (2..7).contains(&x) && (3..7).contains(&y);
            assert_eq!(p.0 == [9, 9, 9], inside);
        }
    }
}
