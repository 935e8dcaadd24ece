//! Synthetic parse trees and pages for tests, benchmarks and the runnable examples.
//!
//! Pages use a simple block flow layout: every element is stacked below its previous sibling
//! and indented inside its parent. Text is assumed to take 8x20 px per character cell.

use std::path::Path;

use image::{Rgb, RgbImage};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::geom::BBox;
use crate::parse_format::ParseNode;
use crate::render::fill_rect;
use crate::snapshot::{
    write_snapshot_dir, DomRecord, PageSnapshot, SnapshotError, SnapshotManifest,
};

const WORDS: &[&str] = &[
    "the",
    "of",
    "and",
    "to",
    "in",
    "is",
    "for",
    "on",
    "with",
    "as",
    "by",
    "at",
    "from",
    "page",
    "home",
    "about",
    "contact",
    "search",
    "news",
    "sports",
    "weather",
    "login",
    "account",
    "menu",
    "privacy",
    "terms",
    "products",
    "services",
    "support",
    "download",
    "pricing",
    "blog",
    "careers",
    "events",
    "gallery",
    "reviews",
    "shop",
    "cart",
    "checkout",
    "shipping",
    "returns",
    "language",
    "python",
    "java",
    "rust",
    "compiler",
    "library",
    "release",
    "version",
    "update",
    "community",
    "forum",
    "questions",
    "answers",
    "documentation",
    "tutorial",
    "example",
    "fitness",
    "recipes",
    "travel",
    "hotel",
    "flights",
    "museum",
    "tickets",
    "schedule",
    "results",
    "standings",
    "a<b",
    "x=y",
    "&",
    "C++",
    "café",
    "naïve",
    "東京",
    "2024",
    "$19.99",
    "50%",
    "#1",
    "e-mail",
];

const TAGS: &[&str] = &[
    "div", "section", "ul", "li", "p", "span", "article", "nav", "header", "footer",
];

const CHAR_W: f64 = 8.0;
const LINE_H: f64 = 20.0;
const GAP: f64 = 4.0;
const INDENT: f64 = 8.0;

/// A short random phrase drawn from a small web-flavoured vocabulary.
pub fn random_phrase<R: Rng + ?Sized>(rng: &mut R, max_words: usize) -> String {
    let n = rng.random_range(1..=max_words.max(1));
    (0..n)
        .map(|_| *WORDS.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Arbitrary non-empty text, biased toward characters that need escaping or normalization.
pub fn random_text<R: Rng + ?Sized>(rng: &mut R, max_chars: usize) -> String {
    const SPECIAL: &[char] = &[
        '<', '>', '\\', '=', ' ', ' ', '\u{a0}', '\n', '\t', '\u{1}', '\u{7f}', 'é', '漢', '😀',
        '_', '"', '\'',
    ];
    let n = rng.random_range(1..=max_chars.max(1));
    let mut s: String = (0..n)
        .map(|_| {
            if rng.random_bool(0.25) {
                *SPECIAL.choose(rng).expect("non-empty")
            } else {
                char::from(rng.random_range(b'a'..=b'z'))
            }
        })
        .collect();
    if rng.random_bool(0.05) {
        s.push_str(" img_alt=");
    }
    s
}

fn random_stub<R: Rng + ?Sized>(rng: &mut R) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_-";
    let n = rng.random_range(1..=12);
    (0..n)
        .map(|_| char::from(*ALPHABET.choose(rng).expect("non-empty")))
        .collect()
}

/// A random valid parse tree with between 1 and `max_nodes` nodes.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize) -> ParseNode {
    let mut remaining = rng.random_range(1..=max_nodes.max(1));
    tree_node(rng, &mut remaining, 0)
}

fn tree_node<R: Rng + ?Sized>(rng: &mut R, remaining: &mut usize, depth: usize) -> ParseNode {
    *remaining -= 1;
    if *remaining == 0 || depth >= 8 || rng.random_bool(0.4) {
        return match rng.random_range(0..10) {
            0..=6 => ParseNode::text(random_text(rng, 24)),
            7 => ParseNode::image(Some(&random_stub(rng)), None),
            8 => ParseNode::image(None, Some(&random_text(rng, 16))),
            _ => ParseNode::image(Some(&random_stub(rng)), Some(&random_text(rng, 16))),
        };
    }
    let wanted = rng.random_range(1..=(*remaining).min(6));
    let mut children = Vec::with_capacity(wanted);
    while children.len() < wanted && *remaining > 0 {
        children.push(tree_node(rng, remaining, depth + 1));
    }
    ParseNode::group(children)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub width: u32,
    pub max_depth: usize,
    pub max_children: usize,
    pub max_sections: usize,
    /// Keep adding top-level sections until the page holds this much visible text.
    pub min_text_chars: usize,
    /// Paint text lines and images onto the screenshot; otherwise it stays white.
    pub paint: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 1024,
            max_depth: 5,
            max_children: 5,
            max_sections: 6,
            min_text_chars: 0,
            paint: true,
        }
    }
}

struct PageBuilder<'a> {
    rng: ChaCha8Rng,
    config: &'a SynthConfig,
    records: Vec<DomRecord>,
    cursor: f64,
    visible_text: usize,
}

impl PageBuilder<'_> {
    fn push(&mut self, tag: &str, visible: bool, bbox: [f64; 4]) -> usize {
        let id = self.records.len() as u32;
        self.records.push(DomRecord {
            id,
            tag: tag.to_owned(),
            children: Vec::new(),
            visible,
            bbox,
            text: None,
            img_src: None,
            img_alt: None,
        });
        id as usize
    }

    fn text_block(&mut self, tag: &str, x: f64, w: f64, text: String) -> usize {
        let chars = text.chars().count() as f64;
        let per_line = (w / CHAR_W).floor().max(1.0);
        let lines = (chars / per_line).ceil().max(1.0);
        let bw = (chars * CHAR_W).min(w).max(CHAR_W);
        let i = self.push(tag, true, [x, self.cursor, bw, lines * LINE_H]);
        self.cursor += lines * LINE_H + GAP;
        self.visible_text += text
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .chars()
            .count();
        self.records[i].text = Some(text);
        i
    }

    fn hidden(&mut self) -> usize {
        let tag = *TAGS.choose(&mut self.rng).expect("tags");
        let i = self.push(tag, false, [0.0, 0.0, 0.0, 0.0]);
        self.records[i].text = Some(random_phrase(&mut self.rng, 6));
        if self.rng.random_bool(0.5) {
            let c = self.push("span", false, [0.0, 0.0, 0.0, 0.0]);
            self.records[c].text = Some(random_phrase(&mut self.rng, 4));
            self.records[i].children.push(c as u32);
        }
        i
    }

    fn element(&mut self, depth: usize, x: f64, w: f64) -> usize {
        let leaf = depth >= self.config.max_depth || w < 48.0 || self.rng.random_bool(0.35);
        if leaf {
            return match self.rng.random_range(0..100) {
                0..=59 => {
                    let mut text = random_phrase(&mut self.rng, 30);
                    if self.rng.random_bool(0.1) {
                        text = format!("  {}\n\t{}  ", text, random_phrase(&mut self.rng, 3));
                    }
                    self.text_block("p", x, w, text)
                }
                60..=79 => {
                    let iw = self.rng.random_range(16.0..=w.min(300.0));
                    let ih = self.rng.random_range(16.0..=200.0);
                    let i = self.push("img", true, [x, self.cursor, iw, ih]);
                    self.cursor += ih + GAP;
                    let stub = random_stub(&mut self.rng);
                    let src = match self.rng.random_range(0..4) {
                        0 => format!("/static/{stub}.png"),
                        1 => format!("https://cdn.example.com/img/{stub}.jpg?w=300#top"),
                        2 => format!("{stub}.svg"),
                        _ => "data:image/gif;base64,R0lGODlhAQABAAAAACw=".to_owned(),
                    };
                    self.records[i].img_src = Some(src);
                    if self.rng.random_bool(0.6) {
                        let alt = random_phrase(&mut self.rng, 4);
                        self.visible_text += alt.chars().count();
                        self.records[i].img_alt = Some(alt);
                    }
                    i
                }
                80..=91 => self.hidden(),
                _ => {
                    let i = self.push("div", true, [x, self.cursor, w, 10.0]);
                    self.cursor += 10.0 + GAP;
                    i
                }
            };
        }

        let tag = *TAGS.choose(&mut self.rng).expect("tags");
        let top = self.cursor;
        let i = self.push(tag, true, [x, top, w, 0.0]);
        self.cursor += GAP;
        let mut label = None;
        if self.rng.random_bool(0.1) {
            let text = random_phrase(&mut self.rng, 3);
            self.cursor += LINE_H;
            self.visible_text += text.chars().count();
            label = Some(text);
        }
        let n = self.rng.random_range(1..=self.config.max_children.max(1));
        let mut children = Vec::with_capacity(n);
        for _ in 0..n {
            children.push(self.element(depth + 1, x + INDENT, w - 2.0 * INDENT) as u32);
        }
        self.cursor += GAP;
        let r = &mut self.records[i];
        r.bbox[3] = self.cursor - top;
        r.children = children;
        r.text = label;
        i
    }
}

/// A random page of the given width; its height fits the laid-out content.
pub fn random_page(id: &str, seed: u64, config: &SynthConfig) -> PageSnapshot {
    let mut b = PageBuilder {
        rng: ChaCha8Rng::seed_from_u64(seed),
        config,
        records: Vec::new(),
        cursor: GAP,
        visible_text: 0,
    };
    let w = f64::from(config.width);
    let root = b.push("body", true, [0.0, 0.0, w, 0.0]);
    let sections = b.rng.random_range(1..=config.max_sections.max(1));
    let mut children = Vec::new();
    while children.len() < sections || b.visible_text < config.min_text_chars {
        children.push(b.element(1, INDENT, w - 2.0 * INDENT) as u32);
    }
    let height = (b.cursor + GAP).ceil();
    b.records[root].bbox[3] = height;
    b.records[root].children = children;

    let mut screenshot = RgbImage::from_pixel(config.width, height as u32, Rgb([255, 255, 255]));
    if config.paint {
        paint(&mut screenshot, &b.records, &mut b.rng);
    }
    PageSnapshot::new(
        id,
        format!("https://synthetic.example/{id}"),
        screenshot,
        b.records,
    )
    .expect("generated dom is a valid forest")
}

fn outward(r: &DomRecord, canvas: (u32, u32)) -> BBox {
    let [x, y, w, h] = r.bbox;
    BBox::from_f64_outward(x, y, w, h, canvas)
}

fn paint(img: &mut RgbImage, records: &[DomRecord], rng: &mut ChaCha8Rng) {
    let canvas = img.dimensions();
    for r in records.iter().filter(|r| r.visible) {
        let bbox = outward(r, canvas);
        if r.img_src.is_some() {
            let color = [rng.random(), rng.random(), rng.random()];
            fill_rect(img, bbox, color);
        } else if let Some(text) = &r.text {
            // Word-shaped dark bars, one character cell per character.
            let per_line = (f64::from(bbox.w) / CHAR_W).floor().max(1.0) as usize;
            let mut col = 0usize;
            let mut line = 0u32;
            for word in text.split_whitespace() {
                let len = word.chars().count();
                if col > 0 && col + len > per_line {
                    col = 0;
                    line += 1;
                }
                let x = bbox.x + (col as f64 * CHAR_W) as u32;
                let y = bbox.y + line * LINE_H as u32 + 5;
                let wpx = ((len.min(per_line) as f64) * CHAR_W) as u32 - 2;
                fill_rect(
                    img,
                    BBox::new(x, y, wpx, 10).clip_to(bbox.right(), bbox.bottom()),
                    [40, 40, 40],
                );
                col += len + 1;
            }
        }
    }
}

/// Writes `count` random pages as snapshot directories `page-0000`, `page-0001`, ... under `root`.
pub fn write_corpus(
    root: &Path,
    count: usize,
    seed: u64,
    config: &SynthConfig,
) -> Result<Vec<String>, SnapshotError> {
    let mut ids = Vec::with_capacity(count);
    for i in 0..count {
        let id = format!("page-{i:04}");
        let page = random_page(&id, seed.wrapping_add(i as u64), config);
        let mut manifest = SnapshotManifest::new(page.url.clone());
        manifest.viewport_width = config.width;
        write_snapshot_dir(&root.join(&id), &manifest, &page)?;
        ids.push(id);
    }
    Ok(ids)
}
