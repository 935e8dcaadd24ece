//! Captured pages: a full-page screenshot plus a geometry-annotated DOM dump.
//!
//! On disk a snapshot is a directory holding three files:
//!
//! ```text
//! <id>/manifest.json   {"url", "viewport_width", "capture_time", "screenshot_path", "dom_path"}
//! <id>/screenshot.png  lossless RGB(A) screenshot, width == viewport_width
//! <id>/dom.jsonl       one element per line:
//!                      {"id": 3, "tag": "p", "children": [4, 5], "visible": true,
//!                       "bbox": [x, y, w, h], "text": "...", "img_src": "...", "img_alt": "..."}
//! ```
//!
//! `bbox` is in screenshot pixels and may be fractional. `text` is the element's own direct
//! text; when an element has both text and element children the text is treated as preceding
//! the children. `text`, `img_src` and `img_alt` are optional, `children` defaults to empty.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::BBox;
use crate::parse_format::NodeId;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SCREENSHOT_FILE: &str = "screenshot.png";
pub const DOM_FILE: &str = "dom.jsonl";
pub const DEFAULT_VIEWPORT_WIDTH: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotManifest {
    pub url: String,
    #[serde(default = "default_viewport")]
    pub viewport_width: u32,
    #[serde(default)]
    pub capture_time: String,
    #[serde(default = "default_screenshot_path")]
    pub screenshot_path: String,
    #[serde(default = "default_dom_path")]
    pub dom_path: String,
}

fn default_viewport() -> u32 {
    DEFAULT_VIEWPORT_WIDTH
}
fn default_screenshot_path() -> String {
    SCREENSHOT_FILE.to_owned()
}
fn default_dom_path() -> String {
    DOM_FILE.to_owned()
}

impl SnapshotManifest {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            viewport_width: DEFAULT_VIEWPORT_WIDTH,
            capture_time: String::new(),
            screenshot_path: default_screenshot_path(),
            dom_path: default_dom_path(),
        }
    }
}

/// One line of `dom.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomRecord {
    pub id: u32,
    pub tag: String,
    #[serde(default)]
    pub children: Vec<u32>,
    pub visible: bool,
    pub bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub img_src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub img_alt: Option<String>,
}

/// A DOM element resolved into the snapshot arena.
#[derive(Debug, Clone, PartialEq)]
pub struct DomNode {
    pub id: NodeId,
    pub tag: String,
    pub visible: bool,
    /// Box as captured, possibly fractional or outside the canvas.
    pub raw_bbox: [f64; 4],
    /// Box rounded outward and clipped to the screenshot.
    pub bbox: BBox,
    pub text: Option<String>,
    pub img_src: Option<String>,
    pub img_alt: Option<String>,
    /// Arena indices of child elements, in document order.
    pub children: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("cannot decode screenshot {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("duplicate node id {0}")]
    DuplicateId(u32),
    #[error("node {parent} lists unknown child {child}")]
    UnknownChild { parent: u32, child: u32 },
    #[error("node {0} has more than one parent")]
    MultipleParents(u32),
    #[error("dom has no root")]
    NoRoot,
    #[error("dom has {0} roots, expected exactly one")]
    MultipleRoots(usize),
    #[error("dom contains a cycle")]
    Cycle,
}

/// A page as consumed by the condenser. Construction enforces the forest invariants
/// (unique ids, exactly one root, every node reachable).
#[derive(Debug, Clone)]
pub struct PageSnapshot {
    pub id: String,
    pub url: String,
    pub screenshot: RgbImage,
    nodes: Vec<DomNode>,
    root: usize,
}

impl PageSnapshot {
    pub fn new(
        id: impl Into<String>,
        url: impl Into<String>,
        screenshot: RgbImage,
        records: Vec<DomRecord>,
    ) -> Result<Self, SnapshotError> {
        let canvas = screenshot.dimensions();
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if index.insert(r.id, i).is_some() {
                return Err(SnapshotError::DuplicateId(r.id));
            }
        }
        let mut has_parent = vec![false; records.len()];
        let mut nodes = Vec::with_capacity(records.len());
        for r in records {
            let mut children = Vec::with_capacity(r.children.len());
            for c in &r.children {
                let &ci = index.get(c).ok_or(SnapshotError::UnknownChild {
                    parent: r.id,
                    child: *c,
                })?;
                if std::mem::replace(&mut has_parent[ci], true) {
                    return Err(SnapshotError::MultipleParents(*c));
                }
                children.push(ci);
            }
            let [x, y, w, h] = r.bbox;
            nodes.push(DomNode {
                id: NodeId(r.id),
                tag: r.tag,
                visible: r.visible,
                raw_bbox: r.bbox,
                bbox: BBox::from_f64_outward(x, y, w, h, canvas),
                text: r.text,
                img_src: r.img_src,
                img_alt: r.img_alt,
                children,
            });
        }
        let roots: Vec<usize> = (0..nodes.len()).filter(|&i| !has_parent[i]).collect();
        let root = match roots.as_slice() {
            [] => return Err(SnapshotError::NoRoot),
            [r] => *r,
            many => return Err(SnapshotError::MultipleRoots(many.len())),
        };
        // With one parent per node and a single root, unreachable nodes can only sit on cycles.
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        let mut reached = 0;
        while let Some(i) = stack.pop() {
            seen[i] = true;
            reached += 1;
            stack.extend(nodes[i].children.iter().copied());
        }
        if reached != nodes.len() {
            return Err(SnapshotError::Cycle);
        }
        Ok(Self {
            id: id.into(),
            url: url.into(),
            screenshot,
            nodes,
            root,
        })
    }

    pub fn nodes(&self) -> &[DomNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, index: usize) -> &DomNode {
        &self.nodes[index]
    }

    pub fn find(&self, id: NodeId) -> Option<&DomNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn width(&self) -> u32 {
        self.screenshot.width()
    }

    pub fn height(&self) -> u32 {
        self.screenshot.height()
    }

    /// Arena indices in document (pre-)order.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(self.nodes[i].children.iter().rev().copied());
        }
        order
    }

    /// Back to the on-disk line format, in arena order.
    pub fn to_records(&self) -> Vec<DomRecord> {
        self.nodes
            .iter()
            .map(|n| DomRecord {
                id: n.id.0,
                tag: n.tag.clone(),
                children: n.children.iter().map(|&c| self.nodes[c].id.0).collect(),
                visible: n.visible,
                bbox: n.raw_bbox,
                text: n.text.clone(),
                img_src: n.img_src.clone(),
                img_alt: n.img_alt.clone(),
            })
            .collect()
    }
}

/// Geometric and manifest checks that do not prevent condensation but flag a bad capture.
#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotIssue {
    WidthMismatch { viewport: u32, screenshot: u32 },
    VisibleBoxDegenerate { id: NodeId },
    VisibleBoxOutOfBounds { id: NodeId, bbox: [f64; 4] },
    NoVisibleNodes,
}

impl std::fmt::Display for SnapshotIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnapshotIssue::WidthMismatch {
                viewport,
                screenshot,
            } => {
                write!(
                    f,
                    "screenshot width {screenshot} != viewport width {viewport}"
                )
            }
            SnapshotIssue::VisibleBoxDegenerate { id } => {
                write!(f, "visible node {id} has a box with zero area")
            }
            SnapshotIssue::VisibleBoxOutOfBounds { id, bbox } => {
                write!(f, "visible node {id} box {bbox:?} leaves the screenshot")
            }
            SnapshotIssue::NoVisibleNodes => f.write_str("no visible nodes"),
        }
    }
}

/// Sub-pixel slack allowed when checking that visible boxes stay on the canvas.
const BOUNDS_SLACK: f64 = 0.5;

pub fn validate(snapshot: &PageSnapshot, manifest: &SnapshotManifest) -> Vec<SnapshotIssue> {
    let mut issues = Vec::new();
    let (w, h) = (f64::from(snapshot.width()), f64::from(snapshot.height()));
    if manifest.viewport_width != snapshot.width() {
        issues.push(SnapshotIssue::WidthMismatch {
            viewport: manifest.viewport_width,
            screenshot: snapshot.width(),
        });
    }
    let mut any_visible = false;
    for n in snapshot.nodes().iter().filter(|n| n.visible) {
        any_visible = true;
        let [x, y, bw, bh] = n.raw_bbox;
        if !(bw > 0.0 && bh > 0.0) {
            issues.push(SnapshotIssue::VisibleBoxDegenerate { id: n.id });
        } else if x < -BOUNDS_SLACK
            || y < -BOUNDS_SLACK
            || x + bw > w + BOUNDS_SLACK
            || y + bh > h + BOUNDS_SLACK
        {
            issues.push(SnapshotIssue::VisibleBoxOutOfBounds {
                id: n.id,
                bbox: n.raw_bbox,
            });
        }
    }
    if !any_visible {
        issues.push(SnapshotIssue::NoVisibleNodes);
    }
    issues
}

/// A snapshot directory loaded from disk.
#[derive(Debug, Clone)]
pub struct LoadedSnapshot {
    pub manifest: SnapshotManifest,
    pub snapshot: PageSnapshot,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SnapshotError + '_ {
    move |source| SnapshotError::Io {
        path: path.to_owned(),
        source,
    }
}

/// Loads `<dir>/manifest.json` and the files it references. The page id is the directory name.
pub fn load_snapshot_dir(dir: &Path) -> Result<LoadedSnapshot, SnapshotError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let raw = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
    let manifest: SnapshotManifest =
        serde_json::from_str(&raw).map_err(|source| SnapshotError::Json {
            path: manifest_path.clone(),
            line: 1,
            source,
        })?;

    let shot_path = dir.join(&manifest.screenshot_path);
    let screenshot = image::open(&shot_path)
        .map_err(|source| SnapshotError::Image {
            path: shot_path.clone(),
            source,
        })?
        .to_rgb8();

    let dom_path = dir.join(&manifest.dom_path);
    let file = fs::File::open(&dom_path).map_err(io_err(&dom_path))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&dom_path))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(
            serde_json::from_str(&line).map_err(|source| SnapshotError::Json {
                path: dom_path.clone(),
                line: i + 1,
                source,
            })?,
        );
    }

    let id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let snapshot = PageSnapshot::new(id, manifest.url.clone(), screenshot, records)?;
    Ok(LoadedSnapshot { manifest, snapshot })
}

/// Writes the three-file layout into `dir` (created if missing).
pub fn write_snapshot_dir(
    dir: &Path,
    manifest: &SnapshotManifest,
    snapshot: &PageSnapshot,
) -> Result<(), SnapshotError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))?;

    let shot_path = dir.join(&manifest.screenshot_path);
    snapshot
        .screenshot
        .save_with_format(&shot_path, image::ImageFormat::Png)
        .map_err(|source| SnapshotError::Image {
            path: shot_path.clone(),
            source,
        })?;

    let dom_path = dir.join(&manifest.dom_path);
    let file = fs::File::create(&dom_path).map_err(io_err(&dom_path))?;
    let mut out = BufWriter::new(file);
    for r in snapshot.to_records() {
        let line = serde_json::to_string(&r).expect("dom record serializes");
        writeln!(out, "{line}").map_err(io_err(&dom_path))?;
    }
    out.flush().map_err(io_err(&dom_path))
}

/// Snapshot directories directly under `root` (those containing a manifest), sorted by name.
pub fn list_snapshot_dirs(root: &Path) -> Result<Vec<PathBuf>, SnapshotError> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let path = entry.map_err(io_err(root))?.path();
        if path.join(MANIFEST_FILE).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}
