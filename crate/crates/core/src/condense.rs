//! DOM condensation: snapshot DOM in, parse tree plus leaf regions out.
//!
//! Two reduction rules are applied bottom-up in a single pass:
//!
//! 1. a node survives only if it is visible or has a visible descendant, and only a visible
//!    node contributes its own payload (text, or image filename stub and alt-text);
//! 2. a node without payload that is left with exactly one child is replaced by that child,
//!    which removes chains of wrapper elements.
//!
//! Nodes left with neither payload nor children contribute nothing. A node with payload and
//! children becomes a group whose first entries are its own text/image leaves.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geom::BBox;
use crate::parse_format::{NodeContent, NodeId, ParseNode};
use crate::snapshot::{DomNode, PageSnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CondenseError {
    #[error("page has no visible content")]
    EmptyTree,
}

/// Pixel boxes for the nodes of a condensed tree, keyed by their source DOM node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegionMap {
    canvas: (u32, u32),
    boxes: BTreeMap<NodeId, BBox>,
}

impl RegionMap {
    pub fn new(canvas_width: u32, canvas_height: u32) -> Self {
        Self {
            canvas: (canvas_width, canvas_height),
            boxes: BTreeMap::new(),
        }
    }

    /// Records `bbox` clipped to the canvas.
    pub fn insert(&mut self, id: NodeId, bbox: BBox) {
        let (w, h) = self.canvas;
        self.boxes.insert(id, bbox.clip_to(w, h));
    }

    pub fn get(&self, id: NodeId) -> Option<BBox> {
        self.boxes.get(&id).copied()
    }

    pub fn canvas(&self) -> (u32, u32) {
        self.canvas
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, BBox)> + '_ {
        self.boxes.iter().map(|(&k, &v)| (k, v))
    }

    /// Union of the boxes of every leaf under `node` that has an entry, clipped to the canvas.
    pub fn leaf_union(&self, node: &ParseNode) -> Option<BBox> {
        node.leaves()
            .into_iter()
            .filter_map(|leaf| leaf.source_id.and_then(|id| self.get(id)))
            .reduce(|a, b| a.union(&b))
            .map(|b| b.clip_to(self.canvas.0, self.canvas.1))
    }
}

/// Collapses runs of ASCII whitespace to single spaces and trims. Other whitespace such as
/// U+00A0 is kept as content.
pub fn normalize_text(text: &str) -> String {
    text.split(|c: char| c.is_ascii_whitespace())
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn meaningful(text: &str) -> Option<String> {
    let t = normalize_text(text);
    (!t.chars().all(char::is_whitespace)).then_some(t)
}

/// Filename stub of an image URL: last path segment without query, fragment or extension.
///
/// ```
/// use screenparse::condense::image_stub;
/// assert_eq!(image_stub("https://x.org/a/py_logo.png?v=2").as_deref(), Some("py_logo"));
/// assert_eq!(image_stub("/wp/cropped-blogheader.jpg").as_deref(), Some("cropped-blogheader"));
/// assert_eq!(image_stub("data:image/png;base64,AAAA"), None);
/// ```
pub fn image_stub(src: &str) -> Option<String> {
    let src = src.trim();
    if src.starts_with("data:") {
        return None;
    }
    let path = src.split(['?', '#']).next().unwrap_or_default();
    let base = path.rsplit(['/', '\\']).next().unwrap_or_default();
    let stem = match base.rfind('.') {
        Some(i) if i > 0 => &base[..i],
        _ => base,
    };
    meaningful(stem)
}

/// The node's own leaves: its text, then its image. Invisible nodes have none.
fn payload(node: &DomNode) -> Vec<ParseNode> {
    if !node.visible {
        return Vec::new();
    }
    let mut out = Vec::new();
    if let Some(text) = node.text.as_deref().and_then(meaningful) {
        out.push(ParseNode::text(text).with_source(node.id));
    }
    let src = node.img_src.as_deref().and_then(image_stub);
    let alt = node.img_alt.as_deref().and_then(meaningful);
    if src.is_some() || alt.is_some() {
        out.push(ParseNode {
            content: NodeContent::Image { src, alt },
            source_id: Some(node.id),
        });
    }
    out
}

/// Condenses the snapshot DOM. Every leaf of the result has an entry in the returned map.
pub fn condense(snapshot: &PageSnapshot) -> Result<(ParseNode, RegionMap), CondenseError> {
    let mut regions = RegionMap::new(snapshot.width(), snapshot.height());
    let order = snapshot.preorder();
    let mut built: Vec<Option<ParseNode>> = vec![None; snapshot.nodes().len()];

    for &i in order.iter().rev() {
        let node = snapshot.node(i);
        let own = payload(node);
        let has_payload = !own.is_empty();
        let mut items = own;
        items.extend(node.children.iter().filter_map(|&c| built[c].take()));

        built[i] = match items.len() {
            0 => None,
            // A lone payload leaf, or a wrapper replaced by its only child.
            1 => items.pop(),
            _ => Some(ParseNode::group(items).with_source(node.id)),
        };
        if has_payload
            || built[i]
                .as_ref()
                .is_some_and(|b| b.source_id == Some(node.id))
        {
            regions.insert(node.id, node.bbox);
        }
    }

    built[snapshot.root()]
        .take()
        .map(|tree| (tree, regions))
        .ok_or(CondenseError::EmptyTree)
}
