//! The simplified-HTML parse tree and its bracketed text grammar.
//!
//! Every node renders as `<BODY>`:
//!
//! * a text node's body is its escaped text,
//! * an image node's body is `img_src=STUB`, `img_alt=TEXT`, or both separated by one space,
//! * a group's body is its children's renderings joined by single spaces.
//!
//! Inside text and attribute values the reserved characters `<`, `>`, `\` and `=` are escaped
//! with a backslash. C0/C1 control characters and U+00A0 are written as `\xHH` (lowercase hex).
//! Decoding is strict: only the canonical form is accepted, so every valid string maps to exactly
//! one tree. Whitespace between sibling nodes is insignificant on input and is a single space
//! on output.
//!
//! ```
//! use screenparse::parse_format::{deserialize, serialize, ParseNode};
//!
//! let tree = ParseNode::group(vec![
//!     ParseNode::text("Python"),
//!     ParseNode::image(Some("py_logo"), Some("Python")),
//! ]);
//! let s = serialize(&tree);
//! assert_eq!(s, "<<Python> <img_src=py_logo img_alt=Python>>");
//! assert_eq!(deserialize(&s).unwrap(), tree);
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of the snapshot DOM node a parse node was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeContent {
    Text(String),
    Image {
        src: Option<String>,
        alt: Option<String>,
    },
    Group(Vec<ParseNode>),
}

/// One node of a condensed page. `source_id` links back to the snapshot DOM and is not part of
/// the textual form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseNode {
    pub content: NodeContent,
    pub source_id: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidTree {
    #[error("text node with empty text")]
    EmptyText,
    #[error("image node without src or alt")]
    EmptyImage,
    #[error("image attribute with empty value")]
    EmptyAttribute,
    #[error("group node without children")]
    EmptyGroup,
}

impl ParseNode {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            content: NodeContent::Text(text.into()),
            source_id: None,
        }
    }

    pub fn image(src: Option<&str>, alt: Option<&str>) -> Self {
        Self {
            content: NodeContent::Image {
                src: src.map(str::to_owned),
                alt: alt.map(str::to_owned),
            },
            source_id: None,
        }
    }

    pub fn group(children: Vec<ParseNode>) -> Self {
        Self {
            content: NodeContent::Group(children),
            source_id: None,
        }
    }

    pub fn with_source(mut self, id: NodeId) -> Self {
        self.source_id = Some(id);
        self
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self.content, NodeContent::Group(_))
    }

    pub fn children(&self) -> &[ParseNode] {
        match &self.content {
            NodeContent::Group(children) => children,
            _ => &[],
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match &self.content {
            NodeContent::Text(t) => Some(t),
            _ => None,
        }
    }

    /// Checks the structural invariants recursively.
    pub fn validate(&self) -> Result<(), InvalidTree> {
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match &node.content {
                NodeContent::Text(t) if t.is_empty() => return Err(InvalidTree::EmptyText),
                NodeContent::Text(_) => {}
                NodeContent::Image {
                    src: None,
                    alt: None,
                } => return Err(InvalidTree::EmptyImage),
                NodeContent::Image { src, alt } => {
                    if src.as_deref() == Some("") || alt.as_deref() == Some("") {
                        return Err(InvalidTree::EmptyAttribute);
                    }
                }
                NodeContent::Group(children) if children.is_empty() => {
                    return Err(InvalidTree::EmptyGroup)
                }
                NodeContent::Group(children) => stack.extend(children),
            }
        }
        Ok(())
    }

    /// Copy of the tree with every `source_id` cleared.
    pub fn without_source_ids(&self) -> ParseNode {
        let content = match &self.content {
            NodeContent::Group(children) => {
                NodeContent::Group(children.iter().map(ParseNode::without_source_ids).collect())
            }
            other => other.clone(),
        };
        ParseNode {
            content,
            source_id: None,
        }
    }

    /// Leaves in document order.
    pub fn leaves(&self) -> Vec<&ParseNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            match &node.content {
                NodeContent::Group(children) => stack.extend(children.iter().rev()),
                _ => out.push(node),
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(ParseNode::node_count)
            .sum::<usize>()
    }
}

impl fmt::Display for ParseNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

fn needs_hex_escape(c: char) -> bool {
    c.is_control() || c == '\u{a0}'
}

fn is_reserved(c: char) -> bool {
    matches!(c, '<' | '>' | '\\' | '=')
}

fn escape_into(out: &mut String, value: &str) {
    for c in value.chars() {
        if is_reserved(c) {
            out.push('\\');
            out.push(c);
        } else if needs_hex_escape(c) {
            // Every escaped code point is <= 0xFF, so two digits always suffice.
            out.push_str(&format!("\\x{:02x}", c as u32));
        } else {
            out.push(c);
        }
    }
}

/// Length in characters of `value` once escaped.
pub fn escaped_len(value: &str) -> usize {
    value
        .chars()
        .map(|c| {
            if is_reserved(c) {
                2
            } else if needs_hex_escape(c) {
                4
            } else {
                1
            }
        })
        .sum()
}

const IMG_SRC: &str = "img_src=";
const IMG_ALT: &str = "img_alt=";

fn write_node(node: &ParseNode, out: &mut String) {
    out.push('<');
    match &node.content {
        NodeContent::Text(t) => escape_into(out, t),
        NodeContent::Image { src, alt } => {
            if let Some(src) = src {
                out.push_str(IMG_SRC);
                escape_into(out, src);
            }
            if let Some(alt) = alt {
                if src.is_some() {
                    out.push(' ');
                }
                out.push_str(IMG_ALT);
                escape_into(out, alt);
            }
        }
        NodeContent::Group(children) => {
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                write_node(child, out);
            }
        }
    }
    out.push('>');
}

/// Canonical single-line form used as the training target.
pub fn serialize(node: &ParseNode) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

/// Character length of a single node's rendering given the lengths of its children.
fn node_len_from_children(node: &ParseNode, child_lens: usize) -> usize {
    match &node.content {
        NodeContent::Text(t) => 2 + escaped_len(t),
        NodeContent::Image { src, alt } => {
            let mut n = 2;
            if let Some(src) = src {
                n += IMG_SRC.len() + escaped_len(src);
            }
            if let Some(alt) = alt {
                n += IMG_ALT.len() + escaped_len(alt) + usize::from(src.is_some());
            }
            n
        }
        NodeContent::Group(children) => 2 + child_lens + children.len().saturating_sub(1),
    }
}

/// Number of characters (Unicode scalar values) in `serialize(node)`.
pub fn char_length(node: &ParseNode) -> usize {
    NodeIndex::build(node).nodes[0].char_len
}

/// A node visited in preorder together with its depth and serialized length.
#[derive(Debug, Clone, Copy)]
pub struct IndexedNode<'a> {
    pub node: &'a ParseNode,
    pub depth: usize,
    pub parent: Option<usize>,
    pub char_len: usize,
}

/// Preorder index of a tree with every subtree's serialized length, built in O(nodes).
#[derive(Debug, Clone)]
pub struct NodeIndex<'a> {
    pub nodes: Vec<IndexedNode<'a>>,
}

impl<'a> NodeIndex<'a> {
    pub fn build(root: &'a ParseNode) -> Self {
        let mut nodes = Vec::new();
        let mut stack = vec![(root, 0usize, None)];
        while let Some((node, depth, parent)) = stack.pop() {
            let index = nodes.len();
            nodes.push(IndexedNode {
                node,
                depth,
                parent,
                char_len: 0,
            });
            for child in node.children().iter().rev() {
                stack.push((child, depth + 1, Some(index)));
            }
        }
        // Children follow their parent in preorder, so a reverse sweep sees them first.
        let mut child_sums = vec![0usize; nodes.len()];
        for i in (0..nodes.len()).rev() {
            let len = node_len_from_children(nodes[i].node, child_sums[i]);
            nodes[i].char_len = len;
            if let Some(p) = nodes[i].parent {
                child_sums[p] += len;
            }
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Multi-line display form. Groups made only of text leaves stay on one line when they fit in
/// 80 columns; everything else puts each child on its own line, indented by depth.
pub fn to_pretty(node: &ParseNode) -> String {
    let mut out = String::new();
    write_pretty(node, 0, &mut out);
    out
}

fn write_pretty(node: &ParseNode, indent: usize, out: &mut String) {
    let children = match &node.content {
        NodeContent::Group(children) => children,
        _ => {
            write_node(node, out);
            return;
        }
    };
    let flat = serialize(node);
    let text_only = children.iter().all(|c| c.as_text().is_some());
    if text_only && indent + flat.chars().count() <= 80 {
        out.push_str(&flat);
        return;
    }
    out.push('<');
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            out.push('\n');
            out.extend(std::iter::repeat_n(' ', indent + 1));
        }
        write_pretty(child, indent + 1, out);
    }
    out.push('>');
}

/// Decoding failure; offsets are byte positions in the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unbalanced brackets at byte {offset}")]
    UnbalancedBrackets { offset: usize },
    #[error("empty node at byte {offset}")]
    EmptyNode { offset: usize },
    #[error("bad escape at byte {offset}")]
    BadEscape { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match *self {
            ParseError::UnbalancedBrackets { offset }
            | ParseError::EmptyNode { offset }
            | ParseError::BadEscape { offset } => offset,
        }
    }
}

fn is_sep(b: u8) -> bool {
    matches!(b, b' ' | b'\n' | b'\r' | b'\t')
}

/// Inverse of [`serialize`]. Accepts any whitespace between siblings and around the root, so
/// [`to_pretty`] output decodes too.
pub fn deserialize(s: &str) -> Result<ParseNode, ParseError> {
    let bytes = s.as_bytes();
    let skip_ws = |mut pos: usize| {
        while pos < bytes.len() && is_sep(bytes[pos]) {
            pos += 1;
        }
        pos
    };

    // Open groups: children collected so far.
    let mut open: Vec<Vec<ParseNode>> = Vec::new();
    let mut pos = skip_ws(0);

    loop {
        // Expect the start of a node.
        match bytes.get(pos) {
            Some(b'<') => {}
            _ => return Err(ParseError::UnbalancedBrackets { offset: pos }),
        }
        let start = pos;
        let mut node = match bytes.get(pos + 1) {
            None => {
                return Err(ParseError::UnbalancedBrackets {
                    offset: bytes.len(),
                })
            }
            Some(b'>') => return Err(ParseError::EmptyNode { offset: start }),
            Some(b'<') => {
                open.push(Vec::new());
                pos += 1;
                continue;
            }
            Some(_) => {
                let body_start = pos + 1;
                let body_end = find_leaf_end(s, body_start)?;
                pos = body_end + 1;
                decode_leaf(&s[body_start..body_end], body_start)?
            }
        };

        // Attach the finished node, closing any groups that end right after it.
        loop {
            let Some(siblings) = open.last_mut() else {
                let rest = skip_ws(pos);
                if rest != bytes.len() {
                    return Err(ParseError::UnbalancedBrackets { offset: rest });
                }
                return Ok(node);
            };
            siblings.push(node);
            pos = skip_ws(pos);
            match bytes.get(pos) {
                Some(b'>') => {
                    pos += 1;
                    let children = open.pop().expect("non-empty stack");
                    node = ParseNode::group(children);
                }
                Some(b'<') => break,
                Some(_) => return Err(ParseError::UnbalancedBrackets { offset: pos }),
                None => {
                    return Err(ParseError::UnbalancedBrackets {
                        offset: bytes.len(),
                    })
                }
            }
        }
    }
}

/// Byte offset of the unescaped `>` closing a leaf whose body starts at `from`.
fn find_leaf_end(s: &str, from: usize) -> Result<usize, ParseError> {
    let mut chars = s[from..].char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => {
                if chars.next().is_none() {
                    return Err(ParseError::UnbalancedBrackets { offset: s.len() });
                }
            }
            '>' => return Ok(from + i),
            '<' => return Err(ParseError::UnbalancedBrackets { offset: from + i }),
            _ => {}
        }
    }
    Err(ParseError::UnbalancedBrackets { offset: s.len() })
}

fn decode_leaf(body: &str, offset: usize) -> Result<ParseNode, ParseError> {
    if let Some(rest) = body.strip_prefix(IMG_SRC) {
        let value_offset = offset + IMG_SRC.len();
        let delimiter = format!(" {IMG_ALT}");
        let (src, alt) = match find_unescaped(rest, &delimiter) {
            Some(i) => {
                let alt_offset = value_offset + i + delimiter.len();
                (
                    unescape(&rest[..i], value_offset)?,
                    Some(unescape(&rest[i + delimiter.len()..], alt_offset)?),
                )
            }
            None => (unescape(rest, value_offset)?, None),
        };
        return Ok(ParseNode {
            content: NodeContent::Image {
                src: Some(src),
                alt,
            },
            source_id: None,
        });
    }
    if let Some(rest) = body.strip_prefix(IMG_ALT) {
        let alt = unescape(rest, offset + IMG_ALT.len())?;
        return Ok(ParseNode {
            content: NodeContent::Image {
                src: None,
                alt: Some(alt),
            },
            source_id: None,
        });
    }
    Ok(ParseNode::text(unescape(body, offset)?))
}

fn find_unescaped(haystack: &str, needle: &str) -> Option<usize> {
    let mut chars = haystack.char_indices();
    while let Some((i, c)) = chars.next() {
        if c == '\\' {
            chars.next();
        } else if haystack[i..].starts_with(needle) {
            return Some(i);
        }
    }
    None
}

fn unescape(value: &str, offset: usize) -> Result<String, ParseError> {
    if value.is_empty() {
        return Err(ParseError::EmptyNode { offset });
    }
    let mut out = String::with_capacity(value.len());
    let mut chars = value.char_indices();
    while let Some((i, c)) = chars.next() {
        let at = offset + i;
        match c {
            '\\' => match chars.next() {
                Some((_, e)) if is_reserved(e) => out.push(e),
                Some((_, 'x')) => {
                    let hex: String = (0..2)
                        .filter_map(|_| chars.next().map(|(_, h)| h))
                        .collect();
                    let decoded = (hex.len() == 2
                        && hex.chars().all(|h| matches!(h, '0'..='9' | 'a'..='f')))
                    .then(|| u32::from_str_radix(&hex, 16).ok())
                    .flatten()
                    .and_then(char::from_u32)
                    .filter(|&d| needs_hex_escape(d));
                    match decoded {
                        Some(d) => out.push(d),
                        None => return Err(ParseError::BadEscape { offset: at }),
                    }
                }
                _ => return Err(ParseError::BadEscape { offset: at }),
            },
            // Canonical form always escapes these.
            c if c == '=' || needs_hex_escape(c) => {
                return Err(ParseError::BadEscape { offset: at })
            }
            c => out.push(c),
        }
    }
    Ok(out)
}
