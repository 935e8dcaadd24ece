//! Picking the pretraining target: the largest subtree whose serialization fits a character
//! budget, plus the screen region it covers.

use image::RgbImage;
use thiserror::Error;

use crate::condense::RegionMap;
use crate::geom::BBox;
use crate::parse_format::{NodeIndex, ParseNode};
use crate::render::{draw_bbox, BoxStyle};

pub const DEFAULT_TARGET_BUDGET_CHARS: usize = 1024;
/// The shortest possible serialization, `<x>`.
pub const MIN_BUDGET_CHARS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectError {
    #[error("budget of {0} characters is below the minimum of 3")]
    BudgetTooSmall(usize),
    #[error("no subtree fits in {budget} characters")]
    NoFeasibleSubtree { budget: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub subtree: ParseNode,
    pub char_len: usize,
    pub depth: usize,
    /// Position of the subtree root in a preorder walk of the full tree.
    pub preorder_index: usize,
    /// Union of the leaf regions; `None` only if no leaf of the subtree has a region.
    pub bbox: Option<BBox>,
}

/// Returns the subtree with the longest serialization not exceeding `budget_chars`. Ties go to
/// the shallower node, then to the one earlier in document order.
pub fn select_subtree(
    tree: &ParseNode,
    regions: &RegionMap,
    budget_chars: usize,
) -> Result<Selection, SelectError> {
    if budget_chars < MIN_BUDGET_CHARS {
        return Err(SelectError::BudgetTooSmall(budget_chars));
    }
    let index = NodeIndex::build(tree);
    // Strictly-better comparison during a preorder scan keeps the earliest node among equals.
    let best = index
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.char_len <= budget_chars)
        .fold(None::<(usize, usize, usize)>, |best, (i, n)| match best {
            Some((_, len, depth))
                if (len, std::cmp::Reverse(depth)) >= (n.char_len, std::cmp::Reverse(n.depth)) =>
            {
                best
            }
            _ => Some((i, n.char_len, n.depth)),
        });
    let (i, char_len, depth) = best.ok_or(SelectError::NoFeasibleSubtree {
        budget: budget_chars,
    })?;
    let subtree = index.nodes[i].node.clone();
    let bbox = regions.leaf_union(&subtree);
    Ok(Selection {
        subtree,
        char_len,
        depth,
        preorder_index: i,
        bbox,
    })
}

/// Copy of `screenshot` with the selection outlined.
pub fn draw_selection(screenshot: &RgbImage, bbox: BBox, style: &BoxStyle) -> RgbImage {
    let mut out = screenshot.clone();
    draw_bbox(&mut out, bbox, style);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_format::{serialize, NodeId};

    fn words(n: usize, seed: char) -> String {
        std::iter::repeat_n(seed, n).collect()
    }

    #[test]
    fn picks_largest_fitting_branch() {
        // Root serializes to ~1500 chars, its largest child to 900.
        let big = ParseNode::group(vec![
            ParseNode::text(words(400, 'a')),
            ParseNode::text(words(493, 'b')),
        ]);
        let small = ParseNode::text(words(596, 'c'));
        let tree = ParseNode::group(vec![big.clone(), small]);
        assert_eq!(serialize(&big).len(), 900);
        assert!(serialize(&tree).len() > 1024);
        let sel = select_subtree(&tree, &RegionMap::new(10, 10), 1024).unwrap();
        assert_eq!(sel.subtree, big);
        assert_eq!(sel.char_len, 900);
        assert_eq!(sel.depth, 1);
    }

    #[test]
    fn ties_prefer_shallow_then_early() {
        let tree = ParseNode::group(vec![
            ParseNode::group(vec![ParseNode::text("xx")]),
            ParseNode::text("abcd"),
            ParseNode::text("efgh"),
        ]);
        // `<<xx>>` (6), `<abcd>` (6), `<efgh>` (6): the depth-1 group comes first.
        let sel = select_subtree(&tree, &RegionMap::new(1, 1), 6).unwrap();
        assert_eq!(sel.preorder_index, 1);
        let tree = ParseNode::group(vec![
            ParseNode::group(vec![ParseNode::text("abcd")]),
            ParseNode::text("efgh"),
        ]);
        // `<abcd>` at depth 2 ties with `<efgh>` at depth 1; shallower wins.
        let sel = select_subtree(&tree, &RegionMap::new(1, 1), 6).unwrap();
        assert_eq!(sel.subtree, ParseNode::text("efgh"));
    }

    #[test]
    fn infeasible_and_too_small() {
        let tree = ParseNode::text("abcdef");
        assert_eq!(
            select_subtree(&tree, &RegionMap::new(1, 1), 5),
            Err(SelectError::NoFeasibleSubtree { budget: 5 })
        );
        assert_eq!(
            select_subtree(&tree, &RegionMap::new(1, 1), 2),
            Err(SelectError::BudgetTooSmall(2))
        );
    }

    #[test]
    fn bbox_is_union_of_leaf_regions() {
        let tree = ParseNode::group(vec![
            ParseNode::text("a").with_source(NodeId(1)),
            ParseNode::text("b").with_source(NodeId(2)),
        ])
        .with_source(NodeId(0));
        let mut regions = RegionMap::new(100, 100);
        regions.insert(NodeId(0), BBox::new(0, 0, 100, 100));
        regions.insert(NodeId(1), BBox::new(10, 10, 5, 5));
        regions.insert(NodeId(2), BBox::new(40, 30, 10, 10));
        let sel = select_subtree(&tree, &regions, 1024).unwrap();
        assert_eq!(sel.bbox, Some(BBox::new(10, 10, 40, 30)));
    }
}
