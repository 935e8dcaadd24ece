//! Brute-force reference implementations shared by the property tests and the acceptance run.
#![allow(dead_code)]

use screenparse::parse_format::serialize;
use screenparse::ParseNode;

/// Every subtree as (serialized length, depth, preorder index, node), lengths computed by
/// serializing each subtree from scratch.
pub fn all_subtrees(root: &ParseNode) -> Vec<(usize, usize, usize, &ParseNode)> {
    fn walk<'a>(
        n: &'a ParseNode,
        depth: usize,
        out: &mut Vec<(usize, usize, usize, &'a ParseNode)>,
    ) {
        let index = out.len();
        out.push((serialize(n).chars().count(), depth, index, n));
        for c in n.children() {
            walk(c, depth + 1, out);
        }
    }
    let mut out = Vec::new();
    walk(root, 0, &mut out);
    out
}

/// Longest subtree within `budget`, ties to the shallowest, then the earliest in preorder.
pub fn brute_force_subtree(
    root: &ParseNode,
    budget: usize,
) -> Option<(usize, usize, usize, &ParseNode)> {
    all_subtrees(root)
        .into_iter()
        .filter(|s| s.0 <= budget)
        .min_by_key(|&(len, depth, index, _)| (std::cmp::Reverse(len), depth, index))
}

/// Grid at scale `num / den` (as an exact fraction of `patch`-sized steps): rows and columns are
/// `max(1, floor(scale * side / patch))`.
fn grid_at(num: u64, den: u64, w: u64, h: u64) -> (u64, u64) {
    ((num * h / den).max(1), (num * w / den).max(1))
}

/// Largest feasible `rows * cols` over every scale at which the row or column count steps.
/// Scales `k * patch / side` make `scale * side / patch` exactly `k`, so the grid is computed
/// with integer arithmetic.
pub fn brute_force_grid(w: u32, h: u32, budget: usize) -> u64 {
    let (w, h, b) = (u64::from(w), u64::from(h), budget as u64);
    let mut best = 1;
    for k in 1..=b {
        for (num, den) in [(k, h), (k, w)] {
            let (r, c) = grid_at(num, den, w, h);
            if r * c <= b {
                best = best.max(r * c);
            }
        }
    }
    best
}

/// Whether some single scale yields exactly `rows` x `cols` for a `w` x `h` image. A count of
/// `n > 1` needs `scale * side / patch` in `[n, n + 1)`; a count of 1 only needs it below 2.
pub fn grid_is_realizable(w: u32, h: u32, rows: u32, cols: u32) -> bool {
    let (w, h, r, c) = (u64::from(w), u64::from(h), u64::from(rows), u64::from(cols));
    // Compare fractions n / side by cross-multiplying; lower bounds of 0 always hold.
    let row_lo_below_col_hi = r == 1 || r * w < (c + 1) * h;
    let col_lo_below_row_hi = c == 1 || c * h < (r + 1) * w;
    r >= 1 && c >= 1 && row_lo_below_col_hi && col_lo_below_row_hi
}
