//! Builds a small tree, prints its canonical and pretty forms, and shows a parse error.
//!
//! ```text
//! cargo run --example parse_format
//! ```

use screenparse::parse_format::{to_pretty, NodeIndex};
use screenparse::{char_length, deserialize, serialize, ParseNode};

fn main() {
    let tree = ParseNode::group(vec![
        ParseNode::group(vec![
            ParseNode::text("Python"),
            ParseNode::image(Some("py_logo"), Some("Python")),
        ]),
        ParseNode::text("a <b> = c \\ d\u{a0}e"),
        ParseNode::image(None, Some("decorative")),
    ]);

    let s = serialize(&tree);
    println!("canonical  {s}");
    println!(
        "length     {} chars (char_length says {})",
        s.chars().count(),
        char_length(&tree)
    );
    println!("pretty:\n{}", to_pretty(&tree));
    assert_eq!(deserialize(&s).unwrap(), tree);

    println!("per-node lengths in preorder:");
    for n in &NodeIndex::build(&tree).nodes {
        println!(
            "  depth {} len {:3}  {}",
            n.depth,
            n.char_len,
            serialize(n.node)
        );
    }

    for bad in ["<<a>", "<>", r"<a\q>"] {
        let e = deserialize(bad).unwrap_err();
        println!("{bad:8} -> {e} (offset {})", e.offset());
    }
}
