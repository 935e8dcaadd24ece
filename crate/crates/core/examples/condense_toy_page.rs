//! Loads the toy-page snapshot fixture and prints its condensed parse with leaf regions.
//!
//! ```text
//! cargo run --example condense_toy_page [-- SNAPSHOT_DIR]
//! ```

use std::path::PathBuf;

use screenparse::snapshot::{load_snapshot_dir, validate};
use screenparse::{condense, serialize};

fn main() {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/snapshots/toy_page")
        });
    let loaded = load_snapshot_dir(&dir).expect("snapshot directory");
    let issues = validate(&loaded.snapshot, &loaded.manifest);
    println!(
        "{} DOM nodes, {} issue(s)",
        loaded.snapshot.nodes().len(),
        issues.len()
    );

    let (tree, regions) = condense(&loaded.snapshot).expect("page has visible content");
    println!("{}", serialize(&tree));
    for leaf in tree.leaves() {
        let id = leaf.source_id.expect("leaves keep their DOM id");
        println!("  {:>3}  {:?}  {}", id.0, regions.get(id), serialize(leaf));
    }
}
