//! Condenses a synthetic page, picks the largest subtree under the budget, masks half of its
//! text and writes the before/after screenshots.
//!
//! ```text
//! cargo run --example select_and_mask [-- SEED [BUDGET]]
//! ```

use screenparse::hash::page_seed;
use screenparse::mask::{apply_masks, plan_masks, MaskConfig, DEFAULT_MASK_COLOR};
use screenparse::render::BoxStyle;
use screenparse::subtree::{draw_selection, select_subtree};
use screenparse::synth::{random_page, SynthConfig};
use screenparse::{condense, serialize};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(3);
    let budget: usize = args
        .next()
        .map(|s| s.parse().expect("budget"))
        .unwrap_or(256);

    let page = random_page("demo", seed, &SynthConfig::default());
    let (tree, regions) = condense(&page).expect("synthetic pages have text");
    println!("full parse: {} chars", serialize(&tree).chars().count());

    let sel = select_subtree(&tree, &regions, budget).expect("some leaf fits");
    println!(
        "selected {} chars at depth {} (preorder #{}), box {:?}",
        sel.char_len, sel.depth, sel.preorder_index, sel.bbox
    );
    println!("{}", serialize(&sel.subtree));

    let plan = plan_masks(
        &sel.subtree,
        &regions,
        0.5,
        page_seed(0, &page.id),
        &MaskConfig::default(),
    );
    println!(
        "{} spans cover {:.1}% of {} text chars in {} rects",
        plan.spans.len(),
        plan.masked_fraction * 100.0,
        plan.total_chars,
        plan.rects.len()
    );
    let mut masked = apply_masks(&page.screenshot, &plan, DEFAULT_MASK_COLOR);
    if let Some(b) = sel.bbox {
        masked = draw_selection(&masked, b, &BoxStyle::default());
    }

    let dir = std::env::temp_dir();
    page.screenshot
        .save(dir.join("select_and_mask_before.png"))
        .expect("write png");
    masked
        .save(dir.join("select_and_mask_after.png"))
        .expect("write png");
    println!(
        "wrote select_and_mask_{{before,after}}.png to {}",
        dir.display()
    );
}
