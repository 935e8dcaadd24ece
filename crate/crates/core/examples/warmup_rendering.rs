//! Splits text into snippets and renders each one in a seeded random style.
//!
//! ```text
//! cargo run --example warmup_rendering [-- FONT_DIR]
//! ```

use screenparse::pipeline::{split_snippets, warmup_example, WarmupConfig, MAX_SNIPPET_BYTES};
use screenparse::render::FontSet;

const TEXT: &str = "Rendered text teaches a pixel encoder to read before it has to parse.\n\
    Each snippet holds at most 128 bytes of UTF-8, so long lines are cut at word boundaries \
    and a single over-long token such as https://example.com/a/very/long/path/that/keeps/going/and/going/without/any/spaces/at/all is split between characters.\n\
    Ünïcödé, 数字 and emoji 🙂 pass through unchanged.";

fn main() {
    let fonts = match std::env::args_os().nth(1) {
        Some(dir) => FontSet::with_dir(dir.as_ref()).expect("font directory"),
        None => FontSet::builtin(),
    };
    let config = WarmupConfig::default();
    let dir = std::env::temp_dir();
    for (i, snippet) in split_snippets(TEXT, MAX_SNIPPET_BYTES).iter().enumerate() {
        let id = format!("warmup-{i:08}");
        let record = warmup_example(&id, snippet, &config, &fonts).expect("render");
        let img = record.decode_image().unwrap().unwrap();
        println!(
            "{id} {:3} bytes, {}pt {}, color {}, {}x{}: {snippet}",
            snippet.len(),
            record.meta["size_pt"],
            record.meta["font_id"].as_str().unwrap_or("?"),
            record.meta["color"],
            img.width(),
            img.height()
        );
        img.save(dir.join(format!("{id}.png"))).expect("write png");
    }
    println!("images in {}", dir.display());
}
