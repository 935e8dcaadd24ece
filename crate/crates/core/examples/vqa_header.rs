//! Renders a question header (with and without answer choices) above a diagram.
//!
//! ```text
//! cargo run --example vqa_header
//! ```

use image::{Rgb, RgbImage};
use screenparse::render::{draw_bbox, BoxStyle, FontSet};
use screenparse::tasks::{make_vqa_example, vqa_header_text};
use screenparse::BBox;

fn main() {
    let fonts = FontSet::builtin();
    let mut img = RgbImage::from_pixel(480, 240, Rgb([250, 250, 245]));
    for (i, x) in [20u32, 130, 240, 350].into_iter().enumerate() {
        let style = BoxStyle {
            color: [40 * i as u8, 120, 200],
            stroke: 3,
        };
        draw_bbox(&mut img, BBox::new(x, 90, 90, 60), &style);
    }

    let choices: Vec<String> = ["egg", "larva", "pupa", "adult"].map(String::from).to_vec();
    let question = "Which stage comes after the larva?";
    println!("header: {}", vqa_header_text(question, Some(&choices)));

    let record = make_vqa_example("ai2d-demo", &img, question, Some(&choices), "pupa", &fonts)
        .expect("valid item");
    let out = record.decode_image().unwrap().unwrap();
    println!(
        "target {:?}, image {}x{} (header {} px)",
        record.target,
        out.width(),
        out.height(),
        record.meta["header_height"]
    );
    let open = make_vqa_example(
        "docvqa-demo",
        &img,
        "What is drawn here?",
        None,
        "four boxes",
        &fonts,
    )
    .unwrap();
    println!("open-ended header: {}", open.meta["header"]);

    let path = std::env::temp_dir().join("vqa_header.png");
    out.save(&path).expect("write png");
    println!("wrote {}", path.display());
}
