//! Expands a referring expression into per-candidate instances, then picks a candidate from
//! scored generations.
//!
//! ```text
//! cargo run --example refexp
//! ```

use image::{Rgb, RgbImage};
use screenparse::render::{BoxStyle, FontSet};
use screenparse::tasks::{make_refexp_instances, select_refexp_candidate, Generation};
use screenparse::BBox;

fn main() {
    let fonts = FontSet::builtin();
    let img = RgbImage::from_pixel(200, 360, Rgb([255, 255, 255]));
    let candidates: Vec<BBox> = (0..7)
        .map(|i| BBox::new(20, 20 + 46 * i, 160, 36))
        .collect();

    let records = make_refexp_instances(
        "refexp-demo",
        &img,
        "the fourth button from the top",
        &candidates,
        3,
        42,
        &fonts,
        &BoxStyle::default(),
    )
    .expect("valid item");
    for r in &records {
        println!(
            "{:16} candidate {} -> {}",
            r.id, r.meta["candidate_index"], r.target
        );
    }

    let cases = [
        vec![
            Generation::new("true", -1.0),
            Generation::new("false", -0.2),
        ],
        vec![Generation::new("true", -3.0), Generation::new("true", -1.0)],
        vec![Generation::new("false", -0.1), Generation::new("no", -5.0)],
    ];
    for gens in &cases {
        let pick = select_refexp_candidate(gens).unwrap();
        let shown: Vec<String> = gens
            .iter()
            .map(|g| format!("({}, {})", g.text, g.score))
            .collect();
        println!("[{}] -> {pick}", shown.join(", "));
    }
}
