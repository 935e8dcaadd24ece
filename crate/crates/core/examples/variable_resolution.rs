//! Plans patch grids for a few image shapes in the three resize modes and extracts patches.
//!
//! ```text
//! cargo run --example variable_resolution
//! ```

use image::{Rgb, RgbImage};
use screenparse::patch::{
    patchify, plan_grid, plan_grid_padded, plan_grid_stretched, GridPlan, Resampler,
};

fn show(label: &str, w: u32, h: u32, plan: &GridPlan) {
    println!(
        "{label:10} {w:5}x{h:<5} -> {:3} x {:3} = {:4} patches, canvas {}x{}, content {}x{}, padded px {}, distortion {:.3}",
        plan.rows,
        plan.cols,
        plan.patches(),
        plan.target_w,
        plan.target_h,
        plan.content_w,
        plan.content_h,
        plan.padded_pixels(),
        plan.aspect_distortion(w, h)
    );
}

fn main() {
    let budget = 2048;
    let side = 45 * 16;
    for (w, h) in [(1024, 1024), (2048, 1024), (1024, 4096), (300, 40), (1, 1)] {
        show("variable", w, h, &plan_grid(w, h, 16, budget).unwrap());
        show("padded", w, h, &plan_grid_padded(w, h, 16, side).unwrap());
        show(
            "stretched",
            w,
            h,
            &plan_grid_stretched(w, h, 16, side).unwrap(),
        );
    }

    let img = RgbImage::from_fn(640, 200, |x, y| {
        Rgb([(x / 3) as u8, (y as u8).wrapping_mul(2), 90])
    });
    let plan = plan_grid(640, 200, 16, 64).unwrap();
    let grid = patchify(&img, &plan, Resampler::Bilinear);
    println!(
        "\n640x200 at budget 64: {} patches of {} bytes, {} padding slots",
        grid.patches.len(),
        grid.patches[0].pixels.len(),
        grid.padding_slots()
    );
    assert_eq!(
        grid.reassemble().dimensions(),
        (plan.target_w, plan.target_h)
    );
}
