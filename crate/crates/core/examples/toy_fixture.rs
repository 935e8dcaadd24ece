//! Regenerates the toy-page snapshot fixture: the three-file layout a browser capture of
//! `tests/fixtures/html/toy_page.html` produces, with geometry from that page's stylesheet.
//!
//! ```text
//! cargo run --example toy_fixture [-- OUT_DIR]
//! ```

use std::path::PathBuf;

use image::{imageops, Rgb, RgbImage};
use screenparse::render::{
    draw_bbox, fill_rect, line_advance, render_text_image, BoxStyle, FontSet, GlyphSource, BLACK,
    WHITE,
};
use screenparse::snapshot::{write_snapshot_dir, DomRecord, PageSnapshot, SnapshotManifest};
use screenparse::BBox;

const WIDTH: u32 = 1024;
const HEIGHT: u32 = 320;

fn rec(id: u32, tag: &str, children: &[u32], visible: bool, bbox: [f64; 4]) -> DomRecord {
    DomRecord {
        id,
        tag: tag.into(),
        children: children.to_vec(),
        visible,
        bbox,
        text: None,
        img_src: None,
        img_alt: None,
    }
}

fn draw_text(
    canvas: &mut RgbImage,
    fonts: &FontSet,
    text: &str,
    x: u32,
    y: u32,
    size: u32,
    color: [u8; 3],
    bg: [u8; 3],
) {
    let style = GlyphSource {
        color,
        background: bg,
        ..GlyphSource::builtin(size)
    };
    let rendered = render_text_image(text, &style, 400, fonts).expect("builtin font renders");
    let advance = line_advance(text, &style, fonts)
        .expect("builtin font")
        .ceil() as u32;
    let crop = imageops::crop_imm(
        &rendered.image,
        0,
        0,
        advance.min(400),
        rendered.image.height(),
    )
    .to_image();
    imageops::replace(canvas, &crop, i64::from(x), i64::from(y));
}

fn main() {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/snapshots/toy_page")
        });
    let fonts = FontSet::builtin();

    let langs = [
        ("Python", "images/py_logo.png", [55, 118, 171]),
        ("C++", "images/cpp_logo.png?v=2", [0, 89, 156]),
        ("Java", "/static/java_logo.png", [231, 111, 0]),
    ];
    let mut records = vec![
        rec(0, "html", &[1, 2], true, [0.0, 0.0, 1024.0, 320.0]),
        rec(1, "head", &[3], false, [0.0, 0.0, 0.0, 0.0]),
        rec(2, "body", &[4], true, [0.0, 0.0, 1024.0, 320.0]),
        DomRecord {
            text: Some("Pick a language".into()),
            ..rec(3, "title", &[], false, [0.0, 0.0, 0.0, 0.0])
        },
        rec(
            4,
            "form",
            &[5, 9, 13, 17, 18],
            true,
            [0.0, 0.0, 1024.0, 320.0],
        ),
    ];
    let mut screenshot = RgbImage::from_pixel(WIDTH, HEIGHT, Rgb(WHITE));
    for (i, (name, src, color)) in langs.iter().enumerate() {
        let base = 5 + 4 * i as u32;
        let y = 24.0 + 72.0 * i as f64;
        records.push(rec(
            base,
            "div",
            &[base + 1, base + 3],
            true,
            [24.0, y, 976.0, 72.0],
        ));
        records.push(rec(
            base + 1,
            "label",
            &[base + 2],
            true,
            [24.0, y + 20.0, 160.0, 32.0],
        ));
        records.push(DomRecord {
            text: Some((*name).into()),
            ..rec(base + 2, "span", &[], true, [24.0, y + 20.0, 160.0, 32.0])
        });
        records.push(DomRecord {
            img_src: Some((*src).into()),
            img_alt: Some((*name).into()),
            ..rec(base + 3, "img", &[], true, [184.0, y + 4.0, 64.0, 64.0])
        });

        draw_text(
            &mut screenshot,
            &fonts,
            name,
            24,
            y as u32 + 22,
            18,
            BLACK,
            WHITE,
        );
        fill_rect(
            &mut screenshot,
            BBox::new(184, y as u32 + 4, 64, 64),
            *color,
        );
        let initial = &name[..1];
        draw_text(
            &mut screenshot,
            &fonts,
            initial,
            204,
            y as u32 + 18,
            20,
            WHITE,
            *color,
        );
    }
    records.push(DomRecord {
        text: Some("Choose one language before submitting.".into()),
        ..rec(17, "p", &[], false, [0.0, 0.0, 0.0, 0.0])
    });
    records.push(DomRecord {
        text: Some("Submit".into()),
        ..rec(18, "button", &[], true, [24.0, 256.0, 120.0, 40.0])
    });
    fill_rect(
        &mut screenshot,
        BBox::new(24, 256, 120, 40),
        [225, 225, 225],
    );
    draw_bbox(
        &mut screenshot,
        BBox::new(24, 256, 120, 40),
        &BoxStyle {
            color: [120, 120, 120],
            stroke: 1,
        },
    );
    draw_text(
        &mut screenshot,
        &fonts,
        "Submit",
        44,
        264,
        16,
        BLACK,
        [225, 225, 225],
    );

    let page = PageSnapshot::new("toy_page", "file:///toy_page.html", screenshot, records)
        .expect("valid dom");
    let mut manifest = SnapshotManifest::new(page.url.clone());
    manifest.capture_time = "2023-01-01T00:00:00Z".into();
    write_snapshot_dir(&out, &manifest, &page).expect("fixture written");
    println!("wrote {}", out.display());
}
