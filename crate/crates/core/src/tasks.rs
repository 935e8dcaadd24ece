//! Finetuning preprocessing: every task becomes an image plus a target string.
//!
//! * captioning uses the image and caption as they are;
//! * question answering renders the question (and any answer choices) as a header banner;
//! * widget captioning outlines the widget's box on the image;
//! * referring expressions become one true/false example per candidate box, with the
//!   expression as the header.

use image::RgbImage;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::BBox;
use crate::record::{ExampleRecord, RecordImage, Task};
use crate::render::{draw_bbox, render_header, BoxDraw, BoxStyle, FontSet, RenderError};

/// Negatives sampled per positive referring-expression candidate.
pub const REFEXP_NEGATIVES: usize = 5;
pub const TRUE_TARGET: &str = "true";
pub const FALSE_TARGET: &str = "false";

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("target text is empty")]
    InvalidTarget,
    #[error("answer {0:?} is not one of the choices")]
    InvalidAnswer(String),
    #[error("box {0:?} lies outside the image")]
    InvalidBBox(BBox),
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
}

pub fn encode_png(image: &RgbImage) -> Vec<u8> {
    let mut out = std::io::Cursor::new(Vec::new());
    image
        .write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory png encoding");
    out.into_inner()
}

fn require_target(target: &str) -> Result<(), TaskError> {
    if target.trim().is_empty() {
        Err(TaskError::InvalidTarget)
    } else {
        Ok(())
    }
}

/// Image bytes are embedded unchanged; the caption is the target verbatim.
pub fn make_caption_example(
    id: &str,
    image_bytes: &[u8],
    caption: &str,
) -> Result<ExampleRecord, TaskError> {
    require_target(caption)?;
    if image_bytes.is_empty() {
        return Err(TaskError::InvalidInput("empty image".into()));
    }
    Ok(ExampleRecord::new(
        id,
        Task::Caption,
        RecordImage::Embedded(image_bytes.to_vec()),
        caption,
    ))
}

/// `(a)`, `(b)`, ... `(z)`, then `(27)`, `(28)`, ...
pub fn choice_label(i: usize) -> String {
    match u8::try_from(i) {
        Ok(n) if n < 26 => format!("({})", char::from(b'a' + n)),
        _ => format!("({})", i + 1),
    }
}

/// Header text: the question alone, or `question | (a) c1 (b) c2 ...` with choices.
pub fn vqa_header_text(question: &str, choices: Option<&[String]>) -> String {
    match choices {
        Some(choices) if !choices.is_empty() => {
            let listed: Vec<String> = choices
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{} {}", choice_label(i), c))
                .collect();
            format!("{} | {}", question, listed.join(" "))
        }
        _ => question.to_owned(),
    }
}

pub fn make_vqa_example(
    id: &str,
    image: &RgbImage,
    question: &str,
    choices: Option<&[String]>,
    answer: &str,
    fonts: &FontSet,
) -> Result<ExampleRecord, TaskError> {
    require_target(answer)?;
    if let Some(choices) = choices {
        if !choices.iter().any(|c| c == answer) {
            return Err(TaskError::InvalidAnswer(answer.to_owned()));
        }
    }
    let header = vqa_header_text(question, choices);
    let rendered = render_header(image, &header, fonts)?;
    Ok(ExampleRecord::new(
        id,
        Task::Vqa,
        RecordImage::Embedded(encode_png(&rendered)),
        answer,
    )
    .with_meta("header", header)
    .with_meta("header_height", rendered.height() - image.height()))
}

fn outlined(image: &RgbImage, bbox: BBox, style: &BoxStyle) -> Result<(RgbImage, bool), TaskError> {
    let mut out = image.clone();
    match draw_bbox(&mut out, bbox, style) {
        BoxDraw::Outside => Err(TaskError::InvalidBBox(bbox)),
        BoxDraw::Clipped => Ok((out, true)),
        BoxDraw::Drawn => Ok((out, false)),
    }
}

pub fn make_widget_example(
    id: &str,
    image: &RgbImage,
    bbox: BBox,
    caption: &str,
    style: &BoxStyle,
) -> Result<ExampleRecord, TaskError> {
    require_target(caption)?;
    let (drawn, clipped) = outlined(image, bbox, style)?;
    let mut record = ExampleRecord::new(
        id,
        Task::Widget,
        RecordImage::Embedded(encode_png(&drawn)),
        caption,
    );
    if clipped {
        record = record.with_meta("bbox_clipped", true);
    }
    Ok(record)
}

/// One positive instance plus up to five negatives sampled without replacement from the other
/// candidates. Positive first, negatives in candidate order. Deterministic in `seed`.
#[allow(clippy::too_many_arguments)]
pub fn make_refexp_instances(
    id: &str,
    image: &RgbImage,
    expression: &str,
    candidates: &[BBox],
    positive_index: usize,
    seed: u64,
    fonts: &FontSet,
    style: &BoxStyle,
) -> Result<Vec<ExampleRecord>, TaskError> {
    if candidates.is_empty() {
        return Err(TaskError::InvalidInput("no candidates".into()));
    }
    if positive_index >= candidates.len() {
        return Err(TaskError::InvalidInput(format!(
            "positive index {positive_index} out of range for {} candidates",
            candidates.len()
        )));
    }
    let others = candidates.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut negatives: Vec<usize> = index::sample(&mut rng, others, REFEXP_NEGATIVES.min(others))
        .into_iter()
        .map(|i| if i >= positive_index { i + 1 } else { i })
        .collect();
    negatives.sort_unstable();

    let chosen = std::iter::once((positive_index, TRUE_TARGET))
        .chain(negatives.into_iter().map(|i| (i, FALSE_TARGET)));
    let mut records = Vec::new();
    for (candidate, target) in chosen {
        let (drawn, clipped) = outlined(image, candidates[candidate], style)?;
        let with_header = render_header(&drawn, expression, fonts)?;
        let mut record = ExampleRecord::new(
            format!("{id}-c{candidate}"),
            Task::RefExp,
            RecordImage::Embedded(encode_png(&with_header)),
            target,
        )
        .with_meta("candidate_index", candidate)
        .with_meta("positive_index", positive_index);
        if clipped {
            record = record.with_meta("bbox_clipped", true);
        }
        records.push(record);
    }
    Ok(records)
}

/// A decoded answer for one candidate with its log-probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub text: String,
    pub score: f64,
}

impl Generation {
    pub fn new(text: impl Into<String>, score: f64) -> Self {
        Self {
            text: text.into(),
            score,
        }
    }
}

/// Index of the predicted candidate: the highest-scoring `"true"` generation, or, when no
/// candidate generated `"true"`, the lowest-scoring one. Ties go to the lower index.
pub fn select_refexp_candidate(generations: &[Generation]) -> Result<usize, TaskError> {
    if generations.is_empty() {
        return Err(TaskError::InvalidInput("no generations".into()));
    }
    let best_true = generations
        .iter()
        .enumerate()
        .filter(|(_, g)| g.text == TRUE_TARGET)
        .fold(None::<(usize, f64)>, |best, (i, g)| match best {
            Some((_, s)) if s >= g.score => best,
            _ => Some((i, g.score)),
        });
    if let Some((i, _)) = best_true {
        return Ok(i);
    }
    let least =
        generations
            .iter()
            .enumerate()
            .fold(None::<(usize, f64)>, |best, (i, g)| match best {
                Some((_, s)) if s <= g.score => best,
                _ => Some((i, g.score)),
            });
    Ok(least.expect("non-empty").0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn gens(v: &[(&str, f64)]) -> Vec<Generation> {
        v.iter().map(|&(t, s)| Generation::new(t, s)).collect()
    }

    #[test]
    fn refexp_selection_cases() {
        assert_eq!(
            select_refexp_candidate(&gens(&[("true", -1.0), ("false", -0.2)])).unwrap(),
            0
        );
        assert_eq!(
            select_refexp_candidate(&gens(&[("true", -3.0), ("true", -1.0)])).unwrap(),
            1
        );
        assert_eq!(
            select_refexp_candidate(&gens(&[("false", -0.1), ("no", -5.0)])).unwrap(),
            1
        );
        assert_eq!(
            select_refexp_candidate(&gens(&[("true", -1.0), ("true", -1.0)])).unwrap(),
            0
        );
        assert!(select_refexp_candidate(&[]).is_err());
    }

    #[test]
    fn header_text_enumerates_choices() {
        let choices: Vec<String> = ["sun", "moon", "star", "comet"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            vqa_header_text("What is shown?", Some(&choices)),
            "What is shown? | (a) sun (b) moon (c) star (d) comet"
        );
        assert_eq!(vqa_header_text("Q?", None), "Q?");
        assert_eq!(choice_label(25), "(z)");
        assert_eq!(choice_label(26), "(27)");
    }

    #[test]
    fn answer_must_be_a_choice() {
        let img = RgbImage::from_pixel(50, 50, Rgb([255, 255, 255]));
        let choices = vec!["a".to_string(), "b".to_string()];
        let err =
            make_vqa_example("q", &img, "?", Some(&choices), "c", &FontSet::builtin()).unwrap_err();
        assert!(matches!(err, TaskError::InvalidAnswer(_)));
    }

    #[test]
    fn caption_passthrough() {
        let png = encode_png(&RgbImage::new(3, 3));
        let r = make_caption_example("x", &png, "a <weird> = caption").unwrap();
        assert_eq!(r.image, RecordImage::Embedded(png));
        assert_eq!(r.target, "a <weird> = caption");
        assert!(matches!(
            make_caption_example("x", &[1], " "),
            Err(TaskError::InvalidTarget)
        ));
    }

    #[test]
    fn refexp_counts() {
        let img = RgbImage::from_pixel(120, 60, Rgb([255, 255, 255]));
        let fonts = FontSet::builtin();
        let style = BoxStyle::default();
        let boxes: Vec<BBox> = (0..7).map(|i| BBox::new(i * 15, 10, 12, 12)).collect();
        let recs = make_refexp_instances("r", &img, "the third icon", &boxes, 2, 9, &fonts, &style)
            .unwrap();
        assert_eq!(recs.len(), 6);
        assert_eq!(recs.iter().filter(|r| r.target == "true").count(), 1);
        assert_eq!(recs[0].id, "r-c2");
        let one = make_refexp_instances("r", &img, "x", &boxes[..1], 0, 9, &fonts, &style).unwrap();
        assert_eq!(one.len(), 1);
        let three =
            make_refexp_instances("r", &img, "x", &boxes[..3], 1, 9, &fonts, &style).unwrap();
        assert_eq!(
            three.iter().map(|r| r.target.as_str()).collect::<Vec<_>>(),
            ["true", "false", "false"]
        );
    }

    #[test]
    fn widget_outside_box_is_an_error() {
        let img = RgbImage::new(10, 10);
        let err = make_widget_example(
            "w",
            &img,
            BBox::new(20, 20, 2, 2),
            "cap",
            &BoxStyle::default(),
        )
        .unwrap_err();
        assert!(matches!(err, TaskError::InvalidBBox(_)));
        let r = make_widget_example(
            "w",
            &img,
            BBox::new(5, 5, 20, 2),
            "cap",
            &BoxStyle::default(),
        )
        .unwrap();
        assert_eq!(
            r.meta.get("bbox_clipped"),
            Some(&serde_json::Value::Bool(true))
        );
    }
}
