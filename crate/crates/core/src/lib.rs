//! Data machinery for screenshot-parsing pretraining and pixel-only finetuning.
//!
//! A captured web page (screenshot plus geometry-annotated DOM, see [`snapshot`]) is condensed
//! into a small parse tree ([`condense`]), a subtree that fits the target budget is chosen
//! ([`subtree`]), about half of its text is masked on the screenshot ([`mask`]) and the result is
//! stored as an image/target pair ([`record`]). [`patch`] plans the variable-resolution patch
//! grid fed to the image encoder, [`render`] draws warmup text, question headers and boxes, and
//! [`tasks`] turns downstream datasets into the same image/text form. [`pipeline`] runs all of it
//! over whole corpora.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `parse_format` | serializing, parsing and pretty-printing trees |
//! | `condense_toy_page` | snapshot fixture to parse string |
//! | `select_and_mask` | subtree selection and span masking on a synthetic page |
//! | `variable_resolution` | grid planning and patch extraction in all three modes |
//! | `warmup_rendering` | rendering text snippets in random styles |
//! | `vqa_header` | question and choice headers |
//! | `refexp` | candidate instances and candidate selection |
//! | `pretrain_corpus` | building and reading sharded pretraining records |

pub mod condense;
pub mod geom;
pub mod hash;
pub mod mask;
pub mod parse_format;
pub mod patch;
pub mod pipeline;
pub mod record;
pub mod render;
pub mod snapshot;
pub mod subtree;
pub mod synth;
pub mod tasks;

pub use condense::{condense, RegionMap};
pub use geom::BBox;
pub use parse_format::{char_length, deserialize, serialize, NodeContent, NodeId, ParseNode};
pub use patch::{patchify, plan_grid, GridMode, GridPlan, PatchGrid};
pub use record::{ExampleRecord, RecordFormat, Task};
pub use snapshot::PageSnapshot;
