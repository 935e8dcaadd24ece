//! Corpus builders: snapshots, text or task manifests in; sharded record files plus a
//! `manifest.json` out.
//!
//! Output bytes depend only on the inputs and the config. Pages are processed on a worker pool,
//! but results are consumed in input order, each record goes to the shard picked by
//! [`shard_for`] on its id, and the manifest holds no timestamps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use image::RgbImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::condense::{condense, CondenseError};
use crate::geom::BBox;
use crate::hash::{page_seed, shard_for, stable_hash};
use crate::mask::{apply_masks, plan_masks, MaskConfig, DEFAULT_MASK_COLOR, DEFAULT_MASK_FRACTION};
use crate::parse_format::{deserialize, serialize, to_pretty};
use crate::patch::{plan_grid, DEFAULT_PATCH_SIZE, DEFAULT_SEQUENCE_BUDGET};
use crate::record::{
    read_records, ExampleRecord, RecordError, RecordFormat, RecordImage, RecordWriter, Task,
    FORMAT_VERSION,
};
use crate::render::{
    render_text_image, sample_warmup_style, BoxStyle, Color, FontSet, RenderError, WARMUP_WIDTH,
};
use crate::snapshot::{
    list_snapshot_dirs, load_snapshot_dir, validate, PageSnapshot, SnapshotError, SnapshotIssue,
};
use crate::subtree::{
    draw_selection, select_subtree, SelectError, DEFAULT_TARGET_BUDGET_CHARS, MIN_BUDGET_CHARS,
};
use crate::tasks::{
    encode_png, make_caption_example, make_refexp_instances, make_vqa_example, make_widget_example,
    TaskError,
};

pub const MANIFEST_NAME: &str = "manifest.json";
pub const DEFAULT_SHARDS: usize = 1;
pub const MAX_SNIPPET_BYTES: usize = 128;

/// Pages handed to the pool at a time; bounds memory on large corpora.
const CHUNK: usize = 64;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("{path}:{line}: {reason}")]
    TaskManifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: {source}")]
    Task {
        path: PathBuf,
        line: usize,
        #[source]
        source: TaskError,
    },
}

impl PipelineError {
    /// Whether the error comes from how the tool was invoked rather than from the data.
    pub fn is_usage(&self) -> bool {
        matches!(self, PipelineError::Config(_))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ShardInfo {
    pub path: String,
    pub records: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SkippedInput {
    pub id: String,
    pub reason: String,
}

/// Summary written next to the shards.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorpusManifest {
    pub kind: String,
    pub format: RecordFormat,
    pub format_version: u16,
    pub inputs: usize,
    pub records: usize,
    pub skipped: BTreeMap<String, usize>,
    pub skipped_inputs: Vec<SkippedInput>,
    pub task_counts: BTreeMap<String, usize>,
    pub config: Value,
    pub shards: Vec<ShardInfo>,
}

impl CorpusManifest {
    pub fn load(out_dir: &Path) -> Result<Self, PipelineError> {
        let path = out_dir.join(MANIFEST_NAME);
        let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
        serde_json::from_str(&raw).map_err(|e| PipelineError::TaskManifest {
            path,
            line: e.line(),
            reason: e.to_string(),
        })
    }
}

struct ShardSet {
    dir: PathBuf,
    names: Vec<String>,
    writers: Vec<RecordWriter<BufWriter<File>>>,
    budget: usize,
    task_counts: BTreeMap<String, usize>,
}

impl ShardSet {
    fn create(
        dir: &Path,
        prefix: &str,
        shards: usize,
        format: RecordFormat,
        budget: usize,
    ) -> Result<Self, PipelineError> {
        if shards == 0 {
            return Err(PipelineError::Config("--shards must be at least 1".into()));
        }
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut names = Vec::with_capacity(shards);
        let mut writers = Vec::with_capacity(shards);
        for i in 0..shards {
            let name = format!("{prefix}-{i:05}-of-{shards:05}.{}", format.extension());
            let path = dir.join(&name);
            let file = File::create(&path).map_err(io_err(&path))?;
            writers.push(RecordWriter::new(BufWriter::new(file), format).map_err(io_err(&path))?);
            names.push(name);
        }
        Ok(Self {
            dir: dir.to_owned(),
            names,
            writers,
            budget,
            task_counts: BTreeMap::new(),
        })
    }

    fn write(&mut self, record: &ExampleRecord) -> Result<(), PipelineError> {
        record.validate(self.budget)?;
        let shard = shard_for(&record.id, self.writers.len());
        let path = self.dir.join(&self.names[shard]);
        self.writers[shard].write(record).map_err(io_err(&path))?;
        *self
            .task_counts
            .entry(record.task.name().to_owned())
            .or_default() += 1;
        Ok(())
    }

    fn finish(self) -> Result<(Vec<ShardInfo>, BTreeMap<String, usize>), PipelineError> {
        let mut infos = Vec::with_capacity(self.names.len());
        for (name, writer) in self.names.into_iter().zip(self.writers) {
            let path = self.dir.join(&name);
            let records = writer.count();
            writer
                .finish()
                .and_then(|w| w.into_inner().map_err(|e| e.into_error()))
                .map_err(io_err(&path))?;
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            infos.push(ShardInfo {
                path: name,
                records,
                sha256: hex::encode(Sha256::digest(&bytes)),
            });
        }
        Ok((infos, self.task_counts))
    }
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PipelineError::Config(format!("cannot start worker pool: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    out_dir: &Path,
    kind: &str,
    format: RecordFormat,
    inputs: usize,
    skipped_inputs: Vec<SkippedInput>,
    config: Value,
    shards: ShardSet,
) -> Result<CorpusManifest, PipelineError> {
    let (shards, task_counts) = shards.finish()?;
    let mut skipped = BTreeMap::new();
    for s in &skipped_inputs {
        *skipped.entry(s.reason.clone()).or_default() += 1;
    }
    let manifest = CorpusManifest {
        kind: kind.to_owned(),
        format,
        format_version: FORMAT_VERSION,
        inputs,
        records: shards.iter().map(|s| s.records).sum(),
        skipped,
        skipped_inputs,
        task_counts,
        config,
        shards,
    };
    let path = out_dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(manifest)
}

// ---------------------------------------------------------------------------------------------
// Screenshot parsing

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PretrainConfig {
    pub seed: u64,
    pub target_budget_chars: usize,
    pub mask_fraction: f64,
    pub mask_color: Color,
    pub mask: MaskConfig,
    pub box_style: BoxStyle,
    pub patch_size: u32,
    pub sequence_budget: usize,
    pub shards: usize,
    pub format: RecordFormat,
    /// Worker threads; 0 uses one per core. Never affects the output.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            target_budget_chars: DEFAULT_TARGET_BUDGET_CHARS,
            mask_fraction: DEFAULT_MASK_FRACTION,
            mask_color: DEFAULT_MASK_COLOR,
            mask: MaskConfig::default(),
            box_style: BoxStyle::default(),
            patch_size: DEFAULT_PATCH_SIZE,
            sequence_budget: DEFAULT_SEQUENCE_BUDGET,
            shards: DEFAULT_SHARDS,
            format: RecordFormat::Binary,
            workers: 0,
        }
    }
}

impl PretrainConfig {
    pub fn check(&self) -> Result<(), PipelineError> {
        if self.target_budget_chars < MIN_BUDGET_CHARS {
            return Err(PipelineError::Config(format!(
                "target budget must be at least {MIN_BUDGET_CHARS} characters"
            )));
        }
        if !(0.0..=1.0).contains(&self.mask_fraction) {
            return Err(PipelineError::Config(
                "mask fraction must lie in [0, 1]".into(),
            ));
        }
        if self.patch_size == 0 || self.sequence_budget == 0 {
            return Err(PipelineError::Config(
                "patch size and sequence budget must be positive".into(),
            ));
        }
        if self.shards == 0 {
            return Err(PipelineError::Config("--shards must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why a page produced no example.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    InvalidSnapshot,
    EmptyTree,
    NoFeasibleSubtree,
}

impl SkipReason {
    pub fn name(self) -> &'static str {
        match self {
            SkipReason::InvalidSnapshot => "invalid_snapshot",
            SkipReason::EmptyTree => "empty_tree",
            SkipReason::NoFeasibleSubtree => "no_feasible_subtree",
        }
    }
}

/// The complete per-page procedure: condense, pick the largest subtree within the character
/// budget, mask about `mask_fraction` of its text on the screenshot, outline its region, and
/// pair the image with the subtree's parse string.
pub fn pretrain_example(
    page: &PageSnapshot,
    config: &PretrainConfig,
) -> Result<ExampleRecord, SkipReason> {
    let (tree, regions) =
        condense(page).map_err(|CondenseError::EmptyTree| SkipReason::EmptyTree)?;
    let selection =
        select_subtree(&tree, &regions, config.target_budget_chars).map_err(|e| match e {
            SelectError::NoFeasibleSubtree { .. } | SelectError::BudgetTooSmall(_) => {
                SkipReason::NoFeasibleSubtree
            }
        })?;
    let seed = page_seed(config.seed, &page.id);
    let plan = plan_masks(
        &selection.subtree,
        &regions,
        config.mask_fraction,
        seed,
        &config.mask,
    );
    let mut image = apply_masks(&page.screenshot, &plan, config.mask_color);
    if let Some(bbox) = selection.bbox {
        image = draw_selection(&image, bbox, &config.box_style);
    }
    let grid = plan_grid(
        image.width(),
        image.height(),
        config.patch_size,
        config.sequence_budget,
    )
    .expect("non-empty screenshot and positive patch config");
    let bbox = selection
        .bbox
        .map(|b| json!([b.x, b.y, b.w, b.h]))
        .unwrap_or(Value::Null);

    Ok(ExampleRecord::new(
        page.id.clone(),
        Task::ScreenshotParsing,
        RecordImage::Embedded(encode_png(&image)),
        serialize(&selection.subtree),
    )
    .with_meta("seed", seed)
    .with_meta("url_hash", format!("{:016x}", stable_hash(&page.url)))
    .with_meta("chars", selection.char_len)
    .with_meta("subtree_depth", selection.depth)
    .with_meta("bbox", bbox)
    .with_meta("masked_fraction", plan.masked_fraction)
    .with_meta("masked_spans", plan.spans.len())
    .with_meta("text_chars", plan.total_chars)
    .with_meta(
        "grid",
        json!({
            "rows": grid.rows,
            "cols": grid.cols,
            "patch_size": grid.patch_size,
            "scale": grid.scale,
            "budget": grid.budget,
        }),
    ))
}

fn load_valid(dir: &Path) -> Result<PageSnapshot, SkipReason> {
    let loaded = load_snapshot_dir(dir).map_err(|_| SkipReason::InvalidSnapshot)?;
    let issues = validate(&loaded.snapshot, &loaded.manifest);
    // A page without visible nodes is reported by the condenser as an empty tree.
    if issues
        .iter()
        .any(|i| !matches!(i, SnapshotIssue::NoVisibleNodes))
    {
        return Err(SkipReason::InvalidSnapshot);
    }
    Ok(loaded.snapshot)
}

fn dir_id(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Builds screenshot-parsing shards from every snapshot directory under `snapshot_root`.
pub fn build_pretrain(
    snapshot_root: &Path,
    out_dir: &Path,
    config: &PretrainConfig,
) -> Result<CorpusManifest, PipelineError> {
    config.check()?;
    let dirs = list_snapshot_dirs(snapshot_root)?;
    let pool = worker_pool(config.workers)?;
    let mut shards = ShardSet::create(
        out_dir,
        "pretrain",
        config.shards,
        config.format,
        config.target_budget_chars,
    )?;
    let mut skipped = Vec::new();
    for chunk in dirs.chunks(CHUNK) {
        let results: Vec<_> = pool.install(|| {
            chunk
                .par_iter()
                .map(|dir| load_valid(dir).and_then(|page| pretrain_example(&page, config)))
                .collect()
        });
        for (dir, result) in chunk.iter().zip(results) {
            match result {
                Ok(record) => shards.write(&record)?,
                Err(reason) => skipped.push(SkippedInput {
                    id: dir_id(dir),
                    reason: reason.name().to_owned(),
                }),
            }
        }
    }
    let echo = serde_json::to_value(config).expect("config serializes");
    write_manifest(
        out_dir,
        "pretrain",
        config.format,
        dirs.len(),
        skipped,
        echo,
        shards,
    )
}

// ---------------------------------------------------------------------------------------------
// Warmup

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WarmupConfig {
    pub seed: u64,
    pub width: u32,
    pub max_snippet_bytes: usize,
    pub shards: usize,
    pub format: RecordFormat,
    #[serde(skip)]
    pub workers: usize,
}

impl Default for WarmupConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            width: WARMUP_WIDTH,
            max_snippet_bytes: MAX_SNIPPET_BYTES,
            shards: DEFAULT_SHARDS,
            format: RecordFormat::Binary,
            workers: 0,
        }
    }
}

fn push_long_word(word: &str, max_bytes: usize, out: &mut Vec<String>) {
    let mut piece = String::new();
    for c in word.chars() {
        if piece.len() + c.len_utf8() > max_bytes && !piece.is_empty() {
            out.push(std::mem::take(&mut piece));
        }
        piece.push(c);
    }
    if !piece.is_empty() {
        out.push(piece);
    }
}

/// Splits text into snippets of at most `max_bytes` UTF-8 bytes. Snippets never span lines;
/// words are packed greedily and joined by single spaces, and a word longer than the limit is
/// cut between characters.
pub fn split_snippets(text: &str, max_bytes: usize) -> Vec<String> {
    let max_bytes = max_bytes.max(4);
    let mut out = Vec::new();
    for line in text.lines() {
        let mut current = String::new();
        for word in line.split_whitespace() {
            let needed = if current.is_empty() {
                word.len()
            } else {
                current.len() + 1 + word.len()
            };
            if needed <= max_bytes {
                if !current.is_empty() {
                    current.push(' ');
                }
                current.push_str(word);
                continue;
            }
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
            if word.len() <= max_bytes {
                current.push_str(word);
            } else {
                push_long_word(word, max_bytes, &mut out);
            }
        }
        if !current.is_empty() {
            out.push(current);
        }
    }
    out
}

/// One warmup example: the snippet rendered in a random color, font and size.
pub fn warmup_example(
    id: &str,
    snippet: &str,
    config: &WarmupConfig,
    fonts: &FontSet,
) -> Result<ExampleRecord, RenderError> {
    let seed = page_seed(config.seed, id);
    let style = sample_warmup_style(seed, fonts);
    let rendered = render_text_image(snippet, &style, config.width, fonts)?;
    let mut record = ExampleRecord::new(
        id,
        Task::Warmup,
        RecordImage::Embedded(encode_png(&rendered.image)),
        snippet,
    )
    .with_meta("seed", seed)
    .with_meta("font_id", style.font_id.clone())
    .with_meta("size_pt", style.size_pt)
    .with_meta("color", json!(style.color))
    .with_meta("lines", rendered.lines.len());
    if rendered.missing_glyphs > 0 {
        record = record.with_meta("missing_glyphs", rendered.missing_glyphs);
    }
    Ok(record)
}

pub fn build_warmup(
    corpus: &Path,
    out_dir: &Path,
    config: &WarmupConfig,
    fonts: &FontSet,
) -> Result<CorpusManifest, PipelineError> {
    if config.width == 0 {
        return Err(PipelineError::Config("width must be positive".into()));
    }
    let text = fs::read_to_string(corpus).map_err(io_err(corpus))?;
    let snippets = split_snippets(&text, config.max_snippet_bytes);
    let pool = worker_pool(config.workers)?;
    let mut shards = ShardSet::create(out_dir, "warmup", config.shards, config.format, usize::MAX)?;
    let indexed: Vec<(usize, &String)> = snippets.iter().enumerate().collect();
    for chunk in indexed.chunks(CHUNK) {
        let results: Vec<_> = pool.install(|| {
            chunk
                .par_iter()
                .map(|(i, s)| warmup_example(&format!("warmup-{i:08}"), s, config, fonts))
                .collect()
        });
        for record in results {
            shards.write(&record?)?;
        }
    }
    let mut echo = serde_json::to_value(config).expect("config serializes");
    echo["fonts"] = json!(fonts.ids().collect::<Vec<_>>());
    write_manifest(
        out_dir,
        "warmup",
        config.format,
        snippets.len(),
        Vec::new(),
        echo,
        shards,
    )
}

// ---------------------------------------------------------------------------------------------
// Finetuning tasks

/// One line of a task manifest. Image paths are relative to the manifest's directory.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskItem {
    Caption {
        id: String,
        image: String,
        caption: String,
    },
    Vqa {
        id: String,
        image: String,
        question: String,
        #[serde(default)]
        choices: Option<Vec<String>>,
        answer: String,
    },
    Widget {
        id: String,
        image: String,
        /// `[x, y, w, h]` in pixels.
        bbox: [u32; 4],
        caption: String,
    },
    RefExp {
        id: String,
        image: String,
        expression: String,
        candidates: Vec<[u32; 4]>,
        positive_index: usize,
    },
}

impl TaskItem {
    pub fn id(&self) -> &str {
        match self {
            TaskItem::Caption { id, .. }
            | TaskItem::Vqa { id, .. }
            | TaskItem::Widget { id, .. }
            | TaskItem::RefExp { id, .. } => id,
        }
    }

    pub fn image(&self) -> &str {
        match self {
            TaskItem::Caption { image, .. }
            | TaskItem::Vqa { image, .. }
            | TaskItem::Widget { image, .. }
            | TaskItem::RefExp { image, .. } => image,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FinetuneConfig {
    pub seed: u64,
    pub box_style: BoxStyle,
    pub shards: usize,
    pub format: RecordFormat,
}

impl Default for FinetuneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            box_style: BoxStyle::default(),
            shards: DEFAULT_SHARDS,
            format: RecordFormat::Binary,
        }
    }
}

fn bbox_of(b: [u32; 4]) -> BBox {
    BBox::new(b[0], b[1], b[2], b[3])
}

/// Records for one task item. `image_bytes` is the encoded image file.
pub fn finetune_records(
    item: &TaskItem,
    image_bytes: &[u8],
    config: &FinetuneConfig,
    fonts: &FontSet,
) -> Result<Vec<ExampleRecord>, TaskError> {
    if let TaskItem::Caption { id, caption, .. } = item {
        return Ok(vec![make_caption_example(id, image_bytes, caption)?]);
    }
    let image: RgbImage = image::load_from_memory(image_bytes)?.to_rgb8();
    Ok(match item {
        TaskItem::Caption { .. } => unreachable!("handled above"),
        TaskItem::Vqa {
            id,
            question,
            choices,
            answer,
            ..
        } => vec![make_vqa_example(
            id,
            &image,
            question,
            choices.as_deref(),
            answer,
            fonts,
        )?],
        TaskItem::Widget {
            id, bbox, caption, ..
        } => {
            vec![make_widget_example(
                id,
                &image,
                bbox_of(*bbox),
                caption,
                &config.box_style,
            )?]
        }
        TaskItem::RefExp {
            id,
            expression,
            candidates,
            positive_index,
            ..
        } => {
            let boxes: Vec<BBox> = candidates.iter().copied().map(bbox_of).collect();
            make_refexp_instances(
                id,
                &image,
                expression,
                &boxes,
                *positive_index,
                page_seed(config.seed, id),
                fonts,
                &config.box_style,
            )?
        }
    })
}

/// Reads a task manifest: one JSON object per non-blank line.
pub fn read_task_manifest(path: &Path) -> Result<Vec<(usize, TaskItem)>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut items = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| PipelineError::TaskManifest {
            path: path.to_owned(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        items.push((i + 1, item));
    }
    Ok(items)
}

/// Builds finetuning shards from a task manifest. Any invalid item aborts the build with its
/// line number.
pub fn build_finetune(
    task_manifest: &Path,
    out_dir: &Path,
    config: &FinetuneConfig,
    fonts: &FontSet,
) -> Result<CorpusManifest, PipelineError> {
    let items = read_task_manifest(task_manifest)?;
    let base = task_manifest.parent().unwrap_or(Path::new("."));
    let mut shards = ShardSet::create(
        out_dir,
        "finetune",
        config.shards,
        config.format,
        usize::MAX,
    )?;
    for (line, item) in &items {
        let image_path = base.join(item.image());
        let bytes = fs::read(&image_path).map_err(io_err(&image_path))?;
        let records = finetune_records(item, &bytes, config, fonts).map_err(|source| {
            PipelineError::Task {
                path: task_manifest.to_owned(),
                line: *line,
                source,
            }
        })?;
        for record in &records {
            shards.write(record)?;
        }
    }
    let echo = serde_json::to_value(config).expect("config serializes");
    write_manifest(
        out_dir,
        "finetune",
        config.format,
        items.len(),
        Vec::new(),
        echo,
        shards,
    )
}

// ---------------------------------------------------------------------------------------------
// Inspection helpers

/// Per-directory validation outcome for `validate-snapshots`.
#[derive(Debug)]
pub struct SnapshotReport {
    pub id: String,
    pub outcome: Result<Vec<SnapshotIssue>, SnapshotError>,
}

impl SnapshotReport {
    pub fn is_ok(&self) -> bool {
        matches!(&self.outcome, Ok(issues) if issues.is_empty())
    }
}

pub fn validate_snapshots(root: &Path) -> Result<Vec<SnapshotReport>, PipelineError> {
    Ok(list_snapshot_dirs(root)?
        .iter()
        .map(|dir| SnapshotReport {
            id: dir_id(dir),
            outcome: load_snapshot_dir(dir).map(|l| validate(&l.snapshot, &l.manifest)),
        })
        .collect())
}

/// Human-readable dump of record `index` in `record_file`; optionally writes its image.
pub fn inspect(
    record_file: &Path,
    index: usize,
    image_out: Option<&Path>,
) -> Result<String, PipelineError> {
    let records = read_records(record_file)?;
    let record = records.get(index).ok_or_else(|| {
        PipelineError::Config(format!(
            "index {index} out of range ({} records)",
            records.len()
        ))
    })?;
    let mut out = String::new();
    let _ = writeln!(out, "id:     {}", record.id);
    let _ = writeln!(out, "task:   {}", record.task.name());
    match &record.image {
        RecordImage::Path(p) => {
            let _ = writeln!(out, "image:  {p}");
        }
        RecordImage::Embedded(bytes) => {
            let _ = write!(out, "image:  {} bytes embedded", bytes.len());
            if let Some(Ok(img)) = record.decode_image() {
                let (w, h) = img.dimensions();
                let _ = write!(out, ", {w}x{h}");
                if let Ok(g) = plan_grid(w, h, DEFAULT_PATCH_SIZE, DEFAULT_SEQUENCE_BUDGET) {
                    let _ = write!(
                        out,
                        ", grid {}x{} = {} patches of {} (scale {:.4})",
                        g.rows,
                        g.cols,
                        g.patches(),
                        g.patch_size,
                        g.scale
                    );
                }
                if let Some(path) = image_out {
                    img.save(path).map_err(|e| {
                        PipelineError::Config(format!("cannot write {}: {e}", path.display()))
                    })?;
                }
            }
            let _ = writeln!(out);
        }
    }
    let _ = writeln!(
        out,
        "meta:   {}",
        serde_json::to_string(&record.meta).expect("meta serializes")
    );
    let _ = writeln!(out, "target ({} chars):", record.target.chars().count());
    match (record.task, deserialize(&record.target)) {
        (Task::ScreenshotParsing, Ok(tree)) => out.push_str(&to_pretty(&tree)),
        _ => out.push_str(&record.target),
    }
    out.push('\n');
    Ok(out)
}
