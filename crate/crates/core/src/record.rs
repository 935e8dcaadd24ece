//! Training examples and the shard container they are stored in.
//!
//! # Binary shard layout
//!
//! All integers are little-endian.
//!
//! ```text
//! file   := magic record*
//! magic  := "SPREC" 0x00 version:u16            (version = 1)
//! record := frame_len:u32 frame                 (frame_len = byte length of frame)
//! frame  := task:u8
//!           id_len:u32 id:utf8
//!           image_kind:u8                       (0 = embedded bytes, 1 = relative path)
//!           image_len:u32 image:bytes
//!           target_len:u32 target:utf8
//!           meta_len:u32 meta:utf8              (compact JSON object, keys sorted)
//! ```
//!
//! Task tags: 0 screenshot_parsing, 1 warmup, 2 caption, 3 vqa, 4 widget, 5 ref_exp.
//!
//! # JSONL layout
//!
//! One object per line: `{"id", "task", "image_base64" | "image_path", "target", "meta"}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::parse_format::{deserialize, serialize};

pub const MAGIC: &[u8; 6] = b"SPREC\0";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    ScreenshotParsing,
    Warmup,
    Caption,
    Vqa,
    Widget,
    RefExp,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::ScreenshotParsing,
        Task::Warmup,
        Task::Caption,
        Task::Vqa,
        Task::Widget,
        Task::RefExp,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn from_tag(tag: u8) -> Option<Task> {
        Task::ALL.get(usize::from(tag)).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::ScreenshotParsing => "screenshot_parsing",
            Task::Warmup => "warmup",
            Task::Caption => "caption",
            Task::Vqa => "vqa",
            Task::Widget => "widget",
            Task::RefExp => "ref_exp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordImage {
    /// Encoded image bytes (PNG for every image this crate produces).
    Embedded(Vec<u8>),
    /// Path relative to the dataset root.
    Path(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleRecord {
    pub id: String,
    pub task: Task,
    pub image: RecordImage,
    pub target: String,
    pub meta: BTreeMap<String, Value>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed shard at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },
    #[error("malformed jsonl record on line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {id:?} violates the schema: {reason}")]
    Schema { id: String, reason: String },
}

impl ExampleRecord {
    pub fn new(
        id: impl Into<String>,
        task: Task,
        image: RecordImage,
        target: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            task,
            image,
            target: target.into(),
            meta: BTreeMap::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.meta.insert(key.to_owned(), value.into());
        self
    }

    /// Schema check: non-empty id, target and image; screenshot-parsing targets must be canonical
    /// parse strings of at most `target_budget_chars` characters.
    pub fn validate(&self, target_budget_chars: usize) -> Result<(), RecordError> {
        let fail = |reason: String| RecordError::Schema {
            id: self.id.clone(),
            reason,
        };
        if self.id.is_empty() {
            return Err(fail("empty id".into()));
        }
        if self.target.is_empty() {
            return Err(fail("empty target".into()));
        }
        match &self.image {
            RecordImage::Embedded(b) if b.is_empty() => return Err(fail("empty image".into())),
            RecordImage::Path(p) if p.is_empty() => return Err(fail("empty image path".into())),
            _ => {}
        }
        if self.task == Task::ScreenshotParsing {
            let len = self.target.chars().count();
            if len > target_budget_chars {
                return Err(fail(format!(
                    "target has {len} chars, budget is {target_budget_chars}"
                )));
            }
            let tree = deserialize(&self.target)
                .map_err(|e| fail(format!("target does not parse: {e}")))?;
            if serialize(&tree) != self.target {
                return Err(fail("target is not in canonical form".into()));
            }
        }
        Ok(())
    }

    /// Embedded image decoded to RGB, if the record carries one.
    pub fn decode_image(&self) -> Option<image::ImageResult<image::RgbImage>> {
        match &self.image {
            RecordImage::Embedded(bytes) => {
                Some(image::load_from_memory(bytes).map(|i| i.to_rgb8()))
            }
            RecordImage::Path(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFormat {
    #[default]
    Binary,
    Jsonl,
}

impl RecordFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RecordFormat::Binary => "rec",
            RecordFormat::Jsonl => "jsonl",
        }
    }
}

fn put_bytes(buf: &mut Vec<u8>, bytes: &[u8]) {
    buf.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    buf.extend_from_slice(bytes);
}

/// One binary frame (without the leading length).
pub fn encode_frame(record: &ExampleRecord) -> Vec<u8> {
    let meta = serde_json::to_string(&record.meta).expect("meta serializes");
    let mut buf = Vec::new();
    buf.push(record.task.tag());
    put_bytes(&mut buf, record.id.as_bytes());
    match &record.image {
        RecordImage::Embedded(b) => {
            buf.push(0);
            put_bytes(&mut buf, b);
        }
        RecordImage::Path(p) => {
            buf.push(1);
            put_bytes(&mut buf, p.as_bytes());
        }
    }
    put_bytes(&mut buf, record.target.as_bytes());
    put_bytes(&mut buf, meta.as_bytes());
    buf
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    id: String,
    task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_base64: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_path: Option<String>,
    target: String,
    #[serde(default)]
    meta: BTreeMap<String, Value>,
}

pub fn encode_json_line(record: &ExampleRecord) -> String {
    let (image_base64, image_path) = match &record.image {
        RecordImage::Embedded(b) => (Some(BASE64.encode(b)), None),
        RecordImage::Path(p) => (None, Some(p.clone())),
    };
    serde_json::to_string(&JsonRecord {
        id: record.id.clone(),
        task: record.task,
        image_base64,
        image_path,
        target: record.target.clone(),
        meta: record.meta.clone(),
    })
    .expect("record serializes")
}

/// Streams records into a shard.
pub struct RecordWriter<W: Write> {
    out: W,
    format: RecordFormat,
    count: usize,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W, format: RecordFormat) -> io::Result<Self> {
        if format == RecordFormat::Binary {
            out.write_all(MAGIC)?;
            out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        }
        Ok(Self {
            out,
            format,
            count: 0,
        })
    }

    pub fn write(&mut self, record: &ExampleRecord) -> io::Result<()> {
        match self.format {
            RecordFormat::Binary => {
                let frame = encode_frame(record);
                self.out.write_all(&(frame.len() as u32).to_le_bytes())?;
                self.out.write_all(&frame)?;
            }
            RecordFormat::Jsonl => {
                self.out.write_all(encode_json_line(record).as_bytes())?;
                self.out.write_all(b"\n")?;
            }
        }
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

struct FrameCursor<'a> {
    buf: &'a [u8],
    pos: usize,
    base: u64,
}

impl FrameCursor<'_> {
    fn err(&self, reason: &str) -> RecordError {
        RecordError::Format {
            offset: self.base + self.pos as u64,
            reason: reason.to_owned(),
        }
    }

    fn u8(&mut self) -> Result<u8, RecordError> {
        let b = *self
            .buf
            .get(self.pos)
            .ok_or_else(|| self.err("truncated frame"))?;
        self.pos += 1;
        Ok(b)
    }

    fn bytes(&mut self) -> Result<&[u8], RecordError> {
        let len_bytes = self
            .buf
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| self.err("truncated length"))?;
        let len = u32::from_le_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
        self.pos += 4;
        let out = self
            .buf
            .get(self.pos..self.pos + len)
            .ok_or_else(|| self.err("field overruns frame"))?;
        self.pos += len;
        Ok(out)
    }

    fn string(&mut self) -> Result<String, RecordError> {
        let at = self.pos;
        let bytes = self.bytes()?.to_vec();
        String::from_utf8(bytes).map_err(|_| RecordError::Format {
            offset: self.base + at as u64,
            reason: "invalid utf-8".into(),
        })
    }
}

/// Decodes one frame; `base` is its byte offset in the file, used in error reports.
pub fn decode_frame(frame: &[u8], base: u64) -> Result<ExampleRecord, RecordError> {
    let mut c = FrameCursor {
        buf: frame,
        pos: 0,
        base,
    };
    let task = Task::from_tag(c.u8()?).ok_or_else(|| c.err("unknown task tag"))?;
    let id = c.string()?;
    let image = match c.u8()? {
        0 => RecordImage::Embedded(c.bytes()?.to_vec()),
        1 => RecordImage::Path(c.string()?),
        _ => return Err(c.err("unknown image kind")),
    };
    let target = c.string()?;
    let meta_at = c.pos;
    let meta_raw = c.string()?;
    let meta = serde_json::from_str(&meta_raw).map_err(|e| RecordError::Format {
        offset: base + meta_at as u64,
        reason: format!("meta is not a json object: {e}"),
    })?;
    if c.pos != frame.len() {
        return Err(c.err("trailing bytes in frame"));
    }
    Ok(ExampleRecord {
        id,
        task,
        image,
        target,
        meta,
    })
}

/// Reads every record of a binary stream (including its header).
pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<ExampleRecord>, RecordError> {
    let mut header = [0u8; 8];
    input.read_exact(&mut header)?;
    if &header[..6] != MAGIC {
        return Err(RecordError::Format {
            offset: 0,
            reason: "bad magic".into(),
        });
    }
    let version = u16::from_le_bytes([header[6], header[7]]);
    if version != FORMAT_VERSION {
        return Err(RecordError::Format {
            offset: 6,
            reason: format!("unsupported version {version}"),
        });
    }
    let mut offset = 8u64;
    let mut records = Vec::new();
    loop {
        let mut len = [0u8; 4];
        match input.read_exact(&mut len) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let len = u32::from_le_bytes(len) as usize;
        let mut frame = vec![0u8; len];
        input
            .read_exact(&mut frame)
            .map_err(|_| RecordError::Format {
                offset,
                reason: "truncated frame".into(),
            })?;
        records.push(decode_frame(&frame, offset + 4)?);
        offset += 4 + len as u64;
    }
    Ok(records)
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ExampleRecord>, RecordError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let j: JsonRecord = serde_json::from_str(&line).map_err(|source| RecordError::Json {
            line: i + 1,
            source,
        })?;
        let image = match (j.image_base64, j.image_path) {
            (Some(b64), None) => {
                RecordImage::Embedded(BASE64.decode(b64).map_err(|e| RecordError::Format {
                    offset: i as u64,
                    reason: format!("line {}: bad base64: {e}", i + 1),
                })?)
            }
            (None, Some(p)) => RecordImage::Path(p),
            _ => {
                return Err(RecordError::Format {
                    offset: i as u64,
                    reason: format!(
                        "line {}: exactly one of image_base64/image_path required",
                        i + 1
                    ),
                })
            }
        };
        records.push(ExampleRecord {
            id: j.id,
            task: j.task,
            image,
            target: j.target,
            meta: j.meta,
        });
    }
    Ok(records)
}

/// Reads a shard file in either format, detected from its first bytes.
pub fn read_records(path: &Path) -> Result<Vec<ExampleRecord>, RecordError> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        read_binary(bytes.as_slice())
    } else {
        read_jsonl(BufReader::new(bytes.as_slice()))
    }
}
