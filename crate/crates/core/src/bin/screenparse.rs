use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use screenparse::condense::condense;
use screenparse::parse_format::{serialize, to_pretty};
use screenparse::patch::{
    patchify, plan_grid, plan_grid_padded, plan_grid_stretched, GridMode, Resampler,
    DEFAULT_PATCH_SIZE, DEFAULT_SEQUENCE_BUDGET,
};
use screenparse::pipeline::{
    build_finetune, build_pretrain, build_warmup, inspect, validate_snapshots, CorpusManifest,
    FinetuneConfig, PipelineError, PretrainConfig, WarmupConfig,
};
use screenparse::record::RecordFormat;
use screenparse::render::{Color, FontSet, WARMUP_WIDTH};
use screenparse::snapshot::load_snapshot_dir;
use screenparse::subtree::DEFAULT_TARGET_BUDGET_CHARS;

const USAGE: u8 = 1;
const DATA: u8 = 2;

/// Screenshot-parsing corpus toolkit.
#[derive(Parser)]
#[command(name = "screenparse", version)]
struct Cli {
    /// Directory of .ttf/.otf fonts added to the built-in font.
    #[arg(long, global = true, env = "SCREENPARSE_FONT_DIR")]
    font_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Binary,
    Jsonl,
}

impl From<Format> for RecordFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Binary => RecordFormat::Binary,
            Format::Jsonl => RecordFormat::Jsonl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Variable,
    Padded,
    Stretched,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Nearest,
    Bilinear,
}

#[derive(Args)]
struct Output {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[arg(long, value_enum, default_value_t = Format::Binary)]
    format: Format,
    /// Worker threads (0 = one per core). Does not change the output.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check every snapshot directory under ROOT.
    ValidateSnapshots { root: PathBuf },
    /// Print the condensed parse of one snapshot directory.
    Condense {
        snapshot: PathBuf,
        /// Indented multi-line layout instead of the canonical string.
        #[arg(long)]
        pretty: bool,
    },
    /// Build screenshot-parsing records from snapshot directories.
    BuildPretrain {
        snapshots: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = DEFAULT_TARGET_BUDGET_CHARS)]
        target_budget_chars: usize,
        #[arg(long, default_value_t = 0.5)]
        mask_fraction: f64,
        /// `R,G,B` or `#rrggbb`.
        #[arg(long, value_parser = parse_color, default_value = "128,128,128")]
        mask_color: Color,
        /// Patch slots per image.
        #[arg(long, default_value_t = DEFAULT_SEQUENCE_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_PATCH_SIZE)]
        patch_size: u32,
    },
    /// Render text snippets from a plain-text corpus.
    BuildWarmup {
        corpus: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        output: Output,
        #[arg(long, default_value_t = WARMUP_WIDTH)]
        width: u32,
    },
    /// Preprocess a line-delimited JSON task manifest.
    BuildFinetune {
        manifest: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Plan a patch grid for an image and optionally write the patches.
    Patchify {
        image: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEQUENCE_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_PATCH_SIZE)]
        patch_size: u32,
        #[arg(long, value_enum, default_value_t = Mode::Variable)]
        mode: Mode,
        /// Canvas side for padded and stretched modes (default: largest square within the budget).
        #[arg(long)]
        side: Option<u32>,
        #[arg(long, value_enum, default_value_t = Sampler::Bilinear)]
        resampler: Sampler,
        /// Write the patch grid here (binary, or one JSON object with --format jsonl).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Binary)]
        format: Format,
    },
    /// Dump one record of a shard.
    Inspect {
        records: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Write the record's image to this file.
        #[arg(long)]
        image_out: Option<PathBuf>,
    },
}

fn parse_color(s: &str) -> Result<Color, String> {
    let bad = || format!("expected R,G,B or #rrggbb, got {s:?}");
    if let Some(hex) = s.strip_prefix('#') {
        let v = hex::decode(hex).map_err(|_| bad())?;
        return <[u8; 3]>::try_from(v.as_slice()).map_err(|_| bad());
    }
    let parts: Vec<u8> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    <[u8; 3]>::try_from(parts.as_slice()).map_err(|_| bad())
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

fn fonts(dir: Option<&Path>) -> Result<FontSet, Failure> {
    match dir {
        Some(d) => FontSet::with_dir(d).map_err(|e| Failure::Usage(e.to_string())),
        None => Ok(FontSet::builtin()),
    }
}

fn summarize(m: &CorpusManifest, out: &Path) {
    println!(
        "{} records in {} shard(s) under {}",
        m.records,
        m.shards.len(),
        out.display()
    );
    for (reason, n) in &m.skipped {
        println!("skipped {n} input(s): {reason}");
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let font_dir = cli.font_dir.as_deref();
    match cli.command {
        Command::ValidateSnapshots { root } => {
            let reports = validate_snapshots(&root)?;
            let mut bad = 0;
            for r in &reports {
                match &r.outcome {
                    Ok(issues) if issues.is_empty() => println!("ok       {}", r.id),
                    Ok(issues) => {
                        bad += 1;
                        for i in issues {
                            println!("invalid  {}: {i}", r.id);
                        }
                    }
                    Err(e) => {
                        bad += 1;
                        println!("error    {}: {e}", r.id);
                    }
                }
            }
            println!("{} snapshot(s), {bad} with problems", reports.len());
            if bad > 0 {
                return Err(Failure::Data(format!("{bad} invalid snapshot(s)")));
            }
        }
        Command::Condense { snapshot, pretty } => {
            let loaded = load_snapshot_dir(&snapshot).map_err(|e| Failure::Data(e.to_string()))?;
            let (tree, _) = condense(&loaded.snapshot).map_err(|e| Failure::Data(e.to_string()))?;
            println!(
                "{}",
                if pretty {
                    to_pretty(&tree)
                } else {
                    serialize(&tree)
                }
            );
        }
        Command::BuildPretrain {
            snapshots,
            out,
            output,
            target_budget_chars,
            mask_fraction,
            mask_color,
            budget,
            patch_size,
        } => {
            let config = PretrainConfig {
                seed: output.seed,
                target_budget_chars,
                mask_fraction,
                mask_color,
                patch_size,
                sequence_budget: budget,
                shards: output.shards,
                format: output.format.into(),
                workers: output.workers,
                ..PretrainConfig::default()
            };
            summarize(&build_pretrain(&snapshots, &out, &config)?, &out);
        }
        Command::BuildWarmup {
            corpus,
            out,
            output,
            width,
        } => {
            let config = WarmupConfig {
                seed: output.seed,
                width,
                shards: output.shards,
                format: output.format.into(),
                workers: output.workers,
                ..WarmupConfig::default()
            };
            summarize(
                &build_warmup(&corpus, &out, &config, &fonts(font_dir)?)?,
                &out,
            );
        }
        Command::BuildFinetune {
            manifest,
            out,
            output,
        } => {
            let config = FinetuneConfig {
                seed: output.seed,
                shards: output.shards,
                format: output.format.into(),
                ..FinetuneConfig::default()
            };
            summarize(
                &build_finetune(&manifest, &out, &config, &fonts(font_dir)?)?,
                &out,
            );
        }
        Command::Patchify {
            image,
            budget,
            patch_size,
            mode,
            side,
            resampler,
            out,
            format,
        } => {
            let img = image::open(&image)
                .map_err(|e| Failure::Data(format!("{}: {e}", image.display())))?
                .to_rgb8();
            let (w, h) = img.dimensions();
            let side = side.unwrap_or_else(|| (budget as f64).sqrt().floor() as u32 * patch_size);
            let plan = match mode {
                Mode::Variable => plan_grid(w, h, patch_size, budget),
                Mode::Padded => plan_grid_padded(w, h, patch_size, side),
                Mode::Stretched => plan_grid_stretched(w, h, patch_size, side),
            }
            .map_err(|e| Failure::Usage(e.to_string()))?;
            let resampler = match resampler {
                Sampler::Nearest => Resampler::Nearest,
                Sampler::Bilinear => Resampler::Bilinear,
            };
            let mode_name = match plan.mode {
                GridMode::Variable => "variable",
                GridMode::Padded => "padded",
                GridMode::Stretched => "stretched",
            };
            println!("source      {w}x{h}");
            println!("mode        {mode_name}");
            println!(
                "grid        {} rows x {} cols = {} patches of {}px",
                plan.rows,
                plan.cols,
                plan.patches(),
                patch_size
            );
            println!("scale       {:.6}", plan.scale);
            println!(
                "canvas      {}x{} (content {}x{})",
                plan.target_w, plan.target_h, plan.content_w, plan.content_h
            );
            println!(
                "slots       {} used of {}",
                plan.patches(),
                plan.budget.max(plan.patches())
            );
            if let Some(path) = out {
                let grid = patchify(&img, &plan, resampler);
                let bytes = match format {
                    Format::Binary => grid.encode(),
                    Format::Jsonl => {
                        let mut line = serde_json::to_vec(&grid).expect("grid serializes");
                        line.push(b'\n');
                        line
                    }
                };
                std::fs::write(&path, bytes)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Inspect {
            records,
            index,
            image_out,
        } => {
            print!("{}", inspect(&records, index, image_out.as_deref())?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(DATA)
        }
    }
}
