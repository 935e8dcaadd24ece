//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use screenparse::condense::{condense, RegionMap};
use screenparse::hash::page_seed;
use screenparse::mask::{plan_masks, MaskConfig};
use screenparse::parse_format::{char_length, deserialize, serialize};
use screenparse::patch::plan_grid;
use screenparse::pipeline::{
    build_pretrain, build_warmup, finetune_records, CorpusManifest, FinetuneConfig, PretrainConfig,
    TaskItem, WarmupConfig,
};
use screenparse::record::{read_records, Task};
use screenparse::render::FontSet;
use screenparse::snapshot::load_snapshot_dir;
use screenparse::subtree::{select_subtree, SelectError};
use screenparse::synth::{random_page, random_tree, write_corpus, SynthConfig};
use screenparse::tasks::{
    encode_png, select_refexp_candidate, Generation, FALSE_TARGET, TRUE_TARGET,
};
use screenparse::ExampleRecord;

const GOLDEN: &str =
    "<<<Python> <img_src=py_logo img_alt=Python>> <<C++> <img_src=cpp_logo img_alt=C++>> \
                      <<Java> <img_src=java_logo img_alt=Java>> <Submit>>";

type Outcome = Result<String, String>;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn golden_parse() -> Outcome {
    let start = Instant::now();
    let loaded =
        load_snapshot_dir(&fixtures().join("snapshots/toy_page")).map_err(|e| e.to_string())?;
    let (tree, _) = condense(&loaded.snapshot).map_err(|e| e.to_string())?;
    let got = serialize(&tree);
    let elapsed = start.elapsed();
    if collapse_ws(&got) != collapse_ws(GOLDEN) {
        return Err(format!("got {got}"));
    }
    if elapsed >= Duration::from_secs(1) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("{elapsed:?}"))
}

fn grammar_roundtrip() -> Outcome {
    let failures = (0..10_000u64)
        .into_par_iter()
        .filter(|&seed| {
            let tree = random_tree(&mut ChaCha8Rng::seed_from_u64(seed), 60);
            deserialize(&serialize(&tree)).as_ref() != Ok(&tree)
        })
        .count();
    if failures == 0 {
        Ok("10000 trees".into())
    } else {
        Err(format!("{failures} failures"))
    }
}

fn subtree_optimality() -> Outcome {
    let start = Instant::now();
    let regions = RegionMap::new(1, 1);
    let mut mismatches = 0;
    for seed in 0..1000u64 {
        let tree = random_tree(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 50);
        for budget in [64, 256, 1024] {
            let got = select_subtree(&tree, &regions, budget);
            let want = common::brute_force_subtree(&tree, budget);
            let same = match (&got, want) {
                (Ok(s), Some((len, depth, index, node))) => {
                    s.char_len == len
                        && s.depth == depth
                        && s.preorder_index == index
                        && &s.subtree == node
                }
                (Err(SelectError::NoFeasibleSubtree { .. }), None) => true,
                _ => false,
            };
            mismatches += usize::from(!same);
        }
    }
    let elapsed = start.elapsed();
    if mismatches > 0 {
        return Err(format!("{mismatches} mismatches"));
    }
    if elapsed >= Duration::from_secs(30) {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!("3000 selections in {elapsed:?}"))
}

fn grid_maximality() -> Outcome {
    let mut mismatches = Vec::new();
    // 10 x 10 sizes on an even lattice over [16, 512] plus sizes on a coprime stride so odd
    // aspect ratios show up; three budgets each, the first 1000 (size, budget) pairs are checked.
    let mut cases = Vec::new();
    for i in 0..10u32 {
        for j in 0..10u32 {
            cases.push((16 + i * 496 / 9, 16 + j * 496 / 9));
        }
    }
    for k in 0..234u32 {
        cases.push((16 + (k * 37) % 497, 16 + (k * 101) % 497));
    }
    let mut n = 0;
    for (w, h) in cases {
        for budget in [16usize, 64, 256] {
            if n == 1000 {
                break;
            }
            n += 1;
            let got = plan_grid(w, h, 16, budget)
                .map(|p| p.patches() as u64)
                .unwrap_or(0);
            let want = common::brute_force_grid(w, h, budget);
            if got != want {
                mismatches.push(format!("{w}x{h}@{budget}: {got} vs {want}"));
            }
        }
    }
    let anchors = [((1024, 1024), (45, 45)), ((2048, 1024), (32, 64))];
    for ((w, h), (r, c)) in anchors {
        match plan_grid(w, h, 16, 2048) {
            Ok(p) if (p.rows, p.cols) == (r, c) => {}
            Ok(p) => mismatches.push(format!("anchor {w}x{h}: {}x{}", p.rows, p.cols)),
            Err(e) => mismatches.push(format!("anchor {w}x{h}: {e}")),
        }
    }
    if mismatches.is_empty() {
        Ok(format!("{n} cases, anchors 45x45=2025 and 32x64=2048"))
    } else {
        Err(mismatches.join("; "))
    }
}

fn shard_records(out: &Path) -> Result<Vec<ExampleRecord>, String> {
    let manifest = CorpusManifest::load(out).map_err(|e| e.to_string())?;
    let mut all = Vec::new();
    for s in &manifest.shards {
        all.extend(read_records(&out.join(&s.path)).map_err(|e| e.to_string())?);
    }
    Ok(all)
}

fn budget_compliance(corpus: &Path) -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = build_pretrain(corpus, out.path(), &PretrainConfig::default())
        .map_err(|e| e.to_string())?;
    let records = shard_records(out.path())?;
    let mut worst_chars = 0;
    let mut worst_slots = 0;
    for r in &records {
        let tree = deserialize(&r.target).map_err(|e| format!("{}: {e}", r.id))?;
        worst_chars = worst_chars.max(char_length(&tree));
        let img = r
            .decode_image()
            .ok_or("missing image")?
            .map_err(|e| e.to_string())?;
        let plan = plan_grid(img.width(), img.height(), 16, 2048).map_err(|e| e.to_string())?;
        worst_slots = worst_slots.max(plan.patches());
        let grid = &r.meta["grid"];
        if grid["rows"].as_u64().unwrap_or(0) * grid["cols"].as_u64().unwrap_or(0)
            != plan.patches() as u64
        {
            return Err(format!("{}: stored grid disagrees", r.id));
        }
    }
    let summary = format!(
        "{} pages, {} records, max {worst_chars} chars, max {worst_slots} slots",
        manifest.inputs, manifest.records
    );
    if manifest.inputs != 1000 || records.is_empty() || worst_chars > 1024 || worst_slots > 2048 {
        Err(summary)
    } else {
        Ok(summary)
    }
}

fn mask_fraction() -> Outcome {
    let config = SynthConfig {
        paint: false,
        ..SynthConfig::default()
    };
    let mut fractions = Vec::new();
    let mut next = 0u64;
    while fractions.len() < 10_000 && next < 200_000 {
        let batch: Vec<f64> = (next..next + 2000)
            .into_par_iter()
            .filter_map(|seed| {
                let id = format!("page-{seed:06}");
                let page = random_page(&id, seed, &config);
                let (tree, regions) = condense(&page).ok()?;
                let sel = select_subtree(&tree, &regions, 1024).ok()?;
                let plan = plan_masks(
                    &sel.subtree,
                    &regions,
                    0.5,
                    page_seed(0, &id),
                    &MaskConfig::default(),
                );
                (plan.total_chars >= 200).then_some(plan.masked_fraction)
            })
            .collect();
        fractions.extend(batch);
        next += 2000;
    }
    fractions.truncate(10_000);
    if fractions.len() < 10_000 {
        return Err(format!("only {} qualifying pages", fractions.len()));
    }
    let (lo, hi) = fractions
        .iter()
        .fold((1f64, 0f64), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    let mut sorted = fractions.clone();
    sorted.sort_by(f64::total_cmp);
    let median = (sorted[4999] + sorted[5000]) / 2.0;
    let outside = fractions
        .iter()
        .filter(|f| !(0.45..=0.60).contains(*f))
        .count();
    let summary = format!(
        "min {lo:.4} max {hi:.4} median {median:.4}, {outside} of 10000 outside [0.45, 0.60]"
    );
    if outside == 0 && (0.49..=0.55).contains(&median) {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn warmup_corpus() -> Outcome {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = fixtures().join("warmup_corpus.txt");
    let text = fs::read_to_string(&corpus).map_err(|e| e.to_string())?;
    let snippets = screenparse::pipeline::split_snippets(&text, 128);
    build_warmup(
        &corpus,
        out.path(),
        &WarmupConfig::default(),
        &FontSet::builtin(),
    )
    .map_err(|e| e.to_string())?;
    let mut records = shard_records(out.path())?;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    records.truncate(1000);
    if records.len() < 1000 {
        return Err(format!("only {} records", records.len()));
    }
    for (r, s) in records.iter().zip(&snippets) {
        let img = r
            .decode_image()
            .ok_or("missing image")?
            .map_err(|e| e.to_string())?;
        if img.width() != 640 || r.target.len() > 128 || &r.target != s || r.task != Task::Warmup {
            return Err(format!(
                "{}: width {} bytes {} target {:?}",
                r.id,
                img.width(),
                r.target.len(),
                r.target
            ));
        }
    }
    Ok("1000 records, width 640, <= 128 bytes, targets match".into())
}

fn refexp_construction() -> Outcome {
    let img = image::RgbImage::from_pixel(400, 400, image::Rgb([240, 240, 240]));
    let png = encode_png(&img);
    let fonts = FontSet::builtin();
    let config = FinetuneConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    for i in 0..200 {
        let n = rng.random_range(1..=12usize);
        let candidates: Vec<[u32; 4]> = (0..n)
            .map(|_| {
                [
                    rng.random_range(0..350),
                    rng.random_range(0..350),
                    rng.random_range(5..50),
                    rng.random_range(5..50),
                ]
            })
            .collect();
        let item = TaskItem::RefExp {
            id: format!("ref-{i:04}"),
            image: "synthetic.png".into(),
            expression: "the highlighted control".into(),
            candidates,
            positive_index: rng.random_range(0..n),
        };
        let records = finetune_records(&item, &png, &config, &fonts).map_err(|e| e.to_string())?;
        let trues = records.iter().filter(|r| r.target == TRUE_TARGET).count();
        let falses = records.iter().filter(|r| r.target == FALSE_TARGET).count();
        let expected_false = (n - 1).min(5);
        if trues != 1 || falses != expected_false || records.len() != 1 + expected_false {
            return Err(format!("{n} candidates gave {trues} true + {falses} false"));
        }
        checked += usize::from(n >= 6);
    }
    let g = |v: &[(&str, f64)]| {
        v.iter()
            .map(|&(t, s)| Generation::new(t, s))
            .collect::<Vec<_>>()
    };
    let cases = [
        (g(&[("true", -1.0), ("false", -0.2)]), 0),
        (g(&[("true", -3.0), ("true", -1.0)]), 1),
        (g(&[("false", -0.1), ("no", -5.0)]), 1),
    ];
    for (gens, want) in cases {
        let got = select_refexp_candidate(&gens).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("selection picked {got}, expected {want}"));
        }
    }
    Ok(format!(
        "{checked} items with >= 6 candidates, 3 selection cases"
    ))
}

fn run_pretrain(corpus: &Path, workers: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = PretrainConfig {
        seed: 17,
        shards: 4,
        workers,
        ..PretrainConfig::default()
    };
    build_pretrain(corpus, out.path(), &config).map_err(|e| e.to_string())?;
    let mut files: Vec<_> = fs::read_dir(out.path())
        .map_err(|e| e.to_string())?
        .map(|e| {
            let path = e.unwrap().path();
            (
                path.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&path).unwrap(),
            )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn determinism(corpus: &Path) -> Outcome {
    let a = run_pretrain(corpus, 1)?;
    let b = run_pretrain(corpus, 1)?;
    let c = run_pretrain(corpus, 8)?;
    if a != b {
        return Err("repeat run differs".into());
    }
    if a != c {
        return Err("1 vs 8 workers differ".into());
    }
    let bytes: usize = a.iter().map(|(_, b)| b.len()).sum();
    Ok(format!(
        "{} files, {bytes} bytes identical over 3 runs",
        a.len()
    ))
}

fn main() -> ExitCode {
    let corpus = tempfile::tempdir().expect("temp dir");
    write_corpus(corpus.path(), 1000, 2024, &SynthConfig::default()).expect("synthetic corpus");
    let small = tempfile::tempdir().expect("temp dir");
    write_corpus(small.path(), 150, 7, &SynthConfig::default()).expect("synthetic corpus");

    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("golden_parse", Box::new(golden_parse)),
        ("grammar_roundtrip", Box::new(grammar_roundtrip)),
        ("subtree_optimality", Box::new(subtree_optimality)),
        ("grid_maximality", Box::new(grid_maximality)),
        (
            "budget_compliance",
            Box::new(|| budget_compliance(corpus.path())),
        ),
        ("mask_fraction", Box::new(mask_fraction)),
        ("warmup_corpus", Box::new(warmup_corpus)),
        ("refexp_construction", Box::new(refexp_construction)),
        ("determinism", Box::new(|| determinism(small.path()))),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
