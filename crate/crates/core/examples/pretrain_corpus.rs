//! Writes a small synthetic snapshot corpus, builds sharded pretraining records from it and
//! reads them back.
//!
//! ```text
//! cargo run --example pretrain_corpus [-- PAGES]
//! ```

use screenparse::pipeline::{build_pretrain, PretrainConfig};
use screenparse::record::read_records;
use screenparse::synth::{write_corpus, SynthConfig};

fn main() {
    let pages: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("page count"))
        .unwrap_or(20);
    let root = std::env::temp_dir().join("screenparse-demo");
    let (snapshots, out) = (root.join("snapshots"), root.join("records"));
    let _ = std::fs::remove_dir_all(&root);

    write_corpus(&snapshots, pages, 1, &SynthConfig::default()).expect("write corpus");
    let config = PretrainConfig {
        seed: 7,
        shards: 2,
        ..PretrainConfig::default()
    };
    let manifest = build_pretrain(&snapshots, &out, &config).expect("build");
    println!(
        "{} inputs -> {} records, skipped {:?}",
        manifest.inputs, manifest.records, manifest.skipped
    );

    for shard in &manifest.shards {
        println!(
            "{} ({} records, sha256 {})",
            shard.path,
            shard.records,
            &shard.sha256[..16]
        );
        for r in read_records(&out.join(&shard.path))
            .expect("read shard")
            .iter()
            .take(2)
        {
            let preview: String = r.target.chars().take(80).collect();
            println!(
                "  {} masked {:.3} grid {}x{}: {preview}...",
                r.id,
                r.meta["masked_fraction"].as_f64().unwrap_or(0.0),
                r.meta["grid"]["rows"],
                r.meta["grid"]["cols"]
            );
        }
    }
    println!("output in {}", out.display());
}
