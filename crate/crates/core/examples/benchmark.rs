//! The published protocol on one benchmark collection: 300-d vectors, L = 2,
//! Adam at 1e-3, batch 32, three seeds, accuracy and macro-F1 on the test split.
//!
//! ```text
//! ASGCN_DATA=data cargo run --release --example benchmark -- rest14 glove.840B.300d.txt [variant]
//! ```
//!
//! Expects `<ASGCN_DATA>/<dataset>/{train,test}.jsonl` from the preprocessor.
//! Budget a few hours of CPU per dataset.

use std::path::PathBuf;

use asgcn::data::{load_embeddings, Dataset, DatasetName};
use asgcn::experiment::{run_seed, Corpus};
use asgcn::model::{ModelConfig, Variant};
use asgcn::train::{aggregate_runs, TrainOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> asgcn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [dataset, vectors, rest @ ..] = args.as_slice() else {
        eprintln!("usage: benchmark <dataset> <vectors.txt> [variant]");
        std::process::exit(2);
    };
    let name: DatasetName = dataset.parse()?;
    let variant: Variant = rest.first().map_or("asgcn-dg", String::as_str).parse()?;
    let root = std::env::var_os("ASGCN_DATA").map_or_else(|| PathBuf::from("data"), PathBuf::from);

    let ds = Dataset::load(&root, name)?;
    let cfg = ModelConfig::new(variant);
    let table = load_embeddings(vectors.as_ref(), &ds.vocab, cfg.embed_dim, &mut ChaCha8Rng::seed_from_u64(0))?;
    log::info!("{}", table.coverage_report());
    let mut reports = Vec::new();
    for seed in [1, 2, 3] {
        // only matched rows are copied in; unknown words keep each seed's random rows
        let corpus = Corpus { vocab_len: ds.vocab.len(), pretrained: Some(&table), train: &ds.train, eval: &ds.test };
        let outcome = run_seed(&ModelConfig { seed, ..cfg.clone() }, &TrainOptions::default(), corpus, |_| Ok(()))?;
        println!("seed {seed}: best epoch {}\n{}", outcome.best_epoch, outcome.best_report.table());
        reports.push(outcome.best_report);
    }
    let s = aggregate_runs(&reports)?;
    println!(
        "{} on {name}: accuracy {:.2}  macro-F1 {:.2}",
        cfg.label(),
        100.0 * s.mean_accuracy,
        100.0 * s.mean_macro_f1
    );
    Ok(())
}
