//! The on-disk formats: three-line raw records, parsed JSONL with dependency
//! heads, a textual word-vector file, and the padded batches built from them.
//!
//! ```text
//! cargo run --example data_files -- [scratch-dir]
//! ```

use std::fs;
use std::path::PathBuf;

use asgcn::data::{
    load_embeddings, load_parsed_dataset, load_raw_dataset, make_batches, write_parsed_dataset, Flavor, LabelCounts,
    Vocabulary,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RAW: &str = "\
The $T$ was superb but the waiter ignored us
food
1
The food was superb but the $T$ ignored us
waiter
-1
";

fn main() -> asgcn::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("asgcn-data-files"), PathBuf::from);
    fs::create_dir_all(&dir)?;

    let raw_path = dir.join("train.raw");
    fs::write(&raw_path, RAW)?;
    let raw = load_raw_dataset(&raw_path)?;
    println!("{} raw records; first: {:?} / {:?} / {}", raw.len(), raw[0].text(), raw[0].aspect, raw[0].polarity);

    // A parser would fill in heads; here they are written by hand.
    let heads = [Some(1), Some(3), Some(3), None, Some(7), Some(6), Some(7), Some(3), Some(7)];
    let mut examples: Vec<_> = raw.iter().map(|r| r.to_whitespace_example()).collect();
    for e in &mut examples {
        e.heads = heads.to_vec();
    }
    let parsed_path = dir.join("train.jsonl");
    write_parsed_dataset(&parsed_path, &examples)?;
    println!("{}:\n{}", parsed_path.display(), fs::read_to_string(&parsed_path)?.lines().next().unwrap_or_default());
    let mut examples = load_parsed_dataset(&parsed_path)?;
    println!("label counts (pos/neu/neg): {}", LabelCounts::of(examples.iter().map(|e| &e.label)));

    let vocab = Vocabulary::build(examples.iter().map(|e| e.tokens.as_slice()));
    vocab.encode(&mut examples);
    println!("vocabulary of {} (ids 0 and 1 are padding and unknown)", vocab.len());

    let vec_path = dir.join("vectors.txt");
    fs::write(&vec_path, "food 0.1 0.2 0.3 0.4\nwaiter -0.1 0.0 0.5 0.2\nsuperb 0.9 0.1 0.0 0.3\nunrelated 1 1 1 1\n")?;
    let table = load_embeddings(&vec_path, &vocab, 4, &mut ChaCha8Rng::seed_from_u64(0))?;
    println!("{}", table.coverage_report());

    for b in make_batches(&examples, 2, Some(7), Some(Flavor::Dg))? {
        println!("batch of {} padded to {} tokens; aspects {:?}", b.len(), b.max_len(), b.aspects);
        let adj = &b.adjacency.as_ref().expect("requested")[0];
        println!("  adjacency row of `superb`: {:?}", adj.row(3));
    }
    Ok(())
}
