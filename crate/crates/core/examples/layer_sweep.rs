//! Sweeps the number of graph layers over a few seeds, then breaks accuracy
//! down by how many aspects each test sentence carries.
//!
//! ```text
//! cargo run --release --example layer_sweep -- [layers=1,2,3,4]
//! ```

use asgcn::data::{synthetic_corpus, Vocabulary};
use asgcn::experiment::{accuracy_by_aspect_count, run_seed, sweep_layers, sweep_tsv, Corpus};
use asgcn::model::ModelConfig;
use asgcn::train::TrainOptions;

fn main() -> asgcn::Result<()> {
    let layers: Vec<usize> = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("1,2,3,4")
        .split(',')
        .map(|l| l.trim().parse().expect("comma-separated layer counts"))
        .collect();

    let mut train = synthetic_corpus(160, 31);
    let mut test = synthetic_corpus(80, 32);
    let vocab = Vocabulary::build(train.iter().chain(&test).map(|e| e.tokens.as_slice()));
    vocab.encode(&mut train);
    vocab.encode(&mut test);
    let corpus = Corpus { vocab_len: vocab.len(), pretrained: None, train: &train, eval: &test };

    let base = ModelConfig { hidden: 8, embed_dim: 8, learning_rate: 0.01, batch_size: 16, ..ModelConfig::default() };
    let opts = TrainOptions { max_epochs: 4, patience: 1 };
    let rows = sweep_layers(&base, &opts, corpus, &layers, &[1, 2, 3])?;
    print!("{}", sweep_tsv(&rows));

    let best =
        rows.iter().max_by(|a, b| a.summary.mean_accuracy.total_cmp(&b.summary.mean_accuracy)).expect("nonempty sweep");
    let cfg = ModelConfig { num_layers: best.layers, ..base };
    let report = run_seed(&cfg, &opts, corpus, |_| Ok(()))?.best_report;
    println!("\nL = {} by aspects per sentence:", best.layers);
    println!("aspects  samples  accuracy  macro-F1");
    for g in accuracy_by_aspect_count(&test, &report)? {
        println!("{:>7}  {:>7}  {:>8.4}  {:>8.4}", g.aspects, g.samples, g.accuracy, g.macro_f1);
    }
    Ok(())
}
