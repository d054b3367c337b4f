//! Trains a small ASGCN-DG on a generated corpus of two-clause sentences where
//! each clause carries its own sentiment, so the aspect decides the label.
//!
//! ```text
//! RUST_LOG=info cargo run --release --example train_synthetic -- [variant=asgcn-dg] [epochs=30]
//! ```

use asgcn::data::{synthetic_corpus, Vocabulary};
use asgcn::experiment::{run_seed, Corpus};
use asgcn::model::{ModelConfig, Variant};
use asgcn::train::TrainOptions;

fn main() -> asgcn::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().as_deref().unwrap_or("asgcn-dg").parse()?;
    let epochs = args.next().map_or(30, |e| e.parse().expect("epoch count"));

    let mut train = synthetic_corpus(240, 1);
    let mut test = synthetic_corpus(80, 2);
    let vocab = Vocabulary::build(train.iter().chain(&test).map(|e| e.tokens.as_slice()));
    vocab.encode(&mut train);
    vocab.encode(&mut test);
    println!("{} train / {} test examples, {} word types", train.len(), test.len(), vocab.len());

    let cfg =
        ModelConfig { hidden: 16, embed_dim: 16, learning_rate: 0.01, batch_size: 16, ..ModelConfig::new(variant) };
    let opts = TrainOptions { max_epochs: epochs, patience: 5 };
    let corpus = Corpus { vocab_len: vocab.len(), pretrained: None, train: &train, eval: &test };
    let outcome = run_seed(&cfg, &opts, corpus, |r| {
        println!(
            "epoch {:>2}  loss {:.4}  test acc {:.3}  macro-F1 {:.3}",
            r.epoch, r.train_loss, r.eval_accuracy, r.eval_macro_f1
        );
        Ok(())
    })?;

    println!("\nbest epoch {} of {}:", outcome.best_epoch, outcome.history.len());
    print!("{}", outcome.best_report.table());
    Ok(())
}
