//! Compares two systems over several seeds: per-class metrics, run
//! aggregates, and paired t-tests in both pairing modes.
//!
//! ```text
//! cargo run --release --example evaluation
//! ```

use asgcn::data::{synthetic_corpus, Vocabulary};
use asgcn::experiment::{mean_correctness, run_seed, Corpus};
use asgcn::model::{ModelConfig, Variant};
use asgcn::train::{aggregate_runs, paired_t_test, EvalReport, TrainOptions};

fn runs(cfg: &ModelConfig, corpus: Corpus<'_>, seeds: &[u64]) -> asgcn::Result<Vec<EvalReport>> {
    let opts = TrainOptions { max_epochs: 3, patience: 1 };
    seeds
        .iter()
        .map(|&seed| Ok(run_seed(&ModelConfig { seed, ..cfg.clone() }, &opts, corpus, |_| Ok(()))?.best_report))
        .collect()
}

fn main() -> asgcn::Result<()> {
    let mut train = synthetic_corpus(160, 11);
    let mut test = synthetic_corpus(120, 12);
    let vocab = Vocabulary::build(train.iter().chain(&test).map(|e| e.tokens.as_slice()));
    vocab.encode(&mut train);
    vocab.encode(&mut test);
    let corpus = Corpus { vocab_len: vocab.len(), pretrained: None, train: &train, eval: &test };

    let small = |variant| ModelConfig {
        hidden: 8,
        embed_dim: 8,
        learning_rate: 0.005,
        batch_size: 16,
        ..ModelConfig::new(variant)
    };
    let a_cfg = small(Variant::AsgcnDg);
    let b_cfg = small(Variant::BilstmAttn);
    let seeds = [1, 2, 3, 4, 5];
    let a = runs(&a_cfg, corpus, &seeds)?;
    let b = runs(&b_cfg, corpus, &seeds)?;

    println!("{} seed {}:\n{}", a_cfg.label(), seeds[0], a[0].table());
    for (cfg, reports) in [(&a_cfg, &a), (&b_cfg, &b)] {
        let s = aggregate_runs(reports)?;
        println!(
            "{:<16} mean accuracy {:.4}  mean macro-F1 {:.4}  runs {:?}",
            cfg.label(),
            s.mean_accuracy,
            s.mean_macro_f1,
            s.accuracies
        );
    }

    // Per example: how often each system got each test item right.
    let ca = mean_correctness(&a.iter().collect::<Vec<_>>())?;
    let cb = mean_correctness(&b.iter().collect::<Vec<_>>())?;
    match paired_t_test(&ca, &cb) {
        Ok(t) => println!("per-example: t = {:.3}, df = {}, p = {:.4}", t.t, t.df, t.p_value),
        Err(e) => println!("per-example: {e}"),
    }
    // Per run: one accuracy per seed on each side.
    let acc = |r: &[EvalReport]| r.iter().map(|x| x.accuracy).collect::<Vec<_>>();
    match paired_t_test(&acc(&a), &acc(&b)) {
        Ok(t) => println!("per-run:     t = {:.3}, df = {}, p = {:.4}", t.t, t.df, t.p_value),
        Err(e) => println!("per-run: {e}"),
    }
    Ok(())
}
