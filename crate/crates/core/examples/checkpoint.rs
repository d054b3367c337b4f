//! Saves a trained model, reloads it, and classifies a sentence that was never
//! seen in training.
//!
//! ```text
//! cargo run --release --example checkpoint -- [path/to/model.ckpt]
//! ```

use std::path::PathBuf;

use asgcn::data::{synthetic_corpus, Example, Polarity, Span, Vocabulary};
use asgcn::model::{build_model, load_checkpoint, predict, save_checkpoint, ModelConfig};
use asgcn::train::{evaluate, train_epoch, Adam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> asgcn::Result<()> {
    let path = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("asgcn-example.ckpt"), PathBuf::from);

    let mut train = synthetic_corpus(160, 3);
    let vocab = Vocabulary::build(train.iter().map(|e| e.tokens.as_slice()));
    vocab.encode(&mut train);
    let cfg = ModelConfig { hidden: 16, embed_dim: 16, learning_rate: 0.01, batch_size: 16, ..ModelConfig::default() };
    let mut params = build_model(&cfg, vocab.len())?;
    let mut adam = Adam::new(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for epoch in 1..=15 {
        train_epoch(&cfg, &mut params, &mut adam, &train, epoch, &mut rng)?;
    }
    let before = evaluate(&params, &cfg, &train)?;

    save_checkpoint(&path, &cfg, &vocab, &params)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("wrote {} ({bytes} bytes, {} parameters)", path.display(), params.num_scalars());

    let ck = load_checkpoint(&path)?;
    let after = evaluate(&ck.params, &ck.config, &train)?;
    println!("train accuracy before {:.4}, after reload {:.4}", before.accuracy, after.accuracy);
    assert_eq!(before, after);

    // "zzz" is out of vocabulary and maps to the unknown id
    let tokens: Vec<String> = "the wine was great but the staff was zzz".split(' ').map(String::from).collect();
    let heads = vec![Some(1), Some(2), None, Some(2), Some(7), Some(6), Some(7), Some(2), Some(7)];
    for aspect in [Span::new(1, 2), Span::new(6, 7)] {
        let mut ex = Example {
            tokens: tokens.clone(),
            token_ids: Vec::new(),
            heads: heads.clone(),
            aspect,
            label: Polarity::Neutral,
        };
        ck.vocab.encode(std::slice::from_mut(&mut ex));
        let p = predict(&ck.params, &ck.config, &ex)?;
        let probs: Vec<String> = p.probabilities.iter().map(|x| format!("{x:.3}")).collect();
        println!("aspect `{}` -> {} [{}]", ex.aspect_tokens().join(" "), p.label, probs.join(", "));
    }
    Ok(())
}
