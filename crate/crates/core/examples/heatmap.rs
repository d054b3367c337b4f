//! Renders attention weights of a trained model as a self-contained HTML page.
//!
//! ```text
//! cargo run --release --example heatmap -- [out.html]
//! ```

use std::path::PathBuf;

use asgcn::data::{synthetic_corpus, Vocabulary};
use asgcn::heatmap::{render_heatmap, HeatmapRow};
use asgcn::model::{build_model, ModelConfig};
use asgcn::train::{predict_all, train_epoch, Adam};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> asgcn::Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("asgcn-heatmap.html"), PathBuf::from);

    let mut examples = synthetic_corpus(160, 21);
    let vocab = Vocabulary::build(examples.iter().map(|e| e.tokens.as_slice()));
    vocab.encode(&mut examples);
    let cfg = ModelConfig { hidden: 16, embed_dim: 16, learning_rate: 0.01, batch_size: 16, ..ModelConfig::default() };
    let mut params = build_model(&cfg, vocab.len())?;
    let mut adam = Adam::new(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for epoch in 1..=25 {
        train_epoch(&cfg, &mut params, &mut adam, &examples, epoch, &mut rng)?;
    }

    // two-clause sentences show the attention moving with the aspect
    let picked: Vec<usize> = (0..examples.len()).filter(|&i| examples[i].len() > 4).take(6).collect();
    let subset: Vec<_> = picked.iter().map(|&i| examples[i].clone()).collect();
    let preds = predict_all(&params, &cfg, &subset)?;
    let rows: Vec<HeatmapRow> = subset
        .iter()
        .zip(preds)
        .map(|(e, p)| HeatmapRow {
            title: format!("aspect: {}", e.aspect_tokens().join(" ")),
            tokens: e.tokens.clone(),
            alpha: p.alpha,
            aspect: e.aspect,
            predicted: p.label,
            gold: e.label,
        })
        .collect();
    for r in &rows {
        let top = r.alpha.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
        println!("{:<40} -> {:<8} most attended: {}", r.tokens.join(" "), r.predicted, r.tokens[top]);
    }
    std::fs::write(&out, render_heatmap(&rows))?;
    println!("wrote {}", out.display());
    Ok(())
}
