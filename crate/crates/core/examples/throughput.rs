//! Times training steps at full model width on random sentences of realistic
//! length, then extrapolates to a benchmark-sized epoch.
//!
//! ```text
//! cargo run --release --example throughput -- [examples=64] [tokens=20] [hidden=300]
//! ```

use std::time::Instant;

use asgcn::data::{Example, Polarity, Span};
use asgcn::model::{build_model, ModelConfig};
use asgcn::train::{train_epoch, Adam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: usize = 5000;
/// Training examples in the largest restaurant split.
const BENCHMARK_EPOCH: usize = 3608;

fn random_sentence(n: usize, label: usize, rng: &mut ChaCha8Rng) -> Example {
    let ids: Vec<usize> = (0..n).map(|_| rng.random_range(2..VOCAB)).collect();
    // random tree: every token but the first attaches to an earlier one
    let heads = (0..n).map(|i| (i > 0).then(|| rng.random_range(0..i))).collect();
    let from = rng.random_range(0..n);
    let to = (from + rng.random_range(1..=2)).min(n);
    Example {
        tokens: ids.iter().map(|i| format!("w{i}")).collect(),
        token_ids: ids,
        heads,
        aspect: Span::new(from, to),
        label: Polarity::from_index(label % 3).unwrap(),
    }
}

fn main() -> asgcn::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let count = args.first().copied().unwrap_or(64);
    let tokens = args.get(1).copied().unwrap_or(20);
    let hidden = args.get(2).copied().unwrap_or(300);

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let examples: Vec<Example> = (0..count).map(|i| random_sentence(tokens, i, &mut rng)).collect();
    let cfg = ModelConfig { hidden, embed_dim: hidden, ..ModelConfig::default() };
    let mut params = build_model(&cfg, VOCAB)?;
    println!("{} with {} scalars outside the embedding table", cfg.label(), params.num_scalars_excluding_embedding());

    let mut adam = Adam::new(cfg.learning_rate);
    let mut dropout = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let loss = train_epoch(&cfg, &mut params, &mut adam, &examples, 1, &mut dropout)?;
    let secs = start.elapsed().as_secs_f64();

    let per_example = secs / count as f64;
    println!("{count} examples x {tokens} tokens: {secs:.2}s ({:.1} ms/example), loss {loss:.4}", 1e3 * per_example);
    println!(
        "extrapolated {BENCHMARK_EPOCH}-example epoch: {:.1} min (training only, evaluation adds roughly a third)",
        per_example * BENCHMARK_EPOCH as f64 / 60.0
    );
    Ok(())
}
