//! Seeded toy corpus with hand-built dependency heads.
//!
//! Sentences follow `the <aspect> was <opinion> [but the <aspect> was <opinion>]`,
//! so telling the two aspects of a sentence apart requires looking at the
//! right clause. Useful for smoke tests and demos; it says nothing about
//! benchmark accuracy.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Example, Polarity, Span};

pub const ASPECTS: [&str; 8] = ["food", "service", "staff", "price", "ambience", "menu", "pasta", "wine"];
const POSITIVE: [&str; 4] = ["great", "delicious", "friendly", "excellent"];
const NEUTRAL: [&str; 4] = ["okay", "average", "standard", "ordinary"];
const NEGATIVE: [&str; 4] = ["awful", "rude", "terrible", "bland"];

fn opinion(label: Polarity, rng: &mut ChaCha8Rng) -> &'static str {
    let pool = match label {
        Polarity::Positive => &POSITIVE,
        Polarity::Neutral => &NEUTRAL,
        Polarity::Negative => &NEGATIVE,
    };
    pool.choose(rng).expect("nonempty pool")
}

fn polarity(rng: &mut ChaCha8Rng) -> Polarity {
    Polarity::ALL[rng.random_range(0..3)]
}

/// `count` examples; two-clause sentences yield one example per aspect.
pub fn synthetic_corpus(count: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a1 = *ASPECTS.choose(&mut rng).expect("aspects");
        let l1 = polarity(&mut rng);
        let o1 = opinion(l1, &mut rng);
        if rng.random_bool(0.3) {
            // the a1 was o1
            let tokens = ["the", a1, "was", o1].map(String::from).to_vec();
            let heads = vec![Some(1), Some(2), None, Some(2)];
            out.push(Example { tokens, token_ids: Vec::new(), heads, aspect: Span::new(1, 2), label: l1 });
            continue;
        }
        let a2 = loop {
            let a = *ASPECTS.choose(&mut rng).expect("aspects");
            if a != a1 {
                break a;
            }
        };
        let l2 = loop {
            let l = polarity(&mut rng);
            if l != l1 {
                break l;
            }
        };
        let o2 = opinion(l2, &mut rng);
        // 0 the  1 a1  2 was  3 o1  4 but  5 the  6 a2  7 was  8 o2
        let tokens = ["the", a1, "was", o1, "but", "the", a2, "was", o2].map(String::from).to_vec();
        let heads = vec![Some(1), Some(2), None, Some(2), Some(7), Some(6), Some(7), Some(2), Some(7)];
        for (span, label) in [(Span::new(1, 2), l1), (Span::new(6, 7), l2)] {
            if out.len() < count {
                out.push(Example {
                    tokens: tokens.clone(),
                    token_ids: Vec::new(),
                    heads: heads.clone(),
                    aspect: span,
                    label,
                });
            }
        }
    }
    out
}
