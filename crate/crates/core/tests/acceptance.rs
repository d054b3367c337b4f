//! Acceptance gate. Every test prints one verdict line to stderr, bypassing
//! output capture so the lines show up in a plain `cargo test` run.
//!
//! Criteria that need the preprocessed benchmark corpora (and, for the
//! reproduction runs, pretrained word vectors) are `#[ignore]`d: run them with
//! `ASGCN_DATA=<dir> ASGCN_EMBEDDINGS=<file> cargo test --release --test acceptance -- --ignored`.
//! Without that data `blocked_criteria` reports them as BLOCKED.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use asgcn::autodiff::{Array, Graph, Tensor};
use asgcn::data::{
    load_embeddings, parsed_path, AdjacencyMatrix, Dataset, DatasetName, Example, Flavor, LabelCounts, Span, Split,
    Vocabulary,
};
use asgcn::experiment::{run_seed, sweep_layers, Corpus};
use asgcn::gradcheck;
use asgcn::layers::{
    aspect_attention, aspect_mask, bilstm, conv1d, embed, gcn_layer, position_transform, position_weights, Conv1d,
    GcnLayer, LstmCell,
};
use asgcn::model::{build_model, forward, load_checkpoint, save_checkpoint, BoundParams, ModelConfig, Variant};
use asgcn::train::{
    aggregate_runs, evaluate, mean_data_loss, paired_t_test, train_epoch, Adam, EvalReport, TrainOptions,
};
use asgcn::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn verdict(criterion: &str, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {criterion}: {detail}");
}

fn blocked(criterion: &str, why: &str) {
    let _ = writeln!(std::io::stderr(), "[BLOCKED] {criterion}: {why}");
}

fn random(shape: &[usize], rng: &mut ChaCha8Rng) -> Array {
    let n = shape.iter().product();
    Array::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

// ---------------------------------------------------------------- gradients

type Case = (&'static str, Vec<Array>, Box<dyn Fn(&mut Graph, &[Tensor]) -> Result<Tensor>>);

fn op_cases(rng: &mut ChaCha8Rng) -> Vec<Case> {
    let r = |s: &[usize], rng: &mut ChaCha8Rng| random(s, rng);
    vec![
        (
            "matmul",
            vec![r(&[3, 4], rng), r(&[4, 2], rng)],
            Box::new(|g, t| {
                let y = g.matmul(t[0], t[1])?;
                Ok(g.sum(y))
            }),
        ),
        (
            "add+bias",
            vec![r(&[3, 4], rng), r(&[4], rng)],
            Box::new(|g, t| {
                let y = g.add(t[0], t[1])?;
                let y = g.tanh(y);
                Ok(g.sum(y))
            }),
        ),
        (
            "sub",
            vec![r(&[3, 2], rng), r(&[3, 2], rng)],
            Box::new(|g, t| {
                let y = g.sub(t[0], t[1])?;
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "mul",
            vec![r(&[3, 2], rng), r(&[3, 2], rng)],
            Box::new(|g, t| {
                let y = g.mul(t[0], t[1])?;
                Ok(g.sum(y))
            }),
        ),
        (
            "relu",
            vec![r(&[3, 3], rng)],
            Box::new(|g, t| {
                let y = g.relu(t[0]);
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "sigmoid",
            vec![r(&[3, 3], rng)],
            Box::new(|g, t| {
                let y = g.sigmoid(t[0]);
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "softmax",
            vec![r(&[3, 4], rng), r(&[3, 4], rng)],
            Box::new(|g, t| {
                let y = g.softmax(t[0])?;
                let y = g.mul(y, t[1])?;
                Ok(g.sum(y))
            }),
        ),
        (
            "mean_axis",
            vec![r(&[3, 4], rng)],
            Box::new(|g, t| {
                let y = g.mean_axis(t[0], 1)?;
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "max",
            vec![r(&[3, 4], rng)],
            Box::new(|g, t| {
                let y = g.max(t[0], Some(0))?;
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "concat+slice",
            vec![r(&[2, 3], rng), r(&[1, 3], rng)],
            Box::new(|g, t| {
                let c = g.concat(&[t[0], t[1]], 0)?;
                let s = g.slice(c, 1..3, 0)?;
                let s = g.tanh(s);
                Ok(g.sum(s))
            }),
        ),
        (
            "scale_rows+reshape",
            vec![r(&[3, 2], rng)],
            Box::new(|g, t| {
                let y = g.scale_rows(t[0], &[0.5, 2.0, -1.0])?;
                let y = g.reshape(y, &[6])?;
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
        (
            "gather_rows",
            vec![r(&[5, 3], rng)],
            Box::new(|g, t| {
                let y = g.gather_rows(t[0], &[4, 1, 4])?;
                let y = g.tanh(y);
                Ok(g.sum(y))
            }),
        ),
        ("cross_entropy", vec![r(&[3, 3], rng)], Box::new(|g, t| g.cross_entropy(t[0], &[2, 0, 1]))),
    ]
}

fn layer_cases(rng: &mut ChaCha8Rng) -> Vec<Case> {
    let r = |s: &[usize], rng: &mut ChaCha8Rng| random(s, rng);
    let span = Span::new(1, 2);
    let mut adj = AdjacencyMatrix::build(&[Some(1), None, Some(1)], Flavor::Dg).unwrap().to_array();
    adj.data_mut()[2] = 0.0;
    let adj_c = adj.clone();
    vec![
        (
            "embed",
            vec![r(&[6, 3], rng)],
            Box::new(|g, t| {
                let y = embed(g, t[0], &[3, 0, 5])?;
                let y = g.tanh(y);
                Ok(g.sum(y))
            }),
        ),
        (
            "bilstm",
            vec![r(&[3, 2], rng), r(&[4, 8], rng), r(&[8], rng), r(&[4, 8], rng), r(&[8], rng)],
            Box::new(|g, t| {
                let f = LstmCell { weight: t[1], bias: t[2], input: 2, hidden: 2 };
                let b = LstmCell { weight: t[3], bias: t[4], input: 2, hidden: 2 };
                let h = bilstm(g, t[0], &f, &b, 3)?;
                let h = g.mul(h, h)?;
                Ok(g.sum(h))
            }),
        ),
        (
            "gcn_layer",
            vec![r(&[3, 4], rng), r(&[4, 4], rng), r(&[4], rng)],
            Box::new(move |g, t| {
                let a = g.constant(adj_c.clone());
                let h = gcn_layer(g, t[0], a, &GcnLayer { weight: t[1], bias: t[2] })?;
                let h = g.mul(h, h)?;
                Ok(g.sum(h))
            }),
        ),
        (
            "position_transform",
            vec![r(&[3, 2], rng)],
            Box::new(move |g, t| {
                let h = position_transform(g, t[0], span, 3)?;
                let h = g.mul(h, h)?;
                Ok(g.sum(h))
            }),
        ),
        (
            "aspect_mask",
            vec![r(&[3, 2], rng)],
            Box::new(move |g, t| {
                let h = aspect_mask(g, t[0], span)?;
                let h = g.tanh(h);
                Ok(g.sum(h))
            }),
        ),
        (
            "aspect_attention",
            vec![r(&[3, 4], rng), r(&[3, 4], rng)],
            Box::new(move |g, t| {
                let (r, _) = aspect_attention(g, t[0], t[1], 3)?;
                let r = g.mul(r, r)?;
                Ok(g.sum(r))
            }),
        ),
        (
            "conv1d",
            vec![r(&[3, 2], rng), r(&[3, 2, 3], rng), r(&[3], rng)],
            Box::new(|g, t| {
                let y = conv1d(g, t[0], &Conv1d { kernel: t[1], bias: t[2] })?;
                let y = g.mul(y, y)?;
                Ok(g.sum(y))
            }),
        ),
    ]
}

fn end_to_end(rng: &mut ChaCha8Rng) -> f64 {
    let cfg = ModelConfig { hidden: 3, embed_dim: 4, seed: rng.random(), ..ModelConfig::new(Variant::AsgcnDg) };
    let mut store = build_model(&cfg, 9).unwrap();
    store.map_values(|name, xs| {
        if name.ends_with("bias") {
            xs.iter_mut().for_each(|x| *x = rng.random_range(-0.5..0.5));
        }
    });
    let ex = |ids: [usize; 3], heads: [Option<usize>; 3], span: (usize, usize), label: usize| Example {
        tokens: ids.iter().map(|i| i.to_string()).collect(),
        token_ids: ids.to_vec(),
        heads: heads.to_vec(),
        aspect: Span::new(span.0, span.1),
        label: asgcn::data::Polarity::from_index(label).unwrap(),
    };
    let examples =
        [ex([2, 3, 4], [Some(1), None, Some(1)], (1, 2), 2), ex([5, 6, 8], [None, Some(0), Some(1)], (0, 2), 0)];
    let batch = asgcn::data::Batch::from_examples(&examples, &[0, 1], cfg.flavor()).unwrap();
    let labels: Vec<usize> = batch.labels.iter().map(|l| l.index()).collect();
    let names: Vec<String> = store.names().map(str::to_owned).collect();
    let inputs: Vec<Array> = names.iter().map(|n| store.get(n).unwrap().clone()).collect();
    gradcheck::check(&inputs, gradcheck::STEP, |g, ts| {
        let bound = BoundParams::from_tensors(names.iter().cloned().zip(ts.iter().copied()));
        let out = forward(g, &bound, &cfg, &batch, None)?;
        g.cross_entropy(out.logits, &labels)
    })
    .unwrap()
    .max_rel_err
}

#[test]
fn gradient_integrity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_op: (f64, &str) = (0.0, "");
    for (name, inputs, f) in op_cases(&mut rng).into_iter().chain(layer_cases(&mut rng)) {
        let r = gradcheck::check(&inputs, gradcheck::STEP, |g, t| f(g, t)).unwrap();
        if r.max_rel_err >= worst_op.0 {
            worst_op = (r.max_rel_err, name);
        }
    }
    let e2e = (0..3).map(|_| end_to_end(&mut rng)).fold(0.0, f64::max);
    let ok = worst_op.0 < 1e-4 && e2e < 1e-3;
    verdict(
        "gradient integrity",
        ok,
        &format!(
            "worst per-op/layer rel. err {:.2e} ({}), end-to-end ASGCN-DG {:.2e}, {:.1}s",
            worst_op.0,
            worst_op.1,
            e2e,
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- equation oracles

#[test]
fn equation_oracles() {
    let q = position_weights(9, Span::new(1, 2)).unwrap();
    let expected = [8.0 / 9.0, 0.0, 8.0 / 9.0, 7.0 / 9.0, 6.0 / 9.0, 5.0 / 9.0, 4.0 / 9.0, 3.0 / 9.0, 2.0 / 9.0];
    let pos_ok = q == expected;

    let mut g = Graph::new();
    let gcn = |g: &mut Graph, feats: Array, adj: Array| {
        let d = feats.shape()[1];
        let x = g.constant(feats);
        let a = g.constant(adj);
        let w = g.constant(Array::identity(d));
        let b = g.constant(Array::zeros(&[d]));
        let h = gcn_layer(g, x, a, &GcnLayer { weight: w, bias: b }).unwrap();
        g.value(h).data().to_vec()
    };
    let iso = gcn(&mut g, Array::from_rows(&[[2.0, 2.0, 2.0]]).unwrap(), Array::from_rows(&[[1.0]]).unwrap());
    let pair =
        gcn(&mut g, Array::from_rows(&[[2.0], [4.0]]).unwrap(), Array::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap());
    let gcn_err = iso.iter().map(|v| (v - 1.0).abs()).chain(pair.iter().map(|v| (v - 2.0).abs())).fold(0.0, f64::max);

    let hc = g.constant(Array::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap());
    let hm = g.constant(Array::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap());
    let (r, alpha) = aspect_attention(&mut g, hc, hm, 2).unwrap();
    let e = std::f64::consts::E;
    let want = [e / (e + 1.0), 1.0 / (e + 1.0)];
    let att_err = g
        .value(alpha)
        .data()
        .iter()
        .chain(g.value(r).data())
        .zip(want.iter().chain(&want))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let ok = pos_ok && gcn_err <= 1e-12 && att_err <= 1e-9;
    verdict(
        "equation oracles",
        ok,
        &format!("position weights exact: {pos_ok}; GCN max err {gcn_err:.1e}; attention max err {att_err:.1e}"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- adjacency laws

#[test]
fn adjacency_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = Vec::new();
    for trial in 0..1000 {
        let n = rng.random_range(1..=12);
        let heads: Vec<Option<usize>> = (0..n)
            .map(|i| {
                if n == 1 || rng.random_bool(0.15) {
                    None
                } else {
                    let mut j = rng.random_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    Some(j)
                }
            })
            .collect();
        let dg = AdjacencyMatrix::build(&heads, Flavor::Dg).unwrap();
        let dt = AdjacencyMatrix::build(&heads, Flavor::Dt).unwrap();
        let diag = (0..n).all(|i| dg.get(i, i) == 1.0 && dt.get(i, i) == 1.0);
        let sparse = dt.nonzeros() <= dg.nonzeros();
        let rebuilt = (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 1.0 } else { (dt.get(i, j) + dt.get(j, i)).min(1.0) };
                dg.get(i, j) == want
            })
        });
        if !(dg.is_symmetric() && diag && sparse && rebuilt) {
            violations.push(trial);
        }
    }
    let ok = violations.is_empty();
    verdict("adjacency laws", ok, &format!("1000 random head arrays (n <= 12), {} violations", violations.len()));
    assert!(ok, "{violations:?}");
}

// ---------------------------------------------------------------- metrics oracle

fn brute_force(gold: &[usize], pred: &[usize]) -> (f64, f64) {
    let n = gold.len() as f64;
    let acc = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as f64 / n;
    let mut f1s = 0.0;
    for c in 0..3 {
        let (mut tp, mut fp, mut fneg) = (0.0, 0.0, 0.0);
        for (&g, &p) in gold.iter().zip(pred) {
            match (g == c, p == c) {
                (true, true) => tp += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fneg += 1.0,
                _ => {}
            }
        }
        // F1 = 2TP / (2TP + FP + FN), zero when undefined
        let den = 2.0 * tp + fp + fneg;
        f1s += if den == 0.0 { 0.0 } else { 2.0 * tp / den };
    }
    (acc, f1s / 3.0)
}

#[test]
fn metrics_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    let mut t_checked = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..300);
        let skew = rng.random_range(0.0..1.0);
        let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let pred: Vec<usize> =
            gold.iter().map(|&g| if rng.random_bool(skew) { g } else { rng.random_range(0..3) }).collect();
        let r = EvalReport::from_predictions(&gold, &pred, 3).unwrap();
        let (acc, f1) = brute_force(&gold, &pred);
        worst = worst.max((r.accuracy - acc).abs()).max((r.macro_f1 - f1).abs());

        let other: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.6)))).collect();
        let mine: Vec<f64> = r.correct.iter().map(|&c| f64::from(u8::from(c))).collect();
        let d: Vec<f64> = mine.iter().zip(&other).map(|(a, b)| a - b).collect();
        let m = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n as f64 - 1.0);
        match paired_t_test(&mine, &other) {
            Ok(t) => {
                let t_ref = m / (var / n as f64).sqrt();
                let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).unwrap();
                let p_ref = 2.0 * (1.0 - dist.cdf(t_ref.abs()));
                worst = worst.max((t.t - t_ref).abs()).max((t.p_value - p_ref).abs());
                t_checked += 1;
            }
            Err(_) => assert_eq!(var, 0.0),
        }
    }
    let ok = worst <= 1e-9;
    verdict(
        "metrics oracle",
        ok,
        &format!("200 random configurations ({t_checked} t-tests), max deviation {worst:.1e}"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- checkpoint

#[test]
fn checkpoint_round_trip() {
    let mut examples = asgcn::data::synthetic_corpus(40, 5);
    let vocab = Vocabulary::build(examples.iter().map(|e| e.tokens.as_slice()));
    vocab.encode(&mut examples);
    let cfg = ModelConfig { hidden: 6, embed_dim: 6, learning_rate: 0.01, batch_size: 8, ..ModelConfig::default() };
    let mut params = build_model(&cfg, vocab.len()).unwrap();
    let mut adam = Adam::new(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for epoch in 1..=3 {
        train_epoch(&cfg, &mut params, &mut adam, &examples, epoch, &mut rng).unwrap();
    }
    let before = evaluate(&params, &cfg, &examples).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    save_checkpoint(&path, &cfg, &vocab, &params).unwrap();
    let ck = load_checkpoint(&path).unwrap();
    let after = evaluate(&ck.params, &ck.config, &examples).unwrap();
    let bits = |r: &EvalReport| {
        let mut v = vec![r.accuracy.to_bits(), r.macro_f1.to_bits()];
        v.extend(r.per_class.iter().flat_map(|m| [m.precision.to_bits(), m.recall.to_bits(), m.f1.to_bits()]));
        v
    };
    let ok = ck.params == params && before == after && bits(&before) == bits(&after) && ck.vocab == vocab;
    verdict(
        "checkpoint round-trip",
        ok,
        &format!("EvalReport identical after reload (accuracy {:.4})", after.accuracy),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- data-dependent criteria

fn data_root() -> Option<PathBuf> {
    let root = PathBuf::from(std::env::var_os("ASGCN_DATA")?);
    parsed_path(&root, DatasetName::Rest14, Split::Train).exists().then_some(root)
}

fn embeddings_path() -> Option<PathBuf> {
    let p = PathBuf::from(std::env::var_os("ASGCN_EMBEDDINGS")?);
    p.exists().then_some(p)
}

const DATA_CRITERIA: [(&str, bool); 4] = [
    ("dataset statistics", false),
    ("overfit sanity (Rest14 subset)", false),
    ("desk-scale reproduction (Rest14 >= 77.5%, Rest15 >= 76.5%)", true),
    ("trend reproduction (layer sweep, DG vs DT, mask ablation)", true),
];

#[test]
fn blocked_criteria() {
    let data = data_root();
    let vectors = embeddings_path();
    for (name, needs_vectors) in DATA_CRITERIA {
        match (&data, &vectors) {
            (None, _) => {
                blocked(name, "no preprocessed benchmark splits (set ASGCN_DATA); run with --ignored once present")
            }
            (Some(_), None) if needs_vectors => {
                blocked(name, "no pretrained word vectors (set ASGCN_EMBEDDINGS); run with --ignored once present")
            }
            _ => blocked(name, "inputs present; run `cargo test --release --test acceptance -- --ignored`"),
        }
    }
}

#[test]
#[ignore = "needs preprocessed benchmark splits under ASGCN_DATA"]
fn dataset_statistics() {
    let root = data_root().expect("ASGCN_DATA with preprocessed splits");
    let mut mismatched = Vec::new();
    for name in DatasetName::ALL {
        let (train_ref, test_ref) = name.reference_counts();
        for (split, reference) in [(Split::Train, train_ref), (Split::Test, test_ref)] {
            let ex = asgcn::data::load_split(&root, name, split).unwrap();
            let got = LabelCounts::of(ex.iter().map(|e| &e.label));
            if got != reference {
                mismatched.push(format!("{name}/{}: {got} vs {reference}", split.as_str()));
            }
        }
    }
    let ok = mismatched.is_empty();
    verdict("dataset statistics", ok, &if ok { "all ten splits match".into() } else { mismatched.join("; ") });
    assert!(ok);
}

#[test]
#[ignore = "needs preprocessed benchmark splits under ASGCN_DATA"]
fn overfit_sanity() {
    let root = data_root().expect("ASGCN_DATA with preprocessed splits");
    let ds = Dataset::load(&root, DatasetName::Rest14).unwrap();
    let subset: Vec<Example> = ds.train.iter().take(32).cloned().collect();
    let cfg = ModelConfig::default();
    let mut params = build_model(&cfg, ds.vocab.len()).unwrap();
    if let Some(p) = embeddings_path() {
        let t = load_embeddings(&p, &ds.vocab, cfg.embed_dim, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        params.overlay_embeddings(&t).unwrap();
    }
    let start = Instant::now();
    let mut adam = Adam::new(cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut reached = None;
    let mut losses = Vec::new();
    for epoch in 1..=200 {
        losses.push(train_epoch(&cfg, &mut params, &mut adam, &subset, epoch, &mut rng).unwrap());
        if evaluate(&params, &cfg, &subset).unwrap().accuracy == 1.0 {
            reached = Some(epoch);
            break;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let loss = mean_data_loss(&params, &cfg, &subset).unwrap();
    let settled = losses.iter().skip(5).zip(losses.iter().skip(6)).all(|(a, b)| b <= a);
    let ok = reached.is_some() && secs < 120.0;
    verdict(
        "overfit sanity (Rest14 subset)",
        ok,
        &format!(
            "100% train accuracy at epoch {reached:?}, data loss {loss:.4}, loss non-increasing after epoch 5: {settled}, \
             {secs:.0}s (budget 120s)"
        ),
    );
    assert!(ok);
}

fn mean_accuracy(cfg: &ModelConfig, ds: &Dataset, vectors: &asgcn::data::PretrainedEmbeddings, seeds: &[u64]) -> f64 {
    let corpus = Corpus { vocab_len: ds.vocab.len(), pretrained: Some(vectors), train: &ds.train, eval: &ds.test };
    let reports: Vec<EvalReport> = seeds
        .iter()
        .map(|&seed| {
            let c = ModelConfig { seed, ..cfg.clone() };
            run_seed(&c, &TrainOptions::default(), corpus, |_| Ok(())).unwrap().best_report
        })
        .collect();
    aggregate_runs(&reports).unwrap().mean_accuracy
}

fn load_with_vectors(name: DatasetName) -> (Dataset, asgcn::data::PretrainedEmbeddings) {
    let root = data_root().expect("ASGCN_DATA with preprocessed splits");
    let vectors = embeddings_path().expect("ASGCN_EMBEDDINGS pointing at 300-d word vectors");
    let ds = Dataset::load(&root, name).unwrap();
    let table = load_embeddings(&vectors, &ds.vocab, 300, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    (ds, table)
}

#[test]
#[ignore = "needs benchmark splits and 300-d word vectors; hours of CPU"]
fn desk_scale_reproduction() {
    let cfg = ModelConfig::default();
    let (rest14, v14) = load_with_vectors(DatasetName::Rest14);
    let start = Instant::now();
    let a14 = mean_accuracy(&cfg, &rest14, &v14, &[1, 2, 3]);
    let hours = start.elapsed().as_secs_f64() / 3600.0;
    let (rest15, v15) = load_with_vectors(DatasetName::Rest15);
    let a15 = mean_accuracy(&cfg, &rest15, &v15, &[1, 2, 3]);
    let ok = a14 >= 0.775 && a15 >= 0.765 && hours <= 2.0;
    verdict(
        "desk-scale reproduction (Rest14 >= 77.5%, Rest15 >= 76.5%)",
        ok,
        &format!("Rest14 {:.2}% ({hours:.2} h, budget 2 h), Rest15 {:.2}%, 3 seeds each", 100.0 * a14, 100.0 * a15),
    );
    assert!(ok);
}

#[test]
#[ignore = "needs benchmark splits and 300-d word vectors; many hours of CPU"]
fn trend_reproduction() {
    let seeds = [1, 2, 3];
    let (lap, vlap) = load_with_vectors(DatasetName::Lap14);
    let corpus = Corpus { vocab_len: lap.vocab.len(), pretrained: Some(&vlap), train: &lap.train, eval: &lap.test };
    let rows = sweep_layers(&ModelConfig::default(), &TrainOptions::default(), corpus, &[1, 2, 3, 4], &seeds).unwrap();
    let best = rows.iter().max_by(|a, b| a.summary.mean_accuracy.total_cmp(&b.summary.mean_accuracy)).unwrap();
    let l2 = rows.iter().find(|r| r.layers == 2).unwrap().summary.mean_accuracy;
    let sweep_ok = best.layers == 2 && rows.iter().filter(|r| r.summary.mean_accuracy == l2).count() == 1;

    let dg = mean_accuracy(&ModelConfig::new(Variant::AsgcnDg), &lap, &vlap, &seeds);
    let dt = mean_accuracy(&ModelConfig::new(Variant::AsgcnDt), &lap, &vlap, &seeds);

    let (rest, vrest) = load_with_vectors(DatasetName::Rest14);
    let full = mean_accuracy(&ModelConfig::default(), &rest, &vrest, &seeds);
    let nomask =
        mean_accuracy(&ModelConfig { use_aspect_mask: false, ..ModelConfig::default() }, &rest, &vrest, &seeds);

    let ok = sweep_ok && dg > dt && full > nomask;
    verdict(
        "trend reproduction (layer sweep, DG vs DT, mask ablation)",
        ok,
        &format!(
            "best L = {} (L=2 {:.4}); DG {dg:.4} vs DT {dt:.4}; full {full:.4} vs w/o mask {nomask:.4}",
            best.layers, l2
        ),
    );
    assert!(ok);
}
