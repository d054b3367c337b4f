//! Multi-seed runs, the layer sweep, and grouping by aspects per sentence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{Example, PretrainedEmbeddings, Span};
use crate::error::{Error, Result};
use crate::model::{build_model, ModelConfig};
use crate::train::{aggregate_runs, evaluate, train, EpochRecord, EvalReport, RunSummary, TrainOptions, TrainOutcome};

/// Sentences with more aspects than this are treated as outliers.
pub const MAX_ASPECTS_PER_SENTENCE: usize = 7;

/// The layer counts of the published depth study.
pub const DEFAULT_LAYER_SWEEP: [usize; 7] = [1, 2, 3, 4, 6, 8, 12];

/// Everything a run reads besides its configuration.
#[derive(Clone, Copy)]
pub struct Corpus<'a> {
    pub vocab_len: usize,
    pub pretrained: Option<&'a PretrainedEmbeddings>,
    pub train: &'a [Example],
    pub eval: &'a [Example],
}

/// Trains one model from freshly seeded parameters. Pretrained rows, if
/// given, replace the random rows of the words they cover.
pub fn run_seed(
    cfg: &ModelConfig,
    opts: &TrainOptions,
    corpus: Corpus<'_>,
    on_epoch: impl FnMut(&EpochRecord) -> Result<()>,
) -> Result<TrainOutcome> {
    let mut params = build_model(cfg, corpus.vocab_len)?;
    if let Some(p) = corpus.pretrained {
        params.overlay_embeddings(p)?;
    }
    train(cfg, opts, params, corpus.train, corpus.eval, on_epoch)
}

/// Per-example fraction of runs that classified the example correctly.
pub fn mean_correctness(reports: &[&EvalReport]) -> Result<Vec<f64>> {
    let first = reports.first().ok_or_else(|| Error::Statistic("no runs".into()))?;
    let n = first.correct.len();
    if reports.iter().any(|r| r.correct.len() != n) {
        return Err(Error::Shape("runs were evaluated on different example sets".into()));
    }
    Ok((0..n).map(|i| reports.iter().filter(|r| r.correct[i]).count() as f64 / reports.len() as f64).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub layers: usize,
    pub summary: RunSummary,
}

/// Trains every (L, seed) pair and evaluates on the corpus's evaluation split.
pub fn sweep_layers(
    base: &ModelConfig,
    opts: &TrainOptions,
    corpus: Corpus<'_>,
    layers: &[usize],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let mut rows = Vec::with_capacity(layers.len());
    for &l in layers {
        let mut reports = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let cfg = ModelConfig { num_layers: l, seed, ..base.clone() };
            log::info!("sweep: L={l} seed={seed}");
            let out = run_seed(&cfg, opts, corpus, |_| Ok(()))?;
            reports.push(out.best_report);
        }
        rows.push(SweepRow { layers: l, summary: aggregate_runs(&reports)? });
    }
    Ok(rows)
}

/// Tab-separated table, one row per L, ready for plotting.
pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let mut s = String::from("layers\tmean_accuracy\tmean_macro_f1\taccuracies\tmacro_f1s\n");
    for r in rows {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(",");
        let _ = writeln!(
            s,
            "{}\t{:.6}\t{:.6}\t{}\t{}",
            r.layers,
            r.summary.mean_accuracy,
            r.summary.mean_macro_f1,
            join(&r.summary.accuracies),
            join(&r.summary.macro_f1s)
        );
    }
    s
}

/// Number of distinct aspects annotated on each example's sentence.
pub fn aspects_per_sentence(examples: &[Example]) -> Vec<usize> {
    let mut spans: HashMap<&[String], Vec<Span>> = HashMap::new();
    for e in examples {
        let v = spans.entry(e.tokens.as_slice()).or_default();
        if !v.contains(&e.aspect) {
            v.push(e.aspect);
        }
    }
    examples.iter().map(|e| spans[e.tokens.as_slice()].len()).collect()
}

/// Example indices keyed by aspects-per-sentence, outliers dropped.
pub fn aspect_count_groups(examples: &[Example]) -> BTreeMap<usize, Vec<usize>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in aspects_per_sentence(examples).into_iter().enumerate() {
        if c <= MAX_ASPECTS_PER_SENTENCE {
            groups.entry(c).or_default().push(i);
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspectGroupResult {
    pub aspects: usize,
    pub samples: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Accuracy of `report`'s predictions within each aspect-count group.
pub fn accuracy_by_aspect_count(examples: &[Example], report: &EvalReport) -> Result<Vec<AspectGroupResult>> {
    if report.predictions.len() != examples.len() {
        return Err(Error::Shape(format!("{} predictions for {} examples", report.predictions.len(), examples.len())));
    }
    let k = report.per_class.len();
    aspect_count_groups(examples)
        .into_iter()
        .map(|(aspects, idx)| {
            let gold: Vec<usize> = idx.iter().map(|&i| examples[i].label.index()).collect();
            let pred: Vec<usize> = idx.iter().map(|&i| report.predictions[i]).collect();
            let r = EvalReport::from_predictions(&gold, &pred, k)?;
            Ok(AspectGroupResult { aspects, samples: idx.len(), accuracy: r.accuracy, macro_f1: r.macro_f1 })
        })
        .collect()
}

/// Convenience: evaluate and group in one call.
pub fn analyze_aspects(
    params: &crate::model::ParameterStore,
    cfg: &ModelConfig,
    examples: &[Example],
) -> Result<Vec<AspectGroupResult>> {
    let report = evaluate(params, cfg, examples)?;
    accuracy_by_aspect_count(examples, &report)
}
