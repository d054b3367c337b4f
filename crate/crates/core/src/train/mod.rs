//! Loss, optimization, the epoch loop with early stopping, and evaluation.

mod metrics;
mod optim;
mod stats;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use metrics::{aggregate_runs, ClassMetrics, EvalReport, RunSummary};
pub use optim::Adam;
pub use stats::{ln_gamma, paired_t_test, regularized_incomplete_beta, student_t_cdf, two_sided_p, Pairing, TTest};

use crate::autodiff::{Graph, Tensor};
use crate::data::{make_batches, Example};
use crate::error::{Error, Result};
use crate::model::{forward, predict_batch, BoundParams, ModelConfig, ParameterStore, Prediction};

/// Mean cross-entropy over the batch plus `lambda` · Σθ² over `params`.
pub fn loss(g: &mut Graph, logits: Tensor, labels: &[usize], params: &[Tensor], lambda: f64) -> Result<Tensor> {
    let data = g.cross_entropy(logits, labels)?;
    if lambda == 0.0 || params.is_empty() {
        return Ok(data);
    }
    let penalty = l2_penalty(g, params, lambda)?;
    g.add(data, penalty)
}

/// `lambda` · Σθ² as a scalar node.
pub fn l2_penalty(g: &mut Graph, params: &[Tensor], lambda: f64) -> Result<Tensor> {
    let mut total: Option<Tensor> = None;
    for &p in params {
        let sq = g.mul(p, p)?;
        let s = g.sum(sq);
        total = Some(match total {
            Some(t) => g.add(t, s)?,
            None => s,
        });
    }
    let total = total.ok_or_else(|| Error::Shape("no parameters to regularize".into()))?;
    Ok(g.scale(total, lambda))
}

/// Epoch budget and stopping rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub max_epochs: usize,
    /// Non-improving epochs tolerated; training stops on the next one.
    pub patience: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { max_epochs: 100, patience: 5 }
    }
}

/// One line of the run history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval_accuracy: f64,
    pub eval_macro_f1: f64,
    pub wall_seconds: f64,
}

pub struct TrainOutcome {
    /// Parameters from the epoch with the highest evaluation accuracy.
    pub best: ParameterStore,
    pub best_epoch: usize,
    pub best_report: EvalReport,
    pub history: Vec<EpochRecord>,
}

/// Runs the optimization loop, keeping the parameters with the best
/// evaluation accuracy (earliest epoch on ties).
///
/// `on_epoch` sees every record as soon as it exists, e.g. to append it to a
/// history file.
pub fn train(
    cfg: &ModelConfig,
    opts: &TrainOptions,
    mut params: ParameterStore,
    train_set: &[Example],
    eval_set: &[Example],
    mut on_epoch: impl FnMut(&EpochRecord) -> Result<()>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || eval_set.is_empty() {
        return Err(Error::Config("training and evaluation sets must be nonempty".into()));
    }
    let start = Instant::now();
    let mut adam = Adam::new(cfg.learning_rate);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_d409);
    let mut history = Vec::new();
    let mut best: Option<(ParameterStore, usize, EvalReport)> = None;
    let mut stale = 0;

    for epoch in 1..=opts.max_epochs {
        let train_loss = train_epoch(cfg, &mut params, &mut adam, train_set, epoch, &mut dropout_rng)?;
        let report = evaluate(&params, cfg, eval_set)?;
        let record = EpochRecord {
            epoch,
            train_loss,
            eval_accuracy: report.accuracy,
            eval_macro_f1: report.macro_f1,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        log::info!(
            "epoch {epoch:>3}  loss {train_loss:.4}  acc {:.4}  f1 {:.4}",
            record.eval_accuracy,
            record.eval_macro_f1
        );
        on_epoch(&record)?;
        history.push(record);

        let improved = best.as_ref().is_none_or(|(_, _, b)| report.accuracy > b.accuracy);
        if improved {
            best = Some((params.clone(), epoch, report));
            stale = 0;
        } else {
            stale += 1;
            if stale > opts.patience {
                log::info!("no improvement for {stale} epochs, stopping");
                break;
            }
        }
    }
    let (best, best_epoch, best_report) = best.ok_or_else(|| Error::Config("max_epochs must be at least 1".into()))?;
    Ok(TrainOutcome { best, best_epoch, best_report, history })
}

/// One pass over shuffled batches; returns the mean batch loss.
pub fn train_epoch(
    cfg: &ModelConfig,
    params: &mut ParameterStore,
    adam: &mut Adam,
    examples: &[Example],
    epoch: usize,
    dropout_rng: &mut ChaCha8Rng,
) -> Result<f64> {
    let shuffle = cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(epoch as u64);
    let batches = make_batches(examples, cfg.batch_size, Some(shuffle), cfg.flavor())?;
    let mut total = 0.0;
    for (b, batch) in batches.iter().enumerate() {
        let mut g = Graph::new();
        let bound = BoundParams::bind(&mut g, params, cfg);
        let rng = (cfg.dropout > 0.0).then_some(&mut *dropout_rng);
        let out = forward(&mut g, &bound, cfg, batch, rng)?;
        let trainable: Vec<(&str, Tensor)> = bound.iter().filter(|&(_, t)| g.requires_grad(t)).collect();
        let tensors: Vec<Tensor> = trainable.iter().map(|&(_, t)| t).collect();
        let labels: Vec<usize> = batch.labels.iter().map(|l| l.index()).collect();
        let l = loss(&mut g, out.logits, &labels, &tensors, cfg.l2_lambda)?;
        let value = g.value(l).data()[0];
        if !value.is_finite() {
            return Err(Error::Diverged { epoch, batch: b, loss: value });
        }
        total += value;
        g.backward(l)?;
        let mut grads: BTreeMap<String, Vec<f64>> = trainable
            .iter()
            .map(|&(name, t)| {
                let grad = g.grad(t).map_or_else(|| vec![0.0; g.value(t).len()], <[f64]>::to_vec);
                (name.to_owned(), grad)
            })
            .collect();
        adam.step(params, &mut grads)?;
    }
    Ok(total / batches.len() as f64)
}

/// Predictions for `examples` in order.
pub fn predict_all(params: &ParameterStore, cfg: &ModelConfig, examples: &[Example]) -> Result<Vec<Prediction>> {
    let mut out = Vec::with_capacity(examples.len());
    for batch in make_batches(examples, cfg.batch_size, None, cfg.flavor())? {
        out.extend(predict_batch(params, cfg, &batch)?);
    }
    Ok(out)
}

pub fn evaluate(params: &ParameterStore, cfg: &ModelConfig, examples: &[Example]) -> Result<EvalReport> {
    let predicted: Vec<usize> = predict_all(params, cfg, examples)?.iter().map(|p| p.label.index()).collect();
    let gold: Vec<usize> = examples.iter().map(|e| e.label.index()).collect();
    EvalReport::from_predictions(&gold, &predicted, cfg.num_classes)
}

/// Mean cross-entropy (without the penalty) over `examples`.
pub fn mean_data_loss(params: &ParameterStore, cfg: &ModelConfig, examples: &[Example]) -> Result<f64> {
    let mut total = 0.0;
    for batch in make_batches(examples, cfg.batch_size, None, cfg.flavor())? {
        let mut g = Graph::new();
        let bound = BoundParams::bind_frozen(&mut g, params);
        let out = forward(&mut g, &bound, cfg, &batch, None)?;
        let labels: Vec<usize> = batch.labels.iter().map(|l| l.index()).collect();
        let l = g.cross_entropy(out.logits, &labels)?;
        total += g.value(l).data()[0] * batch.len() as f64;
    }
    Ok(total / examples.len() as f64)
}

pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut f = File::create(path)?;
    for r in history {
        writeln!(f, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn read_history(path: &Path) -> Result<Vec<EpochRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}
