use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::Polarity;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Accuracy, macro-F1 and their ingredients for one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub correct: Vec<bool>,
    pub predictions: Vec<usize>,
}

impl EvalReport {
    pub fn from_predictions(gold: &[usize], predicted: &[usize], num_classes: usize) -> Result<Self> {
        if gold.len() != predicted.len() {
            return Err(Error::Shape(format!("{} labels but {} predictions", gold.len(), predicted.len())));
        }
        if let Some(&bad) = gold.iter().chain(predicted).find(|&&c| c >= num_classes) {
            return Err(Error::Bounds(format!("class {bad} with {num_classes} classes")));
        }
        let mut confusion = vec![vec![0usize; num_classes]; num_classes];
        for (&g, &p) in gold.iter().zip(predicted) {
            confusion[g][p] += 1;
        }
        let mut report = Self::from_confusion(confusion);
        report.correct = gold.iter().zip(predicted).map(|(g, p)| g == p).collect();
        report.predictions = predicted.to_vec();
        Ok(report)
    }

    /// Metrics from a confusion matrix alone; `correct` and `predictions` stay empty.
    pub fn from_confusion(confusion: Vec<Vec<usize>>) -> Self {
        let k = confusion.len();
        let total: usize = confusion.iter().flatten().sum();
        let hits: usize = (0..k).map(|c| confusion[c][c]).sum();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let per_class: Vec<ClassMetrics> = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let predicted: usize = (0..k).map(|g| confusion[g][c]).sum();
                let support: usize = confusion[c].iter().sum();
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
                ClassMetrics { precision, recall, f1, support }
            })
            .collect();
        let macro_f1 = if k == 0 { 0.0 } else { per_class.iter().map(|m| m.f1).sum::<f64>() / k as f64 };
        Self {
            accuracy: ratio(hits, total),
            macro_f1,
            per_class,
            confusion,
            correct: Vec::new(),
            predictions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Human-readable summary with per-class rows and the confusion matrix.
    pub fn table(&self) -> String {
        let name = |c: usize| Polarity::from_index(c).map_or_else(|| format!("class{c}"), |p| p.name().to_owned());
        let mut s = String::new();
        let _ =
            writeln!(s, "accuracy  {:.4}   macro-F1  {:.4}   ({} examples)", self.accuracy, self.macro_f1, self.len());
        let _ = writeln!(s, "{:<10} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for (c, m) in self.per_class.iter().enumerate() {
            let _ =
                writeln!(s, "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>8}", name(c), m.precision, m.recall, m.f1, m.support);
        }
        let _ = writeln!(s, "confusion (rows gold, columns predicted)");
        for (c, row) in self.confusion.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>6}")).collect();
            let _ = writeln!(s, "{:<10} {}", name(c), cells.join(""));
        }
        s
    }
}

/// Per-run metrics and their means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub accuracies: Vec<f64>,
    pub macro_f1s: Vec<f64>,
    pub mean_accuracy: f64,
    pub mean_macro_f1: f64,
}

pub fn aggregate_runs(reports: &[EvalReport]) -> Result<RunSummary> {
    if reports.is_empty() {
        return Err(Error::Statistic("no runs to aggregate".into()));
    }
    let accuracies: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let macro_f1s: Vec<f64> = reports.iter().map(|r| r.macro_f1).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(RunSummary { mean_accuracy: mean(&accuracies), mean_macro_f1: mean(&macro_f1s), accuracies, macro_f1s })
}
