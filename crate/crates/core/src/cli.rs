//! Command-line front end. The `asgcn` binary only calls [`main`].

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::data::{
    load_embeddings, load_split, DatasetName, Example, LabelCounts, PretrainedEmbeddings, Split, Vocabulary,
};
use crate::error::{Error, Result};
use crate::experiment::{
    accuracy_by_aspect_count, mean_correctness, run_seed, sweep_layers, sweep_tsv, Corpus, DEFAULT_LAYER_SWEEP,
};
use crate::heatmap::{render_heatmap, HeatmapRow};
use crate::model::{load_checkpoint, predict, save_checkpoint, ModelConfig, Variant};
use crate::train::{aggregate_runs, evaluate, paired_t_test, EvalReport, RunSummary, TrainOptions};

#[derive(Parser, Debug)]
#[command(name = "asgcn", version, about = "Aspect-specific graph convolutional networks for aspect sentiment")]
pub struct Cli {
    /// Root holding <dataset>/{train,test}.jsonl
    #[arg(long, env = "ASGCN_DATA", default_value = "data", global = true)]
    pub data_dir: PathBuf,

    /// Repeat for more log output
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one model per seed and aggregate
    Train(TrainArgs),
    /// Evaluate a checkpoint, optionally against another system
    Eval(EvalArgs),
    /// Accuracy and macro-F1 as a function of the number of GCN layers
    SweepLayers(SweepArgs),
    /// Accuracy grouped by the number of aspects per sentence
    AnalyzeAspects(AnalyzeArgs),
    /// Attention heatmaps as a self-contained HTML page
    Visualize(VisualizeArgs),
    /// Paired t-test between two saved systems
    Compare(CompareArgs),
    /// Label counts of the parsed splits against the published table
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, default_value = "asgcn-dg")]
    pub model: Variant,
    /// Number of GCN (or convolution) layers
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Ablation: drop the graph layers
    #[arg(long)]
    pub no_gcn: bool,
    /// Ablation: drop position weights
    #[arg(long)]
    pub no_pos: bool,
    /// Ablation: attend over all rows instead of the aspect
    #[arg(long)]
    pub no_mask: bool,
    #[arg(long, default_value_t = 300)]
    pub hidden: usize,
    #[arg(long, default_value_t = 300)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 0.001)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub l2: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.0)]
    pub dropout: f64,
    #[arg(long)]
    pub freeze_embeddings: bool,
    #[arg(long, default_value_t = 100)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,
    /// Word-vector text file (e.g. glove.840B.300d.txt)
    #[arg(long, required_unless_present = "random_embeddings", conflicts_with = "random_embeddings")]
    pub embeddings: Option<PathBuf>,
    /// Start every word from random vectors instead
    #[arg(long)]
    pub random_embeddings: bool,
}

impl ModelArgs {
    pub fn config(&self, seed: u64) -> ModelConfig {
        ModelConfig {
            variant: self.model,
            num_layers: self.layers,
            hidden: self.hidden,
            embed_dim: self.embed_dim,
            use_position_weights: !self.no_pos,
            use_aspect_mask: !self.no_mask,
            use_gcn: !self.no_gcn,
            num_classes: 3,
            l2_lambda: self.l2,
            learning_rate: self.lr,
            batch_size: self.batch_size,
            seed,
            dropout: self.dropout,
            freeze_embeddings: self.freeze_embeddings,
        }
    }

    pub fn options(&self) -> TrainOptions {
        TrainOptions { max_epochs: self.max_epochs, patience: self.patience }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: DatasetName,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset: DatasetName,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// Correctness file of another system on the same split
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub dataset: DatasetName,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LAYER_SWEEP.to_vec())]
    pub layer_values: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset: DatasetName,
    #[arg(long, value_enum, default_value = "train")]
    pub split: SplitArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VisualizeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub dataset: DatasetName,
    #[arg(long, value_enum, default_value = "test")]
    pub split: SplitArg,
    /// Example indices within the split
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub index: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairingArg {
    /// Correctness files, one value per example
    PerExample,
    /// aggregate.json files, one metric value per seed
    PerRun,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    Accuracy,
    MacroF1,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// First system: correctness.txt (per-example) or aggregate.json (per-run)
    pub a: PathBuf,
    /// Second system, same kind of file as the first
    pub b: PathBuf,
    #[arg(long, value_enum, default_value = "per-example")]
    pub pairing: PairingArg,
    /// Metric paired in per-run mode
    #[arg(long, value_enum, default_value = "accuracy")]
    pub metric: MetricArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<DatasetName>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `std::env::args`, runs the command and returns the exit code:
/// 0 on success, 1 on a runtime failure, 2 on a usage error.
pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(&cli.data_dir, a),
        Command::Eval(a) => cmd_eval(&cli.data_dir, a),
        Command::SweepLayers(a) => cmd_sweep_layers(&cli.data_dir, a),
        Command::AnalyzeAspects(a) => cmd_analyze_aspects(&cli.data_dir, a),
        Command::Visualize(a) => cmd_visualize(&cli.data_dir, a),
        Command::Compare(a) => cmd_compare(a),
        Command::Stats(a) => cmd_stats(&cli.data_dir, a),
    }
}

struct Loaded {
    train: Vec<Example>,
    test: Vec<Example>,
    vocab: Vocabulary,
    pretrained: Option<PretrainedEmbeddings>,
}

fn load_for_training(root: &Path, name: DatasetName, m: &ModelArgs) -> Result<Loaded> {
    let ds = crate::data::Dataset::load(root, name)?;
    log::info!("{name}: {} train / {} test examples, vocabulary {}", ds.train.len(), ds.test.len(), ds.vocab.len());
    let pretrained = match &m.embeddings {
        Some(path) => {
            if !path.exists() {
                return Err(Error::MissingInput {
                    path: path.clone(),
                    remedy: "download the word vectors or pass --random-embeddings".into(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let table = load_embeddings(path, &ds.vocab, m.embed_dim, &mut rng)?;
            log::info!("embedding coverage: {}", table.coverage_report());
            Some(table)
        }
        None => None,
    };
    Ok(Loaded { train: ds.train, test: ds.test, vocab: ds.vocab, pretrained })
}

#[derive(Serialize)]
struct SeedResult {
    seed: u64,
    best_epoch: usize,
    epochs_run: usize,
    accuracy: f64,
    macro_f1: f64,
}

#[derive(Serialize)]
struct TrainAggregate<'a> {
    dataset: DatasetName,
    label: String,
    config: &'a ModelConfig,
    runs: Vec<SeedResult>,
    #[serde(flatten)]
    summary: RunSummary,
}

fn cmd_train(root: &Path, a: &TrainArgs) -> Result<()> {
    if a.model.seeds.is_empty() {
        return Err(Error::Config("at least one seed is required".into()));
    }
    let data = load_for_training(root, a.dataset, &a.model)?;
    fs::create_dir_all(&a.out)?;
    let corpus = Corpus {
        vocab_len: data.vocab.len(),
        pretrained: data.pretrained.as_ref(),
        train: &data.train,
        eval: &data.test,
    };
    let mut reports = Vec::new();
    let mut runs = Vec::new();
    for &seed in &a.model.seeds {
        let cfg = a.model.config(seed);
        log::info!("training {} on {} with seed {seed}", cfg.label(), a.dataset);
        let dir = a.out.join(format!("seed-{seed}"));
        fs::create_dir_all(&dir)?;
        let history_path = dir.join("history.jsonl");
        let mut history = fs::File::create(&history_path)?;
        let outcome = run_seed(&cfg, &a.model.options(), corpus, |r| {
            writeln!(history, "{}", serde_json::to_string(r)?)?;
            Ok(())
        })?;
        save_checkpoint(&dir.join("model.ckpt"), &cfg, &data.vocab, &outcome.best)?;
        write_report(&dir, &outcome.best_report)?;
        runs.push(SeedResult {
            seed,
            best_epoch: outcome.best_epoch,
            epochs_run: outcome.history.len(),
            accuracy: outcome.best_report.accuracy,
            macro_f1: outcome.best_report.macro_f1,
        });
        reports.push(outcome.best_report);
    }
    let summary = aggregate_runs(&reports)?;
    let cfg = a.model.config(a.model.seeds[0]);
    let correctness = mean_correctness(&reports.iter().collect::<Vec<_>>())?;
    write_correctness(&a.out.join("correctness.txt"), &correctness)?;
    let mut text = String::new();
    for r in &runs {
        text.push_str(&format!(
            "seed {:<6} best epoch {:>3}  acc {:.4}  f1 {:.4}\n",
            r.seed, r.best_epoch, r.accuracy, r.macro_f1
        ));
    }
    text.push_str(&format!(
        "{} on {} ({} runs): accuracy {:.4}  macro-F1 {:.4}\n",
        cfg.label(),
        a.dataset,
        runs.len(),
        summary.mean_accuracy,
        summary.mean_macro_f1
    ));
    print!("{text}");
    fs::write(a.out.join("report.txt"), &text)?;
    let agg = TrainAggregate { dataset: a.dataset, label: cfg.label(), config: &cfg, runs, summary };
    fs::write(a.out.join("aggregate.json"), serde_json::to_string_pretty(&agg)? + "\n")?;
    write_manifest(&a.out)
}

fn load_encoded(root: &Path, name: DatasetName, split: Split, vocab: &Vocabulary) -> Result<Vec<Example>> {
    let mut examples = load_split(root, name, split)?;
    vocab.encode(&mut examples);
    Ok(examples)
}

fn cmd_eval(root: &Path, a: &EvalArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let examples = load_encoded(root, a.dataset, a.split.into(), &ckpt.vocab)?;
    let report = evaluate(&ckpt.params, &ckpt.config, &examples)?;
    print!("{}", report.table());
    let ttest = match &a.compare {
        Some(path) => {
            let other = read_correctness(path)?;
            let mine: Vec<f64> = report.correct.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
            let t = paired_t_test(&mine, &other)?;
            println!("paired t-test vs {}: t = {:.4}, df = {}, p = {:.4}", path.display(), t.t, t.df, t.p_value);
            Some(t)
        }
        None => None,
    };
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        write_report(out, &report)?;
        if let Some(t) = ttest {
            fs::write(out.join("ttest.json"), serde_json::to_string_pretty(&t)? + "\n")?;
        }
        write_manifest(out)?;
    }
    Ok(())
}

fn cmd_sweep_layers(root: &Path, a: &SweepArgs) -> Result<()> {
    if a.layer_values.is_empty() {
        return Err(Error::Config("no layer values given".into()));
    }
    let data = load_for_training(root, a.dataset, &a.model)?;
    let corpus = Corpus {
        vocab_len: data.vocab.len(),
        pretrained: data.pretrained.as_ref(),
        train: &data.train,
        eval: &data.test,
    };
    let base = a.model.config(a.model.seeds.first().copied().unwrap_or(1));
    let rows = sweep_layers(&base, &a.model.options(), corpus, &a.layer_values, &a.model.seeds)?;
    fs::create_dir_all(&a.out)?;
    let tsv = sweep_tsv(&rows);
    print!("{tsv}");
    fs::write(a.out.join("sweep.tsv"), &tsv)?;
    fs::write(a.out.join("sweep.json"), serde_json::to_string_pretty(&rows)? + "\n")?;
    write_manifest(&a.out)
}

fn cmd_analyze_aspects(root: &Path, a: &AnalyzeArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let examples = load_encoded(root, a.dataset, a.split.into(), &ckpt.vocab)?;
    let report = evaluate(&ckpt.params, &ckpt.config, &examples)?;
    let groups = accuracy_by_aspect_count(&examples, &report)?;
    let mut tsv = String::from("aspects\tsamples\taccuracy\tmacro_f1\n");
    for g in &groups {
        tsv.push_str(&format!("{}\t{}\t{:.6}\t{:.6}\n", g.aspects, g.samples, g.accuracy, g.macro_f1));
    }
    print!("{tsv}");
    fs::create_dir_all(&a.out)?;
    fs::write(a.out.join("aspects.tsv"), &tsv)?;
    write_manifest(&a.out)
}

fn cmd_visualize(root: &Path, a: &VisualizeArgs) -> Result<()> {
    let ckpt = load_checkpoint(&a.checkpoint)?;
    let examples = load_encoded(root, a.dataset, a.split.into(), &ckpt.vocab)?;
    let mut rows = Vec::with_capacity(a.index.len());
    for &i in &a.index {
        let e = examples
            .get(i)
            .ok_or_else(|| Error::Bounds(format!("example {i} of {} in the {} split", examples.len(), a.dataset)))?;
        let p = predict(&ckpt.params, &ckpt.config, e)?;
        rows.push(HeatmapRow {
            title: format!("#{i} aspect: {}", e.aspect_tokens().join(" ")),
            tokens: e.tokens.clone(),
            alpha: p.alpha,
            aspect: e.aspect,
            predicted: p.label,
            gold: e.label,
        });
    }
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("heatmap.html");
    fs::write(&path, render_heatmap(&rows))?;
    println!("wrote {}", path.display());
    write_manifest(&a.out)
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let (x, y) = match a.pairing {
        PairingArg::PerExample => (read_correctness(&a.a)?, read_correctness(&a.b)?),
        PairingArg::PerRun => (read_run_metric(&a.a, a.metric)?, read_run_metric(&a.b, a.metric)?),
    };
    let t = paired_t_test(&x, &y)?;
    println!("t = {:.4}, df = {}, p = {:.4}, mean difference = {:.6}", t.t, t.df, t.p_value, t.mean_difference);
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("ttest.json"), serde_json::to_string_pretty(&t)? + "\n")?;
        write_manifest(out)?;
    }
    Ok(())
}

fn cmd_stats(root: &Path, a: &StatsArgs) -> Result<()> {
    let names = if a.datasets.is_empty() { DatasetName::ALL.to_vec() } else { a.datasets.clone() };
    let mut tsv = String::from("dataset\tsplit\tobserved\tpublished\tmatch\n");
    let mut mismatches = 0;
    for name in names {
        let (ref_train, ref_test) = name.reference_counts();
        for (split, reference) in [(Split::Train, ref_train), (Split::Test, ref_test)] {
            let observed = LabelCounts::of(load_split(root, name, split)?.iter().map(|e| &e.label));
            let ok = observed == reference;
            mismatches += usize::from(!ok);
            tsv.push_str(&format!(
                "{name}\t{}\t{observed}\t{reference}\t{}\n",
                split.as_str(),
                if ok { "yes" } else { "no" }
            ));
        }
    }
    print!("{tsv}");
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        fs::write(out.join("stats.tsv"), &tsv)?;
        write_manifest(out)?;
    }
    if mismatches > 0 {
        return Err(Error::Statistic(format!("{mismatches} split(s) differ from the published counts")));
    }
    Ok(())
}

fn write_report(dir: &Path, report: &EvalReport) -> Result<()> {
    fs::write(dir.join("eval.json"), serde_json::to_string_pretty(report)? + "\n")?;
    fs::write(dir.join("eval.txt"), report.table())?;
    let c: Vec<f64> = report.correct.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    write_correctness(&dir.join("correctness.txt"), &c)
}

/// One value per line: 1/0 for a single run, the fraction correct for several.
pub fn write_correctness(path: &Path, values: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(values.len() * 4);
    for v in values {
        if v.fract() == 0.0 {
            s.push_str(&format!("{v:.0}\n"));
        } else {
            s.push_str(&format!("{v:.6}\n"));
        }
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_correctness(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("`{l}` is not a number"),
            })
        })
        .collect()
}

fn read_run_metric(path: &Path, metric: MetricArg) -> Result<Vec<f64>> {
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(match metric {
        MetricArg::Accuracy => summary.accuracies,
        MetricArg::MacroF1 => summary.macro_f1s,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

/// Lists every file under `dir` (except the manifest) with its SHA-256.
pub fn write_manifest(dir: &Path) -> Result<()> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let mut entries = Vec::with_capacity(files.len());
    for rel in files {
        if rel == "manifest.json" {
            continue;
        }
        let bytes = fs::read(dir.join(&rel))?;
        entries.push(ManifestEntry { bytes: bytes.len() as u64, sha256: sha256_hex(&bytes), path: rel });
    }
    let json = serde_json::json!({ "artifacts": entries });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&json)? + "\n")?;
    Ok(())
}

fn collect_files(base: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(base, &path, out)?;
        } else {
            let rel = path.strip_prefix(base).expect("under base");
            out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
        }
    }
    Ok(())
}
