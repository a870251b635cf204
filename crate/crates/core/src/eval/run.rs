use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{BenchmarkSpec, DatasetSpec, ModelSpec, Protocol};
use super::{check_shape, EvalError, GmtTrainer, Trainer};
use crate::data::{kfold_indices, load_csv, DataSet, SchemaSpec};
use crate::tree::GmtConfig;

/// One held-out prediction, enough to recompute every reported accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPrediction {
    pub seed: Option<u64>,
    pub fold: usize,
    /// Row index in the test file (the data file under k-fold).
    pub row: usize,
    pub truth: usize,
    pub predicted: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub seed: Option<u64>,
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Wall-clock build time including the fold's subset preparation.
    pub train_ms: f64,
    pub depth: usize,
    pub leaves: usize,
    pub log_prob: f64,
}

/// Pooled accuracy of one shuffle seed (all its folds together).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: Option<u64>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub name: String,
    pub protocol: String,
    pub n: usize,
    pub d: usize,
    pub n_classes: usize,
    pub model: ModelSpec,
    pub folds: Vec<FoldResult>,
    pub seeds: Vec<SeedSummary>,
    /// Mean of the per-seed accuracies.
    pub accuracy: f64,
    /// Sample standard deviation of the per-seed accuracies (0 for one seed).
    pub accuracy_spread: f64,
    pub accuracy_min: f64,
    pub accuracy_max: f64,
    pub train_ms_mean: f64,
    pub depth_mean: f64,
    pub leaves_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<f64>,
    /// Persisted separately by [`DatasetReport::write_predictions`].
    #[serde(skip)]
    pub predictions: Vec<RowPrediction>,
}

impl DatasetReport {
    /// CSV with header `seed,fold,row,truth,predicted`.
    pub fn write_predictions<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(w);
        for p in &self.predictions {
            wtr.serialize(p)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Pooled accuracy per seed, in first-seen seed order.
pub fn accuracy_from_predictions(preds: &[RowPrediction]) -> Vec<SeedSummary> {
    let mut out: Vec<SeedSummary> = Vec::new();
    for p in preds {
        let idx = match out.iter().position(|s| s.seed == p.seed) {
            Some(i) => i,
            None => {
                out.push(SeedSummary { seed: p.seed, correct: 0, total: 0, accuracy: 0.0 });
                out.len() - 1
            }
        };
        out[idx].total += 1;
        out[idx].correct += usize::from(p.truth == p.predicted);
    }
    for s in &mut out {
        s.accuracy = s.correct as f64 / s.total as f64;
    }
    out
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

struct Partial {
    folds: Vec<FoldResult>,
    predictions: Vec<RowPrediction>,
}

fn summarize(
    name: &str,
    protocol: String,
    data: &DataSet,
    model: &ModelSpec,
    partial: Partial,
) -> DatasetReport {
    let seeds = accuracy_from_predictions(&partial.predictions);
    let accs: Vec<f64> = seeds.iter().map(|s| s.accuracy).collect();
    DatasetReport {
        name: name.to_string(),
        protocol,
        n: data.n(),
        d: data.d(),
        n_classes: data.n_classes(),
        model: model.clone(),
        accuracy: mean(accs.iter().copied()),
        accuracy_spread: sample_sd(&accs),
        accuracy_min: accs.iter().copied().fold(f64::INFINITY, f64::min),
        accuracy_max: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        train_ms_mean: mean(partial.folds.iter().map(|f| f.train_ms)),
        depth_mean: mean(partial.folds.iter().map(|f| f.depth as f64)),
        leaves_mean: mean(partial.folds.iter().map(|f| f.leaves as f64)),
        folds: partial.folds,
        seeds,
        reference: None,
        dt: None,
        rf: None,
        predictions: partial.predictions,
    }
}

/// Shuffled k-fold cross-validation, repeated for every seed. Each fold's
/// timer covers building the training subset and fitting the model.
pub fn run_cv(
    name: &str,
    data: &DataSet,
    k: usize,
    seeds: &[u64],
    model: &ModelSpec,
    trainer: &dyn Trainer,
) -> Result<DatasetReport, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::Spec("no seeds given".into()));
    }
    let cfg = model.to_config(data.n_classes())?;
    let mut partial = Partial { folds: Vec::new(), predictions: Vec::new() };
    for &seed in seeds {
        let plan = kfold_indices(data.n(), k, seed)?;
        for fold in 0..k {
            let test_rows = plan.test_rows(fold);
            let start = Instant::now();
            let train = data.select_rows(&plan.train_rows(fold))?;
            let fitted = trainer.fit(&train, &cfg)?;
            let train_ms = start.elapsed().as_secs_f64() * 1e3;
            let mut correct = 0;
            for &row in &test_rows {
                let predicted = fitted.model.predict_class(&data.row(row))?;
                let truth = data.outcome(row);
                correct += usize::from(predicted == truth);
                partial.predictions.push(RowPrediction { seed: Some(seed), fold, row, truth, predicted });
            }
            partial.folds.push(FoldResult {
                seed: Some(seed),
                fold,
                n_train: train.n(),
                n_test: test_rows.len(),
                correct,
                accuracy: correct as f64 / test_rows.len() as f64,
                train_ms,
                depth: fitted.depth,
                leaves: fitted.leaves,
                log_prob: fitted.log_prob,
            });
        }
    }
    Ok(summarize(name, format!("{k}-fold x{}", seeds.len()), data, model, partial))
}

/// Fits on `train` once and scores every row of `test`.
pub fn run_train_test(
    name: &str,
    train: &DataSet,
    test: &DataSet,
    model: &ModelSpec,
    trainer: &dyn Trainer,
) -> Result<DatasetReport, EvalError> {
    let cfg: GmtConfig = model.to_config(train.n_classes())?;
    if train.layout() != test.layout() || train.n_classes() != test.n_classes() {
        return Err(EvalError::SchemaMismatch("train and test files disagree on layout".into()));
    }
    let start = Instant::now();
    let fitted = trainer.fit(train, &cfg)?;
    let train_ms = start.elapsed().as_secs_f64() * 1e3;
    check_shape(fitted.model.as_ref(), test)?;
    let mut predictions = Vec::with_capacity(test.n());
    for row in 0..test.n() {
        let predicted = fitted.model.predict_class(&test.row(row))?;
        predictions.push(RowPrediction { seed: None, fold: 0, row, truth: test.outcome(row), predicted });
    }
    let correct = predictions.iter().filter(|p| p.truth == p.predicted).count();
    let fold = FoldResult {
        seed: None,
        fold: 0,
        n_train: train.n(),
        n_test: test.n(),
        correct,
        accuracy: correct as f64 / test.n() as f64,
        train_ms,
        depth: fitted.depth,
        leaves: fitted.leaves,
        log_prob: fitted.log_prob,
    };
    let partial = Partial { folds: vec![fold], predictions };
    Ok(summarize(name, "train-test".into(), train, model, partial))
}

fn with_context(name: &str) -> impl Fn(EvalError) -> EvalError + '_ {
    move |e| EvalError::Dataset { dataset: name.to_string(), source: Box::new(e) }
}

/// Loads one dataset described by `ds` and evaluates it under `model`.
pub fn run_dataset(ds: &DatasetSpec, model: &ModelSpec) -> Result<DatasetReport, EvalError> {
    let ctx = with_context(&ds.name);
    let schema = SchemaSpec::from_file(&ds.schema).map_err(|e| ctx(e.into()))?;
    let data = load_csv(&ds.data, &schema).map_err(|e| ctx(e.into()))?;
    let trainer = GmtTrainer { trees: model.trees };
    let mut report = match &ds.protocol {
        Protocol::Kfold { k, seeds } => run_cv(&ds.name, &data, *k, seeds, model, &trainer),
        Protocol::TrainTest { test } => {
            let test = load_csv(test, &schema).map_err(|e| ctx(e.into()))?;
            run_train_test(&ds.name, &data, &test, model, &trainer)
        }
    }
    .map_err(&ctx)?;
    report.reference = ds.reference;
    report.dt = ds.dt;
    report.rf = ds.rf;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum DatasetOutcome {
    Ok(DatasetReport),
    Error { name: String, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub spec: BenchmarkSpec,
    pub results: Vec<DatasetOutcome>,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn reports(&self) -> impl Iterator<Item = &DatasetReport> {
        self.results.iter().filter_map(|r| match r {
            DatasetOutcome::Ok(rep) => Some(rep),
            DatasetOutcome::Error { .. } => None,
        })
    }
}

/// Runs every dataset in order; a failing dataset becomes an error entry.
pub fn run_suite(spec: &BenchmarkSpec) -> SuiteReport {
    let results = spec
        .datasets
        .iter()
        .map(|ds| match run_dataset(ds, &spec.model_for(ds)) {
            Ok(rep) => DatasetOutcome::Ok(rep),
            Err(e) => {
                log::warn!("{e}");
                DatasetOutcome::Error { name: ds.name.clone(), error: e.to_string() }
            }
        })
        .collect();
    SuiteReport { spec: spec.clone(), results }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{:.1}", v * 100.0))
}

/// Fixed-width table, best GMT accuracy first; failed datasets last.
pub fn render_table(report: &SuiteReport) -> String {
    let mut rows: Vec<&DatasetReport> = report.reports().collect();
    rows.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>6} {:>4} {:<14} {:>6} {:>6} {:>6} {:>15} {:>10} {:>6} {:>7}",
        "dataset", "n", "d", "protocol", "DT", "RF", "ref", "GMT", "ms/fold", "depth", "leaves"
    );
    for r in rows {
        let gmt = format!("{:.2} ± {:.2}", r.accuracy * 100.0, r.accuracy_spread * 100.0);
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>4} {:<14} {:>6} {:>6} {:>6} {:>15} {:>10.2} {:>6.1} {:>7.1}",
            r.name,
            r.n,
            r.d,
            r.protocol,
            pct(r.dt),
            pct(r.rf),
            pct(r.reference),
            gmt,
            r.train_ms_mean,
            r.depth_mean,
            r.leaves_mean
        );
    }
    for r in &report.results {
        if let DatasetOutcome::Error { name, error } = r {
            let _ = writeln!(out, "{name:<12} error: {error}");
        }
    }
    out
}
