//! Accuracy, cross-validation with per-fold timing, and the benchmark suite
//! runner.

mod run;
mod spec;

pub use run::{
    accuracy_from_predictions, render_table, run_cv, run_dataset, run_suite, run_train_test, DatasetOutcome,
    DatasetReport, FoldResult, RowPrediction, SeedSummary, SuiteReport,
};
pub use spec::{BenchmarkSpec, DatasetSpec, ModelSpec, Protocol};

use thiserror::Error;

use crate::data::{DataError, DataSet};
use crate::tree::{
    build_ensemble_distinct_roots, build_gmt, BayesianTree, Classifier, GmtConfig, TreeEnsemble, TreeError,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("empty test set")]
    EmptyTestSet,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("benchmark spec: {0}")]
    Spec(String),
    #[error("{dataset}: {source}")]
    Dataset {
        dataset: String,
        #[source]
        source: Box<EvalError>,
    },
}

/// Fraction of `test` rows whose predicted class equals the recorded one.
pub fn evaluate_accuracy<M: Classifier + ?Sized>(model: &M, test: &DataSet) -> Result<f64, EvalError> {
    if test.n() == 0 {
        return Err(EvalError::EmptyTestSet);
    }
    check_shape(model, test)?;
    let mut correct = 0usize;
    for i in 0..test.n() {
        if model.predict_class(&test.row(i))? == test.outcome(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.n() as f64)
}

/// Accuracy over loose `(features, class)` pairs.
pub fn evaluate_rows<M: Classifier + ?Sized>(
    model: &M,
    rows: &[(Vec<f64>, usize)],
) -> Result<f64, EvalError> {
    if rows.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    let mut correct = 0usize;
    for (x, y) in rows {
        if *y >= model.n_classes() {
            return Err(EvalError::SchemaMismatch(format!(
                "class {y} outside the model's {} classes",
                model.n_classes()
            )));
        }
        if model.predict_class(x)? == *y {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len() as f64)
}

pub(crate) fn check_shape<M: Classifier + ?Sized>(model: &M, data: &DataSet) -> Result<(), EvalError> {
    if model.n_features() != data.d() || model.n_classes() != data.n_classes() {
        return Err(EvalError::SchemaMismatch(format!(
            "model expects {} features and {} classes, data has {} and {}",
            model.n_features(),
            model.n_classes(),
            data.d(),
            data.n_classes()
        )));
    }
    Ok(())
}

/// Trained model plus the statistics the report tabulates.
pub struct Fitted {
    pub model: Box<dyn Classifier + Send + Sync>,
    pub depth: usize,
    pub leaves: usize,
    pub log_prob: f64,
}

/// What a cross-validation run trains on each fold.
pub trait Trainer: Sync {
    fn fit(&self, data: &DataSet, cfg: &GmtConfig) -> Result<Fitted, TreeError>;
}

/// Greedy-modal tree, or a distinct-root ensemble when `trees > 1`.
#[derive(Debug, Clone, Copy)]
pub struct GmtTrainer {
    pub trees: usize,
}

impl Default for GmtTrainer {
    fn default() -> Self {
        Self { trees: 1 }
    }
}

impl Trainer for GmtTrainer {
    fn fit(&self, data: &DataSet, cfg: &GmtConfig) -> Result<Fitted, TreeError> {
        if self.trees <= 1 {
            let tree: BayesianTree = build_gmt(data, cfg)?;
            Ok(Fitted {
                depth: tree.depth(),
                leaves: tree.n_leaves(),
                log_prob: tree.log_prob,
                model: Box::new(tree),
            })
        } else {
            let ens: TreeEnsemble = build_ensemble_distinct_roots(data, cfg, self.trees)?;
            let best = &ens.trees[0];
            Ok(Fitted {
                depth: best.depth(),
                leaves: best.n_leaves(),
                log_prob: best.log_prob,
                model: Box::new(ens),
            })
        }
    }
}

/// Predicts class 0 everywhere without looking at the data. Its fold
/// timings measure the harness overhead alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoOpTrainer;

struct Constant {
    d: usize,
    c: usize,
}

impl Classifier for Constant {
    fn n_features(&self) -> usize {
        self.d
    }

    fn n_classes(&self) -> usize {
        self.c
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, TreeError> {
        if x.len() != self.d {
            return Err(TreeError::DimensionMismatch { expected: self.d, found: x.len() });
        }
        let mut p = vec![0.0; self.c];
        p[0] = 1.0;
        Ok(p)
    }
}

impl Trainer for NoOpTrainer {
    fn fit(&self, data: &DataSet, _cfg: &GmtConfig) -> Result<Fitted, TreeError> {
        Ok(Fitted {
            model: Box::new(Constant { d: data.d(), c: data.n_classes() }),
            depth: 0,
            leaves: 1,
            log_prob: 0.0,
        })
    }
}
