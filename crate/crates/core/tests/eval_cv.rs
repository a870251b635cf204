mod common;

use std::collections::HashSet;
use std::path::PathBuf;

use common::structured_dataset;
use gmt_core::data::{load_csv, SchemaSpec};
use gmt_core::eval::{
    accuracy_from_predictions, run_cv, run_suite, BenchmarkSpec, DatasetOutcome, GmtTrainer, ModelSpec,
    NoOpTrainer,
};
use gmt_core::tree::{build_gmt, Classifier, GmtConfig};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn every_row_is_held_out_once_per_seed() {
    let data = structured_dataset(3, 137, 3);
    let report = run_cv("s", &data, 10, &[0, 1, 2], &ModelSpec::default(), &GmtTrainer { trees: 1 }).unwrap();
    assert_eq!(report.folds.len(), 30);
    assert_eq!(report.predictions.len(), 3 * 137);
    for seed in 0..3u64 {
        let rows: HashSet<usize> =
            report.predictions.iter().filter(|p| p.seed == Some(seed)).map(|p| p.row).collect();
        assert_eq!(rows.len(), 137);
    }
    for f in &report.folds {
        assert_eq!(f.n_train + f.n_test, 137);
        assert!((13..=14).contains(&f.n_test));
    }
}

#[test]
fn reported_accuracy_is_recomputable_from_predictions() {
    let data = structured_dataset(9, 200, 2);
    let report = run_cv("s", &data, 5, &[4, 5], &ModelSpec::default(), &GmtTrainer { trees: 1 }).unwrap();
    let seeds = accuracy_from_predictions(&report.predictions);
    assert_eq!(seeds, report.seeds);
    let mean = seeds.iter().map(|s| s.accuracy).sum::<f64>() / seeds.len() as f64;
    assert!((mean - report.accuracy).abs() < 1e-12);

    // Refitting a fold by hand reproduces its predictions.
    let plan = gmt_core::data::kfold_indices(data.n(), 5, 4).unwrap();
    let train = data.select_rows(&plan.train_rows(2)).unwrap();
    let tree = build_gmt(&train, &GmtConfig::for_classes(2)).unwrap();
    for p in report.predictions.iter().filter(|p| p.seed == Some(4) && p.fold == 2) {
        assert_eq!(tree.predict_class(&data.row(p.row)).unwrap(), p.predicted);
        assert_eq!(data.outcome(p.row), p.truth);
    }
}

#[test]
fn cv_is_deterministic_per_seed() {
    let data = structured_dataset(1, 120, 3);
    let a = run_cv("s", &data, 10, &[7], &ModelSpec::default(), &GmtTrainer { trees: 1 }).unwrap();
    let b = run_cv("s", &data, 10, &[7], &ModelSpec::default(), &GmtTrainer { trees: 1 }).unwrap();
    assert_eq!(a.predictions, b.predictions);
    assert_eq!(a.accuracy, b.accuracy);
}

#[test]
fn timing_harness_overhead_is_small() {
    let data = structured_dataset(2, 2000, 4);
    let report = run_cv("noop", &data, 10, &[0], &ModelSpec::default(), &NoOpTrainer).unwrap();
    // Only row selection is timed for a trainer that does nothing.
    assert!(report.train_ms_mean < 50.0, "{} ms", report.train_ms_mean);
    assert!(report.folds.iter().all(|f| f.depth == 0 && f.leaves == 1));
}

#[test]
fn shipped_schemas_load_their_files() {
    for (dir, file, n, d) in [
        ("haberman", "haberman.csv", 306, 3),
        ("heart", "heart.csv", 270, 20),
        ("ripley", "synth_tr.csv", 250, 2),
        ("ripley", "synth_te.csv", 1000, 2),
        ("gamma", "magic.csv", 19020, 10),
    ] {
        let schema = SchemaSpec::from_file(data_dir().join(dir).join("schema.toml")).unwrap();
        let data = load_csv(data_dir().join(dir).join(file), &schema).unwrap();
        assert_eq!((data.n(), data.d(), data.n_classes()), (n, d, 2), "{dir}/{file}");
    }
}

#[test]
fn suite_keeps_going_past_a_missing_file() {
    let text = r#"
        [[dataset]]
        name = "gone"
        data = "nowhere/missing.csv"
        schema = "haberman/schema.toml"
        protocol = { kind = "kfold", k = 3 }

        [[dataset]]
        name = "ripley"
        data = "ripley/synth_tr.csv"
        schema = "ripley/schema.toml"
        protocol = { kind = "train-test", test = "ripley/synth_te.csv" }
    "#;
    let spec = BenchmarkSpec::from_toml_str(text, &data_dir()).unwrap();
    let report = run_suite(&spec);
    assert!(matches!(&report.results[0], DatasetOutcome::Error { name, error }
        if name == "gone" && error.contains("gone")));
    assert!(matches!(&report.results[1], DatasetOutcome::Ok(r) if r.protocol == "train-test"));
}

#[test]
fn every_shipped_schema_validates() {
    let spec = BenchmarkSpec::from_file(data_dir().join("benchmark.toml")).unwrap();
    assert_eq!(spec.datasets.len(), 8);
    for ds in &spec.datasets {
        SchemaSpec::from_file(&ds.schema).unwrap_or_else(|e| panic!("{}: {e}", ds.name));
    }
}
