use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gmt_core::data::{load_csv, read_feature_rows, DataSet, SchemaSpec};
use gmt_core::eval::{
    evaluate_accuracy, render_table, run_cv, run_suite, BenchmarkSpec, GmtTrainer, ModelSpec, Protocol,
};
use gmt_core::partition::{dimension_importance, PriorKind};
use gmt_core::tree::{
    build_ensemble_distinct_roots, build_gmt, export_graph, export_structured, export_text, format_sig,
    import_model, Classifier, ModelBody, SavedModel,
};

use crate::args::{
    BenchArgs, Cli, Command, DataArgs, EvalArgs, ExportArgs, Format, ImportanceArgs, ModelArgs, PredictArgs,
    TrainArgs,
};
use crate::error::CliError;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a, verbose),
        Command::Eval(a) => eval(a),
        Command::Bench(a) => bench(a),
        Command::Export(a) => export(a),
        Command::Importance(a) => importance(a),
    }
}

impl ModelArgs {
    fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            alpha: (!self.alpha.is_empty()).then(|| self.alpha.clone()),
            g: self.g,
            depth_dependent: !self.depth_independent_prior,
            partition_prior: if self.uniform_partition_prior {
                PriorKind::Uniform
            } else {
                PriorKind::Geometric
            },
            delta: self.delta,
            max_depth: self.max_depth,
            trees: self.trees,
        }
    }
}

fn load(input: &DataArgs) -> Result<(SchemaSpec, DataSet), CliError> {
    let schema = SchemaSpec::from_file(&input.schema)?;
    let data = load_csv(&input.data, &schema)?;
    log::info!("loaded {} rows, {} encoded features", data.n(), data.d());
    Ok((schema, data))
}

fn read_model(path: &Path) -> Result<SavedModel, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(import_model(&text)?)
}

fn check_schema(model: &SavedModel, schema: &SchemaSpec) -> Result<(), CliError> {
    if schema.hash(model.n_classes()) != model.schema_hash() {
        return Err(CliError::Mismatch(format!(
            "schema does not match the model (model features: {})",
            model.feature_names().join(", ")
        )));
    }
    Ok(())
}

/// Writes through a temporary sibling and renames, so a failed run never
/// leaves a partial file behind.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let name =
        path.file_name().ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = fs::write(&tmp, contents).and_then(|()| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::Data(format!("{}: {e}", path.display())));
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn render(model: &SavedModel, format: Format) -> String {
    match (format, &model.model) {
        (Format::Structured, _) => export_structured(model),
        (Format::Text, ModelBody::Tree(t)) => export_text(t),
        (Format::Graph, ModelBody::Tree(t)) => export_graph(t),
        (fmt, ModelBody::Ensemble(e)) => {
            let mut out = String::new();
            for (i, (tree, w)) in e.trees.iter().zip(&e.weights).enumerate() {
                let body = if fmt == Format::Text { export_text(tree) } else { export_graph(tree) };
                out.push_str(&format!("# tree {} weight {}\n{body}", i + 1, format_sig(*w, 6)));
            }
            out
        }
    }
}

fn train(a: TrainArgs) -> Result<(), CliError> {
    let (_, data) = load(&a.input)?;
    let spec = a.model.to_spec();
    if spec.trees == 0 {
        return Err(CliError::Usage("--trees must be at least 1".into()));
    }
    let cfg = spec.to_config(data.n_classes())?;
    let model = if spec.trees == 1 {
        SavedModel::tree(build_gmt(&data, &cfg)?)
    } else {
        SavedModel::ensemble(build_ensemble_distinct_roots(&data, &cfg, spec.trees)?)
    };
    write_atomic(&a.out, export_structured(&model).as_bytes())?;

    let mut out = io::stdout().lock();
    for (i, tree) in model.trees().iter().enumerate() {
        writeln!(
            out,
            "tree {}: depth {}, leaves {}, ln f {}",
            i + 1,
            tree.depth(),
            tree.n_leaves(),
            format_sig(tree.log_prob, 6)
        )?;
    }
    if let ModelBody::Ensemble(e) = &model.model {
        if e.truncated() {
            writeln!(out, "only {} of {} requested trees had distinct roots", e.trees.len(), e.requested)?;
        }
    }
    writeln!(out, "model written to {}", a.out.display())?;
    if let Some(format) = a.format {
        write!(out, "{}", render(&model, format))?;
    }
    Ok(())
}

fn predict(a: PredictArgs, verbose: bool) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let schema = SchemaSpec::from_file(&a.input.schema)?;
    check_schema(&model, &schema)?;
    let file =
        File::open(&a.input.data).map_err(|e| CliError::Data(format!("{}: {e}", a.input.data.display())))?;
    let rows = read_feature_rows(file, &schema)?;

    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(output(a.out.as_deref())?);
    let mut header = vec!["line".to_string(), "class".to_string()];
    header.extend(model.class_labels().iter().map(|l| format!("p_{l}")));
    if verbose {
        header.push("path".into());
    }
    let io_err = |e: csv::Error| CliError::Data(e.to_string());
    wtr.write_record(&header).map_err(io_err)?;

    let tree = model.primary_tree();
    let mut failures = 0usize;
    for row in rows {
        let result = row.features.map_err(CliError::from).and_then(|x| Ok((model.predict_proba(&x)?, x)));
        match result {
            Ok((proba, x)) => {
                let class =
                    proba.iter().enumerate().fold(0, |best, (c, &p)| if p > proba[best] { c } else { best });
                let mut rec = vec![row.line.to_string(), model.class_labels()[class].clone()];
                rec.extend(proba.iter().map(|&p| format_sig(p, 6)));
                if verbose {
                    let steps: Vec<String> = tree
                        .decision_path(&x)?
                        .iter()
                        .map(|s| {
                            let name = &tree.feature_names[s.dim];
                            let op = if s.lower { "≤" } else { ">" };
                            format!("{name} {op} {}", format_sig(s.threshold, 6))
                        })
                        .collect();
                    rec.push(steps.join("; "));
                }
                wtr.write_record(&rec).map_err(io_err)?;
            }
            Err(e) => {
                failures += 1;
                wtr.write_record([row.line.to_string(), "ERROR".into(), e.to_string()]).map_err(io_err)?;
            }
        }
    }
    wtr.flush()?;
    if failures > 0 {
        log::warn!("{failures} row(s) could not be classified");
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<(), CliError> {
    let (schema, data) = load(&a.input)?;
    let mut out = io::stdout().lock();
    if let Some(path) = &a.model {
        let model = read_model(path)?;
        check_schema(&model, &schema)?;
        let acc = evaluate_accuracy(&model, &data)?;
        writeln!(out, "accuracy {} ({} rows)", format_sig(acc, 6), data.n())?;
        return Ok(());
    }
    let spec = a.hyper.to_spec();
    if spec.trees == 0 {
        return Err(CliError::Usage("--trees must be at least 1".into()));
    }
    let name = a.input.data.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
    let trainer = GmtTrainer { trees: spec.trees };
    let report = run_cv(&name, &data, a.k, &a.seed, &spec, &trainer)?;
    for s in &report.seeds {
        writeln!(
            out,
            "seed {}: accuracy {} ({}/{})",
            s.seed.unwrap_or_default(),
            format_sig(s.accuracy, 6),
            s.correct,
            s.total
        )?;
    }
    writeln!(
        out,
        "{}-fold accuracy {} ± {}, train {} ms/fold, depth {}, leaves {}",
        a.k,
        format_sig(report.accuracy, 6),
        format_sig(report.accuracy_spread, 6),
        format_sig(report.train_ms_mean, 4),
        format_sig(report.depth_mean, 4),
        format_sig(report.leaves_mean, 4)
    )?;
    if let Some(path) = &a.out {
        write_atomic(path, serde_json::to_string_pretty(&report).expect("report serialises").as_bytes())?;
    }
    if let Some(path) = &a.predictions {
        let mut buf = Vec::new();
        report.write_predictions(&mut buf).map_err(|e| CliError::Data(e.to_string()))?;
        write_atomic(path, &buf)?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), CliError> {
    let mut spec = BenchmarkSpec::from_file(&a.spec)?;
    if !a.only.is_empty() {
        spec.datasets.retain(|d| a.only.contains(&d.name));
    }
    for ds in &mut spec.datasets {
        if let Protocol::Kfold { k, seeds } = &mut ds.protocol {
            if let Some(new_k) = a.k {
                *k = new_k;
            }
            if !a.seed.is_empty() {
                *seeds = a.seed.clone();
            }
        }
    }
    spec.validate()?;
    let report = run_suite(&spec);
    let mut out = io::stdout().lock();
    write!(out, "{}", render_table(&report))?;
    if let Some(path) = &a.out {
        write_atomic(path, report.to_json().as_bytes())?;
    }
    if let Some(dir) = &a.predictions {
        fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
        for rep in report.reports() {
            let mut buf = Vec::new();
            rep.write_predictions(&mut buf).map_err(|e| CliError::Data(e.to_string()))?;
            write_atomic(&dir.join(format!("{}.predictions.csv", rep.name)), &buf)?;
        }
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<(), CliError> {
    let model = read_model(&a.model)?;
    let text = render(&model, a.format);
    match &a.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn importance(a: ImportanceArgs) -> Result<(), CliError> {
    let (_, data) = load(&a.input)?;
    let cfg = a.model.to_spec().to_config(data.n_classes())?;
    let imp = dimension_importance(&data.full_view(), &cfg.prior, &cfg.prior_cfg, 0)?;
    let layout = data.layout();
    let mut out = io::stdout().lock();
    writeln!(out, "{:<24} {}", "column", "mass")?;
    writeln!(out, "{:<24} {}", "(no split)", format_sig(imp.trivial, 6))?;
    for group in &layout.groups {
        let mass: f64 = imp.dims[group.start..group.start + group.width].iter().sum();
        writeln!(out, "{:<24} {}", group.name, format_sig(mass, 6))?;
    }
    if a.per_dimension {
        writeln!(out)?;
        for (name, mass) in layout.names.iter().zip(&imp.dims) {
            writeln!(out, "{:<24} {}", name, format_sig(*mass, 6))?;
        }
    }
    Ok(())
}
