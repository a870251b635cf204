use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::predict::{argmax_lowest, Classifier};
use super::{BayesianTree, TreeEnsemble, TreeError, TreeNode};

const FORMAT_TAG: &str = "gmt-model";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Json,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(Self::Text),
            "json" | "structured" => Ok(Self::Json),
            "dot" | "graph" => Ok(Self::Dot),
            other => Err(format!("unknown export format `{other}` (text, structured, graph)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "body", rename_all = "lowercase")]
pub enum ModelBody {
    Tree(BayesianTree),
    Ensemble(TreeEnsemble),
}

/// On-disk model: a format tag and version around a tree or an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub format: String,
    pub version: u32,
    pub model: ModelBody,
}

impl SavedModel {
    pub fn tree(tree: BayesianTree) -> Self {
        Self { format: FORMAT_TAG.into(), version: FORMAT_VERSION, model: ModelBody::Tree(tree) }
    }

    pub fn ensemble(ensemble: TreeEnsemble) -> Self {
        Self { format: FORMAT_TAG.into(), version: FORMAT_VERSION, model: ModelBody::Ensemble(ensemble) }
    }

    /// The tree, or the highest-weighted member of an ensemble.
    pub fn primary_tree(&self) -> &BayesianTree {
        match &self.model {
            ModelBody::Tree(t) => t,
            ModelBody::Ensemble(e) => &e.trees[argmax_lowest(&e.weights)],
        }
    }

    pub fn trees(&self) -> Vec<&BayesianTree> {
        match &self.model {
            ModelBody::Tree(t) => vec![t],
            ModelBody::Ensemble(e) => e.trees.iter().collect(),
        }
    }

    pub fn schema_hash(&self) -> &str {
        &self.primary_tree().schema_hash
    }

    pub fn feature_names(&self) -> &[String] {
        &self.primary_tree().feature_names
    }

    pub fn class_labels(&self) -> &[String] {
        &self.primary_tree().class_labels
    }
}

impl Classifier for SavedModel {
    fn n_features(&self) -> usize {
        self.primary_tree().n_features
    }

    fn n_classes(&self) -> usize {
        self.primary_tree().n_classes
    }

    fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, TreeError> {
        match &self.model {
            ModelBody::Tree(t) => t.predict_proba(x),
            ModelBody::Ensemble(e) => e.predict_proba(x),
        }
    }
}

/// `x` with `sig` significant digits, trailing zeros removed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, e) = sci.split_once('e').expect("exponent form");
    let exp: i32 = e.parse().expect("integer exponent");
    if !(-5..=15).contains(&exp) {
        return format!("{}e{e}", trim_zeros(mantissa));
    }
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{rounded:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn list(values: impl IntoIterator<Item = f64>) -> String {
    let parts: Vec<String> = values.into_iter().map(|v| format_sig(v, 6)).collect();
    format!("[{}]", parts.join(", "))
}

fn feature_name(tree: &BayesianTree, dim: usize) -> String {
    tree.feature_names.get(dim).cloned().unwrap_or_else(|| format!("x{}", dim + 1))
}

fn class_name(tree: &BayesianTree, class: usize) -> String {
    tree.class_labels.get(class).cloned().unwrap_or_else(|| class.to_string())
}

fn rule(tree: &BayesianTree, dim: usize, threshold: f64) -> String {
    format!("{} ≤ {}", feature_name(tree, dim), format_sig(threshold, 6))
}

fn leaf_line(tree: &BayesianTree, node: &TreeNode) -> String {
    let TreeNode::Leaf { posterior, support, .. } = node else { unreachable!("leaf_line on a sprout") };
    let mean = posterior.mean();
    format!(
        "leaf n={support} posterior={} mean={} class={}",
        list(posterior.alphas().iter().copied()),
        list(mean.iter().copied()),
        class_name(tree, argmax_lowest(&mean)),
    )
}

/// Indented rule listing, one node per line.
pub fn export_text(tree: &BayesianTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# ln f = {}", format_sig(tree.log_prob, 6));
    // (node, depth, branch label)
    let mut stack = vec![(0usize, 0usize, "")];
    while let Some((idx, depth, label)) = stack.pop() {
        let node = &tree.nodes[idx];
        let indent = "  ".repeat(depth);
        let body = match node {
            TreeNode::Leaf { .. } => leaf_line(tree, node),
            TreeNode::Sprout { dim, threshold, lower, upper, support } => {
                stack.push((*upper, depth + 1, "no: "));
                stack.push((*lower, depth + 1, "yes: "));
                format!("{}  n={support}", rule(tree, *dim, *threshold))
            }
        };
        let _ = writeln!(out, "{indent}{label}{body}");
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('"', "\\\"")
}

/// Graphviz digraph with `yes`/`no` edge labels.
pub fn export_graph(tree: &BayesianTree) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=box];\n");
    for (idx, node) in tree.nodes.iter().enumerate() {
        let label = match node {
            TreeNode::Leaf { .. } => leaf_line(tree, node),
            TreeNode::Sprout { dim, threshold, support, .. } => {
                format!("{}\\nn={support}", rule(tree, *dim, *threshold))
            }
        };
        let _ = writeln!(out, "  n{idx} [label=\"{}\"];", dot_escape(&label));
        if let TreeNode::Sprout { lower, upper, .. } = node {
            let _ = writeln!(out, "  n{idx} -> n{lower} [label=\"yes\"];");
            let _ = writeln!(out, "  n{idx} -> n{upper} [label=\"no\"];");
        }
    }
    out.push_str("}\n");
    out
}

pub fn export_structured(model: &SavedModel) -> String {
    serde_json::to_string_pretty(model).expect("model serialises")
}

pub fn export_tree(tree: &BayesianTree, format: ExportFormat) -> String {
    match format {
        ExportFormat::Text => export_text(tree),
        ExportFormat::Dot => export_graph(tree),
        ExportFormat::Json => export_structured(&SavedModel::tree(tree.clone())),
    }
}

fn invalid(msg: impl Into<String>) -> TreeError {
    TreeError::Import(msg.into())
}

fn validate_tree(tree: &BayesianTree) -> Result<(), TreeError> {
    let n = tree.nodes.len();
    if n == 0 {
        return Err(invalid("tree has no nodes"));
    }
    if tree.n_classes < 2 {
        return Err(invalid("fewer than two classes"));
    }
    if tree.feature_names.len() != tree.n_features {
        return Err(invalid("feature name count differs from feature count"));
    }
    if tree.class_labels.len() != tree.n_classes {
        return Err(invalid("class label count differs from class count"));
    }
    tree.config.validate(tree.n_classes).map_err(|e| invalid(e.to_string()))?;
    if !tree.log_prob.is_finite() {
        return Err(invalid("tree log probability is not finite"));
    }
    let mut parents = vec![0usize; n];
    for (idx, node) in tree.nodes.iter().enumerate() {
        match node {
            TreeNode::Leaf { posterior, counts, .. } => {
                if posterior.len() != tree.n_classes || counts.len() != tree.n_classes {
                    return Err(invalid(format!("leaf {idx} has the wrong number of classes")));
                }
            }
            TreeNode::Sprout { dim, threshold, lower, upper, .. } => {
                if *dim >= tree.n_features {
                    return Err(invalid(format!("node {idx} splits on missing feature {dim}")));
                }
                if !threshold.is_finite() {
                    return Err(invalid(format!("node {idx} has a non-finite threshold")));
                }
                for &child in [lower, upper] {
                    if child <= idx || child >= n {
                        return Err(invalid(format!("node {idx} has bad child index {child}")));
                    }
                    parents[child] += 1;
                }
            }
        }
    }
    if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
        return Err(invalid("nodes do not form a single tree"));
    }
    Ok(())
}

/// Parses and checks a structured model.
pub fn import_model(text: &str) -> Result<SavedModel, TreeError> {
    let model: SavedModel = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
    if model.format != FORMAT_TAG {
        return Err(invalid(format!("unexpected format tag `{}`", model.format)));
    }
    if model.version != FORMAT_VERSION {
        return Err(invalid(format!("unsupported version {}", model.version)));
    }
    if let ModelBody::Ensemble(e) = &model.model {
        if e.trees.is_empty() || e.trees.len() != e.weights.len() {
            return Err(invalid("ensemble trees and weights differ in length"));
        }
        let total: f64 = e.weights.iter().sum();
        if e.weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("ensemble weights are not a distribution"));
        }
        let first = &e.trees[0];
        if e.trees.iter().any(|t| {
            t.n_features != first.n_features
                || t.n_classes != first.n_classes
                || t.schema_hash != first.schema_hash
        }) {
            return Err(invalid("ensemble members disagree on shape"));
        }
    }
    for tree in model.trees() {
        validate_tree(tree)?;
    }
    Ok(model)
}
