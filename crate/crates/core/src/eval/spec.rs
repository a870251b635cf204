use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::partition::{DirichletParams, PriorConfig, PriorKind};
use crate::tree::GmtConfig;

/// Model settings; every field may be overridden per dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Root Dirichlet pseudo-counts, one per class. Absent means 10 each.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_true")]
    pub depth_dependent: bool,
    #[serde(default)]
    pub partition_prior: PriorKind,
    #[serde(default)]
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    /// Ensemble size; 1 is the plain greedy-modal tree.
    #[serde(default = "default_trees")]
    pub trees: usize,
}

fn default_g() -> f64 {
    0.99
}

fn default_true() -> bool {
    true
}

fn default_trees() -> usize {
    1
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            alpha: None,
            g: 0.99,
            depth_dependent: true,
            partition_prior: PriorKind::Geometric,
            delta: 0.0,
            max_depth: None,
            trees: 1,
        }
    }
}

impl ModelSpec {
    pub fn to_config(&self, n_classes: usize) -> Result<GmtConfig, EvalError> {
        let prior = match &self.alpha {
            Some(alpha) => DirichletParams::new(alpha.clone()),
            None => DirichletParams::symmetric(n_classes, 10.0),
        }
        .map_err(|e| EvalError::Spec(e.to_string()))?;
        let mut prior_cfg =
            PriorConfig::new(self.g, self.depth_dependent).map_err(|e| EvalError::Spec(e.to_string()))?;
        prior_cfg.kind = self.partition_prior;
        let cfg = GmtConfig { prior, prior_cfg, delta: self.delta, max_depth: self.max_depth };
        cfg.validate(n_classes).map_err(|e| EvalError::Spec(e.to_string()))?;
        Ok(cfg)
    }
}

/// Field-wise override of a [`ModelSpec`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_dependent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_prior: Option<PriorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trees: Option<usize>,
}

impl ModelOverride {
    pub fn apply(&self, base: &ModelSpec) -> ModelSpec {
        ModelSpec {
            alpha: self.alpha.clone().or_else(|| base.alpha.clone()),
            g: self.g.unwrap_or(base.g),
            depth_dependent: self.depth_dependent.unwrap_or(base.depth_dependent),
            partition_prior: self.partition_prior.unwrap_or(base.partition_prior),
            delta: self.delta.unwrap_or(base.delta),
            max_depth: self.max_depth.or(base.max_depth),
            trees: self.trees.unwrap_or(base.trees),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Protocol {
    /// Shuffled k-fold cross-validation, once per seed.
    Kfold {
        k: usize,
        #[serde(default = "default_seeds")]
        seeds: Vec<u64>,
    },
    /// Fixed split: train on `data`, test on `test`.
    TrainTest { test: PathBuf },
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub data: PathBuf,
    pub schema: PathBuf,
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "is_default_override")]
    pub model: ModelOverride,
    /// Reference accuracy (fraction) printed next to the measured one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
    /// User-supplied baseline accuracies (fractions), printed as-is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rf: Option<f64>,
}

fn is_default_override(m: &ModelOverride) -> bool {
    *m == ModelOverride::default()
}

/// Declarative benchmark description, TOML on disk:
///
/// ```toml
/// [model]
/// g = 0.99
///
/// [[dataset]]
/// name = "haberman"
/// data = "haberman/haberman.csv"
/// schema = "haberman/schema.toml"
/// protocol = { kind = "kfold", k = 10, seeds = [0, 1, 2, 3, 4] }
/// reference = 0.719
/// ```
///
/// Relative paths resolve against the spec file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetSpec>,
}

impl BenchmarkSpec {
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self, EvalError> {
        let mut spec: Self = toml::from_str(text).map_err(|e| EvalError::Spec(e.to_string()))?;
        for ds in &mut spec.datasets {
            ds.data = base.join(&ds.data);
            ds.schema = base.join(&ds.schema);
            if let Protocol::TrainTest { test } = &mut ds.protocol {
                *test = base.join(&*test);
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| EvalError::Spec(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        for ds in &self.datasets {
            if let Protocol::Kfold { k, seeds } = &ds.protocol {
                if *k < 2 {
                    return Err(EvalError::Spec(format!("{}: k must be at least 2", ds.name)));
                }
                if seeds.is_empty() {
                    return Err(EvalError::Spec(format!("{}: no seeds given", ds.name)));
                }
            }
            if ds.model.apply(&self.model).trees == 0 {
                return Err(EvalError::Spec(format!("{}: trees must be at least 1", ds.name)));
            }
        }
        Ok(())
    }

    /// Effective model settings for `ds`.
    pub fn model_for(&self, ds: &DatasetSpec) -> ModelSpec {
        ds.model.apply(&self.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: &str = r#"
[model]
g = 0.95

[[dataset]]
name = "ripley"
data = "ripley/synth_tr.csv"
schema = "ripley/schema.toml"
protocol = { kind = "train-test", test = "ripley/synth_te.csv" }
reference = 0.876

[[dataset]]
name = "haberman"
data = "haberman/haberman.csv"
schema = "haberman/schema.toml"
protocol = { kind = "kfold", k = 10, seeds = [0, 1] }
model = { delta = 0.1, trees = 3 }
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let spec = BenchmarkSpec::from_toml_str(SPEC, Path::new("/data")).unwrap();
        assert_eq!(spec.datasets.len(), 2);
        assert_eq!(spec.datasets[0].data, PathBuf::from("/data/ripley/synth_tr.csv"));
        assert_eq!(
            spec.datasets[0].protocol,
            Protocol::TrainTest { test: PathBuf::from("/data/ripley/synth_te.csv") }
        );
        let m = spec.model_for(&spec.datasets[1]);
        assert_eq!(m.g, 0.95);
        assert_eq!(m.delta, 0.1);
        assert_eq!(m.trees, 3);
        assert!(m.depth_dependent);
    }

    #[test]
    fn defaults_match_the_reference_setup() {
        let cfg = ModelSpec::default().to_config(2).unwrap();
        assert_eq!(cfg, GmtConfig::for_classes(2));
    }

    #[test]
    fn empty_spec_is_valid() {
        let spec = BenchmarkSpec::from_toml_str("", Path::new(".")).unwrap();
        assert!(spec.datasets.is_empty());
    }

    #[test]
    fn bad_specs_are_rejected() {
        let bad = SPEC.replace("k = 10", "k = 1");
        assert!(BenchmarkSpec::from_toml_str(&bad, Path::new(".")).is_err());
        let bad = SPEC.replace("reference", "referense");
        assert!(BenchmarkSpec::from_toml_str(&bad, Path::new(".")).is_err());
        let bad = ModelSpec { alpha: Some(vec![1.0, 1.0, 1.0]), ..ModelSpec::default() };
        assert!(bad.to_config(2).is_err());
    }
}
