use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::DataError;

/// Role of a CSV column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Numeric,
    Categorical,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub role: Role,
    /// Category order for a categorical column; one indicator per entry.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

/// Declarative description of a CSV file.
///
/// The on-disk form is TOML:
///
/// ```toml
/// header = true
/// classes = ["survived", "died"]   # optional; omitted => integer labels 0..C-1
///
/// [[column]]
/// name = "age"
/// role = "numeric"
///
/// [[column]]
/// name = "chest_pain"
/// role = "categorical"
/// categories = ["1", "2", "3", "4"]
///
/// [[column]]
/// name = "status"
/// role = "target"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaSpec {
    #[serde(default = "default_header")]
    pub header: bool,
    /// Target labels in class-index order. Empty means the target column
    /// already holds integers `0..C-1` and `n_classes` (or the data) fixes C.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub classes: Vec<String>,
    /// Class count for integer targets; ignored when `classes` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_classes: Option<usize>,
    #[serde(rename = "column")]
    pub columns: Vec<ColumnSpec>,
}

fn default_header() -> bool {
    true
}

/// One encoded feature dimension and the source column it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    /// First encoded dimension of this column.
    pub start: usize,
    /// Number of encoded dimensions (1 for numeric, #categories for categorical).
    pub width: usize,
}

/// Names of the encoded dimensions and how they group back into source columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub names: Vec<String>,
    pub groups: Vec<FeatureGroup>,
}

impl FeatureLayout {
    /// `x1 … xd`, one group per dimension.
    pub fn numeric(d: usize) -> Self {
        let names: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
        let groups = names
            .iter()
            .enumerate()
            .map(|(i, name)| FeatureGroup { name: name.clone(), start: i, width: 1 })
            .collect();
        Self { names, groups }
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    /// Index of the group that owns encoded dimension `dim`.
    pub fn group_of(&self, dim: usize) -> Option<usize> {
        self.groups.iter().position(|g| dim >= g.start && dim < g.start + g.width)
    }

    /// Hex SHA-256 over the encoded feature names and class labels.
    pub fn hash(&self, class_labels: &[String]) -> String {
        let mut hasher = Sha256::new();
        for name in &self.names {
            hasher.update(b"f:");
            hasher.update(name.as_bytes());
            hasher.update(b"\n");
        }
        for label in class_labels {
            hasher.update(b"c:");
            hasher.update(label.as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }
}

impl SchemaSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, DataError> {
        let schema: SchemaSpec = toml::from_str(text).map_err(|e| DataError::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        let targets = self.columns.iter().filter(|c| c.role == Role::Target).count();
        if targets != 1 {
            return Err(DataError::Schema(format!("expected exactly one target column, found {targets}")));
        }
        let mut names = HashSet::new();
        for col in &self.columns {
            if !names.insert(col.name.as_str()) {
                return Err(DataError::Schema(format!("duplicate column name '{}'", col.name)));
            }
            match col.role {
                Role::Categorical => {
                    if col.categories.is_empty() {
                        return Err(DataError::Schema(format!(
                            "categorical column '{}' has no categories",
                            col.name
                        )));
                    }
                    let mut seen = HashSet::new();
                    for cat in &col.categories {
                        if !seen.insert(cat.as_str()) {
                            return Err(DataError::Schema(format!(
                                "categorical column '{}' lists '{}' twice",
                                col.name, cat
                            )));
                        }
                    }
                }
                _ if !col.categories.is_empty() => {
                    return Err(DataError::Schema(format!(
                        "column '{}' lists categories but is not categorical",
                        col.name
                    )));
                }
                _ => {}
            }
        }
        let mut seen = HashSet::new();
        for label in &self.classes {
            if !seen.insert(label.as_str()) {
                return Err(DataError::Schema(format!("class label '{label}' listed twice")));
            }
        }
        if !self.classes.is_empty() && self.classes.len() < 2 {
            return Err(DataError::Schema("at least two class labels are required".into()));
        }
        Ok(())
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == Role::Target)
            .expect("validated schema has a target column")
    }

    /// `#numeric + Σ #categories`.
    pub fn encoded_width(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match c.role {
                Role::Numeric => 1,
                Role::Categorical => c.categories.len(),
                Role::Target => 0,
            })
            .sum()
    }

    pub fn layout(&self) -> FeatureLayout {
        let mut names = Vec::new();
        let mut groups = Vec::new();
        for col in &self.columns {
            match col.role {
                Role::Numeric => {
                    groups.push(FeatureGroup { name: col.name.clone(), start: names.len(), width: 1 });
                    names.push(col.name.clone());
                }
                Role::Categorical => {
                    groups.push(FeatureGroup {
                        name: col.name.clone(),
                        start: names.len(),
                        width: col.categories.len(),
                    });
                    names.extend(col.categories.iter().map(|cat| format!("{}={}", col.name, cat)));
                }
                Role::Target => {}
            }
        }
        FeatureLayout { names, groups }
    }

    /// Labels in class-index order once the class count is known.
    pub fn class_labels(&self, n_classes: usize) -> Vec<String> {
        if self.classes.is_empty() {
            (0..n_classes).map(|c| c.to_string()).collect()
        } else {
            self.classes.clone()
        }
    }

    pub fn hash(&self, n_classes: usize) -> String {
        self.layout().hash(&self.class_labels(n_classes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FOOTNOTE: &str = r#"
header = false
[[column]]
name = "size"
role = "numeric"
[[column]]
name = "kind"
role = "categorical"
categories = ["car", "house", "dream"]
[[column]]
name = "y"
role = "target"
"#;

    #[test]
    fn encoded_width_counts_one_column_per_category() {
        let schema = SchemaSpec::from_toml_str(FOOTNOTE).unwrap();
        assert_eq!(schema.encoded_width(), 4);
        let layout = schema.layout();
        assert_eq!(layout.names, ["size", "kind=car", "kind=house", "kind=dream"]);
        assert_eq!(layout.group_of(0), Some(0));
        assert_eq!(layout.group_of(3), Some(1));
        assert_eq!(layout.group_of(4), None);
    }

    #[test]
    fn rejects_two_targets() {
        let text = r#"
[[column]]
name = "a"
role = "target"
[[column]]
name = "b"
role = "target"
"#;
        assert!(matches!(SchemaSpec::from_toml_str(text), Err(DataError::Schema(_))));
    }

    #[test]
    fn rejects_duplicate_categories() {
        let text = r#"
[[column]]
name = "a"
role = "categorical"
categories = ["x", "x"]
[[column]]
name = "y"
role = "target"
"#;
        assert!(matches!(SchemaSpec::from_toml_str(text), Err(DataError::Schema(_))));
    }

    #[test]
    fn hash_depends_on_layout() {
        let a = SchemaSpec::from_toml_str(FOOTNOTE).unwrap();
        let mut b = a.clone();
        b.columns[1].categories.swap(0, 1);
        assert_ne!(a.hash(2), b.hash(2));
        assert_eq!(a.hash(2), a.clone().hash(2));
    }
}
