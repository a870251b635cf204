use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::schema::{FeatureLayout, Role, SchemaSpec};
use super::DataError;

/// Immutable training data: column-major features, class outcomes and, for
/// every dimension, the row indices ordered by that feature ascending (ties
/// by row index).
#[derive(Debug, Clone)]
pub struct DataSet {
    columns: Vec<Vec<f64>>,
    outcomes: Vec<u32>,
    n_classes: usize,
    sorted: Vec<Vec<u32>>,
    layout: FeatureLayout,
    class_labels: Vec<String>,
}

impl DataSet {
    /// Builds a dataset from row-major features with default names `x1…xd`.
    pub fn from_rows(rows: &[Vec<f64>], outcomes: &[usize], n_classes: usize) -> Result<Self, DataError> {
        let d = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(DataError::Invalid(format!("row {i} has {} features, expected {d}", row.len())));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        let outcomes = outcomes.iter().map(|&y| y as u32).collect();
        Self::from_columns(columns, outcomes, n_classes, FeatureLayout::numeric(d), None)
    }

    /// Builds a dataset from feature columns. `class_labels` defaults to
    /// `"0"…"C-1"`.
    pub fn from_columns(
        columns: Vec<Vec<f64>>,
        outcomes: Vec<u32>,
        n_classes: usize,
        layout: FeatureLayout,
        class_labels: Option<Vec<String>>,
    ) -> Result<Self, DataError> {
        let n = outcomes.len();
        if n == 0 {
            return Err(DataError::Empty);
        }
        if n_classes < 2 {
            return Err(DataError::Invalid(format!("need at least 2 classes, got {n_classes}")));
        }
        if layout.width() != columns.len() {
            return Err(DataError::Invalid(format!(
                "layout names {} dimensions but {} columns were given",
                layout.width(),
                columns.len()
            )));
        }
        if let Some(bad) = outcomes.iter().find(|&&y| y as usize >= n_classes) {
            return Err(DataError::Invalid(format!("outcome {bad} outside 0..{n_classes}")));
        }
        let mut columns = columns;
        for (r, col) in columns.iter_mut().enumerate() {
            if col.len() != n {
                return Err(DataError::Invalid(format!("column {r} has {} values, expected {n}", col.len())));
            }
            for (i, v) in col.iter_mut().enumerate() {
                if !v.is_finite() {
                    return Err(DataError::Invalid(format!("non-finite value at row {i}, dimension {r}")));
                }
                // -0.0 and 0.0 must sort as equal values.
                *v += 0.0;
            }
        }
        let class_labels = class_labels.unwrap_or_else(|| (0..n_classes).map(|c| c.to_string()).collect());
        if class_labels.len() != n_classes {
            return Err(DataError::Invalid(format!(
                "{} class labels for {n_classes} classes",
                class_labels.len()
            )));
        }
        let sorted = columns.iter().map(|col| sort_indices(col)).collect();
        Ok(Self { columns, outcomes, n_classes, sorted, layout, class_labels })
    }

    pub fn n(&self) -> usize {
        self.outcomes.len()
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn value(&self, row: usize, dim: usize) -> f64 {
        self.columns[dim][row]
    }

    pub fn column(&self, dim: usize) -> &[f64] {
        &self.columns[dim]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn outcome(&self, row: usize) -> usize {
        self.outcomes[row] as usize
    }

    pub fn outcomes(&self) -> &[u32] {
        &self.outcomes
    }

    /// Row indices ordered by dimension `dim`.
    pub fn sorted_indices(&self, dim: usize) -> &[u32] {
        &self.sorted[dim]
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    /// Hash of feature layout and class labels; stored in model files.
    pub fn schema_hash(&self) -> String {
        self.layout.hash(&self.class_labels)
    }

    /// View over every row.
    pub fn full_view(&self) -> SubsetView<'_> {
        let values = self
            .sorted
            .iter()
            .zip(&self.columns)
            .map(|(order, col)| order.iter().map(|&r| col[r as usize]).collect())
            .collect();
        let labels = self
            .sorted
            .iter()
            .map(|order| order.iter().map(|&r| self.outcomes[r as usize]).collect())
            .collect();
        SubsetView {
            data: self,
            rows: (0..self.n() as u32).collect(),
            sorted: self.sorted.clone(),
            values,
            labels,
        }
    }

    /// New dataset holding `rows` (deduplicated, in ascending order). Sorted
    /// indices are derived by filtering this dataset's arrays, not re-sorting.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self, DataError> {
        let mut rows = rows.to_vec();
        rows.sort_unstable();
        rows.dedup();
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n()) {
            return Err(DataError::Invalid(format!("row {bad} out of range")));
        }
        const ABSENT: u32 = u32::MAX;
        let mut remap = vec![ABSENT; self.n()];
        for (new, &old) in rows.iter().enumerate() {
            remap[old] = new as u32;
        }
        let columns = self.columns.iter().map(|col| rows.iter().map(|&r| col[r]).collect()).collect();
        let outcomes = rows.iter().map(|&r| self.outcomes[r]).collect();
        let sorted = self
            .sorted
            .iter()
            .map(|order| {
                order
                    .iter()
                    .filter_map(|&old| match remap[old as usize] {
                        ABSENT => None,
                        new => Some(new),
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            columns,
            outcomes,
            n_classes: self.n_classes,
            sorted,
            layout: self.layout.clone(),
            class_labels: self.class_labels.clone(),
        })
    }
}

fn sort_indices(col: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..col.len() as u32).collect();
    // stable: equal values keep row order
    order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
    order
}

/// A subset of a dataset's rows with per-dimension sorted arrays restricted
/// to the members by stable filtering. Each sorted order is stored with its
/// values and class codes alongside, so scans read memory sequentially.
#[derive(Debug, Clone)]
pub struct SubsetView<'a> {
    data: &'a DataSet,
    rows: Vec<u32>,
    sorted: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
    labels: Vec<Vec<u32>>,
}

impl<'a> SubsetView<'a> {
    pub fn data(&self) -> &'a DataSet {
        self.data
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Member rows in ascending order.
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Member rows ordered by dimension `dim`.
    pub fn sorted_indices(&self, dim: usize) -> &[u32] {
        &self.sorted[dim]
    }

    /// Values of dimension `dim` in the order of `sorted_indices(dim)`.
    pub fn sorted_values(&self, dim: usize) -> &[f64] {
        &self.values[dim]
    }

    /// Class codes in the order of `sorted_indices(dim)`.
    pub fn sorted_outcomes(&self, dim: usize) -> &[u32] {
        &self.labels[dim]
    }

    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.data.n_classes()];
        for &r in &self.rows {
            counts[self.data.outcomes[r as usize] as usize] += 1;
        }
        counts
    }

    /// Keeps the entries whose row is set in `member`, in every ordering.
    fn filter(&self, member: &RowSet) -> SubsetView<'a> {
        let rows: Vec<u32> = self.rows.iter().copied().filter(|&r| member.contains(r)).collect();
        let d = self.sorted.len();
        let mut sorted = Vec::with_capacity(d);
        let mut values = Vec::with_capacity(d);
        let mut labels = Vec::with_capacity(d);
        for dim in 0..d {
            let mut o = Vec::with_capacity(rows.len());
            let mut v = Vec::with_capacity(rows.len());
            let mut l = Vec::with_capacity(rows.len());
            for ((&r, &x), &y) in self.sorted[dim].iter().zip(&self.values[dim]).zip(&self.labels[dim]) {
                if member.contains(r) {
                    o.push(r);
                    v.push(x);
                    l.push(y);
                }
            }
            sorted.push(o);
            values.push(v);
            labels.push(l);
        }
        SubsetView { data: self.data, rows, sorted, values, labels }
    }

    /// Rows of this view satisfying `keep`, preserving every ordering.
    pub fn make_subset(&self, mut keep: impl FnMut(usize) -> bool) -> SubsetView<'a> {
        let mut member = RowSet::new(self.data.n());
        for &r in &self.rows {
            if keep(r as usize) {
                member.insert(r);
            }
        }
        self.filter(&member)
    }

    /// Splits into `(x[dim] ≤ threshold, x[dim] > threshold)`.
    pub fn split(&self, dim: usize, threshold: f64) -> (SubsetView<'a>, SubsetView<'a>) {
        let cut = self.values[dim].partition_point(|&v| v <= threshold);
        let mut lower = RowSet::new(self.data.n());
        let mut upper = RowSet::new(self.data.n());
        for &r in &self.sorted[dim][..cut] {
            lower.insert(r);
        }
        for &r in &self.sorted[dim][cut..] {
            upper.insert(r);
        }
        (self.filter(&lower), self.filter(&upper))
    }
}

/// Bit set over a dataset's row indices.
struct RowSet(Vec<u64>);

impl RowSet {
    fn new(n: usize) -> Self {
        RowSet(vec![0; n.div_ceil(64)])
    }

    fn insert(&mut self, r: u32) {
        self.0[r as usize / 64] |= 1 << (r % 64);
    }

    fn contains(&self, r: u32) -> bool {
        self.0[r as usize / 64] >> (r % 64) & 1 == 1
    }
}

/// Reads a CSV file under `schema`.
pub fn load_csv(path: impl AsRef<Path>, schema: &SchemaSpec) -> Result<DataSet, DataError> {
    let path = path.as_ref();
    let file =
        File::open(path).map_err(|source| DataError::Io { path: path.display().to_string(), source })?;
    parse_csv(file, schema)
}

fn csv_reader<R: Read>(reader: R, schema: &SchemaSpec) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader)
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, schema: &SchemaSpec) -> Result<(), DataError> {
    if !schema.header {
        return Ok(());
    }
    let header = rdr.headers().map_err(|e| DataError::Parse {
        row: 1,
        column: String::new(),
        message: e.to_string(),
    })?;
    let names: Vec<&str> = schema.columns.iter().map(|c| c.name.as_str()).collect();
    let without_target: Vec<&str> =
        schema.columns.iter().filter(|c| c.role != Role::Target).map(|c| c.name.as_str()).collect();
    let found: Vec<&str> = header.iter().collect();
    if found != names && found != without_target {
        return Err(DataError::Schema(format!("header {found:?} does not match schema columns {names:?}")));
    }
    Ok(())
}

/// Parses CSV text under `schema`; see [`load_csv`].
pub fn parse_csv<R: Read>(reader: R, schema: &SchemaSpec) -> Result<DataSet, DataError> {
    schema.validate()?;
    let mut rdr = csv_reader(reader, schema);
    check_header(&mut rdr, schema)?;
    let target_idx = schema.target_index();
    let width = schema.encoded_width();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut outcomes = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| DataError::Parse {
            row: e.position().map_or(0, |p| p.line() as usize),
            column: String::new(),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != schema.columns.len() {
            return Err(DataError::Parse {
                row: line,
                column: String::new(),
                message: format!("expected {} fields, found {}", schema.columns.len(), record.len()),
            });
        }
        let features = encode_fields(schema, &record, Some(target_idx), line)?;
        for (col, v) in columns.iter_mut().zip(features) {
            col.push(v);
        }
        outcomes.push(parse_target(schema, &record[target_idx], line, &schema.columns[target_idx].name)?);
    }
    if outcomes.is_empty() {
        return Err(DataError::Empty);
    }
    let n_classes = if schema.classes.is_empty() {
        let observed = outcomes.iter().max().map_or(0, |&m| m as usize + 1);
        let n_classes = schema.n_classes.unwrap_or(observed.max(2));
        if observed > n_classes {
            return Err(DataError::Invalid(format!("target value {} outside 0..{n_classes}", observed - 1)));
        }
        n_classes
    } else {
        schema.classes.len()
    };
    DataSet::from_columns(columns, outcomes, n_classes, schema.layout(), Some(schema.class_labels(n_classes)))
}

fn parse_target(schema: &SchemaSpec, field: &str, line: usize, column: &str) -> Result<u32, DataError> {
    if schema.classes.is_empty() {
        field.parse::<u32>().map_err(|_| DataError::Parse {
            row: line,
            column: column.to_string(),
            message: format!("expected an integer class label, found '{field}'"),
        })
    } else {
        schema.classes.iter().position(|c| c == field).map(|c| c as u32).ok_or_else(|| DataError::Parse {
            row: line,
            column: column.to_string(),
            message: format!("unknown class label '{field}'"),
        })
    }
}

/// Encodes every non-target field of `record`. `skip` is the index of the
/// target field inside `record`, if present.
fn encode_fields(
    schema: &SchemaSpec,
    record: &csv::StringRecord,
    target_in_record: Option<usize>,
    line: usize,
) -> Result<Vec<f64>, DataError> {
    let mut out = Vec::with_capacity(schema.encoded_width());
    let mut field_idx = 0;
    for (col_idx, col) in schema.columns.iter().enumerate() {
        if col.role == Role::Target {
            if target_in_record == Some(col_idx) {
                field_idx += 1;
            }
            continue;
        }
        let field = &record[field_idx];
        field_idx += 1;
        match col.role {
            Role::Numeric => {
                if field.is_empty() {
                    return Err(DataError::Parse {
                        row: line,
                        column: col.name.clone(),
                        message: "missing value".into(),
                    });
                }
                let v: f64 = field.parse().map_err(|_| DataError::Parse {
                    row: line,
                    column: col.name.clone(),
                    message: format!("not a number: '{field}'"),
                })?;
                if !v.is_finite() {
                    return Err(DataError::Parse {
                        row: line,
                        column: col.name.clone(),
                        message: format!("non-finite value '{field}'"),
                    });
                }
                out.push(v);
            }
            Role::Categorical => {
                let hit = col.categories.iter().position(|c| c == field).ok_or_else(|| {
                    DataError::UnknownCategory {
                        row: line,
                        column: col.name.clone(),
                        value: field.to_string(),
                    }
                })?;
                out.extend((0..col.categories.len()).map(|i| if i == hit { 1.0 } else { 0.0 }));
            }
            Role::Target => unreachable!(),
        }
    }
    Ok(out)
}

/// One encoded input row for prediction; errors are kept per row.
#[derive(Debug)]
pub struct FeatureRow {
    /// Line number in the source file.
    pub line: usize,
    pub features: Result<Vec<f64>, DataError>,
    /// Class index when the row carried a target value.
    pub target: Option<Result<usize, DataError>>,
}

/// Reads rows for prediction. The target column may be present (all schema
/// columns) or omitted (one field fewer); malformed rows become per-row errors.
pub fn read_feature_rows<R: Read>(reader: R, schema: &SchemaSpec) -> Result<Vec<FeatureRow>, DataError> {
    schema.validate()?;
    let mut rdr = csv_reader(reader, schema);
    check_header(&mut rdr, schema)?;
    let target_idx = schema.target_index();
    let full = schema.columns.len();
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(i + 1, |p| p.line() as usize);
                out.push(FeatureRow {
                    line,
                    features: Err(DataError::Parse {
                        row: line,
                        column: String::new(),
                        message: e.to_string(),
                    }),
                    target: None,
                });
                continue;
            }
        };
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        let (features, target) = if record.len() == full {
            let target_name = &schema.columns[target_idx].name;
            (
                encode_fields(schema, &record, Some(target_idx), line),
                Some(parse_target(schema, &record[target_idx], line, target_name).map(|t| t as usize)),
            )
        } else if record.len() + 1 == full {
            (encode_fields(schema, &record, None, line), None)
        } else {
            (
                Err(DataError::Parse {
                    row: line,
                    column: String::new(),
                    message: format!("expected {} or {} fields, found {}", full - 1, full, record.len()),
                }),
                None,
            )
        };
        out.push(FeatureRow { line, features, target });
    }
    Ok(out)
}
