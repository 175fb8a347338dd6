//! Column-typed sample tables.
//!
//! A [`Dataset`] keeps the categorical cells as dictionary codes in a
//! row-major `n × s_c` matrix, the numerical cells as a row-major `n × s_u`
//! matrix of reals, and optional ground-truth labels. Columns whose
//! dictionary has a single entry cannot separate samples and are moved into
//! a metadata list instead of the code matrix.

use std::collections::HashMap;
use std::fs;
use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell values treated as missing, after trimming whitespace.
pub const MISSING_TOKENS: [&str; 2] = ["", "?"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Nominal,
    Ordinal,
    Numerical,
    Label,
    Ignore,
}

impl AttributeKind {
    pub fn is_categorical(self) -> bool {
        matches!(self, AttributeKind::Nominal | AttributeKind::Ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
    /// Semantic order of an ordinal column, lowest first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
}

impl AttributeSchema {
    pub fn new(name: impl Into<String>, kind: AttributeKind) -> Self {
        Self {
            name: name.into(),
            kind,
            order: None,
        }
    }

    pub fn ordinal<S: Into<String>>(
        name: impl Into<String>,
        order: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Ordinal,
            order: Some(order.into_iter().map(Into::into).collect()),
        }
    }
}

/// Per-column typing of a CSV file, stored as TOML:
///
/// ```toml
/// [[column]]
/// name = "hobby"
/// kind = "nominal"
///
/// [[column]]
/// name = "age"
/// kind = "ordinal"
/// order = ["1", "2", "3", "4"]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    #[serde(rename = "column")]
    pub columns: Vec<AttributeSchema>,
}

impl Schema {
    pub fn new(columns: Vec<AttributeSchema>) -> Result<Self> {
        let schema = Self { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Schema =
            toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| Error::SchemaParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let labels = self
            .columns
            .iter()
            .filter(|c| c.kind == AttributeKind::Label)
            .count();
        if labels > 1 {
            return Err(Error::Schema(format!(
                "{labels} label columns declared, at most one allowed"
            )));
        }
        for column in &self.columns {
            match (&column.kind, &column.order) {
                (AttributeKind::Ordinal, None) => {
                    return Err(Error::Schema(format!(
                        "ordinal column `{}` needs an `order` list",
                        column.name
                    )))
                }
                (AttributeKind::Ordinal, Some(order)) => {
                    let mut seen = HashMap::new();
                    for value in order {
                        if seen.insert(value.as_str(), ()).is_some() {
                            return Err(Error::Schema(format!(
                                "ordinal column `{}` lists `{value}` twice",
                                column.name
                            )));
                        }
                    }
                }
                (_, Some(_)) => {
                    return Err(Error::Schema(format!(
                        "column `{}` has an `order` but is not ordinal",
                        column.name
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    #[default]
    DropRow,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalAttribute {
    pub name: String,
    /// `Nominal` or `Ordinal`.
    pub kind: AttributeKind,
    /// Distinct literals in first-appearance order; codes index into this.
    pub values: Vec<String>,
    /// 1-based semantic rank of each dictionary entry (ordinal columns only).
    pub semantic_ranks: Option<Vec<u32>>,
}

impl CategoricalAttribute {
    pub fn nominal(name: impl Into<String>, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Nominal,
            values,
            semantic_ranks: None,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.values.len()
    }

    pub fn is_ordinal(&self) -> bool {
        self.kind == AttributeKind::Ordinal
    }
}

/// A categorical column that only ever holds one value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegenerateAttribute {
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    pub names: Vec<String>,
    pub codes: Vec<usize>,
}

impl Labels {
    pub fn from_codes(codes: Vec<usize>) -> Self {
        let k = codes.iter().map(|&c| c + 1).max().unwrap_or(0);
        Self {
            names: (0..k).map(|c| c.to_string()).collect(),
            codes,
        }
    }

    /// Number of distinct classes.
    pub fn num_classes(&self) -> usize {
        self.names.len()
    }
}

/// Mean, max and min dictionary size over the active categorical attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub mean_cardinality: f64,
    pub max_cardinality: usize,
    pub min_cardinality: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    attributes: Vec<CategoricalAttribute>,
    codes: Vec<u32>,
    degenerate: Vec<DegenerateAttribute>,
    numerical_names: Vec<String>,
    numerical: Vec<f64>,
    labels: Option<Labels>,
}

impl Dataset {
    /// Builds a dataset from a row-major code matrix. Attributes with a
    /// single dictionary entry are split off as degenerate.
    pub fn new(n: usize, attributes: Vec<CategoricalAttribute>, codes: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let s = attributes.len();
        if codes.len() != n * s {
            return Err(Error::LengthMismatch {
                left: codes.len(),
                right: n * s,
            });
        }
        for (r, attr) in attributes.iter().enumerate() {
            if attr.values.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "attribute `{}` has an empty dictionary",
                    attr.name
                )));
            }
            if let Some(ranks) = &attr.semantic_ranks {
                check_permutation(ranks)?;
                if ranks.len() != attr.cardinality() {
                    return Err(Error::LengthMismatch {
                        left: ranks.len(),
                        right: attr.cardinality(),
                    });
                }
            }
            let l = attr.cardinality() as u32;
            if let Some(i) = (0..n).find(|&i| codes[i * s + r] >= l) {
                return Err(Error::InvalidArgument(format!(
                    "row {i}: code {} out of range for attribute `{}` (l = {l})",
                    codes[i * s + r],
                    attr.name
                )));
            }
        }

        let keep: Vec<usize> = (0..s)
            .filter(|&r| attributes[r].cardinality() >= 2)
            .collect();
        let degenerate = attributes
            .iter()
            .filter(|a| a.cardinality() < 2)
            .map(|a| DegenerateAttribute {
                name: a.name.clone(),
                value: a.values[0].clone(),
            })
            .collect();
        let active_codes = if keep.len() == s {
            codes
        } else {
            let mut out = Vec::with_capacity(n * keep.len());
            for i in 0..n {
                out.extend(keep.iter().map(|&r| codes[i * s + r]));
            }
            out
        };
        let attributes = attributes
            .into_iter()
            .filter(|a| a.cardinality() >= 2)
            .collect();

        Ok(Self {
            n,
            attributes,
            codes: active_codes,
            degenerate,
            numerical_names: Vec::new(),
            numerical: Vec::new(),
            labels: None,
        })
    }

    /// Nominal dataset from rows of codes, with dictionary `l_r` taken from
    /// `cardinalities` and literals `"0"`, `"1"`, ...
    pub fn from_code_rows(cardinalities: &[usize], rows: &[Vec<u32>]) -> Result<Self> {
        let attributes = cardinalities
            .iter()
            .enumerate()
            .map(|(r, &l)| {
                CategoricalAttribute::nominal(
                    format!("a{r}"),
                    (0..l).map(|g| g.to_string()).collect(),
                )
            })
            .collect();
        let mut codes = Vec::with_capacity(rows.len() * cardinalities.len());
        for row in rows {
            if row.len() != cardinalities.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: cardinalities.len(),
                });
            }
            codes.extend_from_slice(row);
        }
        Self::new(rows.len(), attributes, codes)
    }

    /// Nominal dataset from literal rows; dictionaries in first-appearance order.
    pub fn from_string_rows<S: AsRef<str>>(names: &[&str], rows: &[Vec<S>]) -> Result<Self> {
        let s = names.len();
        let mut encoders: Vec<Encoder> = (0..s).map(|_| Encoder::default()).collect();
        let mut codes = Vec::with_capacity(rows.len() * s);
        for row in rows {
            if row.len() != s {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: s,
                });
            }
            for (enc, cell) in encoders.iter_mut().zip(row) {
                codes.push(enc.encode(cell.as_ref()));
            }
        }
        let attributes = names
            .iter()
            .zip(encoders)
            .map(|(name, enc)| CategoricalAttribute::nominal(*name, enc.values))
            .collect();
        Self::new(rows.len(), attributes, codes)
    }

    pub fn with_numerical(mut self, names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.n * names.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: self.n * names.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let s = names.len();
            return Err(Error::UnparseableNumber {
                row: pos / s,
                column: names[pos % s].clone(),
                value: values[pos].to_string(),
            });
        }
        self.numerical_names = names;
        self.numerical = values;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if labels.codes.len() != self.n {
            return Err(Error::LengthMismatch {
                left: labels.codes.len(),
                right: self.n,
            });
        }
        if labels.codes.iter().any(|&c| c >= labels.names.len()) {
            return Err(Error::InvalidArgument("label code out of range".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn n_samples(&self) -> usize {
        self.n
    }

    /// Number of active categorical attributes, `s_c`.
    pub fn n_categorical(&self) -> usize {
        self.attributes.len()
    }

    pub fn n_numerical(&self) -> usize {
        self.numerical_names.len()
    }

    pub fn attributes(&self) -> &[CategoricalAttribute] {
        &self.attributes
    }

    pub fn attribute(&self, r: usize) -> &CategoricalAttribute {
        &self.attributes[r]
    }

    pub fn cardinality(&self, r: usize) -> usize {
        self.attributes[r].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.attributes.iter().map(|a| a.cardinality()).collect()
    }

    pub fn degenerate(&self) -> &[DegenerateAttribute] {
        &self.degenerate
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    /// Categorical codes of sample `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        let s = self.attributes.len();
        &self.codes[i * s..(i + 1) * s]
    }

    pub fn code(&self, i: usize, r: usize) -> u32 {
        self.codes[i * self.attributes.len() + r]
    }

    pub fn numerical_names(&self) -> &[String] {
        &self.numerical_names
    }

    pub fn numerical(&self) -> &[f64] {
        &self.numerical
    }

    pub fn numerical_row(&self, i: usize) -> &[f64] {
        let s = self.numerical_names.len();
        &self.numerical[i * s..(i + 1) * s]
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn has_ordinal(&self) -> bool {
        self.attributes.iter().any(|a| a.is_ordinal())
    }

    /// Literals of the categorical cells of sample `i`.
    pub fn decode_row(&self, i: usize) -> Vec<&str> {
        self.row(i)
            .iter()
            .zip(&self.attributes)
            .map(|(&c, a)| a.values[c as usize].as_str())
            .collect()
    }

    pub fn stats(&self) -> Option<DatasetStats> {
        let cards = self.cardinalities();
        let max = *cards.iter().max()?;
        let min = *cards.iter().min()?;
        let mean = cards.iter().sum::<usize>() as f64 / cards.len() as f64;
        Some(DatasetStats {
            mean_cardinality: mean,
            max_cardinality: max,
            min_cardinality: min,
        })
    }

    /// Min-max scales every numerical column to `[0, 1]`; constant columns
    /// become all zeros.
    pub fn normalize_numerical(&self) -> Dataset {
        let mut out = self.clone();
        let s = self.n_numerical();
        for c in 0..s {
            let column = (0..self.n).map(|i| self.numerical[i * s + c]);
            let (lo, hi) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            let span = hi - lo;
            for i in 0..self.n {
                let v = &mut out.numerical[i * s + c];
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
        out
    }
}

#[derive(Default)]
struct Encoder {
    index: HashMap<String, u32>,
    values: Vec<String>,
}

impl Encoder {
    fn encode(&mut self, literal: &str) -> u32 {
        if let Some(&code) = self.index.get(literal) {
            return code;
        }
        let code = self.values.len() as u32;
        self.index.insert(literal.to_string(), code);
        self.values.push(literal.to_string());
        code
    }
}

pub(crate) fn check_permutation(ranks: &[u32]) -> Result<()> {
    let l = ranks.len();
    let mut seen = vec![false; l];
    for &rank in ranks {
        let ok = rank >= 1 && (rank as usize) <= l && !seen[rank as usize - 1];
        if !ok {
            return Err(Error::NotAPermutation {
                len: l,
                values: ranks.to_vec(),
            });
        }
        seen[rank as usize - 1] = true;
    }
    Ok(())
}

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell)
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, policy: MissingPolicy) -> Result<Dataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, schema, policy)
}

/// Parses a headed CSV stream according to `schema`.
pub fn read_csv<R: Read>(reader: R, schema: &Schema, policy: MissingPolicy) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let width = rdr.headers()?.len();
    if width != schema.columns.len() {
        return Err(Error::ArityMismatch {
            schema: schema.columns.len(),
            csv: width,
        });
    }

    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    let mut dropped = 0usize;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = idx + 1;
        let missing = schema
            .columns
            .iter()
            .zip(record.iter())
            .find(|(col, cell)| col.kind != AttributeKind::Ignore && is_missing(cell));
        match (missing, policy) {
            (Some((col, _)), MissingPolicy::Error) => {
                return Err(Error::MissingCell {
                    row: row_no,
                    column: col.name.clone(),
                })
            }
            (Some(_), MissingPolicy::DropRow) => dropped += 1,
            (None, _) => rows.push((row_no, record)),
        }
    }
    if dropped > 0 {
        log::info!("dropped {dropped} rows with missing values");
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = rows.len();

    let mut attributes = Vec::new();
    let mut cat_columns = Vec::new();
    let mut num_columns = Vec::new();
    let mut label_column = None;
    for (c, col) in schema.columns.iter().enumerate() {
        match col.kind {
            AttributeKind::Nominal | AttributeKind::Ordinal => cat_columns.push(c),
            AttributeKind::Numerical => num_columns.push(c),
            AttributeKind::Label => label_column = Some(c),
            AttributeKind::Ignore => {}
        }
    }

    let s = cat_columns.len();
    let mut codes = vec![0u32; n * s];
    for (r, &c) in cat_columns.iter().enumerate() {
        let col = &schema.columns[c];
        let mut enc = Encoder::default();
        for (i, (row_no, record)) in rows.iter().enumerate() {
            let cell = &record[c];
            if let Some(order) = &col.order {
                if !order.iter().any(|v| v == cell) {
                    return Err(Error::UnknownOrdinalValue {
                        row: *row_no,
                        column: col.name.clone(),
                        value: cell.to_string(),
                    });
                }
            }
            codes[i * s + r] = enc.encode(cell);
        }
        let semantic_ranks = col.order.as_ref().map(|order| {
            // Rank among declared values that were actually observed.
            let mut observed: Vec<(usize, usize)> = enc
                .values
                .iter()
                .enumerate()
                .map(|(g, v)| (order.iter().position(|o| o == v).unwrap(), g))
                .collect();
            observed.sort_unstable();
            let mut ranks = vec![0u32; enc.values.len()];
            for (rank, &(_, g)) in observed.iter().enumerate() {
                ranks[g] = rank as u32 + 1;
            }
            ranks
        });
        attributes.push(CategoricalAttribute {
            name: col.name.clone(),
            kind: col.kind,
            values: enc.values,
            semantic_ranks,
        });
    }

    let mut dataset = Dataset::new(n, attributes, codes)?;
    for d in dataset.degenerate() {
        log::info!(
            "attribute `{}` has the single value `{}`; excluded from distances",
            d.name,
            d.value
        );
    }

    if !num_columns.is_empty() {
        let mut values = Vec::with_capacity(n * num_columns.len());
        for (row_no, record) in &rows {
            for &c in &num_columns {
                let cell = &record[c];
                let v: f64 = cell
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| Error::UnparseableNumber {
                        row: *row_no,
                        column: schema.columns[c].name.clone(),
                        value: cell.to_string(),
                    })?;
                values.push(v);
            }
        }
        let names = num_columns
            .iter()
            .map(|&c| schema.columns[c].name.clone())
            .collect();
        dataset = dataset.with_numerical(names, values)?;
    }

    if let Some(c) = label_column {
        let mut enc = Encoder::default();
        let codes = rows
            .iter()
            .map(|(_, record)| enc.encode(&record[c]) as usize)
            .collect();
        dataset = dataset.with_labels(Labels {
            names: enc.values,
            codes,
        })?;
    }
    Ok(dataset)
}

/// Uniform random categorical table with `values_per_attribute` possible
/// values per column. Labels are planted round-robin (`i mod k`) and carry no
/// structure.
pub fn synthesize(
    n: usize,
    s: usize,
    k: usize,
    values_per_attribute: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || s == 0 || k == 0 || values_per_attribute == 0 {
        return Err(Error::InvalidArgument(
            "synthesize needs all counts >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = values_per_attribute as u32;
    let codes = (0..n * s).map(|_| rng.random_range(0..l)).collect();
    let attributes = (0..s)
        .map(|r| {
            CategoricalAttribute::nominal(
                format!("a{r}"),
                (0..values_per_attribute).map(|g| format!("v{g}")).collect(),
            )
        })
        .collect();
    let labels = Labels::from_codes((0..n).map(|i| i % k).collect());
    Dataset::new(n, attributes, codes)?.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(cols: Vec<AttributeSchema>) -> Schema {
        Schema::new(cols).unwrap()
    }

    #[test]
    fn first_appearance_encoding() {
        let csv = "c\na\nb\na\n";
        let d = read_csv(
            csv.as_bytes(),
            &schema(vec![AttributeSchema::new("c", AttributeKind::Nominal)]),
            MissingPolicy::DropRow,
        )
        .unwrap();
        assert_eq!(d.attribute(0).values, vec!["a", "b"]);
        assert_eq!(d.codes(), &[0, 1, 0]);
        assert_eq!(d.cardinality(0), 2);
    }

    #[test]
    fn drop_row_policy_removes_incomplete_rows() {
        let csv = "x,y\na,1\n,2\nb,3\nc,?\n";
        let sch = schema(vec![
            AttributeSchema::new("x", AttributeKind::Nominal),
            AttributeSchema::new("y", AttributeKind::Numerical),
        ]);
        let d = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap();
        assert_eq!(d.n_samples(), 2);
        assert_eq!(d.decode_row(1), vec!["b"]);
        assert_eq!(d.numerical(), &[1.0, 3.0]);

        let err = read_csv(csv.as_bytes(), &sch, MissingPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::MissingCell { row: 2, .. }));
    }

    #[test]
    fn missing_cell_in_ignored_column_keeps_row() {
        let csv = "id,x\n,a\n2,b\n";
        let sch = schema(vec![
            AttributeSchema::new("id", AttributeKind::Ignore),
            AttributeSchema::new("x", AttributeKind::Nominal),
        ]);
        let d = read_csv(csv.as_bytes(), &sch, MissingPolicy::Error).unwrap();
        assert_eq!(d.n_samples(), 2);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let csv = "x,y\na,b\n";
        let sch = schema(vec![AttributeSchema::new("x", AttributeKind::Nominal)]);
        let err = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { schema: 1, csv: 2 }));
    }

    #[test]
    fn unparseable_number_is_reported() {
        let csv = "y\n1.5\nabc\n";
        let sch = schema(vec![AttributeSchema::new("y", AttributeKind::Numerical)]);
        let err = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap_err();
        assert!(matches!(err, Error::UnparseableNumber { row: 2, .. }));
        let csv = "y\ninf\n";
        assert!(read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).is_err());
    }

    #[test]
    fn ordinal_ranks_follow_declared_order() {
        let csv = "size\nlarge\nsmall\nmedium\nsmall\n";
        let sch = schema(vec![AttributeSchema::ordinal(
            "size",
            ["small", "medium", "large", "huge"],
        )]);
        let d = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap();
        assert_eq!(d.attribute(0).values, vec!["large", "small", "medium"]);
        assert_eq!(d.attribute(0).semantic_ranks, Some(vec![3, 1, 2]));
    }

    #[test]
    fn ordinal_value_outside_declared_order_fails() {
        let csv = "size\nsmall\ntiny\n";
        let sch = schema(vec![AttributeSchema::ordinal("size", ["small", "large"])]);
        let err = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap_err();
        assert!(matches!(err, Error::UnknownOrdinalValue { row: 2, .. }));
    }

    #[test]
    fn schema_rules() {
        assert!(Schema::new(vec![AttributeSchema::new("o", AttributeKind::Ordinal)]).is_err());
        assert!(Schema::new(vec![
            AttributeSchema::new("a", AttributeKind::Label),
            AttributeSchema::new("b", AttributeKind::Label),
        ])
        .is_err());
        assert!(Schema::new(vec![AttributeSchema::ordinal("o", ["x", "x"])]).is_err());
        let text = r#"
            [[column]]
            name = "hobby"
            kind = "nominal"

            [[column]]
            name = "age"
            kind = "ordinal"
            order = ["1", "2", "3"]

            [[column]]
            name = "class"
            kind = "label"
        "#;
        let s = Schema::from_toml(text).unwrap();
        assert_eq!(s.columns.len(), 3);
        assert_eq!(Schema::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn single_valued_columns_become_degenerate() {
        let csv = "a,b,c,label\nx,p,q,1\ny,p,r,2\nx,p,q,1\n";
        let sch = schema(vec![
            AttributeSchema::new("a", AttributeKind::Nominal),
            AttributeSchema::new("b", AttributeKind::Nominal),
            AttributeSchema::new("c", AttributeKind::Nominal),
            AttributeSchema::new("label", AttributeKind::Label),
        ]);
        let d = read_csv(csv.as_bytes(), &sch, MissingPolicy::DropRow).unwrap();
        assert_eq!(d.n_categorical(), 2);
        assert_eq!(
            d.degenerate(),
            &[DegenerateAttribute {
                name: "b".into(),
                value: "p".into()
            }]
        );
        assert_eq!(d.decode_row(1), vec!["y", "r"]);
        assert_eq!(d.labels().unwrap().codes, vec![0, 1, 0]);
    }

    #[test]
    fn normalize_min_max() {
        let base = Dataset::from_code_rows(&[2], &[vec![0], vec![1], vec![0]]).unwrap();
        let d = base
            .clone()
            .with_numerical(
                vec!["x".into(), "c".into()],
                vec![2.0, 5.0, 4.0, 5.0, 6.0, 5.0],
            )
            .unwrap()
            .normalize_numerical();
        assert_eq!(d.numerical(), &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0]);
        let unit = base
            .with_numerical(vec!["u".into()], vec![0.0, 0.25, 1.0])
            .unwrap();
        assert_eq!(unit.normalize_numerical().numerical(), unit.numerical());
    }

    #[test]
    fn synthesize_is_seeded() {
        let a = synthesize(200, 20, 5, 5, 7).unwrap();
        let b = synthesize(200, 20, 5, 5, 7).unwrap();
        assert_eq!(a, b);
        let c = synthesize(200, 20, 5, 5, 8).unwrap();
        assert_ne!(a.codes(), c.codes());
        let small = synthesize(4, 1, 2, 2, 1).unwrap();
        assert!(small.codes().iter().all(|&c| c < 2));
        assert_eq!(small.labels().unwrap().codes, vec![0, 1, 0, 1]);
    }

    #[test]
    fn stats_bounds() {
        let d = Dataset::from_code_rows(&[2, 3, 7], &[vec![0, 0, 0], vec![1, 2, 6]]).unwrap();
        let st = d.stats().unwrap();
        assert_eq!(st.max_cardinality, 7);
        assert_eq!(st.min_cardinality, 2);
        assert!((st.mean_cardinality - 4.0).abs() < 1e-12);
    }
}
