//! Dataset ingestion, min–max normalization, stratified k-fold splitting, and
//! seeded label-noise injection.
//!
//! Labels are arbitrary two-class values at ingestion and are mapped to
//! `{-1, +1}` by sorted order (first value -> -1); the mapping travels with the
//! dataset and with any model trained on it. All randomized operations are
//! pure functions of `(input, seed)`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sample_indices, shuffle, standard_normal};
use crate::scalar::Scalar;

/// Mapping between the two original label values and `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    pub negative: String,
    pub positive: String,
}

impl LabelMap {
    /// Numeric default for synthetic data.
    pub fn numeric() -> Self {
        Self {
            negative: "-1".into(),
            positive: "+1".into(),
        }
    }

    /// Original value for a `{-1, +1}` label.
    pub fn name_of<F: Scalar>(&self, y: F) -> &str {
        if y > F::zero() {
            &self.positive
        } else {
            &self.negative
        }
    }
}

/// A binary-classification dataset: features `x` (n x m), labels `y` in
/// `{-1, +1}`, a name, and the original-label mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub x: Array2<F>,
    pub y: Array1<F>,
    pub name: String,
    pub label_map: LabelMap,
}

impl<F: Scalar> Dataset<F> {
    /// Build a dataset, enforcing the ingestion invariants: finite features,
    /// labels exactly `{-1, +1}` with both classes present, matching lengths.
    pub fn new(x: Array2<F>, y: Array1<F>, name: String, label_map: LabelMap) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Shape {
                context: "dataset labels",
                expected: x.nrows(),
                got: y.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "feature" });
        }
        let one = F::one();
        if y.iter().any(|&v| v != one && v != -one) {
            return Err(Error::Config("labels must be -1 or +1".into()));
        }
        if !y.iter().any(|&v| v == one) || !y.iter().any(|&v| v == -one) {
            return Err(Error::SingleClass);
        }
        Ok(Self {
            x,
            y,
            name,
            label_map,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// `(negative, positive)` class counts.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|&&v| v > F::zero()).count();
        (self.n() - pos, pos)
    }

    /// Row subset by index. Keeps the label mapping; does not require both
    /// classes to survive (a test fold may be single-class).
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), indices),
            y: self.y.select(Axis(0), indices),
            name: self.name.clone(),
            label_map: self.label_map.clone(),
        }
    }
}

/// Label column selector: positional or by header name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

/// CSV parsing options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub label_column: LabelColumn,
    #[serde(default = "default_true")]
    pub header: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_true() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            label_column: LabelColumn::Name("target".into()),
            header: true,
            delimiter: ',',
        }
    }
}

/// Load a two-class CSV dataset. Feature cells must parse as finite numbers;
/// the first unparseable cell aborts the load with its row and column.
pub fn load_csv<F: Scalar>(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset<F>> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .delimiter(schema.delimiter as u8)
        .from_path(path)?;

    let label_idx = match &schema.label_column {
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => {
            if !schema.header {
                return Err(Error::Csv(
                    "label column by name requires a header row".into(),
                ));
            }
            let headers = reader.headers()?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Csv(format!("label column '{name}' not in header")))?
        }
    };

    let mut features: Vec<Vec<F>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1; // 1-based data row for error messages
        if label_idx >= record.len() {
            return Err(Error::Csv(format!(
                "row {row} has {} fields, label column is {label_idx}",
                record.len()
            )));
        }
        let mut row_features = Vec::with_capacity(record.len() - 1);
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                raw_labels.push(cell.trim().to_string());
                continue;
            }
            let value: f64 = cell.trim().parse().map_err(|_| Error::CsvCell {
                row,
                col,
                message: format!("'{cell}' is not numeric"),
            })?;
            if !value.is_finite() {
                return Err(Error::CsvCell {
                    row,
                    col,
                    message: format!("'{cell}' is not finite"),
                });
            }
            row_features.push(F::cast(value));
        }
        if let Some(first) = features.first() {
            if row_features.len() != first.len() {
                return Err(Error::Csv(format!(
                    "row {row} has {} feature cells, expected {}",
                    row_features.len(),
                    first.len()
                )));
            }
        }
        features.push(row_features);
    }
    if features.is_empty() {
        return Err(Error::Csv(format!("{} contains no data rows", path.display())));
    }

    let mut distinct: BTreeMap<&str, usize> = BTreeMap::new();
    for label in &raw_labels {
        *distinct.entry(label.as_str()).or_insert(0) += 1;
    }
    if distinct.len() != 2 {
        return Err(Error::LabelClasses {
            found: distinct.len(),
        });
    }
    let mut classes = distinct.keys().copied();
    let negative = classes.next().unwrap().to_string();
    let positive = classes.next().unwrap().to_string();
    let label_map = LabelMap {
        negative: negative.clone(),
        positive,
    };

    let n = features.len();
    let m = features[0].len();
    if m == 0 {
        return Err(Error::Csv("no feature columns".into()));
    }
    let x = Array2::from_shape_vec((n, m), features.into_iter().flatten().collect())
        .expect("row-major feature layout");
    let y = Array1::from_iter(raw_labels.iter().map(|l| {
        if *l == negative {
            -F::one()
        } else {
            F::one()
        }
    }));
    Dataset::new(x, y, name, label_map)
}

/// Write a dataset back to CSV (`f0..f{m-1},label` header, original label
/// names, shortest round-trip float formatting).
pub fn write_csv<F: Scalar>(ds: &Dataset<F>, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..ds.dim()).map(|j| format!("f{j}")).collect();
    writeln!(out, "{},label", header.join(","))?;
    for (row, &label) in ds.x.axis_iter(Axis(0)).zip(ds.y.iter()) {
        let cells: Vec<String> = row.iter().map(|v| format!("{}", v.as_f64())).collect();
        writeln!(out, "{},{}", cells.join(","), ds.label_map.name_of(label))?;
    }
    Ok(())
}

/// Per-feature min–max statistics fitted on a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats<F> {
    pub mins: Array1<F>,
    pub maxs: Array1<F>,
}

impl<F: Scalar> NormStats<F> {
    pub fn fit(train: &Dataset<F>) -> Self {
        let m = train.dim();
        let mut mins = Array1::from_elem(m, F::infinity());
        let mut maxs = Array1::from_elem(m, F::neg_infinity());
        for row in train.x.axis_iter(Axis(0)) {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Self { mins, maxs }
    }

    /// Scale features to `[0, 1]` by the fitted ranges. Zero-range features map
    /// to 0; values outside the fitted range are not clipped.
    pub fn apply(&self, ds: &Dataset<F>) -> Result<Dataset<F>> {
        if ds.dim() != self.mins.len() {
            return Err(Error::Shape {
                context: "normalization stats",
                expected: self.mins.len(),
                got: ds.dim(),
            });
        }
        let mut x = ds.x.clone();
        for mut row in x.axis_iter_mut(Axis(0)) {
            for (j, v) in row.iter_mut().enumerate() {
                let range = self.maxs[j] - self.mins[j];
                *v = if range > F::zero() {
                    (*v - self.mins[j]) / range
                } else {
                    F::zero()
                };
            }
        }
        Ok(Dataset {
            x,
            y: ds.y.clone(),
            name: ds.name.clone(),
            label_map: ds.label_map.clone(),
        })
    }
}

/// Min–max scale to `[0, 1]`, fitting the statistics on `train` only and
/// applying them unchanged to `others`.
pub fn normalize<F: Scalar>(
    train: &Dataset<F>,
    others: &[&Dataset<F>],
) -> Result<(Dataset<F>, Vec<Dataset<F>>, NormStats<F>)> {
    let stats = NormStats::fit(train);
    let train_scaled = stats.apply(train)?;
    let mut scaled = Vec::with_capacity(others.len());
    for ds in others {
        scaled.push(stats.apply(ds)?);
    }
    Ok((train_scaled, scaled, stats))
}

/// One cross-validation fold: train and test row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// A full k-fold split. `stratified` is false when some class had fewer than
/// `k` members and the split fell back to plain shuffling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KFold {
    pub folds: Vec<Fold>,
    pub stratified: bool,
}

/// Seeded k-fold split, stratified by class when possible. Test folds are
/// disjoint and cover every index exactly once.
pub fn kfold_split<F: Scalar>(ds: &Dataset<F>, k: usize, seed: u64) -> Result<KFold> {
    let n = ds.n();
    if k < 2 {
        return Err(Error::Config(format!("k must be >= 2, got {k}")));
    }
    if n < k {
        return Err(Error::Config(format!("need at least k={k} samples, got {n}")));
    }
    let mut rng = rng_from_seed(seed);
    let (neg, pos) = ds.class_counts();
    let stratified = neg >= k && pos >= k;

    let mut test_folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    if stratified {
        for class_sign in [-1.0, 1.0] {
            let sign = F::cast(class_sign);
            let mut class_idx: Vec<usize> = ds
                .y
                .iter()
                .enumerate()
                .filter(|(_, &v)| (v > F::zero()) == (sign > F::zero()))
                .map(|(i, _)| i)
                .collect();
            shuffle(&mut rng, &mut class_idx);
            distribute_chunks(&class_idx, &mut test_folds);
        }
    } else {
        let mut all: Vec<usize> = (0..n).collect();
        shuffle(&mut rng, &mut all);
        distribute_chunks(&all, &mut test_folds);
    }

    let folds = test_folds
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect();
    Ok(KFold { folds, stratified })
}

/// Deal `items` into the folds in contiguous chunks whose sizes differ by at
/// most one.
fn distribute_chunks(items: &[usize], folds: &mut [Vec<usize>]) {
    let k = folds.len();
    let base = items.len() / k;
    let extra = items.len() % k;
    let mut offset = 0;
    for (f, fold) in folds.iter_mut().enumerate() {
        let size = base + usize::from(f < extra);
        fold.extend_from_slice(&items[offset..offset + size]);
        offset += size;
    }
}

/// Where label corruption may be applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScope {
    #[default]
    TrainOnly,
}

/// Label-noise specification: flip exactly `floor(rate * n)` labels chosen
/// uniformly without replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub scope: NoiseScope,
}

impl NoiseSpec {
    pub fn new(rate: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Config(format!(
                "noise rate must be in [0, 1), got {rate}"
            )));
        }
        Ok(Self {
            rate,
            seed,
            scope: NoiseScope::TrainOnly,
        })
    }
}

/// Flip `floor(rate * n)` labels. Returns the corrupted copy and the sorted
/// list of flipped indices; the input dataset is untouched.
pub fn inject_label_noise<F: Scalar>(
    ds: &Dataset<F>,
    spec: &NoiseSpec,
) -> Result<(Dataset<F>, Vec<usize>)> {
    if !(0.0..1.0).contains(&spec.rate) {
        return Err(Error::Config(format!(
            "noise rate must be in [0, 1), got {}",
            spec.rate
        )));
    }
    let n = ds.n();
    let count = (spec.rate * n as f64).floor() as usize;
    let mut rng = rng_from_seed(spec.seed);
    let mut flipped = sample_indices(&mut rng, n, count);
    flipped.sort_unstable();
    let mut y = ds.y.clone();
    for &i in &flipped {
        y[i] = -y[i];
    }
    Ok((
        Dataset {
            x: ds.x.clone(),
            y,
            name: ds.name.clone(),
            label_map: ds.label_map.clone(),
        },
        flipped,
    ))
}

/// Seeded synthetic two-Gaussian binary dataset: isotropic unit-variance
/// classes at means `±(mean_distance/2)` along the first axis, balanced
/// labels (first ceil(n/2) rows positive).
pub fn two_gaussians<F: Scalar>(n: usize, dim: usize, mean_distance: f64, seed: u64) -> Dataset<F> {
    assert!(n >= 2 && dim >= 1, "need n >= 2 and dim >= 1");
    let mut rng = rng_from_seed(seed);
    let half = mean_distance / 2.0;
    let n_pos = n - n / 2;
    let mut x = Array2::zeros((n, dim));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let positive = i < n_pos;
        let mean0 = if positive { half } else { -half };
        for j in 0..dim {
            let offset = if j == 0 { mean0 } else { 0.0 };
            x[[i, j]] = F::cast(offset + standard_normal(&mut rng));
        }
        y[i] = if positive { F::one() } else { -F::one() };
    }
    Dataset {
        x,
        y,
        name: format!("two_gaussians_n{n}_d{dim}"),
        label_map: LabelMap::numeric(),
    }
}

/// One dataset's entry in a manifest file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: String,
    pub n: usize,
    pub m: usize,
    pub negative_label: String,
    pub positive_label: String,
    pub negative_count: usize,
    pub positive_count: usize,
}

impl ManifestEntry {
    pub fn describe<F: Scalar>(ds: &Dataset<F>, path: &str) -> Self {
        let (neg, pos) = ds.class_counts();
        Self {
            name: ds.name.clone(),
            path: path.to_string(),
            n: ds.n(),
            m: ds.dim(),
            negative_label: ds.label_map.negative.clone(),
            positive_label: ds.label_map.positive.clone(),
            negative_count: neg,
            positive_count: pos,
        }
    }
}

/// Index of the datasets an experiment consumed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub datasets: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
