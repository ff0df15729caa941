//! Benchmark harness: experiment specifications, the k-fold × noise-rate ×
//! grid-point runner, and accuracy±std summary tables.
//!
//! Reproducibility contract: every stochastic consumer (fold splitter, noise
//! injector, feature map, mini-batch sampler) draws from its own sub-seed
//! derived from the master seed plus a context path (dataset name, noise rate,
//! grid point, fold), so rerunning a spec with the same master seed produces
//! byte-identical result files. Wall-clock timings are recorded in a separate
//! file that is excluded from that guarantee.

mod runner;
mod summary;

pub use runner::{configure_threads, run_experiment, write_outputs, ExperimentOutcome};
pub use summary::{summarize, DatasetFamilySummary, FamilySummary, Summary};

use serde::{Deserialize, Serialize};

use crate::data::{CsvSchema, LabelColumn};
use crate::error::{Error, Result};
use crate::feature_map::Activation;
use crate::optimizer::NagConfig;

/// Model families the harness can run.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    /// HawkEye loss trained by NAG, direct links on.
    HRvfl,
    /// Squared loss, closed form, direct links on.
    Rvfl,
    /// Squared loss, closed form, no direct links (ELM-style).
    RvflWoDl,
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelFamily::HRvfl => write!(f, "hrvfl"),
            ModelFamily::Rvfl => write!(f, "rvfl"),
            ModelFamily::RvflWoDl => write!(f, "rvflwodl"),
        }
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hrvfl" | "h-rvfl" => Ok(ModelFamily::HRvfl),
            "rvfl" => Ok(ModelFamily::Rvfl),
            "rvflwodl" | "rvfl-wo-dl" | "elm" => Ok(ModelFamily::RvflWoDl),
            other => Err(Error::Config(format!("unknown model family '{other}'"))),
        }
    }
}

/// Feature scaling applied per fold (fit on the training part only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    #[default]
    MinMax,
    None,
}

/// Hyperparameter grid. The HawkEye family sweeps the full product; the
/// squared-loss families use only `c`, `hidden`, and `activation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_c_grid")]
    pub c: Vec<f64>,
    #[serde(default = "default_loss_grid")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_loss_grid")]
    pub a: Vec<f64>,
    #[serde(default = "default_epsilon_grid")]
    pub epsilon: Vec<f64>,
    #[serde(default = "default_hidden_grid")]
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation_grid")]
    pub activation: Vec<Activation>,
}

fn default_c_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
}

fn default_loss_grid() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

fn default_epsilon_grid() -> Vec<f64> {
    vec![0.0, 0.1, 0.5]
}

fn default_hidden_grid() -> Vec<usize> {
    vec![50, 100, 200]
}

fn default_activation_grid() -> Vec<Activation> {
    vec![Activation::Sigmoid]
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            c: default_c_grid(),
            lambda: default_loss_grid(),
            a: default_loss_grid(),
            epsilon: default_epsilon_grid(),
            hidden: default_hidden_grid(),
            activation: default_activation_grid(),
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        for (name, list) in [
            ("c", &self.c),
            ("lambda", &self.lambda),
            ("a", &self.a),
            ("epsilon", &self.epsilon),
        ] {
            if list.is_empty() {
                return Err(Error::Config(format!("grid list '{name}' is empty")));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("grid list '{name}' has non-finite values")));
            }
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config("grid list 'hidden' must be non-empty positive".into()));
        }
        if self.activation.is_empty() {
            return Err(Error::Config("grid list 'activation' is empty".into()));
        }
        if self.c.iter().any(|&v| v <= 0.0) {
            return Err(Error::Config("grid list 'c' must be positive".into()));
        }
        Ok(())
    }

    /// Sort the numeric lists ascending so enumeration order (and therefore
    /// tie-breaking: smaller C first, then smaller lambda, ...) is canonical.
    fn normalized(mut self) -> Self {
        let sort = |v: &mut Vec<f64>| v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sort(&mut self.c);
        sort(&mut self.lambda);
        sort(&mut self.a);
        sort(&mut self.epsilon);
        self.hidden.sort_unstable();
        self
    }

    /// Enumerate the grid points a family sweeps, in canonical order
    /// (`c` outermost, then `lambda`, `a`, `epsilon`, `hidden`, `activation`).
    pub fn enumerate(&self, family: ModelFamily) -> Vec<GridPoint> {
        let mut points = Vec::new();
        let loss_dims: Vec<(Option<f64>, Option<f64>, Option<f64>)> = match family {
            ModelFamily::HRvfl => {
                let mut dims = Vec::new();
                for &lambda in &self.lambda {
                    for &a in &self.a {
                        for &epsilon in &self.epsilon {
                            dims.push((Some(lambda), Some(a), Some(epsilon)));
                        }
                    }
                }
                dims
            }
            _ => vec![(None, None, None)],
        };
        for &c in &self.c {
            for &(lambda, a, epsilon) in &loss_dims {
                for &hidden in &self.hidden {
                    for &activation in &self.activation {
                        points.push(GridPoint {
                            c,
                            lambda,
                            a,
                            epsilon,
                            hidden,
                            activation,
                        });
                    }
                }
            }
        }
        points
    }
}

/// One hyperparameter combination. Loss-shape fields are absent for the
/// squared-loss families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub c: f64,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub epsilon: Option<f64>,
    pub hidden: usize,
    pub activation: Activation,
}

impl GridPoint {
    /// Canonical value key. Seeds derive from this (not from the position in
    /// the grid), so duplicated grid entries reproduce identical results.
    pub fn key(&self) -> String {
        let opt = |v: &Option<f64>| match v {
            Some(x) => format!("{x:?}"),
            None => "-".into(),
        };
        format!(
            "c={:?},lambda={},a={},eps={},h={},act={}",
            self.c,
            opt(&self.lambda),
            opt(&self.a),
            opt(&self.epsilon),
            self.hidden,
            self.activation
        )
    }
}

/// A dataset reference inside an experiment spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    pub path: String,
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

impl DatasetSpec {
    pub fn csv_schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_column.clone(),
            header: self.header,
            delimiter: self.delimiter,
        }
    }
}

/// A full experiment: datasets x noise rates x model families x grid points,
/// evaluated by seeded stratified k-fold cross-validation with train-only
/// label corruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub master_seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_noise_rates")]
    pub noise_rates: Vec<f64>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default = "default_models")]
    pub models: Vec<ModelFamily>,
    pub datasets: Vec<DatasetSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub nag: NagConfig,
    #[serde(default = "default_weight_scale")]
    pub weight_scale: f64,
    /// Initialize NAG from the closed-form ridge solution instead of zeros
    /// (non-convex objectives benefit from the convex-baseline start).
    #[serde(default)]
    pub warm_start: bool,
}

fn default_folds() -> usize {
    5
}

fn default_noise_rates() -> Vec<f64> {
    vec![0.0, 0.05, 0.10, 0.20, 0.30, 0.40]
}

fn default_models() -> Vec<ModelFamily> {
    vec![ModelFamily::HRvfl, ModelFamily::Rvfl, ModelFamily::RvflWoDl]
}

fn default_weight_scale() -> f64 {
    1.0
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("spec lists no datasets".into()));
        }
        if self.models.is_empty() {
            return Err(Error::Config("spec lists no model families".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be >= 2".into()));
        }
        if self.noise_rates.is_empty() {
            return Err(Error::Config("spec lists no noise rates".into()));
        }
        for &rate in &self.noise_rates {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::Config(format!("noise rate {rate} outside [0, 1)")));
            }
        }
        if !(self.weight_scale > 0.0) || !self.weight_scale.is_finite() {
            return Err(Error::Config("weight_scale must be positive".into()));
        }
        self.grid.validate()?;
        self.nag.validate()?;
        Ok(())
    }

    /// Copy with canonically sorted grid lists and noise rates.
    pub(crate) fn normalized(&self) -> Self {
        let mut spec = self.clone();
        spec.grid = spec.grid.normalized();
        spec.noise_rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
        spec
    }
}

/// Per-(dataset, family, rate, grid point) cross-validation result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub model: ModelFamily,
    pub noise_rate: f64,
    pub grid_index: usize,
    pub grid: GridPoint,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    /// Winner of its (dataset, family, rate) group by mean CV accuracy
    /// (ties: smaller grid index, i.e. smaller C then smaller lambda).
    pub selected: bool,
    /// Hardware-dependent; excluded from the byte-stable result files.
    #[serde(skip_serializing, default)]
    pub wall_time_s: f64,
}

/// A failure the run recorded and skipped past.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub dataset: String,
    pub context: String,
    pub message: String,
}

/// Sample mean and (n-1)-normalized standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
