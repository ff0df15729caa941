//! The H-RVFL estimator and its squared-loss baselines.
//!
//! Training minimizes
//!
//! ```text
//! J(beta) = 1/2 ||beta||^2 + (C/2) * sum_i L(T_i . beta - y_i)
//! ```
//!
//! over the concatenation matrix `T` produced by a frozen [`FeatureMap`].
//! With the HawkEye loss the problem is non-convex and is driven by NAG
//! ([`crate::optimizer`]); with the squared loss the minimizer is the
//! closed-form ridge solution `(T'T + I/C)^{-1} T'y`. Prediction is
//! `sign(T~ . beta)` with `sign(0) = +1`.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LabelMap, NormStats};
use crate::error::{Error, Result};
use crate::feature_map::{FeatureMap, FeatureMapConfig};
use crate::linalg::{mat_t_vec, mat_vec, solve_spd};
use crate::loss::{HLossParams, LossKind};
use crate::optimizer::{nag_minimize, ConvergenceReport, NagConfig};
use crate::scalar::Scalar;

/// Full model specification: regularization trade-off `C`, loss, feature-map
/// generation, direct links, and (for the HawkEye loss) the NAG settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig<F> {
    /// Loss weight `C > 0` in the objective.
    pub c: F,
    pub loss: LossKind<F>,
    pub feature: FeatureMapConfig,
    /// Concatenate raw inputs into `T` (false gives the RVFLwoDL baseline).
    pub direct_links: bool,
    /// Used when the loss is HawkEye.
    pub nag: NagConfig,
    /// Initialize NAG from the closed-form ridge solution instead of zeros.
    pub warm_start: bool,
}

impl<F: Scalar> Default for ModelConfig<F> {
    fn default() -> Self {
        Self {
            c: F::one(),
            loss: LossKind::HawkEye(HLossParams {
                lambda: F::one(),
                a: F::one(),
                epsilon: F::cast(0.1),
            }),
            feature: FeatureMapConfig::default(),
            direct_links: true,
            nag: NagConfig::default(),
            warm_start: false,
        }
    }
}

impl<F: Scalar> ModelConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > F::zero()) || !self.c.is_finite() {
            return Err(Error::Config(format!("C must be > 0, got {}", self.c)));
        }
        if let LossKind::HawkEye(p) = &self.loss {
            HLossParams::new(p.lambda, p.a, p.epsilon)?;
        }
        Ok(())
    }

    /// Double-precision copy for serialization.
    pub fn to_f64(&self) -> ModelConfig<f64> {
        ModelConfig {
            c: self.c.as_f64(),
            loss: match &self.loss {
                LossKind::Squared => LossKind::Squared,
                LossKind::HawkEye(p) => LossKind::HawkEye(HLossParams {
                    lambda: p.lambda.as_f64(),
                    a: p.a.as_f64(),
                    epsilon: p.epsilon.as_f64(),
                }),
            },
            feature: self.feature.clone(),
            direct_links: self.direct_links,
            nag: self.nag.clone(),
            warm_start: self.warm_start,
        }
    }

    pub fn from_f64(cfg: &ModelConfig<f64>) -> Self {
        Self {
            c: F::cast(cfg.c),
            loss: match &cfg.loss {
                LossKind::Squared => LossKind::Squared,
                LossKind::HawkEye(p) => LossKind::HawkEye(HLossParams {
                    lambda: F::cast(p.lambda),
                    a: F::cast(p.a),
                    epsilon: F::cast(p.epsilon),
                }),
            },
            feature: cfg.feature.clone(),
            direct_links: cfg.direct_links,
            nag: cfg.nag.clone(),
            warm_start: cfg.warm_start,
        }
    }
}

/// How the output weights were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainingReport {
    ClosedForm,
    Nag(ConvergenceReport),
}

/// A fitted model: output weights, the frozen feature map, the configuration
/// that produced it, the label mapping, and optional normalization statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<F> {
    beta: Array1<F>,
    feature_map: FeatureMap<F>,
    config: ModelConfig<F>,
    label_map: LabelMap,
    norm: Option<NormStats<F>>,
    report: TrainingReport,
}

fn check_dims<F: Scalar>(beta: &Array1<F>, t: &Array2<F>, y: &Array1<F>) -> Result<()> {
    if t.ncols() != beta.len() {
        return Err(Error::Shape {
            context: "objective beta",
            expected: t.ncols(),
            got: beta.len(),
        });
    }
    if t.nrows() != y.len() {
        return Err(Error::Shape {
            context: "objective labels",
            expected: t.nrows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Objective value `1/2 ||beta||^2 + (C/2) sum_i L(T_i . beta - y_i)`.
pub fn objective<F: Scalar>(
    beta: &Array1<F>,
    t: &Array2<F>,
    y: &Array1<F>,
    c: F,
    loss: &LossKind<F>,
) -> Result<F> {
    check_dims(beta, t, y)?;
    let resid = mat_vec(&t.view(), &beta.view()) - y;
    if resid.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "residual" });
    }
    let half = F::cast(0.5);
    let reg = half * beta.iter().map(|&b| b * b).sum::<F>();
    let data: F = resid.iter().map(|&x| loss.value(x)).sum();
    Ok(reg + half * c * data)
}

/// Objective gradient over all samples:
/// `beta + (C/2) sum_i L'(T_i . beta - y_i) T_i'`.
pub fn objective_grad<F: Scalar>(
    beta: &Array1<F>,
    t: &Array2<F>,
    y: &Array1<F>,
    c: F,
    loss: &LossKind<F>,
) -> Result<Array1<F>> {
    check_dims(beta, t, y)?;
    let mut weights = mat_vec(&t.view(), &beta.view()) - y;
    weights.mapv_inplace(|x| loss.grad(x));
    let data = mat_t_vec(&t.view(), &weights.view());
    let half_c = F::cast(0.5) * c;
    Ok(beta + &(data * half_c))
}

/// Objective gradient over a row subset. The regularizer term `beta` is
/// applied once per call, not per sample.
pub fn objective_grad_batch<F: Scalar>(
    beta: &Array1<F>,
    t: &Array2<F>,
    y: &Array1<F>,
    batch: &[usize],
    c: F,
    loss: &LossKind<F>,
) -> Result<Array1<F>> {
    check_dims(beta, t, y)?;
    let t_batch = t.select(Axis(0), batch);
    let y_batch = y.select(Axis(0), batch);
    let mut weights = mat_vec(&t_batch.view(), &beta.view()) - &y_batch;
    weights.mapv_inplace(|x| loss.grad(x));
    let data = mat_t_vec(&t_batch.view(), &weights.view());
    let half_c = F::cast(0.5) * c;
    Ok(beta + &(data * half_c))
}

fn validate_training_inputs<F: Scalar>(x: &Array2<F>, y: &Array1<F>) -> Result<()> {
    if x.nrows() < 2 {
        return Err(Error::Config(format!(
            "training needs at least 2 samples, got {}",
            x.nrows()
        )));
    }
    if y.len() != x.nrows() {
        return Err(Error::Shape {
            context: "training labels",
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
    Ok(())
}

/// Closed-form ridge weights `(T'T + I/C)^{-1} T'y` via a symmetric
/// positive-definite solve (no explicit inverse).
pub fn ridge_solve<F: Scalar>(t: &Array2<F>, y: &Array1<F>, c: F) -> Result<Array1<F>> {
    if t.nrows() != y.len() {
        return Err(Error::Shape {
            context: "ridge labels",
            expected: t.nrows(),
            got: y.len(),
        });
    }
    let d = t.ncols();
    let mut normal = t.t().dot(t);
    let inv_c = F::one() / c;
    for i in 0..d {
        normal[[i, i]] = normal[[i, i]] + inv_c;
    }
    let rhs = mat_t_vec(&t.view(), &y.view());
    solve_spd(&normal, &rhs)
}

/// Train with the HawkEye loss (or any configured loss) by NAG on the
/// objective. The feature map is generated once from `cfg.feature` and frozen.
pub fn fit_hrvfl<F: Scalar>(
    x: &Array2<F>,
    y: &Array1<F>,
    cfg: &ModelConfig<F>,
) -> Result<TrainedModel<F>> {
    cfg.validate()?;
    validate_training_inputs(x, y)?;
    let fm = FeatureMap::init(x.ncols(), &cfg.feature)?;
    let t = fm.transform(x, cfg.direct_links)?;
    let n = t.nrows();
    let init = if cfg.warm_start {
        ridge_solve(&t, y, cfg.c)?
    } else {
        Array1::zeros(t.ncols())
    };
    let loss = cfg.loss;
    let c = cfg.c;
    let grad = |beta: &Array1<F>, batch: &[usize]| {
        if batch.len() == n {
            objective_grad(beta, &t, y, c, &loss)
        } else {
            objective_grad_batch(beta, &t, y, batch, c, &loss)
        }
    };
    let (beta, report) = nag_minimize(grad, init, n, &cfg.nag)?;
    Ok(TrainedModel {
        beta,
        feature_map: fm,
        config: cfg.clone(),
        label_map: LabelMap::numeric(),
        norm: None,
        report: TrainingReport::Nag(report),
    })
}

/// Train the squared-loss baseline in closed form. `cfg.loss` must be
/// [`LossKind::Squared`]; `direct_links = false` gives the RVFLwoDL variant.
pub fn fit_ridge<F: Scalar>(
    x: &Array2<F>,
    y: &Array1<F>,
    cfg: &ModelConfig<F>,
) -> Result<TrainedModel<F>> {
    cfg.validate()?;
    if cfg.loss != LossKind::Squared {
        return Err(Error::Config(
            "fit_ridge requires the squared loss; use fit_hrvfl for the HawkEye loss".into(),
        ));
    }
    validate_training_inputs(x, y)?;
    let fm = FeatureMap::init(x.ncols(), &cfg.feature)?;
    let t = fm.transform(x, cfg.direct_links)?;
    let beta = ridge_solve(&t, y, cfg.c)?;
    Ok(TrainedModel {
        beta,
        feature_map: fm,
        config: cfg.clone(),
        label_map: LabelMap::numeric(),
        norm: None,
        report: TrainingReport::ClosedForm,
    })
}

/// Fit a dataset, dispatching on the configured loss, and attach its label
/// mapping to the model.
pub fn fit_dataset<F: Scalar>(ds: &Dataset<F>, cfg: &ModelConfig<F>) -> Result<TrainedModel<F>> {
    let model = match cfg.loss {
        LossKind::HawkEye(_) => fit_hrvfl(&ds.x, &ds.y, cfg)?,
        LossKind::Squared => fit_ridge(&ds.x, &ds.y, cfg)?,
    };
    Ok(model.with_label_map(ds.label_map.clone()))
}

/// Fraction of predictions equal to the reference labels.
pub fn accuracy<F: Scalar>(predicted: &Array1<F>, truth: &Array1<F>) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    let hits = predicted
        .iter()
        .zip(truth.iter())
        .filter(|(p, t)| p == t)
        .count();
    hits as f64 / truth.len() as f64
}

impl<F: Scalar> TrainedModel<F> {
    /// Assemble a model from stored components.
    pub fn from_parts(
        beta: Array1<F>,
        feature_map: FeatureMap<F>,
        config: ModelConfig<F>,
        label_map: LabelMap,
        norm: Option<NormStats<F>>,
        report: TrainingReport,
    ) -> Result<Self> {
        let expected = feature_map.output_dim(config.direct_links);
        if beta.len() != expected {
            return Err(Error::Shape {
                context: "model beta",
                expected,
                got: beta.len(),
            });
        }
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "beta" });
        }
        Ok(Self {
            beta,
            feature_map,
            config,
            label_map,
            norm,
            report,
        })
    }

    pub fn with_label_map(mut self, label_map: LabelMap) -> Self {
        self.label_map = label_map;
        self
    }

    pub fn with_norm_stats(mut self, norm: NormStats<F>) -> Self {
        self.norm = Some(norm);
        self
    }

    pub fn beta(&self) -> &Array1<F> {
        &self.beta
    }

    pub fn feature_map(&self) -> &FeatureMap<F> {
        &self.feature_map
    }

    pub fn config(&self) -> &ModelConfig<F> {
        &self.config
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn norm_stats(&self) -> Option<&NormStats<F>> {
        self.norm.as_ref()
    }

    pub fn report(&self) -> &TrainingReport {
        &self.report
    }

    /// Raw decision values `T~ . beta` for new inputs.
    pub fn decision_values(&self, x: &Array2<F>) -> Result<Array1<F>> {
        let t = self.feature_map.transform(x, self.config.direct_links)?;
        Ok(mat_vec(&t.view(), &self.beta.view()))
    }

    /// Predicted labels `sign(T~ . beta)` in `{-1, +1}`, with `sign(0) = +1`.
    pub fn predict(&self, x: &Array2<F>) -> Result<Array1<F>> {
        Ok(self
            .decision_values(x)?
            .mapv(|s| if s >= F::zero() { F::one() } else { -F::one() }))
    }

    /// Predicted labels as the original label values.
    pub fn predict_named(&self, x: &Array2<F>) -> Result<Vec<String>> {
        Ok(self
            .predict(x)?
            .iter()
            .map(|&p| self.label_map.name_of(p).to_string())
            .collect())
    }

    /// Serialize to the versioned JSON model record.
    pub fn to_json(&self) -> String {
        let record = ModelRecord {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            config: self.config.to_f64(),
            input_dim: self.feature_map.input_dim(),
            weights: self.feature_map.weights().iter().map(|v| v.as_f64()).collect(),
            biases: self.feature_map.biases().iter().map(|v| v.as_f64()).collect(),
            beta: self.beta.iter().map(|v| v.as_f64()).collect(),
            label_map: self.label_map.clone(),
            norm: self.norm.as_ref().map(|s| NormRecord {
                mins: s.mins.iter().map(|v| v.as_f64()).collect(),
                maxs: s.maxs.iter().map(|v| v.as_f64()).collect(),
            }),
            report: self.report.clone(),
        };
        serde_json::to_string_pretty(&record).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ModelRecord = serde_json::from_str(text)?;
        if record.format != MODEL_FORMAT {
            return Err(Error::Format(format!(
                "not a model record (format '{}')",
                record.format
            )));
        }
        if record.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {}",
                record.version
            )));
        }
        let config: ModelConfig<F> = ModelConfig::from_f64(&record.config);
        let hidden = record.config.feature.hidden;
        if record.weights.len() != record.input_dim * hidden {
            return Err(Error::Format(format!(
                "weight block has {} entries, expected {}",
                record.weights.len(),
                record.input_dim * hidden
            )));
        }
        let weights = Array2::from_shape_vec(
            (record.input_dim, hidden),
            record.weights.iter().map(|&v| F::cast(v)).collect(),
        )
        .expect("weight shape");
        let biases = Array1::from_iter(record.biases.iter().map(|&v| F::cast(v)));
        let fm = FeatureMap::from_parts(weights, biases, record.config.feature.activation)?;
        let beta = Array1::from_iter(record.beta.iter().map(|&v| F::cast(v)));
        let norm = record.norm.map(|r| NormStats {
            mins: Array1::from_iter(r.mins.iter().map(|&v| F::cast(v))),
            maxs: Array1::from_iter(r.maxs.iter().map(|&v| F::cast(v))),
        });
        Self::from_parts(beta, fm, config, record.label_map, norm, record.report)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

const MODEL_FORMAT: &str = "hrvfl-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NormRecord {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    format: String,
    version: u32,
    config: ModelConfig<f64>,
    input_dim: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
    beta: Vec<f64>,
    label_map: LabelMap,
    norm: Option<NormRecord>,
    report: TrainingReport,
}
