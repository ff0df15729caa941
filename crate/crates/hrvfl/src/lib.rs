//! Robust random vector functional link (RVFL) classification with the
//! bounded HawkEye loss.
//!
//! An RVFL network freezes a random input-to-hidden projection and learns only
//! the output weights over the concatenation matrix `T = [X | H]`. The
//! squared-loss baseline admits the closed-form ridge solution
//! `(T'T + I/C)^{-1} T'y`; the H-RVFL variant instead minimizes a bounded,
//! smooth loss with an insensitive zone via Nesterov accelerated gradient,
//! which caps the influence any single outlier or mislabeled point can exert
//! on the gradient. The [`bench`] module adds a reproducible label-noise
//! benchmark harness around both.
//!
//! All numeric code is generic over the scalar type ([`Scalar`]: `f32` or
//! `f64`); the `*64` aliases below cover the common double-precision case.
//!
//! ```
//! use hrvfl::{fit_dataset, two_gaussians, ModelConfig64};
//!
//! let ds = two_gaussians::<f64>(120, 2, 6.0, 42);
//! let model = fit_dataset(&ds, &ModelConfig64::default()).unwrap();
//! let pred = model.predict(&ds.x).unwrap();
//! assert!(hrvfl::accuracy(&pred, &ds.y) > 0.9);
//! ```

pub mod bench;
pub mod data;
pub mod error;
pub mod feature_map;
pub mod linalg;
pub mod loss;
pub mod model;
pub mod optimizer;
pub mod rng;
pub mod scalar;

pub use data::{
    inject_label_noise, kfold_split, load_csv, normalize, two_gaussians, write_csv, CsvSchema,
    Dataset, DatasetManifest, LabelColumn, LabelMap, NoiseSpec, NormStats,
};
pub use error::{Error, Result};
pub use feature_map::{Activation, FeatureMap, FeatureMapConfig};
pub use loss::{
    hloss_grad, hloss_grads, hloss_value, hloss_values, sample_curve, sqloss_grad, sqloss_value,
    CurvePoint, HLossParams, LossKind,
};
pub use model::{
    accuracy, fit_dataset, fit_hrvfl, fit_ridge, objective, objective_grad, objective_grad_batch,
    ridge_solve, ModelConfig, TrainedModel, TrainingReport,
};
pub use optimizer::{
    nag_minimize, nag_step, BatchSize, ConvergenceReport, NagConfig, NagState, StopReason,
};
pub use scalar::Scalar;

/// Double-precision instantiations of the generic core types.
pub type HLossParams64 = loss::HLossParams<f64>;
pub type LossKind64 = loss::LossKind<f64>;
pub type ModelConfig64 = model::ModelConfig<f64>;
pub type TrainedModel64 = model::TrainedModel<f64>;
pub type Dataset64 = data::Dataset<f64>;
pub type FeatureMap64 = feature_map::FeatureMap<f64>;
pub type NagState64 = optimizer::NagState<f64>;

/// Single-precision instantiations.
pub type HLossParams32 = loss::HLossParams<f32>;
pub type ModelConfig32 = model::ModelConfig<f32>;
pub type TrainedModel32 = model::TrainedModel<f32>;
pub type Dataset32 = data::Dataset<f32>;
