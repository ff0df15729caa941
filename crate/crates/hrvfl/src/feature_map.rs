//! The frozen random input-to-hidden projection and the concatenation matrix
//! `T = [X | H]` combining direct-link inputs with hidden activations.
//!
//! Randomization happens exactly once, at construction; training only ever
//! adjusts the output weights. Weights are drawn i.i.d. uniform on
//! `[-weight_scale, weight_scale)` and biases uniform on `[0, weight_scale)`
//! from the pinned generator (see [`crate::rng`]), `W` filled row-major first
//! and then `b`, so a `(seed, dims)` pair identifies the map completely.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, unit_f64};
use crate::scalar::Scalar;

/// Hidden-layer activation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Sigmoid,
    Relu,
    Tanh,
}

impl Activation {
    fn apply<F: Scalar>(self, z: F) -> F {
        match self {
            Activation::Sigmoid => F::one() / (F::one() + (-z).exp()),
            Activation::Relu => z.max(F::zero()),
            Activation::Tanh => z.tanh(),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation '{other}'"))),
        }
    }
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Activation::Sigmoid => write!(f, "sigmoid"),
            Activation::Relu => write!(f, "relu"),
            Activation::Tanh => write!(f, "tanh"),
        }
    }
}

/// Configuration for generating a [`FeatureMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapConfig {
    /// Number of hidden nodes (must be >= 1).
    pub hidden: usize,
    pub activation: Activation,
    /// Half-width of the weight distribution's support (must be > 0).
    pub weight_scale: f64,
    pub seed: u64,
}

impl Default for FeatureMapConfig {
    fn default() -> Self {
        Self {
            hidden: 100,
            activation: Activation::Sigmoid,
            weight_scale: 1.0,
            seed: 0,
        }
    }
}

impl FeatureMapConfig {
    fn validate(&self) -> Result<()> {
        if self.hidden == 0 {
            return Err(Error::Config("hidden must be >= 1".into()));
        }
        if !(self.weight_scale > 0.0) || !self.weight_scale.is_finite() {
            return Err(Error::Config(format!(
                "weight_scale must be a positive finite value, got {}",
                self.weight_scale
            )));
        }
        Ok(())
    }
}

/// A frozen random projection: input weights `W` (input_dim x hidden), biases
/// `b` (hidden), and the activation. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap<F> {
    weights: Array2<F>,
    biases: Array1<F>,
    activation: Activation,
}

impl<F: Scalar> FeatureMap<F> {
    /// Generate a map for `input_dim`-dimensional inputs. Deterministic in
    /// `(input_dim, cfg)`.
    pub fn init(input_dim: usize, cfg: &FeatureMapConfig) -> Result<Self> {
        cfg.validate()?;
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be >= 1".into()));
        }
        let mut rng = rng_from_seed(cfg.seed);
        let scale = cfg.weight_scale;
        let weights = Array2::from_shape_fn((input_dim, cfg.hidden), |_| {
            F::cast((2.0 * unit_f64(&mut rng) - 1.0) * scale)
        });
        let biases = Array1::from_shape_fn(cfg.hidden, |_| F::cast(unit_f64(&mut rng) * scale));
        Ok(Self {
            weights,
            biases,
            activation: cfg.activation,
        })
    }

    /// Rebuild from stored components (model deserialization path).
    pub fn from_parts(weights: Array2<F>, biases: Array1<F>, activation: Activation) -> Result<Self> {
        if weights.ncols() != biases.len() {
            return Err(Error::Shape {
                context: "feature map biases",
                expected: weights.ncols(),
                got: biases.len(),
            });
        }
        Ok(Self {
            weights,
            biases,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Width of the matrix [`transform`](Self::transform) produces.
    pub fn output_dim(&self, direct_links: bool) -> usize {
        if direct_links {
            self.input_dim() + self.hidden_dim()
        } else {
            self.hidden_dim()
        }
    }

    pub fn weights(&self) -> &Array2<F> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<F> {
        &self.biases
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Build the concatenation matrix `T = [X | act(X W + 1 b')]`, or just the
    /// hidden block when `direct_links` is false (the RVFLwoDL / ELM variant).
    pub fn transform(&self, x: &Array2<F>, direct_links: bool) -> Result<Array2<F>> {
        if x.ncols() != self.input_dim() {
            return Err(Error::Shape {
                context: "transform input columns",
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut hidden = x.dot(&self.weights);
        for mut row in hidden.axis_iter_mut(Axis(0)) {
            row.zip_mut_with(&self.biases, |h, &b| *h = *h + b);
        }
        hidden.mapv_inplace(|z| self.activation.apply(z));

        if direct_links {
            let n = x.nrows();
            let mut t = Array2::zeros((n, self.input_dim() + self.hidden_dim()));
            t.slice_mut(ndarray::s![.., ..self.input_dim()]).assign(x);
            t.slice_mut(ndarray::s![.., self.input_dim()..]).assign(&hidden);
            Ok(t)
        } else {
            Ok(hidden)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(hidden: usize, seed: u64) -> FeatureMapConfig {
        FeatureMapConfig {
            hidden,
            seed,
            ..FeatureMapConfig::default()
        }
    }

    #[test]
    fn seeded_init_is_bit_identical() {
        let a = FeatureMap::<f64>::init(5, &cfg(100, 42)).unwrap();
        let b = FeatureMap::<f64>::init(5, &cfg(100, 42)).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.biases(), b.biases());
        let c = FeatureMap::<f64>::init(5, &cfg(100, 43)).unwrap();
        assert_ne!(a.weights(), c.weights());
    }

    #[test]
    fn weight_support_respects_scale() {
        let fm = FeatureMap::<f64>::init(5, &cfg(100, 1)).unwrap();
        assert!(fm.weights().iter().all(|w| w.abs() <= 1.0));
        assert!(fm.biases().iter().all(|&b| (0.0..=1.0).contains(&b)));

        let wide = FeatureMapConfig {
            weight_scale: 3.0,
            ..cfg(200, 2)
        };
        let fm = FeatureMap::<f64>::init(4, &wide).unwrap();
        assert!(fm.weights().iter().all(|w| w.abs() <= 3.0));
        assert!(fm.weights().iter().any(|w| w.abs() > 1.0));
    }

    #[test]
    fn shape_contract() {
        let fm = FeatureMap::<f64>::init(3, &cfg(1, 7)).unwrap();
        assert_eq!(fm.weights().dim(), (3, 1));
        assert_eq!(fm.biases().len(), 1);
        assert_eq!(fm.output_dim(true), 4);
        assert_eq!(fm.output_dim(false), 1);
    }

    #[test]
    fn zero_input_and_config_errors() {
        assert!(FeatureMap::<f64>::init(0, &cfg(10, 1)).is_err());
        assert!(FeatureMap::<f64>::init(3, &cfg(0, 1)).is_err());
        let bad = FeatureMapConfig {
            weight_scale: 0.0,
            ..cfg(10, 1)
        };
        assert!(FeatureMap::<f64>::init(3, &bad).is_err());
    }

    #[test]
    fn transform_concatenates_and_preserves_direct_links() {
        let fm = FeatureMap::<f64>::init(2, &cfg(3, 5)).unwrap();
        let x = Array2::from_shape_vec((4, 2), vec![0.1, 0.9, -1.0, 2.0, 0.0, 0.0, 5.0, -5.0])
            .unwrap();
        let t = fm.transform(&x, true).unwrap();
        assert_eq!(t.dim(), (4, 5));
        // direct-link block equals X bitwise
        assert_eq!(t.slice(ndarray::s![.., ..2]), x);
        // hidden block identical to the no-direct-links variant (shared path)
        let h = fm.transform(&x, false).unwrap();
        assert_eq!(t.slice(ndarray::s![.., 2..]), h);
    }

    #[test]
    fn sigmoid_outputs_stay_in_unit_interval() {
        let fm = FeatureMap::<f64>::init(2, &cfg(50, 9)).unwrap();
        let x = Array2::from_shape_fn((10, 2), |(i, j)| (i as f64 - 5.0) * (j as f64 + 1.0));
        let h = fm.transform(&x, false).unwrap();
        assert!(h.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn zero_input_rows_give_sigmoid_of_bias() {
        let fm = FeatureMap::<f64>::init(2, &cfg(4, 11)).unwrap();
        let x = Array2::zeros((3, 2));
        let h = fm.transform(&x, false).unwrap();
        for row in h.axis_iter(Axis(0)) {
            for (j, &v) in row.iter().enumerate() {
                let expected = 1.0 / (1.0 + (-fm.biases()[j]).exp());
                assert_eq!(v, expected);
            }
        }
    }

    #[test]
    fn transform_rejects_dimension_mismatch() {
        let fm = FeatureMap::<f64>::init(3, &cfg(4, 1)).unwrap();
        let x = Array2::<f64>::zeros((2, 2));
        assert!(matches!(fm.transform(&x, true), Err(Error::Shape { .. })));
    }

    #[test]
    fn relu_and_tanh_apply() {
        assert_eq!(Activation::Relu.apply(-2.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.0), 2.0);
        assert!((Activation::Tanh.apply(0.5f64) - 0.5f64.tanh()).abs() < 1e-15);
        assert_eq!("relu".parse::<Activation>().unwrap(), Activation::Relu);
        assert!("softmax".parse::<Activation>().is_err());
    }
}
