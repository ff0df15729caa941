//! Nesterov accelerated gradient with look-ahead evaluation, velocity update,
//! exponential learning-rate decay, per-iteration mini-batch sampling, and a
//! step-norm convergence check.
//!
//! One step from `(beta_t, v_t, mu_t)` at 1-based iteration `t`:
//!
//! ```text
//! beta_look = beta_t + r * v_t          // gradient evaluated ahead
//! g_t       = grad(beta_look)
//! v_{t+1}   = r * v_t - mu_t * g_t
//! beta_{t+1} = beta_t + v_{t+1}
//! mu_{t+1}  = mu_t * exp(-eta * t)      // decay uses the current index t
//! ```
//!
//! The look-ahead coefficient is the momentum coefficient `r` (classical NAG
//! uses a single coefficient for both roles). The decay rule is applied
//! literally with `t` starting at 1, which makes the schedule super-exponential
//! in `t`; the default `eta = 1e-4` is small to compensate. Iteration stops
//! when the Euclidean step norm `||beta_{t+1} - beta_t||` falls below the
//! tolerance or the iteration cap is reached.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, sample_indices, Rng};
use crate::scalar::Scalar;

/// Mini-batch size: the full training set or a fixed sample count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSize {
    Full,
    Size(usize),
}

impl Serialize for BatchSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BatchSize::Full => s.serialize_str("all"),
            BatchSize::Size(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for BatchSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Count(usize),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s.eq_ignore_ascii_case("all") => Ok(BatchSize::Full),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "batch must be \"all\" or a positive integer, got \"{s}\""
            ))),
            Raw::Count(0) => Err(serde::de::Error::custom("batch size must be >= 1")),
            Raw::Count(k) => Ok(BatchSize::Size(k)),
        }
    }
}

/// NAG hyperparameters. Every field has a default, so partial configuration
/// tables deserialize against the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NagConfig {
    /// Momentum coefficient `r` in `[0, 1)`; also the look-ahead coefficient.
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    /// Initial learning rate `mu_0 > 0`.
    #[serde(default = "default_initial_lr")]
    pub initial_lr: f64,
    /// Learning-rate decay `eta >= 0` in `mu_{t+1} = mu_t * exp(-eta * t)`.
    #[serde(default = "default_decay")]
    pub decay: f64,
    /// Iteration cap `I >= 1`.
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Convergence tolerance `theta > 0` on the Euclidean step norm.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Samples per gradient estimate.
    #[serde(default = "default_batch")]
    pub batch: BatchSize,
    /// Seed for the mini-batch sampler.
    #[serde(default)]
    pub seed: u64,
}

fn default_momentum() -> f64 {
    0.9
}

fn default_initial_lr() -> f64 {
    0.01
}

fn default_decay() -> f64 {
    1e-4
}

fn default_max_iters() -> usize {
    1000
}

fn default_tol() -> f64 {
    1e-6
}

fn default_batch() -> BatchSize {
    BatchSize::Full
}

impl Default for NagConfig {
    fn default() -> Self {
        Self {
            momentum: default_momentum(),
            initial_lr: default_initial_lr(),
            decay: default_decay(),
            max_iters: default_max_iters(),
            tol: default_tol(),
            batch: default_batch(),
            seed: 0,
        }
    }
}

impl NagConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.initial_lr > 0.0) || !self.initial_lr.is_finite() {
            return Err(Error::Config(format!(
                "initial_lr must be positive and finite, got {}",
                self.initial_lr
            )));
        }
        if self.decay < 0.0 || !self.decay.is_finite() {
            return Err(Error::Config(format!(
                "decay must be >= 0, got {}",
                self.decay
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if let BatchSize::Size(0) = self.batch {
            return Err(Error::Config("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Optimizer iterate: parameters, velocity, current learning rate, and the
/// number of completed steps.
#[derive(Debug, Clone, PartialEq)]
pub struct NagState<F> {
    pub beta: Array1<F>,
    pub velocity: Array1<F>,
    pub lr: F,
    pub iter: usize,
}

impl<F: Scalar> NagState<F> {
    /// Fresh state at `init` with zero velocity and the configured initial rate.
    pub fn new(init: Array1<F>, cfg: &NagConfig) -> Self {
        let dim = init.len();
        Self {
            beta: init,
            velocity: Array1::zeros(dim),
            lr: F::cast(cfg.initial_lr),
            iter: 0,
        }
    }
}

/// Why the optimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Step norm fell below the tolerance.
    Tolerance,
    /// The iteration cap was reached.
    MaxIters,
}

/// Summary of a finished optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub reason: StopReason,
    pub iters: usize,
    pub final_step_norm: f64,
    pub final_lr: f64,
}

impl ConvergenceReport {
    /// One-line structured-text rendering (JSON).
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization")
    }
}

fn divergence_error<F: Scalar>(state: &NagState<F>) -> Error {
    Error::Divergence {
        iter: state.iter + 1,
        last_beta: state.beta.iter().map(|v| v.as_f64()).collect(),
    }
}

/// One NAG step. `grad_fn` is evaluated at the look-ahead point.
pub fn nag_step<F, G>(state: &NagState<F>, mut grad_fn: G, cfg: &NagConfig) -> Result<NagState<F>>
where
    F: Scalar,
    G: FnMut(&Array1<F>) -> Result<Array1<F>>,
{
    let r = F::cast(cfg.momentum);
    let look_ahead = &state.beta + &(&state.velocity * r);
    let grad = grad_fn(&look_ahead)?;
    if grad.len() != state.beta.len() {
        return Err(Error::Shape {
            context: "gradient dimension",
            expected: state.beta.len(),
            got: grad.len(),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(divergence_error(state));
    }
    let velocity = &(&state.velocity * r) - &(&grad * state.lr);
    let beta = &state.beta + &velocity;
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(divergence_error(state));
    }
    let step_index = state.iter + 1; // 1-based index of the step just taken
    let lr = state.lr * F::cast(-(cfg.decay) * step_index as f64).exp();
    Ok(NagState {
        beta,
        velocity,
        lr,
        iter: step_index,
    })
}

fn draw_batch(rng: &mut Rng, n: usize, cfg: &NagConfig) -> Vec<usize> {
    match cfg.batch {
        BatchSize::Full => (0..n).collect(),
        BatchSize::Size(k) => sample_indices(rng, n, k.min(n)),
    }
}

/// Run NAG to convergence. `objective_grad(beta, batch)` must return the
/// gradient over the given sample indices; a fresh mini-batch is drawn
/// uniformly without replacement every iteration.
pub fn nag_minimize<F, G>(
    mut objective_grad: G,
    init: Array1<F>,
    n_samples: usize,
    cfg: &NagConfig,
) -> Result<(Array1<F>, ConvergenceReport)>
where
    F: Scalar,
    G: FnMut(&Array1<F>, &[usize]) -> Result<Array1<F>>,
{
    cfg.validate()?;
    if let BatchSize::Size(k) = cfg.batch {
        if k > n_samples {
            return Err(Error::Config(format!(
                "batch size {k} exceeds sample count {n_samples}"
            )));
        }
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut state = NagState::new(init, cfg);
    let tol = cfg.tol;
    loop {
        let batch = draw_batch(&mut rng, n_samples, cfg);
        state = nag_step(&state, |beta| objective_grad(beta, &batch), cfg)?;
        let step_norm = state
            .velocity
            .iter()
            .map(|v| v.as_f64() * v.as_f64())
            .sum::<f64>()
            .sqrt();
        if step_norm < tol {
            let report = ConvergenceReport {
                reason: StopReason::Tolerance,
                iters: state.iter,
                final_step_norm: step_norm,
                final_lr: state.lr.as_f64(),
            };
            return Ok((state.beta, report));
        }
        if state.iter >= cfg.max_iters {
            let report = ConvergenceReport {
                reason: StopReason::MaxIters,
                iters: state.iter,
                final_step_norm: step_norm,
                final_lr: state.lr.as_f64(),
            };
            return Ok((state.beta, report));
        }
    }
}
