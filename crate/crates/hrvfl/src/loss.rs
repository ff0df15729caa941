//! Loss functions over a scalar residual: the bounded, smooth, insensitive-zone
//! HawkEye loss and the squared-error baseline, each as a value/gradient pair.
//!
//! The HawkEye loss with bounding parameter `lambda`, shape parameter `a`, and
//! insensitivity half-width `epsilon` is
//!
//! ```text
//!          | lambda * (1 - (1 - a*(x+eps)) * exp( a*(x+eps)))   x <= -eps
//! L(x)  =  | 0                                                  -eps < x < eps
//!          | lambda * (1 - (1 + a*(x-eps)) * exp(-a*(x-eps)))   x >=  eps
//! ```
//!
//! Both outer branches collapse to `lambda * (1 - (1 + a*t) * exp(-a*t))` with
//! `t = |x| - eps >= 0`, which is the form evaluated here: `exp` always sees a
//! non-positive argument, so the large-residual regime underflows smoothly to
//! the bound instead of producing `inf * 0`.
//!
//! The derivative is `sign(x) * lambda * a^2 * t * exp(-a*t)` outside the zone
//! and exactly zero on `[-eps, eps]`; it is continuous everywhere, peaks at
//! `|x| = eps + 1/a` with magnitude `lambda * a / e`, and decays back to zero,
//! which is what caps any single outlier's influence.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of the HawkEye loss: `lambda > 0` bounds the loss value,
/// `a > 0` shapes the rise and decay, `epsilon >= 0` is the half-width of the
/// zero-loss tolerance zone (`epsilon = 0` degenerates to a bounded loss with
/// no tolerance zone).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HLossParams<F> {
    pub lambda: F,
    pub a: F,
    pub epsilon: F,
}

impl<F: Scalar> HLossParams<F> {
    pub fn new(lambda: F, a: F, epsilon: F) -> Result<Self> {
        if !lambda.is_finite() || !a.is_finite() || !epsilon.is_finite() {
            return Err(Error::NonFinite {
                what: "HawkEye loss parameter",
            });
        }
        if lambda <= F::zero() {
            return Err(Error::Config(format!("lambda must be > 0, got {lambda}")));
        }
        if a <= F::zero() {
            return Err(Error::Config(format!("a must be > 0, got {a}")));
        }
        if epsilon < F::zero() {
            return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(Self { lambda, a, epsilon })
    }
}

/// Loss choice for a model: the HawkEye loss or the squared-error baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind<F> {
    Squared,
    #[serde(rename = "hawkeye")]
    HawkEye(HLossParams<F>),
}

impl<F: Scalar> LossKind<F> {
    /// Loss value at residual `x`. Assumes `x` finite.
    pub fn value(&self, x: F) -> F {
        match self {
            LossKind::Squared => x * x,
            LossKind::HawkEye(p) => hloss_value_raw(x, p),
        }
    }

    /// Loss derivative at residual `x`. Assumes `x` finite.
    pub fn grad(&self, x: F) -> F {
        match self {
            LossKind::Squared => (F::one() + F::one()) * x,
            LossKind::HawkEye(p) => hloss_grad_raw(x, p),
        }
    }
}

fn hloss_value_raw<F: Scalar>(x: F, p: &HLossParams<F>) -> F {
    let t = x.abs() - p.epsilon;
    if t <= F::zero() {
        return F::zero();
    }
    let at = p.a * t;
    let v = p.lambda * (F::one() - (F::one() + at) * (-at).exp());
    // The analytic value is strictly below lambda for every finite x, but once
    // (1 + a*t) * exp(-a*t) drops under half an ulp of 1 the subtraction rounds
    // to lambda exactly. Saturate one representable step below instead; this
    // also keeps the plateau non-decreasing.
    let cap = p.lambda * (F::one() - F::epsilon());
    if v > cap {
        cap
    } else {
        v
    }
}

fn hloss_grad_raw<F: Scalar>(x: F, p: &HLossParams<F>) -> F {
    let t = x.abs() - p.epsilon;
    if t <= F::zero() {
        return F::zero();
    }
    let at = p.a * t;
    let magnitude = p.lambda * p.a * p.a * t * (-at).exp();
    if x < F::zero() {
        -magnitude
    } else {
        magnitude
    }
}

fn check_finite<F: Scalar>(x: F) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { what: "residual" })
    }
}

/// HawkEye loss value at residual `x`. Result lies in `[0, lambda)` and is
/// exactly zero whenever `|x| <= epsilon`.
pub fn hloss_value<F: Scalar>(x: F, p: &HLossParams<F>) -> Result<F> {
    check_finite(x)?;
    Ok(hloss_value_raw(x, p))
}

/// HawkEye loss derivative at residual `x`. Continuous everywhere, zero on
/// `[-epsilon, epsilon]`.
pub fn hloss_grad<F: Scalar>(x: F, p: &HLossParams<F>) -> Result<F> {
    check_finite(x)?;
    Ok(hloss_grad_raw(x, p))
}

/// Squared-error loss value `x^2` (per-sample term; any averaging belongs to
/// the objective).
pub fn sqloss_value<F: Scalar>(x: F) -> Result<F> {
    check_finite(x)?;
    Ok(x * x)
}

/// Squared-error loss derivative `2x`.
pub fn sqloss_grad<F: Scalar>(x: F) -> Result<F> {
    check_finite(x)?;
    Ok((F::one() + F::one()) * x)
}

/// Elementwise HawkEye loss over a residual vector; identical to mapping
/// [`hloss_value`] over the entries.
pub fn hloss_values<F: Scalar>(xs: &Array1<F>, p: &HLossParams<F>) -> Result<Array1<F>> {
    for &x in xs {
        check_finite(x)?;
    }
    Ok(xs.mapv(|x| hloss_value_raw(x, p)))
}

/// Elementwise HawkEye loss derivative over a residual vector.
pub fn hloss_grads<F: Scalar>(xs: &Array1<F>, p: &HLossParams<F>) -> Result<Array1<F>> {
    for &x in xs {
        check_finite(x)?;
    }
    Ok(xs.mapv(|x| hloss_grad_raw(x, p)))
}

/// One sample of a loss curve: the residual and the loss value/derivative at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint<F> {
    pub x: F,
    pub value: F,
    pub grad: F,
}

/// Sample `(x, L(x), L'(x))` at `points` equally spaced residuals over
/// `[x_min, x_max]`, endpoints included.
pub fn sample_curve<F: Scalar>(
    p: &HLossParams<F>,
    x_min: F,
    x_max: F,
    points: usize,
) -> Result<Vec<CurvePoint<F>>> {
    if !x_min.is_finite() || !x_max.is_finite() {
        return Err(Error::NonFinite { what: "curve range" });
    }
    if points < 2 || x_min >= x_max {
        return Err(Error::Config(
            "curve needs points >= 2 and x_min < x_max".into(),
        ));
    }
    let step = (x_max - x_min) / F::cast((points - 1) as f64);
    Ok((0..points)
        .map(|i| {
            let x = if i == points - 1 {
                x_max
            } else {
                x_min + step * F::cast(i as f64)
            };
            CurvePoint {
                x,
                value: hloss_value_raw(x, p),
                grad: hloss_grad_raw(x, p),
            }
        })
        .collect())
}
