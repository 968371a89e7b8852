//! Scalar and vector nonlinearities with their exact derivatives.
//!
//! The workhorse is the symmetric sigmoid `sigma(g, x) = 2*logistic(g, x) - 1
//! = tanh(g*x/2)`, evaluated through `tanh` so large gains never overflow.

use crate::dense::Vector;
use crate::error::{Error, Result};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// The nonlinearity attached to a layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation<T> {
    /// Symmetric sigmoid with gain `gamma`, range (-1, 1).
    Sigmoid { gamma: T },
    /// Logistic with gain `gamma`, range (0, 1).
    Logistic { gamma: T },
    /// Hard sign; `step(0) = +1` so the nonnegative side is a halfspace.
    Step,
    Softmax,
    Identity,
}

impl<T: Real> Activation<T> {
    pub fn sigmoid(gamma: T) -> Self {
        Activation::Sigmoid { gamma }
    }

    pub fn logistic(gamma: T) -> Self {
        Activation::Logistic { gamma }
    }

    /// Gains must be finite and positive where present.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::Sigmoid { gamma } | Activation::Logistic { gamma } => {
                if gamma.is_finite() && gamma > T::zero() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("activation gain must be finite and > 0, got {gamma}")))
                }
            }
            _ => Ok(()),
        }
    }

    pub fn is_elementwise(&self) -> bool {
        !matches!(self, Activation::Softmax)
    }

    pub fn apply_into(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), out.len());
        match *self {
            Activation::Sigmoid { gamma } => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = sigma(gamma, x);
                }
            }
            Activation::Logistic { gamma } => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = logistic(gamma, x);
                }
            }
            Activation::Step => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = if x >= T::zero() { T::one() } else { -T::one() };
                }
            }
            Activation::Softmax => softmax_into(v, out),
            Activation::Identity => out.copy_from_slice(v),
        }
    }

    /// Elementwise derivative at pre-activation `v`; the backward mask.
    ///
    /// Softmax is handled jointly with the loss and has no elementwise mask;
    /// Step is flat almost everywhere.
    pub fn derivative_into(&self, v: &[T], out: &mut [T]) {
        debug_assert_eq!(v.len(), out.len());
        match *self {
            Activation::Sigmoid { gamma } => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = sigma_prime(gamma, x);
                }
            }
            Activation::Logistic { gamma } => {
                for (o, &x) in out.iter_mut().zip(v) {
                    *o = logistic_prime(gamma, x);
                }
            }
            Activation::Step => {
                for o in out.iter_mut() {
                    *o = T::zero();
                }
            }
            Activation::Identity => {
                for o in out.iter_mut() {
                    *o = T::one();
                }
            }
            Activation::Softmax => panic!("softmax has no elementwise derivative mask"),
        }
    }

    /// Largest possible mask value given that the smallest `|v|` entry is `m`.
    /// The sigmoid/logistic derivatives are even and peak at zero, so the
    /// entry of minimum modulus dominates.
    pub fn max_derivative_at_min_abs(&self, m: T) -> Result<T> {
        match *self {
            Activation::Sigmoid { gamma } => Ok(sigma_prime(gamma, m)),
            Activation::Logistic { gamma } => Ok(logistic_prime(gamma, m)),
            Activation::Identity => Ok(T::one()),
            Activation::Step => Ok(T::zero()),
            Activation::Softmax => Err(Error::Config(
                "softmax layers cannot appear below a cutoff bound".into(),
            )),
        }
    }
}

/// Logistic `1 / (1 + exp(-g x))`, evaluated without overflow on either tail.
#[inline]
pub fn logistic<T: Real>(gamma: T, x: T) -> T {
    let t = gamma * x;
    if t >= T::zero() {
        T::one() / (T::one() + (-t).exp())
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `d/dx logistic(g, x) = g * (l - l^2)`; positive, even in `x`, max `g/4`.
#[inline]
pub fn logistic_prime<T: Real>(gamma: T, x: T) -> T {
    let l = logistic(gamma, x);
    gamma * (l - l * l)
}

/// Symmetric sigmoid `2 logistic(g, x) - 1 = tanh(g x / 2)`.
#[inline]
pub fn sigma<T: Real>(gamma: T, x: T) -> T {
    (gamma * x * T::half()).tanh()
}

/// `d/dx sigma(g, x) = 2 g (l - l^2) = g (1 - sigma^2) / 2`; max `g/2` at zero.
#[inline]
pub fn sigma_prime<T: Real>(gamma: T, x: T) -> T {
    let s = sigma(gamma, x);
    gamma * (T::one() - s * s) * T::half()
}

/// Inverse of the symmetric sigmoid on `(-1, 1)`.
pub fn sigma_inverse<T: Real>(gamma: T, y: T) -> Result<T> {
    if !(y > -T::one() && y < T::one()) {
        return Err(Error::domain(
            "sigma_inverse",
            format!("value {y} outside (-1, 1)"),
        ));
    }
    Ok(T::two() / gamma * y.atanh())
}

/// `d/dx [-log logistic(g, x)] = g (logistic(g, x) - 1)`; always negative,
/// tending to 0 as `x -> inf` and to `-g` as `x -> -inf`.
#[inline]
pub fn neg_log_logistic_prime<T: Real>(gamma: T, x: T) -> T {
    -gamma * logistic(gamma, -x)
}

/// `-log logistic(g, x) = softplus(-g x)`, stable on both tails.
#[inline]
pub fn neg_log_logistic<T: Real>(gamma: T, x: T) -> T {
    softplus(-gamma * x)
}

/// `log(1 + exp(t))` without overflow.
#[inline]
pub fn softplus<T: Real>(t: T) -> T {
    if t > T::from_f64(30.0) {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn softmax_into<T: Real>(v: &[T], out: &mut [T]) {
    debug_assert!(!v.is_empty());
    let m = v.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut sum = T::zero();
    for (o, &x) in out.iter_mut().zip(v) {
        let e = (x - m).exp();
        *o = e;
        sum = sum + e;
    }
    for o in out.iter_mut() {
        *o = *o / sum;
    }
}

/// Softmax with max-subtraction; entries in (0,1), summing to one.
pub fn softmax<T: Real>(v: &Vector<T>) -> Result<Vector<T>> {
    if v.is_empty() {
        return Err(Error::domain("softmax", "empty input"));
    }
    if !v.all_finite() {
        return Err(Error::domain("softmax", "non-finite input"));
    }
    let mut out = Vector::zeros(v.len());
    softmax_into(v.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// `log(sum exp(v))` with max-subtraction.
pub fn log_sum_exp<T: Real>(v: &[T]) -> T {
    let m = v.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut sum = T::zero();
    for &x in v {
        sum = sum + (x - m).exp();
    }
    m + sum.ln()
}

/// Rewrites a layer expecting logistic-range inputs into one expecting
/// sigmoid-range inputs: `A l(v) - b == (A/2) s(v) - (b - A e / 2)`.
pub fn logistic_input_remap<T: Real>(
    a: &crate::dense::Matrix<T>,
    b: &Vector<T>,
) -> (crate::dense::Matrix<T>, Vector<T>) {
    let a_tilde = a.scaled(T::half());
    let mut b_tilde = b.clone();
    for i in 0..a.rows() {
        let row_sum = a.row(i).iter().fold(T::zero(), |s, &v| s + v);
        b_tilde[i] = b_tilde[i] - row_sum * T::half();
    }
    (a_tilde, b_tilde)
}
