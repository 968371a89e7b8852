//! Region algebra: layer parameters realizing Boolean set operations,
//! transition-boundary analytics, generalized first-layer primitives, and the
//! arrangement region count.
//!
//! Boolean-region outputs are judged by sign: positive means membership. With
//! idealized step inputs every operator below classifies exactly; with
//! sigmoid inputs the same parameters give the soft version of the region.

use crate::activation::sigma_inverse;
use crate::dense::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::scalar::Real;
use num_bigint::BigUint;

/// A Boolean combination of input regions, realized as one unit of a layer.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionOp<T> {
    /// Entire domain (`true`) or empty set (`false`).
    Constant(bool),
    Identity,
    Complement,
    /// n-ary intersection, `n >= 2`.
    Intersection(usize),
    /// n-ary union, `n >= 2`.
    Union(usize),
    /// Membership in at least `k` of the weighted input regions; weights must
    /// be strictly positive and say how often each region is counted.
    KofN { weights: Vector<T>, k: usize },
}

/// Weight row and bias realizing a [`RegionOp`] on step inputs in `{-1, +1}`.
///
/// Unary operators and constants return 1-column rows; callers pad with
/// zeros to the width of the actual input layer. Constants use `|b| = 100`
/// with the sign chosen so that `act(A x - b)` saturates at the requested
/// value. The binary union keeps the classic `b = -1.5`; wider unions
/// generalize as `-(n - 1.5)` and intersections as `n - 0.5`.
pub fn op_to_layer<T: Real>(op: &RegionOp<T>) -> Result<(Matrix<T>, Vector<T>)> {
    let c100 = T::from_f64(100.0);
    match op {
        RegionOp::Constant(value) => {
            let b = if *value { -c100 } else { c100 };
            Ok((Matrix::zeros(1, 1), Vector::from_vec(vec![b])))
        }
        RegionOp::Identity => Ok((
            Matrix::from_rows(&[&[T::one()]]),
            Vector::zeros(1),
        )),
        RegionOp::Complement => Ok((
            Matrix::from_rows(&[&[-T::one()]]),
            Vector::zeros(1),
        )),
        RegionOp::Intersection(n) => {
            if *n < 2 {
                return Err(Error::Config("intersection arity must be >= 2".into()));
            }
            let a = Matrix::from_vec(1, *n, vec![T::one(); *n])?;
            let b = T::from_usize(*n) - T::half();
            Ok((a, Vector::from_vec(vec![b])))
        }
        RegionOp::Union(n) => {
            if *n < 2 {
                return Err(Error::Config("union arity must be >= 2".into()));
            }
            let a = Matrix::from_vec(1, *n, vec![T::one(); *n])?;
            let b = if *n == 2 {
                T::from_f64(-1.5)
            } else {
                -(T::from_usize(*n) - T::from_f64(1.5))
            };
            Ok((a, Vector::from_vec(vec![b])))
        }
        RegionOp::KofN { weights, k } => kofn_layer(weights, *k),
    }
}

/// At-least-`k`-of-`n` layer for step inputs in `{-1, +1}`.
///
/// With strictly positive integer-valued weights, a region with weight `w`
/// counts `w` times, so the effective input count is `sum(weights)` and the
/// bias is `2k - sum(weights) - 1`. Unit weights recover the plain k-of-n
/// threshold.
pub fn kofn_layer<T: Real>(weights: &Vector<T>, k: usize) -> Result<(Matrix<T>, Vector<T>)> {
    if weights.is_empty() {
        return Err(Error::Config("k-of-n needs at least one weight".into()));
    }
    let mut total = T::zero();
    for &w in weights.iter() {
        if !(w > T::zero()) {
            return Err(Error::Config("k-of-n weights must be strictly positive".into()));
        }
        total = total + w;
    }
    let kf = T::from_usize(k);
    if k < 1 || kf > total {
        return Err(Error::Config(format!(
            "k = {k} out of range for total weight {total}"
        )));
    }
    let a = Matrix::from_vec(1, weights.len(), weights.as_slice().to_vec())?;
    let b = T::two() * kf - total - T::one();
    Ok((a, Vector::from_vec(vec![b])))
}

/// Asymptotic displacement of a combined region's boundary from the ideal
/// set-operation boundary: `sigma_inverse(beta - 1)` for `beta` in (0, 2).
pub fn transition_shift<T: Real>(beta: T) -> Result<T> {
    if !(beta > T::zero() && beta < T::two()) {
        return Err(Error::domain(
            "transition_shift",
            format!("beta = {beta} outside (0, 2)"),
        ));
    }
    sigma_inverse(T::one(), beta - T::one())
}

/// Asymptotic width of the band where the combined output
/// `sigma_gamma(sigma(x) + sigma(y) - beta)` stays within `[-level, level]`
/// as `x` grows. Returns `+inf` once either level contour escapes along the
/// diagonal, which happens when `beta - 1 ± m` leaves `(-1, 1)` for
/// `m = sigma_inverse(level) / gamma`.
pub fn transition_width<T: Real>(beta: T, gamma: T, level: T) -> Result<T> {
    if !(gamma > T::zero()) {
        return Err(Error::domain("transition_width", "gamma must be > 0"));
    }
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::domain(
            "transition_width",
            format!("level = {level} outside (0, 1)"),
        ));
    }
    let m = sigma_inverse(T::one(), level)? / gamma;
    let lo = beta - T::one() - m;
    let hi = beta - T::one() + m;
    if lo <= -T::one() || hi >= T::one() {
        return Ok(T::infinity());
    }
    Ok(sigma_inverse(T::one(), hi)? - sigma_inverse(T::one(), lo)?)
}

/// Gain needed so that the combined output `sigma(gamma (2 - beta))` reaches
/// `target`: `gamma = sigma_inverse(target) / (2 - beta)`.
pub fn amplification_for_range<T: Real>(beta: T, target: T) -> Result<T> {
    if beta >= T::two() {
        return Err(Error::domain(
            "amplification_for_range",
            format!("beta = {beta} must be < 2"),
        ));
    }
    if !(target > T::zero() && target < T::one()) {
        return Err(Error::domain(
            "amplification_for_range",
            format!("target = {target} outside (0, 1)"),
        ));
    }
    Ok(sigma_inverse(T::one(), target)? / (T::two() - beta))
}

/// Maximum number of regions `n` hyperplanes cut `R^d` into:
/// `sum_{i=0}^{d} C(n, i)`, exact.
pub fn count_regions(n: usize, d: usize) -> BigUint {
    assert!(d >= 1, "dimension must be >= 1");
    let mut total = BigUint::from(0u32);
    let mut binom = BigUint::from(1u32); // C(n, 0)
    for i in 0..=d {
        if i > n {
            break;
        }
        if i > 0 {
            // C(n, i) = C(n, i-1) * (n - i + 1) / i
            binom = binom * BigUint::from(n - i + 1) / BigUint::from(i);
        }
        total += &binom;
    }
    total
}

/// Geometric primitive evaluated by a generalized first-layer unit.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive<T> {
    /// `<a, x> + beta`; note the plus sign on the offset here.
    Hyperplane { a: Vector<T>, beta: T },
    /// `alpha * ||A x - b||^2 + beta`.
    Ellipsoid {
        a: Matrix<T>,
        b: Vector<T>,
        alpha: T,
        beta: T,
    },
}

impl<T: Real> Primitive<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Primitive::Hyperplane { a, .. } => {
                if a.norm2() == T::zero() {
                    return Err(Error::Config("hyperplane normal must be nonzero".into()));
                }
            }
            Primitive::Ellipsoid { a, b, .. } => {
                if a.rows() != b.len() {
                    return Err(Error::dim("Primitive::Ellipsoid", "A rows vs b length"));
                }
            }
        }
        Ok(())
    }
}

/// Raw pre-activation value of a primitive at `x`.
pub fn primitive_eval<T: Real>(p: &Primitive<T>, x: &Vector<T>) -> Result<T> {
    match p {
        Primitive::Hyperplane { a, beta } => {
            if a.len() != x.len() {
                return Err(Error::dim("primitive_eval", "hyperplane dimension"));
            }
            Ok(a.dot(x) + *beta)
        }
        Primitive::Ellipsoid { a, b, alpha, beta } => {
            let mut r = a.matvec(x)?;
            r.add_scaled(-T::one(), b);
            Ok(*alpha * r.dot(&r) + *beta)
        }
    }
}
