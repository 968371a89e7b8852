//! Minimal dense vector/matrix arithmetic.
//!
//! Values are immutable in spirit: every library operation returns fresh
//! storage or writes into a caller-provided buffer (`*_into` variants used on
//! hot paths). No BLAS, no sparsity; sizes here are desk-scale.

use crate::error::{Error, Result};
use crate::scalar::Real;
use std::ops::{Index, IndexMut};

/// Dense column vector of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector<T> {
    data: Vec<T>,
}

impl<T: Real> Vector<T> {
    pub fn zeros(n: usize) -> Self {
        Vector {
            data: vec![T::zero(); n],
        }
    }

    pub fn from_vec(data: Vec<T>) -> Self {
        Vector { data }
    }

    pub fn from_slice(data: &[T]) -> Self {
        Vector {
            data: data.to_vec(),
        }
    }

    /// Vector of all ones, `e` in the usual notation.
    pub fn ones(n: usize) -> Self {
        Vector {
            data: vec![T::one(); n],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector<T>) -> T {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        dot_slices(&self.data, &other.data)
    }

    pub fn norm2(&self) -> T {
        norm2_slice(&self.data)
    }

    pub fn norm_inf(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Smallest absolute entry; the quantity the adjoint bounds key on.
    pub fn min_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::infinity(), |m, &v| m.min(v.abs()))
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: T, other: &Vector<T>) {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + c * b;
        }
    }

    pub fn scale(&mut self, c: T) {
        for a in &mut self.data {
            *a = *a * c;
        }
    }

    pub fn scaled(&self, c: T) -> Vector<T> {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    #[inline]
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.data[i]
    }
}

#[inline]
fn dot_slices<T: Real>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (&x, &y) in a.iter().zip(b.iter()) {
        acc = acc + x * y;
    }
    acc
}

#[inline]
fn norm2_slice<T: Real>(a: &[T]) -> T {
    dot_slices(a, a).sqrt()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dims must be >= 1");
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(
                "Matrix::from_vec",
                format!("{} entries for {}x{}", data.len(), rows, cols),
            ));
        }
        if rows == 0 || cols == 0 {
            return Err(Error::dim("Matrix::from_vec", "zero dimension"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        assert!(!rows.is_empty(), "from_rows: no rows");
        let cols = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "from_rows: ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row_norm2(&self, i: usize) -> T {
        norm2_slice(self.row(i))
    }

    pub fn col_norm2(&self, j: usize) -> T {
        let mut acc = T::zero();
        for i in 0..self.rows {
            let v = self.get(i, j);
            acc = acc + v * v;
        }
        acc.sqrt()
    }

    pub fn frobenius_norm(&self) -> T {
        norm2_slice(&self.data)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn transposed(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scale(&mut self, c: T) {
        for v in &mut self.data {
            *v = *v * c;
        }
    }

    pub fn scaled(&self, c: T) -> Matrix<T> {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: T, other: &Matrix<T>) {
        assert_eq!(self.rows, other.rows, "add_scaled: row mismatch");
        assert_eq!(self.cols, other.cols, "add_scaled: col mismatch");
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + c * b;
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.rows != other.rows {
            return Err(Error::dim("hstack", "row count mismatch"));
        }
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            out.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            out.row_mut(i)[self.cols..].copy_from_slice(other.row(i));
        }
        Ok(out)
    }

    /// Append a column vector on the right.
    pub fn hstack_col(&self, col: &Vector<T>) -> Result<Matrix<T>> {
        if self.rows != col.len() {
            return Err(Error::dim("hstack_col", "row count mismatch"));
        }
        let mut out = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            out.row_mut(i)[..self.cols].copy_from_slice(self.row(i));
            out.set(i, self.cols, col[i]);
        }
        Ok(out)
    }

    /// `A x`
    pub fn matvec(&self, x: &Vector<T>) -> Result<Vector<T>> {
        if self.cols != x.len() {
            return Err(Error::dim(
                "matvec",
                format!("{}x{} times vector of length {}", self.rows, self.cols, x.len()),
            ));
        }
        let mut out = Vector::zeros(self.rows);
        self.matvec_into(x.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `A x` into a caller buffer; shapes must already be correct.
    #[inline]
    pub fn matvec_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot_slices(self.row(i), x);
        }
    }

    /// `A^T y`
    pub fn transpose_matvec(&self, y: &Vector<T>) -> Result<Vector<T>> {
        if self.rows != y.len() {
            return Err(Error::dim(
                "transpose_matvec",
                format!("{}x{} transposed times vector of length {}", self.rows, self.cols, y.len()),
            ));
        }
        let mut out = Vector::zeros(self.cols);
        self.transpose_matvec_into(y.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    /// `A^T y` into a caller buffer; shapes must already be correct.
    #[inline]
    pub fn transpose_matvec_into(&self, y: &[T], out: &mut [T]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        for o in out.iter_mut() {
            *o = T::zero();
        }
        for (i, &yi) in y.iter().enumerate() {
            let row = self.row(i);
            for (o, &a) in out.iter_mut().zip(row.iter()) {
                *o = *o + a * yi;
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Largest singular value estimate and whether the iteration converged
/// within the requested tolerance.
#[derive(Debug, Clone, Copy)]
pub struct SpectralNorm<T> {
    pub value: T,
    pub converged: bool,
}

const SPECTRAL_MAX_ITERS: usize = 10_000;

/// Largest singular value via power iteration on `A^T A`.
///
/// The start vector is the normalized all-ones vector; if that happens to lie
/// in the null space, canonical basis vectors are tried in order. The
/// Rayleigh-quotient estimate never exceeds the true value, so callers that
/// need an upper bound must inflate the result.
pub fn spectral_norm_with_status<T: Real>(a: &Matrix<T>, tol: T) -> SpectralNorm<T> {
    assert!(tol > T::zero(), "spectral_norm: tol must be positive");
    let n = a.cols();
    let mut x = Vector::ones(n);
    x.scale(T::one() / T::from_usize(n).sqrt());

    let mut ax = Vector::zeros(a.rows());
    a.matvec_into(x.as_slice(), ax.as_mut_slice());
    if ax.norm2() == T::zero() {
        // All-ones start is annihilated; probe the basis vectors.
        let mut found = false;
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = T::one();
            a.matvec_into(e.as_slice(), ax.as_mut_slice());
            if ax.norm2() > T::zero() {
                x = e;
                found = true;
                break;
            }
        }
        if !found {
            return SpectralNorm {
                value: T::zero(),
                converged: true,
            };
        }
    }

    let mut sigma = T::zero();
    let mut w = Vector::zeros(n);
    for _ in 0..SPECTRAL_MAX_ITERS {
        a.matvec_into(x.as_slice(), ax.as_mut_slice());
        let new_sigma = ax.norm2();
        a.transpose_matvec_into(ax.as_slice(), w.as_mut_slice());
        let wn = w.norm2();
        if wn == T::zero() {
            return SpectralNorm {
                value: new_sigma,
                converged: true,
            };
        }
        for (xi, &wi) in x.as_mut_slice().iter_mut().zip(w.iter()) {
            *xi = wi / wn;
        }
        if (new_sigma - sigma).abs() <= tol * new_sigma.max(T::min_positive_value()) {
            return SpectralNorm {
                value: new_sigma,
                converged: true,
            };
        }
        sigma = new_sigma;
    }
    SpectralNorm {
        value: sigma,
        converged: false,
    }
}

/// Largest singular value of `A` within relative `tol`.
pub fn spectral_norm<T: Real>(a: &Matrix<T>, tol: T) -> T {
    spectral_norm_with_status(a, tol).value
}
