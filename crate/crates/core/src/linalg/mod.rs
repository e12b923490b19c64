//! Scalar, vector and subspace arithmetic shared by the analysis modules.

mod dense;
mod matrix;
mod scalar;
mod subspace;

pub use dense::{singular_values, symmetric_eigenvalues};
pub use matrix::{
    column, determinant, from_columns, hodge_complement, identity, is_zero_matrix, kernel,
    mat_mul, mat_vec, semidefiniteness, transpose, zeros, Definiteness,
};
pub use scalar::{format_rational, parse_rational, to_numbers, Mode, Number, Rational, Scalar};
pub use subspace::{Subspace, Tolerance};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("arithmetic modes cannot be mixed within one computation")]
    ModeMismatch,
    #[error("expected {expected} vectors, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("tolerance must be a finite nonnegative number, got {0}")]
    BadTolerance(f64),
    #[error("{0}")]
    ParseNumber(String),
}

pub type Vector<T> = Vec<T>;
/// Row-major dense matrix.
pub type Matrix<T> = Vec<Vec<T>>;

pub(crate) fn check_len<T>(v: &[T], n: usize) -> Result<(), LinalgError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected: n, found: v.len() })
    }
}

pub fn unit<T: Scalar>(n: usize, i: usize) -> Vector<T> {
    let mut v = vec![T::zero(); n];
    v[i] = T::one();
    v
}

pub fn dot<T: Scalar>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn add<T: Scalar>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn sub<T: Scalar>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn scale<T: Scalar>(s: &T, v: &[T]) -> Vector<T> {
    v.iter().map(|a| s.clone() * a.clone()).collect()
}

pub fn hadamard<T: Scalar>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() * b.clone()).collect()
}

pub fn is_zero_vec<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn to_f64_vec<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

pub fn to_rational_vec<T: Scalar>(v: &[T]) -> Vec<Rational> {
    v.iter().map(Scalar::to_rational).collect()
}

pub fn convert_vec<S: Scalar, T: Scalar>(v: &[S]) -> Vec<T> {
    v.iter().map(|x| T::from_rational(&x.to_rational())).collect()
}

pub fn convert_mat<S: Scalar, T: Scalar>(m: &[Vec<S>]) -> Matrix<T> {
    m.iter().map(|row| convert_vec(row)).collect()
}

/// Builds a vector from integer literals.
pub fn ivec<T: Scalar>(v: &[i64]) -> Vector<T> {
    v.iter().map(|&x| T::int(x)).collect()
}

/// Builds a matrix from integer literal rows.
pub fn imat<T: Scalar>(rows: &[&[i64]]) -> Matrix<T> {
    rows.iter().map(|r| ivec(r)).collect()
}
