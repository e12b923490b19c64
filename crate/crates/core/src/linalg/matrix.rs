use serde::{Deserialize, Serialize};

use super::dense::{float_kernel, symmetric_eigenvalues};
use super::{check_len, LinalgError, Matrix, Mode, Scalar, Vector};

pub fn zeros<T: Scalar>(rows: usize, cols: usize) -> Matrix<T> {
    vec![vec![T::zero(); cols]; rows]
}

pub fn identity<T: Scalar>(n: usize) -> Matrix<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn transpose<T: Scalar>(m: &[Vec<T>]) -> Matrix<T> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn column<T: Scalar>(m: &[Vec<T>], j: usize) -> Vector<T> {
    m.iter().map(|row| row[j].clone()).collect()
}

/// Assembles an `n × cols.len()` matrix from its columns.
pub fn from_columns<T: Scalar>(n: usize, cols: &[Vector<T>]) -> Matrix<T> {
    (0..n).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect()
}

pub fn mat_vec<T: Scalar>(m: &[Vec<T>], v: &[T]) -> Vector<T> {
    m.iter().map(|row| super::dot(row, v)).collect()
}

pub fn mat_mul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Matrix<T> {
    let bt = transpose(b);
    a.iter().map(|row| bt.iter().map(|col| super::dot(row, col)).collect()).collect()
}

pub fn is_zero_matrix<T: Scalar>(m: &[Vec<T>]) -> bool {
    m.iter().all(|row| super::is_zero_vec(row))
}

/// Determinant by Gaussian elimination (largest-magnitude pivot in float mode).
pub fn determinant<T: Scalar>(m: &[Vec<T>]) -> T {
    let n = m.len();
    let mut a: Matrix<T> = m.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = match T::MODE {
            Mode::Rational => (col..n).find(|&r| !a[r][col].is_zero()),
            Mode::Float => (col..n)
                .filter(|&r| !a[r][col].is_zero())
                .max_by(|&r, &s| a[r][col].magnitude().total_cmp(&a[s][col].magnitude())),
        };
        let Some(p) = pivot else {
            return T::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det = det * pv.clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / pv.clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Basis of `{x : M x = 0}` for an `m × ncols` matrix.
///
/// Exact mode returns the standard reduced-row-echelon basis (one vector per
/// free column). Float mode returns right singular vectors whose singular
/// value is at most `tol`.
pub fn kernel<T: Scalar>(m: &[Vec<T>], ncols: usize, tol: f64) -> Result<Vec<Vector<T>>, LinalgError> {
    for row in m {
        check_len(row, ncols)?;
    }
    if T::MODE == Mode::Float {
        let rows: Vec<Vec<f64>> = m.iter().map(|r| super::to_f64_vec(r)).collect();
        return Ok(float_kernel(&rows, ncols, tol)
            .into_iter()
            .map(|v| v.into_iter().map(|x| T::from_rational(&x.to_rational())).collect())
            .collect());
    }
    let mut a: Matrix<T> = m.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(p, row);
        let pv = a[row][col].clone();
        for c in 0..ncols {
            a[row][c] = a[row][c].clone() / pv.clone();
        }
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..ncols {
                    let delta = factor.clone() * a[row][c].clone();
                    a[r][c] = a[r][c].clone() - delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    Ok(free
        .map(|f| {
            let mut v = vec![T::zero(); ncols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definiteness {
    Zero,
    PositiveSemidefinite,
    NegativeSemidefinite,
    Indefinite,
}

/// Classifies a symmetric matrix.
///
/// Exact mode uses the pivoted Schur-complement form of Sylvester's criterion;
/// float mode compares eigenvalue signs against `tol` times the spectral radius.
pub fn semidefiniteness<T: Scalar>(m: &[Vec<T>], tol: f64) -> Definiteness {
    match T::MODE {
        Mode::Rational => {
            if is_zero_matrix(m) {
                Definiteness::Zero
            } else if exact_psd(m.to_vec()) {
                Definiteness::PositiveSemidefinite
            } else if exact_psd(m.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect()) {
                Definiteness::NegativeSemidefinite
            } else {
                Definiteness::Indefinite
            }
        }
        Mode::Float => {
            let rows: Vec<Vec<f64>> = m.iter().map(|r| super::to_f64_vec(r)).collect();
            let ev = symmetric_eigenvalues(&rows);
            let radius = ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            let eps = tol.max(f64::EPSILON) * radius.max(1.0);
            if radius <= eps {
                Definiteness::Zero
            } else if ev.iter().all(|&x| x >= -eps) {
                Definiteness::PositiveSemidefinite
            } else if ev.iter().all(|&x| x <= eps) {
                Definiteness::NegativeSemidefinite
            } else {
                Definiteness::Indefinite
            }
        }
    }
}

// A symmetric matrix is PSD iff, pivoting on any positive diagonal entry, its
// Schur complement is PSD; a zero diagonal entry forces a zero row.
fn exact_psd<T: Scalar>(mut a: Matrix<T>) -> bool {
    loop {
        let n = a.len();
        if n == 0 {
            return true;
        }
        if a.iter().enumerate().any(|(i, row)| row[i].is_negative()) {
            return false;
        }
        let Some(p) = (0..n).find(|&i| a[i][i].is_positive()) else {
            return is_zero_matrix(&a);
        };
        let pv = a[p][p].clone();
        let keep: Vec<usize> = (0..n).filter(|&i| i != p).collect();
        a = keep
            .iter()
            .map(|&i| {
                keep.iter()
                    .map(|&j| a[i][j].clone() - a[i][p].clone() * a[p][j].clone() / pv.clone())
                    .collect()
            })
            .collect();
    }
}

/// Generalized cross product of `n − 1` vectors in `ℝⁿ`.
///
/// Component `i` is the signed minor obtained by deleting column `i`, i.e. the
/// cofactor expansion of the formal determinant whose first row holds the unit
/// vectors. The result is orthogonal to every input and vanishes exactly when
/// the inputs are dependent.
pub fn hodge_complement<T: Scalar>(vectors: &[Vector<T>]) -> Result<Vector<T>, LinalgError> {
    let n = vectors.len() + 1;
    if n < 2 {
        return Err(LinalgError::WrongCount { expected: 1, found: 0 });
    }
    for v in vectors {
        check_len(v, n)?;
    }
    Ok((0..n)
        .map(|i| {
            let minor: Matrix<T> = vectors
                .iter()
                .map(|v| v.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| x.clone()).collect())
                .collect();
            let d = determinant(&minor);
            if i % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect())
}
