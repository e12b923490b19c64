//! Quadratic affine control systems
//!
//! ```text
//! ẋ = f₀(x) + u₁f₁ + … + u_{n−k}f_{n−k},   f₀(x) = Lx + Φ(x)
//! Φ(x)_ν = a_ν x_{ν+1}² + b_ν x_{ν+2}² + c_ν x_{ν+1} x_{ν+2}   (indices mod n)
//! ```
//!
//! with constant, linearly independent control fields. The drift has no
//! constant term, so the origin is always an equilibrium.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    self, check_len, from_columns, hadamard, mat_vec, to_numbers, LinalgError, Matrix, Mode,
    Number, Scalar, Subspace, Tolerance, Vector,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("shape mismatch in `{field}`: expected {expected}, found {found}")]
    ShapeMismatch { field: String, expected: usize, found: usize },
    #[error("control fields are linearly dependent")]
    DependentControls,
    #[error("underactuation rank k = {k} must satisfy 1 <= k <= n - 1 = {}", .n.saturating_sub(1))]
    BadRank { n: usize, k: usize },
    #[error("invalid value in `{field}`: {source}")]
    Value { field: String, source: LinalgError },
    #[error("{0}")]
    Invalid(String),
}

/// Cyclic coordinate shift: `shift = 1` is `P₂x = (x₂,…,xₙ,x₁)`, `shift = 2` is `P₃`.
pub fn cyclic_shift<T: Scalar>(x: &[T], shift: usize) -> Vector<T> {
    let n = x.len();
    (0..n).map(|i| x[(i + shift) % n].clone()).collect()
}

/// A validated system of the quadratic class.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSystem<T> {
    n: usize,
    l: Matrix<T>,
    a: Vector<T>,
    b: Vector<T>,
    c: Vector<T>,
    controls: Vec<Vector<T>>,
    tol: Option<f64>,
}

impl<T: Scalar> QuadraticSystem<T> {
    /// Validates shapes, the rank bound and independence of the controls.
    /// The dimension is taken from `L`.
    pub fn new(
        l: Matrix<T>,
        a: Vector<T>,
        b: Vector<T>,
        c: Vector<T>,
        controls: Vec<Vector<T>>,
    ) -> Result<Self, SystemError> {
        let n = l.len();
        let shape = |field: &str, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(SystemError::ShapeMismatch { field: field.into(), expected, found })
            }
        };
        if n < 2 {
            return Err(SystemError::Invalid(format!("state dimension must be at least 2, got {n}")));
        }
        for (i, row) in l.iter().enumerate() {
            shape(&format!("L[{i}]"), n, row.len())?;
        }
        shape("a", n, a.len())?;
        shape("b", n, b.len())?;
        shape("c", n, c.len())?;
        for (i, f) in controls.iter().enumerate() {
            shape(&format!("controls[{i}]"), n, f.len())?;
        }
        let m = controls.len();
        if m == 0 || m >= n {
            return Err(SystemError::BadRank { n, k: n.saturating_sub(m) });
        }
        let span = Subspace::span(n, &controls, Tolerance::Default)
            .map_err(|source| SystemError::Value { field: "controls".into(), source })?;
        if span.rank() < m {
            return Err(SystemError::DependentControls);
        }
        Ok(QuadraticSystem { n, l, a, b, c, controls, tol: None })
    }

    /// Overrides the floating-point dependence tolerance used by analyses.
    pub fn with_tolerance(mut self, tol: Option<f64>) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol.map_or(Tolerance::Default, Tolerance::Fixed)
    }

    pub fn tol_override(&self) -> Option<f64> {
        self.tol
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Underactuation rank: `n` minus the number of controls.
    pub fn k(&self) -> usize {
        self.n - self.controls.len()
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    pub fn l(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn a(&self) -> &Vector<T> {
        &self.a
    }

    pub fn b(&self) -> &Vector<T> {
        &self.b
    }

    pub fn c(&self) -> &Vector<T> {
        &self.c
    }

    pub fn controls(&self) -> &[Vector<T>] {
        &self.controls
    }

    /// `F` with the control fields as columns.
    pub fn control_matrix(&self) -> Matrix<T> {
        from_columns(self.n, &self.controls)
    }

    pub fn is_linear(&self) -> bool {
        [&self.a, &self.b, &self.c].iter().all(|v| linalg::is_zero_vec(v))
    }

    pub fn linear_part_is_zero(&self) -> bool {
        linalg::is_zero_matrix(&self.l)
    }

    pub fn apply_l(&self, x: &[T]) -> Vector<T> {
        mat_vec(&self.l, x)
    }

    /// `Φ(x) = a⊙P₂x⊙P₂x + b⊙P₃x⊙P₃x + c⊙P₂x⊙P₃x`.
    pub fn phi(&self, x: &[T]) -> Result<Vector<T>, LinalgError> {
        check_len(x, self.n)?;
        let p2 = cyclic_shift(x, 1);
        let p3 = cyclic_shift(x, 2);
        let aa = hadamard(&self.a, &hadamard(&p2, &p2));
        let bb = hadamard(&self.b, &hadamard(&p3, &p3));
        let cc = hadamard(&self.c, &hadamard(&p2, &p3));
        Ok(linalg::add(&linalg::add(&aa, &bb), &cc))
    }

    /// Symmetric bilinear map with `Ψ(u,u) = 2Φ(u)`.
    pub fn psi(&self, u: &[T], v: &[T]) -> Result<Vector<T>, LinalgError> {
        check_len(u, self.n)?;
        check_len(v, self.n)?;
        let (u2, u3) = (cyclic_shift(u, 1), cyclic_shift(u, 2));
        let (v2, v3) = (cyclic_shift(v, 1), cyclic_shift(v, 2));
        let two = T::int(2);
        let aa = linalg::scale(&two, &hadamard(&self.a, &hadamard(&u2, &v2)));
        let bb = linalg::scale(&two, &hadamard(&self.b, &hadamard(&u3, &v3)));
        let cc = hadamard(&self.c, &linalg::add(&hadamard(&u2, &v3), &hadamard(&v2, &u3)));
        Ok(linalg::add(&linalg::add(&aa, &bb), &cc))
    }

    /// Jacobian of `Φ` at `p`, assembled entrywise from the monomial derivatives.
    pub fn dphi(&self, p: &[T]) -> Result<Matrix<T>, LinalgError> {
        check_len(p, self.n)?;
        let n = self.n;
        let two = T::int(2);
        let mut jac = linalg::zeros::<T>(n, n);
        for nu in 0..n {
            let (i, j) = ((nu + 1) % n, (nu + 2) % n);
            let di = two.clone() * self.a[nu].clone() * p[i].clone() + self.c[nu].clone() * p[j].clone();
            let dj = two.clone() * self.b[nu].clone() * p[j].clone() + self.c[nu].clone() * p[i].clone();
            jac[nu][i] = jac[nu][i].clone() + di;
            jac[nu][j] = jac[nu][j].clone() + dj;
        }
        Ok(jac)
    }

    /// `f₀(x) = Lx + Φ(x)`.
    pub fn drift(&self, x: &[T]) -> Result<Vector<T>, LinalgError> {
        Ok(linalg::add(&self.apply_l(x), &self.phi(x)?))
    }

    /// Full controlled vector field `f₀(x) + Σ uᵢ fᵢ`.
    pub fn field(&self, x: &[T], u: &[T]) -> Result<Vector<T>, LinalgError> {
        check_len(u, self.controls.len())?;
        let mut v = self.drift(x)?;
        for (ui, f) in u.iter().zip(&self.controls) {
            for (vi, fi) in v.iter_mut().zip(f) {
                *vi = vi.clone() + ui.clone() * fi.clone();
            }
        }
        Ok(v)
    }

    /// Re-expresses the system in another arithmetic mode (floats rationalize exactly).
    pub fn convert<S: Scalar>(&self) -> QuadraticSystem<S> {
        QuadraticSystem {
            n: self.n,
            l: linalg::convert_mat(&self.l),
            a: linalg::convert_vec(&self.a),
            b: linalg::convert_vec(&self.b),
            c: linalg::convert_vec(&self.c),
            controls: self.controls.iter().map(|f| linalg::convert_vec(f)).collect(),
            tol: self.tol,
        }
    }

    pub fn with_controls(&self, controls: Vec<Vector<T>>) -> Result<Self, SystemError> {
        QuadraticSystem::new(self.l.clone(), self.a.clone(), self.b.clone(), self.c.clone(), controls)
            .map(|s| s.with_tolerance(self.tol))
    }

    pub fn to_spec(&self) -> SystemSpec {
        SystemSpec {
            n: self.n,
            k: self.k(),
            l: self.l.iter().map(|r| to_numbers(r)).collect(),
            a: to_numbers(&self.a),
            b: to_numbers(&self.b),
            c: to_numbers(&self.c),
            controls: self.controls.iter().map(|f| to_numbers(f)).collect(),
            mode: Some(T::MODE),
            tol: self.tol,
        }
    }
}

/// Serialized system description.
///
/// ```json
/// {"n":3,"k":2,"L":[[..],..],"a":[..],"b":[..],"c":[..],"controls":[[..],..],"mode":"rational"}
/// ```
///
/// Each entry of `controls` is one control field `fᵢ` (a column of `F`).
/// Rationals are `"p/q"` strings or JSON integers; non-integer JSON numbers are floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: Vec<Vec<Number>>,
    pub a: Vec<Number>,
    pub b: Vec<Number>,
    pub c: Vec<Number>,
    pub controls: Vec<Vec<Number>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl SystemSpec {
    fn numbers(&self) -> impl Iterator<Item = &Number> {
        self.l
            .iter()
            .flatten()
            .chain(&self.a)
            .chain(&self.b)
            .chain(&self.c)
            .chain(self.controls.iter().flatten())
    }

    /// Declared mode, or exact when every entry is rational.
    pub fn preferred_mode(&self) -> Mode {
        self.mode.unwrap_or_else(|| {
            if self.numbers().all(|x| x.mode() == Mode::Rational) {
                Mode::Rational
            } else {
                Mode::Float
            }
        })
    }

    /// Validates the raw description into a system of the given arithmetic mode.
    pub fn build<T: Scalar>(&self) -> Result<QuadraticSystem<T>, SystemError> {
        let n = self.n;
        if !(1..n).contains(&self.k) {
            return Err(SystemError::BadRank { n, k: self.k });
        }
        let shape = |field: &str, expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(SystemError::ShapeMismatch { field: field.into(), expected, found })
            }
        };
        shape("L", n, self.l.len())?;
        shape("controls", n - self.k, self.controls.len())?;
        if let Some(t) = self.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(SystemError::Value { field: "tol".into(), source: LinalgError::BadTolerance(t) });
            }
        }
        let vec = |field: &str, v: &[Number]| -> Result<Vector<T>, SystemError> {
            shape(field, n, v.len())?;
            v.iter()
                .enumerate()
                .map(|(i, x)| {
                    x.resolve::<T>()
                        .map_err(|source| SystemError::Value { field: format!("{field}[{i}]"), source })
                })
                .collect()
        };
        let l = self
            .l
            .iter()
            .enumerate()
            .map(|(i, row)| vec(&format!("L[{i}]"), row))
            .collect::<Result<Matrix<T>, _>>()?;
        let controls = self
            .controls
            .iter()
            .enumerate()
            .map(|(i, f)| vec(&format!("controls[{i}]"), f))
            .collect::<Result<Vec<_>, _>>()?;
        QuadraticSystem::new(l, vec("a", &self.a)?, vec("b", &self.b)?, vec("c", &self.c)?, controls)
            .map(|s| s.with_tolerance(self.tol))
    }
}
