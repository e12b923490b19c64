use super::{check_len, norm, to_f64_vec, LinalgError, Mode, Scalar, Vector};

/// How a floating-point subspace decides linear dependence.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Tolerance {
    /// `n · ε · (largest input norm)`.
    #[default]
    Default,
    Fixed(f64),
}

impl Tolerance {
    fn resolve(self, n: usize, max_norm: f64) -> Result<f64, LinalgError> {
        match self {
            Tolerance::Default => Ok(n as f64 * f64::EPSILON * max_norm),
            Tolerance::Fixed(t) if t.is_finite() && t >= 0.0 => Ok(t),
            Tolerance::Fixed(t) => Err(LinalgError::BadTolerance(t)),
        }
    }
}

/// A linear subspace of `ℝⁿ` held as an ordered, linearly independent basis.
///
/// The basis consists of input vectors (never rescaled), so bases of small
/// integer spans stay readable. Membership is answered from a private
/// reduced form: echelon rows in exact mode, an orthonormal frame in float
/// mode. The zero subspace has an empty basis.
#[derive(Debug, Clone)]
pub struct Subspace<T> {
    ambient_dim: usize,
    basis: Vec<Vector<T>>,
    tol: f64,
    echelon: Vec<(usize, Vector<T>)>,
    frame: Vec<Vec<f64>>,
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new(), tol: 0.0, echelon: Vec::new(), frame: Vec::new() }
    }

    /// Spans `vectors`. Exact mode keeps the first independent vectors in input
    /// order; float mode selects by largest residual norm (column-norm pivoting).
    pub fn span(ambient_dim: usize, vectors: &[Vector<T>], tol: Tolerance) -> Result<Self, LinalgError> {
        for v in vectors {
            check_len(v, ambient_dim)?;
        }
        let mut s = Self::zero(ambient_dim);
        match T::MODE {
            Mode::Rational => {
                for v in vectors {
                    s.push_exact(v);
                    if s.rank() == ambient_dim {
                        break;
                    }
                }
            }
            Mode::Float => {
                let floats: Vec<Vec<f64>> = vectors.iter().map(|v| to_f64_vec(v)).collect();
                let max_norm = floats.iter().map(|v| norm(v)).fold(0.0, f64::max);
                s.tol = tol.resolve(ambient_dim, max_norm)?;
                s.push_pivoted(vectors, &floats);
            }
        }
        Ok(s)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vector<T>] {
        &self.basis
    }

    /// Resolved dependence tolerance; always zero in exact mode.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim
    }

    pub fn contains(&self, v: &[T]) -> Result<bool, LinalgError> {
        check_len(v, self.ambient_dim)?;
        Ok(match T::MODE {
            Mode::Rational => self.reduce_exact(v).is_none(),
            Mode::Float => {
                let vf = to_f64_vec(v);
                norm(&self.residual(&vf)) <= self.threshold(&vf)
            }
        })
    }

    pub fn contains_all(&self, vs: &[Vector<T>]) -> Result<bool, LinalgError> {
        for v in vs {
            if !self.contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn contains_subspace(&self, other: &Subspace<T>) -> Result<bool, LinalgError> {
        self.contains_all(&other.basis)
    }

    /// Mutual containment.
    pub fn same_span(&self, other: &Subspace<T>) -> Result<bool, LinalgError> {
        Ok(self.rank() == other.rank() && self.contains_subspace(other)? && other.contains_subspace(self)?)
    }

    pub fn sum(&self, other: &Subspace<T>) -> Result<Subspace<T>, LinalgError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(LinalgError::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        let mut s = self.clone();
        s.extend(&other.basis)?;
        Ok(s)
    }

    /// Adds vectors to the span in place, keeping the current basis as a prefix.
    pub fn extend(&mut self, vectors: &[Vector<T>]) -> Result<(), LinalgError> {
        for v in vectors {
            check_len(v, self.ambient_dim)?;
        }
        match T::MODE {
            Mode::Rational => {
                for v in vectors {
                    if self.is_full() {
                        break;
                    }
                    self.push_exact(v);
                }
            }
            Mode::Float => {
                let floats: Vec<Vec<f64>> = vectors.iter().map(|v| to_f64_vec(v)).collect();
                if self.basis.is_empty() && self.tol == 0.0 {
                    let max_norm = floats.iter().map(|v| norm(v)).fold(0.0, f64::max);
                    self.tol = Tolerance::Default.resolve(self.ambient_dim, max_norm)?;
                }
                self.push_pivoted(vectors, &floats);
            }
        }
        Ok(())
    }

    fn reduce_exact(&self, v: &[T]) -> Option<Vector<T>> {
        let mut r = v.to_vec();
        for (p, row) in &self.echelon {
            if r[*p].is_zero() {
                continue;
            }
            let c = r[*p].clone();
            for (x, y) in r.iter_mut().zip(row) {
                *x = x.clone() - c.clone() * y.clone();
            }
        }
        r.iter().position(|x| !x.is_zero()).map(|p| {
            let pv = r[p].clone();
            r.iter().map(|x| x.clone() / pv.clone()).collect::<Vector<T>>()
        })
    }

    fn push_exact(&mut self, v: &[T]) {
        if let Some(row) = self.reduce_exact(v) {
            let p = row.iter().position(|x| !x.is_zero()).expect("reduced row is nonzero");
            self.echelon.push((p, row));
            self.basis.push(v.to_vec());
        }
    }

    fn threshold(&self, v: &[f64]) -> f64 {
        self.tol * norm(v).max(1.0)
    }

    // Two passes of modified Gram-Schmidt against the current frame.
    fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.frame {
                let c: f64 = q.iter().zip(&r).map(|(a, b)| a * b).sum();
                for (x, y) in r.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        r
    }

    fn push_pivoted(&mut self, vectors: &[Vector<T>], floats: &[Vec<f64>]) {
        let mut remaining: Vec<usize> = (0..vectors.len()).collect();
        while !remaining.is_empty() && !self.is_full() {
            let (pos, resid, rnorm) = remaining
                .iter()
                .enumerate()
                .map(|(pos, &i)| {
                    let r = self.residual(&floats[i]);
                    let rn = norm(&r);
                    (pos, r, rn)
                })
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .expect("nonempty");
            let i = remaining[pos];
            if rnorm <= self.threshold(&floats[i]) || rnorm == 0.0 {
                break;
            }
            self.frame.push(resid.iter().map(|x| x / rnorm).collect());
            self.basis.push(vectors[i].clone());
            remaining.remove(pos);
        }
    }
}
