//! Sparse multivariate polynomials and polynomial vector fields over ℚ.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::linalg::{Rational, Scalar, Vector};
use crate::system::QuadraticSystem;

use super::LieError;

/// Exponent multi-index, one entry per variable.
pub type Monomial = Vec<u32>;

/// A polynomial in `n` variables. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

fn degree_of(m: &[u32]) -> u32 {
    m.iter().sum()
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(vec![0; n], c);
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| degree_of(m)).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(&-Rational::int(1)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    /// `∂p/∂x_i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m[i] > 0 {
                let mut d = m.clone();
                d[i] -= 1;
                out.add_term(d, c * Rational::int(i64::from(m[i])));
            }
        }
        out
    }

    /// Drops every monomial of total degree above `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Poly {
        Poly { terms: self.terms.iter().filter(|(m, _)| degree_of(m) <= max_degree).map(|(m, c)| (m.clone(), c.clone())).collect() }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.iter().find(|(m, _)| degree_of(m) == 0).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (m, c)| {
            let mono = m.iter().zip(x).fold(Rational::int(1), |p, (&e, xi)| {
                (0..e).fold(p, |q, _| q * xi)
            });
            acc + c * mono
        })
    }
}

/// A vector field on `ℝⁿ` with polynomial components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVectorField {
    n: usize,
    components: Vec<Poly>,
}

impl PolyVectorField {
    pub fn zero(n: usize) -> Self {
        PolyVectorField { n, components: vec![Poly::zero(); n] }
    }

    pub fn from_components(components: Vec<Poly>) -> Self {
        PolyVectorField { n: components.len(), components }
    }

    pub fn constant(v: &[Rational]) -> Self {
        let n = v.len();
        PolyVectorField { n, components: v.iter().map(|c| Poly::constant(n, c.clone())).collect() }
    }

    /// The drift `f₀(x) = Lx + Φ(x)` of a system, with floats rationalized exactly.
    pub fn drift<T: Scalar>(sys: &QuadraticSystem<T>) -> Self {
        let n = sys.n();
        let q = |t: &T| t.to_rational();
        let var = |idx: &[usize]| {
            let mut m = vec![0u32; n];
            for &i in idx {
                m[i] += 1;
            }
            m
        };
        let components = (0..n)
            .map(|nu| {
                let mut p = Poly::zero();
                for (j, lj) in sys.l()[nu].iter().enumerate() {
                    p.add_term(var(&[j]), q(lj));
                }
                let (s1, s2) = ((nu + 1) % n, (nu + 2) % n);
                p.add_term(var(&[s1, s1]), q(&sys.a()[nu]));
                p.add_term(var(&[s2, s2]), q(&sys.b()[nu]));
                p.add_term(var(&[s1, s2]), q(&sys.c()[nu]));
                p
            })
            .collect();
        PolyVectorField { n, components }
    }

    /// Drift followed by the control fields, indexed as in bracket words.
    pub fn system_fields<T: Scalar>(sys: &QuadraticSystem<T>) -> Vec<PolyVectorField> {
        let mut out = vec![Self::drift(sys)];
        out.extend(sys.controls().iter().map(|f| {
            let fq: Vec<Rational> = f.iter().map(Scalar::to_rational).collect();
            Self::constant(&fq)
        }));
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.components.iter().filter_map(Poly::degree).max()
    }

    fn check(&self, other: &PolyVectorField) -> Result<(), LieError> {
        if self.n != other.n {
            return Err(LieError::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn add(&self, other: &PolyVectorField) -> Result<PolyVectorField, LieError> {
        self.check(other)?;
        Ok(Self::from_components(self.components.iter().zip(&other.components).map(|(p, q)| p.add(q)).collect()))
    }

    pub fn sub(&self, other: &PolyVectorField) -> Result<PolyVectorField, LieError> {
        self.check(other)?;
        Ok(Self::from_components(self.components.iter().zip(&other.components).map(|(p, q)| p.sub(q)).collect()))
    }

    pub fn scale(&self, s: &Rational) -> PolyVectorField {
        Self::from_components(self.components.iter().map(|p| p.scale(s)).collect())
    }

    /// Directional derivative `Dg · f` of `self = g` along `f`.
    pub fn derivative_along(&self, f: &PolyVectorField) -> PolyVectorField {
        let components = self
            .components
            .iter()
            .map(|g| {
                (0..self.n)
                    .filter(|&i| !f.components[i].is_zero())
                    .fold(Poly::zero(), |acc, i| acc.add(&g.derivative(i).mul(&f.components[i])))
            })
            .collect();
        Self::from_components(components)
    }

    /// `[self, g] = Dg·self − D(self)·g`.
    pub fn bracket(&self, g: &PolyVectorField) -> Result<PolyVectorField, LieError> {
        self.check(g)?;
        g.derivative_along(self).sub(&self.derivative_along(g))
    }

    pub fn truncate(&self, max_degree: u32) -> PolyVectorField {
        Self::from_components(self.components.iter().map(|p| p.truncate(max_degree)).collect())
    }

    pub fn value_at_origin(&self) -> Vector<Rational> {
        self.components.iter().map(Poly::constant_term).collect()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vector<Rational>, LieError> {
        if x.len() != self.n {
            return Err(LieError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(self.components.iter().map(|p| p.eval(x)).collect())
    }
}

/// Incremental linear-independence test for polynomial vector fields.
///
/// Each stored row is keyed by its leading `(component, monomial)` and
/// reduction repeatedly cancels the current leading term.
#[derive(Debug, Default)]
pub(crate) struct FieldEchelon {
    rows: BTreeMap<(usize, Monomial), BTreeMap<(usize, Monomial), Rational>>,
}

impl FieldEchelon {
    fn flatten(f: &PolyVectorField) -> BTreeMap<(usize, Monomial), Rational> {
        f.components
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms.iter().map(move |(m, c)| ((i, m.clone()), c.clone())))
            .collect()
    }

    /// Inserts `f` if it is independent of the stored fields; returns whether it was.
    pub(crate) fn insert(&mut self, f: &PolyVectorField) -> bool {
        let mut r = Self::flatten(f);
        while let Some((lead, c)) = r.iter().next_back().map(|(k, v)| (k.clone(), v.clone())) {
            let Some(row) = self.rows.get(&lead) else {
                let inv = Rational::int(1) / c;
                let row = r.into_iter().map(|(k, v)| (k, v * &inv)).collect();
                self.rows.insert(lead, row);
                return true;
            };
            for (k, v) in row {
                let e = r.entry(k.clone()).or_insert_with(Rational::zero);
                *e -= &c * v;
                if e.is_zero() {
                    r.remove(k);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ivec, Rational};

    fn q(i: i64) -> Rational {
        Rational::int(i)
    }

    #[test]
    fn poly_arithmetic() {
        // p = x^2 y + 3, in two variables
        let mut p = Poly::zero();
        p.add_term(vec![2, 1], q(1));
        p.add_term(vec![0, 0], q(3));
        assert_eq!(p.degree(), Some(3));
        assert_eq!(p.derivative(0).terms().get(&vec![1, 1]), Some(&q(2)));
        assert_eq!(p.eval(&[q(2), q(5)]), q(23));
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.truncate(2).degree(), Some(0));
        assert_eq!(p.mul(&p).eval(&[q(1), q(1)]), q(16));
        assert_eq!(p.constant_term(), q(3));
    }

    #[test]
    fn constant_fields_commute() {
        let f = PolyVectorField::constant(&ivec(&[1, 2, 3]));
        let g = PolyVectorField::constant(&ivec(&[0, 1, 0]));
        assert!(f.bracket(&g).unwrap().is_zero());
        assert!(f.bracket(&PolyVectorField::zero(2)).is_err());
    }

    #[test]
    fn echelon_detects_dependence() {
        let mut e = FieldEchelon::default();
        let f = PolyVectorField::constant(&ivec(&[1, 2]));
        let g = PolyVectorField::constant(&ivec(&[0, 1]));
        assert!(e.insert(&f));
        assert!(e.insert(&g));
        assert!(!e.insert(&PolyVectorField::constant(&ivec(&[3, -1]))));
        assert!(!e.insert(&PolyVectorField::zero(2)));
    }
}
