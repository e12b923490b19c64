//! Exact Lie brackets of polynomial vector fields, the brute-force oracle for
//! the strong accessibility distribution at the origin, and closed forms for
//! low-order brackets of the quadratic class.

mod poly;

use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{self, to_numbers, Rational, Scalar, Subspace, Tolerance, Vector};
use crate::system::QuadraticSystem;

pub(crate) use poly::FieldEchelon;
pub use poly::{Monomial, Poly, PolyVectorField};

#[derive(Debug, Error, PartialEq)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("max_len must be at least 1")]
    BadLength,
    #[error("bracket enumeration exceeded the cap of {cap} brackets")]
    ResourceCap { cap: usize },
    #[error("field index {index} out of range (0..={max})")]
    IndexOutOfRange { index: usize, max: usize },
}

/// A bracket expression over the fields `f₀` (drift) and `f₁ … f_m` (controls).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BracketWord {
    Leaf(usize),
    Bracket(Box<BracketWord>, Box<BracketWord>),
}

impl BracketWord {
    pub fn bracket(left: BracketWord, right: BracketWord) -> Self {
        BracketWord::Bracket(Box::new(left), Box::new(right))
    }

    /// `ad_{X_l} ⋯ ad_{X_1} f_j` where `outer = [X_1, …, X_l]`.
    pub fn left_normed(j: usize, outer: &[usize]) -> Self {
        outer.iter().fold(BracketWord::Leaf(j), |acc, &x| BracketWord::bracket(BracketWord::Leaf(x), acc))
    }

    /// Number of leaves.
    pub fn degree(&self) -> usize {
        match self {
            BracketWord::Leaf(_) => 1,
            BracketWord::Bracket(l, r) => l.degree() + r.degree(),
        }
    }

    /// `δ⁰, δ¹, …, δ^{m}`: how often each field occurs.
    pub fn degree_counts(&self, num_fields: usize) -> Vec<usize> {
        let mut counts = vec![0; num_fields];
        self.count_into(&mut counts);
        counts
    }

    fn count_into(&self, counts: &mut Vec<usize>) {
        match self {
            BracketWord::Leaf(i) => {
                if *i >= counts.len() {
                    counts.resize(i + 1, 0);
                }
                counts[*i] += 1;
            }
            BracketWord::Bracket(l, r) => {
                l.count_into(counts);
                r.count_into(counts);
            }
        }
    }

    fn max_leaf(&self) -> usize {
        match self {
            BracketWord::Leaf(i) => *i,
            BracketWord::Bracket(l, r) => l.max_leaf().max(r.max_leaf()),
        }
    }

    /// Symbolic value given `fields[i]` for leaf `i`.
    pub fn evaluate(&self, fields: &[PolyVectorField]) -> Result<PolyVectorField, LieError> {
        let max = self.max_leaf();
        if max >= fields.len() {
            return Err(LieError::IndexOutOfRange { index: max, max: fields.len().saturating_sub(1) });
        }
        self.eval_checked(fields)
    }

    fn eval_checked(&self, fields: &[PolyVectorField]) -> Result<PolyVectorField, LieError> {
        match self {
            BracketWord::Leaf(i) => Ok(fields[*i].clone()),
            BracketWord::Bracket(l, r) => l.eval_checked(fields)?.bracket(&r.eval_checked(fields)?),
        }
    }
}

impl fmt::Display for BracketWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketWord::Leaf(i) => write!(f, "f{i}"),
            BracketWord::Bracket(l, r) => write!(f, "[{l},{r}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleOptions {
    /// Longest word `ad_{X_l}⋯ad_{X_1}f_j` has `max_len` letters.
    pub max_len: usize,
    /// Hard limit on evaluated brackets.
    pub max_brackets: usize,
    pub record_forest: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { max_len: 8, max_brackets: 100_000, record_forest: false }
    }
}

#[derive(Debug, Clone)]
pub struct ForestEntry {
    pub word: BracketWord,
    pub value: Vector<Rational>,
    /// Whether the bracket was expanded further (nonzero and independent of its level).
    pub kept: bool,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub span: Subspace<Rational>,
    pub brackets_evaluated: usize,
    /// Longest word length actually enumerated.
    pub levels: usize,
    pub forest: Vec<ForestEntry>,
}

impl OracleRun {
    /// Forest as JSON, flagging each value's membership in `sk`.
    pub fn forest_json(&self, sk: &Subspace<Rational>) -> Value {
        Value::Array(
            self.forest
                .iter()
                .map(|e| {
                    json!({
                        "word": e.word.to_string(),
                        "degree": e.word.degree(),
                        "value": to_numbers(&e.value),
                        "kept": e.kept,
                        "in_s_k": sk.contains(&e.value).unwrap_or(false),
                    })
                })
                .collect(),
        )
    }
}

/// Span at the origin of all brackets `ad_{X_l}⋯ad_{X_1}f_j`, `l ≤ max_len − 1`.
pub fn c0_span_at_origin<T: Scalar>(sys: &QuadraticSystem<T>, max_len: usize) -> Result<Subspace<Rational>, LieError> {
    Ok(c0_oracle(sys, OracleOptions { max_len, ..OracleOptions::default() })?.span)
}

/// Enumerates left-normed brackets level by level in exact arithmetic.
///
/// At each length only a basis of the span of the level's (truncated) fields
/// is expanded; since `ad_X` is linear this loses nothing. Monomials whose
/// degree exceeds the remaining number of bracketing steps are dropped: each
/// `ad_{fᵢ}` lowers degree by exactly one and `ad_{f₀}` never lowers it, so
/// such terms cannot contribute a value at the origin.
pub fn c0_oracle<T: Scalar>(sys: &QuadraticSystem<T>, opts: OracleOptions) -> Result<OracleRun, LieError> {
    if opts.max_len == 0 {
        return Err(LieError::BadLength);
    }
    let n = sys.n();
    let fields = PolyVectorField::system_fields(sys);
    let letters = fields.len();
    let mut span = Subspace::zero(n);
    let mut forest = Vec::new();
    let mut level: Vec<(BracketWord, PolyVectorField)> = Vec::new();
    for (j, f) in fields.iter().enumerate().skip(1) {
        let value = f.value_at_origin();
        span.extend(std::slice::from_ref(&value)).expect("system dimension");
        if opts.record_forest {
            forest.push(ForestEntry { word: BracketWord::Leaf(j), value, kept: true });
        }
        level.push((BracketWord::Leaf(j), f.clone()));
    }
    let mut evaluated = level.len();
    let mut levels = 1;
    for l in 1..opts.max_len {
        if span.is_full() || level.is_empty() {
            break;
        }
        evaluated += level.len() * letters;
        if evaluated > opts.max_brackets {
            return Err(LieError::ResourceCap { cap: opts.max_brackets });
        }
        let budget = (opts.max_len - 1 - l) as u32;
        let children: Vec<(BracketWord, PolyVectorField)> = level
            .par_iter()
            .flat_map_iter(|(w, b)| {
                fields.iter().enumerate().map(move |(x, fx)| {
                    let word = BracketWord::bracket(BracketWord::Leaf(x), w.clone());
                    let field = fx.bracket(b).expect("fields share the dimension").truncate(budget);
                    (word, field)
                })
            })
            .collect();
        levels = l + 1;
        let mut echelon = FieldEchelon::default();
        let mut next = Vec::new();
        for (word, field) in children {
            let value = field.value_at_origin();
            if !linalg::is_zero_vec(&value) {
                span.extend(std::slice::from_ref(&value)).expect("system dimension");
            }
            let kept = !field.is_zero() && echelon.insert(&field);
            if opts.record_forest {
                forest.push(ForestEntry { word: word.clone(), value, kept });
            }
            if kept {
                next.push((word, field));
            }
        }
        level = next;
    }
    let basis = span.basis().to_vec();
    let span = Subspace::span(n, &basis, Tolerance::Default).expect("system dimension");
    Ok(OracleRun { span, brackets_evaluated: evaluated, levels, forest })
}

/// Low-order brackets with known closed forms at the origin. Control indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// `ad^p_{f₀} fᵢ(0) = (−1)^p L^p fᵢ`.
    Ad { i: usize, power: usize },
    /// `[f_j,[f₀,fᵢ]] = −Ψ(fᵢ,f_j)`.
    Mixed2 { i: usize, j: usize },
    /// `[f_j, ad²_{f₀}fᵢ](0) = LΨ(fᵢ,f_j) + Ψ(f_j,Lfᵢ) − Ψ(fᵢ,Lf_j)`.
    Order3 { i: usize, j: usize },
    /// `[f_l,[f_j, ad²_{f₀}fᵢ]] = Ψ(Ψ(fᵢ,f_j),f_l) + Ψ(Ψ(fᵢ,f_l),f_j) − Ψ(fᵢ,Ψ(f_j,f_l))`.
    Order4 { i: usize, j: usize, l: usize },
}

impl ClosedForm {
    /// The bracket this closed form evaluates.
    pub fn word(&self) -> BracketWord {
        match *self {
            ClosedForm::Ad { i, power } => BracketWord::left_normed(i, &vec![0; power]),
            ClosedForm::Mixed2 { i, j } => BracketWord::left_normed(i, &[0, j]),
            ClosedForm::Order3 { i, j } => BracketWord::left_normed(i, &[0, 0, j]),
            ClosedForm::Order4 { i, j, l } => BracketWord::left_normed(i, &[0, 0, j, l]),
        }
    }

    fn indices(&self) -> Vec<usize> {
        match *self {
            ClosedForm::Ad { i, .. } => vec![i],
            ClosedForm::Mixed2 { i, j } | ClosedForm::Order3 { i, j } => vec![i, j],
            ClosedForm::Order4 { i, j, l } => vec![i, j, l],
        }
    }
}

pub fn closed_form_bracket<T: Scalar>(sys: &QuadraticSystem<T>, form: ClosedForm) -> Result<Vector<T>, LieError> {
    let m = sys.num_controls();
    for idx in form.indices() {
        if idx == 0 || idx > m {
            return Err(LieError::IndexOutOfRange { index: idx, max: m });
        }
    }
    let f = |i: usize| &sys.controls()[i - 1];
    let psi = |u: &[T], v: &[T]| sys.psi(u, v).expect("system dimension");
    Ok(match form {
        ClosedForm::Ad { i, power } => {
            let v = (0..power).fold(f(i).clone(), |v, _| sys.apply_l(&v));
            if power % 2 == 1 {
                linalg::scale(&-T::int(1), &v)
            } else {
                v
            }
        }
        ClosedForm::Mixed2 { i, j } => linalg::scale(&-T::int(1), &psi(f(i), f(j))),
        ClosedForm::Order3 { i, j } => {
            let t1 = sys.apply_l(&psi(f(i), f(j)));
            let t2 = psi(f(j), &sys.apply_l(f(i)));
            let t3 = psi(f(i), &sys.apply_l(f(j)));
            linalg::sub(&linalg::add(&t1, &t2), &t3)
        }
        ClosedForm::Order4 { i, j, l } => {
            let t1 = psi(&psi(f(i), f(j)), f(l));
            let t2 = psi(&psi(f(i), f(l)), f(j));
            let t3 = psi(f(i), &psi(f(j), f(l)));
            linalg::sub(&linalg::add(&t1, &t2), &t3)
        }
    })
}
