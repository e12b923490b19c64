//! The subspace chain `S₀ ⊆ S₁ ⊆ …` and the accessibility verdict it decides.
//!
//! `S₀` is spanned by the control fields and
//! `S_{λ+1} = S_λ + span{Lω, Φ(ω) : ω ∈ S_λ}`. Since `Φ` restricted to a
//! subspace is determined by `Φ` and `Ψ` on a basis (polarization), each step
//! is generated by `{Lbᵢ} ∪ {Φ(bᵢ)} ∪ {Ψ(bᵢ,bⱼ) : i < j}` over a basis `{bᵢ}`.
//! The system is locally strongly accessible from the origin iff `S_k = ℝⁿ`.

use crate::linalg::{mat_vec, transpose, LinalgError, Matrix, Scalar, Subspace, Tolerance, Vector};
use crate::system::QuadraticSystem;
use crate::verdict::{Certificate, Rule, Verdict, VerdictTag};

#[derive(Debug, Clone)]
pub struct ChainResult<T> {
    /// `S₀, …, S_k`; entries after stationarity repeat the stationary subspace.
    pub subspaces: Vec<Subspace<T>>,
    pub dims: Vec<usize>,
    /// First `λ` with `dim S_λ = dim S_{λ+1}`.
    pub stationary_at: usize,
    pub degree_of_reachability: usize,
}

impl<T: Scalar> ChainResult<T> {
    pub fn last(&self) -> &Subspace<T> {
        self.subspaces.last().expect("chain always holds S_0")
    }
}

/// Generators of `S_{λ+1}` beyond `S_λ`, given a basis of `S_λ`.
pub fn step_generators<T: Scalar>(sys: &QuadraticSystem<T>, basis: &[Vector<T>]) -> Vec<Vector<T>> {
    let mut gens = Vec::with_capacity(2 * basis.len() + basis.len() * basis.len() / 2);
    for b in basis {
        gens.push(sys.apply_l(b));
        gens.push(sys.phi(b).expect("basis vectors have the system dimension"));
    }
    for (i, bi) in basis.iter().enumerate() {
        for bj in &basis[i + 1..] {
            gens.push(sys.psi(bi, bj).expect("basis vectors have the system dimension"));
        }
    }
    gens
}

fn next<T: Scalar>(sys: &QuadraticSystem<T>, s: &Subspace<T>) -> Subspace<T> {
    let mut out = s.clone();
    if !out.is_full() {
        out.extend(&step_generators(sys, s.basis())).expect("generators have the system dimension");
    }
    out
}

pub fn s_chain<T: Scalar>(sys: &QuadraticSystem<T>) -> ChainResult<T> {
    let n = sys.n();
    let k = sys.k();
    let s0 = Subspace::span(n, sys.controls(), sys.tolerance()).expect("validated controls");
    let mut subspaces = vec![s0];
    let mut stationary_at = None;
    while subspaces.len() <= k {
        let last = subspaces.last().expect("nonempty");
        if stationary_at.is_some() {
            subspaces.push(last.clone());
            continue;
        }
        let s = next(sys, last);
        if s.rank() == last.rank() {
            stationary_at = Some(subspaces.len() - 1);
        }
        subspaces.push(s);
    }
    // dim S_λ grows by at least one per step until it stalls, so it stalls by λ = k.
    let stationary_at = stationary_at.unwrap_or(k);
    let dims: Vec<usize> = subspaces.iter().map(Subspace::rank).collect();
    let degree_of_reachability = *dims.last().expect("nonempty");
    ChainResult { subspaces, dims, stationary_at, degree_of_reachability }
}

/// Strong accessibility from the origin: `S_k = ℝⁿ`.
///
/// A deficient chain also rules out the weaker accessibility property, and its
/// dimension is reported as the degree of reachability.
pub fn accessibility_verdict<T: Scalar>(sys: &QuadraticSystem<T>) -> Verdict<T> {
    verdict_from_chain(sys, &s_chain(sys))
}

pub fn verdict_from_chain<T: Scalar>(sys: &QuadraticSystem<T>, chain: &ChainResult<T>) -> Verdict<T> {
    let certificate = Certificate::Chain { dims: chain.dims.clone(), basis: chain.last().basis().to_vec() };
    let tag = if chain.degree_of_reachability == sys.n() {
        VerdictTag::StronglyAccessible
    } else {
        VerdictTag::NotAccessible
    };
    Verdict::decided(tag, Rule::AccessibilityRank, certificate)
        .with_degree(chain.degree_of_reachability)
}

/// `L^p bᵢ` for every column and `p = 0..n−1`, labelled `(column, power)`.
pub fn krylov_vectors<T: Scalar>(l: &Matrix<T>, columns: &[Vector<T>]) -> Vec<((usize, usize), Vector<T>)> {
    let n = l.len();
    let mut out = Vec::with_capacity(n * columns.len());
    for (i, b) in columns.iter().enumerate() {
        let mut v = b.clone();
        for p in 0..n {
            if p > 0 {
                v = mat_vec(l, &v);
            }
            out.push(((i, p), v.clone()));
        }
    }
    out
}

/// Span of `[B | LB | … | L^{n−1}B]` for `B` given by its columns.
pub fn controllable_subspace<T: Scalar>(
    l: &Matrix<T>,
    columns: &[Vector<T>],
    tol: Tolerance,
) -> Result<Subspace<T>, LinalgError> {
    let vs: Vec<Vector<T>> = krylov_vectors(l, columns).into_iter().map(|(_, v)| v).collect();
    Subspace::span(l.len(), &vs, tol)
}

/// Kalman rank condition for `ẋ = Lx + Bu`, `B` an `n × m` matrix.
pub fn kalman_rank<T: Scalar>(l: &Matrix<T>, b: &Matrix<T>) -> Result<bool, LinalgError> {
    let n = l.len();
    for row in l {
        crate::linalg::check_len(row, n)?;
    }
    crate::linalg::check_len(b, n)?;
    let columns = transpose(b);
    Ok(controllable_subspace(l, &columns, Tolerance::Default)?.is_full())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_columns, imat, ivec, unit, Rational};

    type Q = Rational;

    fn r5() -> QuadraticSystem<Q> {
        QuadraticSystem::new(
            imat(&[
                &[0, 0, 0, 0, 0],
                &[0, 1, 0, 0, 0],
                &[0, 0, -1, 0, 0],
                &[0, 0, 0, 0, 1],
                &[0, 0, 0, 0, 0],
            ]),
            ivec(&[0, 0, 0, 0, 0]),
            ivec(&[0, 0, 0, -1, -1]),
            ivec(&[0, 0, 1, 0, 1]),
            vec![unit(5, 0)],
        )
        .unwrap()
    }

    #[test]
    fn five_dimensional_example() {
        let sys = r5();
        let ch = s_chain(&sys);
        assert_eq!(ch.dims, vec![1, 2, 2, 2, 2]);
        assert_eq!(ch.stationary_at, 1);
        let expect = Subspace::span(5, &[unit(5, 0), unit(5, 3)], Tolerance::Default).unwrap();
        assert!(ch.last().same_span(&expect).unwrap());
        let v = accessibility_verdict(&sys);
        assert_eq!(v.tag, VerdictTag::NotAccessible);
        assert_eq!(v.degree_of_reachability, Some(2));
    }

    #[test]
    fn monotone_counterexample_chain_is_full_at_one() {
        let z: Vector<Q> = ivec(&[0, 0, 0]);
        let sys = QuadraticSystem::new(imat(&[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]]), z.clone(), ivec(&[0, 0, 1]), z, vec![unit(3, 0), unit(3, 1)]).unwrap();
        let ch = s_chain(&sys);
        assert_eq!(ch.dims, vec![2, 3]);
        assert_eq!(accessibility_verdict(&sys).tag, VerdictTag::StronglyAccessible);
    }

    #[test]
    fn linear_chain_is_krylov() {
        let z: Vector<Q> = ivec(&[0, 0, 0, 0]);
        let l: Matrix<Q> = imat(&[&[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 0], &[1, 0, 0, 2]]);
        let sys = QuadraticSystem::new(l.clone(), z.clone(), z.clone(), z, vec![unit(4, 2)]).unwrap();
        let ch = s_chain(&sys);
        for (lam, s) in ch.subspaces.iter().enumerate() {
            let kry: Vec<Vector<Q>> = krylov_vectors(&l, &[unit(4, 2)])
                .into_iter()
                .filter(|((_, p), _)| *p <= lam)
                .map(|(_, v)| v)
                .collect();
            assert!(s.same_span(&Subspace::span(4, &kry, Tolerance::Default).unwrap()).unwrap());
        }
    }

    #[test]
    fn kalman_examples() {
        let di: Matrix<Q> = imat(&[&[0, 1], &[0, 0]]);
        assert!(kalman_rank(&di, &imat(&[&[0], &[1]])).unwrap());
        let z: Matrix<Q> = imat(&[&[0, 0], &[0, 0]]);
        assert!(!kalman_rank(&z, &imat(&[&[1], &[0]])).unwrap());
        let sprott: Matrix<Q> = imat(&[&[0, 0, -1], &[-1, 0, 0], &[0, -1, 0]]);
        let b: Matrix<Q> = imat(&[&[1], &[0], &[0]]);
        assert!(kalman_rank(&sprott, &b).unwrap());
        let cols: Vec<Vector<Q>> = krylov_vectors(&sprott, &[unit(3, 0)]).into_iter().map(|(_, v)| v).collect();
        assert_eq!(crate::linalg::determinant(&from_columns(3, &cols)), Q::int(-1));
        assert!(kalman_rank(&sprott, &imat(&[&[1], &[0]])).is_err());
    }

    #[test]
    fn float_chain_matches_exact_on_example() {
        let ch = s_chain(&r5().convert::<f64>());
        assert_eq!(ch.dims, vec![1, 2, 2, 2, 2]);
    }
}
